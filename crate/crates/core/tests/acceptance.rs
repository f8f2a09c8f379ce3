//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see the table.

mod common;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use liouville::cli::{self, RunConfig};
use liouville::friedrichs::{self, ExpintRegime, PrefactorMode, ResonanceData};
use liouville::grid::{rel_l2, Axis, LiouvilleState};
use liouville::survival::{self, CurveOptions, CurveSource, DecayCurve};
use liouville::timeop::{self, ProjectionMethod};
use liouville::{oracle, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FFT: ProjectionMethod = ProjectionMethod::FftTruncation;
const HILBERT: ProjectionMethod = ProjectionMethod::HilbertForm;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn golden() -> Vec<oracle::Golden> {
    oracle::read_golden(std::io::Cursor::new(include_str!("data/golden.csv"))).unwrap()
}

fn golden_value(rows: &[oracle::Golden], name: &str) -> f64 {
    oracle::golden(rows, name).unwrap().value
}

fn random_states(n: usize, seed: u64) -> Vec<LiouvilleState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| common::random_band_limited(&mut rng, 1024, 12)).collect()
}

fn pole_state(r: &ResonanceData, nu: Axis, e: Axis) -> LiouvilleState {
    friedrichs::pole_state(r, nu, e).unwrap()
}

fn positive_tau_fraction(s: &LiouvilleState) -> f64 {
    let t = s.to_tau().unwrap();
    let axis = t.tau_axis();
    let masses = t.tau_masses();
    let pos: f64 = masses.iter().enumerate().filter(|(k, _)| axis.point(*k) > 0.0).map(|(_, m)| m).sum();
    pos / masses.iter().sum::<f64>()
}

fn projection_axioms() -> Result<Outcome> {
    let mut worst_idem = 0.0f64;
    let mut worst_nest = 0.0f64;
    let mut monotone_breaks = 0;
    for rho in random_states(10, 11) {
        let tmax = timeop::tau_max(&rho)?;
        let cuts: Vec<f64> = (0..20).map(|k| -0.9 * tmax + 1.8 * tmax * k as f64 / 19.0).collect();
        let mut projected = Vec::with_capacity(cuts.len());
        for &s in &cuts {
            let p = timeop::project(&rho, s, FFT)?.state;
            let pp = timeop::project(&p, s, FFT)?.state;
            worst_idem = worst_idem.max(pp.sub(&p)?.norm() / rho.norm());
            projected.push(p);
        }
        for (i, &s) in cuts.iter().enumerate() {
            let j = (i * 7 + 3) % cuts.len();
            let t = cuts[j];
            let lhs = timeop::project(&projected[j], s, FFT)?.state;
            let rhs = &projected[if s < t { i } else { j }];
            worst_nest = worst_nest.max(lhs.sub(rhs)?.norm() / rho.norm());
        }
        let norms: Vec<f64> = projected.iter().map(LiouvilleState::norm2).collect();
        monotone_breaks += norms.windows(2).filter(|w| w[1] < w[0] - 1e-10 * rho.norm2()).count();
    }
    Ok(Outcome::new(
        worst_idem <= 1e-10 && worst_nest <= 1e-10 && monotone_breaks == 0,
        format!("idempotence {worst_idem:.2e}, nesting {worst_nest:.2e}, norm decreases {monotone_breaks}"),
    ))
}

fn dual_path() -> Result<Outcome> {
    let g = common::GAMMA;
    let r = common::resonance(PrefactorMode::NormalizedGammaOver2Pi);
    let (nu, e) = common::default_axes();
    let nu2 = Axis::symmetric(128.0 * g, 8192)?;
    let coarse = pole_state(&r, nu, e);
    let fine = pole_state(&r, nu2, e);
    let mut pass = true;
    let mut detail = String::new();
    for k in [0.0, -2.0, -5.0, -10.0] {
        let s = k / g;
        let err = |rho: &LiouvilleState| -> Result<f64> {
            let snapped = timeop::project(rho, s, FFT)?;
            let closed = friedrichs::closed_field(snapped.snap.s, &r, rho.nu_axis(), e)?;
            rel_l2(&snapped.state, &closed)
        };
        let (a, b) = (err(&coarse)?, err(&fine)?);
        let ratio = a / b;
        pass &= a <= 5e-2 && ratio >= 1.8;
        let _ = write!(detail, "s={k}/g: {a:.3e} (ratio {ratio:.2}); ");
    }
    Ok(Outcome::new(pass, detail.trim_end_matches("; ").to_string()))
}

fn hardy_class() -> Result<Outcome> {
    let r = common::resonance(PrefactorMode::NormalizedGammaOver2Pi);
    let (nu, e) = common::default_axes();
    let rho = pole_state(&r, nu, e);
    let mut numeric = positive_tau_fraction(&timeop::project(&rho, 0.0, FFT)?.state);
    numeric = numeric.max(positive_tau_fraction(&timeop::project(&rho, 0.0, HILBERT)?.state));
    for s in random_states(10, 12) {
        numeric = numeric.max(positive_tau_fraction(&timeop::project(&s, 0.0, FFT)?.state));
    }
    let closed = positive_tau_fraction(&friedrichs::closed_field(0.0, &r, nu, e)?);
    Ok(Outcome::new(
        numeric <= 1e-6 && closed <= 1e-3,
        format!("positive-tau fraction: numeric {numeric:.2e}, closed form {closed:.2e}"),
    ))
}

fn pole_curve(r: ResonanceData, nu: Axis, e: Axis, t_max: f64) -> Result<DecayCurve> {
    let t = survival::time_axis(0.0, t_max, 2000)?;
    survival::decay_curve(CurveSource::Pole { resonance: r, nu, e }, t, &CurveOptions::default())
}

fn survival_limits(c: &DecayCurve) -> Outcome {
    let p0 = c.p[0];
    let violations = survival::monotonicity_violations(&c.p, 1e-9);
    let q_gap = c.p.iter().zip(&c.q).map(|(p, q)| (p + q - 1.0).abs()).fold(0.0, f64::max);
    let q_end = *c.q.last().unwrap();
    Outcome::new(
        (p0 - 1.0).abs() <= 1e-6 && violations == 0 && q_gap <= 1e-12 && q_end >= 0.99 && c.len() == 2000,
        format!("p(0) = {p0:.12}, violations {violations}/2000, |p+q-1| <= {q_gap:.1e}, q(50/g) = {q_end:.9}"),
    )
}

fn normalization(rows: &[oracle::Golden]) -> Result<Outcome> {
    let normalized = golden_value(rows, "norm2_normalized_full");
    let paper = golden_value(rows, "norm2_paper_full") / (PI * PI);
    let (nu, e) = common::default_axes();
    let grid = pole_state(&common::resonance(PrefactorMode::NormalizedGammaOver2Pi), nu, e).norm2();
    let grid_ref = golden_value(rows, "norm2_normalized_grid_domain");
    let grid_ok = (grid - grid_ref).abs() <= 2e-2 * grid_ref;
    Ok(Outcome::new(
        (normalized - 1.0).abs() <= 2e-2 && (paper - 1.0).abs() <= 2e-2 && grid_ok,
        format!(
            "oracle normalized {normalized:.6} (target 1), paper {paper:.6} pi^2 (target pi^2); grid {grid:.6} vs oracle on grid domain {grid_ref:.6}"
        ),
    ))
}

fn weyl_covariance() -> Result<Outcome> {
    let mut shift_err = 0.0f64;
    let mut cov_err = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for rho in random_states(6, 14) {
        let dtau = rho.nu_axis().conjugate()?.step();
        let base = timeop::time_moments(&rho)?.mean;
        let m: i32 = rng.gen_range(-60..=60);
        let t = m as f64 * dtau;
        let moved = rho.evolve(t)?;
        let mean = timeop::time_moments(&moved)?.mean;
        shift_err = shift_err.max((mean - base - t).abs() / t.abs().max(1.0));
        let k: i32 = rng.gen_range(-100..=100);
        let s = k as f64 * dtau;
        let lhs = timeop::project(&moved, s, FFT)?.state;
        let rhs = timeop::project(&rho, s - t, FFT)?.state.evolve(t)?;
        cov_err = cov_err.max(lhs.sub(&rhs)?.norm() / rho.norm());
    }
    Ok(Outcome::new(
        shift_err <= 1e-6 && cov_err <= 1e-8,
        format!("mean shift error {shift_err:.2e}, projection covariance {cov_err:.2e}"),
    ))
}

fn uncertainty() -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10 {
        let (rho, d) = cli::random_pure_state(&mut rng)?;
        worst = worst.min(timeop::uncertainty_check(&rho, &d)?.product);
    }
    let res = RunConfig::default().resolve()?;
    let p = res.params.expect("default model");
    let rho = pole_state(&res.resonance, res.nu, res.e);
    let unit = rho.scaled(Complex64::new(1.0 / rho.norm(), 0.0));
    let d = friedrichs::f1_density(&p, Axis::half_offset(0.0, p.form_factor.cutoff, 20_000)?)?;
    let fr = timeop::uncertainty_check_derivative(&unit, &d)?;
    let bound = timeop::UNCERTAINTY_BOUND - 1e-6;
    Ok(Outcome::new(
        worst >= bound && fr.product >= bound,
        format!("min random dE*dT {worst:.6}, Friedrichs {:.6} (bound {:.6})", fr.product, timeop::UNCERTAINTY_BOUND),
    ))
}

fn asymptotics(c: &DecayCurve) -> Result<Outcome> {
    let g = common::GAMMA;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut misses = 0;
    let mut samples = 0;
    while samples < 50 {
        let re: f64 = rng.gen_range(-3.0..3.0);
        let im: f64 = rng.gen_range(0.2..3.0);
        let cc = Complex64::new(re, if re > 0.0 { im } else { -im });
        let s = -rng.gen_range(5.0..200.0);
        let n = rng.gen_range(1..5);
        if (cc * s).norm() < 10.0 {
            continue;
        }
        samples += 1;
        let tail = friedrichs::expint_tail(s, cc, n, ExpintRegime::Asymptotic)?;
        if (tail.value - oracle::quad_expint(s, cc)?).norm() > tail.remainder_bound {
            misses += 1;
        }
    }
    let fit = survival::tail_analysis(c, (10.0 / g, 40.0 / g))?;
    let period = fit.oscillation_period.unwrap_or(f64::NAN);
    let wt = c.meta.omega_tilde.unwrap_or(1.0);
    let pass = misses == 0
        && (fit.algebraic_slope + 4.0).abs() <= 0.5
        && (fit.exp_rate - g).abs() <= 0.1 * g
        && (period - PI / wt).abs() <= 0.05 * PI / wt;
    Ok(Outcome::new(
        pass,
        format!(
            "expint misses {misses}/50, slope {:.3}, rate {:.4} (gamma {g}), period {period:.4} (pi/omega {:.4})",
            fit.algebraic_slope,
            fit.exp_rate,
            PI / wt
        ),
    ))
}

fn bound_diagnostic(c: &DecayCurve, log: &mut String) -> Result<Outcome> {
    let rep = survival::bound_check(c)?;
    let _ = writeln!(log, "bound report: {} of {} points violate, max p/bound {:.4}", rep.violations.len(), rep.checked, rep.max_ratio);
    for (t, p, b) in &rep.violations {
        let _ = writeln!(log, "  t = {t:.6e}: p = {p:.6e} > bound = {b:.6e}");
    }
    Ok(Outcome::new(
        rep.checked > 0,
        format!(
            "report generated over {} points; {} violations archived (max p/bound {:.3})",
            rep.checked,
            rep.violations.len(),
            rep.max_ratio
        ),
    ))
}

fn weisskopf_wigner() -> Result<Outcome> {
    let g = 0.05;
    let r = ResonanceData::new(1.0, g, PrefactorMode::NormalizedGammaOver2Pi)?;
    let nu = Axis::symmetric(64.0 * g, 4096)?;
    let e = Axis::half_offset(0.0, 1.0 + 40.0 * g, 512)?;
    let c = pole_curve(r, nu, e, 20.0 / g)?;
    let ww = c.ww.as_ref().expect("ww column");
    let mut worst = 0.0f64;
    let mut late = Vec::new();
    for (i, &t) in c.t.iter().enumerate() {
        if t <= 5.0 / g {
            let ex = (-g * t).exp();
            worst = worst.max((ww[i] - ex).abs() / ex);
        } else {
            late.push(ww[i]);
        }
    }
    let ww_breaks = survival::monotonicity_violations(&late, 0.0);
    let p_breaks = survival::monotonicity_violations(&c.p, 1e-9);
    Ok(Outcome::new(
        worst <= 5e-2 && ww_breaks >= 1 && p_breaks == 0,
        format!("ww vs exp max rel {worst:.3e} on [0, 5/g]; ww violations after 5/g {ww_breaks}; p violations {p_breaks}"),
    ))
}

type Criterion<'a> = Box<dyn FnOnce(&mut String) -> Result<Outcome> + 'a>;

#[test]
fn acceptance() {
    let rows = golden();
    let g = common::GAMMA;
    let (nu, e) = common::default_axes();
    let curve = pole_curve(common::resonance(PrefactorMode::NormalizedGammaOver2Pi), nu, e, 50.0 / g).unwrap();
    let mut archive = String::new();

    let mut table: Vec<(&str, Criterion<'_>)> = vec![
        ("1 projection axioms", Box::new(|_| projection_axioms())),
        ("2 dual-path equivalence", Box::new(|_| dual_path())),
        ("3 Hardy class of P0", Box::new(|_| hardy_class())),
        ("4 survival monotonicity and limits", Box::new(|_| Ok(survival_limits(&curve)))),
        ("5 normalization", Box::new(|_| normalization(&rows))),
        ("6 Weyl covariance", Box::new(|_| weyl_covariance())),
        ("7 uncertainty relation", Box::new(|_| uncertainty())),
        ("8 asymptotics", Box::new(|_| asymptotics(&curve))),
        ("9 bound diagnostic", Box::new(|log| bound_diagnostic(&curve, log))),
        ("10 Weisskopf-Wigner contrast", Box::new(|_| weisskopf_wigner())),
    ];

    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for (name, run) in table.drain(..) {
        let start = Instant::now();
        let outcome = run(&mut archive).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        let line = format!("{status} {name}: {} [{:.1}s]", outcome.detail, start.elapsed().as_secs_f64());
        println!("{line}");
        lines.push(line);
        if !outcome.pass {
            failed.push(name);
        }
    }
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(dir.join("acceptance.txt"), lines.join("\n") + "\n").unwrap();
    std::fs::write(dir.join("acceptance_bound_report.txt"), &archive).unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
