//! Regenerates tests/data/golden.csv from the reference implementations only.
//!
//!     cargo run --release --example emit_golden > crates/core/tests/data/golden.csv
//!
//! The reference survival curve sums Fourier series explicitly over the full
//! default grid and takes a few minutes.

use liouville::friedrichs::{FriedrichsParams, PrefactorMode, ResonanceData};
use liouville::grid::Axis;
use liouville::oracle::{self, Golden};
use liouville::quad::{self, QuadOptions};
use liouville::{friedrichs, survival, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

fn g(name: &str, value: f64, tolerance: f64) -> Golden {
    Golden { name: name.into(), value, tolerance }
}

/// `int w^k |f1|^2` on `[0, cutoff]` with the oracle's own PV routine.
fn f1_moments(p: &FriedrichsParams, wt: f64, gamma: f64) -> Result<[f64; 3]> {
    let lam2 = p.lambda * p.lambda;
    let dens = |w: f64| -> f64 {
        let re = oracle::re_eta_reference(p, w).expect("PV reference");
        let im = PI * lam2 * p.form_factor.v2(w);
        lam2 * p.form_factor.v2(w) / (re * re + im * im)
    };
    let hi = p.form_factor.cutoff;
    let pts = quad::breakpoints(0.0, hi, &[wt - 5.0 * gamma, wt - gamma, wt, wt + gamma, wt + 5.0 * gamma]);
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 4000 };
    let m = |k: i32| quad::integrate_breaks(|w| w.powi(k) * dens(w), &pts, opts).map(|r| r.value);
    Ok([m(0)?, m(1)?, m(2)?])
}

fn main() -> Result<()> {
    let mut rows = Vec::new();
    let gamma = 0.2;
    let nu_max = 64.0 * gamma;
    let e_max = 1.0 + 40.0 * gamma;
    for (mode, tag) in [(PrefactorMode::NormalizedGammaOver2Pi, "normalized"), (PrefactorMode::PaperGammaOver2, "paper")] {
        let r = ResonanceData::new(1.0, gamma, mode)?;
        rows.push(g(&format!("norm2_{tag}_grid_domain"), oracle::pole_norm2(&r, (-nu_max, nu_max), (0.0, e_max))?, 1e-8));
        let full = oracle::pole_norm2(&r, (f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY))?;
        rows.push(g(&format!("norm2_{tag}_full"), full, 1e-8));
    }

    let model = FriedrichsParams::flat_for_gamma(1.0, 0.1, 20.0, gamma)?;
    let (wt, gm) = oracle::resonance_root(&model)?;
    rows.push(g("flat_omega_tilde", wt, 1e-10));
    rows.push(g("flat_gamma", gm, 1e-12));
    let [m0, m1, m2] = f1_moments(&model, wt, gm)?;
    let mean = m1 / m0;
    rows.push(g("flat_f1_mass", m0, 1e-2));
    rows.push(g("flat_delta_e", (m2 / m0 - mean * mean).sqrt(), 5e-3));

    let narrow = FriedrichsParams::flat_for_gamma(1.0, 0.1, 20.0, 0.05)?;
    let (wn, gn) = oracle::resonance_root(&narrow)?;
    rows.push(g("narrow_omega_tilde", wn, 1e-10));
    rows.push(g("narrow_f1_mass", f1_moments(&narrow, wn, gn)?[0], 1e-2));

    for (tag, s, c) in [("a", -100.0, Complex64::new(0.0, 1.0)), ("b", -1.0, Complex64::new(0.0, 2.0)), ("c", -20.0, Complex64::new(-0.5, 0.25))] {
        let v = oracle::quad_expint(s, c)?;
        rows.push(g(&format!("expint_{tag}_re"), v.re, 1e-10));
        rows.push(g(&format!("expint_{tag}_im"), v.im, 1e-10));
    }

    // Tail slope of the reference survival curve on the default grid.
    let r = ResonanceData::new(1.0, gamma, PrefactorMode::NormalizedGammaOver2Pi)?;
    let nu = Axis::symmetric(nu_max, 4096)?;
    let e = Axis::half_offset(0.0, e_max, 512)?;
    let rho = friedrichs::pole_state(&r, nu, e)?;
    let (taus, mass) = oracle::dft_tau_masses(&rho)?;
    let dtau = taus[1] - taus[0];
    let t_axis = survival::time_axis(0.0, 50.0 / gamma, 2000)?;
    let below = |cut: f64| liouville::sum::sum(taus.iter().zip(&mass).filter(|(t, _)| **t < cut).map(|(_, m)| *m));
    let total = below(0.0);
    let t: Vec<f64> = t_axis.points().collect();
    let p: Vec<f64> = t.iter().map(|&x| below(((-x / dtau).round() * dtau).min(0.0)) / total).collect();
    let fit = survival::tail_analysis_series(&t, &p, (10.0 / gamma, 40.0 / gamma), Some(PI / r.omega_tilde))?;
    rows.push(g("tail_slope_reference", fit.algebraic_slope, 1e-6));
    rows.push(g("p_end_reference", *p.last().unwrap(), 1e-12));

    oracle::write_golden(&mut std::io::stdout().lock(), &rows)
}
