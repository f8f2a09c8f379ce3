//! Survival probabilities `p(t) = ||P_{-t} rho||^2`, decay curves, the
//! Weisskopf-Wigner law and tail / bound diagnostics.

use crate::error::{Error, Result};
use crate::friedrichs::{self, ResonanceData};
use crate::grid::{Axis, LiouvilleState};
use crate::sum::NeumaierC;
use crate::timeop::{self, EnergyDensity, ProjectionMethod};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// `||P_{-t} rho||^2` for a normalised state.
pub fn survival_probability(rho: &LiouvilleState, t: f64, method: ProjectionMethod) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("survival time must be >= 0, got {t}")));
    }
    let n2 = rho.norm2();
    if (n2.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n2));
    }
    match method {
        ProjectionMethod::FftTruncation => {
            let (tau, cum) = timeop::cumulative_tau_mass(rho)?;
            Ok(cum[timeop::snap(&tau, -t)?.kept])
        }
        m => Ok(timeop::project(rho, -t, m)?.state.norm2()),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveMeta {
    pub gamma: Option<f64>,
    pub omega_tilde: Option<f64>,
    /// Parameter echo written as `# key=value` lines.
    pub echo: Vec<(String, String)>,
}

impl CurveMeta {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.echo.push((key.to_string(), value.to_string()));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub ww: Option<Vec<f64>>,
    pub bound: Option<Vec<f64>>,
    pub meta: CurveMeta,
}

impl DecayCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        for (k, v) in &self.meta.echo {
            writeln!(w, "# {k}={v}")?;
        }
        if let Some(g) = self.meta.gamma {
            writeln!(w, "# gamma={g:.16e}")?;
        }
        if let Some(o) = self.meta.omega_tilde {
            writeln!(w, "# omega_tilde={o:.16e}")?;
        }
        writeln!(w, "t,p,q,ww,bound")?;
        let opt = |c: &Option<Vec<f64>>, i: usize| c.as_ref().map(|v| format!("{:.16e}", v[i])).unwrap_or_default();
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{},{}",
                self.t[i],
                self.p[i],
                self.q[i],
                opt(&self.ww, i),
                opt(&self.bound, i)
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta = CurveMeta::default();
        let (mut t, mut p, mut q, mut ww, mut bound) = (vec![], vec![], vec![], vec![], vec![]);
        let mut header = false;
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    match k {
                        "gamma" => meta.gamma = v.parse().ok(),
                        "omega_tilde" => meta.omega_tilde = v.parse().ok(),
                        _ => meta.push(k, v),
                    }
                }
                continue;
            }
            if !header {
                if line != "t,p,q,ww,bound" {
                    return Err(Error::Parse(format!("line {}: expected header t,p,q,ww,bound", ln + 1)));
                }
                header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields", ln + 1)));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)));
            t.push(num(f[0])?);
            p.push(num(f[1])?);
            q.push(num(f[2])?);
            if !f[3].is_empty() {
                ww.push(num(f[3])?);
            }
            if !f[4].is_empty() {
                bound.push(num(f[4])?);
            }
        }
        let n = t.len();
        let full = |v: Vec<f64>| (v.len() == n && n > 0).then_some(v);
        Ok(Self { t, p, q, ww: full(ww), bound: full(bound), meta })
    }
}

/// Where the curve's state comes from.
#[derive(Debug, Clone)]
pub enum CurveSource<'a> {
    /// The pole-approximation kernel on the given grid.
    Pole { resonance: ResonanceData, nu: Axis, e: Axis },
    /// Any prebuilt state.
    State(&'a LiouvilleState),
}

#[derive(Debug, Clone)]
pub struct CurveOptions {
    pub method: ProjectionMethod,
    /// Replace the state by `P_0 rho` first so that p(0) = 1.
    pub prepare_unstable: bool,
    /// Density for the Weisskopf-Wigner column. For a pole source a
    /// Lorentzian on an alias-free axis is used when this is `None`.
    pub ww_density: Option<EnergyDensity>,
    pub with_bound: bool,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self { method: ProjectionMethod::FftTruncation, prepare_unstable: true, ww_density: None, with_bound: true }
    }
}

/// Uniform time axis `t_min + i dt`, `steps` points ending at `t_max`.
pub fn time_axis(t_min: f64, t_max: f64, steps: usize) -> Result<Axis> {
    if !(t_min >= 0.0) || !(t_max > t_min) || steps < 2 {
        return Err(Error::InvalidInput(format!("time grid needs 0 <= t_min < t_max and >= 2 steps, got [{t_min}, {t_max}] / {steps}")));
    }
    Axis::new(t_min, (t_max - t_min) / (steps - 1) as f64, steps)
}

/// Omega axis on `[0, w_max]` fine enough that `d_omega * t_max <= pi/2`.
pub fn alias_free_axis(w_max: f64, t_max: f64) -> Result<Axis> {
    let count = ((2.0 * w_max * t_max / PI).ceil() as usize + 1).max(64);
    Axis::half_offset(0.0, w_max, count)
}

pub fn decay_curve(source: CurveSource<'_>, t_axis: Axis, opts: &CurveOptions) -> Result<DecayCurve> {
    if t_axis.start() < 0.0 {
        return Err(Error::InvalidInput("time axis must start at t >= 0".into()));
    }
    let times: Vec<f64> = t_axis.points().collect();
    let mut meta = CurveMeta::default();
    meta.push("method", opts.method);
    meta.push("prepared", opts.prepare_unstable);
    let (rho, res) = match &source {
        CurveSource::Pole { resonance, nu, e } => (friedrichs::pole_state(resonance, *nu, *e)?, Some(*resonance)),
        CurveSource::State(s) => ((*s).clone(), s.origin().copied()),
    };
    if let Some(r) = &res {
        meta.gamma = Some(r.gamma);
        meta.omega_tilde = Some(r.omega_tilde);
        meta.push("prefactor_mode", r.mode);
    }
    let tau = rho.nu_axis().conjugate()?;
    let mut max_snap = 0.0f64;
    for &t in &times {
        max_snap = max_snap.max(timeop::snap(&tau, -t)?.distance);
    }
    meta.push("max_snap", format!("{max_snap:.6e}"));

    let (p, norm0) = match opts.method {
        ProjectionMethod::ClosedFormPole => {
            let r = res.ok_or_else(|| Error::InvalidInput("closed-form curve needs the pole state".into()))?;
            closed_curve(&r, rho.nu_axis(), rho.e_axis(), &tau, &times, opts.prepare_unstable, &rho)?
        }
        m => {
            let base = if opts.prepare_unstable { timeop::project(&rho, 0.0, m)?.state } else { rho.clone() };
            let (_, cum) = timeop::cumulative_tau_mass(&base)?;
            let n0 = base.norm2();
            if n0 == 0.0 {
                return Err(Error::InvalidInput("curve of a zero state".into()));
            }
            let p = times
                .iter()
                .map(|&t| Ok(cum[timeop::snap(&tau, -t)?.kept] / n0))
                .collect::<Result<Vec<_>>>()?;
            (p, n0)
        }
    };
    meta.push("norm2_reference", format!("{norm0:.16e}"));
    // Values above one by rounding only are clipped so that q stays >= 0.
    let p: Vec<f64> = p.into_iter().map(|x| if x > 1.0 && x - 1.0 < 1e-12 { 1.0 } else { x }).collect();
    let q = p.iter().map(|x| 1.0 - x).collect();

    let t_max = times.last().copied().unwrap_or(0.0);
    let density = match (&opts.ww_density, &res) {
        (Some(d), _) => Some(d.clone()),
        (None, Some(r)) => {
            let (_, hi) = rho.e_axis().edges();
            Some(friedrichs::lorentzian_density(r, alias_free_axis(hi, t_max)?)?)
        }
        (None, None) => None,
    };
    let ww = match density {
        Some(d) => Some(times.iter().map(|&t| ww_survival(&d, t)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let bound = match (&res, opts.with_bound) {
        (Some(r), true) => Some(
            times
                .iter()
                .map(|&t| if t > 0.0 { friedrichs::survival_bound(-t, r).map(|b| b / norm0) } else { Ok(f64::NAN) })
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    let curve = DecayCurve { t: times, p, q, ww, bound, meta };
    Ok(curve)
}

/// p(t) from the closed forms, time by time. The phase e^{-is nu} drops out
/// of the norm, so only the two s-independent factors A, B are stored.
fn closed_curve(
    r: &ResonanceData,
    nu: Axis,
    e: Axis,
    tau: &Axis,
    times: &[f64],
    prepare: bool,
    rho: &LiouvilleState,
) -> Result<(Vec<f64>, f64)> {
    let norm0 = if prepare { friedrichs::closed_field(0.0, r, nu, e)?.norm2() } else { rho.norm2() };
    let cell = nu.step() * e.step();
    let ab: Vec<(Complex64, Complex64)> = e
        .points()
        .flat_map(|x| {
            let n0 = r.nu0(x);
            nu.points().map(move |n| (1.0 / (n0.conj() * (n + n0)), 1.0 / (n0 * (n0.conj() - n))))
        })
        .collect();
    let c2 = r.prefactor().powi(2);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut p = Vec::with_capacity(times.len());
    for &t in times {
        let s = timeop::snap(tau, -t)?.s;
        if s == 0.0 {
            p.push(if prepare { 1.0 } else { friedrichs::closed_field(0.0, r, nu, e)?.norm2() / norm0 });
            continue;
        }
        let kappa: Vec<Complex64> = nu
            .points()
            .map(|n| friedrichs::background_integral(s, Complex64::new(0.0, n)).map(|j| j / two_pi_i))
            .collect::<Result<_>>()?;
        let mut acc = crate::sum::Neumaier::new();
        for (i, x) in e.points().enumerate() {
            let n0 = r.nu0(x);
            let below = x < r.omega_tilde;
            let jm = friedrichs::background_integral(s, Complex64::new(0.0, -1.0) * n0)? / two_pi_i;
            let jp = friedrichs::background_integral(s, Complex64::new(0.0, 1.0) * n0.conj())? / two_pi_i;
            let (ra, rb) = if below {
                ((Complex64::new(0.0, -s) * n0).exp(), (Complex64::new(0.0, s) * n0.conj()).exp())
            } else {
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            };
            let alpha = jm + ra;
            let beta = rb - jp;
            let row = &ab[i * nu.len()..(i + 1) * nu.len()];
            let mut slice = 0.0;
            for ((a, b), k) in row.iter().zip(&kappa) {
                slice += (a * (alpha - k) + b * (beta + k)).norm_sqr();
            }
            acc.add(slice);
        }
        p.push(acc.value() * c2 * cell / norm0);
    }
    Ok((p, norm0))
}

/// `|int w(omega) e^{-i omega t} d omega|^2`, integrating the piecewise-linear
/// interpolant of the density exactly (constant over the two half cells).
pub fn ww_survival(d: &EnergyDensity, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    let ax = d.axis();
    let h = ax.step();
    if h * t > PI / 2.0 {
        return Err(Error::Aliasing(h * t));
    }
    let w = d.weights();
    let n = w.len();
    let (lo, hi) = ax.edges();
    let mut acc = NeumaierC::new();
    acc.add(flat_piece(w[0], lo, 0.5 * h, t));
    for i in 0..n - 1 {
        acc.add(linear_piece(w[i], w[i + 1], ax.point(i), h, t));
    }
    acc.add(flat_piece(w[n - 1], ax.last(), hi - ax.last(), t));
    Ok(acc.value().norm_sqr())
}

/// `int_a^{a+h} w e^{-i x t} dx`.
fn flat_piece(w: f64, a: f64, h: f64, t: f64) -> Complex64 {
    let th = t * h;
    let base = if th.abs() < 1e-3 {
        Complex64::new(1.0 - th * th / 6.0, -th / 2.0 + th.powi(3) / 24.0) * h
    } else {
        (1.0 - Complex64::from_polar(1.0, -th)) / Complex64::new(0.0, t)
    };
    Complex64::from_polar(w, -t * a) * base
}

/// `int_a^{a+h} (wa + (wb - wa)(x - a)/h) e^{-i x t} dx`.
fn linear_piece(wa: f64, wb: f64, a: f64, h: f64, t: f64) -> Complex64 {
    let th = t * h;
    let (i0, i1) = if th.abs() < 1e-3 {
        (
            Complex64::new(1.0 - th * th / 6.0, -th / 2.0 + th.powi(3) / 24.0) * h,
            Complex64::new(0.5 - th * th / 8.0, -th / 3.0 + th.powi(3) / 30.0) * (h * h),
        )
    } else {
        let e = Complex64::from_polar(1.0, -th);
        (
            (1.0 - e) / Complex64::new(0.0, t),
            (e * Complex64::new(1.0, th) - 1.0) / (t * t),
        )
    };
    Complex64::from_polar(1.0, -t * a) * (i0 * wa + i1 * ((wb - wa) / h))
}

/// Indices with `y[i+1] > y[i] + slack`.
pub fn monotonicity_violations(y: &[f64], slack: f64) -> usize {
    y.windows(2).filter(|w| w[1] > w[0] + slack).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub algebraic_slope: f64,
    pub exp_rate: f64,
    pub oscillation_period: Option<f64>,
    pub points: usize,
}

fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = crate::sum::sum(x.iter().copied()) / n;
    let my = crate::sum::sum(y.iter().copied()) / n;
    let sxy = crate::sum::sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = crate::sum::sum(x.iter().map(|a| (a - mx).powi(2)));
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Centred moving average over `width` time units.
pub fn moving_average(t: &[f64], y: &[f64], width: f64) -> Vec<f64> {
    if t.len() < 2 {
        return y.to_vec();
    }
    let dt = t[1] - t[0];
    let half = ((width / dt) / 2.0).round() as usize;
    if half == 0 {
        return y.to_vec();
    }
    (0..y.len())
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half).min(y.len() - 1);
            crate::sum::sum(y[a..=b].iter().copied()) / (b - a + 1) as f64
        })
        .collect()
}

/// Fits `y ~ t^slope` (after smoothing over `period_hint`), an exponential
/// envelope rate, and the oscillation period of the detrended residual.
pub fn tail_analysis_series(t: &[f64], y: &[f64], window: (f64, f64), period_hint: Option<f64>) -> Result<TailFit> {
    if t.len() != y.len() {
        return Err(Error::InvalidInput("t and y lengths differ".into()));
    }
    let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= window.0 && t[i] <= window.1).collect();
    if idx.len() < 10 {
        return Err(Error::InvalidInput(format!("tail window holds {} points, need >= 10", idx.len())));
    }
    if idx.iter().any(|&i| !(y[i] > 0.0) || t[i] <= 0.0) {
        return Err(Error::InvalidInput("tail window needs t > 0 and y > 0".into()));
    }
    let smooth = match period_hint {
        Some(p) if p > 0.0 => moving_average(t, y, p),
        _ => y.to_vec(),
    };
    let lx: Vec<f64> = idx.iter().map(|&i| t[i].ln()).collect();
    let ly: Vec<f64> = idx.iter().map(|&i| smooth[i].max(f64::MIN_POSITIVE).ln()).collect();
    let (algebraic_slope, _) = least_squares_line(&lx, &ly);

    let maxima: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| i > 0 && i + 1 < y.len() && y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect();
    let pick = if maxima.len() >= 3 { &maxima } else { &idx };
    let tx: Vec<f64> = pick.iter().map(|&i| t[i]).collect();
    let ty: Vec<f64> = pick.iter().map(|&i| y[i].ln()).collect();
    let exp_rate = -least_squares_line(&tx, &ty).0;

    let tw: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let resid: Vec<f64> = idx.iter().map(|&i| y[i] * (exp_rate * t[i]).exp()).collect();
    let detr = detrend_inverse_powers(&tw, &resid);
    let mut crossings = Vec::new();
    for k in 0..detr.len() - 1 {
        if detr[k] == 0.0 || detr[k].signum() != detr[k + 1].signum() {
            let f = detr[k] / (detr[k] - detr[k + 1]);
            crossings.push(tw[k] + f * (tw[k + 1] - tw[k]));
        }
    }
    let oscillation_period = (crossings.len() >= 3)
        .then(|| 2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64);
    Ok(TailFit { algebraic_slope, exp_rate, oscillation_period, points: idx.len() })
}

/// Removes the least-squares fit on `{1, 1/t, 1/t^2}`.
fn detrend_inverse_powers(t: &[f64], y: &[f64]) -> Vec<f64> {
    let basis = |x: f64| [1.0, 1.0 / x, 1.0 / (x * x)];
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (x, v) in t.iter().zip(y) {
        let b = basis(*x);
        for i in 0..3 {
            aty[i] += b[i] * v;
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
        }
    }
    let coef = solve3(ata, aty);
    t.iter().zip(y).map(|(x, v)| {
        let b = basis(*x);
        v - (coef[0] * b[0] + coef[1] * b[1] + coef[2] * b[2])
    }).collect()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let piv = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        a.swap(c, piv);
        b.swap(c, piv);
        if a[c][c] == 0.0 {
            continue;
        }
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| a[c][k] * x[k]).sum();
        x[c] = if a[c][c] == 0.0 { 0.0 } else { (b[c] - s) / a[c][c] };
    }
    x
}

/// Slope from the smoothed p tail. When the curve carries resonance data the
/// envelope rate and period are fitted on the resonance component
/// `||P_{-t} rho_res||^2`, otherwise on p itself.
pub fn tail_analysis(curve: &DecayCurve, window: (f64, f64)) -> Result<TailFit> {
    let hint = curve.meta.omega_tilde.map(|w| PI / w);
    let fit = tail_analysis_series(&curve.t, &curve.p, window, hint)?;
    let (Some(g), Some(w)) = (curve.meta.gamma, curve.meta.omega_tilde) else {
        return Ok(fit);
    };
    let r = ResonanceData::new(w, g, Default::default())?;
    let res = curve
        .t
        .iter()
        .map(|&t| if t >= window.0 && t <= window.1 && t > 0.0 { friedrichs::resonance_component_norm2(-t, &r) } else { Ok(f64::NAN) })
        .collect::<Result<Vec<_>>>()?;
    let osc = tail_analysis_series(&curve.t, &res, window, None)?;
    Ok(TailFit { exp_rate: osc.exp_rate, oscillation_period: osc.oscillation_period, ..fit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `(t, p(t), bound(t))` where `p > bound`.
    pub violations: Vec<(f64, f64, f64)>,
    pub max_ratio: f64,
    pub checked: usize,
}

/// Compares p against the bound column for `t >= 10/gamma` (all t when
/// gamma is unknown). Report only, never an assertion.
pub fn bound_check(curve: &DecayCurve) -> Result<BoundReport> {
    let bound = curve.bound.as_ref().ok_or_else(|| Error::InvalidInput("curve has no bound column".into()))?;
    let t0 = curve.meta.gamma.map(|g| 10.0 / g).unwrap_or(f64::NEG_INFINITY);
    let mut report = BoundReport { violations: Vec::new(), max_ratio: 0.0, checked: 0 };
    for i in 0..curve.len() {
        let (t, lhs, rhs) = (curve.t[i], curve.p[i], bound[i]);
        if t < t0 || !rhs.is_finite() || rhs <= 0.0 {
            continue;
        }
        report.checked += 1;
        report.max_ratio = report.max_ratio.max(lhs / rhs);
        if lhs > rhs {
            report.violations.push((t, lhs, rhs));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ww_at_zero_is_one() {
        let ax = Axis::half_offset(0.0, 3.0, 500).unwrap();
        let d = EnergyDensity::normalized(ax, ax.points().map(|x| (-(x - 1.0).powi(2)).exp()).collect()).unwrap();
        assert!((ww_survival(&d, 0.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(ww_survival(&d, 1e4), Err(Error::Aliasing(_))));
    }

    #[test]
    fn linear_piece_matches_quadrature() {
        for &(t, h) in &[(0.0, 0.5), (1e-5, 0.3), (7.0, 0.2), (40.0, 0.03)] {
            let got = linear_piece(0.3, 1.1, 0.7, h, t);
            let want = crate::quad::integrate_c(
                |x| Complex64::from_polar(0.3 + 0.8 * (x - 0.7) / h, -x * t),
                0.7,
                0.7 + h,
                crate::quad::QuadOptions::default(),
            )
            .unwrap()
            .value;
            assert!((got - want).norm() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn synthetic_power_law_slope() {
        let t: Vec<f64> = (1..=400).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|x| x.powi(-4)).collect();
        let fit = tail_analysis_series(&t, &y, (10.0, 150.0), None).unwrap();
        assert!((fit.algebraic_slope + 4.0).abs() < 0.05);
    }

    #[test]
    fn synthetic_damped_oscillation() {
        let (g, w) = (0.2, 1.0);
        let t: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|&x| (-g * x).exp() * (w * x).sin().powi(2) + 1e-300).collect();
        let fit = tail_analysis_series(&t, &y, (1.0, 39.0), None).unwrap();
        assert!((fit.exp_rate - g).abs() < 0.02 * g, "{fit:?}");
        let per = fit.oscillation_period.unwrap();
        assert!((per - PI / w).abs() < 0.02 * PI / w, "{per}");
    }

    #[test]
    fn short_window_rejected() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(tail_analysis_series(&t, &t, (1.0, 5.0), None).is_err());
    }

    fn synthetic_curve(scale: f64) -> DecayCurve {
        let t: Vec<f64> = (1..100).map(|i| i as f64).collect();
        let bound: Vec<f64> = t.iter().map(|x| x.powi(-2)).collect();
        let p: Vec<f64> = bound.iter().map(|b| b * scale).collect();
        DecayCurve { q: p.iter().map(|x| 1.0 - x).collect(), t, p, ww: None, bound: Some(bound), meta: CurveMeta::default() }
    }

    #[test]
    fn bound_check_synthetic() {
        let half = bound_check(&synthetic_curve(0.5)).unwrap();
        assert!(half.violations.is_empty());
        assert!((half.max_ratio - 0.5).abs() < 1e-12);
        let double = bound_check(&synthetic_curve(2.0)).unwrap();
        assert_eq!(double.violations.len(), double.checked);
        assert!((double.max_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn curve_csv_round_trip() {
        let mut c = synthetic_curve(0.5);
        c.meta.gamma = Some(0.2);
        c.meta.push("method", "fft");
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = DecayCurve::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.p, c.p);
        assert_eq!(back.meta.gamma, Some(0.2));
        assert!(back.ww.is_none());
    }
}
