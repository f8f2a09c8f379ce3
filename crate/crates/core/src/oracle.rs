//! Slow reference implementations. Each one uses a different algorithm
//! from the fast path it checks, and none of them calls into that path.

use crate::error::{Error, Result};
use crate::friedrichs::{FormFactorKind, FriedrichsParams, ResonanceData};
use crate::grid::LiouvilleState;
use crate::hardy::Line;
use crate::quad::{self, QuadOptions};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// `P_s` by explicit O(N^2) Fourier sums with directly evaluated phases.
/// Bins kept: `tau_k < s'` where `s'` is `s` rounded to a multiple of dtau.
pub fn dft_truncation_projection(rho: &LiouvilleState, s: f64) -> Result<LiouvilleState> {
    let nu = rho.nu_axis();
    let n = nu.len();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidAxis("reference projection needs an even nu count".into()));
    }
    let dnu = nu.step();
    let dtau = 2.0 * PI / (n as f64 * dnu);
    let half = n as f64 * dtau / 2.0;
    if !s.is_finite() || s < -half - 1e-12 * half || s > half + 1e-12 * half {
        return Err(Error::OutOfRange { s, lo: -half, hi: half });
    }
    let cut = (s / dtau).round() * dtau;
    let taus: Vec<f64> = (0..n).map(|k| (k as f64 - n as f64 / 2.0 + 0.5) * dtau).collect();
    let kept: Vec<usize> = (0..n).filter(|&k| taus[k] < cut).collect();
    let nus: Vec<f64> = nu.points().collect();
    let norm = (2.0 * PI).sqrt();
    let mut out = Vec::with_capacity(rho.values().len());
    let mut hat = vec![Complex64::new(0.0, 0.0); n];
    for row in rho.rows() {
        for &k in &kept {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in row.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, taus[k] * nus[j]);
            }
            hat[k] = acc * (dnu / norm);
        }
        for &x in &nus {
            let mut acc = Complex64::new(0.0, 0.0);
            for &k in &kept {
                acc += hat[k] * Complex64::from_polar(1.0, -taus[k] * x);
            }
            out.push(acc * (dtau / norm));
        }
    }
    LiouvilleState::from_values(nu, rho.e_axis(), out, rho.is_hermitian())
}

/// Per-bin tau masses (summed over E) by explicit Fourier sums, with the bin
/// centres. Used for reference survival curves.
pub fn dft_tau_masses(rho: &LiouvilleState) -> Result<(Vec<f64>, Vec<f64>)> {
    let nu = rho.nu_axis();
    let n = nu.len();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidAxis("reference transform needs an even nu count".into()));
    }
    let dnu = nu.step();
    let dtau = 2.0 * PI / (n as f64 * dnu);
    let taus: Vec<f64> = (0..n).map(|k| (k as f64 - n as f64 / 2.0 + 0.5) * dtau).collect();
    let nus: Vec<f64> = nu.points().collect();
    let scale = dnu * dnu / (2.0 * PI) * dtau * rho.e_axis().step();
    let mut mass = vec![crate::sum::Neumaier::new(); n];
    for row in rho.rows() {
        for (k, m) in mass.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in row.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, taus[k] * nus[j]);
            }
            m.add(acc.norm_sqr() * scale);
        }
    }
    Ok((taus, mass.iter().map(|m| m.value()).collect()))
}

/// `(1/pi) PV int f(t)/(t - x) dt` over the sampled range. Subtracts f(x),
/// integrates the smooth remainder with composite Simpson weights and adds
/// the logarithmic endpoint term analytically.
pub fn pv_hilbert_reference(f: &Line) -> Result<Line> {
    let n = f.values.len();
    if n < 8 {
        return Err(Error::InvalidInput("reference Hilbert transform needs >= 8 samples".into()));
    }
    let h = f.axis.step();
    let xs: Vec<f64> = f.axis.points().collect();
    let (a, b) = (xs[0], xs[n - 1]);
    let w = simpson_weights(n, h);
    let v = &f.values;
    let deriv = |i: usize| -> Complex64 {
        match i {
            0 => (v[1] - v[0]) / h,
            _ if i == n - 1 => (v[n - 1] - v[n - 2]) / h,
            1 => (v[2] - v[0]) / (2.0 * h),
            _ if i == n - 2 => (v[n - 1] - v[n - 3]) / (2.0 * h),
            _ => (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h),
        }
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let fx = f.values[i];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let g = if j == i { deriv(i) } else { (f.values[j] - fx) / (xs[j] - xs[i]) };
            acc += g * w[j];
        }
        // The range runs to the cell edges; the two outer half cells are
        // added by their end values.
        let (lo, hi) = (a - 0.5 * h, b + 0.5 * h);
        let log = ((hi - xs[i]) / (xs[i] - lo)).ln();
        let ends = if i == 0 || i == n - 1 { Complex64::new(0.0, 0.0) } else { end_cells(f, &xs, i, h) };
        out.push((acc + ends + fx * log) / PI);
    }
    Line::new(f.axis, out)
}

/// Remainder integrand over the two outer half cells, by the endpoint value.
fn end_cells(f: &Line, xs: &[f64], i: usize, h: f64) -> Complex64 {
    let n = xs.len();
    let fx = f.values[i];
    let g0 = (f.values[0] - fx) / (xs[0] - xs[i]);
    let g1 = (f.values[n - 1] - fx) / (xs[n - 1] - xs[i]);
    (g0 + g1) * (0.5 * h)
}

/// Composite Simpson on an even number of intervals, closed with the 3/8
/// rule on the last three when the interval count is odd.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
    for k in (0..simpson_end).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if intervals % 2 == 1 {
        let k = n - 4;
        for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[k + o] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

fn expint_integrand(s: f64, c: Complex64) -> impl Fn(f64) -> Complex64 {
    move |y: f64| (-s * y).exp() / (y + c)
}

/// `int_{-inf}^0 e^{-sy}/(y+c) dy` for `s < 0` by adaptive Gauss-Kronrod on
/// the defining integral, with breakpoints around the near-pole at `-Re c`.
pub fn quad_expint(s: f64, c: Complex64) -> Result<Complex64> {
    quad_expint_with(s, c, 20_000)
}

pub fn quad_expint_with(s: f64, c: Complex64, max_intervals: usize) -> Result<Complex64> {
    if !(s < 0.0) {
        return Err(Error::InvalidInput(format!("quad_expint needs s < 0, got {s}")));
    }
    if c.im == 0.0 && c.re >= 0.0 {
        return Err(Error::InvalidInput(format!("integrand has a pole on the path for c = {c}")));
    }
    let mut inner = vec![];
    if c.re > 0.0 {
        let w = c.im.abs().max(1e-3 * c.re);
        inner.extend([-c.re - w, -c.re, -c.re + w]);
    }
    // Decay length of the exponential.
    inner.push(-40.0 / s.abs());
    let pts = quad::breakpoints(f64::NEG_INFINITY, 0.0, &inner);
    let r = quad::integrate_c_breaks(expint_integrand(s, c), &pts, QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals })?;
    Ok(r.value)
}

/// Nested adaptive quadrature of `int int |f(nu, E)|^2 dnu dE` over a
/// rectangle. `nu_breaks(E)` supplies interior breakpoints of each inner
/// integral, `e_breaks` those of the outer one.
pub fn quad_norm2<F, B>(f: F, nu: (f64, f64), e: (f64, f64), nu_breaks: B, e_breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64, f64) -> Complex64,
    B: Fn(f64) -> Vec<f64>,
{
    let inner_opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-11, max_intervals: 4000 };
    let outer_opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_intervals: 4000 };
    let mut failure = None;
    let outer = |x: f64| -> f64 {
        let pts = quad::breakpoints(nu.0, nu.1, &nu_breaks(x));
        match quad::integrate_breaks(|y| f(y, x).norm_sqr(), &pts, inner_opts) {
            Ok(r) => r.value,
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        }
    };
    let pts = quad::breakpoints(e.0, e.1, e_breaks);
    let r = quad::integrate_breaks(outer, &pts, outer_opts);
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(r?.value)
}

/// Pole kernel written out independently from its fast counterpart.
pub fn pole_kernel(nu: f64, e: f64, r: &ResonanceData) -> Complex64 {
    let z = Complex64::new(e - r.omega_tilde, 0.5 * r.gamma);
    let (a, b) = if nu >= 0.0 { (z.conj(), z + nu) } else { (z, z.conj() - nu) };
    Complex64::new(r.prefactor(), 0.0) / (a * b)
}

/// `||rho11||^2` over `nu in [lo, hi]`, `E in [e_lo, e_hi]`.
pub fn pole_norm2(r: &ResonanceData, nu: (f64, f64), e: (f64, f64)) -> Result<f64> {
    let wt = r.omega_tilde;
    let g = r.gamma;
    quad_norm2(
        |x, y| pole_kernel(x, y, r),
        nu,
        e,
        |y| vec![0.0, wt - y, y - wt, wt - y - g, wt - y + g, y - wt - g, y - wt + g],
        &[wt - 2.0 * g, wt - g, wt, wt + g, wt + 2.0 * g],
    )
}

/// `PV int_0^inf g(w')/(w' - w) dw'` by folding about `w`:
/// `int_0^w (g(w+u) - g(w-u))/u du + int_{2w}^inf g(w')/(w' - w) dw'`.
fn pv_folded<G: Fn(f64) -> f64>(g: G, w: f64, kinks: &[f64]) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 8000 };
    let folded_kinks: Vec<f64> = kinks.iter().map(|k| (k - w).abs()).collect();
    let near = quad::integrate_breaks(
        |u| if u == 0.0 { 0.0 } else { (g(w + u) - g(w - u)) / u },
        &quad::breakpoints(0.0, w, &folded_kinks),
        opts,
    )?;
    let far = quad::integrate_breaks(|x| g(x) / (x - w), &quad::breakpoints(2.0 * w, f64::INFINITY, kinks), opts)?;
    Ok(near.value + far.value)
}

/// Re eta+ with the PV integral computed by folding.
pub fn re_eta_reference(p: &FriedrichsParams, w: f64) -> Result<f64> {
    let ff = p.form_factor;
    let l2 = p.lambda * p.lambda;
    let pv = match ff.kind {
        // Folding removes the log singularity only away from the cutoff.
        FormFactorKind::FlatCutoff => pv_folded(|x| ff.v2(x), w, &[ff.cutoff])?,
        FormFactorKind::RationalDecay => pv_folded(|x| ff.v2(x), w, &[ff.cutoff, 4.0 * ff.cutoff])?,
    };
    Ok(w - p.omega1 + p.eta_sign.factor() * l2 * pv)
}

/// `(omega_tilde, gamma)` from an Illinois-bracketed root of Re eta+ near
/// omega1, with the PV integral evaluated by folding.
pub fn resonance_root(p: &FriedrichsParams) -> Result<(f64, f64)> {
    let f = |w: f64| re_eta_reference(p, w);
    let mut step = 0.05 * p.omega1;
    let (mut a, mut b) = (p.omega1 - step, p.omega1 + step);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    while fa * fb > 0.0 {
        step *= 1.6;
        a = (p.omega1 - step).max(1e-9 * p.omega1);
        b = p.omega1 + step;
        if step > 10.0 * p.omega1 {
            return Err(Error::NoResonance("no sign change of Re eta+ near omega1".into()));
        }
        fa = f(a)?;
        fb = f(b)?;
    }
    let mut side = 0i32;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < 1e-14 * c.abs() {
            a = c;
            b = c;
            break;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else {
            fa *= if side == -1 { 0.5 } else { 1.0 };
            side = -1;
        }
        b = c;
        fb = fc;
        if (b - a).abs() < 1e-13 * b.abs() {
            break;
        }
    }
    let wt = 0.5 * (a + b);
    Ok((wt, 2.0 * PI * p.lambda * p.lambda * p.form_factor.v2(wt)))
}

/// One frozen reference number.
#[derive(Debug, Clone, PartialEq)]
pub struct Golden {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

pub fn write_golden<W: Write>(w: &mut W, rows: &[Golden]) -> Result<()> {
    writeln!(w, "name,value,tolerance")?;
    for g in rows {
        if g.name.contains(',') {
            return Err(Error::InvalidInput(format!("golden name {:?} contains a comma", g.name)));
        }
        writeln!(w, "{},{:.17e},{:.3e}", g.name, g.value, g.tolerance)?;
    }
    Ok(())
}

pub fn read_golden<R: BufRead>(r: R) -> Result<Vec<Golden>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line == "name,value,tolerance") {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::Parse(format!("golden line {}: expected 3 fields", i + 1)));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("golden line {}: {e}", i + 1)));
        out.push(Golden { name: f[0].to_string(), value: num(f[1])?, tolerance: num(f[2])? });
    }
    Ok(out)
}

/// Looks up a golden value by name.
pub fn golden<'a>(rows: &'a [Golden], name: &str) -> Result<&'a Golden> {
    rows.iter().find(|g| g.name == name).ok_or_else(|| Error::InvalidInput(format!("no golden value named {name}")))
}
