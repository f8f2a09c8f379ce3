//! Hilbert transform on uniform grids and the Hardy-class split
//! `f = (f - iHf)/2 + (f + iHf)/2`.
//!
//! Convention: `Hf(x) = (1/pi) PV int f(t)/(t - x) dt`, i.e. multiplier
//! `-i sign(tau)` in the tau domain, so `(f - iHf)/2` keeps `tau < 0` (H+).

use crate::error::{Error, Result};
use crate::grid::{Axis, LiouvilleState};
use crate::spectral::Spectral;
use crate::sum::Neumaier;
use num_complex::Complex64;
use std::f64::consts::PI;

/// A sampled complex function on a uniform axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub axis: Axis,
    pub values: Vec<Complex64>,
}

impl Line {
    pub fn new(axis: Axis, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != axis.len() {
            return Err(Error::InvalidInput(format!("{} values on a {}-point axis", values.len(), axis.len())));
        }
        Ok(Self { axis, values })
    }

    pub fn sample<F: FnMut(f64) -> Complex64>(axis: Axis, f: F) -> Self {
        Self { axis, values: axis.points().map(f).collect() }
    }

    pub fn norm2(&self) -> f64 {
        crate::sum::sum(self.values.iter().map(|v| v.norm_sqr())) * self.axis.step()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn sub(&self, other: &Line) -> Line {
        Line { axis: self.axis, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Line {
        Line { axis: self.axis, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// E slice `i` of a state as a line over nu.
    pub fn from_slice(state: &LiouvilleState, i: usize) -> Line {
        Line { axis: state.nu_axis(), values: state.row(i).to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HilbertKind {
    SpectralTruncation,
    PvQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertMethod {
    pub kind: HilbertKind,
    pub pad_factor: usize,
    /// Split-cosine taper over the outer 10% at each end.
    pub taper: bool,
}

impl Default for HilbertMethod {
    fn default() -> Self {
        Self { kind: HilbertKind::SpectralTruncation, pad_factor: 4, taper: false }
    }
}

impl HilbertMethod {
    pub fn spectral(pad_factor: usize) -> Self {
        Self { pad_factor, ..Self::default() }
    }

    pub fn pv() -> Self {
        Self { kind: HilbertKind::PvQuadrature, pad_factor: 1, taper: false }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if ![1, 2, 4, 8].contains(&self.pad_factor) {
            return Err(Error::InvalidInput(format!("pad_factor must be 1, 2, 4 or 8, got {}", self.pad_factor)));
        }
        if self.kind == HilbertKind::SpectralTruncation && !(n * self.pad_factor).is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "spectral Hilbert transform needs a power-of-two padded length, got {}",
                n * self.pad_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HilbertOutput {
    pub line: Line,
    /// Set when the input does not decay toward the grid ends.
    pub leakage_warning: Option<String>,
    pub tapered: bool,
}

fn split_cosine(n: usize) -> Vec<f64> {
    let m = (n / 10).max(1);
    (0..n)
        .map(|i| {
            let d = i.min(n - 1 - i);
            if d >= m {
                1.0
            } else {
                0.5 * (1.0 - (PI * (d as f64 + 0.5) / m as f64).cos())
            }
        })
        .collect()
}

fn leakage(values: &[Complex64]) -> Option<String> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let edge = values[0].norm().max(values[values.len() - 1].norm());
    (peak > 0.0 && edge >= 1e-3 * peak)
        .then(|| format!("endpoint magnitude {:.3e} of peak: periodic leakage likely", edge / peak))
}

/// Multiplies the tau-domain content of a centred even-length line by
/// `-i sign(tau)`. There is no bin at tau = 0 on the half-offset grid.
pub(crate) fn apply_sign_multiplier(hat: &mut [Complex64]) {
    let half = hat.len() / 2;
    let i = Complex64::new(0.0, 1.0);
    for (k, v) in hat.iter_mut().enumerate() {
        *v *= if k < half { i } else { -i };
    }
}

pub fn hilbert(f: &Line, method: HilbertMethod) -> Result<HilbertOutput> {
    let n = f.axis.len();
    method.validate(n)?;
    let mut input = f.values.clone();
    if method.taper {
        for (v, w) in input.iter_mut().zip(split_cosine(n)) {
            *v *= w;
        }
    }
    let (values, leakage_warning) = match method.kind {
        HilbertKind::SpectralTruncation => {
            if !n.is_multiple_of(2) {
                return Err(Error::InvalidInput("spectral Hilbert transform needs an even length".into()));
            }
            // H commutes with translation, so any uniform axis can be treated as centred.
            let m = n * method.pad_factor;
            let off = (m - n) / 2;
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            buf[off..off + n].copy_from_slice(&input);
            let sp = Spectral::new(m, f.axis.step());
            sp.forward(&mut buf);
            apply_sign_multiplier(&mut buf);
            sp.inverse(&mut buf);
            (buf[off..off + n].to_vec(), leakage(&input))
        }
        HilbertKind::PvQuadrature => (pv_odd_offset(&input), None),
    };
    Ok(HilbertOutput { line: Line { axis: f.axis, values }, leakage_warning, tapered: method.taper })
}

/// Symmetric principal-value sum over odd offsets:
/// `Hf(x_i) = (2/pi) sum_{m odd > 0} (f_{i+m} - f_{i-m}) / m`.
/// Skipping the diagonal this way cancels the first-order error; samples
/// beyond the grid count as zero.
fn pv_odd_offset(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let mut re = Neumaier::new();
            let mut im = Neumaier::new();
            let mut m = 1;
            while m < n {
                let up = if i + m < n { f[i + m] } else { Complex64::new(0.0, 0.0) };
                let down = if i >= m { f[i - m] } else { Complex64::new(0.0, 0.0) };
                let d = (up - down) / m as f64;
                re.add(d.re);
                im.add(d.im);
                m += 2;
            }
            Complex64::new(re.value(), im.value()) * (2.0 / PI)
        })
        .collect()
}

fn native_hat(f: &Line) -> Result<(Spectral, Vec<Complex64>)> {
    let n = f.axis.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("Hardy split needs an even number of samples, got {n}")));
    }
    let sp = Spectral::new(n, f.axis.step());
    let mut hat = f.values.clone();
    sp.forward(&mut hat);
    Ok((sp, hat))
}

/// `(f_plus, f_minus)` with `f_plus` carrying the `tau < 0` content and
/// `f_plus + f_minus = f` on the samples.
pub fn hardy_decompose(f: &Line) -> Result<(Line, Line)> {
    let (sp, mut hat) = native_hat(f)?;
    let half = hat.len() / 2;
    for v in &mut hat[half..] {
        *v = Complex64::new(0.0, 0.0);
    }
    sp.inverse(&mut hat);
    let plus = Line { axis: f.axis, values: hat };
    let minus = f.sub(&plus);
    Ok((plus, minus))
}

/// Fraction of tau-domain energy at `tau > 0`; zero means numerically H+.
pub fn paley_wiener_residual(f: &Line) -> Result<f64> {
    let (_, hat) = native_hat(f)?;
    let half = hat.len() / 2;
    let total = crate::sum::sum(hat.iter().map(|v| v.norm_sqr()));
    if total == 0.0 {
        return Err(Error::InvalidInput("Paley-Wiener residual of a zero function".into()));
    }
    Ok(crate::sum::sum(hat[half..].iter().map(|v| v.norm_sqr())) / total)
}

/// Positive-tau energy fraction of a whole state, pooled over E slices.
pub fn state_residual(state: &LiouvilleState) -> Result<f64> {
    let tau = state.to_tau()?;
    let masses = tau.tau_masses();
    let half = masses.len() / 2;
    let total = crate::sum::sum(masses.iter().copied());
    if total == 0.0 {
        return Err(Error::InvalidInput("Paley-Wiener residual of a zero state".into()));
    }
    Ok(crate::sum::sum(masses[half..].iter().copied()) / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn central_max_err(a: &Line, f: impl Fn(f64) -> f64) -> f64 {
        let n = a.axis.len();
        (n / 4..3 * n / 4).map(|i| (a.values[i] - c(f(a.axis.point(i)))).norm()).fold(0.0, f64::max)
    }

    fn cos_line() -> Line {
        Line::sample(Axis::symmetric(1000.0, 8192).unwrap(), |x| c((2.0 * x).cos()))
    }

    fn lorentz_line() -> Line {
        Line::sample(Axis::symmetric(400.0, 8192).unwrap(), |x| c(1.0 / (1.0 + x * x)))
    }

    #[test]
    fn cosine_to_minus_sine_spectral() {
        let out = hilbert(&cos_line(), HilbertMethod::default()).unwrap();
        assert!(out.leakage_warning.is_some());
        assert!(central_max_err(&out.line, |x| -(2.0 * x).sin()) < 1e-3);
    }

    #[test]
    fn cosine_to_minus_sine_pv() {
        let out = hilbert(&cos_line(), HilbertMethod::pv()).unwrap();
        assert!(central_max_err(&out.line, |x| -(2.0 * x).sin()) < 1e-3);
    }

    #[test]
    fn lorentzian_residue_form() {
        for m in [HilbertMethod::default(), HilbertMethod::pv()] {
            let out = hilbert(&lorentz_line(), m).unwrap();
            assert!(out.leakage_warning.is_none());
            assert!(central_max_err(&out.line, |x| -x / (1.0 + x * x)) < 1e-3, "{m:?}");
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = Line::sample(Axis::symmetric(5.0, 64).unwrap(), |_| c(0.0));
        let out = hilbert(&z, HilbertMethod::default()).unwrap();
        assert!(out.line.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_methods() {
        let z = Line::sample(Axis::symmetric(5.0, 96).unwrap(), |_| c(0.0));
        assert!(hilbert(&z, HilbertMethod::spectral(4)).is_err());
        assert!(hilbert(&z, HilbertMethod::spectral(3)).is_err());
        assert!(hilbert(&z, HilbertMethod::pv()).is_ok());
    }

    #[test]
    fn gaussian_splits_evenly() {
        let g = Line::sample(Axis::symmetric(30.0, 1024).unwrap(), |x| c((-x * x).exp()));
        let (p, m) = hardy_decompose(&g).unwrap();
        let n2 = g.norm2();
        assert!((p.norm2() - 0.5 * n2).abs() < 1e-12 * n2);
        assert!((m.norm2() - 0.5 * n2).abs() < 1e-12 * n2);
        let n = g.axis.len();
        for j in 0..n {
            assert!((m.values[j] - p.values[j].conj()).norm() < 1e-12);
            assert!((m.values[j] - p.values[n - 1 - j]).norm() < 1e-12);
        }
        assert!((paley_wiener_residual(&g).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn decomposition_sums_back() {
        let f = Line::sample(Axis::symmetric(10.0, 256).unwrap(), |x| Complex64::new(x.sin(), 1.0) / (1.0 + x * x));
        let (p, m) = hardy_decompose(&f).unwrap();
        for ((a, b), v) in p.values.iter().zip(&m.values).zip(&f.values) {
            assert!((a + b - v).norm() <= 4.0 * f64::EPSILON * v.norm().max(a.norm()));
        }
    }

    #[test]
    fn zero_norm_residual_is_error() {
        let z = Line::sample(Axis::symmetric(5.0, 64).unwrap(), |_| c(0.0));
        assert!(paley_wiener_residual(&z).is_err());
    }
}
