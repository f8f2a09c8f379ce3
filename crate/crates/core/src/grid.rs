//! Axes, sampled Liouville states rho(nu, E), inner products and the
//! Liouville evolution `e^{-iLt}` (multiplication by `e^{-i nu t}`).

use crate::error::{Error, Result};
use crate::friedrichs::ResonanceData;
use crate::spectral::Spectral;
use crate::sum::{Neumaier, NeumaierC};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Uniform sampling `point(i) = start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    start: f64,
    step: f64,
    count: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidAxis(format!("start={start}, step={step}: step must be finite and > 0")));
        }
        if count == 0 {
            return Err(Error::InvalidAxis("count must be positive".into()));
        }
        Ok(Self { start, step, count })
    }

    /// Even-count axis symmetric about zero with points at odd multiples of
    /// `step / 2`, so zero is never sampled.
    pub fn centered(count: usize, step: f64) -> Result<Self> {
        if count < 2 || !count.is_multiple_of(2) {
            return Err(Error::InvalidAxis(format!("centred axis needs an even count >= 2, got {count}")));
        }
        Self::new((0.5 - count as f64 / 2.0) * step, step, count)
    }

    /// Centred axis covering `[-half_width, half_width]` with `count` cells.
    pub fn symmetric(half_width: f64, count: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidAxis(format!("half width must be > 0, got {half_width}")));
        }
        Self::centered(count, 2.0 * half_width / count as f64)
    }

    /// Cell midpoints of `[lo, hi]` split into `count` cells.
    pub fn half_offset(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(hi > lo) || count == 0 {
            return Err(Error::InvalidAxis(format!("need lo < hi and count > 0, got [{lo}, {hi}] / {count}")));
        }
        let step = (hi - lo) / count as f64;
        Self::new(lo + 0.5 * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }

    /// Lower and upper cell edges.
    pub fn edges(&self) -> (f64, f64) {
        (self.start - 0.5 * self.step, self.last() + 0.5 * self.step)
    }

    pub fn is_centered(&self) -> bool {
        self.count.is_multiple_of(2) && {
            let mid = self.start + 0.5 * (self.count - 1) as f64 * self.step;
            mid.abs() <= 1e-9 * self.step
        }
    }

    pub fn approx_eq(&self, other: &Axis) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.start - other.start).abs() <= 1e-9 * self.step
    }

    /// Conjugate tau axis of a centred nu axis.
    pub fn conjugate(&self) -> Result<Axis> {
        if !self.is_centered() {
            return Err(Error::InvalidAxis("Fourier conjugate needs a centred half-offset axis".into()));
        }
        Axis::centered(self.count, 2.0 * std::f64::consts::PI / (self.count as f64 * self.step))
    }
}

/// Sampled kernel rho(nu, E), rows are E slices.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleState {
    nu: Axis,
    e: Axis,
    values: Vec<Complex64>,
    hermitian: bool,
    origin: Option<ResonanceData>,
}

pub fn make_state<F: FnMut(f64, f64) -> Complex64>(mut f: F, nu: Axis, e: Axis, hermitian: bool) -> Result<LiouvilleState> {
    let mut values = Vec::with_capacity(nu.len() * e.len());
    for ei in e.points() {
        for n in nu.points() {
            let v = f(n, ei);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { nu: n, e: ei });
            }
            values.push(v);
        }
    }
    LiouvilleState::from_values(nu, e, values, hermitian)
}

impl LiouvilleState {
    pub fn from_values(nu: Axis, e: Axis, values: Vec<Complex64>, hermitian: bool) -> Result<Self> {
        if e.start() - 0.5 * e.step() < -1e-12 * e.step() {
            return Err(Error::InvalidAxis(format!("E axis must lie in E >= 0, starts at {}", e.start())));
        }
        if values.len() != nu.len() * e.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                nu.len() * e.len(),
                values.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { nu: nu.point(idx % nu.len()), e: e.point(idx / nu.len()) });
            }
        }
        Ok(Self { nu, e, values, hermitian, origin: None })
    }

    pub fn zeros(nu: Axis, e: Axis) -> Self {
        Self { nu, e, values: vec![Complex64::new(0.0, 0.0); nu.len() * e.len()], hermitian: true, origin: None }
    }

    pub fn nu_axis(&self) -> Axis {
        self.nu
    }

    pub fn e_axis(&self) -> Axis {
        self.e
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Resonance data when the state is a sampled pole state.
    pub fn origin(&self) -> Option<&ResonanceData> {
        self.origin.as_ref()
    }

    pub fn with_origin(mut self, origin: Option<ResonanceData>) -> Self {
        self.origin = origin;
        self
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.nu.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.values.chunks_exact(self.nu.len())
    }

    pub fn get(&self, e_index: usize, nu_index: usize) -> Complex64 {
        self.values[e_index * self.nu.len() + nu_index]
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { nu: self.nu, e: self.e, values, hermitian: self.hermitian, origin: None }
    }

    pub fn cell(&self) -> f64 {
        self.nu.step() * self.e.step()
    }

    pub fn norm2(&self) -> f64 {
        let mut acc = Neumaier::new();
        for v in &self.values {
            acc.add(v.norm_sqr());
        }
        acc.value() * self.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// Per-slice squared norms `sum_nu |rho|^2 dnu`.
    pub fn slice_norms2(&self) -> Vec<f64> {
        self.rows().map(|r| crate::sum::sum(r.iter().map(|v| v.norm_sqr())) * self.nu.step()).collect()
    }

    pub fn check_same_grid(&self, other: &LiouvilleState) -> Result<()> {
        if self.nu.approx_eq(&other.nu) && self.e.approx_eq(&other.e) {
            Ok(())
        } else {
            Err(Error::AxisMismatch(format!("{:?}/{:?} vs {:?}/{:?}", self.nu, self.e, other.nu, other.e)))
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.with_values(self.values.iter().map(|v| v * c).collect());
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    pub fn sub(&self, other: &LiouvilleState) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut out = self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect());
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn add(&self, other: &LiouvilleState) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut out = self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect());
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    /// `e^{-iLt}`: pointwise multiplication by `e^{-i nu t}`.
    pub fn evolve(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("evolution time must be finite, got {t}")));
        }
        let phases: Vec<Complex64> = self.nu.points().map(|n| Complex64::from_polar(1.0, -n * t)).collect();
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.nu.len()) {
            for (v, p) in row.iter_mut().zip(&phases) {
                *v *= p;
            }
        }
        Ok(self.with_values(values))
    }

    /// Largest `|rho(-nu,E) - conj rho(nu,E)|` relative to `max |rho|`.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        if !self.nu.is_centered() {
            return Err(Error::InvalidAxis("hermiticity check needs a centred nu axis".into()));
        }
        let n = self.nu.len();
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return Ok(0.0);
        }
        let mut worst = 0.0f64;
        for row in self.rows() {
            for j in 0..n {
                worst = worst.max((row[n - 1 - j] - row[j].conj()).norm());
            }
        }
        Ok(worst / scale)
    }

    pub fn to_tau(&self) -> Result<TauState> {
        let tau = self.nu.conjugate()?;
        let sp = Spectral::new(self.nu.len(), self.nu.step());
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.nu.len()) {
            sp.forward(row);
        }
        Ok(TauState { tau, e: self.e, values })
    }

    /// Writes the `nu,E,re,im` dump preceded by `#` metadata lines.
    pub fn write_csv<W: Write>(&self, w: &mut W, meta: &[(String, String)]) -> Result<()> {
        for (k, v) in meta {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "# nu_step={:.16e}", self.nu.step())?;
        writeln!(w, "# e_step={:.16e}", self.e.step())?;
        writeln!(w, "# hermitian={}", self.hermitian)?;
        writeln!(w, "# norm2={:.16e}", self.norm2())?;
        writeln!(w, "nu,E,re,im")?;
        for (i, row) in self.rows().enumerate() {
            let e = self.e.point(i);
            for (j, v) in row.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", self.nu.point(j), e, v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Parses a dump written by [`LiouvilleState::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Self, BTreeMap<String, String>)> {
        let mut meta = BTreeMap::new();
        let mut nus: Vec<f64> = Vec::new();
        let mut es: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        let mut header = false;
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for part in rest.split_whitespace() {
                    if let Some((k, v)) = part.split_once('=') {
                        meta.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            if !header {
                if line != "nu,E,re,im" {
                    return Err(Error::Parse(format!("line {}: expected header nu,E,re,im", ln + 1)));
                }
                header = true;
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
            if f.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", ln + 1)));
            }
            if es.last() != Some(&f[1]) {
                es.push(f[1]);
            }
            if es.len() == 1 {
                nus.push(f[0]);
            }
            values.push(Complex64::new(f[2], f[3]));
        }
        if nus.is_empty() {
            return Err(Error::Parse("no samples".into()));
        }
        let step_of = |key: &str, pts: &[f64]| -> Result<f64> {
            match meta.get(key) {
                Some(s) => s.parse::<f64>().map_err(|e| Error::Parse(format!("{key}: {e}"))),
                None if pts.len() >= 2 => Ok((pts[pts.len() - 1] - pts[0]) / (pts.len() - 1) as f64),
                None => Err(Error::Parse(format!("{key} missing for single-point axis"))),
            }
        };
        let nu = Axis::new(nus[0], step_of("nu_step", &nus)?, nus.len())?;
        let e = Axis::new(es[0], step_of("e_step", &es)?, es.len())?;
        let hermitian = meta.get("hermitian").map(|s| s == "true").unwrap_or(false);
        Ok((Self::from_values(nu, e, values, hermitian)?, meta))
    }
}

/// `sum conj(a) b dnu dE`.
pub fn inner(a: &LiouvilleState, b: &LiouvilleState) -> Result<Complex64> {
    a.check_same_grid(b)?;
    let mut acc = NeumaierC::new();
    for (x, y) in a.values.iter().zip(&b.values) {
        acc.add(x.conj() * y);
    }
    Ok(acc.value() * a.cell())
}

/// `||a - b|| / ||b||`.
pub fn rel_l2(a: &LiouvilleState, b: &LiouvilleState) -> Result<f64> {
    let d = a.sub(b)?.norm();
    let n = b.norm();
    Ok(if n == 0.0 { d } else { d / n })
}

/// tau-domain partner rhohat(tau, E).
#[derive(Debug, Clone, PartialEq)]
pub struct TauState {
    pub(crate) tau: Axis,
    pub(crate) e: Axis,
    pub(crate) values: Vec<Complex64>,
}

impl TauState {
    pub fn from_values(tau: Axis, e: Axis, values: Vec<Complex64>) -> Result<Self> {
        if !tau.is_centered() {
            return Err(Error::InvalidAxis("tau axis must be centred".into()));
        }
        if values.len() != tau.len() * e.len() {
            return Err(Error::InvalidInput("tau state shape mismatch".into()));
        }
        Ok(Self { tau, e, values })
    }

    pub fn tau_axis(&self) -> Axis {
        self.tau
    }

    pub fn e_axis(&self) -> Axis {
        self.e
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.values.chunks_exact(self.tau.len())
    }

    pub fn norm2(&self) -> f64 {
        let mut acc = Neumaier::new();
        for v in &self.values {
            acc.add(v.norm_sqr());
        }
        acc.value() * self.tau.step() * self.e.step()
    }

    /// `sum_E |rhohat(tau_k, E)|^2 dtau dE` per tau bin.
    pub fn tau_masses(&self) -> Vec<f64> {
        let n = self.tau.len();
        let w = self.tau.step() * self.e.step();
        let mut acc = vec![Neumaier::new(); n];
        for row in self.rows() {
            for (a, v) in acc.iter_mut().zip(row) {
                a.add(v.norm_sqr());
            }
        }
        acc.into_iter().map(|a| a.value() * w).collect()
    }

    pub fn to_nu(&self) -> LiouvilleState {
        let n = self.tau.len();
        let dnu = 2.0 * std::f64::consts::PI / (n as f64 * self.tau.step());
        let sp = Spectral::new(n, dnu);
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(n) {
            sp.inverse(row);
        }
        let nu = Axis::centered(n, dnu).expect("even count");
        LiouvilleState { nu, e: self.e, values, hermitian: false, origin: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss_state() -> LiouvilleState {
        let nu = Axis::symmetric(20.0, 512).unwrap();
        let e = Axis::new(0.5, 1.0, 1).unwrap();
        make_state(|n, _| Complex64::new(PI.powf(-0.25) * (-n * n / 2.0).exp(), 0.0), nu, e, true).unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(0.0, 0.0, 4).is_err());
        assert!(Axis::new(0.0, 1.0, 0).is_err());
        assert!(Axis::centered(5, 1.0).is_err());
        let a = Axis::centered(4, 1.0).unwrap();
        assert_eq!(a.points().collect::<Vec<_>>(), vec![-1.5, -0.5, 0.5, 1.5]);
        assert!(a.is_centered());
    }

    #[test]
    fn half_offset_never_hits_ends() {
        let a = Axis::half_offset(0.0, 6.0, 512).unwrap();
        assert!((a.point(0) - 6.0 / 1024.0).abs() < 1e-15);
        assert!((a.edges().1 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_state_has_zero_norm() {
        let nu = Axis::symmetric(1.0, 8).unwrap();
        let e = Axis::half_offset(0.0, 1.0, 3).unwrap();
        let s = make_state(|_, _| Complex64::new(0.0, 0.0), nu, e, true).unwrap();
        assert_eq!(s.norm(), 0.0);
    }

    #[test]
    fn gaussian_unit_norm() {
        assert!((gauss_state().norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_sample_reports_point() {
        let nu = Axis::new(-1.0, 1.0, 3).unwrap();
        let e = Axis::new(0.5, 1.0, 1).unwrap();
        match make_state(|n, _| Complex64::new(1.0 / (n + 0.0), 0.0), nu, e, false) {
            Err(Error::NonFinite { nu, .. }) => assert_eq!(nu, 0.0),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn inner_basics() {
        let a = gauss_state();
        let ip = inner(&a, &a).unwrap();
        assert!((ip.re - a.norm2()).abs() < 1e-15 && ip.im == 0.0);
        let nu = a.nu_axis();
        let e = a.e_axis();
        let left = make_state(|n, _| Complex64::new(if n < 0.0 { 1.0 } else { 0.0 }, 0.0), nu, e, false).unwrap();
        let right = make_state(|n, _| Complex64::new(0.0, if n > 0.0 { 2.0 } else { 0.0 }), nu, e, false).unwrap();
        assert_eq!(inner(&left, &right).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn axis_mismatch_is_error() {
        let a = gauss_state();
        let b = LiouvilleState::zeros(Axis::symmetric(10.0, 512).unwrap(), a.e_axis());
        assert!(matches!(inner(&a, &b), Err(Error::AxisMismatch(_))));
    }

    #[test]
    fn evolve_identity_and_unitary() {
        let a = gauss_state();
        assert_eq!(a.evolve(0.0).unwrap().values(), a.values());
        assert!((a.evolve(3.7).unwrap().norm() - a.norm()).abs() < 1e-14);
    }

    #[test]
    fn parseval_and_round_trip() {
        let a = gauss_state().evolve(1.3).unwrap();
        let t = a.to_tau().unwrap();
        assert!((t.norm2() - a.norm2()).abs() < 1e-12 * a.norm2());
        let b = t.to_nu();
        assert!(rel_l2(&b, &a).unwrap() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let a = gauss_state().evolve(0.4).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf, &[("s".into(), "0".into())]).unwrap();
        let (b, meta) = LiouvilleState::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(meta["s"], "0");
        assert!(rel_l2(&b, &a).unwrap() < 1e-15);
        let stored: f64 = meta["norm2"].parse().unwrap();
        assert!((stored - b.norm2()).abs() <= 1e-12 * stored);
    }

    #[test]
    fn hermiticity_of_real_even() {
        let a = gauss_state();
        assert!(a.hermiticity_defect().unwrap() < 1e-15);
        assert!(a.evolve(1.0).unwrap().hermiticity_defect().unwrap() < 1e-12);
        assert!(a.scaled(Complex64::new(0.0, 1.0)).hermiticity_defect().unwrap() > 1.0);
    }
}
