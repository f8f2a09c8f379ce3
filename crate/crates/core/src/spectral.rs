//! Unitary discrete Fourier pair on centred half-offset grids.
//!
//! With `nu_j = (j - N/2 + 1/2) dnu` and `tau_k = (k - N/2 + 1/2) dtau`,
//! `dtau = 2 pi / (N dnu)`, the forward map is
//! `rhohat_k = dnu / sqrt(2 pi) * sum_j exp(i tau_k nu_j) rho_j`.
//! Every phase is an integer multiple of `pi / (2N)`, so the twiddles come
//! from an exact table and the pair is unitary to roundoff.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub struct Spectral {
    n: usize,
    dnu: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("dnu", &self.dnu).finish()
    }
}

impl Spectral {
    /// `n` must be even and positive.
    pub fn new(n: usize, dnu: f64) -> Self {
        assert!(n >= 2 && n.is_multiple_of(2), "half-offset transform needs an even length");
        let mut planner = FftPlanner::new();
        // rustfft's Inverse is the unnormalised e^{+i} sum.
        let fwd = planner.plan_fft_inverse(n);
        let inv = planner.plan_fft_forward(n);
        let four_n = 4 * n as i64;
        let unit = |m: i64| {
            let phase = PI * m.rem_euclid(four_n) as f64 / (2.0 * n as f64);
            Complex64::from_polar(1.0, phase)
        };
        let a = 1 - n as i64; // 2 * a0
        let pre = (0..n as i64).map(|j| unit(2 * a * j)).collect();
        let post = (0..n as i64).map(|k| unit(a * a + 2 * a * k)).collect();
        Self { n, dnu, fwd, inv, pre, post }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dnu(&self) -> f64 {
        self.dnu
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.dnu)
    }

    /// nu -> tau in place.
    pub fn forward(&self, line: &mut [Complex64]) {
        assert_eq!(line.len(), self.n);
        for (x, p) in line.iter_mut().zip(&self.pre) {
            *x *= p;
        }
        self.fwd.process(line);
        let scale = self.dnu / (2.0 * PI).sqrt();
        for (x, p) in line.iter_mut().zip(&self.post) {
            *x *= p * scale;
        }
    }

    /// tau -> nu in place.
    pub fn inverse(&self, line: &mut [Complex64]) {
        assert_eq!(line.len(), self.n);
        for (x, p) in line.iter_mut().zip(&self.post) {
            *x *= p.conj();
        }
        self.inv.process(line);
        let scale = self.dtau() / (2.0 * PI).sqrt();
        for (x, p) in line.iter_mut().zip(&self.pre) {
            *x *= p.conj() * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(line: &[Complex64], dnu: f64) -> Vec<Complex64> {
        let n = line.len();
        let dtau = 2.0 * PI / (n as f64 * dnu);
        let off = -(n as f64) / 2.0 + 0.5;
        (0..n)
            .map(|k| {
                let tau = (k as f64 + off) * dtau;
                let s: Complex64 = line
                    .iter()
                    .enumerate()
                    .map(|(j, &r)| r * Complex64::from_polar(1.0, tau * (j as f64 + off) * dnu))
                    .sum();
                s * dnu / (2.0 * PI).sqrt()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        let n = 64;
        let dnu = 0.3;
        let line: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64).cos() * 0.2)).collect();
        let want = direct(&line, dnu);
        let mut got = line.clone();
        Spectral::new(n, dnu).forward(&mut got);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip() {
        let n = 256;
        let sp = Spectral::new(n, 0.05);
        let line: Vec<Complex64> = (0..n).map(|j| Complex64::new(1.0 / (1.0 + j as f64), (j as f64).sqrt())).collect();
        let mut x = line.clone();
        sp.forward(&mut x);
        sp.inverse(&mut x);
        for (a, b) in x.iter().zip(&line) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
