#![allow(dead_code)]

use liouville::friedrichs::{PrefactorMode, ResonanceData};
use liouville::grid::{Axis, LiouvilleState, TauState};
use num_complex::Complex64;
use rand::Rng;

pub const GAMMA: f64 = 0.2;

pub fn resonance(mode: PrefactorMode) -> ResonanceData {
    ResonanceData::new(1.0, GAMMA, mode).unwrap()
}

/// Default grid: nu in [-64 gamma, 64 gamma] with 4096 points, E in [0, 1 + 40 gamma] with 512.
pub fn default_axes() -> (Axis, Axis) {
    (Axis::symmetric(64.0 * GAMMA, 4096).unwrap(), Axis::half_offset(0.0, 1.0 + 40.0 * GAMMA, 512).unwrap())
}

/// Sum of a few Gaussian bumps in tau, kept inside the middle half of the tau
/// range, mapped to nu. Normalized.
pub fn random_band_limited<R: Rng>(rng: &mut R, n_nu: usize, n_e: usize) -> LiouvilleState {
    let tau = Axis::centered(n_nu, 0.1).unwrap();
    let e = Axis::half_offset(0.0, 2.0, n_e).unwrap();
    let half = tau.edges().1 / 2.0;
    let bumps: Vec<(f64, f64, Complex64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-half * 0.4..half * 0.4),
                rng.gen_range(0.3..0.8),
                Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU)),
            )
        })
        .collect();
    let values: Vec<Complex64> = e
        .points()
        .flat_map(|x| {
            let bumps = bumps.clone();
            tau.points().map(move |t| {
                bumps
                    .iter()
                    .map(|(c, w, a)| a * (-(t - c - 0.5 * x).powi(2) / (2.0 * w * w)).exp())
                    .sum::<Complex64>()
            })
        })
        .collect();
    let state = TauState::from_values(tau, e, values).unwrap().to_nu();
    let n = state.norm();
    state.scaled(Complex64::new(1.0 / n, 0.0))
}
