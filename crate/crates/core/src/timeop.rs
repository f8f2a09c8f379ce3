//! Spectral projections `P_s` of the time operator, the family
//! `Q_tau = 1 - P_{-tau}`, decay-window probabilities and T/E moments.

use crate::error::{Error, Result};
use crate::friedrichs;
use crate::grid::{Axis, LiouvilleState, TauState};
use crate::hardy::{self, HilbertMethod, Line};
use crate::spectral::Spectral;
use crate::sum::Neumaier;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMethod {
    #[default]
    FftTruncation,
    HilbertForm,
    ClosedFormPole,
}

impl std::fmt::Display for ProjectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProjectionMethod::FftTruncation => "fft",
            ProjectionMethod::HilbertForm => "hilbert",
            ProjectionMethod::ClosedFormPole => "closed",
        })
    }
}

/// A projection time moved onto the nearest tau-bin boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snap {
    pub requested: f64,
    pub s: f64,
    pub distance: f64,
    /// Number of tau bins kept (`tau_k < s`).
    pub kept: usize,
}

/// Snaps `s` to a multiple of `dtau`. Bins sit at half-integer multiples,
/// so no bin lies on the cut.
pub fn snap(tau: &Axis, s: f64) -> Result<Snap> {
    let n = tau.len();
    let dtau = tau.step();
    let (lo, hi) = tau.edges();
    if !s.is_finite() || s < lo * (1.0 + 1e-12) - 1e-300 || s > hi * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::OutOfRange { s, lo, hi });
    }
    let half = (n / 2) as i64;
    let k = ((s / dtau).round() as i64).clamp(-half, half);
    let snapped = k as f64 * dtau;
    Ok(Snap { requested: s, s: snapped, distance: (snapped - s).abs(), kept: (k + half) as usize })
}

/// Largest reachable `|s|` on the grid of `state`.
pub fn tau_max(state: &LiouvilleState) -> Result<f64> {
    Ok(state.nu_axis().conjugate()?.edges().1)
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub state: LiouvilleState,
    pub snap: Snap,
}

pub fn project(rho: &LiouvilleState, s: f64, method: ProjectionMethod) -> Result<Projection> {
    let tau = rho.nu_axis().conjugate()?;
    let sn = snap(&tau, s)?;
    let state = match method {
        ProjectionMethod::FftTruncation => fft_truncation(rho, sn.kept)?,
        ProjectionMethod::HilbertForm => hilbert_form(rho, &sn)?,
        ProjectionMethod::ClosedFormPole => closed_checked(rho, &sn)?,
    };
    Ok(Projection { state, snap: sn })
}

fn fft_truncation(rho: &LiouvilleState, kept: usize) -> Result<LiouvilleState> {
    let n = rho.nu_axis().len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidAxis(format!("fft projection needs a power-of-two nu count, got {n}")));
    }
    if kept == n {
        return Ok(rho.clone());
    }
    if kept == 0 {
        return Ok(LiouvilleState::zeros(rho.nu_axis(), rho.e_axis()));
    }
    let sp = Spectral::new(n, rho.nu_axis().step());
    let mut values = rho.values().to_vec();
    for row in values.chunks_exact_mut(n) {
        sp.forward(row);
        for v in &mut row[kept..] {
            *v = Complex64::new(0.0, 0.0);
        }
        sp.inverse(row);
    }
    Ok(rho.with_values(values))
}

/// `(rho - i e^{-i nu s} H(e^{i nu s} rho)) / 2`, evaluated on a twice
/// oversampled band-limited interpolant so the shift by `s` cannot wrap.
fn hilbert_form(rho: &LiouvilleState, sn: &Snap) -> Result<LiouvilleState> {
    let nu = rho.nu_axis();
    let n = nu.len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidAxis(format!("hilbert-form projection needs a power-of-two nu count, got {n}")));
    }
    if sn.kept == n {
        return Ok(rho.clone());
    }
    let m = 2 * n;
    let fine = Axis::centered(m, 0.5 * nu.step())?;
    let coarse_sp = Spectral::new(n, nu.step());
    let fine_sp = Spectral::new(m, fine.step());
    let up: Vec<Complex64> = fine.points().map(|x| Complex64::from_polar(1.0, x * sn.s)).collect();
    let off = n / 2;
    let mut values = rho.values().to_vec();
    for row in values.chunks_exact_mut(n) {
        coarse_sp.forward(row);
        let mut g = vec![Complex64::new(0.0, 0.0); m];
        g[off..off + n].copy_from_slice(row);
        fine_sp.inverse(&mut g);
        let shifted = Line { axis: fine, values: g.iter().zip(&up).map(|(a, p)| a * p).collect() };
        let h = hardy::hilbert(&shifted, HilbertMethod::spectral(1))?.line;
        let mut out: Vec<Complex64> = g
            .iter()
            .zip(&h.values)
            .zip(&up)
            .map(|((gv, hv), p)| 0.5 * (gv - Complex64::new(0.0, 1.0) * hv * p.conj()))
            .collect();
        fine_sp.forward(&mut out);
        row.copy_from_slice(&out[off..off + n]);
        coarse_sp.inverse(row);
    }
    Ok(rho.with_values(values))
}

/// Closed form on the pole state, with the nu < 0 branch checked against
/// the numeric projection: it must be no worse than the nu > 0 branch.
fn closed_checked(rho: &LiouvilleState, sn: &Snap) -> Result<LiouvilleState> {
    let r = rho
        .origin()
        .ok_or_else(|| Error::InvalidInput("closed-form projection applies only to the Friedrichs pole state".into()))?;
    if sn.s > 0.0 {
        return Err(Error::InvalidInput(format!("closed-form projection needs s <= 0, got {}", sn.s)));
    }
    let closed = friedrichs::closed_field(sn.s, r, rho.nu_axis(), rho.e_axis())?;
    let numeric = fft_truncation(rho, sn.kept)?;
    let (pos, neg) = branch_errors(&closed, &numeric);
    let limit = (5e-2f64).max(2.0 * pos);
    if neg > limit {
        return Err(Error::FormulaMismatch(format!(
            "nu<0 branch relative L2 {neg:.3e} vs nu>0 branch {pos:.3e} at s={}",
            sn.s
        )));
    }
    Ok(closed)
}

/// Relative L2 differences restricted to nu > 0 and nu < 0 columns.
pub fn branch_errors(a: &LiouvilleState, b: &LiouvilleState) -> (f64, f64) {
    let nu = a.nu_axis();
    let mut acc = [[Neumaier::new(), Neumaier::new()], [Neumaier::new(), Neumaier::new()]];
    for (ra, rb) in a.rows().zip(b.rows()) {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            let side = usize::from(nu.point(j) < 0.0);
            acc[side][0].add((x - y).norm_sqr());
            acc[side][1].add(y.norm_sqr());
        }
    }
    let rel = |p: &[Neumaier; 2]| (p[0].value() / p[1].value().max(1e-300)).sqrt();
    (rel(&acc[0]), rel(&acc[1]))
}

/// `Q_tau rho = rho - P_{-tau} rho`.
pub fn q_project(rho: &LiouvilleState, tau: f64, method: ProjectionMethod) -> Result<Projection> {
    let p = project(rho, -tau, method)?;
    Ok(Projection { state: rho.sub(&p.state)?, snap: p.snap })
}

fn require_normalized(rho: &LiouvilleState) -> Result<()> {
    let n2 = rho.norm2();
    if (n2.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

/// Cumulative tau masses: `cum[k] = sum_{j<k} m_j`, so `cum[kept]` is `||P_s rho||^2`.
pub fn cumulative_tau_mass(rho: &LiouvilleState) -> Result<(Axis, Vec<f64>)> {
    let t = rho.to_tau()?;
    let masses = t.tau_masses();
    let mut cum = Vec::with_capacity(masses.len() + 1);
    let mut acc = Neumaier::new();
    cum.push(0.0);
    for m in masses {
        acc.add(m);
        cum.push(acc.value());
    }
    Ok((t.tau_axis(), cum))
}

/// `||Q_t2 rho||^2 - ||Q_t1 rho||^2` for a normalised state.
pub fn decay_window_probability(rho: &LiouvilleState, t1: f64, t2: f64, method: ProjectionMethod) -> Result<f64> {
    if t1 > t2 {
        return Err(Error::InvalidInput(format!("window needs t1 <= t2, got ]{t1}, {t2}]")));
    }
    require_normalized(rho)?;
    if t1 == t2 {
        return Ok(0.0);
    }
    match method {
        ProjectionMethod::FftTruncation => {
            let (tau, cum) = cumulative_tau_mass(rho)?;
            let a = snap(&tau, -t2)?;
            let b = snap(&tau, -t1)?;
            Ok((cum[b.kept] - cum[a.kept]).max(0.0))
        }
        _ => {
            let q2 = q_project(rho, t2, method)?.state.norm2();
            let q1 = q_project(rho, t1, method)?.state.norm2();
            Ok((q2 - q1).max(0.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMoments {
    pub mean: f64,
    pub uncertainty: f64,
    /// Share of the second-moment sum carried by the outer tau bins.
    pub boundary_fraction: f64,
}

/// Outer bins per side used by the moment convergence check.
pub fn boundary_bins(n: usize) -> usize {
    (n / 64).max(1)
}

pub fn tau_moments(t: &TauState) -> Result<TimeMoments> {
    let tau = t.tau_axis();
    let m = t.tau_masses();
    let total = crate::sum::sum(m.iter().copied());
    if (total.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(total));
    }
    let mean = crate::sum::sum(m.iter().enumerate().map(|(k, w)| tau.point(k) * w)) / total;
    let second: Vec<f64> = m.iter().enumerate().map(|(k, w)| tau.point(k).powi(2) * w).collect();
    let sum2 = crate::sum::sum(second.iter().copied());
    let nb = boundary_bins(m.len());
    let edge = crate::sum::sum(second[..nb].iter().chain(&second[m.len() - nb..]).copied());
    let boundary_fraction = if sum2 > 0.0 { edge / sum2 } else { 0.0 };
    if boundary_fraction >= 1e-6 {
        return Err(Error::MomentNotConverged { fraction: boundary_fraction });
    }
    let var = crate::sum::sum(m.iter().enumerate().map(|(k, w)| (tau.point(k) - mean).powi(2) * w)) / total;
    Ok(TimeMoments { mean, uncertainty: var.max(0.0).sqrt(), boundary_fraction })
}

pub fn time_moments(rho: &LiouvilleState) -> Result<TimeMoments> {
    tau_moments(&rho.to_tau()?)
}

pub fn time_expectation(rho: &LiouvilleState) -> Result<f64> {
    time_moments(rho).map(|m| m.mean)
}

pub fn time_uncertainty(rho: &LiouvilleState) -> Result<f64> {
    time_moments(rho).map(|m| m.uncertainty)
}

/// Moments of `T = i d/d nu` evaluated in the nu representation with
/// fourth-order differences. Unlike [`time_moments`] this ignores the jump
/// that truncating a slowly decaying state at the nu edges creates, so it is
/// the one to use for states such as the pole kernel whose tau tails are set
/// by that jump. `boundary_fraction` is the share of `||d rho||^2` in the
/// outer nu bins.
pub fn derivative_moments(rho: &LiouvilleState) -> Result<TimeMoments> {
    let n2 = rho.norm2();
    if (n2.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n2));
    }
    let n = rho.nu_axis().len();
    if n < 5 {
        return Err(Error::InvalidAxis("derivative moments need >= 5 nu points".into()));
    }
    let h = rho.nu_axis().step();
    let nb = boundary_bins(n);
    let (mut first, mut second, mut edge) = (crate::sum::Neumaier::new(), crate::sum::Neumaier::new(), crate::sum::Neumaier::new());
    for row in rho.rows() {
        for j in 0..n {
            let d = match j {
                0 => (row[1] - row[0]) / h,
                1 => (row[2] - row[0]) / (2.0 * h),
                _ if j == n - 2 => (row[n - 1] - row[n - 3]) / (2.0 * h),
                _ if j == n - 1 => (row[n - 1] - row[n - 2]) / h,
                _ => (row[j - 2] - 8.0 * row[j - 1] + 8.0 * row[j + 1] - row[j + 2]) / (12.0 * h),
            };
            first.add((row[j].conj() * Complex64::new(0.0, 1.0) * d).re);
            second.add(d.norm_sqr());
            if j < nb || j >= n - nb {
                edge.add(d.norm_sqr());
            }
        }
    }
    let cell = rho.cell();
    let mean = first.value() * cell;
    let var = second.value() * cell - mean * mean;
    let boundary_fraction = if second.value() > 0.0 { edge.value() / second.value() } else { 0.0 };
    Ok(TimeMoments { mean, uncertainty: var.max(0.0).sqrt(), boundary_fraction })
}

/// Nonnegative energy density with unit mass on a uniform axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDensity {
    axis: Axis,
    weights: Vec<f64>,
    raw_mass: f64,
}

impl EnergyDensity {
    pub fn new(axis: Axis, weights: Vec<f64>) -> Result<Self> {
        if axis.start() - 0.5 * axis.step() < -1e-12 * axis.step() {
            return Err(Error::InvalidAxis("energy axis must lie in w >= 0".into()));
        }
        if weights.len() != axis.len() {
            return Err(Error::InvalidInput("density length does not match its axis".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("density weights must be finite and >= 0".into()));
        }
        let mass = crate::sum::sum(weights.iter().copied()) * axis.step();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized(mass));
        }
        Ok(Self { axis, weights, raw_mass: mass })
    }

    /// Rescales to unit mass, remembering the original mass.
    pub fn normalized(axis: Axis, weights: Vec<f64>) -> Result<Self> {
        let mass = crate::sum::sum(weights.iter().copied()) * axis.step();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("density mass must be > 0, got {mass}")));
        }
        let mut d = Self::new(axis, weights.into_iter().map(|w| w / mass).collect())?;
        d.raw_mass = mass;
        Ok(d)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    pub fn mean(&self) -> f64 {
        crate::sum::sum(self.axis.points().zip(&self.weights).map(|(x, w)| x * w)) * self.axis.step()
    }
}

pub fn energy_uncertainty(d: &EnergyDensity) -> Result<f64> {
    let mean = d.mean();
    let var = crate::sum::sum(d.axis.points().zip(&d.weights).map(|(x, w)| (x - mean).powi(2) * w)) * d.axis.step();
    if !var.is_finite() {
        return Err(Error::MomentNotConverged { fraction: f64::INFINITY });
    }
    Ok(var.max(0.0).sqrt())
}

pub const UNCERTAINTY_BOUND: f64 = 0.353_553_390_593_273_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub delta_e: f64,
    pub delta_t: f64,
    pub product: f64,
    pub bound: f64,
    /// `product >= bound - 1e-6`.
    pub holds: bool,
}

pub fn uncertainty_check(rho: &LiouvilleState, d: &EnergyDensity) -> Result<UncertaintyReport> {
    let delta_e = energy_uncertainty(d)?;
    if delta_e <= 1e-12 * d.axis.step() {
        return Err(Error::InvalidInput("energy uncertainty is zero: point spectrum cannot test the bound".into()));
    }
    let delta_t = time_uncertainty(rho)?;
    let product = delta_e * delta_t;
    Ok(UncertaintyReport { delta_e, delta_t, product, bound: UNCERTAINTY_BOUND, holds: product >= UNCERTAINTY_BOUND - 1e-6 })
}

/// [`uncertainty_check`] with the time spread from [`derivative_moments`].
pub fn uncertainty_check_derivative(rho: &LiouvilleState, d: &EnergyDensity) -> Result<UncertaintyReport> {
    let delta_e = energy_uncertainty(d)?;
    if delta_e <= 1e-12 * d.axis.step() {
        return Err(Error::InvalidInput("energy uncertainty is zero: point spectrum cannot test the bound".into()));
    }
    let delta_t = derivative_moments(rho)?.uncertainty;
    let product = delta_e * delta_t;
    Ok(UncertaintyReport { delta_e, delta_t, product, bound: UNCERTAINTY_BOUND, holds: product >= UNCERTAINTY_BOUND - 1e-6 })
}

/// Kernel of the pure state `|psi><psi|` in (nu, E) variables:
/// `psi(E+nu) conj psi(E)` for `nu >= 0`, `psi(E) conj psi(E-nu)` otherwise.
pub fn pure_state<F: Fn(f64) -> Complex64>(psi: F, nu: Axis, e: Axis) -> Result<LiouvilleState> {
    crate::grid::make_state(
        |n, x| if n >= 0.0 { psi(x + n) * psi(x).conj() } else { psi(x) * psi(x - n).conj() },
        nu,
        e,
        true,
    )
}

/// Density `|psi|^2` of a pure state on `axis`, normalised.
pub fn pure_density<F: Fn(f64) -> Complex64>(psi: F, axis: Axis) -> Result<EnergyDensity> {
    EnergyDensity::normalized(axis, axis.points().map(|x| psi(x).norm_sqr()).collect())
}
