//! One-level Friedrichs model: eta+, the resonance, the outgoing
//! representation f1, the pole-approximation kernel rho11(nu, E) and its
//! closed-form projections.

use crate::error::{Error, Result};
use crate::grid::{make_state, Axis, LiouvilleState};
use crate::quad::{self, QuadOptions};
use crate::special::exp_e1;
use crate::timeop::EnergyDensity;
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormFactorKind {
    /// `v(w) = scale * 1[w <= cutoff]`
    FlatCutoff,
    /// `v(w) = scale * sqrt(w) / (1 + (w/cutoff)^2)`
    RationalDecay,
}

impl std::fmt::Display for FormFactorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FormFactorKind::FlatCutoff => "flat",
            FormFactorKind::RationalDecay => "rational",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactor {
    pub kind: FormFactorKind,
    pub cutoff: f64,
    pub scale: f64,
}

impl FormFactor {
    pub fn new(kind: FormFactorKind, cutoff: f64, scale: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be > 0, got {cutoff}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput(format!("form-factor scale must be > 0, got {scale}")));
        }
        Ok(Self { kind, cutoff, scale })
    }

    pub fn v(&self, w: f64) -> f64 {
        if w < 0.0 {
            return 0.0;
        }
        match self.kind {
            FormFactorKind::FlatCutoff => {
                if w <= self.cutoff {
                    self.scale
                } else {
                    0.0
                }
            }
            FormFactorKind::RationalDecay => {
                let r = w / self.cutoff;
                self.scale * w.sqrt() / (1.0 + r * r)
            }
        }
    }

    pub fn v2(&self, w: f64) -> f64 {
        let v = self.v(w);
        v * v
    }

    /// `int_0^inf |v|^2`.
    pub fn l2_norm2(&self) -> f64 {
        let s2 = self.scale * self.scale;
        match self.kind {
            FormFactorKind::FlatCutoff => s2 * self.cutoff,
            FormFactorKind::RationalDecay => s2 * self.cutoff * self.cutoff / 2.0,
        }
    }
}

/// Sign of the level-shift integral in eta+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaSign {
    /// `+ lambda^2 PV int |v|^2/(w' - w)`
    #[default]
    Paper,
    /// Opposite sign on the principal-value part only.
    Flipped,
}

impl EtaSign {
    pub fn factor(self) -> f64 {
        match self {
            EtaSign::Paper => 1.0,
            EtaSign::Flipped => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedrichsParams {
    pub omega1: f64,
    pub lambda: f64,
    pub form_factor: FormFactor,
    pub eta_sign: EtaSign,
}

impl FriedrichsParams {
    pub fn new(omega1: f64, lambda: f64, form_factor: FormFactor) -> Result<Self> {
        if !(omega1 > 0.0 && omega1.is_finite()) {
            return Err(Error::InvalidInput(format!("omega1 must be > 0, got {omega1}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self { omega1, lambda, form_factor, eta_sign: EtaSign::Paper })
    }

    /// Flat cutoff whose scale makes the width `2 pi lambda^2 |v|^2` equal `gamma`.
    pub fn flat_for_gamma(omega1: f64, lambda: f64, cutoff: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("need gamma > 0 and lambda > 0, got {gamma}, {lambda}")));
        }
        let scale = (gamma / (2.0 * PI * lambda * lambda)).sqrt();
        Self::new(omega1, lambda, FormFactor::new(FormFactorKind::FlatCutoff, cutoff, scale)?)
    }

    pub fn with_eta_sign(mut self, sign: EtaSign) -> Self {
        self.eta_sign = sign;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrefactorMode {
    /// `c = gamma / 2`, norm close to pi^2.
    PaperGammaOver2,
    /// `c = gamma / (2 pi)`, norm close to 1.
    #[default]
    NormalizedGammaOver2Pi,
}

impl std::fmt::Display for PrefactorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrefactorMode::PaperGammaOver2 => "paper",
            PrefactorMode::NormalizedGammaOver2Pi => "normalized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceData {
    pub omega_tilde: f64,
    pub gamma: f64,
    pub mode: PrefactorMode,
}

impl ResonanceData {
    pub fn new(omega_tilde: f64, gamma: f64, mode: PrefactorMode) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be > 0, got {gamma}")));
        }
        if !(omega_tilde > 0.0 && omega_tilde.is_finite()) {
            return Err(Error::InvalidInput(format!("omega_tilde must be > 0, got {omega_tilde}")));
        }
        Ok(Self { omega_tilde, gamma, mode })
    }

    pub fn with_mode(mut self, mode: PrefactorMode) -> Self {
        self.mode = mode;
        self
    }

    /// `z1 = omega_tilde - i gamma/2`.
    pub fn z1(&self) -> Complex64 {
        Complex64::new(self.omega_tilde, -0.5 * self.gamma)
    }

    /// `nu0(E) = (E - omega_tilde) + i gamma/2`.
    pub fn nu0(&self, e: f64) -> Complex64 {
        Complex64::new(e - self.omega_tilde, 0.5 * self.gamma)
    }

    pub fn prefactor(&self) -> f64 {
        match self.mode {
            PrefactorMode::PaperGammaOver2 => 0.5 * self.gamma,
            PrefactorMode::NormalizedGammaOver2Pi => self.gamma / (2.0 * PI),
        }
    }

    /// Squared norm of a unit pure state in this mode (1 or pi^2).
    pub fn unit_norm2(&self) -> f64 {
        match self.mode {
            PrefactorMode::PaperGammaOver2 => PI * PI,
            PrefactorMode::NormalizedGammaOver2Pi => 1.0,
        }
    }
}

/// `PV int_0^inf |v(w')|^2 / (w' - w) dw'` by singularity subtraction.
pub fn pv_integral(w: f64, ff: &FormFactor) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidInput(format!("PV integral needs w > 0, got {w}")));
    }
    if ff.kind == FormFactorKind::FlatCutoff && w == ff.cutoff {
        return Err(Error::InvalidInput("PV integral diverges at the flat cutoff".into()));
    }
    let gw = ff.v2(w);
    // The subtracted piece integrates to zero over [0, 2w] in the PV sense.
    let f = |x: f64| {
        let sub = if x < 2.0 * w { gw } else { 0.0 };
        let d = x - w;
        if d == 0.0 {
            0.0
        } else {
            (ff.v2(x) - sub) / d
        }
    };
    let pts = quad::breakpoints(0.0, f64::INFINITY, &[w, 2.0 * w, ff.cutoff, 4.0 * ff.cutoff]);
    let r = quad::integrate_breaks(f, &pts, QuadOptions { abs_tol: 1e-14 * ff.l2_norm2().max(1.0), rel_tol: 1e-12, max_intervals: 8000 })
        .map_err(|e| Error::Quadrature(format!("PV integral at w={w}: {e}")))?;
    if r.error > 1e-8 * r.value.abs().max(1e-300) && r.error > 1e-14 * ff.l2_norm2().max(1.0) {
        return Err(Error::Quadrature(format!("PV integral at w={w}: error {:.3e}", r.error)));
    }
    Ok(r.value)
}

/// Flat cutoff: `scale^2 ln(|cutoff - w| / w)`.
pub fn pv_integral_flat_closed(w: f64, ff: &FormFactor) -> f64 {
    ff.scale * ff.scale * ((ff.cutoff - w).abs() / w).ln()
}

/// Boundary value `eta+(w + i0)`.
pub fn eta_plus(w: f64, p: &FriedrichsParams) -> Result<Complex64> {
    let l2 = p.lambda * p.lambda;
    let im = PI * l2 * p.form_factor.v2(w);
    if l2 == 0.0 {
        return Ok(Complex64::new(w - p.omega1, 0.0));
    }
    let pv = pv_integral(w, &p.form_factor)?;
    Ok(Complex64::new(w - p.omega1 + p.eta_sign.factor() * l2 * pv, im))
}

/// Shifted level and width from the ascending zero of Re eta+ closest to omega1.
pub fn find_resonance(p: &FriedrichsParams, mode: PrefactorMode) -> Result<ResonanceData> {
    let hi = 2.0 * p.form_factor.cutoff;
    let m = 4000;
    let re = |w: f64| eta_plus(w, p).map(|z| z.re);
    let grid: Vec<f64> = (0..m).map(|k| hi * (k as f64 + 0.5) / m as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&w| re(w)).collect::<Result<_>>()?;
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..m - 1 {
        if vals[k] < 0.0 && vals[k + 1] >= 0.0 {
            let mid = 0.5 * (grid[k] + grid[k + 1]);
            let dist = (mid - p.omega1).abs();
            if best.is_none_or(|(d, _, _)| dist < d) {
                best = Some((dist, grid[k], grid[k + 1]));
            }
        }
    }
    let (_, mut a, mut b) = best.ok_or_else(|| Error::NoResonance(format!("Re eta+ has no ascending sign change on (0, {hi})")))?;
    while b - a > 1e-12 * b.abs() {
        let mid = 0.5 * (a + b);
        if re(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let wt = 0.5 * (a + b);
    let gamma = 2.0 * PI * p.lambda * p.lambda * p.form_factor.v2(wt);
    if !(gamma > 0.0) {
        return Err(Error::NoResonance(format!("zero width at omega_tilde={wt}")));
    }
    ResonanceData::new(wt, gamma, mode)
}

/// `|f1(w)|^2 = |lambda v(w) / eta+(w)|^2` sampled on `axis`, normalised.
/// The raw mass `int |f1|^2` is kept in the density.
pub fn f1_density(p: &FriedrichsParams, axis: Axis) -> Result<EnergyDensity> {
    let w: Vec<f64> = axis
        .points()
        .map(|x| {
            let eta = eta_plus(x, p)?;
            let v = p.lambda * p.form_factor.v(x);
            Ok(v * v / eta.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let raw = crate::sum::sum(w.iter().copied()) * axis.step();
    if raw < 0.95 {
        return Err(Error::InvalidInput(format!("omega axis too narrow: captured mass {raw:.4}")));
    }
    EnergyDensity::normalized(axis, w)
}

/// Lorentzian `(gamma/2pi) / ((w - omega_tilde)^2 + gamma^2/4)` from the pole
/// approximation, normalised on `axis`.
pub fn lorentzian_density(r: &ResonanceData, axis: Axis) -> Result<EnergyDensity> {
    let w = axis.points().map(|x| (r.gamma / (2.0 * PI)) / r.nu0(x).norm_sqr()).collect();
    EnergyDensity::normalized(axis, w)
}

/// Pole-approximation kernel with the mode prefactor.
pub fn rho11_pole(nu: f64, e: f64, r: &ResonanceData) -> Complex64 {
    r.prefactor() * pole_shape(nu, e, r)
}

fn pole_shape(nu: f64, e: f64, r: &ResonanceData) -> Complex64 {
    let n0 = r.nu0(e);
    if nu >= 0.0 {
        1.0 / (n0.conj() * (nu + n0))
    } else {
        1.0 / (n0 * (n0.conj() - nu))
    }
}

/// rho11 sampled on a grid and tagged with its resonance data.
pub fn pole_state(r: &ResonanceData, nu: Axis, e: Axis) -> Result<LiouvilleState> {
    if e.points().any(|x| x == r.omega_tilde) {
        return Err(Error::InvalidAxis("E grid samples omega_tilde exactly".into()));
    }
    Ok(make_state(|n, x| rho11_pole(n, x, r), nu, e, true)?.with_origin(Some(*r)))
}

/// `log+` with argument in `]-pi/2, 3pi/2[`.
pub fn log_plus(z: Complex64) -> Complex64 {
    let mut arg = z.arg();
    if arg <= -0.5 * PI {
        arg += 2.0 * PI;
    }
    Complex64::new(z.norm().ln(), arg)
}

/// `int_{-inf}^0 e^{-sy}/(y + c) dy = -e^{sc} E1(sc)` for `s < 0`, `c` off `[0, inf)`.
pub fn background_integral(s: f64, c: Complex64) -> Result<Complex64> {
    if !(s < 0.0) {
        return Err(Error::InvalidInput(format!("background integral needs s < 0, got {s}")));
    }
    if c.im == 0.0 && c.re >= 0.0 {
        return Err(Error::InvalidInput(format!("c={c} puts the pole on the integration path")));
    }
    exp_e1(c * s).map(|u| -u)
}

/// Limit of [`background_integral`] as `c` approaches the real point
/// `c_re > 0` from above (`above`) or below.
fn background_integral_limit(s: f64, c_re: f64, above: bool) -> Result<Complex64> {
    if !(s < 0.0) {
        return Err(Error::InvalidInput(format!("background integral needs s < 0, got {s}")));
    }
    // Im(sc) has the opposite sign of Im c for s < 0.
    crate::special::exp_e1_boundary(s * c_re, !above).map(|u| -u)
}

/// The two factors `A = 1/(nu0*(nu+nu0))`, `B = 1/(nu0(nu0*-nu))`.
fn ab(nu: f64, n0: Complex64) -> (Complex64, Complex64) {
    (1.0 / (n0.conj() * (nu + n0)), 1.0 / (n0 * (n0.conj() - nu)))
}

/// Per-E quantities of the s < 0 projection.
#[derive(Debug, Clone, Copy)]
struct SliceTerms {
    n0: Complex64,
    j_minus: Complex64,
    j_plus: Complex64,
    res_b: Complex64,
    res_a: Complex64,
}

fn slice_terms(s: f64, e: f64, r: &ResonanceData) -> Result<SliceTerms> {
    let n0 = r.nu0(e);
    let zero = Complex64::new(0.0, 0.0);
    let below = e < r.omega_tilde;
    // At E = omega_tilde both arguments are real; take the E > omega_tilde side,
    // which is the side the residue indicator below agrees with.
    let (j_minus, j_plus) = if e == r.omega_tilde {
        (background_integral_limit(s, 0.5 * r.gamma, false)?, background_integral_limit(s, 0.5 * r.gamma, true)?)
    } else {
        (background_integral(s, -I * n0)?, background_integral(s, I * n0.conj())?)
    };
    Ok(SliceTerms {
        n0,
        j_minus,
        j_plus,
        res_b: if below { (I * s * n0.conj()).exp() } else { zero },
        res_a: if below { (-I * s * n0).exp() } else { zero },
    })
}

fn closed_value(s: f64, nu: f64, jnu: Complex64, t: &SliceTerms) -> Complex64 {
    let (a, b) = ab(nu, t.n0);
    let phase = Complex64::from_polar(1.0, -s * nu);
    let bg = ((t.j_minus - jnu) * a - (t.j_plus - jnu) * b) / (2.0 * PI * I);
    phase * (bg + t.res_b * b + t.res_a * a)
}

/// Closed-form `P_s rho11` at one point, `s <= 0`.
pub fn project_pole_closed(s: f64, nu: f64, e: f64, r: &ResonanceData) -> Result<Complex64> {
    if s > 0.0 {
        return Err(Error::InvalidInput(format!("closed-form projection needs s <= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(project_zero_closed(nu, e, r));
    }
    let t = slice_terms(s, e, r)?;
    let jnu = background_integral(s, Complex64::new(0.0, nu))
        .map_err(|err| Error::Regime(format!("J(i nu) at nu={nu}, s={s}: {err}")))?;
    Ok(r.prefactor() * closed_value(s, nu, jnu, &t))
}

/// Closed-form `P_0 rho11`:
/// `-(i/2pi)[log+(nu/nu0*) B - log+(-nu/nu0) A]` plus `A` for `nu > 0` and
/// `A + B` for `nu < 0`, `E < omega_tilde`.
pub fn project_zero_closed(nu: f64, e: f64, r: &ResonanceData) -> Complex64 {
    let n0 = r.nu0(e);
    let (a, b) = ab(nu, n0);
    let logs = -I / (2.0 * PI) * (log_plus(nu / n0.conj()) * b - log_plus(-nu / n0) * a);
    let poles = if nu > 0.0 {
        a
    } else if e < r.omega_tilde {
        a + b
    } else {
        Complex64::new(0.0, 0.0)
    };
    r.prefactor() * (logs + poles)
}

/// Closed-form `P_s rho11` over a whole grid, sharing the per-row and
/// per-column exponential integrals.
pub fn closed_field(s: f64, r: &ResonanceData, nu: Axis, e: Axis) -> Result<LiouvilleState> {
    if s > 0.0 {
        return Err(Error::InvalidInput(format!("closed-form projection needs s <= 0, got {s}")));
    }
    let c = r.prefactor();
    let mut values = Vec::with_capacity(nu.len() * e.len());
    if s == 0.0 {
        for x in e.points() {
            for n in nu.points() {
                values.push(project_zero_closed(n, x, r));
            }
        }
    } else {
        let jnu: Vec<Complex64> = nu
            .points()
            .map(|n| background_integral(s, Complex64::new(0.0, n)))
            .collect::<Result<_>>()?;
        for x in e.points() {
            let t = slice_terms(s, x, r)?;
            for (j, n) in nu.points().enumerate() {
                values.push(c * closed_value(s, n, jnu[j], &t));
            }
        }
    }
    Ok(LiouvilleState::from_values(nu, e, values, true)?.with_origin(Some(*r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpintRegime {
    Auto,
    Asymptotic,
    /// Direct evaluation through the complex exponential integral.
    Numeric,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpintTail {
    pub value: Complex64,
    /// Asymptotic: `(n+1)!/|z|^{n+1}`; numeric: estimated absolute error.
    pub remainder_bound: f64,
    pub regime: ExpintRegime,
}

/// Threshold on `|cs|` above which `Auto` picks the asymptotic series.
pub fn asymptotic_threshold(n: usize) -> f64 {
    (10.0f64).max(2.0 * (n + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// `int_{-inf}^0 e^{-sy}/(y+c) dy` by the asymptotic series
/// `sum_{k<=n} k!/(-cs)^{k+1}` or numerically.
pub fn expint_tail(s: f64, c: Complex64, n: usize, regime: ExpintRegime) -> Result<ExpintTail> {
    if !(s < 0.0) {
        return Err(Error::InvalidInput(format!("expint_tail needs s < 0, got {s}")));
    }
    let z = -c * s;
    let az = z.norm();
    let regime = match regime {
        ExpintRegime::Auto if az > asymptotic_threshold(n) => ExpintRegime::Asymptotic,
        ExpintRegime::Auto => ExpintRegime::Numeric,
        other => other,
    };
    match regime {
        ExpintRegime::Asymptotic => {
            if az <= 1.0f64.max((n + 1) as f64) {
                return Err(Error::Regime(format!(
                    "|cs| = {az:.3} too small for the asymptotic series at n = {n}; use the numeric regime"
                )));
            }
            let mut term = 1.0 / z;
            let mut acc = term;
            for k in 1..=n {
                term *= k as f64 / z;
                acc += term;
            }
            Ok(ExpintTail { value: acc, remainder_bound: factorial(n + 1) / az.powi(n as i32 + 1), regime })
        }
        _ => {
            let value = background_integral(s, c).map_err(|e| Error::Regime(format!("numeric regime: {e}")))?;
            Ok(ExpintTail { value, remainder_bound: 1e-13 * value.norm().max(1e-300), regime: ExpintRegime::Numeric })
        }
    }
}

/// `h(gamma, omega_tilde)` of the survival estimate.
pub fn bound_h(gamma: f64, wt: f64) -> f64 {
    let at = (2.0 * wt / gamma).atan();
    let s2 = (2.0 * at).sin();
    256.0 / (PI * gamma * gamma)
        * (7.0 * PI / 64.0 + 7.0 / 32.0 * at - s2.powi(3) / 12.0 + s2 / 4.0 - (4.0 * at).sin() / 16.0
            + (8.0 * at).sin() / 256.0)
}

/// `h1(s, gamma, omega_tilde)` of the survival estimate.
pub fn bound_h1(s: f64, gamma: f64, wt: f64) -> f64 {
    let at = (2.0 * wt / gamma).atan();
    2.0 * (PI / gamma * at
        + (gamma * (2.0 * wt * s).sin() - 2.0 * wt * (2.0 * wt * s).cos()) / (s * (wt * wt + gamma * gamma / 4.0)))
}

/// `(gamma^2/4)[h/(gamma^4 s^4) + e^{gamma s} h1]`, divided by pi^2 in
/// normalised mode.
pub fn survival_bound(s: f64, r: &ResonanceData) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::InvalidInput(format!("survival bound needs s < 0, got {s}")));
    }
    let g = r.gamma;
    let raw = g * g / 4.0 * (bound_h(g, r.omega_tilde) / (g.powi(4) * s.powi(4)) + (g * s).exp() * bound_h1(s, g, r.omega_tilde));
    Ok(match r.mode {
        PrefactorMode::PaperGammaOver2 => raw,
        PrefactorMode::NormalizedGammaOver2Pi => raw / (PI * PI),
    })
}

/// Squared norm of the resonance (pole) terms of `P_s rho11` over
/// `nu in R`, `0 <= E < omega_tilde`. The nu integral is done analytically.
pub fn resonance_component_norm2(s: f64, r: &ResonanceData) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::InvalidInput(format!("resonance component needs s < 0, got {s}")));
    }
    let b = 0.5 * r.gamma;
    let f = |a: f64| {
        let d = a * a + b * b;
        let osc = (I * Complex64::from_polar(1.0, 2.0 * s * a) / Complex64::new(a, b)).re;
        (2.0 * PI / b + 2.0 * PI * osc) / d
    };
    let wt = r.omega_tilde;
    let pts = quad::breakpoints(-wt, 0.0, &[-wt + 0.5 * wt, -20.0 * b, -5.0 * b, -b]);
    let v = quad::integrate_breaks(f, &pts, QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 20_000 })?;
    let c = r.prefactor();
    Ok(c * c * (r.gamma * s).exp() * v.value)
}
