//! Scaled complex exponential integral `e^z E1(z)` on the principal branch
//! (cut along the negative real axis).

use crate::error::{Error, Result};
use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E1Route {
    Series,
    ContinuedFraction,
    Asymptotic,
}

/// Which evaluation route `exp_e1` takes for `z`.
pub fn e1_route(z: Complex64) -> E1Route {
    let r = z.norm();
    if r <= 2.0 {
        E1Route::Series
    } else if r > 40.0 {
        E1Route::Asymptotic
    } else if z.re >= 0.0 || z.im.abs() >= 0.3 * r {
        E1Route::ContinuedFraction
    } else {
        E1Route::Series
    }
}

/// `e^z E1(z)`. Fails on the branch cut `z <= 0`.
pub fn exp_e1(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Regime(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Regime(format!("argument {z} lies on the branch cut of E1")));
    }
    match e1_route(z) {
        E1Route::Series => Ok(z.exp() * e1_series(z)),
        E1Route::ContinuedFraction => cf(z),
        E1Route::Asymptotic => asymptotic(z),
    }
}

/// Boundary value `e^x E1(x +- i0)` on the cut `x < 0`, from above when
/// `above` is set.
pub fn exp_e1_boundary(x: f64, above: bool) -> Result<Complex64> {
    if !(x < 0.0) || !x.is_finite() {
        return Err(Error::Regime(format!("boundary value needs a finite x < 0, got {x}")));
    }
    let z = Complex64::new(x, if above { 0.0 } else { -0.0 });
    // ln and signum both honour the signed zero, so the side carries through.
    match e1_route(z) {
        E1Route::Asymptotic => asymptotic(z),
        _ => Ok(z.exp() * e1_series(z)),
    }
}

fn e1_series(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..400 {
        term *= -z / k as f64;
        let add = term / k as f64;
        acc += add;
        if add.norm() <= 1e-17 * acc.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - acc
}

fn cf(z: Complex64) -> Result<Complex64> {
    // U(z) = 1/(z+1 - 1/(z+3 - 4/(z+5 - ...))), modified Lentz.
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z + 1.0;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..50_000 {
        let a = -((k * k) as f64);
        let b = z + (2 * k + 1) as f64;
        d = b + d * a;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(1.0 / f);
        }
    }
    Err(Error::Regime(format!("continued fraction for E1({z}) did not converge")))
}

fn asymptotic(z: Complex64) -> Result<Complex64> {
    let mut term = 1.0 / z;
    let mut acc = term;
    let mut last = term.norm();
    for k in 1..200 {
        let next = term * (-(k as f64)) / z;
        let m = next.norm();
        if m > last {
            break;
        }
        acc += next;
        term = next;
        last = m;
        if m <= 1e-17 * acc.norm() {
            break;
        }
    }
    if z.re < 0.0 && z.im.abs() < 0.3 * z.norm() {
        // Exponentially small Stokes contribution across the negative axis.
        acc -= Complex64::new(0.0, std::f64::consts::PI * z.im.signum()) * z.exp();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (Re z, Im z, Re e^z E1(z), Im e^z E1(z)) frozen from a 30-digit reference.
    const REF: &[(f64, f64, f64, f64)] = &[
        (0.5, 0.0, 0.9229106324837305, 0.0),
        (1.0, 1.0, 0.4105925434691225, -0.26272868271130173),
        (-1.0, 0.5, -0.284562287896677, -0.9241156630063309),
        (-1.0, -0.5, -0.284562287896677, 0.9241156630063309),
        (0.0, 3.0, 0.07922152116436404, -0.29195771069207876),
        (0.0, -3.0, 0.07922152116436404, 0.29195771069207876),
        (10.0, 0.0, 0.09156333393978808, 0.0),
        (-10.0, 1.0, -0.11147602721575293, -0.013035448428732499),
        (-10.0, -0.1, -0.11311704860091923, 0.0014564264423168037),
        (-45.0, 2.0, -0.02269258917839723, -0.0010326278566187338),
        (-60.0, 0.5, -0.01695298098884456, -0.00014375651708762658),
        (-5.0, 40.0, -0.0024714504240197525, -0.024737547261859963),
        (20.0, -30.0, 0.015641133556599504, 0.022377216078462322),
        (0.01, 0.01, 3.7361256754958996, -0.7459180963011361),
        (-1.5, 0.001, -0.7359155542522173, -0.701053671270089),
        (0.0, 100.0, 9.99401194995895e-05, -0.009998002392839963),
        (-0.002, 1.9, 0.15488585357432225, -0.4142230434262647),
        (-80.0, -1.0, -0.012658280602783203, 0.00016028484082206647),
        (2.5, 0.0, 0.3035258364859841, 0.0),
        (-30.0, 25.0, -0.019771206365188317, -0.017068478468445752),
        (-38.0, 12.3, -0.02434733377434208, -0.008105351676807674),
        (-3.0, 0.95, -0.3417474727021222, -0.2464047107175967),
        (-39.0, 0.2, -0.026334371634051692, -0.0001388117922359224),
        (-41.0, 1.0, -0.025000827243233544, -0.0006258698313566165),
        (-12.0, 3.7, -0.08203241267599802, -0.02817000406769561),
        (-30.0, -8.9, -0.031537884716779936, 0.009702227344945545),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, y, ur, ui) in REF {
            let z = Complex64::new(x, y);
            let want = Complex64::new(ur, ui);
            let got = exp_e1(z).unwrap();
            let rel = (got - want).norm() / want.norm();
            assert!(rel < 1e-12, "z={z}: got {got}, want {want}, rel {rel:e}, route {:?}", e1_route(z));
        }
    }

    #[test]
    fn rejects_branch_cut() {
        assert!(exp_e1(Complex64::new(-3.0, 0.0)).is_err());
        assert!(exp_e1(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn boundary_values_are_side_limits() {
        for x in [-0.5, -3.0, -25.0, -60.0] {
            for above in [true, false] {
                let y = if above { 1e-9 } else { -1e-9 };
                let near = exp_e1(Complex64::new(x, y)).unwrap();
                let on = exp_e1_boundary(x, above).unwrap();
                assert!((near - on).norm() < 1e-7 * on.norm(), "x={x}, above={above}: {on} vs {near}");
            }
        }
        assert!(exp_e1_boundary(1.0, true).is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        for &(x, y) in &[(-7.0, 2.0), (3.0, 5.0), (-50.0, 3.0), (1.0, 0.3)] {
            let a = exp_e1(Complex64::new(x, y)).unwrap();
            let b = exp_e1(Complex64::new(x, -y)).unwrap();
            assert!((a - b.conj()).norm() < 1e-15 * a.norm().max(1.0));
        }
    }
}
