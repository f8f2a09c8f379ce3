//! Globally adaptive Gauss-Kronrod (7/15) quadrature with breakpoints and
//! semi-infinite segments mapped onto [0, 1).

use crate::error::{Error, Result};
use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Finite,
    /// x = a + t/(1-t)
    Upper(f64),
    /// x = b - t/(1-t)
    Lower(f64),
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    map: Map,
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

fn eval<F: FnMut(f64) -> Complex64>(f: &mut F, map: Map, t: f64) -> Complex64 {
    match map {
        Map::Finite => f(t),
        Map::Upper(a) => {
            let u = 1.0 - t;
            f(a + t / u) / (u * u)
        }
        Map::Lower(b) => {
            let u = 1.0 - t;
            f(b - t / u) / (u * u)
        }
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, map: Map, lo: f64, hi: f64) -> (Complex64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = eval(f, map, c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = eval(f, map, c - dx) + eval(f, map, c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

/// Integrates a complex function over the union of consecutive segments
/// given by `points` (ascending; the first may be -inf, the last +inf).
pub fn integrate_c_breaks<F: FnMut(f64) -> Complex64>(
    mut f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<Complex64>> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("quadrature needs at least two points".into()));
    }
    let mut pieces: Vec<Piece> = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.is_nan() || b.is_nan() || a >= b {
            if a == b {
                continue;
            }
            return Err(Error::InvalidInput(format!("bad quadrature segment [{a}, {b}]")));
        }
        let (map, lo, hi) = match (a.is_finite(), b.is_finite()) {
            (true, true) => (Map::Finite, a, b),
            (true, false) => (Map::Upper(a), 0.0, 1.0),
            (false, true) => (Map::Lower(b), 0.0, 1.0),
            (false, false) => {
                return Err(Error::InvalidInput("split doubly infinite ranges at a breakpoint".into()))
            }
        };
        let (value, error) = gk15(&mut f, map, lo, hi);
        pieces.push(Piece { map, lo, hi, value, error });
    }
    loop {
        let total: Complex64 = crate::sum::sum_c(pieces.iter().map(|p| p.value));
        let err = crate::sum::sum(pieces.iter().map(|p| p.error));
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok(QuadResult { value: total, error: err, intervals: pieces.len() });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "interval cap {} reached, error estimate {err:.3e} on value {total:.6e}",
                opts.max_intervals
            )));
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            return Err(Error::Quadrature("interval collapsed below machine resolution".into()));
        }
        for (lo, hi) in [(p.lo, mid), (mid, p.hi)] {
            let (value, error) = gk15(&mut f, p.map, lo, hi);
            pieces.push(Piece { map: p.map, lo, hi, value, error });
        }
    }
}

pub fn integrate_c<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<Complex64>> {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        integrate_c_breaks(f, &[a, 0.0, b], opts)
    } else {
        integrate_c_breaks(f, &[a, b], opts)
    }
}

pub fn integrate_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult<f64>> {
    let r = integrate_c_breaks(|x| Complex64::new(f(x), 0.0), points, opts)?;
    Ok(QuadResult { value: r.value.re, error: r.error, intervals: r.intervals })
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<f64>> {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        integrate_breaks(f, &[a, 0.0, b], opts)
    } else {
        integrate_breaks(f, &[a, b], opts)
    }
}

/// Sorts, dedups and clips breakpoints to `[a, b]`, keeping the ends.
pub fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = interior.iter().copied().filter(|x| x.is_finite() && *x > a && *x < b).collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    pts
}
