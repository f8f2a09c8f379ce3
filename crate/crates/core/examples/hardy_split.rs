//! Splits a Lorentzian-times-chirp line into its two Hardy components and
//! compares the spectral and principal-value Hilbert transforms.

use liouville::grid::Axis;
use liouville::hardy::{self, HilbertMethod, Line};
use num_complex::Complex64;

fn main() -> liouville::Result<()> {
    let axis = Axis::symmetric(40.0, 2048)?;
    let f = Line::sample(axis, |x| Complex64::from_polar(1.0 / (1.0 + x * x), 0.3 * x));

    let (plus, minus) = hardy::hardy_decompose(&f)?;
    println!("|f|^2 = {:.6}", f.norm2());
    println!("|f+|^2 + |f-|^2 = {:.6}", plus.norm2() + minus.norm2());
    println!("residual of f+ = {:.3e}", hardy::paley_wiener_residual(&plus)?);

    let spectral = hardy::hilbert(&f, HilbertMethod::spectral(4))?;
    let pv = hardy::hilbert(&f, HilbertMethod::pv())?;
    if let Some(w) = &spectral.leakage_warning {
        println!("warning: {w}");
    }
    let gap = spectral.line.sub(&pv.line).norm() / spectral.line.norm();
    println!("spectral vs PV Hilbert transform: relative L2 gap {gap:.3e}");
    Ok(())
}
