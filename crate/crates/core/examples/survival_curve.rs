//! Survival curve of the prepared pole state, its tail fit and the bound
//! diagnostic. Writes curve.csv to the directory given as the first argument.

use std::io::BufWriter;

use liouville::friedrichs::{PrefactorMode, ResonanceData};
use liouville::grid::Axis;
use liouville::survival::{self, CurveOptions, CurveSource};

fn main() -> liouville::Result<()> {
    let gamma = 0.2;
    let r = ResonanceData::new(1.0, gamma, PrefactorMode::NormalizedGammaOver2Pi)?;
    let nu = Axis::symmetric(64.0 * gamma, 4096)?;
    let e = Axis::half_offset(0.0, 1.0 + 40.0 * gamma, 512)?;
    let t = survival::time_axis(0.0, 50.0 / gamma, 2000)?;
    let curve = survival::decay_curve(CurveSource::Pole { resonance: r, nu, e }, t, &CurveOptions::default())?;

    for i in (0..curve.len()).step_by(250) {
        println!("t = {:>7.2}  p = {:.6e}  q = {:.9}", curve.t[i], curve.p[i], curve.q[i]);
    }
    println!("monotonicity violations: {}", survival::monotonicity_violations(&curve.p, 1e-9));
    let fit = survival::tail_analysis(&curve, (10.0 / gamma, 40.0 / gamma))?;
    println!("tail: {fit:?}");
    let bound = survival::bound_check(&curve)?;
    println!("bound: {} of {} points above, max ratio {:.3}", bound.violations.len(), bound.checked, bound.max_ratio);

    if let Some(dir) = std::env::args().nth(1) {
        let path = std::path::Path::new(&dir).join("curve.csv");
        curve.write_csv(&mut BufWriter::new(std::fs::File::create(&path)?))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
