//! Closed-form projection of the pole state against the numeric one, and
//! the limit s -> 0-.

use liouville::friedrichs::{self, PrefactorMode, ResonanceData};
use liouville::grid::{rel_l2, Axis};
use liouville::timeop::{self, ProjectionMethod};

fn main() -> liouville::Result<()> {
    let gamma = 0.2;
    let r = ResonanceData::new(1.0, gamma, PrefactorMode::NormalizedGammaOver2Pi)?;
    let nu = Axis::symmetric(64.0 * gamma, 4096)?;
    let e = Axis::half_offset(0.0, 1.0 + 40.0 * gamma, 64)?;
    let rho = friedrichs::pole_state(&r, nu, e)?;
    for k in [0.0, -2.0, -5.0, -10.0] {
        let numeric = timeop::project(&rho, k / gamma, ProjectionMethod::FftTruncation)?;
        let closed = friedrichs::closed_field(numeric.snap.s, &r, nu, e)?;
        println!("s = {k:>5}/gamma: relative L2 gap {:.3e}", rel_l2(&numeric.state, &closed)?);
    }
    for (nu, e) in [(0.3, 1.0), (-0.3, 0.5), (2.0, 3.0)] {
        let zero = friedrichs::project_zero_closed(nu, e, &r);
        let near = friedrichs::project_pole_closed(-1e-4 / gamma, nu, e, &r)?;
        println!("nu {nu:>4}, E {e}: s=0 {zero:.6}, s=-1e-4/gamma {near:.6}");
    }
    Ok(())
}
