//! The spectral family of the time operator on a pole state: norms of P_s
//! for a range of cuts, idempotence, and both numeric routes.

use liouville::friedrichs::{self, PrefactorMode, ResonanceData};
use liouville::grid::{rel_l2, Axis};
use liouville::timeop::{self, ProjectionMethod};

fn main() -> liouville::Result<()> {
    let gamma = 0.2;
    let r = ResonanceData::new(1.0, gamma, PrefactorMode::NormalizedGammaOver2Pi)?;
    let nu = Axis::symmetric(64.0 * gamma, 2048)?;
    let e = Axis::half_offset(0.0, 1.0 + 40.0 * gamma, 128)?;
    let rho = friedrichs::pole_state(&r, nu, e)?;
    println!("tau_max = {:.3}, |rho|^2 = {:.6}", timeop::tau_max(&rho)?, rho.norm2());

    println!("{:>10} {:>10} {:>14} {:>12}", "s*gamma", "snapped", "|P_s rho|^2", "fft-hilbert");
    for k in [-20.0, -10.0, -5.0, -2.0, 0.0, 2.0, 5.0] {
        let fft = timeop::project(&rho, k / gamma, ProjectionMethod::FftTruncation)?;
        let hil = timeop::project(&rho, k / gamma, ProjectionMethod::HilbertForm)?;
        let gap = fft.state.sub(&hil.state)?.norm() / rho.norm();
        println!("{k:>10} {:>10.4} {:>14.6e} {gap:>12.2e}", fft.snap.s * gamma, fft.state.norm2());
    }

    let p = timeop::project(&rho, -3.0 / gamma, ProjectionMethod::FftTruncation)?.state;
    let pp = timeop::project(&p, -3.0 / gamma, ProjectionMethod::FftTruncation)?.state;
    println!("idempotence at s = -3/gamma: {:.2e}", rel_l2(&pp, &p)?);
    let q = timeop::q_project(&rho, 3.0 / gamma, ProjectionMethod::FftTruncation)?.state;
    println!("P_s + Q_-s = 1: {:.2e}", p.add(&q)?.sub(&rho)?.norm() / rho.norm());
    Ok(())
}
