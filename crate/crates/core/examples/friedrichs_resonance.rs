//! Locates the resonance of the flat-cutoff Friedrichs model and tunes the
//! coupling scale to a requested width.

use liouville::friedrichs::{self, FriedrichsParams, PrefactorMode};

fn main() -> liouville::Result<()> {
    for &gamma in &[0.05, 0.1, 0.2] {
        let p = FriedrichsParams::flat_for_gamma(1.0, 0.1, 20.0, gamma)?;
        let r = friedrichs::find_resonance(&p, PrefactorMode::NormalizedGammaOver2Pi)?;
        let eta = friedrichs::eta_plus(r.omega_tilde, &p)?;
        println!(
            "gamma request {gamma:<5} -> omega_tilde {:.6}, gamma {:.6}, Re eta+ at omega_tilde {:.2e}",
            r.omega_tilde, r.gamma, eta.re
        );
    }
    let p = FriedrichsParams::flat_for_gamma(1.0, 0.1, 20.0, 0.2)?;
    for w in [0.25, 0.5, 1.0, 5.0, 19.0] {
        let eta = friedrichs::eta_plus(w, &p)?;
        println!("eta+({w:>4}) = {:+.6} {:+.6}i", eta.re, eta.im);
    }
    Ok(())
}
