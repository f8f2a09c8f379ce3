//! Energy-time uncertainty products for random pure states and for the
//! Friedrichs pole state.

use liouville::cli::{self, RunConfig};
use liouville::friedrichs;
use liouville::grid::Axis;
use liouville::timeop;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> liouville::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..5 {
        let (rho, d) = cli::random_pure_state(&mut rng)?;
        let u = timeop::uncertainty_check(&rho, &d)?;
        println!("state {k}: dE = {:.4}, dT = {:.4}, product {:.4}", u.delta_e, u.delta_t, u.product);
    }
    let res = RunConfig::default().resolve()?;
    let p = res.params.expect("default model has parameters");
    let rho = friedrichs::pole_state(&res.resonance, res.nu, res.e)?;
    let unit = rho.scaled(Complex64::new(1.0 / rho.norm(), 0.0));
    let d = friedrichs::f1_density(&p, Axis::half_offset(0.0, p.form_factor.cutoff, 20_000)?)?;
    let u = timeop::uncertainty_check_derivative(&unit, &d)?;
    println!("Friedrichs: dE = {:.4}, dT = {:.4}, product {:.4} >= {:.4}", u.delta_e, u.delta_t, u.product, u.bound);
    Ok(())
}
