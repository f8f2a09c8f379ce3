//! Asymptotic series of the background integral against adaptive quadrature.

use liouville::friedrichs::{self, ExpintRegime};
use liouville::oracle;
use num_complex::Complex64;

fn main() -> liouville::Result<()> {
    let c = Complex64::new(-1.0, -0.1);
    println!("{:>6} {:>2} {:>12} {:>12}", "s", "n", "error", "bound");
    for s in [-10.0, -20.0, -50.0, -100.0] {
        let reference = oracle::quad_expint(s, c)?;
        for n in [1, 3, 5] {
            let tail = friedrichs::expint_tail(s, c, n, ExpintRegime::Asymptotic)?;
            println!("{s:>6} {n:>2} {:>12.3e} {:>12.3e}", (tail.value - reference).norm(), tail.remainder_bound);
        }
    }
    let auto = friedrichs::expint_tail(-2.0, c, 3, ExpintRegime::Auto)?;
    println!("s = -2 with Auto uses {:?}: {:.6}", auto.regime, auto.value);
    Ok(())
}
