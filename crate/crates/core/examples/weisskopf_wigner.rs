//! The exponential decay law from a Lorentzian line against exp(-gamma t),
//! and its revivals at long times.

use liouville::friedrichs::{self, PrefactorMode, ResonanceData};
use liouville::survival;

fn main() -> liouville::Result<()> {
    let gamma = 0.05;
    let t_max = 20.0 / gamma;
    let r = ResonanceData::new(1.0, gamma, PrefactorMode::NormalizedGammaOver2Pi)?;
    let d = friedrichs::lorentzian_density(&r, survival::alias_free_axis(1.0 + 40.0 * gamma, t_max)?)?;
    let mut prev = f64::INFINITY;
    let mut rises = 0;
    for k in 0..=400 {
        let t = t_max * k as f64 / 400.0;
        let ww = survival::ww_survival(&d, t)?;
        if ww > prev {
            rises += 1;
        }
        prev = ww;
        if k % 40 == 0 {
            println!("t*gamma = {:>5.1}  ww = {ww:.6e}  exp = {:.6e}", t * gamma, (-gamma * t).exp());
        }
    }
    println!("ww increases between samples: {rises}");
    Ok(())
}
