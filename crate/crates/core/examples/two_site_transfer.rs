//! Two spins exchange an excitation perfectly at t = pi / (2J).

use conclusive_qst::chain::{propagator_amplitude, ChainSpec};
use std::f64::consts::FRAC_PI_2;

fn main() -> conclusive_qst::Result<()> {
    let spec = ChainSpec::uniform(2, 1.0)?;
    let sd = spec.spectral()?;
    println!("{:>8} {:>12}", "t", "|f_21(t)|^2");
    for i in 0..=8 {
        let t = i as f64 * FRAC_PI_2 / 4.0;
        let p = propagator_amplitude(&sd, 1, 0, t).norm_sqr();
        println!("{t:>8.4} {p:>12.9}");
    }
    Ok(())
}
