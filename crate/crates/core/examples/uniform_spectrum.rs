//! Closed-form spectrum of a uniform chain against the numerical eigensolver,
//! and the end-to-end arrival probability over time.
//!
//! cargo run --example uniform_spectrum -- 10

use conclusive_qst::chain::{
    spectral_decompose, uniform_end_to_end_amplitude, ChainSpec, SpectralData,
};

fn main() -> conclusive_qst::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map_or(10, |s| s.parse().expect("chain length"));
    let exact = SpectralData::uniform(n, 1.0);
    let numeric = spectral_decompose(&ChainSpec::uniform(n, 1.0)?.hamiltonian())?;
    println!("k  closed form    numerical");
    for (k, (a, b)) in exact
        .eigenvalues()
        .iter()
        .zip(numeric.eigenvalues())
        .enumerate()
    {
        println!("{:<2} {a:>12.9} {b:>12.9}", k + 1);
    }

    let mut best = (0.0, 0.0);
    for i in 1..=4000 {
        let t = i as f64 * 0.005;
        let p = uniform_end_to_end_amplitude(n, 1.0, t).norm_sqr();
        if p > best.1 {
            best = (t, p);
        }
    }
    println!(
        "\nbest single-shot arrival for t <= 20: {:.6} at t = {:.3}",
        best.1, best.0
    );
    Ok(())
}
