//! Memories needed for 99% success on a 10-spin chain, and the resulting
//! decoding times for a 20 K coupling.

use conclusive_qst::experiments::{memory_budget_report, Experiment, RunConfig};

fn main() -> conclusive_qst::Result<()> {
    let config = RunConfig::defaults(Experiment::Example5);
    let (r, _, _) = memory_budget_report(&config)?;
    let j = r.memories.expect("target reached within the step cap");
    println!(
        "memories needed: {j} (cumulative success {:.5})",
        r.cumulative_eta
    );
    println!(
        "natural units: t_j = {:.3}, mean decode time = {:.3}, ratio 1/{:.1}",
        r.timing.full_decode_time,
        r.timing.mean_decode_time,
        1.0 / r.timing.ratio
    );
    println!(
        "J = {} K, {} units: t_j = {:.4} ns, mean = {:.4} ns",
        r.j_kelvin, r.convention, r.full_decode_time_ns, r.mean_decode_time_ns
    );
    println!(
        "J = {} K, {} units: t_j = {:.4} ns, mean = {:.4} ns",
        r.j_kelvin,
        r.alternate_convention,
        r.alternate_full_decode_time_ns,
        r.alternate_mean_decode_time_ns
    );
    Ok(())
}
