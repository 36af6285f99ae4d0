//! Probability removed by cooling against the number of memories, and what
//! happens to the decoded state if the chain is not cooled.

use conclusive_qst::chain::ChainSpec;
use conclusive_qst::protocol::{run_protocol, ProtocolOptions, QubitState};
use conclusive_qst::schedule::{greedy_optimize_schedule, SearchConfig};

fn main() -> conclusive_qst::Result<()> {
    let spec = ChainSpec::uniform(10, 1.0)?;
    let sd = spec.spectral()?;
    let g = greedy_optimize_schedule(&spec, 20, &SearchConfig::default())?;
    let psi = QubitState::normalized(1.0.into(), 1.0.into()).expect("nonzero");

    println!("memories   p_loss   min fidelity (cooled)   min fidelity (not cooled)");
    for j in [1, 5, 10, 15, 20] {
        let taus = g.schedule.truncated(j);
        let cooled = run_protocol(
            psi,
            &sd,
            taus.intervals(),
            ProtocolOptions { cooling: true },
        )?;
        let raw = run_protocol(
            psi,
            &sd,
            taus.intervals(),
            ProtocolOptions { cooling: false },
        )?;
        println!(
            "{j:>8} {:>8.5} {:>23.12} {:>27.12}",
            cooled.p_loss,
            cooled.decode.min_fidelity().unwrap_or(f64::NAN),
            raw.decode.min_fidelity().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
