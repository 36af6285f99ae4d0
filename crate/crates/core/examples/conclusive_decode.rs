//! One full protocol run: encode, transfer into memories, cool, then decode
//! step by step. Every successful branch hands Bob the exact input.

use conclusive_qst::chain::ChainSpec;
use conclusive_qst::protocol::{run_protocol, ProtocolOptions, QubitState};
use conclusive_qst::schedule::{greedy_optimize_schedule, SearchConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> conclusive_qst::Result<()> {
    let spec = ChainSpec::uniform(6, 1.0)?;
    let g = greedy_optimize_schedule(&spec, 8, &SearchConfig::default())?;
    let psi = QubitState::random(&mut ChaCha8Rng::seed_from_u64(3));
    println!("input: alpha = {:.4}, beta = {:.4}", psi.alpha, psi.beta);

    let run = run_protocol(
        psi,
        &spec.spectral()?,
        g.schedule.intervals(),
        ProtocolOptions::default(),
    )?;
    println!("cooling discarded probability {:.3e}\n", run.p_loss);
    println!("step      tau        eta   p(cond)   fidelity");
    for s in &run.decode.steps {
        println!(
            "{:>4} {:>8.4} {:>10.6} {:>9.6} {:>10}",
            s.step,
            s.tau,
            s.eta,
            s.p_conditional,
            s.fidelity_on_success
                .map_or("-".into(), |f| format!("{f:.12}"))
        );
    }
    println!(
        "\ncumulative success {:.6}, still undecoded {:.3e}",
        run.decode.cumulative_eta, run.decode.failure_probability
    );
    Ok(())
}
