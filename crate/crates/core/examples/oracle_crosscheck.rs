//! Same protocol twice: through the reduced single-excitation engine and
//! gate by gate on the full qubit register.

use conclusive_qst::chain::DisorderModel;
use conclusive_qst::oracle::{engine_trace, equivalence_check, full_run};
use conclusive_qst::protocol::QubitState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> conclusive_qst::Result<()> {
    let spec = DisorderModel::new(1.0, 0.3, 11)?.sample(4)?;
    let taus = [1.9, 2.7, 1.1];
    let psi = QubitState::random(&mut ChaCha8Rng::seed_from_u64(5));

    let engine = engine_trace(psi, &spec, &taus, taus.len(), true)?;
    let full = full_run(psi, &spec, &taus, taus.len(), true)?;
    println!("couplings {:?}", spec.couplings());
    println!(
        "p_loss: engine {:.12}, register {:.12}",
        engine.p_loss, full.trace.p_loss
    );
    for (i, (a, b)) in engine.steps.iter().zip(&full.trace.steps).enumerate() {
        println!(
            "step {}: p_success {:.12} vs {:.12}",
            i + 1,
            a.p_success,
            b.p_success
        );
    }
    println!(
        "two-excitation weight during decode: {:?}",
        full.diagnostics.transient_two_excitation
    );
    let eq = equivalence_check(&engine, &full.trace, 1e-10);
    println!(
        "max deviation {:.2e}, passed {}",
        eq.max_deviation, eq.passed
    );
    Ok(())
}
