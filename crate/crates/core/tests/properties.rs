mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use conclusive_qst::chain::{spectral_decompose, ChainSpec, SpectralData};
use conclusive_qst::protocol::{
    init_state, run_protocol, transfer_run, ProtocolOptions, QubitState, SwitchConfig, Topology,
};

fn chain() -> impl Strategy<Value = ChainSpec> {
    (2usize..9).prop_flat_map(|n| {
        (
            prop::collection::vec(0.3f64..2.0, n - 1),
            prop::collection::vec(-0.5f64..0.5, n),
        )
            .prop_map(|(j, b)| ChainSpec::with_fields(j, b).unwrap())
    })
}

fn intervals(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..8.0, 1..=max)
}

fn qubit() -> impl Strategy<Value = QubitState> {
    (-1.0f64..=1.0, 0.0..std::f64::consts::TAU).prop_map(|(c, phi)| {
        let half = c.acos() / 2.0;
        QubitState::new(
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), phi),
        )
        .unwrap()
    })
}

fn transferred(psi: QubitState, sd: &SpectralData, taus: &[f64]) -> Vec<Complex64> {
    let mut st = init_state(psi, Topology::new(sd.dim(), taus.len()).unwrap()).unwrap();
    st.encode_cnot().unwrap();
    st.set_switch(SwitchConfig::A2Connected);
    transfer_run(&mut st, sd, taus).unwrap();
    st.amplitudes()
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).camax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_unitary(spec in chain(), t in -20.0f64..20.0) {
        let u = spec.spectral().unwrap().propagator(t);
        let n = spec.len();
        prop_assert!(max_diff(&(&u * u.adjoint()), &DMatrix::identity(n, n)) < 1e-12);
    }

    #[test]
    fn backward_evolution_inverts(spec in chain(), t in 0.0f64..20.0) {
        let sd = spec.spectral().unwrap();
        prop_assert!(max_diff(&sd.propagator(-t), &sd.propagator(t).adjoint()) < 1e-12);
        // real Hamiltonian: f(-t) = conj f(t)
        prop_assert!(max_diff(&sd.propagator(-t), &sd.propagator(t).map(|c| c.conj())) < 1e-12);
    }

    #[test]
    fn amplitudes_are_symmetric(spec in chain(), t in 0.0f64..20.0) {
        let u = spec.spectral().unwrap().propagator(t);
        prop_assert!(max_diff(&u, &u.transpose()) < 1e-12);
    }

    #[test]
    fn mirror_symmetric_chain(half in prop::collection::vec(0.3f64..2.0, 1..5), t in 0.0f64..15.0) {
        let mut j = half.clone();
        j.extend(half.iter().rev());
        let spec = ChainSpec::new(j).unwrap();
        let u = spec.spectral().unwrap().propagator(t);
        let n = spec.len();
        for m in 0..n {
            for k in 0..n {
                prop_assert!((u[(m, k)] - u[(n - 1 - m, n - 1 - k)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coupling_signs_do_not_change_probabilities(
        spec in chain(),
        flips in prop::collection::vec(any::<bool>(), 8),
        t in 0.0f64..15.0,
    ) {
        let mut h = spec.hamiltonian();
        for (i, &f) in flips.iter().take(spec.len() - 1).enumerate() {
            if f {
                h[(i, i + 1)] = -h[(i, i + 1)];
                h[(i + 1, i)] = -h[(i + 1, i)];
            }
        }
        let a = spec.spectral().unwrap().propagator(t);
        let b = spectral_decompose(&h).unwrap().propagator(t);
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_rescales_time(spec in chain(), s in 0.2f64..5.0, t in 0.0f64..10.0) {
        let a = spec.spectral().unwrap().propagator(t);
        let b = spec.scaled(s).unwrap().spectral().unwrap().propagator(t / s);
        prop_assert!(max_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn uniform_closed_form_matches_numeric(n in 2usize..40, j in 0.2f64..3.0, t in 0.0f64..30.0) {
        let exact = SpectralData::uniform(n, j).propagator(t);
        let h = ChainSpec::uniform(n, j).unwrap().hamiltonian();
        let numeric = spectral_decompose(&h).unwrap().propagator(t);
        prop_assert!(max_diff(&exact, &numeric) < 1e-11);
    }

    #[test]
    fn transfer_is_linear_and_norm_preserving(spec in chain(), taus in intervals(5), psi in qubit()) {
        let sd = spec.spectral().unwrap();
        let out = transferred(psi, &sd, &taus);
        let one = transferred(QubitState::excited(), &sd, &taus);
        let zero = transferred(QubitState::ground(), &sd, &taus);
        for ((o, a), b) in out.iter().zip(&one).zip(&zero) {
            prop_assert!((o - (psi.alpha * a + psi.beta * b)).norm() < 1e-12);
        }
        let norm: f64 = out.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn success_is_input_independent_and_conclusive(
        spec in chain(),
        taus in intervals(6),
        a in qubit(),
        b in qubit(),
    ) {
        let sd = spec.spectral().unwrap();
        let ra = run_protocol(a, &sd, &taus, ProtocolOptions::default()).unwrap();
        let rb = run_protocol(b, &sd, &taus, ProtocolOptions::default()).unwrap();
        for (x, y) in ra.decode.steps.iter().zip(&rb.decode.steps) {
            prop_assert!((x.eta - y.eta).abs() < 1e-12);
            if let Some(f) = x.fidelity_on_success {
                prop_assert!((1.0 - f).abs() < 1e-9);
            }
        }
        let total = ra.decode.cumulative_eta + ra.decode.failure_probability + ra.p_loss;
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(ra.decode.etas().iter().all(|&e| (0.0..=1.0 + 1e-12).contains(&e)));
    }
}
