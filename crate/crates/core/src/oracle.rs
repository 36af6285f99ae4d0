//! Dense state-vector reference simulator.
//!
//! Runs the protocol gate by gate on the full `2^m` register with no use of
//! the single-excitation reduction: the chain Hamiltonian is assembled from
//! Pauli matrices, evolution is a full matrix exponential, and swaps, CNOTs and
//! measurements are explicit. It exists to certify [`crate::protocol`] on small
//! systems.
//!
//! Qubit ordering is `(A1, chain sites 0..N-1, M_0..M_{k-1})`, so qubit `1` is
//! A2 and qubit `N` is Bob. Qubit 0 is the most significant bit of a basis
//! index. `|0>` is spin down and `sz |0> = -|0>`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, SpectralData};
use crate::error::{QstError, Result};
use crate::protocol::{
    init_state, transfer_run, QubitState, SwitchConfig, SystemState, Topology, NULL_BRANCH,
};

/// Largest register the oracle will simulate.
pub const MAX_QUBITS: usize = 14;

/// Below this conditional success probability the conditional Bob state is
/// numerically meaningless and is left out of comparisons.
pub const MIN_COMPARED_PROBABILITY: f64 = 1e-8;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// 2x2 density matrix in the basis `(|0>, |1>)`, row-major.
pub type Rho = [C; 4];

fn pauli_x() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

fn pauli_y() -> DMatrix<C> {
    let i = C::new(0.0, 1.0);
    DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
}

fn pauli_z() -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
}

/// `ops` placed on the listed sites of an `n`-qubit register, identity elsewhere.
fn embed(n: usize, ops: &[(usize, &DMatrix<C>)]) -> DMatrix<C> {
    let id = DMatrix::<C>::identity(2, 2);
    let mut out = DMatrix::<C>::identity(1, 1);
    for site in 0..n {
        let op = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, m)| *m)
            .unwrap_or(&id);
        out = out.kronecker(op);
    }
    out
}

/// `sum_i (J_i / 2)(sx sx + sy sy) + sum_n B_n (sz_n + 1)` on `N` qubits.
pub fn many_body_hamiltonian(spec: &ChainSpec) -> DMatrix<C> {
    let n = spec.len();
    let dim = 1 << n;
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let mut h = DMatrix::<C>::zeros(dim, dim);
    for (i, &j) in spec.couplings().iter().enumerate() {
        let xx = embed(n, &[(i, &x), (i + 1, &x)]);
        let yy = embed(n, &[(i, &y), (i + 1, &y)]);
        h += (xx + yy) * C::new(j / 2.0, 0.0);
    }
    for (i, &b) in spec.fields().iter().enumerate() {
        if b != 0.0 {
            let zi = embed(n, &[(i, &z)]) + DMatrix::<C>::identity(dim, dim);
            h += zi * C::new(b, 0.0);
        }
    }
    h
}

/// Largest matrix element connecting basis states with different numbers of up spins.
pub fn excitation_block_leakage(h: &DMatrix<C>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..h.nrows() {
        for c in 0..h.ncols() {
            if (r as u32).count_ones() != (c as u32).count_ones() {
                worst = worst.max(h[(r, c)].norm());
            }
        }
    }
    worst
}

/// `exp(-i H t)` for the chain, via a dense Hermitian eigendecomposition.
struct ChainPropagator {
    energies: Vec<f64>,
    vectors: DMatrix<C>,
}

impl ChainPropagator {
    fn new(spec: &ChainSpec) -> Result<Self> {
        let h = many_body_hamiltonian(spec);
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 100_000)
            .ok_or_else(|| QstError::Eigensolver("many-body Hamiltonian".into()))?;
        Ok(Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    fn unitary(&self, t: f64) -> DMatrix<C> {
        let phases: Vec<C> = self
            .energies
            .iter()
            .map(|&e| C::from_polar(1.0, -e * t))
            .collect();
        let mut scaled = self.vectors.clone();
        for (k, p) in phases.iter().enumerate() {
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= p;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Full register state with the probability of the measurement record behind it.
#[derive(Debug, Clone)]
pub struct FullState {
    qubits: usize,
    amps: Vec<C>,
    weight: f64,
}

impl FullState {
    fn zero(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(QstError::OracleTooLarge(qubits, MAX_QUBITS));
        }
        let mut amps = vec![ZERO; 1 << qubits];
        amps[0] = ONE;
        Ok(Self {
            qubits,
            amps,
            weight: 1.0,
        })
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.qubits - 1 - q)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` (a `2^t x 2^t` matrix) to `targets`, first target most significant.
    fn apply(&mut self, targets: &[usize], gate: &DMatrix<C>) {
        let t = targets.len();
        debug_assert_eq!(gate.nrows(), 1 << t);
        let masks: Vec<usize> = targets.iter().map(|&q| self.bit(q)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..1usize << t)
            .map(|local| {
                (0..t)
                    .filter(|&b| local & (1 << (t - 1 - b)) != 0)
                    .map(|b| masks[b])
                    .sum()
            })
            .collect();
        let mut buf = vec![ZERO; 1 << t];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                self.amps[base + off] = (0..buf.len()).map(|c| gate[(r, c)] * buf[c]).sum();
            }
        }
    }

    /// Keeps the components selected by `keep`; returns the kept squared norm.
    fn project<F: Fn(usize) -> bool>(&mut self, keep: F) -> f64 {
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if !keep(idx) {
                *a = ZERO;
            }
        }
        self.norm_sqr()
    }

    fn renormalize(&mut self) {
        let s = 1.0 / self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    /// Reduced density matrix of qubit `q`.
    fn reduced(&self, q: usize) -> Rho {
        let mask = self.bit(q);
        let mut rho = [ZERO; 4];
        for (idx, a) in self.amps.iter().enumerate() {
            if idx & mask != 0 {
                continue;
            }
            let zero = *a;
            let one = self.amps[idx | mask];
            rho[0] += zero * zero.conj();
            rho[1] += zero * one.conj();
            rho[2] += one * zero.conj();
            rho[3] += one * one.conj();
        }
        let tr = (rho[0] + rho[3]).re;
        rho.map(|x| x / tr)
    }

    /// Squared weight on basis states with exactly `count` up spins.
    fn excitation_weight(&self, count: u32) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as u32).count_ones() == count)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn max_excitations(&self) -> u32 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > NULL_BRANCH)
            .map(|(i, _)| (i as u32).count_ones())
            .max()
            .unwrap_or(0)
    }
}

/// `|q><q|` for a qubit state `alpha |1> + beta |0>`.
pub fn qubit_rho(q: &QubitState) -> Rho {
    let v = [q.beta, q.alpha];
    [
        v[0] * v[0].conj(),
        v[0] * v[1].conj(),
        v[1] * v[0].conj(),
        v[1] * v[1].conj(),
    ]
}

/// One decode measurement as seen along the all-failures branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Absolute success probability.
    pub p_success: f64,
    pub p_conditional: f64,
    /// Bob's state given success, when `p_conditional >= MIN_COMPARED_PROBABILITY`.
    pub bob_rho: Option<Rho>,
}

/// Branch probabilities and conditional states of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub p_loss: f64,
    pub steps: Vec<TraceStep>,
}

/// Extra observations only the dense simulator can make.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDiagnostics {
    /// Two-excitation weight right after each decode CNOT.
    pub transient_two_excitation: Vec<f64>,
    /// Largest number of up spins in each post-failure state.
    pub failure_max_excitations: Vec<u32>,
    /// Largest deviation of any intermediate norm from one.
    pub max_norm_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTrace {
    pub trace: ProtocolTrace,
    pub diagnostics: OracleDiagnostics,
}

/// Executes encode, transfer, optional cooling and `decode_steps` decode
/// measurements literally on the full register. Decoding replays `intervals`.
pub fn full_run(
    psi: QubitState,
    spec: &ChainSpec,
    intervals: &[f64],
    decode_steps: usize,
    cooling: bool,
) -> Result<OracleTrace> {
    let n = spec.len();
    let k = intervals.len().max(decode_steps).max(1);
    if decode_steps > intervals.len() {
        return Err(QstError::InvalidSchedule(format!(
            "{decode_steps} decode steps requested but only {} intervals",
            intervals.len()
        )));
    }
    let qubits = 1 + n + k;
    let mut st = FullState::zero(qubits)?;
    let psi = QubitState::new(psi.alpha, psi.beta)?;
    let prop = ChainPropagator::new(spec)?;
    let mut max_norm_error = 0.0f64;
    let mut track = |s: &FullState| max_norm_error = max_norm_error.max((s.norm_sqr() - 1.0).abs());

    let bob = n;
    let memory = |l: usize| n + 1 + l;
    let a2_chain: Vec<usize> = (1..=n).collect();
    let a1_chain: Vec<usize> = std::iter::once(0).chain(2..=n).collect();

    // prepare A1 = alpha|1> + beta|0>
    let prep = DMatrix::from_row_slice(
        2,
        2,
        &[psi.beta, -psi.alpha.conj(), psi.alpha, psi.beta.conj()],
    );
    st.apply(&[0], &prep);
    track(&st);

    // X on A2 when A1 is |0>
    let mut enc = DMatrix::<C>::zeros(4, 4);
    enc[(0, 1)] = ONE;
    enc[(1, 0)] = ONE;
    enc[(2, 2)] = ONE;
    enc[(3, 3)] = ONE;
    st.apply(&[0, 1], &enc);
    track(&st);

    let mut swap = DMatrix::<C>::zeros(4, 4);
    swap[(0, 0)] = ONE;
    swap[(1, 2)] = ONE;
    swap[(2, 1)] = ONE;
    swap[(3, 3)] = ONE;

    for (l, &tau) in intervals.iter().enumerate() {
        st.apply(&a2_chain, &prop.unitary(tau));
        track(&st);
        st.apply(&[bob, memory(l)], &swap);
        track(&st);
    }

    let mut p_loss = 0.0;
    if cooling {
        let chain_mask: usize = a2_chain.iter().map(|&q| st.bit(q)).sum();
        let kept = st.project(|idx| idx & chain_mask == 0);
        if kept <= NULL_BRANCH {
            return Err(QstError::ProtocolOrder(
                "cooling leaves no surviving amplitude".into(),
            ));
        }
        p_loss = 1.0 - kept;
        st.renormalize();
        st.weight *= kept;
        track(&st);
    }

    // X on the memory when Bob is |1>
    let mut dec = DMatrix::<C>::zeros(4, 4);
    dec[(0, 0)] = ONE;
    dec[(1, 1)] = ONE;
    dec[(2, 3)] = ONE;
    dec[(3, 2)] = ONE;

    let mut steps = Vec::with_capacity(decode_steps);
    let mut transient = Vec::with_capacity(decode_steps);
    let mut failure_max = Vec::with_capacity(decode_steps);
    let mut alive = true;
    for (l, &tau) in intervals.iter().take(decode_steps).enumerate() {
        if !alive {
            steps.push(TraceStep {
                p_success: 0.0,
                p_conditional: 0.0,
                bob_rho: None,
            });
            transient.push(0.0);
            failure_max.push(0);
            continue;
        }
        st.apply(&a1_chain, &prop.unitary(tau));
        track(&st);
        st.apply(&[bob, memory(l)], &dec);
        track(&st);
        transient.push(st.excitation_weight(2));

        let mbit = st.bit(memory(l));
        let mut success = st.clone();
        let p1 = success.project(|idx| idx & mbit != 0).clamp(0.0, 1.0);
        let bob_rho = (p1 >= MIN_COMPARED_PROBABILITY).then(|| {
            success.renormalize();
            success.reduced(bob)
        });
        steps.push(TraceStep {
            p_success: st.weight * p1,
            p_conditional: p1,
            bob_rho,
        });

        let p0 = st.project(|idx| idx & mbit == 0);
        if st.weight * p0 > NULL_BRANCH {
            st.renormalize();
            st.weight *= p0;
            track(&st);
            failure_max.push(st.max_excitations());
        } else {
            alive = false;
            failure_max.push(0);
        }
    }

    Ok(OracleTrace {
        trace: ProtocolTrace { p_loss, steps },
        diagnostics: OracleDiagnostics {
            transient_two_excitation: transient,
            failure_max_excitations: failure_max,
            max_norm_error,
        },
    })
}

/// The same run through the reduced engine, in trace form.
pub fn engine_trace(
    psi: QubitState,
    spec: &ChainSpec,
    intervals: &[f64],
    decode_steps: usize,
    cooling: bool,
) -> Result<ProtocolTrace> {
    let sd = spec.spectral()?;
    let k = intervals.len().max(decode_steps).max(1);
    let mut state = init_state(psi, Topology::new(spec.len(), k)?)?;
    state.encode_cnot()?;
    state.set_switch(SwitchConfig::A2Connected);
    transfer_run(&mut state, &sd, intervals)?;
    state.set_switch(SwitchConfig::Disconnected);
    let p_loss = if cooling { state.cool_chain()? } else { 0.0 };
    state.set_switch(SwitchConfig::A1Connected);
    Ok(ProtocolTrace {
        p_loss,
        steps: engine_decode_steps(&state, &sd, &intervals[..decode_steps])?,
    })
}

fn engine_decode_steps(
    state: &SystemState,
    sd: &SpectralData,
    intervals: &[f64],
) -> Result<Vec<TraceStep>> {
    let mut current = Some(state.clone());
    let mut steps = Vec::with_capacity(intervals.len());
    for (l, &tau) in intervals.iter().enumerate() {
        let Some(st) = current.take() else {
            steps.push(TraceStep {
                p_success: 0.0,
                p_conditional: 0.0,
                bob_rho: None,
            });
            continue;
        };
        let out = st.decode_step(sd, l, tau)?;
        let bob_rho = out
            .bob_on_success
            .filter(|_| out.p_conditional >= MIN_COMPARED_PROBABILITY)
            .map(|b| qubit_rho(&b));
        steps.push(TraceStep {
            p_success: out.p_success,
            p_conditional: out.p_conditional,
            bob_rho,
        });
        current = out.failure_state;
    }
    Ok(steps)
}

/// Outcome of comparing two traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub passed: bool,
    pub max_deviation: f64,
    /// Where the largest deviation occurred.
    pub location: String,
}

/// Compares every branch probability and conditional Bob state.
pub fn equivalence_check(engine: &ProtocolTrace, oracle: &ProtocolTrace, tol: f64) -> Equivalence {
    let mut worst = (0.0f64, String::from("none"));
    let mut note = |dev: f64, loc: String| {
        if dev > worst.0 || dev.is_nan() {
            worst = (if dev.is_nan() { f64::INFINITY } else { dev }, loc);
        }
    };
    note((engine.p_loss - oracle.p_loss).abs(), "p_loss".into());
    if engine.steps.len() != oracle.steps.len() {
        note(
            f64::INFINITY,
            format!(
                "step count {} vs {}",
                engine.steps.len(),
                oracle.steps.len()
            ),
        );
    }
    for (i, (e, o)) in engine.steps.iter().zip(&oracle.steps).enumerate() {
        let step = i + 1;
        note(
            (e.p_success - o.p_success).abs(),
            format!("step {step} p_success"),
        );
        note(
            (e.p_conditional - o.p_conditional).abs(),
            format!("step {step} p_conditional"),
        );
        match (&e.bob_rho, &o.bob_rho) {
            (Some(a), Some(b)) => {
                for (idx, (x, y)) in a.iter().zip(b).enumerate() {
                    note((x - y).norm(), format!("step {step} bob_rho[{idx}]"));
                }
            }
            (None, None) => {}
            _ => note(f64::INFINITY, format!("step {step} bob_rho presence")),
        }
    }
    Equivalence {
        passed: worst.0 <= tol,
        max_deviation: worst.0,
        location: worst.1,
    }
}

/// `exp(-i H t)` by scaling and squaring of a truncated Taylor series.
pub fn expm_taylor(h: &DMatrix<f64>, t: f64) -> DMatrix<C> {
    let n = h.nrows();
    let a = h.map(|x| C::new(0.0, -x * t));
    let norm = a.iter().map(|x| x.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / C::new(2f64.powi(squarings as i32), 0.0);
    let mut sum = DMatrix::<C>::identity(n, n);
    let mut term = DMatrix::<C>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / C::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Memory amplitudes after a transfer of the input `|0>`, evaluated as the
/// explicit nested sum over intermediate sites excluding Bob:
/// `f^(l) = sum_{m_1..m_{l-1}} f_{m_1,0}(tau_1) f_{m_2,m_1}(tau_2) .. f_{N-1,m_{l-1}}(tau_l)`.
pub fn nested_sum_memory_amplitudes(spec: &ChainSpec, intervals: &[f64]) -> Vec<C> {
    let n = spec.len();
    let h = spec.hamiltonian();
    let props: Vec<DMatrix<C>> = intervals.iter().map(|&t| expm_taylor(&h, t)).collect();
    let bob = n - 1;
    let mut out = Vec::with_capacity(intervals.len());
    for l in 1..=intervals.len() {
        let depth = l - 1;
        let mut idx = vec![0usize; depth];
        let mut total = ZERO;
        loop {
            let mut prev = 0usize;
            let mut term = ONE;
            for (r, &m) in idx.iter().enumerate() {
                term *= props[r][(m, prev)];
                prev = m;
            }
            term *= props[depth][(bob, prev)];
            total += term;
            // odometer over {0..N-2}^depth
            let mut pos = 0;
            loop {
                if pos == depth {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < bob {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == depth {
                break;
            }
        }
        out.push(total);
    }
    out
}
