//! Transfer and conclusive decoding in the excitation-location basis.
//!
//! The whole register (A1, A2, chain interior, Bob, memories) never holds
//! more than one excitation outside the transient created by the decode
//! CNOT, so a state is a vacuum amplitude plus one amplitude per location.
//! The decode CNOT and the measurement that immediately follows it are
//! applied together as a single branching operation.
//!
//! Amplitudes are stored by physical location. The switch only decides which
//! A-spin plays the role of chain site 0:
//!
//! ```text
//!   A1 ─┐
//!       ├─ [site 0] ── interior sites 1..N-2 ── Bob (site N-1) ⇄ M_0 .. M_{k-1}
//!   A2 ─┘
//! ```
//!
//! Every state carries a branch weight: the probability of the measurement
//! record that produced it. Reported decode probabilities are absolute
//! (weight times conditional probability), which makes them independent of
//! the input qubit even when cooling discards some amplitude.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::SpectralData;
use crate::error::{QstError, Result};

/// Input-normalization tolerance accepted by [`init_state`].
pub const INPUT_NORM_TOL: f64 = 1e-9;

/// Absolute probability below which a measurement branch is treated as
/// impossible. Amplitudes of 1e-10 still sit six orders above rounding, so
/// states of retained branches stay accurate to far better than 1e-9 in fidelity.
pub const NULL_BRANCH: f64 = 1e-20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `alpha |1> + beta |0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(QstError::Unnormalized(norm));
        }
        Ok(Self { alpha, beta })
    }

    /// Normalizes `(alpha, beta)`; `None` for the zero vector.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Option<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        (norm > 0.0 && norm.is_finite()).then(|| Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn excited() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: ZERO,
        }
    }

    pub fn ground() -> Self {
        Self {
            alpha: ZERO,
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// Uniformly random point on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
        let half = cos_theta.acos() / 2.0;
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        Self {
            alpha: Complex64::new(half.cos(), 0.0),
            beta: Complex64::from_polar(half.sin(), phi),
        }
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &QubitState) -> f64 {
        (self.alpha.conj() * other.alpha + self.beta.conj() * other.beta).norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub chain_len: usize,
    pub memories: usize,
}

impl Topology {
    pub fn new(chain_len: usize, memories: usize) -> Result<Self> {
        if chain_len < 2 {
            return Err(QstError::ChainTooShort(chain_len));
        }
        if memories < 1 {
            return Err(QstError::NoMemories);
        }
        Ok(Self {
            chain_len,
            memories,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchConfig {
    A1Connected,
    A2Connected,
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Swap,
    DecodeSuccess,
    DecodeFailure,
    Cool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub tau: f64,
    pub event: EventKind,
    pub probability: f64,
}

/// Register state in the excitation-location basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    input: QubitState,
    vacuum: Complex64,
    a1: Complex64,
    a2: Complex64,
    /// Chain sites after the switchable A-spin; the last entry is Bob.
    interior: Vec<Complex64>,
    memories: Vec<Complex64>,
    consumed: Vec<bool>,
    switch: SwitchConfig,
    encoded: bool,
    weight: f64,
}

/// Prepares `psi` on A1 with everything else in the ground state.
pub fn init_state(psi: QubitState, topo: Topology) -> Result<SystemState> {
    let psi = QubitState::new(psi.alpha, psi.beta)?;
    let topo = Topology::new(topo.chain_len, topo.memories)?;
    Ok(SystemState {
        input: psi,
        vacuum: psi.beta,
        a1: psi.alpha,
        a2: ZERO,
        interior: vec![ZERO; topo.chain_len - 1],
        memories: vec![ZERO; topo.memories],
        consumed: vec![false; topo.memories],
        switch: SwitchConfig::Disconnected,
        encoded: false,
        weight: 1.0,
    })
}

impl SystemState {
    pub fn input(&self) -> QubitState {
        self.input
    }

    pub fn chain_len(&self) -> usize {
        self.interior.len() + 1
    }

    pub fn memory_count(&self) -> usize {
        self.memories.len()
    }

    pub fn vacuum(&self) -> Complex64 {
        self.vacuum
    }

    pub fn a1(&self) -> Complex64 {
        self.a1
    }

    pub fn a2(&self) -> Complex64 {
        self.a2
    }

    pub fn bob(&self) -> Complex64 {
        *self.interior.last().expect("chain has at least two sites")
    }

    pub fn memories(&self) -> &[Complex64] {
        &self.memories
    }

    pub fn is_consumed(&self, l: usize) -> bool {
        self.consumed.get(l).copied().unwrap_or(true)
    }

    pub fn switch(&self) -> SwitchConfig {
        self.switch
    }

    /// Probability of the measurement record leading to this state.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// The A-spin not currently part of the chain.
    pub fn disconnected_a(&self) -> Complex64 {
        match self.switch {
            SwitchConfig::A1Connected => self.a2,
            _ => self.a1,
        }
    }

    /// Chain amplitudes, site 0 first. While disconnected, site 0 is A2.
    pub fn chain_amplitudes(&self) -> Vec<Complex64> {
        let first = match self.switch {
            SwitchConfig::A1Connected => self.a1,
            _ => self.a2,
        };
        std::iter::once(first)
            .chain(self.interior.iter().copied())
            .collect()
    }

    /// All amplitudes as `[vacuum, A1, A2, interior.., memories..]`.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        [self.vacuum, self.a1, self.a2]
            .into_iter()
            .chain(self.interior.iter().copied())
            .chain(self.memories.iter().copied())
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|c| c.norm_sqr()).sum()
    }

    fn renormalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        let s = 1.0 / n2.sqrt();
        self.vacuum *= s;
        self.a1 *= s;
        self.a2 *= s;
        self.interior.iter_mut().for_each(|c| *c *= s);
        self.memories.iter_mut().for_each(|c| *c *= s);
        n2
    }

    /// CNOT on A2 controlled by A1 being zero: moves the vacuum amplitude onto A2.
    pub fn encode_cnot(&mut self) -> Result<()> {
        if self.encoded {
            return Err(QstError::ProtocolOrder("state is already encoded".into()));
        }
        if self.switch != SwitchConfig::Disconnected {
            return Err(QstError::ProtocolOrder(
                "encoding requires both A-spins disconnected".into(),
            ));
        }
        let excited_elsewhere = self.a2 != ZERO
            || self.interior.iter().any(|c| *c != ZERO)
            || self.memories.iter().any(|c| *c != ZERO);
        if excited_elsewhere {
            return Err(QstError::ProtocolOrder(
                "encoding requires A2, the chain and all memories in the ground state".into(),
            ));
        }
        self.a2 = self.vacuum;
        self.vacuum = ZERO;
        self.encoded = true;
        Ok(())
    }

    /// Instantaneous relabeling; amplitudes are untouched.
    pub fn set_switch(&mut self, config: SwitchConfig) {
        self.switch = config;
    }

    /// Free evolution of the connected chain for `tau`.
    pub fn evolve(&mut self, sd: &SpectralData, tau: f64) -> Result<()> {
        if self.switch == SwitchConfig::Disconnected {
            return Err(QstError::ProtocolOrder(
                "cannot evolve while no A-spin is connected".into(),
            ));
        }
        if sd.dim() != self.chain_len() {
            return Err(QstError::LengthMismatch {
                what: "spectral dimension",
                expected: self.chain_len(),
                got: sd.dim(),
            });
        }
        if !tau.is_finite() {
            return Err(QstError::NonFinite("evolution time"));
        }
        let out = sd.evolve_vector(&self.chain_amplitudes(), tau);
        match self.switch {
            SwitchConfig::A1Connected => self.a1 = out[0],
            _ => self.a2 = out[0],
        }
        self.interior.copy_from_slice(&out[1..]);
        Ok(())
    }

    /// Exchanges Bob's amplitude with memory `l`.
    pub fn swap_bob_memory(&mut self, l: usize) -> Result<()> {
        if self.is_consumed(l) {
            return Err(QstError::MemoryUnavailable(l));
        }
        let bob = self
            .interior
            .last_mut()
            .expect("chain has at least two sites");
        std::mem::swap(bob, &mut self.memories[l]);
        Ok(())
    }

    /// Projective reset of A2, the interior and Bob to the ground state.
    ///
    /// Returns the probability that the reset finds an excitation (the
    /// residual left after a finite transfer). The surviving branch is
    /// renormalized uniformly, so the A1 and memory amplitudes keep their ratios.
    pub fn cool_chain(&mut self) -> Result<f64> {
        if self.switch == SwitchConfig::A1Connected {
            return Err(QstError::ProtocolOrder(
                "cooling must happen before A1 is switched onto the chain".into(),
            ));
        }
        let residual: f64 =
            self.a2.norm_sqr() + self.interior.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if residual == 0.0 {
            return Ok(0.0);
        }
        let keep = self.norm_sqr() - residual;
        if keep <= NULL_BRANCH {
            return Err(QstError::ProtocolOrder(
                "cooling leaves no surviving amplitude".into(),
            ));
        }
        let p_loss = residual / (keep + residual);
        self.a2 = ZERO;
        self.interior.iter_mut().for_each(|c| *c = ZERO);
        self.renormalize();
        self.weight *= 1.0 - p_loss;
        Ok(p_loss)
    }

    /// Evolve for `tau`, then CNOT on memory `l` controlled by Bob and measure `l`.
    pub fn decode_step(&self, sd: &SpectralData, l: usize, tau: f64) -> Result<DecodeOutcome> {
        if self.switch != SwitchConfig::A1Connected {
            return Err(QstError::ProtocolOrder(
                "decoding requires A1 connected to the chain".into(),
            ));
        }
        if self.is_consumed(l) {
            return Err(QstError::MemoryUnavailable(l));
        }
        let mut next = self.clone();
        next.evolve(sd, tau)?;
        let norm = next.norm_sqr();
        let bob = next.bob();
        let mem = next.memories[l];
        let p_conditional = ((bob.norm_sqr() + mem.norm_sqr()) / norm).clamp(0.0, 1.0);

        let p_success = self.weight * p_conditional;
        let bob_on_success = QubitState::normalized(bob, mem).filter(|_| p_success > NULL_BRANCH);
        let fidelity_on_success = bob_on_success.map(|b| self.input.fidelity(&b));

        next.consumed[l] = true;
        next.memories[l] = ZERO;
        *next
            .interior
            .last_mut()
            .expect("chain has at least two sites") = ZERO;
        // taken from the residual norm, not 1 - p_conditional, which cancels
        let p_failure = next.norm_sqr() / norm;
        let failure_state = if self.weight * p_failure > NULL_BRANCH {
            next.renormalize();
            next.weight *= p_failure;
            Some(next)
        } else {
            None
        };

        Ok(DecodeOutcome {
            memory: l,
            tau,
            p_success,
            p_conditional,
            bob_on_success,
            fidelity_on_success,
            failure_state,
        })
    }
}

/// Result of one decode measurement.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub memory: usize,
    pub tau: f64,
    /// Absolute probability: branch weight of the input state times `p_conditional`.
    pub p_success: f64,
    /// Success probability given the input state of this step.
    pub p_conditional: f64,
    /// Bob's qubit given success; `None` when success is impossible.
    pub bob_on_success: Option<QubitState>,
    pub fidelity_on_success: Option<f64>,
    /// Renormalized post-failure state; `None` when failure is impossible.
    pub failure_state: Option<SystemState>,
}

fn check_intervals(intervals: &[f64], memories: usize) -> Result<()> {
    if intervals.len() > memories {
        return Err(QstError::ScheduleTooLong {
            steps: intervals.len(),
            memories,
        });
    }
    if let Some(bad) = intervals.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(QstError::InvalidSchedule(format!(
            "interval {bad} is not a finite non-negative time"
        )));
    }
    Ok(())
}

/// Transfer portion: evolve `tau_i`, then swap Bob into memory `i`, for each interval.
///
/// Afterwards memory `l` holds `beta f_N^(l)`.
pub fn transfer_run(
    state: &mut SystemState,
    sd: &SpectralData,
    intervals: &[f64],
) -> Result<Vec<StepRecord>> {
    if !state.encoded {
        return Err(QstError::ProtocolOrder(
            "transfer requires an encoded state".into(),
        ));
    }
    if state.switch != SwitchConfig::A2Connected {
        return Err(QstError::ProtocolOrder(
            "transfer requires A2 connected".into(),
        ));
    }
    check_intervals(intervals, state.memory_count())?;
    let mut records = Vec::with_capacity(intervals.len());
    for (i, &tau) in intervals.iter().enumerate() {
        state.evolve(sd, tau)?;
        state.swap_bob_memory(i)?;
        records.push(StepRecord {
            step: i + 1,
            tau,
            event: EventKind::Swap,
            probability: state.memories[i].norm_sqr(),
        });
    }
    Ok(records)
}

/// One decode step as seen along the all-failures branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeStepReport {
    pub step: usize,
    pub tau: f64,
    pub eta: f64,
    pub p_conditional: f64,
    pub bob_on_success: Option<QubitState>,
    pub fidelity_on_success: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub steps: Vec<DecodeStepReport>,
    pub cumulative_eta: f64,
    /// Probability of reaching the end of the schedule with every measurement failing.
    pub failure_probability: f64,
    /// Average decoding time over the stopping distribution.
    pub mean_decode_time: f64,
    /// Sum of all intervals; the time a full replay would take.
    pub full_decode_time: f64,
}

impl DecodeReport {
    pub fn etas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.eta).collect()
    }

    /// Smallest fidelity among steps where success is possible.
    pub fn min_fidelity(&self) -> Option<f64> {
        self.steps
            .iter()
            .filter_map(|s| s.fidelity_on_success)
            .reduce(f64::min)
    }

    /// True when at least one step can succeed.
    pub fn successful(&self) -> bool {
        self.steps.iter().any(|s| s.bob_on_success.is_some())
    }
}

/// Decoding portion with exhaustive branching: walks the failure branch
/// through every interval, recording the absolute success probability `eta_i`
/// of each measurement. Memory `i` is decoded after interval `i`.
pub fn decode_run(
    state: &SystemState,
    sd: &SpectralData,
    intervals: &[f64],
) -> Result<DecodeReport> {
    check_intervals(intervals, state.memory_count())?;
    let mut current = Some(state.clone());
    let mut steps = Vec::with_capacity(intervals.len());
    for (i, &tau) in intervals.iter().enumerate() {
        let Some(st) = current.take() else {
            steps.push(DecodeStepReport {
                step: i + 1,
                tau,
                eta: 0.0,
                p_conditional: 0.0,
                bob_on_success: None,
                fidelity_on_success: None,
            });
            continue;
        };
        let out = st.decode_step(sd, i, tau)?;
        steps.push(DecodeStepReport {
            step: i + 1,
            tau,
            eta: out.p_success,
            p_conditional: out.p_conditional,
            bob_on_success: out.bob_on_success,
            fidelity_on_success: out.fidelity_on_success,
        });
        current = out.failure_state;
    }
    let etas: Vec<f64> = steps.iter().map(|s| s.eta).collect();
    let cumulative_eta = etas.iter().sum();
    let times = cumulative_times(intervals);
    Ok(DecodeReport {
        cumulative_eta,
        failure_probability: current.map_or(0.0, |s| s.weight),
        mean_decode_time: crate::schedule::mean_decode_time(&etas, &times),
        full_decode_time: times.last().copied().unwrap_or(0.0),
        steps,
    })
}

fn cumulative_times(intervals: &[f64]) -> Vec<f64> {
    intervals
        .iter()
        .scan(0.0, |acc, tau| {
            *acc += tau;
            Some(*acc)
        })
        .collect()
}

/// One sampled decode trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDecode {
    /// 1-based step of the first successful measurement.
    pub stop_step: Option<usize>,
    /// Decoding time spent until the stop (or the full schedule).
    pub elapsed: f64,
    pub bob: Option<QubitState>,
}

/// Samples measurement outcomes step by step, stopping at the first success.
pub fn sample_decode<R: Rng + ?Sized>(
    state: &SystemState,
    sd: &SpectralData,
    intervals: &[f64],
    rng: &mut R,
) -> Result<SampledDecode> {
    check_intervals(intervals, state.memory_count())?;
    let mut current = state.clone();
    let mut elapsed = 0.0;
    for (i, &tau) in intervals.iter().enumerate() {
        elapsed += tau;
        let out = current.decode_step(sd, i, tau)?;
        let u: f64 = rng.gen();
        if u < out.p_conditional {
            return Ok(SampledDecode {
                stop_step: Some(i + 1),
                elapsed,
                bob: out.bob_on_success,
            });
        }
        match out.failure_state {
            Some(next) => current = next,
            None => break,
        }
    }
    Ok(SampledDecode {
        stop_step: None,
        elapsed,
        bob: None,
    })
}

/// Everything produced by one transfer + decode run.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub transfer: Vec<StepRecord>,
    /// Probability that cooling found residual excitation (zero when cooling is skipped).
    pub p_loss: f64,
    pub decode: DecodeReport,
}

/// Options for [`run_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolOptions {
    /// Reset the chain between the two portions. When off, residual amplitude
    /// stays in the chain during decoding.
    pub cooling: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self { cooling: true }
    }
}

/// Encode, transfer, cool, switch to A1, and decode by replaying `intervals`.
pub fn run_protocol(
    psi: QubitState,
    sd: &SpectralData,
    intervals: &[f64],
    options: ProtocolOptions,
) -> Result<ProtocolRun> {
    let memories = intervals.len().max(1);
    let mut state = init_state(psi, Topology::new(sd.dim(), memories)?)?;
    state.encode_cnot()?;
    state.set_switch(SwitchConfig::A2Connected);
    let transfer = transfer_run(&mut state, sd, intervals)?;
    state.set_switch(SwitchConfig::Disconnected);
    let p_loss = if options.cooling {
        state.cool_chain()?
    } else {
        0.0
    };
    state.set_switch(SwitchConfig::A1Connected);
    let decode = decode_run(&state, sd, intervals)?;
    Ok(ProtocolRun {
        transfer,
        p_loss,
        decode,
    })
}
