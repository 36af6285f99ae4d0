//! Evolution schedules: greedy choice of the intervals, success profiles,
//! memory budgets and average decoding time.
//!
//! The greedy search picks each `tau_i` to maximize the probability `eta_i`
//! that the excitation reaches Bob in step `i`, holding the earlier
//! intervals fixed. Each step is a grid scan over `(0, window]` followed by a
//! golden-section refinement of the best grid cell.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, SpectralData};
use crate::error::{QstError, Result};
use crate::protocol::{init_state, transfer_run, QubitState, SwitchConfig, Topology};
use crate::units::{to_physical_units_with, TimeConvention};

/// Default search window in units of `N / J_max`.
pub const DEFAULT_WINDOW_FACTOR: f64 = 2.0;
pub const DEFAULT_RESOLUTION: usize = 2000;
pub const MIN_RESOLUTION: usize = 100;
/// Relative width at which golden-section refinement stops.
pub const REFINE_REL_TOL: f64 = 1e-10;
/// Grid values within this relative margin of the running best count as ties (earliest wins).
const TIE_REL_TOL: f64 = 1e-10;

/// Evolution intervals and their running sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    intervals: Vec<f64>,
}

impl Schedule {
    pub fn new(intervals: Vec<f64>) -> Result<Self> {
        if let Some(bad) = intervals.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(QstError::InvalidSchedule(format!(
                "interval {bad} is not a positive finite time"
            )));
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `t_i = tau_1 + .. + tau_i`.
    pub fn cumulative(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .scan(0.0, |acc, tau| {
                *acc += tau;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.intervals.iter().sum()
    }

    /// First `j` intervals.
    pub fn truncated(&self, j: usize) -> Self {
        Self {
            intervals: self.intervals[..j.min(self.len())].to_vec(),
        }
    }

    /// Every interval divided by `s`.
    pub fn scaled_time(&self, s: f64) -> Result<Self> {
        Self::new(self.intervals.iter().map(|t| t / s).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Upper end of the scanned interval; `None` uses `DEFAULT_WINDOW_FACTOR * N / J_max`.
    pub window: Option<f64>,
    pub resolution: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            window: None,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl SearchConfig {
    pub fn with_window(window: f64) -> Self {
        Self {
            window: Some(window),
            ..Self::default()
        }
    }

    pub fn resolved_window(&self, spec: &ChainSpec) -> f64 {
        self.window
            .unwrap_or(DEFAULT_WINDOW_FACTOR * spec.len() as f64 / spec.max_coupling())
    }

    fn validate(&self, spec: &ChainSpec) -> Result<f64> {
        let window = self.resolved_window(spec);
        if !(window.is_finite() && window > 0.0) {
            return Err(QstError::InvalidSearch(format!(
                "window must be positive, got {window}"
            )));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(QstError::InvalidSearch(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        Ok(window)
    }
}

/// One greedy choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub tau: f64,
    pub eta: f64,
    /// The best grid point was the window edge, so a later peak may have been cut off.
    pub at_window_edge: bool,
}

/// Step-by-step greedy optimizer for one chain.
///
/// Tracks the amplitude of the `beta` branch in the chain (memories already
/// hold everything that reached Bob earlier).
pub struct GreedySearch {
    sd: SpectralData,
    window: f64,
    resolution: usize,
    chain: Vec<Complex64>,
    steps: usize,
}

impl GreedySearch {
    pub fn new(spec: &ChainSpec, search: &SearchConfig) -> Result<Self> {
        let window = search.validate(spec)?;
        let sd = spec.spectral()?;
        let mut chain = vec![Complex64::new(0.0, 0.0); spec.len()];
        chain[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            sd,
            window,
            resolution: search.resolution,
            chain,
            steps: 0,
        })
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.sd
    }

    /// `|<Bob| exp(-i H1 tau) |chain>|^2` expressed through the spectral weights.
    fn arrival(weights: &[Complex64], energies: &[f64], tau: f64) -> f64 {
        weights
            .iter()
            .zip(energies)
            .map(|(w, &e)| w * Complex64::from_polar(1.0, -e * tau))
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// Chooses the next interval, applies it and empties Bob into a memory.
    pub fn next_step(&mut self) -> GreedyStep {
        let n = self.sd.dim();
        let v = self.sd.eigenvectors();
        let energies = self.sd.eigenvalues();
        let weights: Vec<Complex64> = (0..n)
            .map(|k| {
                let overlap: Complex64 = (0..n).map(|s| self.chain[s] * v[(s, k)]).sum();
                overlap * v[(n - 1, k)]
            })
            .collect();

        let h = self.window / self.resolution as f64;
        let mut best_g = 1;
        let mut best = -1.0f64;
        for g in 1..=self.resolution {
            let p = Self::arrival(&weights, energies, g as f64 * h);
            if p > best + TIE_REL_TOL * best.abs() {
                best = p;
                best_g = g;
            }
        }
        let grid_tau = best_g as f64 * h;
        let lo = (grid_tau - h).max(0.0);
        let hi = (grid_tau + h).min(self.window);
        let (refined, refined_p) =
            golden_maximize(|t| Self::arrival(&weights, energies, t), lo, hi);
        let (tau, _) = if refined_p >= best && refined > 0.0 {
            (refined, refined_p)
        } else {
            (grid_tau, best)
        };

        let at_window_edge = best_g == self.resolution;
        if at_window_edge {
            log::warn!(
                "step {}: best arrival sits at the window edge {:.4}; consider a wider window",
                self.steps + 1,
                self.window
            );
        }

        self.chain = self.sd.evolve_vector(&self.chain, tau);
        let bob = &mut self.chain[n - 1];
        let eta = bob.norm_sqr();
        *bob = Complex64::new(0.0, 0.0);
        self.steps += 1;
        GreedyStep {
            tau,
            eta,
            at_window_edge,
        }
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden_maximize<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let tol = REFINE_REL_TOL * b.abs().max(1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Greedy schedule together with the step data gathered while building it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyResult {
    pub schedule: Schedule,
    pub steps: Vec<GreedyStep>,
    pub window: f64,
}

impl GreedyResult {
    pub fn etas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.eta).collect()
    }
}

pub fn greedy_optimize_schedule(
    spec: &ChainSpec,
    j_max: usize,
    search: &SearchConfig,
) -> Result<GreedyResult> {
    let mut g = GreedySearch::new(spec, search)?;
    let steps: Vec<GreedyStep> = (0..j_max).map(|_| g.next_step()).collect();
    let schedule = Schedule::new(steps.iter().map(|s| s.tau).collect())?;
    Ok(GreedyResult {
        schedule,
        steps,
        window: g.window(),
    })
}

/// Per-step success probabilities and their running sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaProfile {
    pub per_step: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl EtaProfile {
    pub fn from_etas(per_step: Vec<f64>) -> Self {
        let cumulative = per_step
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect();
        Self {
            per_step,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.per_step.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_step.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Smallest `j` whose cumulative success reaches `target`.
    pub fn steps_to_reach(&self, target: f64) -> Option<usize> {
        self.cumulative
            .iter()
            .position(|&c| c >= target)
            .map(|i| i + 1)
    }
}

/// Runs the transfer portion on the input `|0>` (pure `beta` branch) and reads
/// `eta_i = |f_N^(i)|^2` off the memories.
pub fn eta_profile(spec: &ChainSpec, schedule: &Schedule) -> Result<EtaProfile> {
    eta_profile_spectral(&spec.spectral()?, schedule)
}

pub fn eta_profile_spectral(sd: &SpectralData, schedule: &Schedule) -> Result<EtaProfile> {
    let mut state = init_state(
        QubitState::ground(),
        Topology::new(sd.dim(), schedule.len().max(1))?,
    )?;
    state.encode_cnot()?;
    state.set_switch(SwitchConfig::A2Connected);
    transfer_run(&mut state, sd, schedule.intervals())?;
    Ok(EtaProfile::from_etas(
        state.memories()[..schedule.len()]
            .iter()
            .map(|m| m.norm_sqr())
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MemoryBudget {
    Reached(usize),
    NotReached { cap: usize, cumulative: f64 },
}

impl MemoryBudget {
    pub fn count(&self) -> Option<usize> {
        match self {
            MemoryBudget::Reached(j) => Some(*j),
            MemoryBudget::NotReached { .. } => None,
        }
    }
}

/// Smallest number of greedy steps (one memory each) whose cumulative success reaches `eta_target`.
pub fn memories_for_target(
    spec: &ChainSpec,
    eta_target: f64,
    j_cap: usize,
    search: &SearchConfig,
) -> Result<MemoryBudget> {
    if !(eta_target > 0.0 && eta_target < 1.0) {
        return Err(QstError::InvalidSearch(format!(
            "target must lie in (0, 1), got {eta_target}"
        )));
    }
    let mut g = GreedySearch::new(spec, search)?;
    let mut cumulative = 0.0;
    for j in 1..=j_cap {
        cumulative += g.next_step().eta;
        if cumulative >= eta_target {
            return Ok(MemoryBudget::Reached(j));
        }
    }
    Ok(MemoryBudget::NotReached {
        cap: j_cap,
        cumulative,
    })
}

/// `sum_{i<j} eta_i t_i + (1 - sum_{i<j} eta_i) t_j` with `j = etas.len()`.
pub fn mean_decode_time(etas: &[f64], times: &[f64]) -> f64 {
    assert_eq!(etas.len(), times.len(), "eta and time sequences must align");
    let Some((&t_last, earlier)) = times.split_last() else {
        return 0.0;
    };
    let head = &etas[..earlier.len()];
    let early: f64 = head.iter().zip(earlier).map(|(e, t)| e * t).sum();
    let mass: f64 = head.iter().sum();
    early + (1.0 - mass) * t_last
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub mean_decode_time: f64,
    /// Time of the full schedule, also the cost of a time-reversed replay.
    pub full_decode_time: f64,
    pub ratio: f64,
}

impl TimingReport {
    /// `(mean, full)` in seconds.
    pub fn physical(&self, j_kelvin: f64, convention: TimeConvention) -> Result<(f64, f64)> {
        Ok((
            to_physical_units_with(self.mean_decode_time, j_kelvin, convention)?,
            to_physical_units_with(self.full_decode_time, j_kelvin, convention)?,
        ))
    }
}

pub fn average_decoding_time(profile: &EtaProfile, schedule: &Schedule) -> Result<TimingReport> {
    if profile.len() != schedule.len() || schedule.is_empty() {
        return Err(QstError::InvalidSchedule(format!(
            "profile has {} steps, schedule has {}",
            profile.len(),
            schedule.len()
        )));
    }
    let times = schedule.cumulative();
    let mean = mean_decode_time(&profile.per_step, &times);
    let full = schedule.total();
    Ok(TimingReport {
        mean_decode_time: mean,
        full_decode_time: full,
        ratio: mean / full,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eta1Point {
    pub n: usize,
    pub max_eta1: f64,
    pub tau: f64,
}

/// Best first-step success for uniform unit-coupling chains of each length.
pub fn max_eta1_curve(ns: &[usize], search: &SearchConfig) -> Result<Vec<Eta1Point>> {
    ns.par_iter()
        .map(|&n| {
            let spec = ChainSpec::uniform(n, 1.0)?;
            let step = GreedySearch::new(&spec, search)?.next_step();
            Ok(Eta1Point {
                n,
                max_eta1: step.eta,
                tau: step.tau,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::propagator_amplitude;
    use std::f64::consts::PI;

    #[test]
    fn schedule_validation_and_times() {
        assert!(Schedule::new(vec![1.0, 0.0]).is_err());
        assert!(Schedule::new(vec![-1.0]).is_err());
        let s = Schedule::new(vec![1.0, 2.5, 0.5]).unwrap();
        assert_eq!(s.cumulative(), vec![1.0, 3.5, 4.0]);
        assert_eq!(s.total(), 4.0);
        assert_eq!(s.truncated(2).intervals(), &[1.0, 2.5]);
    }

    #[test]
    fn two_site_optimum() {
        let spec = ChainSpec::uniform(2, 1.0).unwrap();
        let g = greedy_optimize_schedule(&spec, 1, &SearchConfig::default()).unwrap();
        assert!((g.steps[0].tau - PI / 2.0).abs() < 1e-6);
        assert!((g.steps[0].eta - 1.0).abs() < 1e-6);
    }

    #[test]
    fn three_site_optimum() {
        let spec = ChainSpec::uniform(3, 1.0).unwrap();
        let g = greedy_optimize_schedule(&spec, 1, &SearchConfig::default()).unwrap();
        assert!((g.steps[0].eta - 1.0).abs() < 1e-6);
        assert!((g.steps[0].tau - PI / 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn ten_site_first_step_beats_half() {
        let spec = ChainSpec::uniform(10, 1.0).unwrap();
        let g = greedy_optimize_schedule(&spec, 1, &SearchConfig::default()).unwrap();
        assert!(g.steps[0].eta > 0.5);
    }

    #[test]
    fn profile_single_step_matches_propagator() {
        let spec = ChainSpec::uniform(7, 1.0).unwrap();
        let sd = spec.spectral().unwrap();
        let s = Schedule::new(vec![3.3]).unwrap();
        let p = eta_profile(&spec, &s).unwrap();
        let f = propagator_amplitude(&sd, 6, 0, 3.3);
        assert!((p.per_step[0] - f.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn greedy_etas_match_profile() {
        let spec = ChainSpec::uniform(9, 1.0).unwrap();
        let g = greedy_optimize_schedule(&spec, 8, &SearchConfig::default()).unwrap();
        let p = eta_profile(&spec, &g.schedule).unwrap();
        for (a, b) in g.etas().iter().zip(&p.per_step) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(p.total() <= 1.0 + 1e-9);
        assert!(p.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn greedy_is_locally_optimal() {
        let spec = ChainSpec::uniform(8, 1.0).unwrap();
        let search = SearchConfig::default();
        let g = greedy_optimize_schedule(&spec, 6, &search).unwrap();
        let h = g.window / search.resolution as f64;
        for i in 0..g.schedule.len() {
            let base = g.schedule.intervals()[..i].to_vec();
            let eta_at = |tau: f64| {
                let mut iv = base.clone();
                iv.push(tau);
                eta_profile(&spec, &Schedule::new(iv).unwrap())
                    .unwrap()
                    .per_step[i]
            };
            let tau = g.schedule.intervals()[i];
            let here = eta_at(tau);
            assert!(eta_at(tau + h) <= here + 1e-12);
            if tau - h > 0.0 {
                assert!(eta_at(tau - h) <= here + 1e-12);
            }
        }
    }

    #[test]
    fn budgets() {
        let s = SearchConfig::default();
        let two = ChainSpec::uniform(2, 1.0).unwrap();
        assert_eq!(
            memories_for_target(&two, 0.99, 10, &s).unwrap(),
            MemoryBudget::Reached(1)
        );
        let ten = ChainSpec::uniform(10, 1.0).unwrap();
        assert_eq!(
            memories_for_target(&ten, 0.5, 10, &s).unwrap(),
            MemoryBudget::Reached(1)
        );
        assert!(matches!(
            memories_for_target(&ten, 0.999, 2, &s).unwrap(),
            MemoryBudget::NotReached { cap: 2, .. }
        ));
        assert!(memories_for_target(&ten, 1.0, 2, &s).is_err());
    }

    #[test]
    fn mean_time_edge_cases() {
        let s = Schedule::new(vec![2.0]).unwrap();
        let r = average_decoding_time(&EtaProfile::from_etas(vec![0.3]), &s).unwrap();
        assert_eq!(r.mean_decode_time, 2.0);

        let s = Schedule::new(vec![2.0, 3.0, 4.0]).unwrap();
        let r = average_decoding_time(&EtaProfile::from_etas(vec![1.0, 0.0, 0.0]), &s).unwrap();
        assert_eq!(r.mean_decode_time, 2.0);

        let r = average_decoding_time(&EtaProfile::from_etas(vec![0.5, 0.25, 0.2]), &s).unwrap();
        // 0.5*2 + 0.25*5 + 0.25*9
        assert!((r.mean_decode_time - 4.5).abs() < 1e-12);
        assert_eq!(r.full_decode_time, 9.0);

        let r = average_decoding_time(&EtaProfile::from_etas(vec![0.0, 0.0, 0.4]), &s).unwrap();
        assert_eq!(r.mean_decode_time, r.full_decode_time);

        assert!(average_decoding_time(&EtaProfile::from_etas(vec![0.5]), &s).is_err());
    }

    #[test]
    fn search_validation() {
        let spec = ChainSpec::uniform(4, 1.0).unwrap();
        let bad = SearchConfig {
            window: Some(1.0),
            resolution: 10,
        };
        assert!(GreedySearch::new(&spec, &bad).is_err());
        assert!(GreedySearch::new(&spec, &SearchConfig::with_window(-1.0)).is_err());
    }

    #[test]
    fn narrow_window_flags_edge() {
        let spec = ChainSpec::uniform(10, 1.0).unwrap();
        let g = greedy_optimize_schedule(&spec, 1, &SearchConfig::with_window(1.0)).unwrap();
        assert!(g.steps[0].at_window_edge);
        assert!(g.steps[0].tau <= 1.0);
    }

    #[test]
    fn eta1_curve_small() {
        let pts = max_eta1_curve(&[2, 3, 5, 30], &SearchConfig::default()).unwrap();
        assert_eq!(
            pts.iter().map(|p| p.n).collect::<Vec<_>>(),
            vec![2, 3, 5, 30]
        );
        assert!((pts[0].max_eta1 - 1.0).abs() < 1e-6);
        assert!((pts[1].max_eta1 - 1.0).abs() < 1e-6);
        assert!(pts[3].max_eta1 < pts[2].max_eta1);
    }
}
