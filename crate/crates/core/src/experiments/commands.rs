use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Experiment, RunConfig};
use super::table::{mean_std, ResultTable};
use crate::chain::{spectral_decompose, ChainSpec, DisorderModel, SpectralData};
use crate::error::Result;
use crate::oracle::{engine_trace, equivalence_check, full_run, nested_sum_memory_amplitudes};
use crate::protocol::{
    init_state, run_protocol, transfer_run, ProtocolOptions, QubitState, SwitchConfig, Topology,
};
use crate::schedule::{
    average_decoding_time, greedy_optimize_schedule, max_eta1_curve, mean_decode_time, EtaProfile,
    Schedule, TimingReport,
};
use crate::units::{to_physical_units_with, TimeConvention};

/// Successful-branch fidelity tolerance.
pub const FIDELITY_TOL: f64 = 1e-9;
/// Engine vs. full-register tolerance.
pub const ORACLE_TOL: f64 = 1e-10;
/// Tolerance for identities that hold to rounding.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub experiment: Experiment,
    pub tables: Vec<ResultTable>,
    pub summary: Value,
    pub seeds: Vec<u64>,
    /// False when a check inside the experiment failed.
    pub passed: bool,
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    match config.experiment {
        Experiment::Fig2 => cmd_fig2(config),
        Experiment::Fig3 => cmd_fig3(config),
        Experiment::Example5 => cmd_example5(config),
        Experiment::Sweep => cmd_disorder_sweep(config),
        Experiment::Verify => cmd_verify(config),
    }
}

/// Best first-step success probability against chain length.
pub fn cmd_fig2(config: &RunConfig) -> Result<ExperimentOutput> {
    let points = max_eta1_curve(&config.n_values, &config.search())?;
    let mut table = ResultTable::new("fig2", &["n", "max_eta1", "tau_opt"]);
    for p in &points {
        table.push_row(vec![p.n.into(), p.max_eta1.into(), p.tau.into()])?;
    }
    let min = points
        .iter()
        .map(|p| p.max_eta1)
        .fold(f64::INFINITY, f64::min);
    Ok(ExperimentOutput {
        experiment: Experiment::Fig2,
        tables: vec![table],
        summary: json!({ "points": points.len(), "min_max_eta1": min }),
        seeds: vec![],
        passed: true,
    })
}

struct Fig3Curve {
    n: usize,
    schedule: Schedule,
    etas: Vec<f64>,
}

/// Cumulative success against greedy step for several chain lengths.
pub fn cmd_fig3(config: &RunConfig) -> Result<ExperimentOutput> {
    let search = config.search();
    let curves: Vec<Fig3Curve> = config
        .n_values
        .par_iter()
        .map(|&n| {
            let spec = ChainSpec::uniform(n, 1.0)?;
            let g = greedy_optimize_schedule(&spec, config.steps, &search)?;
            Ok(Fig3Curve {
                n,
                etas: g.etas(),
                schedule: g.schedule,
            })
        })
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new(
        "fig3",
        &[
            "n",
            "step",
            "tau",
            "t",
            "eta",
            "cumulative_eta",
            "mean_decode_time",
        ],
    );
    let mut reach = serde_json::Map::new();
    for c in &curves {
        let times = c.schedule.cumulative();
        let profile = EtaProfile::from_etas(c.etas.clone());
        for s in 0..c.etas.len() {
            table.push_row(vec![
                c.n.into(),
                (s + 1).into(),
                c.schedule.intervals()[s].into(),
                times[s].into(),
                c.etas[s].into(),
                profile.cumulative[s].into(),
                mean_decode_time(&c.etas[..=s], &times[..=s]).into(),
            ])?;
        }
        reach.insert(
            c.n.to_string(),
            json!(profile.steps_to_reach(config.eta_target)),
        );
    }
    Ok(ExperimentOutput {
        experiment: Experiment::Fig3,
        tables: vec![table],
        summary: json!({ "eta_target": config.eta_target, "steps_to_target": reach }),
        seeds: vec![],
        passed: true,
    })
}

/// Memory budget and decoding time for one uniform chain at a physical coupling.
#[derive(Debug, Clone, Serialize)]
pub struct BudgetReport {
    pub n: usize,
    pub memories: Option<usize>,
    pub steps_used: usize,
    pub cumulative_eta: f64,
    pub timing: TimingReport,
    pub j_kelvin: f64,
    pub convention: TimeConvention,
    pub full_decode_time_ns: f64,
    pub mean_decode_time_ns: f64,
    /// The same times under the other unit convention.
    pub alternate_convention: TimeConvention,
    pub alternate_full_decode_time_ns: f64,
    pub alternate_mean_decode_time_ns: f64,
}

pub fn memory_budget_report(config: &RunConfig) -> Result<(BudgetReport, Schedule, Vec<f64>)> {
    let n = config.n_values[0];
    let spec = ChainSpec::uniform(n, 1.0)?;
    let g = greedy_optimize_schedule(&spec, config.steps, &config.search())?;
    let full = EtaProfile::from_etas(g.etas());
    let memories = full.steps_to_reach(config.eta_target);
    let j = memories.unwrap_or(full.len());
    let schedule = g.schedule.truncated(j);
    let etas = full.per_step[..j].to_vec();
    let profile = EtaProfile::from_etas(etas.clone());
    let timing = average_decoding_time(&profile, &schedule)?;
    let jk = config.j_kelvin.unwrap_or(20.0);
    let conv = config.time_convention;
    let alt = match conv {
        TimeConvention::H => TimeConvention::Hbar,
        TimeConvention::Hbar => TimeConvention::H,
    };
    let (mean_s, full_s) = timing.physical(jk, conv)?;
    let (alt_mean_s, alt_full_s) = timing.physical(jk, alt)?;
    Ok((
        BudgetReport {
            n,
            memories,
            steps_used: j,
            cumulative_eta: profile.total(),
            timing,
            j_kelvin: jk,
            convention: conv,
            full_decode_time_ns: full_s * 1e9,
            mean_decode_time_ns: mean_s * 1e9,
            alternate_convention: alt,
            alternate_full_decode_time_ns: alt_full_s * 1e9,
            alternate_mean_decode_time_ns: alt_mean_s * 1e9,
        },
        schedule,
        etas,
    ))
}

/// Worked example: memories needed for the target and the decoding times they imply.
pub fn cmd_example5(config: &RunConfig) -> Result<ExperimentOutput> {
    let (report, schedule, etas) = memory_budget_report(config)?;
    let mut table = ResultTable::new(
        "example5",
        &["step", "tau", "t", "t_ns", "eta", "cumulative_eta"],
    );
    let profile = EtaProfile::from_etas(etas);
    for (i, t) in schedule.cumulative().into_iter().enumerate() {
        let t_ns = to_physical_units_with(t, report.j_kelvin, report.convention)? * 1e9;
        table.push_row(vec![
            (i + 1).into(),
            schedule.intervals()[i].into(),
            t.into(),
            t_ns.into(),
            profile.per_step[i].into(),
            profile.cumulative[i].into(),
        ])?;
    }
    Ok(ExperimentOutput {
        experiment: Experiment::Example5,
        tables: vec![table],
        passed: report.memories.is_some(),
        summary: serde_json::to_value(&report)?,
        seeds: vec![],
    })
}

#[derive(Debug, Clone)]
struct Realization {
    index: usize,
    seed: u64,
    eta1: f64,
    memories: Option<usize>,
    cumulative_eta: f64,
    t_j: f64,
    mean_decode_time: f64,
    p_loss: f64,
    min_fidelity: Option<f64>,
}

fn realization(config: &RunConfig, n: usize, index: usize) -> Result<Realization> {
    let seed = config.seed_for(index);
    let spec = DisorderModel::new(1.0, config.delta, seed)?.sample(n)?;
    let sd = spec.spectral()?;
    let g = greedy_optimize_schedule(&spec, config.steps, &config.search())?;
    let full = EtaProfile::from_etas(g.etas());
    let memories = full.steps_to_reach(config.eta_target);
    let j = memories.unwrap_or(full.len());
    let schedule = g.schedule.truncated(j);
    let profile = EtaProfile::from_etas(full.per_step[..j].to_vec());
    let timing = average_decoding_time(&profile, &schedule)?;

    // an input independent of the chain draw
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let psi = QubitState::random(&mut rng);
    let options = ProtocolOptions {
        cooling: config.cooling,
    };
    let run = run_protocol(psi, &sd, schedule.intervals(), options)?;
    Ok(Realization {
        index,
        seed,
        eta1: full.per_step[0],
        memories,
        cumulative_eta: profile.total(),
        t_j: timing.full_decode_time,
        mean_decode_time: timing.mean_decode_time,
        p_loss: run.p_loss,
        min_fidelity: run.decode.min_fidelity(),
    })
}

/// Greedy schedules and conclusive runs over random coupling realizations.
pub fn cmd_disorder_sweep(config: &RunConfig) -> Result<ExperimentOutput> {
    let n = config.n_values[0];
    let rows: Vec<Realization> = (0..config.seeds)
        .into_par_iter()
        .map(|i| realization(config, n, i))
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new(
        "sweep",
        &[
            "index",
            "seed",
            "n",
            "delta",
            "eta1",
            "memories",
            "cumulative_eta",
            "t_j",
            "mean_decode_time",
            "p_loss",
            "min_fidelity",
        ],
    );
    for r in &rows {
        table.push_row(vec![
            r.index.into(),
            r.seed.into(),
            n.into(),
            config.delta.into(),
            r.eta1.into(),
            r.memories.into(),
            r.cumulative_eta.into(),
            r.t_j.into(),
            r.mean_decode_time.into(),
            r.p_loss.into(),
            r.min_fidelity.into(),
        ])?;
    }

    let mut summary_table =
        ResultTable::new("sweep_summary", &["quantity", "mean", "std", "count"]);
    let mut summary = serde_json::Map::new();
    for q in [
        "eta1",
        "memories",
        "cumulative_eta",
        "t_j",
        "mean_decode_time",
        "p_loss",
    ] {
        let xs = table.floats(q);
        let stats = mean_std(&xs);
        summary_table.push_row(vec![
            q.into(),
            stats.map(|s| s.0).into(),
            stats.map(|s| s.1).into(),
            xs.len().into(),
        ])?;
        summary.insert(
            q.into(),
            json!({ "mean": stats.map(|s| s.0), "std": stats.map(|s| s.1), "count": xs.len() }),
        );
    }
    let worst = rows
        .iter()
        .filter_map(|r| r.min_fidelity)
        .fold(1.0f64, f64::min);
    let unreached = rows.iter().filter(|r| r.memories.is_none()).count();
    let conclusive = 1.0 - worst <= FIDELITY_TOL;
    summary.insert("worst_fidelity".into(), json!(worst));
    summary.insert("target_not_reached".into(), json!(unreached));
    summary.insert("conclusive".into(), json!(conclusive));
    Ok(ExperimentOutput {
        experiment: Experiment::Sweep,
        tables: vec![table, summary_table],
        summary: Value::Object(summary),
        seeds: rows.iter().map(|r| r.seed).collect(),
        passed: conclusive,
    })
}

/// Outcome of one self-check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

fn random_spec<R: Rng>(rng: &mut R, n: usize) -> Result<ChainSpec> {
    DisorderModel::new(1.0, 0.3, rng.gen())?.sample(n)
}

fn oracle_check(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..config.seeds.min(50) {
        let n = rng.gen_range(2..=4);
        let k = rng.gen_range(1..=3);
        let spec = random_spec(rng, n)?;
        let intervals: Vec<f64> = (0..k)
            .map(|_| rng.gen_range(0.05..2.0 * n as f64))
            .collect();
        let psi = QubitState::random(rng);
        let engine = engine_trace(psi, &spec, &intervals, k, config.cooling)?;
        let oracle = full_run(psi, &spec, &intervals, k, config.cooling)?;
        let eq = equivalence_check(&engine, &oracle.trace, ORACLE_TOL);
        worst = worst.max(eq.max_deviation);
        if !eq.passed {
            log::error!("oracle mismatch at {}", eq.location);
            worst = worst.max(f64::INFINITY);
        }
    }
    Ok(Check::new("oracle_equivalence", worst, ORACLE_TOL))
}

fn conclusiveness_checks(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut fid = 0.0f64;
    let mut indep = 0.0f64;
    let mut budget = 0.0f64;
    for &n in &config.n_values {
        let spec = ChainSpec::uniform(n, 1.0)?;
        let sd = spec.spectral()?;
        let g = greedy_optimize_schedule(&spec, config.steps.min(20), &config.search())?;
        let etas = g.etas();
        let options = ProtocolOptions {
            cooling: config.cooling,
        };
        for _ in 0..config.seeds {
            let psi = QubitState::random(rng);
            let run = run_protocol(psi, &sd, g.schedule.intervals(), options)?;
            if let Some(f) = run.decode.min_fidelity() {
                fid = fid.max(1.0 - f);
            }
            for (a, b) in run.decode.etas().iter().zip(&etas) {
                indep = indep.max((a - b).abs());
            }
            let total = run.decode.cumulative_eta + run.decode.failure_probability + run.p_loss;
            budget = budget.max((total - 1.0).abs());
        }
    }
    Ok(vec![
        Check::new("conclusive_fidelity", fid, FIDELITY_TOL),
        Check::new("input_independent_eta", indep, IDENTITY_TOL),
        Check::new("probability_budget", budget, IDENTITY_TOL),
    ])
}

fn nested_sum_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let spec = random_spec(rng, n)?;
        let sd = spec.spectral()?;
        let intervals: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..3.0)).collect();
        let mut state = init_state(QubitState::ground(), Topology::new(n, intervals.len())?)?;
        state.encode_cnot()?;
        state.set_switch(SwitchConfig::A2Connected);
        transfer_run(&mut state, &sd, &intervals)?;
        let direct = nested_sum_memory_amplitudes(&spec, &intervals);
        for (a, b) in state.memories().iter().zip(&direct) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(Check::new("nested_sum", worst, IDENTITY_TOL))
}

fn spectral_checks(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut closed = 0.0f64;
    let mut resid = 0.0f64;
    let mut unitary = 0.0f64;
    for &n in &config.n_values {
        let spec = ChainSpec::uniform(n, 1.0)?;
        let numeric = spectral_decompose(&spec.hamiltonian())?;
        let exact = SpectralData::uniform(n, 1.0);
        let t = rng.gen_range(0.1..10.0);
        closed = closed.max((numeric.propagator(t) - exact.propagator(t)).camax());

        let random = random_spec(rng, n)?;
        let sd = spectral_decompose(&random.hamiltonian())?;
        resid = resid.max(sd.residual(&random.hamiltonian()));
        resid = resid.max(sd.orthogonality_error());
        let u = sd.propagator(t);
        let id = nalgebra::DMatrix::<num_complex::Complex64>::identity(n, n);
        unitary = unitary.max((&u * u.adjoint() - id).camax());
    }
    Ok(vec![
        Check::new("closed_form_spectrum", closed, IDENTITY_TOL),
        Check::new("eigen_residual", resid, crate::chain::SPECTRAL_TOL),
        Check::new("unitarity", unitary, IDENTITY_TOL),
    ])
}

/// Cross-checks the engine against independent routes and its own invariants.
pub fn cmd_verify(config: &RunConfig) -> Result<ExperimentOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = vec![oracle_check(config, &mut rng)?];
    checks.extend(conclusiveness_checks(config, &mut rng)?);
    checks.push(nested_sum_check(&mut rng)?);
    checks.extend(spectral_checks(config, &mut rng)?);

    let mut table = ResultTable::new("verify", &["check", "max_deviation", "tolerance", "passed"]);
    for c in &checks {
        table.push_row(vec![
            c.name.as_str().into(),
            c.max_deviation.into(),
            c.tolerance.into(),
            c.passed.into(),
        ])?;
        if c.passed {
            log::info!(
                "{}: {:.3e} (tol {:.0e})",
                c.name,
                c.max_deviation,
                c.tolerance
            );
        } else {
            log::error!(
                "{} FAILED: {:.3e} (tol {:.0e})",
                c.name,
                c.max_deviation,
                c.tolerance
            );
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ExperimentOutput {
        experiment: Experiment::Verify,
        tables: vec![table],
        summary: json!({ "checks": checks, "passed": passed }),
        seeds: vec![config.seed],
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(e: Experiment) -> RunConfig {
        RunConfig {
            grid: 400,
            seeds: 4,
            ..RunConfig::defaults(e)
        }
    }

    #[test]
    fn fig2_short_chains_are_perfect() {
        let c = RunConfig {
            n_values: vec![2, 3, 4],
            ..small(Experiment::Fig2)
        };
        let out = run_experiment(&c).unwrap();
        let eta = out.tables[0].floats("max_eta1");
        assert!((eta[0] - 1.0).abs() < 1e-9 && (eta[1] - 1.0).abs() < 1e-9);
        assert!(eta[2] < 1.0 - 1e-3);
    }

    #[test]
    fn fig3_rows_are_monotone() {
        let c = RunConfig {
            n_values: vec![5],
            steps: 6,
            ..small(Experiment::Fig3)
        };
        let out = run_experiment(&c).unwrap();
        let t = &out.tables[0];
        assert_eq!(t.n_rows(), 6);
        let cum = t.floats("cumulative_eta");
        assert!(cum.windows(2).all(|w| w[1] >= w[0]));
        assert!(cum.iter().all(|&c| (0.0..=1.0 + 1e-12).contains(&c)));
    }

    #[test]
    fn zero_spread_sweep_matches_uniform() {
        let c = RunConfig {
            delta: 0.0,
            n_values: vec![5],
            steps: 10,
            ..small(Experiment::Sweep)
        };
        let out = run_experiment(&c).unwrap();
        assert!(out.passed);
        let eta1 = out.tables[0].floats("eta1");
        let uniform = max_eta1_curve(&[5], &c.search()).unwrap()[0].max_eta1;
        for e in eta1 {
            assert_eq!(e, uniform);
        }
    }

    #[test]
    fn verify_passes() {
        let c = RunConfig {
            n_values: vec![2, 4],
            ..small(Experiment::Verify)
        };
        let out = run_experiment(&c).unwrap();
        assert!(out.passed, "{}", out.summary);
    }
}
