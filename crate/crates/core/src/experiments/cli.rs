use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime};

use super::commands::run_experiment;
use super::config::{parse_n_range, Experiment, RunConfig};
use super::{write_outputs, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use crate::error::Result;
use crate::units::TimeConvention;

#[derive(Debug, Parser)]
#[command(
    name = "qst",
    version,
    about = "Conclusive state transfer through a spin chain with memories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best first-step success probability against chain length
    Fig2(Opts),
    /// Cumulative success against greedy step
    Fig3(Opts),
    /// Memory budget and decoding time at a physical coupling
    Example5(Opts),
    /// Random-coupling sweep
    Sweep(Opts),
    /// Oracle and invariant self-checks (non-zero exit on failure)
    Verify(Opts),
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Single chain length
    #[arg(long, conflicts_with = "n_range")]
    pub n: Option<usize>,
    /// Chain lengths as `A:B` (inclusive) or `5,10,20`
    #[arg(long)]
    pub n_range: Option<String>,
    /// Greedy step cap
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub eta_target: Option<f64>,
    /// Relative coupling spread
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of realizations / random inputs
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Base seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Search window in units of 1/J (default 2N/J)
    #[arg(long)]
    pub tau_window: Option<f64>,
    /// Grid points per search window
    #[arg(long, alias = "resolution")]
    pub grid: Option<usize>,
    /// Coupling in kelvin for physical times
    #[arg(long)]
    pub j_units_kelvin: Option<f64>,
    /// `h` (coupling as cyclic frequency) or `hbar`
    #[arg(long)]
    pub time_convention: Option<TimeConvention>,
    /// Keep the residual chain amplitude instead of cooling it away
    #[arg(long)]
    pub no_cooling: bool,
    /// Output directory
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
}

impl Command {
    fn parts(&self) -> (Experiment, &Opts) {
        match self {
            Command::Fig2(o) => (Experiment::Fig2, o),
            Command::Fig3(o) => (Experiment::Fig3, o),
            Command::Example5(o) => (Experiment::Example5, o),
            Command::Sweep(o) => (Experiment::Sweep, o),
            Command::Verify(o) => (Experiment::Verify, o),
        }
    }
}

impl Opts {
    pub fn to_config(&self, experiment: Experiment) -> Result<RunConfig> {
        let mut c = RunConfig::defaults(experiment);
        if let Some(n) = self.n {
            c.n_values = vec![n];
        }
        if let Some(r) = &self.n_range {
            c.n_values = parse_n_range(r)?;
        }
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        set!(steps => steps, eta_target => eta_target, delta => delta, seeds => seeds,
             seed => seed, grid => grid, time_convention => time_convention);
        if self.tau_window.is_some() {
            c.tau_window = self.tau_window;
        }
        if self.j_units_kelvin.is_some() {
            c.j_kelvin = self.j_units_kelvin;
        }
        c.cooling = !self.no_cooling;
        c.validate()?;
        Ok(c)
    }
}

/// Parses arguments, runs the experiment, writes outputs. Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let (experiment, opts) = cli.command.parts();
    let config = opts.to_config(experiment)?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let output = run_experiment(&config)?;
    let manifest = write_outputs(&opts.out, &config, &output, started, clock.elapsed())?;
    println!("{}", serde_json::to_string_pretty(&output.summary)?);
    println!("wrote {}", manifest.display());
    if !output.passed {
        eprintln!("{experiment}: checks failed");
    }
    Ok(output.passed)
}
