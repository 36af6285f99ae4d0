//! Random-coupling sweep through the experiment layer; prints the summary table.
//!
//! cargo run --release --example disorder_sweep -- 0.2

use conclusive_qst::experiments::{run_experiment, Experiment, RunConfig};

fn main() -> conclusive_qst::Result<()> {
    let delta: f64 = std::env::args()
        .nth(1)
        .map_or(0.1, |s| s.parse().expect("spread"));
    let config = RunConfig {
        delta,
        seeds: 32,
        n_values: vec![8],
        ..RunConfig::defaults(Experiment::Sweep)
    };
    let out = run_experiment(&config)?;
    print!("{}", out.tables[1].to_csv_string(&[])?);
    println!("all successful branches exact: {}", out.passed);
    Ok(())
}
