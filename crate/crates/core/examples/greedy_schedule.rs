//! Greedy step-by-step schedule and its success profile.
//!
//! cargo run --example greedy_schedule -- 20 15

use conclusive_qst::chain::ChainSpec;
use conclusive_qst::schedule::{greedy_optimize_schedule, EtaProfile, SearchConfig};

fn main() -> conclusive_qst::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10, |s| s.parse().expect("chain length"));
    let steps: usize = args.next().map_or(20, |s| s.parse().expect("step count"));

    let spec = ChainSpec::uniform(n, 1.0)?;
    let g = greedy_optimize_schedule(&spec, steps, &SearchConfig::default())?;
    let p = EtaProfile::from_etas(g.etas());
    println!("N = {n}, search window {:.1}", g.window);
    println!("step      tau        t       eta   cumulative");
    for (i, t) in g.schedule.cumulative().iter().enumerate() {
        println!(
            "{:>4} {:>8.4} {:>8.3} {:>9.6} {:>10.6}{}",
            i + 1,
            g.schedule.intervals()[i],
            t,
            p.per_step[i],
            p.cumulative[i],
            if g.steps[i].at_window_edge {
                "  (window edge)"
            } else {
                ""
            }
        );
    }
    Ok(())
}
