use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{QstError, Result};
use crate::schedule::{SearchConfig, DEFAULT_RESOLUTION, MIN_RESOLUTION};
use crate::units::TimeConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig2,
    Fig3,
    Example5,
    Sweep,
    Verify,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Example5,
        Experiment::Sweep,
        Experiment::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Example5 => "example5",
            Experiment::Sweep => "sweep",
            Experiment::Verify => "verify",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = QstError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| QstError::Config(format!("unknown experiment {s:?}")))
    }
}

/// Everything a run depends on. Serialized verbatim into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Chain lengths.
    pub n_values: Vec<usize>,
    /// Greedy step cap.
    pub steps: usize,
    pub eta_target: f64,
    /// Relative coupling spread for the disorder sweep.
    pub delta: f64,
    /// Number of disorder realizations (sweep) or random inputs (verify).
    pub seeds: usize,
    /// Base seed; realization `i` uses `seed + i`.
    pub seed: u64,
    /// Greedy search window in natural units; `None` scales with N.
    pub tau_window: Option<f64>,
    pub grid: usize,
    pub j_kelvin: Option<f64>,
    pub time_convention: TimeConvention,
    pub cooling: bool,
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = RunConfig {
            experiment,
            n_values: vec![10],
            steps: 40,
            eta_target: 0.99,
            delta: 0.1,
            seeds: 100,
            seed: 1,
            tau_window: None,
            grid: DEFAULT_RESOLUTION,
            j_kelvin: None,
            time_convention: TimeConvention::default(),
            cooling: true,
        };
        match experiment {
            Experiment::Fig2 => RunConfig {
                n_values: (2..=30).collect(),
                ..base
            },
            Experiment::Fig3 => RunConfig {
                n_values: vec![5, 10, 20, 30],
                eta_target: 0.95,
                ..base
            },
            Experiment::Example5 => RunConfig {
                j_kelvin: Some(20.0),
                ..base
            },
            Experiment::Sweep => base,
            Experiment::Verify => RunConfig {
                n_values: vec![2, 3, 5, 8],
                ..base
            },
        }
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            window: self.tau_window,
            resolution: self.grid,
        }
    }

    /// Sub-seed of realization `i`.
    pub fn seed_for(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QstError::Config(msg));
        if self.n_values.is_empty() {
            return bad("at least one chain length is required".into());
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return bad(format!("chain length must be at least 2, got {n}"));
        }
        if self.steps == 0 {
            return bad("--steps must be positive".into());
        }
        if !(self.eta_target > 0.0 && self.eta_target < 1.0) {
            return bad(format!(
                "--eta-target must lie in (0, 1), got {}",
                self.eta_target
            ));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad(format!("--delta must lie in [0, 1), got {}", self.delta));
        }
        if self.seeds == 0 {
            return bad("--seeds must be positive".into());
        }
        if self.grid < MIN_RESOLUTION {
            return bad(format!(
                "--grid must be at least {MIN_RESOLUTION}, got {}",
                self.grid
            ));
        }
        if let Some(w) = self.tau_window {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("--tau-window must be positive, got {w}"));
            }
        }
        if let Some(j) = self.j_kelvin {
            if !(j.is_finite() && j > 0.0) {
                return bad(format!("--j-units-kelvin must be positive, got {j}"));
            }
        }
        Ok(())
    }
}

/// Parses `A:B` (inclusive) or a comma list `5,10,20`.
pub fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| QstError::Config(format!("bad chain length {t:?} in {s:?}")))
    };
    let out: Vec<usize> = if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(QstError::Config(format!("empty range {s:?}")));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(QstError::Config(format!("empty range {s:?}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for e in Experiment::ALL {
            RunConfig::defaults(e).validate().unwrap();
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn rejects_bad_values() {
        let base = RunConfig::defaults(Experiment::Sweep);
        let cases = [
            RunConfig {
                n_values: vec![1],
                ..base.clone()
            },
            RunConfig {
                delta: 1.0,
                ..base.clone()
            },
            RunConfig {
                eta_target: 1.0,
                ..base.clone()
            },
            RunConfig {
                grid: 10,
                ..base.clone()
            },
            RunConfig {
                tau_window: Some(-1.0),
                ..base.clone()
            },
            RunConfig {
                seeds: 0,
                ..base.clone()
            },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_n_range("2:5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_n_range("5, 10,20").unwrap(), vec![5, 10, 20]);
        assert!(parse_n_range("5:2").is_err());
        assert!(parse_n_range("x").is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = RunConfig::defaults(Experiment::Example5);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }
}
