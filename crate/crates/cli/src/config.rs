use std::path::{Path, PathBuf};

use clap::Args as ClapArgs;
use hdx_core::complex::DEFAULT_GROUP_BUDGET;
use hdx_core::global_code::{ViewMode, DEFAULT_RANK_BUDGET};
use hdx_core::local_decoder::DEFAULT_ENUM_BUDGET;
use hdx_core::{HdxError, Result};
use serde::Serialize;

#[derive(ClapArgs, Debug, Clone, Default)]
pub struct Args {
    /// Field size (prime).
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Degree of the modulus phi.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Modulus coefficients, low to high, comma separated; or "auto".
    #[arg(long, global = true)]
    pub phi: Option<String>,
    /// Edge degrees: a comma triple, or one value for all types.
    /// agree-local reads it as "dx,dy" or a single value.
    #[arg(long, global = true)]
    pub d: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Symbols (correct) or lines (agree-local) to corrupt per trial.
    #[arg(long, global = true)]
    pub corrupt: Option<usize>,
    /// Largest group the closure may enumerate.
    #[arg(long = "budget-group", global = true)]
    pub budget_group: Option<usize>,
    /// Largest number of triangles for exact elimination.
    #[arg(long = "budget-rank", global = true)]
    pub budget_rank: Option<usize>,
    /// Largest local codebook to enumerate.
    #[arg(long = "budget-enum", global = true)]
    pub budget_enum: Option<u64>,
    /// Instance file, or report files for `report` (repeat or comma separate).
    #[arg(long = "in", global = true, value_delimiter = ',')]
    pub input: Vec<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// View construction for `correct`: restrict | nearest.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Prime for the local-code commands.
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Largest dx and dy in the `localrate` sweep.
    #[arg(long, global = true)]
    pub dmax: Option<u32>,
}

/// Validated flags with defaults filled in; echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub q: u32,
    pub n: usize,
    /// `None` means the smallest primitive modulus.
    pub phi: Option<Vec<u32>>,
    pub degrees: Vec<u32>,
    pub seed: Option<u64>,
    pub trials: usize,
    pub corrupt: usize,
    pub budget_group: usize,
    pub budget_rank: usize,
    pub budget_enum: u64,
    pub input: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub mode: ViewMode,
    pub p: Option<u32>,
    pub dmax: Option<u32>,
    #[serde(skip)]
    q_given: bool,
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| HdxError::Parameter(format!("--{flag}: {t:?} is not a non-negative integer")))
        })
        .collect()
}

/// Commands whose output is a Monte Carlo estimate and so cannot run unseeded.
const SEEDED: [&str; 3] = ["agree-local", "correct", "multcheck"];

impl RunConfig {
    pub fn resolve(command: &str, a: &Args) -> Result<Self> {
        let q = a.q.unwrap_or(3);
        let n = a.n.unwrap_or(1);
        if n == 0 {
            return Err(HdxError::Parameter("--n must be at least 1".into()));
        }
        let phi = match a.phi.as_deref() {
            None | Some("auto") => None,
            Some(s) => Some(parse_list("phi", s)?),
        };
        let degrees = match a.d.as_deref() {
            None => vec![1, 1, 1],
            Some(s) => {
                let v = parse_list("d", s)?;
                let ok = match command {
                    "agree-local" => matches!(v.len(), 1 | 2),
                    _ => matches!(v.len(), 1 | 3),
                };
                if !ok {
                    return Err(HdxError::Parameter(format!("--d: {} values given", v.len())));
                }
                v
            }
        };
        if SEEDED.contains(&command) && a.seed.is_none() {
            return Err(HdxError::Parameter(format!("{command} needs --seed")));
        }
        let mode = match a.mode.as_deref() {
            None | Some("nearest") => ViewMode::Nearest,
            Some("restrict") => ViewMode::Restrict,
            Some(m) => {
                return Err(HdxError::Parameter(format!(
                    "--mode: {m:?} is not restrict|nearest"
                )))
            }
        };
        let trials = a.trials.unwrap_or(match command {
            "correct" => 20,
            _ => 100,
        });
        Ok(RunConfig {
            command: command.into(),
            q,
            n,
            phi,
            degrees,
            seed: a.seed,
            trials,
            corrupt: a.corrupt.unwrap_or(1),
            budget_group: a.budget_group.unwrap_or(DEFAULT_GROUP_BUDGET),
            budget_rank: a.budget_rank.unwrap_or(DEFAULT_RANK_BUDGET),
            budget_enum: a.budget_enum.unwrap_or(DEFAULT_ENUM_BUDGET),
            input: a.input.clone(),
            out: a.out.clone(),
            mode,
            p: a.p,
            dmax: a.dmax,
            q_given: a.q.is_some(),
        })
    }

    /// Edge degrees `[d1, d2, d3]`.
    pub fn triple(&self) -> [u32; 3] {
        match self.degrees[..] {
            [d] => [d; 3],
            [a, b, c] => [a, b, c],
            _ => unreachable!("validated in resolve"),
        }
    }

    /// Local degrees `(dx, dy)`.
    pub fn pair(&self) -> (u32, u32) {
        match self.degrees[..] {
            [d] => (d, d),
            [a, b, ..] => (a, b),
            [] => unreachable!("validated in resolve"),
        }
    }

    pub fn instance_path(&self) -> Option<&Path> {
        match &self.input[..] {
            [] => None,
            [p] => Some(p),
            _ => None,
        }
    }

    /// Rejects an explicit --q that contradicts a loaded instance.
    pub fn check_q(&self, loaded: u32) -> Result<()> {
        if self.q_given && self.q != loaded {
            return Err(HdxError::Parameter(format!(
                "--q {} contradicts the instance (q = {loaded})",
                self.q
            )));
        }
        Ok(())
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_parsing() {
        let c = RunConfig::resolve("code", &Args::default()).unwrap();
        assert_eq!((c.q, c.n, c.triple()), (3, 1, [1, 1, 1]));
        assert!(c.phi.is_none());

        let a = Args {
            phi: Some("2,1".into()),
            d: Some("2".into()),
            ..Args::default()
        };
        let c = RunConfig::resolve("code", &a).unwrap();
        assert_eq!(c.phi, Some(vec![2, 1]));
        assert_eq!(c.triple(), [2, 2, 2]);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |a: Args, cmd: &str| RunConfig::resolve(cmd, &a).is_err();
        assert!(bad(
            Args {
                d: Some("1,2".into()),
                ..Args::default()
            },
            "code"
        ));
        assert!(bad(
            Args {
                d: Some("x".into()),
                ..Args::default()
            },
            "code"
        ));
        assert!(bad(
            Args {
                mode: Some("fast".into()),
                seed: Some(1),
                ..Args::default()
            },
            "correct"
        ));
        assert!(bad(Args::default(), "agree-local"));
        assert!(!bad(
            Args {
                d: Some("1,2".into()),
                seed: Some(1),
                ..Args::default()
            },
            "agree-local"
        ));
    }
}
