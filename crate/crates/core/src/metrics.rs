//! Team error, group regret, and Monte-Carlo aggregation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bandit::Bandit;
use crate::coopucb2::{StepLog, TeamState};
use crate::{Error, Result};

/// Per-round signed team error of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub run: u64,
    pub delta: Vec<f64>,
}

impl ErrorCurve {
    pub fn from_logs(run: u64, logs: &[StepLog]) -> Self {
        ErrorCurve { run, delta: logs.iter().map(|log| log.delta).collect() }
    }
}

/// Pointwise mean and standard error across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: usize,
}

impl AggregateCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("empty curve")
    }
}

/// Signed team-average error of the best-arm estimate:
/// `(1/M) * sum_k (reward_mass_k / pull_mass_k - best_mean)`.
pub fn team_error(state: &TeamState, best_mean: f64, best_arm: usize) -> Result<f64> {
    state.mean_estimate_error(best_arm, best_mean)
}

/// Cumulative group regret series recomputed from the logged actions.
pub fn group_regret(logs: &[StepLog], bandit: &Bandit) -> Vec<f64> {
    let gaps = bandit.regret_weights();
    let mut total = 0.0;
    logs.iter()
        .map(|log| {
            total += log.actions.iter().map(|&a| gaps[a]).sum::<f64>();
            total
        })
        .collect()
}

/// Pointwise mean and standard error over runs of equal length.
pub fn aggregate(curves: &[ErrorCurve]) -> Result<AggregateCurve> {
    let Some(first) = curves.first() else {
        return Err(Error::InvalidParameter {
            name: "curves",
            message: "need at least one run".to_string(),
        });
    };
    let len = first.delta.len();
    for curve in curves {
        if curve.delta.len() != len {
            return Err(Error::DimensionMismatch {
                expected: alloc::format!("curves of length {len}"),
                got: alloc::format!("run {} has length {}", curve.run, curve.delta.len()),
            });
        }
    }
    let runs = curves.len();
    let mut mean = Vec::with_capacity(len);
    let mut stderr = Vec::with_capacity(len);
    for t in 0..len {
        let m = curves.iter().map(|c| c.delta[t]).sum::<f64>() / runs as f64;
        mean.push(m);
        if runs < 2 {
            stderr.push(0.0);
        } else {
            let var = curves.iter().map(|c| (c.delta[t] - m) * (c.delta[t] - m)).sum::<f64>()
                / (runs - 1) as f64;
            stderr.push(libm::sqrt(var / runs as f64));
        }
    }
    Ok(AggregateCurve { mean, stderr, runs })
}

/// Whether and when a curve settles under the shared threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettlingStatus {
    /// First index after which the error magnitude stays below the
    /// threshold through the end of the curve.
    Settled(usize),
    /// The curve still exceeds the threshold at its final point.
    NotSettled,
}

impl SettlingStatus {
    pub fn settled_index(self) -> Option<usize> {
        match self {
            SettlingStatus::Settled(i) => Some(i),
            SettlingStatus::NotSettled => None,
        }
    }
}

/// Settling times of a family of aggregate curves.
///
/// The shared threshold is `fraction` times the largest final error
/// magnitude among the curves. A curve settles at the first index from which
/// `|mean|` stays below the threshold through the horizon (a curve that
/// rises above it again later has not settled at the earlier dip).
pub fn settling_time(
    curves: &BTreeMap<String, AggregateCurve>,
    fraction: f64,
) -> Result<BTreeMap<String, SettlingStatus>> {
    let mut iter = curves.values();
    let Some(first) = iter.next() else {
        return Err(Error::InvalidParameter {
            name: "curves",
            message: "need at least one curve".to_string(),
        });
    };
    for curve in curves.values() {
        if curve.len() != first.len() || curve.runs != first.runs {
            return Err(Error::DimensionMismatch {
                expected: alloc::format!("{} points over {} runs", first.len(), first.runs),
                got: alloc::format!("{} points over {} runs", curve.len(), curve.runs),
            });
        }
    }
    if first.is_empty() {
        return Err(Error::InvalidParameter {
            name: "curves",
            message: "curves are empty".to_string(),
        });
    }
    let threshold = fraction
        * curves
            .values()
            .map(|c| libm::fabs(c.final_mean()))
            .fold(0.0, f64::max);
    let below = |v: f64| {
        if threshold > 0.0 {
            libm::fabs(v) < threshold
        } else {
            v == 0.0
        }
    };
    let mut out = BTreeMap::new();
    for (name, curve) in curves {
        let last_above = curve.mean.iter().rposition(|&v| !below(v));
        let status = match last_above {
            None => SettlingStatus::Settled(0),
            Some(i) if i + 1 < curve.len() => SettlingStatus::Settled(i + 1),
            Some(_) => SettlingStatus::NotSettled,
        };
        out.insert(name.clone(), status);
    }
    Ok(out)
}
