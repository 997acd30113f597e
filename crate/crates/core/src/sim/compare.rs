use crate::error::{Error, Result};

use super::{Protocol, RunResult};

/// One round of the side-by-side comparison. Columns are `None` once a
/// protocol has stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub round: usize,
    pub fedleo_wall_time: Option<f64>,
    pub fedleo_elapsed: Option<f64>,
    pub fedleo_accuracy: Option<f64>,
    pub star_wall_time: Option<f64>,
    pub star_elapsed: Option<f64>,
    pub star_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub fedleo_rounds: usize,
    pub star_rounds: usize,
    pub fedleo_mean_round: Option<f64>,
    pub star_mean_round: Option<f64>,
    /// Star mean round time over FedLEO mean round time.
    pub speedup: Option<f64>,
    pub target_accuracy: Option<f64>,
    /// Simulated time at which each protocol first reached the target.
    pub fedleo_time_to_target: Option<f64>,
    pub star_time_to_target: Option<f64>,
}

/// Lines up a FedLEO run and a star run made from the same setup.
pub fn compare(fedleo: &RunResult, star: &RunResult) -> Result<Comparison> {
    if fedleo.protocol != Protocol::FedLeo || star.protocol != Protocol::Star {
        return Err(Error::Invalid("compare expects a fedleo run and a star run".into()));
    }
    if fedleo.setup != star.setup {
        return Err(Error::Invalid("runs were made from different setups".into()));
    }
    let n = fedleo.rounds.len().max(star.rounds.len());
    let rows = (0..n)
        .map(|i| {
            let f = fedleo.rounds.get(i);
            let s = star.rounds.get(i);
            ComparisonRow {
                round: i,
                fedleo_wall_time: f.map(|r| r.round_wall_time),
                fedleo_elapsed: f.map(|r| r.t_end),
                fedleo_accuracy: f.map(|r| r.global_accuracy),
                star_wall_time: s.map(|r| r.round_wall_time),
                star_elapsed: s.map(|r| r.t_end),
                star_accuracy: s.map(|r| r.global_accuracy),
            }
        })
        .collect();
    let fedleo_mean_round = fedleo.mean_round_time();
    let star_mean_round = star.mean_round_time();
    let speedup = match (fedleo_mean_round, star_mean_round) {
        (Some(f), Some(s)) if f > 0.0 => Some(s / f),
        _ => None,
    };
    let target = fedleo.setup.target_accuracy;
    let reach = |r: &RunResult| target.and_then(|t| r.rounds_to_accuracy(t)).map(|r| r.t_end);
    Ok(Comparison {
        rows,
        fedleo_rounds: fedleo.rounds.len(),
        star_rounds: star.rounds.len(),
        fedleo_mean_round,
        star_mean_round,
        speedup,
        target_accuracy: target,
        fedleo_time_to_target: reach(fedleo),
        star_time_to_target: reach(star),
    })
}
