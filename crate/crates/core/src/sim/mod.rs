//! Deterministic discrete-event execution of FedLEO rounds and of the
//! sequential star-topology baseline.

mod compare;
mod event;
mod fedleo;
mod star;

use std::fmt;

use rayon::prelude::*;

pub use compare::{compare, Comparison, ComparisonRow};
pub use event::{Event, EventKind, EventQueue, Subject};
pub use fedleo::run_fedleo;
pub(crate) use star::star_orbit_schedule;
pub use star::{run_star_baseline, StarSatellite, StarSchedule};

use crate::error::Result;
use crate::fl::{
    evaluate, global_loss, local_train, AggregationWeighting, DataShard, Dataset, ModelState, SoftmaxRegression,
    TrainingConfig,
};
use crate::link::{LinkBudget, PayloadSpec};
use crate::orbital::{
    compute_access_windows, slant_distance, AccessTable, AccessWindow, ConstellationSpec, GroundStation,
    PhysicalConstants, SatId, WindowSolver,
};
use crate::scheduler::{Admission, SinkContext};
use crate::seed::{derive_seed, Stream};

/// Everything the engines need besides the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSetup {
    pub constellation: ConstellationSpec<f64>,
    pub ground_station: GroundStation<f64>,
    pub constants: PhysicalConstants<f64>,
    pub budget: LinkBudget<f64>,
    pub payload: PayloadSpec,
    pub training: TrainingConfig<f64>,
    pub solver: WindowSolver<f64>,
    /// Simulated span `[0, horizon]` (s).
    pub horizon: f64,
    pub max_rounds: usize,
    pub target_accuracy: Option<f64>,
    pub seed: u64,
    pub admission: Admission,
    pub lookahead: f64,
    pub weighting: AggregationWeighting,
    /// Largest ALOHA back-off, in 1 s slots.
    pub aloha_max_backoff: u32,
}

/// Model family, per-satellite shards in (orbit, slot) order, and the
/// held-out test split.
#[derive(Debug, Clone)]
pub struct Workload {
    pub objective: SoftmaxRegression,
    pub shards: Vec<DataShard<f64>>,
    pub test: Dataset<f64>,
}

impl Workload {
    pub fn initial_model(&self) -> ModelState<f64> {
        ModelState::zeros(
            crate::fl::Objective::<f64>::num_params(&self.objective),
            self.objective.num_classes,
        )
    }
}

/// Timing of one orbit within one round. The phases add up to `total`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OrbitTiming {
    pub orbit: usize,
    pub sink: Option<SatId>,
    pub sources: usize,
    pub duplicate_drops: usize,
    pub t_wait_broadcast: f64,
    pub t_uplink: f64,
    pub t_propagation: f64,
    /// From the last model arrival to the last local training completion.
    pub t_train: f64,
    /// Longest single on-board training time, `t_train(K_l)`.
    pub t_train_max: f64,
    pub t_relay: f64,
    pub t_wait_sink: f64,
    pub t_downlink: f64,
    /// Elapsed time from round start to this orbit's partial reaching the GS.
    pub total: f64,
    /// Scheduler's `T*_sum` estimate for the chosen sink.
    pub t_sum_star_estimate: Option<f64>,
    /// Star-topology `T_sum` of this orbit from the same round start.
    pub star_t_sum: Option<f64>,
}

impl OrbitTiming {
    pub fn phase_sum(&self) -> f64 {
        self.t_wait_broadcast
            + self.t_uplink
            + self.t_propagation
            + self.t_train
            + self.t_relay
            + self.t_wait_sink
            + self.t_downlink
    }
}

/// One global round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub round_wall_time: f64,
    pub orbits: Vec<OrbitTiming>,
    pub global_accuracy: f64,
    pub global_loss: f64,
}

/// Which protocol produced a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    FedLeo,
    Star,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::FedLeo => "fedleo",
            Protocol::Star => "star",
        })
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    MaxRounds,
    TargetAccuracy,
    /// The horizon ended inside round `round`.
    Horizon { round: usize },
    /// An orbit could not be scheduled before the horizon ended.
    Starved { round: usize, orbit: usize },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub protocol: Protocol,
    pub setup: SimSetup,
    pub rounds: Vec<RoundRecord>,
    pub events: Vec<Event>,
    pub diagnostics: Vec<String>,
    pub termination: Termination,
    pub final_model: ModelState<f64>,
    /// Global models after each completed round.
    pub model_history: Vec<ModelState<f64>>,
}

impl RunResult {
    pub fn completed_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Time of the last global aggregation.
    pub fn elapsed(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.t_end)
    }

    pub fn mean_round_time(&self) -> Option<f64> {
        (!self.rounds.is_empty()).then(|| self.elapsed() / self.rounds.len() as f64)
    }

    /// First round whose global accuracy reaches `target`.
    pub fn rounds_to_accuracy(&self, target: f64) -> Option<&RoundRecord> {
        self.rounds.iter().find(|r| r.global_accuracy >= target)
    }
}

/// Access windows over `[0, horizon]` for the setup's constellation.
pub fn access_table(setup: &SimSetup) -> Result<AccessTable<f64>> {
    compute_access_windows(
        &setup.constellation,
        &setup.ground_station,
        &setup.constants,
        0.0,
        setup.horizon,
        &setup.solver,
    )
}

/// Shared per-run context: windows, link estimates and distance lookups.
pub(crate) struct Env<'a> {
    pub setup: &'a SimSetup,
    pub workload: &'a Workload,
    pub table: AccessTable<f64>,
    pub slant_range: f64,
}

impl<'a> Env<'a> {
    pub fn new(setup: &'a SimSetup, workload: &'a Workload) -> Result<Self> {
        let table = access_table(setup)?;
        let max_alt = setup.constellation.altitudes.iter().copied().fold(0.0, f64::max);
        let slant_range = setup
            .constants
            .slant_range(max_alt, setup.ground_station.min_elevation);
        Ok(Self { setup, workload, table, slant_range })
    }

    pub fn sats_per_orbit(&self) -> usize {
        self.setup.constellation.sats_per_orbit
    }

    pub fn num_orbits(&self) -> usize {
        self.setup.constellation.num_orbits
    }

    pub fn distance(&self, id: SatId, t: f64) -> Result<f64> {
        slant_distance(
            &self.setup.constellation,
            &self.setup.ground_station,
            &self.setup.constants,
            id,
            t,
        )
    }

    pub fn windows(&self, id: SatId) -> &[AccessWindow<f64>] {
        self.table.windows(id)
    }

    pub fn sink_context(&self) -> SinkContext<'_> {
        SinkContext {
            budget: &self.setup.budget,
            payload: &self.setup.payload,
            slant_range: self.slant_range,
            sats_per_orbit: self.sats_per_orbit(),
            lookahead: self.setup.lookahead,
            admission: self.setup.admission,
        }
    }

    pub fn shard(&self, id: SatId) -> &DataShard<f64> {
        &self.workload.shards[self.setup.constellation.index_of(id)]
    }

    pub fn training_time(&self, id: SatId) -> Result<f64> {
        crate::fl::training_time(self.shard(id).size(), &self.setup.training)
    }

    /// Longest on-board training time on `orbit`.
    pub fn orbit_train_max(&self, orbit: usize) -> Result<f64> {
        (0..self.sats_per_orbit())
            .map(|s| self.training_time(SatId::new(orbit, s)))
            .try_fold(0.0, |m, t| Ok(f64::max(m, t?)))
    }

    /// Local models of every satellite trained from `global` in round `round`,
    /// in (orbit, slot) order. Depends only on seeds, data and training config.
    pub fn train_all(&self, global: &ModelState<f64>, round: usize) -> Result<Vec<ModelState<f64>>> {
        let objective = &self.workload.objective;
        self.workload
            .shards
            .par_iter()
            .enumerate()
            .map(|(i, shard)| {
                let cfg = TrainingConfig {
                    seed: derive_seed(self.setup.seed, Stream::Shuffle, round as u64, i as u64),
                    ..self.setup.training.clone()
                };
                local_train(objective, global, &shard.data, &cfg)
            })
            .collect()
    }

    /// Test accuracy and training loss of a global model.
    pub fn score(&self, model: &ModelState<f64>) -> Result<(f64, f64)> {
        let objective = &self.workload.objective;
        let acc = evaluate(objective, &model.weights, &self.workload.test)?;
        let loss = global_loss(objective, &self.workload.shards, &model.weights)?;
        Ok((acc, loss))
    }

    /// Start of the first contact of `id` at or after `from` leaving at least
    /// `needed` seconds in the window.
    pub fn next_contact(&self, id: SatId, from: f64, needed: f64) -> Option<(f64, AccessWindow<f64>)> {
        self.windows(id)
            .iter()
            .find(|w| w.t_end - w.t_start.max(from) >= needed)
            .map(|w| (w.t_start.max(from), *w))
    }
}
