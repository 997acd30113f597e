use crate::error::{Error, Result};
use crate::fl::aggregate_global;
use crate::link::{downlink_latency, uplink_latency};
use crate::orbital::SatId;

use super::event::{Event, EventKind, EventQueue, Subject};
use super::{Env, OrbitTiming, Protocol, RoundRecord, RunResult, SimSetup, Termination, Workload};

/// One satellite's turn in the sequential star exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct StarSatellite {
    pub id: SatId,
    pub contact_start: f64,
    /// Idle time before this satellite's contact, counted from the previous
    /// satellite's upload end (or the round start).
    pub wait: f64,
    pub download: f64,
    pub train: f64,
    /// Extra wait for the next contact when training overran the current one.
    pub second_wait: f64,
    pub upload_start: f64,
    pub upload: f64,
    pub upload_end: f64,
}

impl StarSatellite {
    pub fn same_contact(&self) -> bool {
        self.second_wait == 0.0
    }
}

/// Sequential star-topology exchange of one orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct StarSchedule {
    pub orbit: usize,
    pub start: f64,
    pub satellites: Vec<StarSatellite>,
}

impl StarSchedule {
    pub fn end(&self) -> f64 {
        self.satellites.last().map_or(self.start, |s| s.upload_end)
    }

    /// `T_sum = Σ_k (2·t_c + t_wait [+ t_wait] + t_train)`.
    pub fn t_sum(&self) -> f64 {
        self.satellites
            .iter()
            .map(|s| s.wait + s.download + s.train + s.second_wait + s.upload)
            .sum()
    }
}

/// Serves the satellites of `orbit` one at a time from `start`: the next
/// satellite is the one whose usable contact opens first (lowest slot on
/// ties). It downloads the global model, trains, and uploads in the same
/// contact when training and upload fit, otherwise in its next contact.
pub(crate) fn star_orbit_schedule(env: &Env<'_>, orbit: usize, start: f64) -> Result<StarSchedule> {
    let budget = &env.setup.budget;
    let payload = &env.setup.payload;
    let up_est = uplink_latency(budget, payload, env.slant_range)?;
    let down_est = downlink_latency(budget, payload, env.slant_range)?;
    let mut pending: Vec<usize> = (0..env.sats_per_orbit()).collect();
    let mut cursor = start;
    let mut satellites = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, &slot) in pending.iter().enumerate() {
            if let Some((t, w)) = env.next_contact(SatId::new(orbit, slot), cursor, up_est) {
                if best.is_none_or(|(_, bt, _)| t < bt) {
                    best = Some((i, t, w.t_end));
                }
            }
        }
        let (i, contact, contact_end) = best.ok_or_else(|| {
            Error::Unschedulable(format!("star: orbit {orbit} has no contact after t = {cursor:.2}"))
        })?;
        let id = SatId::new(orbit, pending.remove(i));
        let download = uplink_latency(budget, payload, env.distance(id, contact)?)?;
        let train = env.training_time(id)?;
        let trained = contact + download + train;
        let upload_start = if trained + down_est <= contact_end {
            trained
        } else {
            env.next_contact(id, trained, down_est)
                .map(|(t, _)| t)
                .ok_or_else(|| Error::Unschedulable(format!("star: {id} has no upload contact after t = {trained:.2}")))?
        };
        let upload = downlink_latency(budget, payload, env.distance(id, upload_start)?)?;
        satellites.push(StarSatellite {
            id,
            contact_start: contact,
            wait: contact - cursor,
            download,
            train,
            second_wait: upload_start - trained,
            upload_start,
            upload,
            upload_end: upload_start + upload,
        });
        cursor = upload_start + upload;
    }
    Ok(StarSchedule { orbit, start, satellites })
}

fn star_timing(s: &StarSchedule) -> OrbitTiming {
    let sum = |f: fn(&StarSatellite) -> f64| s.satellites.iter().map(f).sum::<f64>();
    OrbitTiming {
        orbit: s.orbit,
        sink: None,
        sources: s.satellites.len(),
        duplicate_drops: 0,
        t_wait_broadcast: sum(|x| x.wait),
        t_uplink: sum(|x| x.download),
        t_propagation: 0.0,
        t_train: sum(|x| x.train),
        t_train_max: s.satellites.iter().map(|x| x.train).fold(0.0, f64::max),
        t_relay: 0.0,
        t_wait_sink: sum(|x| x.second_wait),
        t_downlink: sum(|x| x.upload),
        total: s.end() - s.start,
        t_sum_star_estimate: None,
        star_t_sum: Some(s.t_sum()),
    }
}

/// Runs the star-topology baseline: per round and per orbit, satellites
/// exchange models with the ground station one after another; the ground
/// station aggregates all local models at once (flat FedAvg) when every
/// orbit has finished.
pub fn run_star_baseline(setup: &SimSetup, workload: &Workload) -> Result<RunResult> {
    let env = Env::new(setup, workload)?;
    let mut global = workload.initial_model();
    let mut rounds = Vec::new();
    let mut events = Vec::new();
    let mut diagnostics = Vec::new();
    let mut history = Vec::new();
    let mut start = 0.0;
    let termination = loop {
        let round = rounds.len();
        if round >= setup.max_rounds {
            break Termination::MaxRounds;
        }
        let mut schedules = Vec::with_capacity(env.num_orbits());
        let mut starved = None;
        for orbit in 0..env.num_orbits() {
            match star_orbit_schedule(&env, orbit, start) {
                Ok(s) => schedules.push(s),
                Err(Error::Unschedulable(msg)) => {
                    starved = Some(msg);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(msg) = starved {
            // no contact left in the window table
            diagnostics.push(format!("round {round}: {msg}"));
            break Termination::Horizon { round };
        }

        let mut queue = EventQueue::new();
        for s in &schedules {
            for x in &s.satellites {
                let sat = Subject::Sat(x.id);
                queue.push(Event::new(x.contact_start, EventKind::BroadcastStart, sat, round));
                queue.push(Event::new(x.contact_start + x.download, EventKind::ModelReceived, sat, round));
                queue.push(Event::new(x.contact_start + x.download + x.train, EventKind::TrainComplete, sat, round));
                let how = if x.same_contact() { "same-contact" } else { "next-contact" };
                queue.push(Event::new(x.upload_start, EventKind::SinkUploadStart, sat, round).with_detail(how));
                queue.push(Event::new(x.upload_end, EventKind::SinkUploadComplete, sat, round));
            }
        }
        let end = schedules.iter().map(StarSchedule::end).fold(start, f64::max);
        queue.push(Event::new(end, EventKind::GlobalAggregate, Subject::Gs, round));
        let mut past_horizon = false;
        while let Some(e) = queue.pop() {
            if e.time > setup.horizon {
                past_horizon = true;
                break;
            }
            events.push(e);
        }
        if past_horizon {
            diagnostics.push(format!("round {round}: horizon ended before all models arrived"));
            break Termination::Horizon { round };
        }

        let locals = env.train_all(&global, round)?;
        global = aggregate_global(&locals, locals.len(), setup.weighting)?;
        let (accuracy, loss) = env.score(&global)?;
        events.push(
            Event::new(end, EventKind::Eval, Subject::Gs, round)
                .with_detail(format!("accuracy={accuracy:.6};loss={loss:.6}")),
        );
        rounds.push(RoundRecord {
            round,
            t_start: start,
            t_end: end,
            round_wall_time: end - start,
            orbits: schedules.iter().map(star_timing).collect(),
            global_accuracy: accuracy,
            global_loss: loss,
        });
        history.push(global.clone());
        start = end;
        if setup.target_accuracy.is_some_and(|t| accuracy >= t) {
            break Termination::TargetAccuracy;
        }
    };
    Ok(RunResult {
        protocol: Protocol::Star,
        setup: setup.clone(),
        rounds,
        events,
        diagnostics,
        termination,
        final_model: global,
        model_history: history,
    })
}
