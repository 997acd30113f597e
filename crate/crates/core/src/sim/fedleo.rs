use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fl::{aggregate_global, aggregate_partial, ModelState};
use crate::link::{downlink_latency, uplink_latency};
use crate::orbital::{AccessWindow, SatId};
use crate::scheduler::{propagate_on_ring, relay_time_to_sink, select_sink, SinkContext};
use crate::seed::{derive_seed, Stream};

use super::event::{Event, EventKind, EventQueue, Subject};
use super::{star_orbit_schedule, Env, OrbitTiming, Protocol, RoundRecord, RunResult, SimSetup, Termination, Workload};

/// Progress of one orbit inside the current round.
#[derive(Debug, Default)]
struct OrbitState {
    broadcast: f64,
    t0: f64,
    last_receive: f64,
    trained: usize,
    trained_all: f64,
    relay: f64,
    window: Option<AccessWindow<f64>>,
    upload_start: f64,
    upload_end: Option<f64>,
    timing: OrbitTiming,
}

enum Outcome {
    Done { end: f64, orbits: Vec<OrbitTiming> },
    Stopped(Termination),
}

struct Round<'e, 'a> {
    env: &'e Env<'a>,
    round: usize,
    start: f64,
    queue: EventQueue,
    orbits: Vec<OrbitState>,
    /// End times of uploads currently holding a resource block.
    busy: Vec<f64>,
    rng: ChaCha8Rng,
    events: &'e mut Vec<Event>,
    diagnostics: &'e mut Vec<String>,
}

impl Round<'_, '_> {
    fn starve(&mut self, t: f64, orbit: usize, msg: String) -> Outcome {
        self.diagnostics.push(format!("round {}: {msg}", self.round));
        self.events
            .push(Event::new(t, EventKind::Starved, Subject::Orbit(orbit), self.round).with_detail(msg));
        Outcome::Stopped(Termination::Starved { round: self.round, orbit })
    }

    /// Schedules the ground-station broadcast to `orbit`: the first contact
    /// of any of its satellites that fits an uplink; every satellite in view
    /// at that instant becomes a source.
    fn plan_broadcast(&mut self, orbit: usize) -> Result<std::result::Result<(), String>> {
        let env = self.env;
        let setup = env.setup;
        let k = env.sats_per_orbit();
        let up_est = uplink_latency(&setup.budget, &setup.payload, env.slant_range)?;
        let first = (0..k)
            .filter_map(|s| env.next_contact(SatId::new(orbit, s), self.start, up_est).map(|(t, _)| t))
            .min_by(f64::total_cmp);
        let Some(b) = first else {
            return Ok(Err(format!("orbit {orbit}: no broadcast contact after t = {:.2}", self.start)));
        };
        let mut sources = Vec::new();
        let mut slowest: f64 = 0.0;
        for s in 0..k {
            let id = SatId::new(orbit, s);
            if env.windows(id).iter().any(|w| w.contains(b) && w.t_end - b >= up_est) {
                sources.push(s);
                slowest = slowest.max(uplink_latency(&setup.budget, &setup.payload, env.distance(id, b)?)?);
                self.queue.push(Event::new(b, EventKind::BroadcastStart, Subject::Sat(id), self.round));
            }
        }
        let t0 = b + slowest;
        let plan = propagate_on_ring(orbit, k, &sources, &setup.payload, &setup.budget, t0)?;
        for s in 0..k {
            let id = SatId::new(orbit, s);
            let received = plan.receive_time[s];
            self.queue.push(
                Event::new(received, EventKind::ModelReceived, Subject::Sat(id), self.round)
                    .with_detail(format!("hops={}", plan.receive_hops[s])),
            );
            self.queue.push(Event::new(
                received + env.training_time(id)?,
                EventKind::TrainComplete,
                Subject::Sat(id),
                self.round,
            ));
        }
        let st = &mut self.orbits[orbit];
        st.broadcast = b;
        st.t0 = t0;
        st.last_receive = plan.last_receive();
        st.timing.orbit = orbit;
        st.timing.sources = plan.source_slots.len();
        st.timing.duplicate_drops = plan.duplicate_drops;
        st.timing.t_train_max = env.orbit_train_max(orbit)?;
        Ok(Ok(()))
    }

    /// Sink selection once every satellite of `orbit` has trained. Falls back
    /// to the rest of the horizon when the configured look-ahead is too short.
    fn choose_sink(&mut self, orbit: usize, t: f64) -> Result<std::result::Result<(), String>> {
        let env = self.env;
        let windows = env.table.orbit(orbit);
        let t_train = self.orbits[orbit].timing.t_train_max;
        let ctx = env.sink_context();
        let decision = match select_sink(&ctx, orbit, &windows, t, t_train) {
            Ok(d) => d,
            Err(Error::Unschedulable(msg)) => {
                let rest = env.setup.horizon - t;
                if rest <= ctx.lookahead {
                    return Ok(Err(msg));
                }
                let wide = SinkContext { lookahead: rest, ..ctx };
                match select_sink(&wide, orbit, &windows, t, t_train) {
                    Ok(d) => {
                        self.diagnostics.push(format!(
                            "round {}: orbit {orbit} sink found beyond the look-ahead",
                            self.round
                        ));
                        d
                    }
                    Err(Error::Unschedulable(msg)) => return Ok(Err(msg)),
                    Err(e) => return Err(e),
                }
            }
            Err(e) => return Err(e),
        };
        let sink = SatId::new(orbit, decision.sink_slot);
        let relay = relay_time_to_sink(env.sats_per_orbit(), decision.sink_slot, &env.setup.payload, &env.setup.budget)?;
        self.queue.push(
            Event::new(t, EventKind::SinkSelected, Subject::Sat(sink), self.round).with_detail(format!(
                "t_sum_star={:.4};candidates={};window_start={:.2}",
                decision.t_sum_star,
                decision.candidates.len(),
                decision.chosen_window.t_start
            )),
        );
        self.queue.push(Event::new(t + relay, EventKind::RelayComplete, Subject::Sat(sink), self.round));
        let st = &mut self.orbits[orbit];
        st.trained_all = t;
        st.relay = relay;
        st.window = Some(decision.chosen_window);
        st.timing.sink = Some(sink);
        st.timing.t_sum_star_estimate = Some(decision.t_sum_star);
        Ok(Ok(()))
    }

    /// Slotted-ALOHA access to the ground station's resource blocks. Returns
    /// the upload end, or `None` after scheduling a retry.
    fn try_upload(&mut self, sink: SatId, t: f64) -> Result<std::result::Result<Option<f64>, String>> {
        let env = self.env;
        let setup = env.setup;
        self.busy.retain(|&end| end > t);
        if self.busy.len() >= setup.budget.num_resource_blocks {
            let backoff = self.rng.random_range(1..=setup.aloha_max_backoff.max(1));
            let retry = t.floor() + f64::from(backoff);
            let down_est = downlink_latency(&setup.budget, &setup.payload, env.slant_range)?;
            let st = &mut self.orbits[sink.orbit];
            let window = st.window.expect("sink chosen before upload");
            let at = if window.t_end - retry.max(window.t_start) >= down_est {
                retry.max(window.t_start)
            } else {
                match env.next_contact(sink, retry, down_est) {
                    Some((at, w)) => {
                        st.window = Some(w);
                        at
                    }
                    None => return Ok(Err(format!("{sink}: no upload contact after t = {retry:.2}"))),
                }
            };
            self.queue.push(
                Event::new(at, EventKind::SinkUploadStart, Subject::Sat(sink), self.round)
                    .with_detail(format!("aloha-retry={backoff}")),
            );
            return Ok(Ok(None));
        }
        let down = downlink_latency(&setup.budget, &setup.payload, env.distance(sink, t)?)?;
        let end = t + down;
        self.busy.push(end);
        self.orbits[sink.orbit].upload_start = t;
        self.queue
            .push(Event::new(end, EventKind::SinkUploadComplete, Subject::Sat(sink), self.round));
        Ok(Ok(Some(end)))
    }

    fn run(mut self) -> Result<Outcome> {
        let env = self.env;
        let num_orbits = env.num_orbits();
        let k = env.sats_per_orbit();
        for orbit in 0..num_orbits {
            if let Err(msg) = self.plan_broadcast(orbit)? {
                self.diagnostics.push(format!("round {}: {msg}", self.round));
                return Ok(Outcome::Stopped(Termination::Horizon { round: self.round }));
            }
        }
        let mut finished = 0;
        while let Some(e) = self.queue.pop() {
            if e.time > env.setup.horizon {
                self.diagnostics
                    .push(format!("round {}: horizon ended before all partial models arrived", self.round));
                return Ok(Outcome::Stopped(Termination::Horizon { round: self.round }));
            }
            let t = e.time;
            let kind = e.kind;
            let subject = e.subject;
            let mut record = Some(e);
            match (kind, subject) {
                (EventKind::TrainComplete, Subject::Sat(id)) => {
                    let st = &mut self.orbits[id.orbit];
                    st.trained += 1;
                    if st.trained == k {
                        self.events.extend(record.take());
                        if let Err(msg) = self.choose_sink(id.orbit, t)? {
                            return Ok(self.starve(t, id.orbit, msg));
                        }
                    }
                }
                (EventKind::RelayComplete, Subject::Sat(id)) => {
                    let window = self.orbits[id.orbit].window.expect("sink chosen before relay");
                    let at = window.t_start.max(t);
                    self.queue
                        .push(Event::new(at, EventKind::SinkUploadStart, Subject::Sat(id), self.round));
                }
                (EventKind::SinkUploadStart, Subject::Sat(id)) => {
                    if let Some(ev) = record.take() {
                        self.events.push(ev);
                    }
                    match self.try_upload(id, t)? {
                        Err(msg) => return Ok(self.starve(t, id.orbit, msg)),
                        Ok(_) => {}
                    }
                }
                (EventKind::SinkUploadComplete, Subject::Sat(id)) => {
                    self.orbits[id.orbit].upload_end = Some(t);
                    finished += 1;
                    if finished == num_orbits {
                        self.events.extend(record.take());
                        break;
                    }
                }
                _ => {}
            }
            self.events.extend(record);
        }
        let start = self.start;
        let mut end = start;
        let orbits = self
            .orbits
            .into_iter()
            .map(|st| {
                let upload_end = st.upload_end.expect("every orbit uploaded");
                end = end.max(upload_end);
                let mut tm = st.timing;
                tm.t_wait_broadcast = st.broadcast - start;
                tm.t_uplink = st.t0 - st.broadcast;
                tm.t_propagation = st.last_receive - st.t0;
                tm.t_train = st.trained_all - st.last_receive;
                tm.t_relay = st.relay;
                tm.t_wait_sink = st.upload_start - st.trained_all - st.relay;
                tm.t_downlink = upload_end - st.upload_start;
                tm.total = upload_end - start;
                tm
            })
            .collect();
        Ok(Outcome::Done { end, orbits })
    }
}

/// Runs FedLEO: per round the ground station broadcasts to each orbit, the
/// model floods the ring, satellites train, the chosen sink collects and
/// averages the orbit's models and uploads the partial model. The ground
/// station aggregates once all orbits have reported.
pub fn run_fedleo(setup: &SimSetup, workload: &Workload) -> Result<RunResult> {
    let env = Env::new(setup, workload)?;
    let num_orbits = env.num_orbits();
    let k = env.sats_per_orbit();
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
        let locals = env.train_all(&global, round)?;
        let round_state = Round {
            env: &env,
            round,
            start,
            queue: EventQueue::new(),
            orbits: (0..num_orbits).map(|_| OrbitState::default()).collect(),
            busy: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(derive_seed(setup.seed, Stream::Aloha, round as u64, 0)),
            events: &mut events,
            diagnostics: &mut diagnostics,
        };
        let (end, mut orbits) = match round_state.run()? {
            Outcome::Done { end, orbits } => (end, orbits),
            Outcome::Stopped(t) => break t,
        };
        for tm in &mut orbits {
            tm.star_t_sum = match star_orbit_schedule(&env, tm.orbit, start) {
                Ok(s) => Some(s.t_sum()),
                Err(Error::Unschedulable(_)) => None,
                Err(e) => return Err(e),
            };
        }

        let partials = locals
            .chunks(k)
            .map(aggregate_partial)
            .collect::<Result<Vec<ModelState<f64>>>>()?;
        events.push(Event::new(end, EventKind::GlobalAggregate, Subject::Gs, round));
        global = aggregate_global(&partials, num_orbits, setup.weighting)?;
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
            orbits,
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
        protocol: Protocol::FedLeo,
        setup: setup.clone(),
        rounds,
        events,
        diagnostics,
        termination,
        final_model: global,
        model_history: history,
    })
}
