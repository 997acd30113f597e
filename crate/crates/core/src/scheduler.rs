//! Intra-plane model propagation and per-orbit sink selection.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::link::{downlink_latency, isl_hop_time, uplink_latency, LinkBudget, PayloadSpec};
use crate::orbital::{ring_hop_distance, AccessWindow};

type Window = AccessWindow<f64>;

/// Arrival of the global model at every satellite of one orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationPlan {
    pub orbit: usize,
    pub source_slots: Vec<usize>,
    /// Indexed by slot.
    pub receive_time: Vec<f64>,
    /// Ring hops travelled by the first copy to reach each slot.
    pub receive_hops: Vec<usize>,
    /// Copies that reached an already-served satellite and were dropped.
    pub duplicate_drops: usize,
}

impl PropagationPlan {
    pub fn last_receive(&self) -> f64 {
        self.receive_time.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Floods the model around a `K`-ring from the satellites that heard the
/// ground station at `t0`. A satellite forwards its first copy to each ring
/// neighbour except the one it came from; sources skip neighbours that are
/// themselves sources, since those were served directly.
pub fn propagate_on_ring(
    orbit: usize,
    sats_per_orbit: usize,
    source_slots: &[usize],
    payload: &PayloadSpec,
    budget: &LinkBudget<f64>,
    t0: f64,
) -> Result<PropagationPlan> {
    if source_slots.is_empty() {
        return Err(Error::domain("propagation needs at least one source"));
    }
    let k = sats_per_orbit;
    if let Some(&bad) = source_slots.iter().find(|&&s| s >= k) {
        return Err(Error::IndexOutOfRange { what: "slot", index: bad, limit: k });
    }
    let hop = isl_hop_time(payload, budget)?;
    let neighbours = |s: usize| -> Vec<usize> {
        let mut n = vec![(s + 1) % k, (s + k - 1) % k];
        n.dedup();
        n.retain(|&x| x != s);
        n
    };
    let is_source: Vec<bool> = (0..k).map(|s| source_slots.contains(&s)).collect();

    let mut hops: Vec<Option<usize>> = vec![None; k];
    // (hop count, destination, sender)
    let mut queue: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::new();
    let mut duplicates = 0;
    for &s in source_slots {
        if hops[s].is_some() {
            continue;
        }
        hops[s] = Some(0);
    }
    for &s in source_slots {
        for n in neighbours(s) {
            if !is_source[n] {
                queue.push(Reverse((1, n, s)));
            }
        }
    }
    while let Some(Reverse((h, to, from))) = queue.pop() {
        if hops[to].is_some() {
            duplicates += 1;
            continue;
        }
        hops[to] = Some(h);
        for n in neighbours(to) {
            if n != from && !is_source[n] {
                queue.push(Reverse((h + 1, n, to)));
            }
        }
    }
    let receive_hops: Vec<usize> = hops.into_iter().map(|h| h.expect("ring is connected")).collect();
    let mut sources = source_slots.to_vec();
    sources.sort_unstable();
    sources.dedup();
    Ok(PropagationPlan {
        orbit,
        source_slots: sources,
        receive_time: receive_hops.iter().map(|&h| t0 + h as f64 * hop).collect(),
        receive_hops,
        duplicate_drops: duplicates,
    })
}

/// `t_h*`: the farthest satellite's relay time to the sink.
pub fn relay_time_to_sink(sats_per_orbit: usize, sink_slot: usize, payload: &PayloadSpec, budget: &LinkBudget<f64>) -> Result<f64> {
    if sink_slot >= sats_per_orbit {
        return Err(Error::IndexOutOfRange { what: "slot", index: sink_slot, limit: sats_per_orbit });
    }
    let hop = isl_hop_time(payload, budget)?;
    let max_hops = (0..sats_per_orbit)
        .filter(|&s| s != sink_slot)
        .map(|s| ring_hop_distance(s, sink_slot, sats_per_orbit))
        .max()
        .unwrap_or(0);
    Ok(max_hops as f64 * hop)
}

/// Which windows may host the sink's exchange with the ground station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Admission {
    /// The part of the window after the relayed models reach the sink must fit
    /// the partial-model upload plus the next global-model download.
    #[default]
    ContactTime,
    /// The whole window must be at least as long as the candidate's `T*_sum`.
    StrictTotal,
}

/// Shared inputs of every satellite's sink computation on one orbit.
#[derive(Debug, Clone)]
pub struct SinkContext<'a> {
    pub budget: &'a LinkBudget<f64>,
    pub payload: &'a PayloadSpec,
    /// Range assumed for ground-link latency estimates (m); the slant range
    /// at minimum elevation bounds every in-window distance.
    pub slant_range: f64,
    pub sats_per_orbit: usize,
    /// Windows opening later than `t_now + lookahead` are not considered.
    pub lookahead: f64,
    pub admission: Admission,
}

/// Terms of `T*_sum = t_c^U + t_c^D + t*_wait + t_train(K_l) + t_h*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    pub uplink: f64,
    pub downlink: f64,
    pub wait: f64,
    pub train: f64,
    pub relay: f64,
}

impl LatencyBreakdown {
    pub fn total(&self) -> f64 {
        self.uplink + self.downlink + self.wait + self.train + self.relay
    }
}

impl SinkContext<'_> {
    fn breakdown(&self, slot: usize, window: &Window, t_now: f64, t_train: f64) -> Result<LatencyBreakdown> {
        Ok(LatencyBreakdown {
            uplink: uplink_latency(self.budget, self.payload, self.slant_range)?,
            downlink: downlink_latency(self.budget, self.payload, self.slant_range)?,
            wait: (window.t_start - t_now).max(0.0),
            train: t_train,
            relay: relay_time_to_sink(self.sats_per_orbit, slot, self.payload, self.budget)?,
        })
    }

    fn admits(&self, window: &Window, t_now: f64, b: &LatencyBreakdown) -> bool {
        if window.t_end <= t_now || window.t_start > t_now + self.lookahead {
            return false;
        }
        match self.admission {
            Admission::ContactTime => {
                let usable_from = window.t_start.max(t_now + b.relay);
                window.t_end - usable_from >= b.uplink + b.downlink
            }
            Admission::StrictTotal => window.duration() >= b.total(),
        }
    }
}

/// `T*_sum` for a candidate sink using its next window that has not ended.
pub fn total_round_latency(
    ctx: &SinkContext<'_>,
    candidate_slot: usize,
    windows: &[Window],
    t_now: f64,
    t_train: f64,
) -> Result<LatencyBreakdown> {
    let next = windows
        .iter()
        .find(|w| w.t_end > t_now && w.t_start <= t_now + ctx.lookahead)
        .ok_or_else(|| Error::Unschedulable(format!("slot {candidate_slot} has no future window")))?;
    ctx.breakdown(candidate_slot, next, t_now, t_train)
}

/// Outcome of sink selection on one orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkDecision {
    pub orbit: usize,
    pub sink_slot: usize,
    /// `C_l`: slots with an admissible window.
    pub candidates: Vec<usize>,
    pub t_sum_star: f64,
    pub breakdown: LatencyBreakdown,
    pub chosen_window: Window,
}

/// Picks the orbit's sink: among slots whose first admissible window lies in
/// the look-ahead, minimise `T*_sum`; ties go to the earlier window, then the
/// lower slot. `windows_by_slot[s]` holds slot `s`'s windows in time order.
pub fn select_sink(
    ctx: &SinkContext<'_>,
    orbit: usize,
    windows_by_slot: &[&[Window]],
    t_now: f64,
    t_train: f64,
) -> Result<SinkDecision> {
    let mut candidates = Vec::new();
    let mut best: Option<(usize, LatencyBreakdown, Window)> = None;
    for (slot, windows) in windows_by_slot.iter().enumerate() {
        let mut admitted = None;
        for w in windows.iter() {
            if w.t_start > t_now + ctx.lookahead {
                break;
            }
            let b = ctx.breakdown(slot, w, t_now, t_train)?;
            if ctx.admits(w, t_now, &b) {
                admitted = Some((b, *w));
                break;
            }
        }
        let Some((b, w)) = admitted else { continue };
        candidates.push(slot);
        let better = match &best {
            None => true,
            Some((_, bb, bw)) => match b.total().total_cmp(&bb.total()) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => w.t_start < bw.t_start,
                std::cmp::Ordering::Greater => false,
            },
        };
        if better {
            best = Some((slot, b, w));
        }
    }
    let (sink_slot, breakdown, chosen_window) =
        best.ok_or_else(|| Error::Unschedulable(format!("orbit {orbit}: no admissible sink after t = {t_now:.2}")))?;
    Ok(SinkDecision {
        orbit,
        sink_slot,
        candidates,
        t_sum_star: breakdown.total(),
        breakdown,
        chosen_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::SatId;

    fn budget() -> LinkBudget<f64> {
        LinkBudget::default()
    }

    fn payload() -> PayloadSpec {
        PayloadSpec::from_bits(8_000_000)
    }

    fn win(slot: usize, a: f64, b: f64, r: usize) -> Window {
        AccessWindow { satellite: SatId::new(0, slot), t_start: a, t_end: b, visit_index: r }
    }

    fn ctx<'a>(b: &'a LinkBudget<f64>, p: &'a PayloadSpec, k: usize) -> SinkContext<'a> {
        SinkContext { budget: b, payload: p, slant_range: 1.5e6, sats_per_orbit: k, lookahead: 86_400.0, admission: Admission::ContactTime }
    }

    #[test]
    fn single_source_ring_times() {
        let plan = propagate_on_ring(0, 8, &[0], &payload(), &budget(), 10.0).unwrap();
        let rel: Vec<f64> = plan.receive_time.iter().map(|t| t - 10.0).collect();
        assert_eq!(rel, vec![0.0, 0.5, 1.0, 1.5, 2.0, 1.5, 1.0, 0.5]);
        assert_eq!(plan.last_receive() - 10.0, 2.0);
        // fronts meet at slot 4: one copy from each side, plus slot 4 echoing onward
        assert_eq!(plan.duplicate_drops, 2);
    }

    #[test]
    fn all_sources_need_no_relay() {
        let all: Vec<usize> = (0..8).collect();
        let plan = propagate_on_ring(1, 8, &all, &payload(), &budget(), 3.0).unwrap();
        assert!(plan.receive_time.iter().all(|&t| t == 3.0));
        assert_eq!(plan.duplicate_drops, 0);
    }

    #[test]
    fn antipodal_sources() {
        let plan = propagate_on_ring(0, 8, &[0, 4], &payload(), &budget(), 0.0).unwrap();
        assert_eq!(plan.last_receive(), 1.0);
        assert!(propagate_on_ring(0, 8, &[], &payload(), &budget(), 0.0).is_err());
        assert!(propagate_on_ring(0, 8, &[8], &payload(), &budget(), 0.0).is_err());
    }

    #[test]
    fn relay_time() {
        assert_eq!(relay_time_to_sink(8, 3, &payload(), &budget()).unwrap(), 2.0);
        assert_eq!(relay_time_to_sink(1, 0, &payload(), &budget()).unwrap(), 0.0);
        let big = PayloadSpec::from_bits(16_000_000);
        assert_eq!(relay_time_to_sink(8, 0, &big, &budget()).unwrap(), 4.0);
    }

    #[test]
    fn round_latency_example() {
        let (b, p) = (budget(), payload());
        let c = ctx(&b, &p, 8);
        let lat = total_round_latency(&c, 0, &[win(0, 600.0, 1500.0, 1)], 0.0, 0.1024).unwrap();
        // 0.505 + 0.505 + 600 + 0.1024 + 2.0
        assert!((lat.total() - 603.1124).abs() < 1e-3, "{}", lat.total());
        let inside = total_round_latency(&c, 0, &[win(0, -10.0, 900.0, 1)], 0.0, 0.1024).unwrap();
        assert_eq!(inside.wait, 0.0);
        let later = total_round_latency(&c, 0, &[win(0, 700.0, 1500.0, 1)], 0.0, 0.1024).unwrap();
        assert!((later.total() - lat.total() - 100.0).abs() < 1e-9);
        assert!(matches!(total_round_latency(&c, 0, &[win(0, -20.0, -1.0, 1)], 0.0, 0.1), Err(Error::Unschedulable(_))));
    }

    #[test]
    fn single_satellite_is_sink() {
        let (b, p) = (budget(), payload());
        let ws = [win(0, 50.0, 900.0, 1)];
        let d = select_sink(&ctx(&b, &p, 1), 2, &[&ws], 0.0, 0.01).unwrap();
        assert_eq!(d.sink_slot, 0);
        assert_eq!(d.candidates, vec![0]);
        assert_eq!(d.orbit, 2);
    }

    #[test]
    fn earlier_window_wins_and_short_windows_are_rejected() {
        let (b, p) = (budget(), payload());
        let w0 = [win(0, 500.0, 900.0, 1)];
        let w1 = [win(1, 300.0, 301.0, 1), win(1, 700.0, 1200.0, 2)];
        let w2 = [win(2, 400.0, 1000.0, 1)];
        let d = select_sink(&ctx(&b, &p, 3), 0, &[&w0, &w1, &w2], 0.0, 0.0).unwrap();
        assert_eq!(d.sink_slot, 2);
        assert_eq!(d.candidates, vec![0, 1, 2]);
        assert!(d.chosen_window.duration() >= d.breakdown.uplink + d.breakdown.downlink);
    }

    #[test]
    fn open_windows_tie_break_on_start_then_slot() {
        let (b, p) = (budget(), payload());
        let w0 = [win(0, -5.0, 900.0, 1)];
        let w1 = [win(1, -50.0, 900.0, 1)];
        let w2 = [win(2, -50.0, 900.0, 1)];
        let d = select_sink(&ctx(&b, &p, 3), 0, &[&w0, &w1, &w2], 0.0, 0.0).unwrap();
        assert_eq!(d.sink_slot, 1);
    }

    #[test]
    fn strict_admission_uses_total() {
        let (b, p) = (budget(), payload());
        let mut c = ctx(&b, &p, 2);
        c.admission = Admission::StrictTotal;
        let w0 = [win(0, 100.0, 150.0, 1)];
        let w1 = [win(1, 200.0, 500.0, 1)];
        let d = select_sink(&c, 0, &[&w0, &w1], 0.0, 0.0).unwrap();
        assert_eq!(d.sink_slot, 1);
        assert!(d.chosen_window.duration() >= d.t_sum_star);
    }

    #[test]
    fn no_candidate_is_unschedulable() {
        let (b, p) = (budget(), payload());
        let w0 = [win(0, 100_000.0, 100_500.0, 1)];
        assert!(matches!(select_sink(&ctx(&b, &p, 1), 0, &[&w0], 0.0, 0.0), Err(Error::Unschedulable(_))));
    }
}
