use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::orbital::SatId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    BroadcastStart,
    ModelReceived,
    TrainComplete,
    SinkSelected,
    RelayComplete,
    SinkUploadStart,
    SinkUploadComplete,
    GlobalAggregate,
    Eval,
    Starved,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::BroadcastStart => "broadcast-start",
            EventKind::ModelReceived => "model-received",
            EventKind::TrainComplete => "train-complete",
            EventKind::SinkSelected => "sink-selected",
            EventKind::RelayComplete => "relay-complete",
            EventKind::SinkUploadStart => "sink-upload-start",
            EventKind::SinkUploadComplete => "sink-upload-complete",
            EventKind::GlobalAggregate => "global-aggregate",
            EventKind::Eval => "eval",
            EventKind::Starved => "starved",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Gs,
    Orbit(usize),
    Sat(SatId),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Gs => f.write_str("gs"),
            Subject::Orbit(o) => write!(f, "orbit-{o}"),
            Subject::Sat(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub subject: Subject,
    pub round: usize,
    pub detail: String,
}

impl Event {
    pub fn new(time: f64, kind: EventKind, subject: Subject, round: usize) -> Self {
        Self { time, kind, subject, round, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

struct Queued {
    event: Event,
    seq: u64,
}

impl Queued {
    fn key(&self, other: &Self) -> Ordering {
        self.event
            .time
            .total_cmp(&other.event.time)
            .then(self.event.round.cmp(&other.event.round))
            .then(self.event.kind.cmp(&other.event.kind))
            .then(self.event.subject.cmp(&other.event.subject))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // reversed: BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other.key(self)
    }
}

/// Pending events, popped in `(time, round, kind, subject, insertion)` order.
#[derive(Default)]
pub struct EventQueue {
    heap: BinaryHeap<Queued>,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        debug_assert!(event.time.is_finite());
        self.seq += 1;
        self.heap.push(Queued { event, seq: self.seq });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|q| q.event)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|q| q.event.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_then_kind_then_subject_order() {
        let mut q = EventQueue::new();
        q.push(Event::new(5.0, EventKind::Eval, Subject::Gs, 0));
        q.push(Event::new(1.0, EventKind::TrainComplete, Subject::Sat(SatId::new(0, 1)), 0));
        q.push(Event::new(1.0, EventKind::TrainComplete, Subject::Sat(SatId::new(0, 0)), 0));
        q.push(Event::new(1.0, EventKind::ModelReceived, Subject::Sat(SatId::new(3, 3)), 0));
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).map(|e| (e.time, e.kind, e.subject)).collect();
        assert_eq!(
            order,
            vec![
                (1.0, EventKind::ModelReceived, Subject::Sat(SatId::new(3, 3))),
                (1.0, EventKind::TrainComplete, Subject::Sat(SatId::new(0, 0))),
                (1.0, EventKind::TrainComplete, Subject::Sat(SatId::new(0, 1))),
                (5.0, EventKind::Eval, Subject::Gs),
            ]
        );
    }
}
