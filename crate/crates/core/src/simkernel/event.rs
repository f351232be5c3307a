//! Time-ordered future event set.
//!
//! Events with equal timestamps pop in the order they were scheduled, so a
//! run is a pure function of the scenario and seed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::forwarding::GpsrHeader;
use crate::geometry::Position;
use crate::neighbor::{NodeId, BEACON_WIRE_LEN};

use super::SimError;

/// Simulation time in seconds.
pub type SimTime = f64;

/// A routed data packet as it travels one link: the GPSR header plus the
/// link-layer addressing and the piggybacked sender position.
#[derive(Debug, Clone)]
pub struct DataFrame {
    pub link_from: NodeId,
    /// Transmitter position at wire precision, harvested by every listener.
    pub link_from_pos: Position,
    /// Link-layer next hop; only this node runs the packet through GPSR.
    pub link_to: NodeId,
    pub header: GpsrHeader,
}

/// Anything a radio puts on the air.
#[derive(Debug, Clone)]
pub enum Frame {
    /// Encoded beacon image; receivers decode it on delivery.
    Beacon([u8; BEACON_WIRE_LEN]),
    Data(DataFrame),
}

#[derive(Debug, Clone)]
pub enum EventKind {
    TransmitBeacon { node: NodeId },
    RadioDeliver { to: NodeId, frame: Frame },
    EvictCheck { node: NodeId },
    OriginatePacket { flow: usize, sequence: u32 },
    MobilityUpdate { node: NodeId },
    SimulationEnd,
}

#[derive(Debug, Clone)]
pub struct Event {
    pub time: SimTime,
    pub kind: EventKind,
}

struct QueuedEvent {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl Eq for QueuedEvent {}

impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // inverted: BinaryHeap is a max-heap, we want the earliest event
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Future events ordered by (time, scheduling sequence).
pub struct EventQueue {
    heap: BinaryHeap<QueuedEvent>,
    next_seq: u64,
    now: SimTime,
}

impl EventQueue {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
        }
    }

    /// Current simulation time: the timestamp of the last popped event.
    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Schedules an event; scheduling into the past is a fatal error.
    pub fn schedule(&mut self, time: SimTime, kind: EventKind) -> Result<(), SimError> {
        if !(time >= self.now) {
            return Err(SimError::SchedulePast {
                event_time: time,
                now: self.now,
            });
        }
        self.heap.push(QueuedEvent {
            time,
            seq: self.next_seq,
            kind,
        });
        self.next_seq += 1;
        Ok(())
    }

    /// Pops the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Event> {
        let e = self.heap.pop()?;
        debug_assert!(e.time >= self.now, "event queue went backwards");
        self.now = e.time;
        Some(Event {
            time: e.time,
            kind: e.kind,
        })
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Drains the remaining events without advancing the clock.
    pub fn drain(&mut self) -> Vec<Event> {
        let mut rest: Vec<QueuedEvent> = self.heap.drain().collect();
        rest.sort_by(|a, b| a.time.total_cmp(&b.time).then_with(|| a.seq.cmp(&b.seq)));
        rest.into_iter()
            .map(|e| Event {
                time: e.time,
                kind: e.kind,
            })
            .collect()
    }
}

impl Default for EventQueue {
    fn default() -> Self {
        Self::new()
    }
}
