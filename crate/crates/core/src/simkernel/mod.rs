//! Deterministic discrete-event engine.
//!
//! One [`World`] is strictly single-threaded: the event loop is the only
//! mutator, and all randomness flows from the scenario seed, partitioned
//! into one stream per node and purpose. Running the same scenario with the
//! same seed twice produces byte-identical traces and statistics. Distinct
//! worlds share nothing and may run in parallel.
//!
//! The radio is an idealized unit disk: a frame reaches every other node
//! within range at transmit time, after a fixed propagation delay, subject
//! to an optional loss draw. Beacons are broadcast; data frames name a
//! link-layer next hop but are overheard by everyone in range, and every
//! listener harvests the piggybacked sender position.

pub mod event;
pub mod mobility;
pub mod trace;

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forwarding::{self, ForwardDecision, GpsrHeader, GpsrMode, LocalView};
use crate::geometry::{distance, Position};
use crate::neighbor::{
    decode_beacon, encode_beacon, next_beacon_time, to_wire_precision, Beacon, CodecError,
    NeighborTable, NodeId,
};
use crate::scenario::ScenarioConfig;
use crate::stats::SimStats;

use event::{DataFrame, EventKind, EventQueue, Frame, SimTime};
use mobility::MobilitySpec;
use trace::{TraceRecord, TraceTag, TraceWriter};

/// Fatal simulation errors; anything that would corrupt determinism or the
/// trace contract aborts the run.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("cannot schedule an event at {event_time:.6}: simulation time is already {now:.6}")]
    SchedulePast { event_time: f64, now: f64 },
    #[error("trace records must be time-ordered: got {record_time:.6} after {last_time:.6}")]
    TraceOrder { record_time: f64, last_time: f64 },
    #[error("beacon codec: {0}")]
    Codec(#[from] CodecError),
    #[error("trace sink: {0}")]
    Io(#[from] std::io::Error),
}

/// Randomness purposes, mixed into per-node stream seeds.
mod purpose {
    pub const JITTER: u64 = 1;
    pub const LOSS: u64 = 2;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic per-(seed, node, purpose) stream seed.
fn stream_seed(base: u64, node: NodeId, purpose: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(u64::from(node.0))) ^ purpose)
}

struct SimNode {
    mobility: MobilitySpec,
    table: NeighborTable,
    jitter_rng: ChaCha8Rng,
    loss_rng: ChaCha8Rng,
}

/// A complete simulation instance: scenario, nodes, queue, trace and stats.
pub struct World {
    config: ScenarioConfig,
    nodes: BTreeMap<NodeId, SimNode>,
    queue: EventQueue,
    trace: Option<TraceWriter<Box<dyn Write + Send>>>,
    stats: SimStats,
    next_packet_id: u64,
}

impl World {
    /// Builds a world and seeds the queue with each node's first beacon and
    /// eviction check, every flow origination, and the mobility updates.
    pub fn new(
        config: ScenarioConfig,
        trace: Option<Box<dyn Write + Send>>,
    ) -> Result<Self, SimError> {
        let seed = config.seed;
        let mut nodes = BTreeMap::new();
        for &(id, pos) in &config.nodes {
            let waypoints = config.mobility.get(&id).cloned().unwrap_or_default();
            let mobility = if waypoints.is_empty() {
                MobilitySpec::fixed(pos)
            } else {
                MobilitySpec::new(pos, waypoints)
            };
            nodes.insert(
                id,
                SimNode {
                    mobility,
                    table: NeighborTable::new(config.neighbor_timeout),
                    jitter_rng: ChaCha8Rng::seed_from_u64(stream_seed(
                        seed,
                        id,
                        purpose::JITTER,
                    )),
                    loss_rng: ChaCha8Rng::seed_from_u64(stream_seed(seed, id, purpose::LOSS)),
                },
            );
        }

        let mut world = World {
            config,
            nodes,
            queue: EventQueue::new(),
            trace: trace.map(TraceWriter::new),
            stats: SimStats::default(),
            next_packet_id: 0,
        };

        let interval = world.config.beacon_interval;
        let ids: Vec<NodeId> = world.nodes.keys().copied().collect();
        for id in ids {
            let node = world.nodes.get_mut(&id).expect("node exists");
            let first_beacon = next_beacon_time(interval, 0.0, &mut node.jitter_rng);
            world
                .queue
                .schedule(first_beacon, EventKind::TransmitBeacon { node: id })?;
            world
                .queue
                .schedule(interval, EventKind::EvictCheck { node: id })?;
            let waypoint_times: Vec<SimTime> = world.nodes[&id]
                .mobility
                .waypoints()
                .iter()
                .map(|&(t, _)| t)
                .collect();
            for t in waypoint_times {
                world
                    .queue
                    .schedule(t, EventKind::MobilityUpdate { node: id })?;
            }
        }
        for (i, flow) in world.config.flows.iter().enumerate() {
            world.queue.schedule(
                flow.start,
                EventKind::OriginatePacket {
                    flow: i,
                    sequence: 0,
                },
            )?;
        }
        Ok(world)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Ground-truth position of a node at time `t`.
    pub fn position_of(&self, node: NodeId, t: SimTime) -> Position {
        self.nodes[&node].mobility.position_at(t)
    }

    fn wire_position_of(&self, node: NodeId, t: SimTime) -> Position {
        to_wire_precision(self.position_of(node, t))
    }

    fn emit(&mut self, record: TraceRecord) -> Result<(), SimError> {
        if let Some(w) = self.trace.as_mut() {
            w.emit(&record)?;
        }
        Ok(())
    }

    /// Runs the event loop until the queue empties or `until` is reached,
    /// then accounts for packets still in flight.
    pub fn run(&mut self, until: SimTime) -> Result<SimStats, SimError> {
        self.queue.schedule(until, EventKind::SimulationEnd)?;
        while let Some(ev) = self.queue.pop() {
            let now = ev.time;
            match ev.kind {
                EventKind::SimulationEnd => break,
                EventKind::TransmitBeacon { node } => self.on_transmit_beacon(node, now)?,
                EventKind::RadioDeliver { to, frame } => self.on_radio_deliver(to, frame, now)?,
                EventKind::EvictCheck { node } => self.on_evict_check(node, now)?,
                EventKind::OriginatePacket { flow, sequence } => {
                    self.on_originate(flow, sequence, now)?
                }
                EventKind::MobilityUpdate { node } => {
                    let p = self.position_of(node, now);
                    self.emit(TraceRecord::at(now, TraceTag::Move, node, p.x, p.y))?;
                }
            }
        }
        for ev in self.queue.drain() {
            if let EventKind::RadioDeliver {
                to,
                frame: Frame::Data(df),
            } = ev.kind
            {
                if df.link_to == to {
                    self.stats.in_flight += 1;
                }
            }
        }
        if let Some(w) = self.trace.as_mut() {
            w.flush()?;
        }
        debug_assert!(self.stats.conservation_holds());
        Ok(self.stats.clone())
    }

    fn on_transmit_beacon(&mut self, node: NodeId, now: SimTime) -> Result<(), SimError> {
        let pos = self.position_of(node, now);
        self.emit(TraceRecord::at(now, TraceTag::Beacon, node, pos.x, pos.y))?;
        self.stats.beacons_sent += 1;
        let image = encode_beacon(&Beacon {
            sender: node,
            position: pos,
        })?;
        self.transmit(node, Frame::Beacon(image), now)?;
        let interval = self.config.beacon_interval;
        let rng = &mut self.nodes.get_mut(&node).expect("node exists").jitter_rng;
        let next = next_beacon_time(interval, now, rng);
        self.queue
            .schedule(next, EventKind::TransmitBeacon { node })
    }

    /// Unit-disk broadcast: schedules a delivery for every other node in
    /// range at transmit time that survives the loss draw. A data frame
    /// whose addressed next hop misses out is charged as a link drop.
    fn transmit(&mut self, sender: NodeId, frame: Frame, now: SimTime) -> Result<(), SimError> {
        let tx_pos = self.position_of(sender, now);
        let in_range: Vec<NodeId> = self
            .nodes
            .keys()
            .copied()
            .filter(|&id| id != sender)
            .filter(|&id| distance(tx_pos, self.position_of(id, now)) <= self.config.radio_range)
            .collect();
        let loss = self.config.loss;
        let mut reached_link_target = false;
        for id in in_range {
            if loss > 0.0 {
                let rng = &mut self.nodes.get_mut(&sender).expect("node exists").loss_rng;
                if rng.random::<f64>() < loss {
                    continue;
                }
            }
            if let Frame::Data(df) = &frame {
                if df.link_to == id {
                    reached_link_target = true;
                }
            }
            self.queue.schedule(
                now + self.config.delay,
                EventKind::RadioDeliver {
                    to: id,
                    frame: frame.clone(),
                },
            )?;
        }
        if let Frame::Data(df) = &frame {
            if !reached_link_target {
                self.stats.dropped_link += 1;
                let mut rec = TraceRecord::at(now, TraceTag::Drop, sender, tx_pos.x, tx_pos.y);
                rec.packet = Some(df.header.packet_id);
                rec.src = Some(df.header.source);
                rec.dst = Some(df.header.destination);
                rec.mode = Some(df.header.mode);
                rec.extra = Some(format!("LINK_LOST:{}", df.link_to));
                self.emit(rec)?;
            }
        }
        Ok(())
    }

    fn on_radio_deliver(&mut self, to: NodeId, frame: Frame, now: SimTime) -> Result<(), SimError> {
        match frame {
            Frame::Beacon(image) => {
                let beacon = decode_beacon(&image)?;
                self.hear(to, beacon.sender, beacon.position, now)?;
            }
            Frame::Data(df) => {
                self.hear(to, df.link_from, df.link_from_pos, now)?;
                if df.link_to == to {
                    self.process_packet(to, df.header, Some((df.link_from, df.link_from_pos)), now)?;
                }
            }
        }
        Ok(())
    }

    /// Single table-update path for beacons and piggybacked positions.
    fn hear(
        &mut self,
        listener: NodeId,
        heard: NodeId,
        position: Position,
        now: SimTime,
    ) -> Result<(), SimError> {
        let node = self.nodes.get_mut(&listener).expect("node exists");
        node.table.on_heard(heard, position, now);
        let mut rec = TraceRecord::at(now, TraceTag::Heard, listener, position.x, position.y);
        rec.extra = Some(heard.to_string());
        self.emit(rec)
    }

    fn on_evict_check(&mut self, node: NodeId, now: SimTime) -> Result<(), SimError> {
        let evicted = self
            .nodes
            .get_mut(&node)
            .expect("node exists")
            .table
            .evict_stale(now);
        if !evicted.is_empty() {
            let pos = self.position_of(node, now);
            for gone in evicted {
                let mut rec = TraceRecord::at(now, TraceTag::Evict, node, pos.x, pos.y);
                rec.extra = Some(gone.to_string());
                self.emit(rec)?;
            }
        }
        self.queue.schedule(
            now + self.config.beacon_interval,
            EventKind::EvictCheck { node },
        )
    }

    fn on_originate(&mut self, flow: usize, sequence: u32, now: SimTime) -> Result<(), SimError> {
        let f = self.config.flows[flow].clone();
        let packet_id = self.next_packet_id;
        self.next_packet_id += 1;
        self.stats.originated += 1;
        // the source stamps the destination position from scenario ground
        // truth: an idealized location service
        let dest_position = self.position_of(f.dst, now);
        let header = GpsrHeader::new(f.src, f.dst, dest_position, packet_id);
        let src_pos = self.position_of(f.src, now);
        let mut rec = TraceRecord::at(now, TraceTag::Send, f.src, src_pos.x, src_pos.y);
        rec.packet = Some(packet_id);
        rec.src = Some(f.src);
        rec.dst = Some(f.dst);
        rec.mode = Some(header.mode);
        self.emit(rec)?;
        self.process_packet(f.src, header, None, now)?;
        if sequence + 1 < f.count {
            self.queue.schedule(
                now + f.interval,
                EventKind::OriginatePacket {
                    flow,
                    sequence: sequence + 1,
                },
            )?;
        }
        Ok(())
    }

    /// Runs one packet through the GPSR decision procedure at `node` and
    /// acts on the outcome.
    fn process_packet(
        &mut self,
        node: NodeId,
        header: GpsrHeader,
        arrived_from: Option<(NodeId, Position)>,
        now: SimTime,
    ) -> Result<(), SimError> {
        let wire_pos = self.wire_position_of(node, now);
        let ground_pos = self.position_of(node, now);
        let snapshot = self.nodes[&node].table.snapshot();
        let view = LocalView {
            id: node,
            position: wire_pos,
            neighbors: &snapshot,
            planarization: self.config.planarization,
            ttl: self.config.ttl,
        };
        let decision = forwarding::handle_packet(&view, &header, arrived_from);
        match decision {
            ForwardDecision::Deliver => {
                self.stats.delivered += 1;
                self.stats.hop_counts.push(header.hop_count);
                let mut rec =
                    TraceRecord::at(now, TraceTag::Recv, node, ground_pos.x, ground_pos.y);
                rec.packet = Some(header.packet_id);
                rec.src = Some(header.source);
                rec.dst = Some(header.destination);
                rec.mode = Some(header.mode);
                rec.extra = Some(header.hop_count.to_string());
                self.emit(rec)?;
            }
            ForwardDecision::Forward {
                next,
                header: updated,
            } => {
                debug_assert!(updated.mode_state_coherent());
                // a perimeter packet that recovers but re-enters at a closer
                // entry point exits and enters within one decision
                let transitions: &[TraceTag] = match (header.mode, updated.mode) {
                    (GpsrMode::Greedy, GpsrMode::Perimeter) => &[TraceTag::EnterPerim],
                    (GpsrMode::Perimeter, GpsrMode::Greedy) => &[TraceTag::ExitPerim],
                    (GpsrMode::Perimeter, GpsrMode::Perimeter)
                        if header.perimeter_entry != updated.perimeter_entry =>
                    {
                        &[TraceTag::ExitPerim, TraceTag::EnterPerim]
                    }
                    _ => &[],
                };
                for &tag in transitions {
                    match tag {
                        TraceTag::EnterPerim => self.stats.perimeter_enters += 1,
                        TraceTag::ExitPerim => self.stats.perimeter_exits += 1,
                        _ => unreachable!(),
                    }
                    let mut rec = TraceRecord::at(now, tag, node, ground_pos.x, ground_pos.y);
                    rec.packet = Some(updated.packet_id);
                    rec.src = Some(updated.source);
                    rec.dst = Some(updated.destination);
                    rec.mode = Some(updated.mode);
                    self.emit(rec)?;
                }
                match updated.mode {
                    GpsrMode::Greedy => self.stats.greedy_hops += 1,
                    GpsrMode::Perimeter => self.stats.perimeter_hops += 1,
                }
                let mut rec = TraceRecord::at(now, TraceTag::Fwd, node, ground_pos.x, ground_pos.y);
                rec.packet = Some(updated.packet_id);
                rec.src = Some(updated.source);
                rec.dst = Some(updated.destination);
                rec.mode = Some(updated.mode);
                rec.extra = Some(next.to_string());
                self.emit(rec)?;
                let frame = Frame::Data(DataFrame {
                    link_from: node,
                    link_from_pos: wire_pos,
                    link_to: next,
                    header: updated,
                });
                self.transmit(node, frame, now)?;
            }
            ForwardDecision::Drop(reason) => {
                match reason {
                    forwarding::DropReason::NoNeighbors => self.stats.dropped_no_neighbors += 1,
                    forwarding::DropReason::Unreachable => self.stats.dropped_unreachable += 1,
                    forwarding::DropReason::Ttl => self.stats.dropped_ttl += 1,
                }
                let mut rec =
                    TraceRecord::at(now, TraceTag::Drop, node, ground_pos.x, ground_pos.y);
                rec.packet = Some(header.packet_id);
                rec.src = Some(header.source);
                rec.dst = Some(header.destination);
                rec.mode = Some(header.mode);
                rec.extra = Some(reason.as_str().to_string());
                self.emit(rec)?;
            }
        }
        Ok(())
    }

    /// Read-only view of a node's neighbor table, for inspection in tests
    /// and tooling.
    pub fn neighbor_table(&self, node: NodeId) -> &NeighborTable {
        &self.nodes[&node].table
    }
}

/// Convenience wrapper: build a world, run it for the scenario duration.
pub fn simulate(
    config: &ScenarioConfig,
    trace: Option<Box<dyn Write + Send>>,
) -> Result<SimStats, SimError> {
    let mut world = World::new(config.clone(), trace)?;
    let until = world.config.duration;
    world.run(until)
}
