//! GPSR decision engine: greedy next-hop selection, the fallback into
//! perimeter mode at voids, right-hand-rule traversal with face changes,
//! and recovery back to greedy forwarding.
//!
//! All functions are pure; the event loop supplies a snapshot of the local
//! node state and acts on the returned decision.

use crate::geometry::{
    bearing, distance, planarize, right_hand_next, segments_cross, Planarization, Position,
    Segment,
};
use crate::neighbor::NodeId;

/// Routing mode carried in every data packet header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpsrMode {
    Greedy,
    Perimeter,
}

/// Per-packet routing state.
///
/// A greedy packet carries no perimeter state; a perimeter packet carries
/// where it entered the mode, where it entered the current face, and the
/// first edge it took on that face.
#[derive(Debug, Clone, PartialEq)]
pub struct GpsrHeader {
    pub source: NodeId,
    pub destination: NodeId,
    /// Destination position stamped by the source at origination.
    pub dest_position: Position,
    pub mode: GpsrMode,
    /// Where the packet switched to perimeter mode (Lp).
    pub perimeter_entry: Option<Position>,
    /// Where the packet entered the face it is currently walking (Lf).
    pub face_entry: Option<Position>,
    /// First directed edge taken on the current face (e0).
    pub first_face_edge: Option<(NodeId, NodeId)>,
    pub hop_count: u32,
    pub packet_id: u64,
}

impl GpsrHeader {
    /// Fresh greedy header, as stamped by the source.
    pub fn new(
        source: NodeId,
        destination: NodeId,
        dest_position: Position,
        packet_id: u64,
    ) -> Self {
        GpsrHeader {
            source,
            destination,
            dest_position,
            mode: GpsrMode::Greedy,
            perimeter_entry: None,
            face_entry: None,
            first_face_edge: None,
            hop_count: 0,
            packet_id,
        }
    }

    /// The mode flag and the perimeter state must agree: greedy packets
    /// carry none of it, perimeter packets all of it.
    pub fn mode_state_coherent(&self) -> bool {
        match self.mode {
            GpsrMode::Greedy => {
                self.perimeter_entry.is_none()
                    && self.face_entry.is_none()
                    && self.first_face_edge.is_none()
            }
            GpsrMode::Perimeter => {
                self.perimeter_entry.is_some()
                    && self.face_entry.is_some()
                    && self.first_face_edge.is_some()
            }
        }
    }

    fn clear_perimeter_state(&mut self) {
        self.mode = GpsrMode::Greedy;
        self.perimeter_entry = None;
        self.face_entry = None;
        self.first_face_edge = None;
    }
}

/// Why a packet was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// The node has no usable neighbors at all.
    NoNeighbors,
    /// Perimeter traversal closed its face without finding progress.
    Unreachable,
    /// Hop budget exhausted.
    Ttl,
}

impl DropReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropReason::NoNeighbors => "NO_NEIGHBORS",
            DropReason::Unreachable => "UNREACHABLE",
            DropReason::Ttl => "TTL",
        }
    }
}

/// Outcome of processing one packet at one node.
#[derive(Debug, Clone, PartialEq)]
pub enum ForwardDecision {
    /// The processing node is the destination.
    Deliver,
    /// Hand the packet to `next` with the updated header.
    Forward { next: NodeId, header: GpsrHeader },
    Drop(DropReason),
}

/// Snapshot of the local node state a forwarding decision runs on.
#[derive(Debug, Clone)]
pub struct LocalView<'a> {
    pub id: NodeId,
    /// Own position at wire precision, matching what neighbors see.
    pub position: Position,
    /// Current neighbor table entries, ascending by id.
    pub neighbors: &'a [(NodeId, Position)],
    pub planarization: Planarization,
    pub ttl: u32,
}

/// Greedy rule: among neighbors strictly closer to the destination than the
/// current node, the one closest to the destination; ties break by id.
/// `None` signals a void.
pub fn greedy_next_hop(
    self_pos: Position,
    dest_pos: Position,
    neighbors: &[(NodeId, Position)],
) -> Option<(NodeId, Position)> {
    let own = distance(self_pos, dest_pos);
    neighbors
        .iter()
        .copied()
        .filter(|&(_, p)| distance(p, dest_pos) < own)
        .min_by(|a, b| {
            distance(a.1, dest_pos)
                .total_cmp(&distance(b.1, dest_pos))
                .then_with(|| a.0.cmp(&b.0))
        })
}

/// Switches a packet into perimeter mode at a void and picks the first hop
/// with the right-hand rule, sweeping from the direction toward the
/// destination.
pub fn enter_perimeter(
    mut header: GpsrHeader,
    self_id: NodeId,
    self_pos: Position,
    planar_neighbors: &[(NodeId, Position)],
) -> ForwardDecision {
    if planar_neighbors.is_empty() {
        return ForwardDecision::Drop(DropReason::NoNeighbors);
    }
    let toward_dest = bearing(self_pos, header.dest_position);
    let (next, _) = right_hand_next(self_pos, toward_dest, planar_neighbors);
    header.mode = GpsrMode::Perimeter;
    header.perimeter_entry = Some(self_pos);
    header.face_entry = Some(self_pos);
    header.first_face_edge = Some((self_id, next));
    header.hop_count += 1;
    debug_assert!(header.mode_state_coherent());
    ForwardDecision::Forward { next, header }
}

/// One perimeter-mode hop, in order: recovery to greedy when the node is
/// closer to the destination than the perimeter entry point; otherwise the
/// right-hand rule from the arrival direction, switching faces whenever the
/// chosen edge crosses the line from the face entry point to the
/// destination, and dropping the packet when the walk returns to the first
/// edge of its face.
pub fn perimeter_step(
    header: &GpsrHeader,
    view: &LocalView<'_>,
    arrived_from: Option<(NodeId, Position)>,
    planar_neighbors: &[(NodeId, Position)],
) -> ForwardDecision {
    debug_assert_eq!(header.mode, GpsrMode::Perimeter);
    debug_assert!(header.mode_state_coherent());
    let entry = header.perimeter_entry.expect("perimeter packet carries Lp");

    // 1. Recovery: strict progress past Lp hands the packet back to greedy.
    if distance(view.position, header.dest_position) < distance(entry, header.dest_position) {
        let mut recovered = header.clone();
        recovered.clear_perimeter_state();
        return match greedy_next_hop(view.position, recovered.dest_position, view.neighbors) {
            Some((next, _)) => {
                recovered.hop_count += 1;
                ForwardDecision::Forward {
                    next,
                    header: recovered,
                }
            }
            // Still a local maximum: start a fresh perimeter episode here,
            // with the strictly closer entry point.
            None => enter_perimeter(recovered, view.id, view.position, planar_neighbors),
        };
    }

    if planar_neighbors.is_empty() {
        return ForwardDecision::Drop(DropReason::NoNeighbors);
    }

    // 2. Right-hand rule from the direction the packet arrived from; a
    // packet originated straight into perimeter mode sweeps from the
    // destination direction instead.
    let reference = match arrived_from {
        Some((_, from_pos)) => bearing(view.position, from_pos),
        None => bearing(view.position, header.dest_position),
    };
    let (mut next, mut next_pos) = right_hand_next(view.position, reference, planar_neighbors);

    // 3. Face changes: never traverse an edge that properly crosses the
    // Lf-to-destination line closer to the destination; take the next edge
    // counterclockwise from the crossing edge instead. The crossing point
    // becomes the new Lf, so each iteration makes strict progress and the
    // sweep advances monotonically, bounded by the neighbor count.
    let mut updated = header.clone();
    let mut changed_face = false;
    for _ in 0..=planar_neighbors.len() {
        let face_entry = updated.face_entry.expect("perimeter packet carries Lf");
        if face_entry == updated.dest_position || next_pos == view.position {
            break;
        }
        let face_line =
            Segment::new(face_entry, updated.dest_position).expect("checked non-degenerate");
        let edge = Segment::new(view.position, next_pos).expect("checked non-degenerate");
        match segments_cross(&edge, &face_line) {
            Some(p)
                if distance(p, updated.dest_position)
                    < distance(face_entry, updated.dest_position) =>
            {
                updated.face_entry = Some(p);
                let (n, np) =
                    right_hand_next(view.position, bearing(view.position, next_pos), planar_neighbors);
                updated.first_face_edge = Some((view.id, n));
                next = n;
                next_pos = np;
                changed_face = true;
            }
            _ => break,
        }
    }

    // 4. Loop detection: choosing the first edge of the current face again
    // (other than the moment the face was entered) means the whole face has
    // been toured without progress, so the destination is unreachable.
    if !changed_face && updated.first_face_edge == Some((view.id, next)) {
        return ForwardDecision::Drop(DropReason::Unreachable);
    }

    updated.hop_count += 1;
    ForwardDecision::Forward {
        next,
        header: updated,
    }
}

/// Full per-packet decision procedure at one node: deliver at the
/// destination, enforce the hop budget, then route greedily with the
/// perimeter fallback, or continue a perimeter walk.
pub fn handle_packet(
    view: &LocalView<'_>,
    header: &GpsrHeader,
    arrived_from: Option<(NodeId, Position)>,
) -> ForwardDecision {
    debug_assert!(header.mode_state_coherent());
    if view.id == header.destination {
        return ForwardDecision::Deliver;
    }
    if header.hop_count >= view.ttl {
        return ForwardDecision::Drop(DropReason::Ttl);
    }
    match header.mode {
        GpsrMode::Greedy => {
            match greedy_next_hop(view.position, header.dest_position, view.neighbors) {
                Some((next, _)) => {
                    let mut h = header.clone();
                    h.hop_count += 1;
                    ForwardDecision::Forward { next, header: h }
                }
                None => {
                    let planar = planarize(view.position, view.neighbors, view.planarization);
                    enter_perimeter(header.clone(), view.id, view.position, &planar)
                }
            }
        }
        GpsrMode::Perimeter => {
            let planar = planarize(view.position, view.neighbors, view.planarization);
            perimeter_step(header, view, arrived_from, &planar)
        }
    }
}
