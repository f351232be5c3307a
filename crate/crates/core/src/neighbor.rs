//! Beaconing and the per-node position table.
//!
//! Nodes learn where their neighbors are from periodic beacons and from
//! positions piggybacked on overheard data frames; both feed the same
//! [`NeighborTable::on_heard`] path. Entries that have not been refreshed
//! within the timeout are removed by a periodic eviction sweep.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::geometry::Position;

/// Node identifier, unique within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier plus position, as broadcast in a beacon packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beacon {
    pub sender: NodeId,
    pub position: Position,
}

/// Size of the beacon wire image: a 4-byte id and two 4-byte coordinates.
pub const BEACON_WIRE_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("coordinate {0} overflows single precision")]
    CoordinateOverflow(f64),
    #[error("beacon image must be {BEACON_WIRE_LEN} bytes, got {0}")]
    BadLength(usize),
    #[error("decoded coordinate is not finite")]
    NonFiniteCoordinate,
}

/// Encodes a beacon as 12 bytes: sender id as big-endian u32, then x and y
/// as big-endian IEEE-754 single-precision floats.
pub fn encode_beacon(b: &Beacon) -> Result<[u8; BEACON_WIRE_LEN], CodecError> {
    let x = b.position.x as f32;
    let y = b.position.y as f32;
    if !x.is_finite() {
        return Err(CodecError::CoordinateOverflow(b.position.x));
    }
    if !y.is_finite() {
        return Err(CodecError::CoordinateOverflow(b.position.y));
    }
    let mut out = [0u8; BEACON_WIRE_LEN];
    out[0..4].copy_from_slice(&b.sender.0.to_be_bytes());
    out[4..8].copy_from_slice(&x.to_be_bytes());
    out[8..12].copy_from_slice(&y.to_be_bytes());
    Ok(out)
}

/// Inverse of [`encode_beacon`] on valid 12-byte images.
pub fn decode_beacon(bytes: &[u8]) -> Result<Beacon, CodecError> {
    if bytes.len() != BEACON_WIRE_LEN {
        return Err(CodecError::BadLength(bytes.len()));
    }
    let id = u32::from_be_bytes(bytes[0..4].try_into().expect("4 bytes"));
    let x = f32::from_be_bytes(bytes[4..8].try_into().expect("4 bytes"));
    let y = f32::from_be_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if !x.is_finite() || !y.is_finite() {
        return Err(CodecError::NonFiniteCoordinate);
    }
    Ok(Beacon {
        sender: NodeId(id),
        position: Position::new(x as f64, y as f64),
    })
}

/// Rounds a position to the precision that survives the beacon wire format.
///
/// Forwarding decisions run on wire-precision coordinates so that every
/// node reasons from exactly the values its neighbors advertised.
pub fn to_wire_precision(p: Position) -> Position {
    Position::new(p.x as f32 as f64, p.y as f32 as f64)
}

/// One known neighbor: where it was and when it was last heard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub id: NodeId,
    pub position: Position,
    pub last_heard: f64,
}

/// Position table of a single node.
///
/// Owned and mutated only by that node's slice of the event loop, so there
/// is no locking anywhere.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    entries: BTreeMap<NodeId, NeighborEntry>,
    timeout: f64,
}

impl NeighborTable {
    pub fn new(timeout: f64) -> Self {
        assert!(timeout > 0.0, "neighbor timeout must be positive");
        NeighborTable {
            entries: BTreeMap::new(),
            timeout,
        }
    }

    pub fn timeout(&self) -> f64 {
        self.timeout
    }

    /// Inserts or refreshes an entry; the latest report wins.
    pub fn on_heard(&mut self, id: NodeId, position: Position, now: f64) {
        self.entries.insert(
            id,
            NeighborEntry {
                id,
                position,
                last_heard: now,
            },
        );
    }

    /// Removes every entry older than the timeout and reports the ids, in
    /// ascending order.
    pub fn evict_stale(&mut self, now: f64) -> Vec<NodeId> {
        let mut evicted = Vec::new();
        self.entries.retain(|&id, e| {
            debug_assert!(e.last_heard <= now, "entry heard in the future");
            if now - e.last_heard > self.timeout {
                evicted.push(id);
                false
            } else {
                true
            }
        });
        evicted
    }

    pub fn get(&self, id: NodeId) -> Option<&NeighborEntry> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Current (id, position) pairs in ascending id order.
    pub fn snapshot(&self) -> Vec<(NodeId, Position)> {
        self.entries.values().map(|e| (e.id, e.position)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NeighborEntry> {
        self.entries.values()
    }
}

/// Next beacon transmission time: the interval jittered by ±25% so that
/// nodes created at the same instant do not stay synchronized.
pub fn next_beacon_time(interval: f64, now: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(interval > 0.0, "beacon interval must be positive");
    now + rng.random_range(0.75 * interval..=1.25 * interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Position {
        Position::new(x, y)
    }

    #[test]
    fn encode_all_zero_beacon() {
        let b = Beacon {
            sender: NodeId(0),
            position: p(0.0, 0.0),
        };
        assert_eq!(encode_beacon(&b).unwrap(), [0u8; 12]);
    }

    #[test]
    fn encode_golden_bytes() {
        let b = Beacon {
            sender: NodeId(7),
            position: p(1.0, -2.0),
        };
        assert_eq!(
            encode_beacon(&b).unwrap(),
            [0x00, 0x00, 0x00, 0x07, 0x3F, 0x80, 0x00, 0x00, 0xC0, 0x00, 0x00, 0x00]
        );
    }

    #[test]
    fn encode_rejects_single_precision_overflow() {
        let b = Beacon {
            sender: NodeId(1),
            position: p(1e39, 0.0),
        };
        assert!(matches!(
            encode_beacon(&b),
            Err(CodecError::CoordinateOverflow(_))
        ));
    }

    #[test]
    fn decode_zero_image() {
        let b = decode_beacon(&[0u8; 12]).unwrap();
        assert_eq!(b.sender, NodeId(0));
        assert_eq!(b.position, p(0.0, 0.0));
    }

    #[test]
    fn decode_rejects_wrong_length() {
        assert_eq!(decode_beacon(&[0u8; 11]), Err(CodecError::BadLength(11)));
        assert_eq!(decode_beacon(&[0u8; 13]), Err(CodecError::BadLength(13)));
    }

    #[test]
    fn decode_rejects_non_finite_coordinates() {
        let mut img = [0u8; 12];
        img[4..8].copy_from_slice(&f32::NAN.to_be_bytes());
        assert_eq!(decode_beacon(&img), Err(CodecError::NonFiniteCoordinate));
        img[4..8].copy_from_slice(&f32::INFINITY.to_be_bytes());
        assert_eq!(decode_beacon(&img), Err(CodecError::NonFiniteCoordinate));
    }

    #[test]
    fn codec_round_trips_the_golden_beacon() {
        let b = Beacon {
            sender: NodeId(7),
            position: p(1.0, -2.0),
        };
        let back = decode_beacon(&encode_beacon(&b).unwrap()).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn codec_round_trips_1000_random_beacons() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let b = Beacon {
                sender: NodeId(rng.random()),
                position: p(
                    rng.random_range(-1e6..1e6f64) as f32 as f64,
                    rng.random_range(-1e6..1e6f64) as f32 as f64,
                ),
            };
            let back = decode_beacon(&encode_beacon(&b).unwrap()).unwrap();
            assert_eq!(back, b);
        }
    }

    #[test]
    fn wire_precision_matches_codec_round_trip() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let raw = p(rng.random_range(-1e4..1e4), rng.random_range(-1e4..1e4));
            let b = Beacon {
                sender: NodeId(0),
                position: raw,
            };
            let via_codec = decode_beacon(&encode_beacon(&b).unwrap()).unwrap().position;
            assert_eq!(to_wire_precision(raw), via_codec);
        }
    }

    #[test]
    fn on_heard_inserts_new_entry() {
        let mut t = NeighborTable::new(4.5);
        t.on_heard(NodeId(5), p(1.0, 1.0), 2.0);
        assert_eq!(t.len(), 1);
        let e = t.get(NodeId(5)).unwrap();
        assert_eq!(e.position, p(1.0, 1.0));
        assert_eq!(e.last_heard, 2.0);
    }

    #[test]
    fn on_heard_overwrites_existing_entry() {
        let mut t = NeighborTable::new(4.5);
        t.on_heard(NodeId(5), p(1.0, 1.0), 2.0);
        t.on_heard(NodeId(5), p(3.0, 3.0), 4.0);
        assert_eq!(t.len(), 1);
        let e = t.get(NodeId(5)).unwrap();
        assert_eq!(e.position, p(3.0, 3.0));
        assert_eq!(e.last_heard, 4.0);
    }

    #[test]
    fn on_heard_last_write_wins_at_equal_times() {
        let mut t = NeighborTable::new(4.5);
        t.on_heard(NodeId(5), p(1.0, 1.0), 2.0);
        t.on_heard(NodeId(5), p(9.0, 9.0), 2.0);
        assert_eq!(t.get(NodeId(5)).unwrap().position, p(9.0, 9.0));
    }

    #[test]
    fn evict_removes_entry_past_timeout() {
        let mut t = NeighborTable::new(4.5);
        t.on_heard(NodeId(1), p(0.0, 0.0), 0.0);
        assert_eq!(t.evict_stale(5.0), vec![NodeId(1)]);
        assert!(t.is_empty());
    }

    #[test]
    fn evict_retains_entry_within_timeout() {
        let mut t = NeighborTable::new(4.5);
        t.on_heard(NodeId(1), p(0.0, 0.0), 1.0);
        assert_eq!(t.evict_stale(5.0), vec![]);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn evict_on_empty_table_is_a_no_op() {
        let mut t = NeighborTable::new(4.5);
        assert_eq!(t.evict_stale(100.0), vec![]);
    }

    #[test]
    fn beacon_jitter_stays_in_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let t = next_beacon_time(1.0, 0.0, &mut rng);
            assert!((0.75..=1.25).contains(&t), "{t} outside jitter window");
            let t2 = next_beacon_time(2.0, 10.0, &mut rng);
            assert!((11.5..=12.5).contains(&t2), "{t2} outside jitter window");
        }
    }

    #[test]
    fn beacon_times_are_deterministic_per_seed() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| next_beacon_time(1.0, 0.0, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    proptest! {
        /// Any interleaving of hears and evictions leaves no entry older
        /// than the timeout after an eviction sweep.
        #[test]
        fn no_stale_entry_survives_eviction(
            ops in proptest::collection::vec((0u32..8, 0.0..100.0f64), 1..50),
        ) {
            let mut t = NeighborTable::new(4.5);
            let mut now = 0.0f64;
            for (id, dt) in ops {
                now += dt;
                if id % 3 == 0 {
                    let _ = t.evict_stale(now);
                    for e in t.iter() {
                        prop_assert!(now - e.last_heard <= 4.5);
                    }
                } else {
                    t.on_heard(NodeId(id), Position::new(f64::from(id), 0.0), now);
                }
            }
            let _ = t.evict_stale(now);
            for e in t.iter() {
                prop_assert!(now - e.last_heard <= 4.5);
            }
        }
    }
}
