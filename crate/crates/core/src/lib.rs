//! Deterministic discrete-event simulator of GPSR (Greedy Perimeter
//! Stateless Routing) over wireless ad-hoc networks.
//!
//! The crate is organized around the protocol's moving parts:
//!
//! - [`geometry`] — pure planar kernel: distances, crossing predicates,
//!   RNG/GG planarization filters, the right-hand-rule sweep.
//! - [`neighbor`] — beacon wire codec and the per-node position table.
//! - [`forwarding`] — the per-packet decision engine: greedy forwarding,
//!   perimeter mode with face changes, recovery and drop rules.
//! - [`simkernel`] — the event queue, unit-disk radio, waypoint mobility,
//!   trace emission and the run loop.
//! - [`scenario`] / [`stats`] / [`oracle`] — experiment ingestion,
//!   aggregate counters, and brute-force graph oracles for verification.
//!
//! Runs are reproducible: a scenario plus a seed fully determines the trace
//! file, byte for byte.

pub mod forwarding;
pub mod geometry;
pub mod neighbor;
pub mod oracle;
pub mod scenario;
pub mod simkernel;
pub mod stats;

pub use forwarding::{DropReason, ForwardDecision, GpsrHeader, GpsrMode, LocalView};
pub use geometry::{Planarization, Position, Segment};
pub use neighbor::{Beacon, NeighborTable, NodeId};
pub use scenario::{parse_scenario, Flow, ScenarioConfig, ScenarioError};
pub use simkernel::{simulate, SimError, World};
pub use stats::SimStats;
