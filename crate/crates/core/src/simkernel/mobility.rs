//! Scripted waypoint mobility.

use crate::geometry::Position;

use super::event::SimTime;

/// A node trajectory: linear motion between waypoints, holding the last
/// position afterwards. An empty waypoint list is a static node.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySpec {
    initial: Position,
    /// Strictly increasing times, all positive; the implicit first waypoint
    /// is (0, initial).
    waypoints: Vec<(SimTime, Position)>,
}

impl MobilitySpec {
    pub fn fixed(initial: Position) -> Self {
        MobilitySpec {
            initial,
            waypoints: Vec::new(),
        }
    }

    /// Waypoint times must be positive and strictly increasing; the
    /// scenario validator enforces this before construction.
    pub fn new(initial: Position, waypoints: Vec<(SimTime, Position)>) -> Self {
        debug_assert!(waypoints.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(waypoints.first().map_or(true, |w| w.0 > 0.0));
        MobilitySpec { initial, waypoints }
    }

    pub fn initial(&self) -> Position {
        self.initial
    }

    pub fn is_static(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[(SimTime, Position)] {
        &self.waypoints
    }

    /// Position at time `t` under piecewise-linear interpolation.
    pub fn position_at(&self, t: SimTime) -> Position {
        let mut prev_t = 0.0;
        let mut prev_p = self.initial;
        for &(wt, wp) in &self.waypoints {
            if t <= wt {
                let span = wt - prev_t;
                if span <= 0.0 {
                    return wp;
                }
                let u = ((t - prev_t) / span).clamp(0.0, 1.0);
                return Position::new(
                    prev_p.x + u * (wp.x - prev_p.x),
                    prev_p.y + u * (wp.y - prev_p.y),
                );
            }
            prev_t = wt;
            prev_p = wp;
        }
        prev_p
    }
}
