//! Planar geometry kernel: distances, crossing predicates, the RNG/GG
//! neighborhood filters and the counterclockwise sweep behind the
//! right-hand rule.
//!
//! Everything here is a pure function of its arguments. Orientation tests
//! use the exact sign of the double-precision cross product with no
//! epsilon; the scenario validator keeps node configurations away from
//! degeneracy so the predicates never sit on a knife edge.

use std::f64::consts::TAU;
use std::fmt;

use thiserror::Error;

/// A point on the simulation plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(
            x.is_finite() && y.is_finite(),
            "non-finite coordinate ({x}, {y})"
        );
        Position { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Squared distance; keeps the filter comparisons free of square-root
/// rounding.
pub fn distance_sq(a: Position, b: Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// Bearing of `to` as seen from `from`, in radians in [0, 2π).
pub fn bearing(from: Position, to: Position) -> f64 {
    let a = (to.y - from.y).atan2(to.x - from.x);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Which planar subgraph the perimeter mode routes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planarization {
    /// Relative neighborhood graph: keep (u, v) iff
    /// d(u, v) ≤ max(d(u, w), d(v, w)) for every witness w.
    Rng,
    /// Gabriel graph: keep (u, v) iff
    /// d²(u, v) < d²(u, w) + d²(v, w) for every witness w.
    Gg,
}

impl fmt::Display for Planarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Planarization::Rng => write!(f, "RNG"),
            Planarization::Gg => write!(f, "GG"),
        }
    }
}

/// Relative-neighborhood-graph filter. The inequality is non-strict, so a
/// witness exactly on the boundary of the lens leaves the edge in place.
pub fn rng_keep_edge<I>(u: Position, v: Position, witnesses: I) -> bool
where
    I: IntoIterator<Item = Position>,
{
    let duv = distance_sq(u, v);
    witnesses
        .into_iter()
        .all(|w| duv <= distance_sq(u, w).max(distance_sq(v, w)))
}

/// Gabriel-graph filter. The inequality is strict, so a witness exactly on
/// the diameter circle removes the edge.
pub fn gg_keep_edge<I>(u: Position, v: Position, witnesses: I) -> bool
where
    I: IntoIterator<Item = Position>,
{
    let duv = distance_sq(u, v);
    witnesses
        .into_iter()
        .all(|w| duv < distance_sq(u, w) + distance_sq(v, w))
}

/// One node's planarization step: keep the neighbors whose edge to `origin`
/// survives the chosen filter, with every other neighbor as a witness.
///
/// This is the local computation each node runs over its own table; both
/// endpoints of an edge reach the same verdict because the filters are
/// symmetric and any witness that removes a unit-disk edge lies within
/// radio range of both endpoints.
pub fn planarize<I: Copy>(
    origin: Position,
    neighbors: &[(I, Position)],
    method: Planarization,
) -> Vec<(I, Position)> {
    (0..neighbors.len())
        .filter(|&i| {
            let (_, v) = neighbors[i];
            let witnesses = neighbors
                .iter()
                .enumerate()
                .filter(move |&(j, _)| j != i)
                .map(|(_, &(_, w))| w);
            match method {
                Planarization::Rng => rng_keep_edge(origin, v, witnesses),
                Planarization::Gg => gg_keep_edge(origin, v, witnesses),
            }
        })
        .map(|i| neighbors[i])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("zero-length segment at {at}")]
pub struct DegenerateSegment {
    pub at: Position,
}

/// A directed segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Position,
    b: Position,
}

impl Segment {
    pub fn new(a: Position, b: Position) -> Result<Self, DegenerateSegment> {
        if a == b {
            Err(DegenerateSegment { at: a })
        } else {
            Ok(Segment { a, b })
        }
    }

    pub fn a(&self) -> Position {
        self.a
    }

    pub fn b(&self) -> Position {
        self.b
    }
}

/// Signed area of the triangle (a, b, c); positive when c lies to the left
/// of a→b.
fn orient(a: Position, b: Position, c: Position) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn strictly_opposite(x: f64, y: f64) -> bool {
    (x > 0.0 && y < 0.0) || (x < 0.0 && y > 0.0)
}

/// Proper intersection point of two open segments.
///
/// Touching at an endpoint and collinear overlap do not count as a
/// crossing; both cases return `None`.
pub fn segments_cross(s1: &Segment, s2: &Segment) -> Option<Position> {
    let (a, b) = (s1.a, s1.b);
    let (c, d) = (s2.a, s2.b);
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if !(strictly_opposite(o1, o2) && strictly_opposite(o3, o4)) {
        return None;
    }
    // Both segments straddle the other's supporting line, so the lines are
    // not parallel and the parametric solve is well defined.
    let denom = (b.x - a.x) * (d.y - c.y) - (b.y - a.y) * (d.x - c.x);
    let t = ((c.x - a.x) * (d.y - c.y) - (c.y - a.y) * (d.x - c.x)) / denom;
    Some(Position::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
}

/// Angle swept counterclockwise from `reference` to `target`, mapped into
/// (0, 2π]: a target exactly on the reference direction counts as a full
/// turn, so the way the packet came in is taken only as a last resort.
fn ccw_sweep(reference: f64, target: f64) -> f64 {
    let d = (target - reference).rem_euclid(TAU);
    if d == 0.0 {
        TAU
    } else {
        d
    }
}

/// Right-hand rule: the candidate whose bearing from `origin` is first
/// encountered sweeping counterclockwise from `reference_bearing`.
///
/// Equal sweeps break by smaller distance, then smaller id, which keeps the
/// choice total and deterministic even on degenerate inputs.
///
/// Panics when `candidates` is empty; callers decide what an empty planar
/// neighborhood means.
pub fn right_hand_next<I: Copy + Ord>(
    origin: Position,
    reference_bearing: f64,
    candidates: &[(I, Position)],
) -> (I, Position) {
    assert!(
        !candidates.is_empty(),
        "right-hand rule needs at least one candidate"
    );
    *candidates
        .iter()
        .min_by(|x, y| {
            let sx = ccw_sweep(reference_bearing, bearing(origin, x.1));
            let sy = ccw_sweep(reference_bearing, bearing(origin, y.1));
            sx.total_cmp(&sy)
                .then_with(|| distance_sq(origin, x.1).total_cmp(&distance_sq(origin, y.1)))
                .then_with(|| x.0.cmp(&y.0))
        })
        .expect("candidates nonempty")
}
