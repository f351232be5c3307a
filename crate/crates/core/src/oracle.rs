//! Brute-force graph oracles: exact unit-disk connectivity and whole-graph
//! planarization, independent of any per-node routing state.
//!
//! The acceptance suite checks the simulator against these; the `graph` CLI
//! subcommand dumps their edge lists for inspection.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::geometry::{distance, planarize, Planarization, Position};
use crate::neighbor::NodeId;

/// Undirected unit-disk edges (u < v) over the node set: an edge wherever
/// the distance is at most the radio range.
pub fn unit_disk_edges(nodes: &[(NodeId, Position)], radio_range: f64) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            if distance(nodes[i].1, nodes[j].1) <= radio_range {
                let (a, b) = (nodes[i].0.min(nodes[j].0), nodes[i].0.max(nodes[j].0));
                edges.push((a, b));
            }
        }
    }
    edges.sort();
    edges
}

/// Undirected planar subgraph edges: every node filters its own unit-disk
/// neighborhood and an edge survives when its source endpoint keeps it.
/// Both endpoints always agree because the filters are symmetric and every
/// removing witness is in range of both; debug builds assert it.
pub fn planar_subgraph_edges(
    nodes: &[(NodeId, Position)],
    radio_range: f64,
    method: Planarization,
) -> Vec<(NodeId, NodeId)> {
    let mut kept: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &(id, pos) in nodes {
        let neighborhood: Vec<(NodeId, Position)> = nodes
            .iter()
            .copied()
            .filter(|&(other, p)| other != id && distance(pos, p) <= radio_range)
            .collect();
        let survivors = planarize(pos, &neighborhood, method);
        kept.insert(id, survivors.into_iter().map(|(n, _)| n).collect());
    }
    let mut edges = Vec::new();
    for (&u, nbrs) in &kept {
        for &v in nbrs {
            debug_assert!(
                kept[&v].contains(&u),
                "planarization endpoints disagree on edge ({u}, {v})"
            );
            if u < v {
                edges.push((u, v));
            }
        }
    }
    edges.sort();
    edges
}

/// Exact reachability over the unit-disk graph: every ordered pair (u, v)
/// with a path, including (u, u).
pub fn bfs_reachable(
    nodes: &[(NodeId, Position)],
    radio_range: f64,
) -> BTreeSet<(NodeId, NodeId)> {
    let edges = unit_disk_edges(nodes, radio_range);
    let adjacency = adjacency_of(nodes, &edges);
    let mut pairs = BTreeSet::new();
    for &(src, _) in nodes {
        for (dst, _) in bfs_hops_from(&adjacency, src) {
            pairs.insert((src, dst));
        }
    }
    pairs
}

/// Hop distance from `src` to every reachable node over the given edges.
pub fn bfs_hops(
    nodes: &[(NodeId, Position)],
    edges: &[(NodeId, NodeId)],
    src: NodeId,
) -> BTreeMap<NodeId, u32> {
    bfs_hops_from(&adjacency_of(nodes, edges), src)
}

/// Whether the given undirected edge set connects every node.
pub fn is_connected(nodes: &[(NodeId, Position)], edges: &[(NodeId, NodeId)]) -> bool {
    match nodes.first() {
        None => true,
        Some(&(first, _)) => {
            let adjacency = adjacency_of(nodes, edges);
            bfs_hops_from(&adjacency, first).len() == nodes.len()
        }
    }
}

fn adjacency_of(
    nodes: &[(NodeId, Position)],
    edges: &[(NodeId, NodeId)],
) -> BTreeMap<NodeId, Vec<NodeId>> {
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> =
        nodes.iter().map(|&(id, _)| (id, Vec::new())).collect();
    for &(u, v) in edges {
        adjacency.get_mut(&u).expect("edge endpoint declared").push(v);
        adjacency.get_mut(&v).expect("edge endpoint declared").push(u);
    }
    adjacency
}

fn bfs_hops_from(
    adjacency: &BTreeMap<NodeId, Vec<NodeId>>,
    src: NodeId,
) -> BTreeMap<NodeId, u32> {
    let mut hops = BTreeMap::new();
    let mut queue = VecDeque::new();
    hops.insert(src, 0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let d = hops[&u];
        for &v in &adjacency[&u] {
            if !hops.contains_key(&v) {
                hops.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    hops
}
