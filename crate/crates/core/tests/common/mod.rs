//! Shared helpers for integration tests: deterministic random scenario
//! generation with validity (and optionally connectivity) rejection.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gpsr_core::oracle::{is_connected, unit_disk_edges};
use gpsr_core::scenario::ScenarioConfig;
use gpsr_core::{NodeId, Planarization, Position};

pub fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn base_config(nodes: Vec<(NodeId, Position)>, radio_range: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        radio_range,
        beacon_interval: 1.0,
        neighbor_timeout: 4.5,
        planarization: Planarization::Gg,
        duration: 10.0,
        seed,
        ttl: 128,
        delay: 0.001,
        loss: 0.0,
        nodes,
        mobility: BTreeMap::new(),
        flows: Vec::new(),
    }
}

fn uniform_nodes(
    rng: &mut ChaCha8Rng,
    n: u32,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    first_id: u32,
) -> Vec<(NodeId, Position)> {
    (0..n)
        .map(|i| {
            (
                NodeId(first_id + i),
                Position::new(rng.random_range(x0..x0 + w), rng.random_range(y0..y0 + h)),
            )
        })
        .collect()
}

/// Random valid scenario: `n` nodes uniform over a `side`-sized square.
/// Degenerate draws (coincident or collinear-in-range nodes) are resampled
/// deterministically.
pub fn random_scenario(seed: u64, n: u32, side: f64, radio_range: f64) -> ScenarioConfig {
    for attempt in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed) ^ attempt);
        let nodes = uniform_nodes(&mut rng, n, 0.0, 0.0, side, side, 0);
        let config = base_config(nodes, radio_range, seed);
        if config.validate().is_ok() {
            return config;
        }
    }
    panic!("no valid scenario after 1000 attempts for seed {seed}");
}

/// Random valid scenario whose unit-disk graph is connected.
pub fn random_connected_scenario(seed: u64, n: u32, side: f64, radio_range: f64) -> ScenarioConfig {
    for attempt in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0xC0FF_EE00) ^ attempt);
        let nodes = uniform_nodes(&mut rng, n, 0.0, 0.0, side, side, 0);
        let config = base_config(nodes, radio_range, seed);
        if config.validate().is_err() {
            continue;
        }
        let udg = unit_disk_edges(&config.nodes, radio_range);
        if is_connected(&config.nodes, &udg) {
            return config;
        }
    }
    panic!("no connected scenario after 1000 attempts for seed {seed}");
}

/// Two 15-node clusters with a gap wider than the radio range: nodes 0..15
/// on the left, 15..30 on the right, never mutually reachable.
pub fn disconnected_scenario(seed: u64, radio_range: f64) -> ScenarioConfig {
    for attempt in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0xD15C_0000) ^ attempt);
        let mut nodes = uniform_nodes(&mut rng, 15, 0.0, 0.0, 100.0, 300.0, 0);
        nodes.extend(uniform_nodes(&mut rng, 15, 250.0, 0.0, 100.0, 300.0, 15));
        let config = base_config(nodes, radio_range, seed);
        if config.validate().is_ok() {
            return config;
        }
    }
    panic!("no valid disconnected scenario after 1000 attempts for seed {seed}");
}
