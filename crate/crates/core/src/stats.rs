//! Aggregate statistics of one simulation run.

/// Counters accumulated by the event loop.
///
/// Every originated packet ends in exactly one bucket: delivered, one of
/// the drop reasons, or still in flight when the simulation ends.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimStats {
    pub originated: u64,
    pub delivered: u64,
    pub dropped_unreachable: u64,
    pub dropped_no_neighbors: u64,
    pub dropped_ttl: u64,
    /// Data frames whose addressed next hop was out of range or lost to the
    /// radio loss draw; without link-layer feedback the packet dies on the
    /// air.
    pub dropped_link: u64,
    /// Packets with a pending radio delivery when the simulation ended.
    pub in_flight: u64,
    pub beacons_sent: u64,
    pub greedy_hops: u64,
    pub perimeter_hops: u64,
    pub perimeter_enters: u64,
    pub perimeter_exits: u64,
    /// Hop count of every delivered packet, in delivery order.
    pub hop_counts: Vec<u32>,
}

impl SimStats {
    pub fn dropped_total(&self) -> u64 {
        self.dropped_unreachable + self.dropped_no_neighbors + self.dropped_ttl + self.dropped_link
    }

    /// originated = delivered + dropped + in flight, exactly.
    pub fn conservation_holds(&self) -> bool {
        self.originated == self.delivered + self.dropped_total() + self.in_flight
    }

    pub fn csv_header() -> &'static str {
        "seed,originated,delivered,dropped_unreachable,dropped_no_neighbors,dropped_ttl,\
         dropped_link,in_flight,beacons_sent,greedy_hops,perimeter_hops,perimeter_enters,\
         perimeter_exits,hop_min,hop_max,hop_mean"
    }

    pub fn csv_row(&self, seed: u64) -> String {
        let (min, max, mean) = match self.hop_counts.as_slice() {
            [] => (0, 0, 0.0),
            hops => {
                let min = *hops.iter().min().expect("nonempty");
                let max = *hops.iter().max().expect("nonempty");
                let mean = hops.iter().map(|&h| f64::from(h)).sum::<f64>() / hops.len() as f64;
                (min, max, mean)
            }
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            seed,
            self.originated,
            self.delivered,
            self.dropped_unreachable,
            self.dropped_no_neighbors,
            self.dropped_ttl,
            self.dropped_link,
            self.in_flight,
            self.beacons_sent,
            self.greedy_hops,
            self.perimeter_hops,
            self.perimeter_enters,
            self.perimeter_exits,
            min,
            max,
            mean
        )
    }
}
