// SPDX-License-Identifier: MIT OR Apache-2.0

//! Shared inputs for the benchmarks.

use autoknot::sim::{self, SimScenario};

/// One replication of a bundled simulation scenario.
pub fn scenario_data(name: &str, seed: u64) -> (SimScenario, Vec<f64>, Vec<f64>) {
    let s = sim::bundled(name, 1, seed).expect("bundled scenario");
    let (xs, y) = sim::generate(&s, 0).expect("valid scenario");
    (s, xs, y)
}
