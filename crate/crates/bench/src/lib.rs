//! Shared fixtures for the criterion benchmarks.

use mdload::container::ContainerNode;
use mdload::schema::{EnsembleConfig, generate_ensemble};

/// An in-memory ensemble sized for micro-benchmarks: the full metadata
/// complement per experiment, with the event payload trimmed so runs stay
/// metadata-bound.
pub fn bench_tree(n_experiments: usize, events_per_experiment: usize) -> ContainerNode {
    generate_ensemble(&EnsembleConfig {
        n_experiments,
        events_per_experiment,
        ..EnsembleConfig::default()
    })
    .expect("default knobs are valid")
}
