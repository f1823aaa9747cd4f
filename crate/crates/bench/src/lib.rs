//! Shared fixtures for the benchmarks.

use ere_core::models::{build_config, CentralConfig, Family};

/// Points covering both integration domains and both kinds of spectrum.
pub const CELLS: [(Family, f64); 4] = [
    (Family::Euler(0.1), 0.5),
    (Family::Euler(1.0), 0.9),
    (Family::Lagrange(6.0), 0.3),
    (Family::Lagrange(6.0), 0.9999),
];

pub fn config(f: Family) -> CentralConfig {
    build_config(f).expect("benchmark families are valid")
}
