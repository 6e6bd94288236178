//! Criterion benchmarks for `condquant`; see `benches/oracles.rs`.
