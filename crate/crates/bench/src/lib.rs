//! Criterion benchmarks for the core crate. See `benches/`.
