//! Criterion benchmarks for the optimizers; see `benches/`.
