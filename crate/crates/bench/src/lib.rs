//! Criterion benchmarks for the norm solvers; see `benches/norms.rs`.
