//! Criterion benchmarks for cutlab live under `benches/`.
