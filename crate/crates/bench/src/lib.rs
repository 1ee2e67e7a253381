//! Criterion benchmarks for the compression pipeline. See `benches/`.
