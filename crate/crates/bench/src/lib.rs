//! Criterion benchmarks for varmatch; see `benches/`.
