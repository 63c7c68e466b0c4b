//! Criterion benchmarks for `bwk-core`; see `benches/`.
