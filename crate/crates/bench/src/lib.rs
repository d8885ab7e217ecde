//! Criterion benchmarks for toriclab; see `benches/toriclab.rs`.
