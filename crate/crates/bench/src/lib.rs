//! Criterion benchmarks for `lblab-core`; see `benches/kernels.rs`.
