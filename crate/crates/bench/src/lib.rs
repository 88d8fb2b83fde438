//! Criterion benchmarks for the satspec kernels; see `benches/kernels.rs`.
