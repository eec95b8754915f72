//! Criterion benchmarks for the design, classical and quantum kernels; see `benches/`.
