//! Criterion benchmarks for the density, regression and sampler code; see `benches/`.
