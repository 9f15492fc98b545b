//! Criterion benchmarks for the detection pipeline; see `benches/pipeline.rs`.
