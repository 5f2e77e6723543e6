//! Benchmarks for the encoder and the adaptive threshold chain live in `benches/`.
