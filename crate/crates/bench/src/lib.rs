//! Benchmarks for bony-core live in `benches/`.
