//! Benchmark fixtures; see `benches/`.
