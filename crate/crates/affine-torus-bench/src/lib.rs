//! Benchmark-only crate; see `benches/core.rs` for the measured kernels.
