//! Benchmark-only crate; the kernels under measurement live in the core
//! library. See benches/kernels.rs.
