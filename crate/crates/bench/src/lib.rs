//! Benchmark harness crate; see benches/.

pub use pfg_core as core;
