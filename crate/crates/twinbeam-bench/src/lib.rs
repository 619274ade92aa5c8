//! Benchmark-only package; the measurements live in `benches/`.
//! `cargo bench -p twinbeam-bench` runs them, `cargo test` runs each
//! once as a smoke check.
