//! Shared helpers for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;

use s3nodal_core::experiments::{run_ensemble, Config, EnsembleParams, EnsembleReport};

/// Writes `criterion NN: PASS | detail` to stderr, bypassing test output capture, then
/// panics if the criterion failed.
pub fn verdict(id: u32, pass: bool, detail: String) {
    let line = format!("criterion {id:>2}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {id} failed: {detail}");
}

/// Seeded ensemble at (N, m) with default refinement settings.
pub fn ensemble(n: u32, m: i32, samples: usize, seed: u64, zeros: bool, mesh: bool) -> EnsembleReport {
    let cfg = Config {
        n,
        m,
        samples,
        seed,
        zeros,
        mesh,
        ..Config::default()
    };
    run_ensemble(&EnsembleParams::from_config(&cfg)).expect("ensemble run")
}
