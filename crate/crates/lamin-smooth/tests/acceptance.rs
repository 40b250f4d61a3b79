//! Acceptance gate: one test per criterion, each printing its verdict line.
//! Run with: cargo test --test acceptance -- --nocapture

use lamin_smooth::verify;

const SEED: u64 = 7;

fn gate(outcome: lamin_smooth::Result<verify::CriterionOutcome>) {
    let outcome = outcome.expect("criterion evaluation failed");
    println!("{outcome}");
    assert!(outcome.pass, "{outcome}");
}

#[test]
fn a1_partition_of_unity() {
    gate(verify::criterion_a1());
}

#[test]
fn a2_grid_leaf_exactness_and_plateau() {
    gate(verify::criterion_a2());
}

#[test]
fn a3_plane_convergence() {
    gate(verify::criterion_a3());
}

#[test]
fn a4_log_envelope() {
    gate(verify::criterion_a4(SEED));
}

#[test]
fn a5_ode_oracle() {
    gate(verify::criterion_a5());
}

#[test]
fn a6_mollified_field_bounds() {
    gate(verify::criterion_a6());
}

#[test]
fn a7_leaf_deviation_envelope() {
    gate(verify::criterion_a7());
}

#[test]
fn a8_leaf_separation() {
    gate(verify::criterion_a8(SEED));
}

#[test]
fn a9_final_leafwise_bound() {
    gate(verify::criterion_a9());
}

#[test]
fn a10_determinism() {
    let bin = env!("CARGO_BIN_EXE_lamin-smooth");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let dir = tempfile::tempdir().expect("tempdir");
        let status = std::process::Command::new(bin)
            .args(["verify", "--all", "--seed", "7", "--out"])
            .arg(dir.path())
            .status()
            .expect("spawn verify");
        assert!(status.success(), "verify run {run} failed");
        let bounds = std::fs::read(dir.path().join("acceptance_bounds.csv")).expect("bounds csv");
        let plane = std::fs::read(dir.path().join("acceptance_plane.csv")).expect("plane csv");
        outputs.push((bounds, plane));
    }
    let pass = outputs[0] == outputs[1];
    println!(
        "A10: {} (two seeded runs, byte-identical CSV outputs)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "CSV outputs differ between identical seeded runs");
}
