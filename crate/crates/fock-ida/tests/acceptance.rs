//! The acceptance gate: one test per numbered criterion. Each test prints
//! its one-line verdict (visible with `--nocapture`, and in the panic
//! message on failure) and asserts the criterion holds.

use fock_ida::checks::{criterion, CheckResult};

fn gate(index: usize) {
    let result: CheckResult = criterion(index);
    let line = result.line();
    println!("{line}");
    assert!(result.pass, "{line}");
}

#[test]
fn criterion_01_kernel_closed_form() {
    gate(1);
}

#[test]
fn criterion_02_ladder_sections() {
    gate(2);
}

#[test]
fn criterion_03_hilbert_schmidt_identity() {
    gate(3);
}

#[test]
fn criterion_04_local_fit_oracles() {
    gate(4);
}

#[test]
fn criterion_05_norm_equivalence() {
    gate(5);
}

#[test]
fn criterion_06_conjugate_ratios() {
    gate(6);
}

#[test]
fn criterion_07_compactness_signatures() {
    gate(7);
}

#[test]
fn criterion_08_measure_sections() {
    gate(8);
}

#[test]
fn criterion_09_oscillation_comparisons() {
    gate(9);
}

#[test]
fn criterion_10_plane_transform() {
    gate(10);
}

#[test]
fn criterion_11_determinism() {
    gate(11);
}
