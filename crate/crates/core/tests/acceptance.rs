//! Acceptance gate: one test per verification criterion, asserting the
//! full-depth run of the suite in [`cwq_core::acceptance`].
//!
//! Each test prints its PASS/FAIL report line; a failing criterion panics
//! with the full report, including the measured values behind every check.

use cwq_core::acceptance::criterion;

fn assert_criterion(index: usize) {
    let report = criterion(index, false);
    println!("{}", report.render());
    assert!(report.passed, "\n{}", report.render());
}

#[test]
fn criterion_01_table_1_grid_residues() {
    assert_criterion(1);
}

#[test]
fn criterion_02_table_2_deviation_measures() {
    assert_criterion(2);
}

#[test]
fn criterion_03_table_3_moment_ratios() {
    assert_criterion(3);
}

#[test]
fn criterion_04_brute_force_oracles() {
    assert_criterion(4);
}

#[test]
fn criterion_05_commutator_defects() {
    assert_criterion(5);
}

#[test]
fn criterion_06_permutation_combinatorics() {
    assert_criterion(6);
}

#[test]
fn criterion_07_coherent_state_identities() {
    assert_criterion(7);
}

#[test]
fn criterion_08_classical_limit() {
    assert_criterion(8);
}

#[test]
fn criterion_09_ground_state_structure() {
    assert_criterion(9);
}

#[test]
fn criterion_10_hamiltonian_gap() {
    assert_criterion(10);
}

#[test]
fn criterion_11_peak_width_scaling() {
    assert_criterion(11);
}
