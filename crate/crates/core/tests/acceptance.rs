//! One PASS/FAIL line per acceptance criterion, at the stated tolerances.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use mellinfrac::verification::run_criterion;
use std::time::Instant;

fn criterion(id: u8) {
    let start = Instant::now();
    let report = run_criterion(id).unwrap_or_else(|e| panic!("FAIL criterion {id}: error {e}"));
    println!("{}", report.detail());
    println!(
        "    criterion {id} took {:.1} s",
        start.elapsed().as_secs_f64()
    );
    assert!(report.passed(), "{}", report.line());
}

#[test]
fn criterion_01_eigenfunction_laws() {
    criterion(1);
}

#[test]
fn criterion_02_log_formula() {
    criterion(2);
}

#[test]
fn criterion_03_semigroup() {
    criterion(3);
}

#[test]
fn criterion_04_fundamental_theorem() {
    criterion(4);
}

#[test]
fn criterion_05_transform_symbols() {
    criterion(5);
}

#[test]
fn criterion_06_strong_vs_pointwise() {
    criterion(6);
}

#[test]
fn criterion_07_integer_collapse() {
    criterion(7);
}

#[test]
fn criterion_08_stirling_consistency() {
    criterion(8);
}

#[test]
fn criterion_09_pde_kernels() {
    criterion(9);
}

#[test]
fn criterion_10_pde_solutions() {
    criterion(10);
}

#[test]
fn criterion_11_domain_probe() {
    criterion(11);
}
