//! End-to-end verification gate: one test per criterion, each printing a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use tracecodes::acceptance;

fn check(r: tracecodes::error::Result<acceptance::CriterionResult>) {
    let r = r.expect("criterion execution failed");
    println!(
        "[{}] criterion {:>2} {:<28} ({:.2}s) {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.index,
        r.name,
        r.seconds,
        r.details
    );
    assert!(r.passed, "criterion {} ({}) failed: {}", r.index, r.name, r.details);
}

#[test]
fn criterion_01_quasi_orthogonality() {
    check(acceptance::criterion_1());
}

#[test]
fn criterion_02_weil_bound_oracle() {
    check(acceptance::criterion_2());
}

#[test]
fn criterion_03_enumeration_lower_bound() {
    check(acceptance::criterion_3());
}

#[test]
fn criterion_04_injectivity() {
    check(acceptance::criterion_4());
}

#[test]
fn criterion_05_spherical_code_chain() {
    check(acceptance::criterion_5());
}

#[test]
fn criterion_06_polynomial_bound_exactness() {
    check(acceptance::criterion_6());
}

#[test]
fn criterion_07_bound_composition() {
    check(acceptance::criterion_7());
}

#[test]
fn criterion_08_fourier_layer() {
    check(acceptance::criterion_8());
}

#[test]
fn criterion_09_trace_norm_lab() {
    check(acceptance::criterion_9());
}

#[test]
fn criterion_10_determinism() {
    check(acceptance::criterion_10());
}
