//! Acceptance suite: runs every self-certification fleet at its frozen
//! tolerance and prints one pass/fail line per property (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use fbl_core::verify;

const SEED: u64 = 7;

fn gate(report: verify::PropertyReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn converse_equality_on_explicit_codes() {
    let start = Instant::now();
    let report = verify::check_converse_equality(SEED);
    let elapsed = start.elapsed();
    gate(report);
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "converse-equality fleet took {elapsed:?}, budget is 5 s"
    );
}

#[test]
fn exact_error_sandwiched_by_clipped_bound() {
    gate(verify::check_sandwich(SEED));
}

#[test]
fn clipped_bound_equals_cdf_integral() {
    gate(verify::check_quadrature(SEED));
}

#[test]
fn closed_form_derivatives_match_finite_differences() {
    gate(verify::check_derivatives(SEED));
}

#[test]
fn witness_makes_hypothesis_test_tight() {
    gate(verify::check_witness(SEED));
}

#[test]
fn dithered_pairwise_probability_is_uniform() {
    gate(verify::check_uniformity(SEED));
}

#[test]
fn product_channel_closed_forms_match_enumeration() {
    let start = Instant::now();
    let report = verify::check_product_fidelity(SEED);
    let elapsed = start.elapsed();
    gate(report);
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "product-fidelity fleet took {elapsed:?}, budget is 10 s"
    );
}

#[test]
fn monte_carlo_agrees_with_exact_error() {
    gate(verify::check_monte_carlo(SEED));
}

#[test]
fn meta_converse_never_exceeds_exact_error() {
    gate(verify::check_meta_converse(SEED));
}

#[test]
fn slope_stays_within_unit_interval() {
    gate(verify::check_slope_range(SEED));
}
