//! Fixed-order pairwise summation.
//!
//! All bound quantities accumulate per-pair terms with this one routine so
//! that (a) results are bit-reproducible regardless of thread count, and
//! (b) two quantities whose per-pair terms are pointwise ordered stay ordered
//! after summation (round-to-nearest is monotone and both sides share the
//! same reduction tree).

/// Sums a slice by recursive halving. Deterministic for a given slice length.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::pairwise_sum;

    #[test]
    fn matches_naive_sum_on_small_inputs() {
        let xs = [0.1, 0.2, 0.3, 0.4];
        assert!((pairwise_sum(&xs) - 1.0).abs() < 1e-15);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[2.5]), 2.5);
    }

    #[test]
    fn is_monotone_in_each_term() {
        // Same tree shape, pointwise-ordered terms => ordered sums.
        let lo: Vec<f64> = (0..17).map(|i| (i as f64) * 0.013).collect();
        let hi: Vec<f64> = lo.iter().map(|x| x + 1e-17).collect();
        assert!(pairwise_sum(&lo) <= pairwise_sum(&hi));
    }
}
