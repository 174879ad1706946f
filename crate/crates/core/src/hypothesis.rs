//! Binary hypothesis testing: exact Neyman–Pearson beta, the matched
//! output-distribution witness, and the code-level meta-converse.
//!
//! [`np_beta`] computes `β_α(P, Q)`: the minimum Q-measure over randomized
//! tests whose P-measure is at least `α`. Atoms are grouped into exact
//! likelihood-ratio classes (cross-product comparison, no division) and the
//! boundary class is randomized so the significance constraint is met with
//! equality.
//!
//! [`matched_witness`] builds, for a channel under maximum-likelihood
//! decoding at rate `R`, the output distribution `Q(y) = W(y|x_y)/η` whose
//! hypothesis-testing bound `β_{1-e^{-R}}(Q(x)Q(y), Q(x)W)` coincides with
//! the pairwise-exponent CDF `F(R)` — turning the generic converse into an
//! equality.

use serde::Serialize;
use serde_json::json;

use crate::bounds;
use crate::channel::{Channel, Metric, OutputDist, Prior};
use crate::error::{Error, Result};
use crate::simulator::Codebook;
use crate::sum::pairwise_sum;

// ---------------------------------------------------------------------------
// Joint distributions
// ---------------------------------------------------------------------------

/// A distribution over a finite ground set, flattened to a mass vector.
/// Hypothesis tests require both distributions to share the ground set
/// (equal lengths; index `i` means the same atom on both sides).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    masses: Vec<f64>,
}

impl JointDist {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::EmptyAlphabet {
                what: "distribution",
            });
        }
        for (i, &v) in masses.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::BadMassEntry { index: i, value: v });
            }
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > crate::channel::NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { masses })
    }

    /// Product law `Q(x) q(y)` on the input×output ground set (x-major).
    pub fn product(prior: &Prior, out: &OutputDist) -> Result<Self> {
        let masses = prior
            .masses()
            .iter()
            .flat_map(|&qx| out.masses().iter().map(move |&qy| qx * qy))
            .collect();
        Self::new(masses)
    }

    /// Joint law `Q(x) W(y|x)` on the input×output ground set (x-major).
    pub fn channel_joint(prior: &Prior, channel: &Channel) -> Result<Self> {
        if prior.len() != channel.num_inputs() {
            return Err(Error::DimensionMismatch {
                what: "prior",
                got: prior.len(),
                expected: channel.num_inputs(),
            });
        }
        let mut masses = Vec::with_capacity(prior.len() * channel.num_outputs());
        for x in 0..prior.len() {
            for y in 0..channel.num_outputs() {
                masses.push(prior.mass(x) * channel.w(x, y));
            }
        }
        Self::new(masses)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

// ---------------------------------------------------------------------------
// Neyman–Pearson
// ---------------------------------------------------------------------------

/// Result of an exact Neyman–Pearson optimization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NpResult {
    /// Minimum Q-measure over randomized tests with P-measure >= alpha.
    pub beta: f64,
    /// Log likelihood-ratio `log(P/Q)` of the boundary class
    /// (`+inf` when only Q-null atoms were needed, `-inf` when exhausted).
    pub log_lr_threshold: f64,
    /// Acceptance probability on the boundary ratio class.
    pub delta: f64,
    /// P-measure actually achieved; equals `alpha` up to rounding.
    pub achieved_alpha: f64,
}

#[derive(Debug, Clone, Copy)]
struct RatioClass {
    p: f64,
    q: f64,
    /// Representative atom for threshold reporting.
    rep: usize,
}

/// Likelihood-ratio order: infinite ratios (q = 0 < p) first, then finite
/// ratios descending, compared exactly by cross products `p1 q2 ? p2 q1`.
fn class_order(a: (f64, f64), b: (f64, f64)) -> core::cmp::Ordering {
    use core::cmp::Ordering;
    let inf_a = a.1 == 0.0;
    let inf_b = b.1 == 0.0;
    match (inf_a, inf_b) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => (b.0 * a.1).total_cmp(&(a.0 * b.1)),
    }
}

/// Exact Neyman–Pearson beta between two distributions on a shared ground
/// set: sorts atoms into exact likelihood-ratio classes, accepts whole
/// classes greedily by descending ratio, and randomizes the boundary class
/// so the P-measure equals `alpha`.
pub fn np_beta(p: &JointDist, q: &JointDist, alpha: f64) -> Result<NpResult> {
    if p.len() != q.len() {
        return Err(Error::GroundSetMismatch {
            p: p.len(),
            q: q.len(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::SignificanceOutOfRange { value: alpha });
    }

    // Only atoms with P-mass can contribute significance; Q-only atoms are
    // never accepted by an optimal test, and dead atoms don't exist.
    let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p.masses()[i] > 0.0).collect();
    idx.sort_by(|&i, &j| {
        class_order(
            (p.masses()[i], q.masses()[i]),
            (p.masses()[j], q.masses()[j]),
        )
    });

    // Group into exact ratio classes.
    let mut classes: Vec<RatioClass> = Vec::new();
    for &i in &idx {
        let atom = (p.masses()[i], q.masses()[i]);
        match classes.last_mut() {
            Some(last)
                if class_order((p.masses()[last.rep], q.masses()[last.rep]), atom)
                    == core::cmp::Ordering::Equal =>
            {
                last.p += atom.0;
                last.q += atom.1;
            }
            _ => classes.push(RatioClass {
                p: atom.0,
                q: atom.1,
                rep: i,
            }),
        }
    }

    let log_ratio = |c: &RatioClass| {
        let (pm, qm) = (p.masses()[c.rep], q.masses()[c.rep]);
        if qm == 0.0 {
            f64::INFINITY
        } else {
            pm.ln() - qm.ln()
        }
    };

    let mut cum = 0.0;
    let mut beta = 0.0;
    for class in &classes {
        if cum + class.p < alpha {
            cum += class.p;
            beta += class.q;
        } else {
            let delta = ((alpha - cum) / class.p).clamp(0.0, 1.0);
            return Ok(NpResult {
                beta: beta + delta * class.q,
                log_lr_threshold: log_ratio(class),
                delta,
                achieved_alpha: cum + delta * class.p,
            });
        }
    }
    // All P-mass accepted; any shortfall against alpha is float dust from
    // the normalization tolerance.
    Ok(NpResult {
        beta,
        log_lr_threshold: classes.last().map_or(f64::INFINITY, |c| log_ratio(c)),
        delta: 1.0,
        achieved_alpha: cum,
    })
}

// ---------------------------------------------------------------------------
// Matched witness
// ---------------------------------------------------------------------------

/// Per-output entry of a matched witness: the threshold symbol `x_y`, the
/// dither level `tau` solving `q_gt + tau * q_eq = e^{-R}`, and the witness
/// output mass `q(y) = W(y|x_y)/eta`.
#[derive(Debug, Clone, Copy)]
pub struct WitnessEntry {
    pub y: usize,
    pub x: usize,
    pub tau: f64,
    pub q: f64,
}

/// The output distribution under which the hypothesis-testing converse is
/// tight at rate `R` for maximum-likelihood decoding.
#[derive(Debug, Clone)]
pub struct MatchedWitness {
    pub rate: f64,
    pub eta: f64,
    pub per_y: Vec<WitnessEntry>,
    pub q_y: OutputDist,
}

impl MatchedWitness {
    /// Serializes with channel labels:
    /// `{"R":…, "eta":…, "per_y":[{"y":…, "x_y":…, "tau":…, "q":…}]}`.
    pub fn to_json(&self, channel: &Channel) -> String {
        let per_y: Vec<_> = self
            .per_y
            .iter()
            .map(|e| {
                json!({
                    "y": channel.output_labels()[e.y],
                    "x_y": channel.input_labels()[e.x],
                    "tau": e.tau,
                    "q": e.q,
                })
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "R": self.rate,
            "eta": self.eta,
            "per_y": per_y,
        }))
        .expect("witness serialization cannot fail")
    }
}

/// Builds the matched witness for `channel` under `prior` (full support
/// required by the bracketing scan) and maximum-likelihood decoding.
///
/// For each output, symbols are scanned in decreasing metric order until the
/// cumulative strictly-better mass brackets `e^{-R}`; the bracketing class
/// gives `x_y` and `tau`, and the witness output law is `W(y|x_y)/eta` with
/// `eta = Σ_y W(y|x_y)`.
pub fn matched_witness(prior: &Prior, channel: &Channel, rate: f64) -> Result<MatchedWitness> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::BadRate { value: rate });
    }
    if prior.len() != channel.num_inputs() {
        return Err(Error::DimensionMismatch {
            what: "prior",
            got: prior.len(),
            expected: channel.num_inputs(),
        });
    }
    let metric = Metric::ml(channel);
    let t = (-rate).exp();

    let mut per_y = Vec::with_capacity(channel.num_outputs());
    let mut raw_q = Vec::with_capacity(channel.num_outputs());
    for y in 0..channel.num_outputs() {
        // Distinct metric classes over the support, best first.
        let mut support: Vec<usize> = prior.support().collect();
        if support.is_empty() {
            return Err(Error::NoBracketingSymbol { y });
        }
        support.sort_by(|&a, &b| metric.value(b, y).total_cmp(&metric.value(a, y)));

        let mut chosen: Option<(usize, f64)> = None;
        let mut above = 0.0;
        let mut i = 0;
        while i < support.len() {
            let v = metric.value(support[i], y);
            let mut mass = 0.0;
            let rep = support[i];
            while i < support.len() && metric.value(support[i], y) == v {
                mass += prior.mass(support[i]);
                i += 1;
            }
            if above + mass >= t {
                let tau = ((t - above) / mass).clamp(0.0, 1.0);
                chosen = Some((rep, tau));
                break;
            }
            above += mass;
        }
        // The cumulative support mass is 1 up to rounding, so only float
        // dust can leave the scan empty; the last class then brackets.
        let (x, tau) = match chosen {
            Some(c) => c,
            None if t - above <= 1e-9 => {
                let rep = *support.last().unwrap();
                (rep, 1.0)
            }
            None => return Err(Error::NoBracketingSymbol { y }),
        };
        per_y.push(WitnessEntry { y, x, tau, q: 0.0 });
        raw_q.push(channel.w(x, y));
    }

    let eta = pairwise_sum(&raw_q);
    if eta == 0.0 {
        return Err(Error::DegenerateWitness);
    }
    let q_mass: Vec<f64> = raw_q.iter().map(|&w| w / eta).collect();
    for (e, &q) in per_y.iter_mut().zip(&q_mass) {
        e.q = q;
    }
    Ok(MatchedWitness {
        rate,
        eta,
        per_y,
        q_y: OutputDist::new(q_mass)?,
    })
}

/// Evaluates both sides of the hypothesis-testing converse at rate `R`:
/// `β_{1-e^{-R}}(Q(x) q(y), Q(x) W)` against the CDF `F(R)`. For any
/// output law, `beta <= cdf`; with the matched witness and the
/// maximum-likelihood metric they coincide.
pub fn beta_vs_cdf(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    q_y: &OutputDist,
    rate: f64,
) -> Result<(f64, f64)> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::BadRate { value: rate });
    }
    if q_y.len() != channel.num_outputs() {
        return Err(Error::DimensionMismatch {
            what: "output distribution",
            got: q_y.len(),
            expected: channel.num_outputs(),
        });
    }
    let t = (-rate).exp();
    let p_joint = JointDist::product(prior, q_y)?;
    let q_joint = JointDist::channel_joint(prior, channel)?;
    let np = np_beta(&p_joint, &q_joint, 1.0 - t)?;
    let cdf = bounds::threshold_cdf(prior, channel, metric, t)?;
    Ok((np.beta, cdf))
}

/// Hypothesis-testing lower bound on the average error probability of an
/// explicit code under *any* decoder: `β_{1-1/M}(P(x) q(y), P(x) W)` with
/// `P(x)` the code's empirical input distribution.
pub fn meta_converse_code_bound(
    code: &Codebook,
    channel: &Channel,
    q_y: &OutputDist,
) -> Result<f64> {
    if q_y.len() != channel.num_outputs() {
        return Err(Error::DimensionMismatch {
            what: "output distribution",
            got: q_y.len(),
            expected: channel.num_outputs(),
        });
    }
    let prior = code.empirical_prior(channel.num_inputs())?;
    let alpha = 1.0 - 1.0 / code.len() as f64;
    let p_joint = JointDist::product(&prior, q_y)?;
    let q_joint = JointDist::channel_joint(&prior, channel)?;
    Ok(np_beta(&p_joint, &q_joint, alpha)?.beta)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::pairwise_stats;
    use crate::simulator::evaluate_code_exact;
    use proptest::prelude::*;

    const LN2: f64 = core::f64::consts::LN_2;

    fn dist(v: &[f64]) -> JointDist {
        JointDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn np_beta_two_atom_example() {
        // Frozen by exhaustive randomized-test search: 0.5.
        let r = np_beta(&dist(&[0.8, 0.2]), &dist(&[0.5, 0.5]), 0.8).unwrap();
        assert!((r.beta - 0.5).abs() < 1e-15);
        assert!((r.achieved_alpha - 0.8).abs() < 1e-12);
    }

    #[test]
    fn np_beta_boundary_randomization() {
        let r = np_beta(&dist(&[0.6, 0.4]), &dist(&[0.1, 0.9]), 0.9).unwrap();
        assert!((r.beta - 0.775).abs() < 1e-15);
        assert!((r.delta - 0.75).abs() < 1e-15);
        assert!((r.achieved_alpha - 0.9).abs() < 1e-12);
    }

    #[test]
    fn np_beta_identical_hypotheses_is_identity() {
        let p = dist(&[0.2, 0.3, 0.4, 0.1]);
        for alpha in [0.0, 0.17, 0.5, 0.83, 1.0] {
            let r = np_beta(&p, &p, alpha).unwrap();
            assert!((r.beta - alpha).abs() < 1e-12, "alpha {alpha} -> {}", r.beta);
        }
    }

    #[test]
    fn np_beta_extremes() {
        let p = dist(&[0.5, 0.5, 0.0]);
        let q = dist(&[0.25, 0.25, 0.5]);
        let r0 = np_beta(&p, &q, 0.0).unwrap();
        assert_eq!(r0.beta, 0.0);
        // At alpha = 1, beta is the Q-mass of P's support.
        let r1 = np_beta(&p, &q, 1.0).unwrap();
        assert!((r1.beta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn np_beta_groups_exact_ratio_ties() {
        // Atoms (0.2, 0.1) and (0.4, 0.2) share ratio 2 exactly; the
        // boundary randomization must act on the merged class.
        let p = dist(&[0.2, 0.4, 0.4]);
        let q = dist(&[0.1, 0.2, 0.7]);
        let r = np_beta(&p, &q, 0.3).unwrap();
        assert!((r.delta - 0.5).abs() < 1e-15, "delta {}", r.delta);
        assert!((r.beta - 0.15).abs() < 1e-15);
        assert!((r.log_lr_threshold - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn np_beta_q_null_atoms_come_free() {
        // P puts mass where Q has none: significance costs no beta there.
        let p = dist(&[0.3, 0.7]);
        let q = dist(&[0.0, 1.0]);
        let r = np_beta(&p, &q, 0.3).unwrap();
        assert_eq!(r.beta, 0.0);
        assert_eq!(r.log_lr_threshold, f64::INFINITY);
    }

    #[test]
    fn np_beta_rejects_mismatched_ground_sets() {
        let err = np_beta(&dist(&[1.0]), &dist(&[0.5, 0.5]), 0.5).unwrap_err();
        assert!(matches!(err, Error::GroundSetMismatch { p: 1, q: 2 }));
        assert!(np_beta(&dist(&[1.0]), &dist(&[1.0]), 1.5).is_err());
    }

    #[test]
    fn witness_on_bsc_at_log_two() {
        // Threshold halves exactly at the top class: tau = 1, eta = 1.8,
        // uniform witness, and beta = F = 0.1.
        let ch = Channel::bsc(0.1).unwrap();
        let prior = Prior::uniform(2).unwrap();
        let w = matched_witness(&prior, &ch, LN2).unwrap();
        assert!((w.eta - 1.8).abs() < 1e-15);
        for e in &w.per_y {
            assert!((e.tau - 1.0).abs() < 1e-12);
            assert!((e.q - 0.5).abs() < 1e-15);
        }
        let metric = Metric::ml(&ch);
        let (beta, cdf) = beta_vs_cdf(&prior, &ch, &metric, &w.q_y, LN2).unwrap();
        assert!((beta - 0.1).abs() < 1e-12);
        assert!((cdf - 0.1).abs() < 1e-12);
        assert!((beta - cdf).abs() <= 1e-12);
    }

    #[test]
    fn witness_brackets_threshold_per_output() {
        let ch = Channel::from_rows(vec![
            vec![0.5, 0.2, 0.3],
            vec![0.1, 0.6, 0.3],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        let prior = Prior::new(vec![0.2, 0.3, 0.5]).unwrap();
        let metric = Metric::ml(&ch);
        for rate in [0.05, 0.4, LN2, 1.1, 2.5] {
            let t = (-rate as f64).exp();
            let w = matched_witness(&prior, &ch, rate).unwrap();
            for e in &w.per_y {
                let s = pairwise_stats(&prior, &metric, e.x, e.y).unwrap();
                assert!(s.q_gt <= t + 1e-12, "rate {rate}, y {}", e.y);
                assert!(s.q_gt + s.q_eq >= t - 1e-12);
                assert!(
                    (s.q_gt + e.tau * s.q_eq - t).abs() <= 1e-12,
                    "threshold identity broken at y {}",
                    e.y
                );
            }
            let (beta, cdf) = beta_vs_cdf(&prior, &ch, &metric, &w.q_y, rate).unwrap();
            assert!(
                (beta - cdf).abs() <= 1e-9,
                "rate {rate}: beta {beta} vs cdf {cdf}"
            );
        }
    }

    #[test]
    fn witness_rejects_all_zero_selected_rows() {
        // Identity channel at rate 0: every threshold symbol has W = 0.
        let ch = Channel::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let prior = Prior::uniform(2).unwrap();
        let err = matched_witness(&prior, &ch, 0.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateWitness));
    }

    #[test]
    fn witness_json_uses_labels() {
        let ch = Channel::bsc(0.1).unwrap();
        let prior = Prior::uniform(2).unwrap();
        let w = matched_witness(&prior, &ch, LN2).unwrap();
        let js = w.to_json(&ch);
        assert!(js.contains("\"x_y\""));
        assert!(js.contains("\"eta\""));
        let parsed: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(parsed["per_y"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn meta_converse_matches_exact_error_on_bsc_pair() {
        let ch = Channel::bsc(0.1).unwrap();
        let code = Codebook::new(vec![0, 1], 2).unwrap();
        let q_y = OutputDist::uniform(2).unwrap();
        let bound = meta_converse_code_bound(&code, &ch, &q_y).unwrap();
        assert!((bound - 0.1).abs() < 1e-15, "bound {bound}");
        let eps = evaluate_code_exact(&code, &ch, &Metric::ml(&ch)).unwrap();
        assert!(bound <= eps + 1e-12);
    }

    #[test]
    fn meta_converse_single_message_is_zero() {
        let ch = Channel::bsc(0.2).unwrap();
        let code = Codebook::new(vec![1], 2).unwrap();
        let q_y = OutputDist::uniform(2).unwrap();
        assert_eq!(meta_converse_code_bound(&code, &ch, &q_y).unwrap(), 0.0);
    }

    // -- properties ---------------------------------------------------------

    prop_compose! {
        fn arb_pair(n: usize)
            (pr in prop::collection::vec(0.02f64..1.0, n),
             qr in prop::collection::vec(0.02f64..1.0, n)) -> (JointDist, JointDist)
        {
            let ps: f64 = pr.iter().sum();
            let qs: f64 = qr.iter().sum();
            (
                JointDist::new(pr.iter().map(|v| v / ps).collect()).unwrap(),
                JointDist::new(qr.iter().map(|v| v / qs).collect()).unwrap(),
            )
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn beta_monotone_and_convex_in_alpha((p, q) in arb_pair(6)) {
            let alphas = [0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9];
            let betas: Vec<f64> = alphas
                .iter()
                .map(|&a| np_beta(&p, &q, a).unwrap().beta)
                .collect();
            for w in betas.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            // Midpoint convexity on the evenly spaced sub-grid.
            for i in 0..betas.len() - 2 {
                if (alphas[i + 2] - alphas[i + 1] - (alphas[i + 1] - alphas[i])).abs() < 1e-12 {
                    prop_assert!(2.0 * betas[i + 1] <= betas[i] + betas[i + 2] + 1e-12);
                }
            }
            // beta never exceeds alpha's trivial bound: beta <= 1.
            prop_assert!(betas.iter().all(|&b| (0.0..=1.0 + 1e-12).contains(&b)));
        }

        #[test]
        fn achieved_alpha_is_exact((p, q) in arb_pair(5), alpha in 0.0f64..1.0) {
            let r = np_beta(&p, &q, alpha).unwrap();
            prop_assert!((r.achieved_alpha - alpha).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.delta));
        }
    }
}
