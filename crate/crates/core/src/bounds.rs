//! Exact error-probability bounds indexed by rate or codebook size.
//!
//! Everything here is an expectation, over the joint law
//! `Q(x) W(y|x)`, of a closed-form integral of the dithered pairwise error
//! probability `p = q_gt + U q_eq`:
//!
//! * [`rate_cdf`] — `F(R) = Pr{ -log p <= R } = Pr{ p >= e^{-R} }`, the exact
//!   error probability of the best rate-`R` code under randomized
//!   tie-breaking (converse side).
//! * [`clipped_union_bound`] — `P = E[min(1, (M-1) p)]`, the clipped union
//!   bound (achievability side).
//! * [`exact_rc_error`] — `E[1 - (1-p)^{M-1}]`, the exact random-coding
//!   error; always within a factor of two of the clipped bound.
//!
//! Rate-indexed curves use the `M - 1 = e^R` convention (clipping factor and
//! exact exponent both `e^R`), which yields the identities
//! `P(R) = e^R ∫_R^∞ F(z) e^{-z} dz`, `dP/dR = P - F` and
//! `d(-log P)/dR = F/P - 1 ∈ [-1, 0]`. [`quadrature_identity_residual`]
//! checks the integral identity numerically.

use serde::Serialize;

use crate::channel::{Channel, Metric, PairwiseStats, Prior};
use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

// ---------------------------------------------------------------------------
// Per-pair dither integrals
// ---------------------------------------------------------------------------

/// `Pr{ a + U b >= t }` and `∫ min(1, (a + U b)/t) dU` share their branch
/// structure; keeping them in one place guarantees the CDF term never
/// exceeds the clipped term, even after floating-point rounding (the clipped
/// value is computed as the CDF value plus a provably non-negative term).
fn exceed_and_clip(a: f64, b: f64, t: f64) -> (f64, f64) {
    debug_assert!(t >= 0.0);
    // An underflowed threshold lands in the first branch (a >= 0 = t), which
    // is the correct limit: the clipping factor is effectively infinite.
    if t <= a {
        // Dither can't bring the competitor mass below the threshold.
        return (1.0, 1.0);
    }
    if b == 0.0 {
        return (0.0, (a / t).min(1.0));
    }
    if t >= a + b {
        // Never clipped: plain first moment over the dither.
        return (0.0, ((a + 0.5 * b) / t).min(1.0));
    }
    // Crossing: the dither straddles the threshold at u* = (t - a)/b.
    let u_star = ((t - a) / b).clamp(0.0, 1.0);
    let exceed = 1.0 - u_star;
    let clip = exceed + u_star * (a / t + u_star * (b / (2.0 * t)));
    (exceed, clip.min(1.0))
}

fn exceed_only(a: f64, b: f64, t: f64) -> f64 {
    exceed_and_clip(a, b, t).0
}

fn clip_only(a: f64, b: f64, t: f64) -> f64 {
    if t == f64::INFINITY {
        return 0.0; // zero competitors
    }
    exceed_and_clip(a, b, t).1
}

/// `E_U[ 1 - (1 - a - U b)^c ]` for competitor-count exponent `c >= 0`,
/// evaluated stably in the log domain.
fn exact_inner(a: f64, b: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if c == f64::INFINITY {
        // Infinitely many competitors: error unless the pair never collides.
        return if a > 0.0 || b > 0.0 { 1.0 } else { 0.0 };
    }
    let a = a.min(1.0);
    let s = (a + b).min(1.0);
    if b == 0.0 || s <= a {
        // Degenerate dither: 1 - (1-a)^c.
        return -(c * (-a).ln_1p()).exp_m1();
    }
    let b_eff = s - a;
    let big_a = (c + 1.0) * (-a).ln_1p();
    if big_a == f64::NEG_INFINITY {
        // (1-a)^{c+1} underflows to exactly 0, and (1-s)^{c+1} <= it.
        return 1.0;
    }
    let big_b = (c + 1.0) * (-s).ln_1p();
    // [(1-a)^{c+1} - (1-s)^{c+1}] / (b (c+1)), via e^A (1 - e^{B-A}).
    let diff = big_a.exp() * (-(big_b - big_a).exp_m1());
    (1.0 - diff / (b_eff * (c + 1.0))).clamp(0.0, 1.0)
}

/// Clipped union bound for a single pairwise statistic:
/// `∫_0^1 min(1, (M-1)(q_gt + u q_eq)) du` in closed form.
/// `M` may be any real `>= 1`.
pub fn clipped_pair_integral(stats: PairwiseStats, m: f64) -> Result<f64> {
    if !m.is_finite() || m < 1.0 {
        return Err(Error::BadCodebookSize { value: m });
    }
    let c = m - 1.0;
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(clip_only(stats.q_gt, stats.q_eq, 1.0 / c))
}

/// Exact random-coding error for a single pairwise statistic:
/// `E_U[1 - (1 - q_gt - u q_eq)^{M-1}]`. `M` may be any real `>= 1`.
pub fn exact_pair_integral(stats: PairwiseStats, m: f64) -> Result<f64> {
    if !m.is_finite() || m < 1.0 {
        return Err(Error::BadCodebookSize { value: m });
    }
    Ok(exact_inner(stats.q_gt, stats.q_eq, m - 1.0))
}

pub(crate) fn clipped_inner_at_threshold(a: f64, b: f64, t: f64) -> f64 {
    clip_only(a, b, t)
}

pub(crate) fn exact_inner_with_exponent(a: f64, b: f64, c: f64) -> f64 {
    exact_inner(a, b, c)
}

pub(crate) fn exceed_inner_at_threshold(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    exceed_only(a, b, t)
}

// ---------------------------------------------------------------------------
// Pair table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct PairTerm {
    /// Joint weight `Q(x) W(y|x)`.
    w: f64,
    /// Strictly-better competitor mass at this pair.
    a: f64,
    /// Exact-tie competitor mass at this pair.
    b: f64,
}

/// Flattened `(weight, q_gt, q_eq)` triples over the support of the joint
/// law, in a fixed (x-major) order. All bound quantities reduce over this
/// one table with one summation routine, so curves computed together are
/// bit-reproducible and order-consistent.
#[derive(Debug, Clone)]
pub(crate) struct PairTable {
    terms: Vec<PairTerm>,
}

impl PairTable {
    pub(crate) fn new(prior: &Prior, channel: &Channel, metric: &Metric) -> Result<Self> {
        if prior.len() != channel.num_inputs() {
            return Err(Error::DimensionMismatch {
                what: "prior",
                got: prior.len(),
                expected: channel.num_inputs(),
            });
        }
        if metric.num_inputs() != channel.num_inputs()
            || metric.num_outputs() != channel.num_outputs()
        {
            return Err(Error::DimensionMismatch {
                what: "metric",
                got: metric.num_inputs(),
                expected: channel.num_inputs(),
            });
        }
        let mut terms = Vec::new();
        for x in 0..channel.num_inputs() {
            let qx = prior.mass(x);
            if qx == 0.0 {
                continue;
            }
            for y in 0..channel.num_outputs() {
                let w = qx * channel.w(x, y);
                if w == 0.0 {
                    continue;
                }
                let s = crate::channel::pairwise_stats(prior, metric, x, y)?;
                terms.push(PairTerm {
                    w,
                    a: s.q_gt,
                    b: s.q_eq,
                });
            }
        }
        Ok(Self { terms })
    }

    /// Weighted reduction of a per-pair probability. The result is clamped
    /// to `[0, 1]`: the weights sum to 1 only up to the normalization
    /// tolerance, and clamping is monotone so it preserves the exact
    /// orderings between quantities reduced over the same table.
    fn reduce(&self, f: impl Fn(&PairTerm) -> f64) -> f64 {
        let vals: Vec<f64> = self.terms.iter().map(|t| t.w * f(t)).collect();
        pairwise_sum(&vals).clamp(0.0, 1.0)
    }

    pub(crate) fn cdf_at_threshold(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.total_weight().min(1.0);
        }
        self.reduce(|p| exceed_only(p.a, p.b, t))
    }

    /// Clipped union bound with threshold `t = 1/(clipping factor)`.
    pub(crate) fn clipped_at_threshold(&self, t: f64) -> f64 {
        self.reduce(|p| clip_only(p.a, p.b, t))
    }

    /// Exact random-coding error with competitor exponent `c`.
    pub(crate) fn exact_with_exponent(&self, c: f64) -> f64 {
        self.reduce(|p| exact_inner(p.a, p.b, c))
    }

    fn total_weight(&self) -> f64 {
        let vals: Vec<f64> = self.terms.iter().map(|t| t.w).collect();
        pairwise_sum(&vals)
    }

    /// Rates at which the CDF has slope breaks: `-log q_gt` and
    /// `-log(q_gt + q_eq)` over all pairs.
    fn kinks(&self) -> Vec<f64> {
        let mut ks = Vec::new();
        for t in &self.terms {
            if t.a > 0.0 {
                ks.push(-t.a.ln());
            }
            let s = t.a + t.b;
            if s > 0.0 {
                ks.push(-s.ln());
            }
        }
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        ks
    }

    /// Beyond `z_max`, every pair is in its terminal regime and
    /// `F(z) = total_weight - K e^{-z}` exactly, with
    /// `K = Σ_{q_gt = 0} w / q_eq`.
    fn tail_params(&self) -> (f64, f64) {
        let mut z_max: f64 = 0.0;
        let mut k_terms = Vec::new();
        for t in &self.terms {
            if t.a > 0.0 {
                z_max = z_max.max(-t.a.ln());
            } else {
                debug_assert!(t.b > 0.0);
                z_max = z_max.max(-t.b.ln());
                k_terms.push(t.w / t.b);
            }
        }
        (z_max, pairwise_sum(&k_terms))
    }
}

// ---------------------------------------------------------------------------
// Public bound evaluations
// ---------------------------------------------------------------------------

fn check_rate(rate: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::BadRate { value: rate });
    }
    Ok(())
}

/// `F(R) = Pr{ q_gt + U q_eq >= e^{-R} }` under the joint law `Q(x)W(y|x)`:
/// the cumulative distribution of the pairwise exponent `-log p` at rate
/// `R`, and the exact error probability of a rate-`R` code with randomized
/// tie-breaking. Rates are nats, `R >= 0`.
pub fn rate_cdf(prior: &Prior, channel: &Channel, metric: &Metric, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    threshold_cdf(prior, channel, metric, (-rate).exp())
}

/// Same CDF parameterized directly by the threshold `t = e^{-R}`; useful
/// when the threshold is exactly representable (e.g. `1/M`) and the rate is
/// not.
pub fn threshold_cdf(prior: &Prior, channel: &Channel, metric: &Metric, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::ThresholdOutOfRange { value: t });
    }
    Ok(PairTable::new(prior, channel, metric)?.cdf_at_threshold(t))
}

/// Clipped union bound `E[min(1, (M-1) p)]` for real or integer `M >= 1`.
pub fn clipped_union_bound(prior: &Prior, channel: &Channel, metric: &Metric, m: f64) -> Result<f64> {
    if !m.is_finite() || m < 1.0 {
        return Err(Error::BadCodebookSize { value: m });
    }
    let table = PairTable::new(prior, channel, metric)?;
    let c = m - 1.0;
    Ok(if c == 0.0 {
        0.0
    } else {
        table.clipped_at_threshold(1.0 / c)
    })
}

/// Rate-indexed clipped union bound `P(R) = E[min(1, e^R p)]`
/// (the `M - 1 = e^R` convention).
pub fn clipped_union_bound_at_rate(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    rate: f64,
) -> Result<f64> {
    check_rate(rate)?;
    let table = PairTable::new(prior, channel, metric)?;
    Ok(table.clipped_at_threshold((-rate).exp()))
}

/// Exact random-coding error `E[1 - (1-p)^{M-1}]` for an integer codebook
/// size `M >= 1` (an i.i.d. codebook of `M` words, randomized-tie decoder).
pub fn exact_rc_error(prior: &Prior, channel: &Channel, metric: &Metric, m: f64) -> Result<f64> {
    if !m.is_finite() || m < 1.0 {
        return Err(Error::BadCodebookSize { value: m });
    }
    if m.fract() != 0.0 {
        return Err(Error::NonIntegerCodebookSize { value: m });
    }
    let table = PairTable::new(prior, channel, metric)?;
    Ok(table.exact_with_exponent(m - 1.0))
}

/// Rate-indexed exact random-coding error with competitor exponent `e^R`.
pub fn exact_rc_error_at_rate(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    rate: f64,
) -> Result<f64> {
    check_rate(rate)?;
    let table = PairTable::new(prior, channel, metric)?;
    Ok(table.exact_with_exponent(rate.exp()))
}

/// `1 - (1 - p)^{M-1}`: probability that at least one of `M - 1` independent
/// competitors beats the transmitted word, given pairwise error probability
/// `p`. Stable for tiny `(M-1) p` via `log1p`/`expm1`.
pub fn rc_error_from_pairwise(p: f64, m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    if !m.is_finite() || m < 1.0 {
        return Err(Error::BadCodebookSize { value: m });
    }
    Ok(-((m - 1.0) * (-p).ln_1p()).exp_m1())
}

/// `E_r = -log P`. Returns `+inf` as a sentinel at `P = 0` (zero error
/// probability has infinite exponent; this is a result, not an error).
pub fn error_exponent(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(if p == 0.0 { f64::INFINITY } else { -p.ln() })
}

/// Slope of the error exponent: `d(-log P)/dR = F/P - 1`. Undefined at
/// `P = 0`.
pub fn exponent_slope(cdf: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cdf) || cdf.is_nan() {
        return Err(Error::ProbabilityOutOfRange { value: cdf });
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    if p == 0.0 {
        return Err(Error::SlopeUndefined);
    }
    Ok(cdf / p - 1.0)
}

/// Rates at which the CDF `F` has slope breaks for this configuration
/// (useful for keeping finite-difference probes away from kinks).
pub fn cdf_kinks(prior: &Prior, channel: &Channel, metric: &Metric) -> Result<Vec<f64>> {
    Ok(PairTable::new(prior, channel, metric)?.kinks())
}

/// Residual `|P(R) - e^R ∫_R^∞ F(z) e^{-z} dz|` of the integral identity
/// linking the clipped bound to the CDF.
///
/// The integrand is integrated by composite trapezoid with sub-steps no
/// larger than `step`, on segments aligned to the CDF's kinks, up to the
/// point `z_max` beyond which every pair is in its terminal regime; there
/// `F(z) = W - K e^{-z}` exactly and the tail integral is analytic.
pub fn quadrature_identity_residual(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    rate: f64,
    step: f64,
) -> Result<f64> {
    check_rate(rate)?;
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::BadStep { value: step });
    }
    let table = PairTable::new(prior, channel, metric)?;
    let lhs = table.clipped_at_threshold((-rate).exp());

    let (z_knee, k) = table.tail_params();
    let z_hi = z_knee.max(rate);
    let w_tot = table.total_weight();

    // Kink-aligned composite trapezoid of g(z) = F(z) e^{-z} on [rate, z_hi].
    let mut cut_points = vec![rate];
    for z in table.kinks() {
        if z > rate && z < z_hi {
            cut_points.push(z);
        }
    }
    cut_points.push(z_hi);

    let g = |z: f64| table.cdf_at_threshold((-z).exp()) * (-z).exp();
    let mut integral = 0.0;
    for seg in cut_points.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi <= lo {
            continue;
        }
        let n = ((hi - lo) / step).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.5 * (g(lo) + g(hi));
        for i in 1..n {
            acc += g(lo + h * i as f64);
        }
        integral += acc * h;
    }

    // Exact analytic tail: ∫_{z_hi}^∞ (W - K e^{-z}) e^{-z} dz.
    let tail = w_tot * (-z_hi).exp() - 0.5 * k * (-2.0 * z_hi).exp();
    let rhs = rate.exp() * (integral + tail);
    Ok((lhs - rhs).abs())
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// A rate paired with its codebook size, kept consistent (`M = e^R`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub rate_nats: f64,
    pub size: f64,
}

impl RatePoint {
    pub fn new(rate_nats: f64, size: f64) -> Result<Self> {
        check_rate(rate_nats)?;
        if !size.is_finite() || size < 1.0 {
            return Err(Error::BadCodebookSize { value: size });
        }
        let gap = (size.ln() - rate_nats).abs();
        if gap > 1e-12 {
            return Err(Error::InconsistentRatePoint { gap });
        }
        Ok(Self { rate_nats, size })
    }

    pub fn from_rate(rate_nats: f64) -> Result<Self> {
        check_rate(rate_nats)?;
        Ok(Self {
            rate_nats,
            size: rate_nats.exp(),
        })
    }

    pub fn from_size(size: u64) -> Result<Self> {
        if size < 1 {
            return Err(Error::BadCodebookSize { value: size as f64 });
        }
        Ok(Self {
            rate_nats: (size as f64).ln(),
            size: size as f64,
        })
    }
}

/// One evaluated grid point of a bound curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundPoint {
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "F")]
    pub cdf: f64,
    #[serde(rename = "P_clipped")]
    pub clipped: f64,
    #[serde(rename = "P_exact")]
    pub exact: f64,
    #[serde(rename = "Er")]
    pub exponent: f64,
    #[serde(rename = "Er_prime")]
    pub slope: Option<f64>,
}

impl BoundPoint {
    fn from_table(table: &PairTable, rate: f64) -> Self {
        let t = (-rate).exp();
        let cdf = table.cdf_at_threshold(t);
        let clipped = table.clipped_at_threshold(t);
        let exact = table.exact_with_exponent(rate.exp());
        Self::assemble(rate, cdf, clipped, exact)
    }

    pub(crate) fn assemble(rate: f64, cdf: f64, clipped: f64, exact: f64) -> Self {
        let exponent = if clipped == 0.0 {
            f64::INFINITY
        } else {
            -clipped.ln()
        };
        let slope = if clipped == 0.0 {
            None
        } else {
            Some(cdf / clipped - 1.0)
        };
        Self {
            rate,
            cdf,
            clipped,
            exact,
            exponent,
            slope,
        }
    }
}

/// An evaluated bound curve over a rate grid.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
}

pub const CURVE_CSV_HEADER: &str = "R,F,P_clipped,P_exact,Er,Er_prime";

impl BoundCurve {
    /// Exact CSV serialization: header `R,F,P_clipped,P_exact,Er,Er_prime`,
    /// shortest round-trip float formatting, `inf` for an infinite exponent
    /// and an empty field for an undefined slope.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let slope = p.slope.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.rate, p.cdf, p.clipped, p.exact, p.exponent, slope
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.points).expect("curve serialization cannot fail")
    }
}

fn check_rate_grid(rates: &[f64]) -> Result<()> {
    if rates.is_empty() {
        return Err(Error::BadRateGrid);
    }
    for w in rates.windows(2) {
        if w[1] < w[0] {
            return Err(Error::BadRateGrid);
        }
    }
    for &r in rates {
        check_rate(r)?;
    }
    Ok(())
}

/// Evaluates all bound quantities over a non-decreasing rate grid using the
/// rate-indexed (`M - 1 = e^R`) convention.
pub fn sweep(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    rates: &[f64],
) -> Result<BoundCurve> {
    check_rate_grid(rates)?;
    let table = PairTable::new(prior, channel, metric)?;
    Ok(BoundCurve {
        points: rates
            .iter()
            .map(|&r| BoundPoint::from_table(&table, r))
            .collect(),
    })
}

/// Single-point evaluation for an explicit integer codebook size `M`:
/// threshold exactly `1/M` for the CDF, clipping factor and exponent `M-1`.
pub fn point_for_size(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    size: u64,
) -> Result<BoundPoint> {
    let rp = RatePoint::from_size(size)?;
    let table = PairTable::new(prior, channel, metric)?;
    let m = size as f64;
    let cdf = table.cdf_at_threshold(1.0 / m);
    let c = m - 1.0;
    let clipped = if c == 0.0 {
        0.0
    } else {
        table.clipped_at_threshold(1.0 / c)
    };
    let exact = table.exact_with_exponent(c);
    Ok(BoundPoint::assemble(rp.rate_nats, cdf, clipped, exact))
}

/// Builds a uniform rate grid with `points` entries spanning `[lo, hi]`.
pub fn rate_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    check_rate(lo)?;
    check_rate(hi)?;
    if points == 0 || hi < lo || (points > 1 && hi == lo) {
        return Err(Error::BadRateGrid);
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let h = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + h * i as f64).collect())
}

// ---------------------------------------------------------------------------
