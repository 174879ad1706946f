//! Closed-form bound curves for memoryless product channels.
//!
//! For `n` uses of a binary symmetric channel under uniform inputs and
//! maximum-likelihood decoding, the pairwise competitor masses depend only on
//! the Hamming distance between the received word and the transmitted one, so
//! every bound reduces to a sum over `n + 1` distance classes instead of
//! `2^n x 2^n` explicit pairs. The binary erasure channel reduces the same
//! way over erasure counts. Class data is carried in the log domain so
//! blocklengths in the hundreds stay finite.
//!
//! The explicit `build_*` constructors materialize the same product channels
//! as dense matrices; they exist so small instances can be cross-checked
//! against the generic per-pair pipeline, and they are exponential in `n`.

use crate::bounds::{self, BoundCurve, BoundPoint};
use crate::channel::{Channel, Prior};
use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

const LN_2: f64 = core::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Log-domain combinatorics
// ---------------------------------------------------------------------------

/// Prefix table of `ln k!` for exact-enough log-domain binomials.
#[derive(Debug, Clone)]
pub struct LnFactTable {
    lf: Vec<f64>,
}

impl LnFactTable {
    pub fn new(n: usize) -> Self {
        let mut lf = Vec::with_capacity(n + 1);
        lf.push(0.0);
        for k in 1..=n {
            lf.push(lf[k - 1] + (k as f64).ln());
        }
        Self { lf }
    }

    /// `ln C(n, k)`; `n` must be within the table.
    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        assert!(k <= n && n < self.lf.len(), "ln_choose out of table range");
        self.lf[n] - self.lf[k] - self.lf[n - k]
    }
}

/// `ln(e^x + e^y)` without overflow.
fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

// ---------------------------------------------------------------------------
// Channel specifications
// ---------------------------------------------------------------------------

/// `n` independent uses of a binary symmetric channel with crossover
/// probability `p`, uniform inputs, maximum-likelihood decoding.
#[derive(Debug, Clone, Copy)]
pub struct BscSpec {
    n: usize,
    p: f64,
}

impl BscSpec {
    /// Requires `n >= 1` and `0 < p < 1/2` (the strict ordering of metric
    /// classes by Hamming distance needs `p` below one half).
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadBlocklength);
        }
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::BadParameter {
                what: "crossover probability",
                value: p,
            });
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `n` independent uses of a binary erasure channel with erasure probability
/// `eps`, uniform inputs, maximum-likelihood decoding.
#[derive(Debug, Clone, Copy)]
pub struct BecSpec {
    n: usize,
    eps: f64,
}

impl BecSpec {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadBlocklength);
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadParameter {
                what: "erasure probability",
                value: eps,
            });
        }
        Ok(Self { n, eps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

// ---------------------------------------------------------------------------
// Distance classes
// ---------------------------------------------------------------------------

/// One Hamming-distance class of the symmetric product channel, in logs:
/// the joint weight of pairs at distance `d`, the uniform competitor mass
/// strictly closer than `d`, at most `d`, and exactly at `d`.
#[derive(Debug, Clone, Copy)]
pub struct DistanceClass {
    pub d: usize,
    pub log_weight: f64,
    pub log_q_lt: f64,
    pub log_q_le: f64,
    pub log_q_eq: f64,
}

/// Per-distance statistics for `spec`: `n + 1` classes with
/// `q_eq(d) = 2^{-n} C(n, d)` and `q_lt(d) = 2^{-n} Σ_{k<d} C(n, k)`.
pub fn bsc_distance_classes(spec: &BscSpec) -> Vec<DistanceClass> {
    let n = spec.n;
    let table = LnFactTable::new(n);
    let ln_p = spec.p.ln();
    let ln_1p = (-spec.p).ln_1p();
    let ln_half_n = -(n as f64) * LN_2;

    let mut classes = Vec::with_capacity(n + 1);
    let mut log_q_lt = f64::NEG_INFINITY;
    for d in 0..=n {
        let ln_c = table.ln_choose(n, d);
        let log_q_eq = ln_c + ln_half_n;
        let log_q_le = log_add_exp(log_q_lt, log_q_eq);
        classes.push(DistanceClass {
            d,
            log_weight: ln_c + d as f64 * ln_p + (n - d) as f64 * ln_1p,
            log_q_lt,
            log_q_le,
            log_q_eq,
        });
        log_q_lt = log_q_le;
    }
    classes
}

/// `Pr{ q_lt + U q_eq >= e^{-rate} }` for one class, evaluated from logs so
/// huge blocklengths cannot underflow: in the crossing regime the value is
/// `(q_le / q_eq) (1 - t / q_le)`.
fn class_exceed(c: &DistanceClass, rate: f64) -> f64 {
    let log_t = -rate;
    if log_t <= c.log_q_lt {
        return 1.0;
    }
    if log_t >= c.log_q_le {
        return 0.0;
    }
    let v = (c.log_q_le - c.log_q_eq).exp() * -(log_t - c.log_q_le).exp_m1();
    v.clamp(0.0, 1.0)
}

fn check_rate(rate: f64) -> Result<f64> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::BadRate { value: rate });
    }
    Ok(rate)
}

fn check_size(m: f64) -> Result<f64> {
    if !m.is_finite() || m < 1.0 {
        return Err(Error::BadCodebookSize { value: m });
    }
    Ok(m - 1.0)
}

/// Sums `weight(d) * f(class d)` over all distance classes; clamped to
/// `[0, 1]` like the generic pair-table reduction (weights carry log-domain
/// round-off), which is monotone and so order-preserving.
fn class_reduce<F: Fn(&DistanceClass) -> f64>(classes: &[DistanceClass], f: F) -> f64 {
    let terms: Vec<f64> = classes
        .iter()
        .map(|c| c.log_weight.exp() * f(c))
        .collect();
    pairwise_sum(&terms).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Binary symmetric channel, closed forms
// ---------------------------------------------------------------------------

/// CDF `F(rate)` of the pairwise exponent for the product channel.
pub fn bsc_rate_cdf(spec: &BscSpec, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    let classes = bsc_distance_classes(spec);
    Ok(class_reduce(&classes, |c| class_exceed(c, rate)))
}

fn bsc_clipped_with_threshold(spec: &BscSpec, t: f64) -> f64 {
    let classes = bsc_distance_classes(spec);
    class_reduce(&classes, |c| {
        bounds::clipped_inner_at_threshold(c.log_q_lt.exp(), c.log_q_eq.exp(), t)
    })
}

fn bsc_exact_with_exponent(spec: &BscSpec, c_exp: f64) -> f64 {
    let classes = bsc_distance_classes(spec);
    class_reduce(&classes, |c| {
        bounds::exact_inner_with_exponent(c.log_q_lt.exp(), c.log_q_eq.exp(), c_exp)
    })
}

/// Clipped union bound for an explicit codebook size `m >= 1`.
pub fn bsc_clipped_union_bound(spec: &BscSpec, m: f64) -> Result<f64> {
    let c = check_size(m)?;
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(bsc_clipped_with_threshold(spec, 1.0 / c))
}

/// Exact random-coding error for an explicit codebook size `m >= 1`.
pub fn bsc_exact_rc_error(spec: &BscSpec, m: f64) -> Result<f64> {
    let c = check_size(m)?;
    Ok(bsc_exact_with_exponent(spec, c))
}

/// Full bound point in the rate-indexed convention (`M - 1 = e^rate`).
/// The CDF here shares the per-pair branch structure with the clipped bound
/// (linear-domain masses), so `cdf <= clipped` holds exactly in floats; use
/// [`bsc_rate_cdf`] alone for blocklengths where the masses underflow.
pub fn bsc_point_at_rate(spec: &BscSpec, rate: f64) -> Result<BoundPoint> {
    check_rate(rate)?;
    let classes = bsc_distance_classes(spec);
    let t = (-rate).exp();
    let cdf = class_reduce(&classes, |c| {
        bounds::exceed_inner_at_threshold(c.log_q_lt.exp(), c.log_q_eq.exp(), t)
    });
    let clipped = class_reduce(&classes, |c| {
        bounds::clipped_inner_at_threshold(c.log_q_lt.exp(), c.log_q_eq.exp(), t)
    });
    let exact = class_reduce(&classes, |c| {
        bounds::exact_inner_with_exponent(c.log_q_lt.exp(), c.log_q_eq.exp(), rate.exp())
    });
    Ok(BoundPoint::assemble(rate, cdf, clipped, exact))
}

/// Single-point evaluation for an explicit integer codebook size: threshold
/// exactly `1/size` for the CDF, clipping factor and exponent `size - 1`.
pub fn bsc_point_for_size(spec: &BscSpec, size: u64) -> Result<BoundPoint> {
    if size < 1 {
        return Err(Error::BadCodebookSize { value: size as f64 });
    }
    let classes = bsc_distance_classes(spec);
    let m = size as f64;
    let cdf = class_reduce(&classes, |c| {
        bounds::exceed_inner_at_threshold(c.log_q_lt.exp(), c.log_q_eq.exp(), 1.0 / m)
    });
    let c_exp = m - 1.0;
    let clipped = if c_exp == 0.0 {
        0.0
    } else {
        class_reduce(&classes, |c| {
            bounds::clipped_inner_at_threshold(c.log_q_lt.exp(), c.log_q_eq.exp(), 1.0 / c_exp)
        })
    };
    let exact = class_reduce(&classes, |c| {
        bounds::exact_inner_with_exponent(c.log_q_lt.exp(), c.log_q_eq.exp(), c_exp)
    });
    Ok(BoundPoint::assemble(m.ln(), cdf, clipped, exact))
}

/// Bound curve over a non-decreasing rate grid, rate-indexed convention.
pub fn bsc_curve(spec: &BscSpec, rates: &[f64]) -> Result<BoundCurve> {
    let points = rates
        .iter()
        .map(|&r| bsc_point_at_rate(spec, r))
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::BadRateGrid);
    }
    Ok(BoundCurve { points })
}

// ---------------------------------------------------------------------------
// Binary erasure channel, closed forms
// ---------------------------------------------------------------------------

/// Erasure-count classes: with `e` erasures every compatible competitor ties
/// the transmitted word exactly, so `q_lt = 0` and `q_eq = 2^{e-n}`.
fn bec_classes(spec: &BecSpec) -> Vec<DistanceClass> {
    let n = spec.n;
    let table = LnFactTable::new(n);
    let ln_e = spec.eps.ln();
    let ln_1e = (-spec.eps).ln_1p();
    (0..=n)
        .map(|e| {
            let log_q_eq = -((n - e) as f64) * LN_2;
            DistanceClass {
                d: e,
                log_weight: table.ln_choose(n, e) + e as f64 * ln_e + (n - e) as f64 * ln_1e,
                log_q_lt: f64::NEG_INFINITY,
                log_q_le: log_q_eq,
                log_q_eq,
            }
        })
        .collect()
}

/// CDF `F(rate)`: `Σ_e C(n,e) eps^e (1-eps)^{n-e} max(0, 1 - e^{-rate} 2^{n-e})`.
pub fn bec_rate_cdf(spec: &BecSpec, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    let classes = bec_classes(spec);
    Ok(class_reduce(&classes, |c| class_exceed(c, rate)))
}

/// Clipped union bound for an explicit codebook size `m >= 1`.
pub fn bec_clipped_union_bound(spec: &BecSpec, m: f64) -> Result<f64> {
    let c = check_size(m)?;
    if c == 0.0 {
        return Ok(0.0);
    }
    let classes = bec_classes(spec);
    Ok(class_reduce(&classes, |cl| {
        bounds::clipped_inner_at_threshold(0.0, cl.log_q_eq.exp(), 1.0 / c)
    }))
}

/// Exact random-coding error for an explicit codebook size `m >= 1`.
pub fn bec_exact_rc_error(spec: &BecSpec, m: f64) -> Result<f64> {
    let c = check_size(m)?;
    let classes = bec_classes(spec);
    Ok(class_reduce(&classes, |cl| {
        bounds::exact_inner_with_exponent(0.0, cl.log_q_eq.exp(), c)
    }))
}

/// Full bound point in the rate-indexed convention (`M - 1 = e^rate`), with
/// the same linear-domain branch sharing as [`bsc_point_at_rate`].
pub fn bec_point_at_rate(spec: &BecSpec, rate: f64) -> Result<BoundPoint> {
    check_rate(rate)?;
    let classes = bec_classes(spec);
    let t = (-rate).exp();
    let cdf = class_reduce(&classes, |c| {
        bounds::exceed_inner_at_threshold(0.0, c.log_q_eq.exp(), t)
    });
    let clipped = class_reduce(&classes, |c| {
        bounds::clipped_inner_at_threshold(0.0, c.log_q_eq.exp(), t)
    });
    let exact = class_reduce(&classes, |c| {
        bounds::exact_inner_with_exponent(0.0, c.log_q_eq.exp(), rate.exp())
    });
    Ok(BoundPoint::assemble(rate, cdf, clipped, exact))
}

/// Single-point evaluation for an explicit integer codebook size, mirroring
/// [`bsc_point_for_size`].
pub fn bec_point_for_size(spec: &BecSpec, size: u64) -> Result<BoundPoint> {
    if size < 1 {
        return Err(Error::BadCodebookSize { value: size as f64 });
    }
    let classes = bec_classes(spec);
    let m = size as f64;
    let cdf = class_reduce(&classes, |c| {
        bounds::exceed_inner_at_threshold(0.0, c.log_q_eq.exp(), 1.0 / m)
    });
    let c_exp = m - 1.0;
    let clipped = if c_exp == 0.0 {
        0.0
    } else {
        class_reduce(&classes, |c| {
            bounds::clipped_inner_at_threshold(0.0, c.log_q_eq.exp(), 1.0 / c_exp)
        })
    };
    let exact = class_reduce(&classes, |c| {
        bounds::exact_inner_with_exponent(0.0, c.log_q_eq.exp(), c_exp)
    });
    Ok(BoundPoint::assemble(m.ln(), cdf, clipped, exact))
}

/// Bound curve over a non-decreasing rate grid, rate-indexed convention.
pub fn bec_curve(spec: &BecSpec, rates: &[f64]) -> Result<BoundCurve> {
    let points = rates
        .iter()
        .map(|&r| bec_point_at_rate(spec, r))
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::BadRateGrid);
    }
    Ok(BoundCurve { points })
}

// ---------------------------------------------------------------------------
// Explicit dense constructions (exponential in n; for cross-checks)
// ---------------------------------------------------------------------------

fn binary_label(word: usize, n: usize) -> String {
    (0..n)
        .rev()
        .map(|i| if word >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Dense `2^n x 2^n` transition matrix of the repeated binary symmetric
/// channel, with bit-exact tie classes (`p^d (1-p)^{n-d}` via integer
/// exponents) and binary-string labels.
pub fn build_bsc_product_channel(spec: &BscSpec) -> Result<Channel> {
    let n = spec.n;
    if n > 16 {
        return Err(Error::BadBlocklength);
    }
    let size = 1usize << n;
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|x| {
            (0..size)
                .map(|y| {
                    let d = (x ^ y).count_ones() as i32;
                    spec.p.powi(d) * (1.0 - spec.p).powi(n as i32 - d)
                })
                .collect()
        })
        .collect();
    let labels: Vec<String> = (0..size).map(|w| binary_label(w, n)).collect();
    Channel::new(labels.clone(), labels, rows)
}

/// Dense `2^n x 3^n` transition matrix of the repeated binary erasure
/// channel. Output labels use `?` for an erased coordinate.
pub fn build_bec_product_channel(spec: &BecSpec) -> Result<Channel> {
    let n = spec.n;
    if n > 10 {
        return Err(Error::BadBlocklength);
    }
    let in_size = 1usize << n;
    let out_size = 3usize.pow(n as u32);
    // Output index base 3, most significant coordinate first: 0, 1, erased.
    let digits = |mut y: usize| {
        let mut ds = vec![0u8; n];
        for i in (0..n).rev() {
            ds[i] = (y % 3) as u8;
            y /= 3;
        }
        ds
    };
    let rows: Vec<Vec<f64>> = (0..in_size)
        .map(|x| {
            (0..out_size)
                .map(|y| {
                    let ds = digits(y);
                    let mut erased = 0i32;
                    for (i, &d) in ds.iter().enumerate() {
                        let bit = (x >> (n - 1 - i) & 1) as u8;
                        match d {
                            2 => erased += 1,
                            b if b == bit => {}
                            _ => return 0.0,
                        }
                    }
                    spec.eps.powi(erased) * (1.0 - spec.eps).powi(n as i32 - erased)
                })
                .collect()
        })
        .collect();
    let in_labels: Vec<String> = (0..in_size).map(|w| binary_label(w, n)).collect();
    let out_labels: Vec<String> = (0..out_size)
        .map(|y| {
            digits(y)
                .iter()
                .map(|&d| match d {
                    0 => '0',
                    1 => '1',
                    _ => '?',
                })
                .collect()
        })
        .collect();
    Channel::new(in_labels, out_labels, rows)
}

/// Uniform prior over the `2^n` product inputs.
pub fn product_uniform_prior(n: usize) -> Result<Prior> {
    if n == 0 || n > 16 {
        return Err(Error::BadBlocklength);
    }
    Prior::uniform(1usize << n)
}

/// Total weight `Σ_d exp(log_weight)`; equals 1 up to accumulated rounding
/// and is the cheap sanity check that huge-blocklength tables stay sound.
pub fn bsc_weight_norm(spec: &BscSpec) -> f64 {
    let classes = bsc_distance_classes(spec);
    let terms: Vec<f64> = classes.iter().map(|c| c.log_weight.exp()).collect();
    pairwise_sum(&terms)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Metric;

    const LN2: f64 = core::f64::consts::LN_2;

    #[test]
    fn single_use_bsc_classes() {
        let spec = BscSpec::new(1, 0.1).unwrap();
        let cls = bsc_distance_classes(&spec);
        assert_eq!(cls.len(), 2);
        assert_eq!(cls[0].log_q_lt, f64::NEG_INFINITY);
        assert!((cls[0].log_q_eq.exp() - 0.5).abs() < 1e-15);
        assert!((cls[1].log_q_lt.exp() - 0.5).abs() < 1e-15);
        assert!((cls[1].log_q_le.exp() - 1.0).abs() < 1e-12);
        assert!((cls[0].log_weight.exp() - 0.9).abs() < 1e-15);
        assert!((cls[1].log_weight.exp() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn single_use_bsc_matches_scalar_channel() {
        // n = 1 must agree with the generic pipeline on the plain 2x2 matrix.
        let spec = BscSpec::new(1, 0.1).unwrap();
        let ch = Channel::bsc(0.1).unwrap();
        let prior = Prior::uniform(2).unwrap();
        let metric = Metric::ml(&ch);
        for rate in [0.0, 0.3, LN2, 1.5] {
            let f1 = bsc_rate_cdf(&spec, rate).unwrap();
            let f2 = bounds::rate_cdf(&prior, &ch, &metric, rate).unwrap();
            assert!((f1 - f2).abs() < 1e-14, "rate {rate}: {f1} vs {f2}");
        }
        let e1 = bsc_exact_rc_error(&spec, 4.0).unwrap();
        let e2 = bounds::exact_rc_error(&prior, &ch, &metric, 4.0).unwrap();
        assert!((e1 - e2).abs() < 1e-14);
    }

    #[test]
    fn bsc_product_matches_dense_enumeration() {
        for (n, p) in [(2usize, 0.1f64), (3, 0.25), (4, 0.05)] {
            let spec = BscSpec::new(n, p).unwrap();
            let ch = build_bsc_product_channel(&spec).unwrap();
            let prior = product_uniform_prior(n).unwrap();
            let metric = Metric::ml(&ch);
            for rate in [0.0, 0.2, 0.5 * n as f64 * LN2, n as f64 * LN2] {
                let f1 = bsc_rate_cdf(&spec, rate).unwrap();
                let f2 = bounds::rate_cdf(&prior, &ch, &metric, rate).unwrap();
                assert!(
                    (f1 - f2).abs() < 1e-12,
                    "n {n} p {p} rate {rate}: {f1} vs {f2}"
                );
                let p1 = bsc_point_at_rate(&spec, rate).unwrap();
                let p2 = bounds::sweep(&prior, &ch, &metric, &[rate]).unwrap().points[0];
                assert!((p1.clipped - p2.clipped).abs() < 1e-12);
                assert!((p1.exact - p2.exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bec_product_matches_dense_enumeration() {
        for (n, eps) in [(1usize, 0.5f64), (2, 0.3), (3, 0.6)] {
            let spec = BecSpec::new(n, eps).unwrap();
            let ch = build_bec_product_channel(&spec).unwrap();
            let prior = product_uniform_prior(n).unwrap();
            let metric = Metric::ml(&ch);
            for rate in [0.0, 0.2, 0.5 * n as f64 * LN2, n as f64 * LN2] {
                let f1 = bec_rate_cdf(&spec, rate).unwrap();
                let f2 = bounds::rate_cdf(&prior, &ch, &metric, rate).unwrap();
                assert!(
                    (f1 - f2).abs() < 1e-12,
                    "n {n} eps {eps} rate {rate}: {f1} vs {f2}"
                );
                let p1 = bec_point_at_rate(&spec, rate).unwrap();
                let p2 = bounds::sweep(&prior, &ch, &metric, &[rate]).unwrap().points[0];
                assert!((p1.clipped - p2.clipped).abs() < 1e-12);
                assert!((p1.exact - p2.exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bec_single_use_half_erasure() {
        // F(ln 2) = eps * (1 - 1/2) = 0.25 at eps = 1/2, n = 1.
        let spec = BecSpec::new(1, 0.5).unwrap();
        let f = bec_rate_cdf(&spec, LN2).unwrap();
        assert!((f - 0.25).abs() < 1e-15, "{f}");
    }

    #[test]
    fn huge_blocklength_stays_finite_and_normalized() {
        let spec = BscSpec::new(500, 0.11).unwrap();
        let norm = bsc_weight_norm(&spec);
        assert!((norm - 1.0).abs() < 1e-8, "norm {norm}");
        // A rate sweep across the interesting region stays finite and ordered.
        let rates: Vec<f64> = (0..21).map(|i| 500.0 * LN2 * i as f64 / 20.0).collect();
        let curve = bsc_curve(&spec, &rates).unwrap();
        for pt in &curve.points {
            assert!(pt.cdf.is_finite() && (0.0..=1.0).contains(&pt.cdf));
            assert!((0.0..=1.0).contains(&pt.clipped));
            assert!(pt.cdf <= pt.clipped);
            assert!(0.5 * pt.clipped <= pt.exact + 1e-14 && pt.exact <= pt.clipped + 1e-14);
        }
        // The CDF must actually transition from ~0 to ~1 across the sweep.
        assert!(curve.points.first().unwrap().cdf < 1e-6);
        assert!(curve.points.last().unwrap().cdf > 0.999);
    }

    #[test]
    fn cdf_monotone_in_noise() {
        for rate in [0.5, 1.0, 2.0] {
            let lo = bsc_rate_cdf(&BscSpec::new(8, 0.05).unwrap(), rate).unwrap();
            let hi = bsc_rate_cdf(&BscSpec::new(8, 0.2).unwrap(), rate).unwrap();
            assert!(lo <= hi + 1e-12, "rate {rate}: {lo} vs {hi}");
            let le = bec_rate_cdf(&BecSpec::new(8, 0.2).unwrap(), rate).unwrap();
            let he = bec_rate_cdf(&BecSpec::new(8, 0.6).unwrap(), rate).unwrap();
            assert!(le <= he + 1e-12);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(BscSpec::new(0, 0.1).is_err());
        assert!(BscSpec::new(4, 0.0).is_err());
        assert!(BscSpec::new(4, 0.5).is_err());
        assert!(BecSpec::new(4, 1.0).is_err());
        assert!(BecSpec::new(0, 0.5).is_err());
        assert!(bsc_rate_cdf(&BscSpec::new(2, 0.1).unwrap(), -0.5).is_err());
        assert!(bsc_clipped_union_bound(&BscSpec::new(2, 0.1).unwrap(), 0.5).is_err());
    }

    #[test]
    fn size_mode_points_match_generic_pipeline() {
        let spec = BscSpec::new(3, 0.2).unwrap();
        let ch = build_bsc_product_channel(&spec).unwrap();
        let prior = product_uniform_prior(3).unwrap();
        let metric = Metric::ml(&ch);
        for m in [1u64, 2, 7, 64] {
            let fast = bsc_point_for_size(&spec, m).unwrap();
            let seen = bounds::point_for_size(&prior, &ch, &metric, m).unwrap();
            assert!((fast.cdf - seen.cdf).abs() < 1e-13, "M {m}");
            assert!((fast.clipped - seen.clipped).abs() < 1e-13);
            assert!((fast.exact - seen.exact).abs() < 1e-13);
        }
        let bspec = BecSpec::new(2, 0.4).unwrap();
        let bch = build_bec_product_channel(&bspec).unwrap();
        let bprior = product_uniform_prior(2).unwrap();
        let bmetric = Metric::ml(&bch);
        for m in [1u64, 3, 5] {
            let fast = bec_point_for_size(&bspec, m).unwrap();
            let seen = bounds::point_for_size(&bprior, &bch, &bmetric, m).unwrap();
            assert!((fast.cdf - seen.cdf).abs() < 1e-13, "M {m}");
            assert!((fast.clipped - seen.clipped).abs() < 1e-13);
            assert!((fast.exact - seen.exact).abs() < 1e-13);
        }
        assert!(bsc_point_for_size(&spec, 0).is_err());
    }

    #[test]
    fn m_mode_matches_generic_small() {
        let spec = BscSpec::new(3, 0.2).unwrap();
        let ch = build_bsc_product_channel(&spec).unwrap();
        let prior = product_uniform_prior(3).unwrap();
        let metric = Metric::ml(&ch);
        for m in [1.0, 2.0, 7.0, 64.0] {
            let c1 = bsc_clipped_union_bound(&spec, m).unwrap();
            let c2 = bounds::clipped_union_bound(&prior, &ch, &metric, m).unwrap();
            assert!((c1 - c2).abs() < 1e-13, "m {m}: {c1} vs {c2}");
            let x1 = bsc_exact_rc_error(&spec, m).unwrap();
            let x2 = bounds::exact_rc_error(&prior, &ch, &metric, m).unwrap();
            assert!((x1 - x2).abs() < 1e-13);
        }
        let bspec = BecSpec::new(2, 0.4).unwrap();
        let bch = build_bec_product_channel(&bspec).unwrap();
        let bprior = product_uniform_prior(2).unwrap();
        let bmetric = Metric::ml(&bch);
        for m in [2.0, 5.0] {
            let c1 = bec_clipped_union_bound(&bspec, m).unwrap();
            let c2 = bounds::clipped_union_bound(&bprior, &bch, &bmetric, m).unwrap();
            assert!((c1 - c2).abs() < 1e-13);
            let x1 = bec_exact_rc_error(&bspec, m).unwrap();
            let x2 = bounds::exact_rc_error(&bprior, &bch, &bmetric, m).unwrap();
            assert!((x1 - x2).abs() < 1e-13);
        }
    }
}
