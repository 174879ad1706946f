//! Seeded self-certification fleets.
//!
//! Each `check_*` function exercises one numerical identity or inequality of
//! the library on a fixed-size fleet of seeded random instances and reports
//! the worst deviation observed against a frozen tolerance. The fleets are
//! deterministic for a given seed, so a pass is reproducible bit for bit.
//! [`run_all`] runs every fleet in a stable order; the command-line `verify`
//! subcommand and the acceptance suite are both thin wrappers around it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds;
use crate::channel::{pairwise_stats, Channel, Metric, OutputDist, Prior};
use crate::hypothesis::{beta_vs_cdf, matched_witness};
use crate::product::{
    bec_curve, bec_point_at_rate, bsc_curve, bsc_point_at_rate, bsc_weight_norm,
    build_bec_product_channel, build_bsc_product_channel, product_uniform_prior, BecSpec, BscSpec,
};
use crate::simulator::{
    converse_equality_check, evaluate_code_exact, random_coding_mc, Codebook,
};

const LN_2: f64 = core::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Outcome of one certification fleet.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    /// Stable, machine-friendly property name.
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation observed (property-specific units).
    pub worst: f64,
    /// Tolerance the worst deviation is held against.
    pub tolerance: f64,
    /// Number of random instances exercised.
    pub cases: usize,
    /// Where the worst deviation occurred, and any extra counters.
    pub detail: String,
}

impl PropertyReport {
    fn from_worst(
        name: &'static str,
        worst: f64,
        tolerance: f64,
        cases: usize,
        detail: String,
    ) -> Self {
        Self {
            name,
            passed: worst <= tolerance,
            worst,
            tolerance,
            cases,
            detail,
        }
    }

    /// One-line human-readable summary, `PASS`/`FAIL` first.
    pub fn line(&self) -> String {
        format!(
            "{}: {} (worst {:.3e} vs tolerance {:.1e}, {} cases{}{})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst,
            self.tolerance,
            self.cases,
            if self.detail.is_empty() { "" } else { "; " },
            self.detail,
        )
    }
}

/// Tracks the largest deviation and a description of where it happened.
struct Tracker {
    worst: f64,
    at: String,
}

impl Tracker {
    fn new() -> Self {
        Self {
            worst: 0.0,
            at: String::new(),
        }
    }

    fn observe(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.worst || self.at.is_empty() {
            self.worst = value.max(self.worst);
            self.at = at();
        }
    }
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Rescales to unit sum, then nudges the largest entry so the float sum is
/// exactly 1; downstream validators demand 1e-12 and the dither-uniformity
/// identity is only as exact as this normalization.
fn normalize_exact(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for e in v.iter_mut() {
        *e /= s;
    }
    let s2: f64 = v.iter().sum();
    let i = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    v[i] += 1.0 - s2;
}

fn gen_channel(rng: &mut ChaCha8Rng, nx: usize, ny: usize, allow_zeros: bool) -> Channel {
    let rows: Vec<Vec<f64>> = (0..nx)
        .map(|_| loop {
            let mut row: Vec<f64> = (0..ny)
                .map(|_| {
                    if allow_zeros && ny > 1 && rng.gen_bool(0.25) {
                        0.0
                    } else {
                        -(rng.gen::<f64>().max(1e-9)).ln()
                    }
                })
                .collect();
            if row.iter().sum::<f64>() > 0.0 {
                normalize_exact(&mut row);
                break row;
            }
        })
        .collect();
    Channel::from_rows(rows).expect("generated rows are stochastic")
}

/// Full-support prior with every mass at least `floor / (n (1 + floor))`.
fn gen_prior_floor(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Prior {
    let mut mass: Vec<f64> = (0..n).map(|_| floor + rng.gen::<f64>()).collect();
    normalize_exact(&mut mass);
    Prior::new(mass).expect("generated prior is a distribution")
}

fn gen_prior(rng: &mut ChaCha8Rng, n: usize) -> Prior {
    gen_prior_floor(rng, n, 0.02)
}

fn gen_output_dist(rng: &mut ChaCha8Rng, n: usize) -> OutputDist {
    let mut mass: Vec<f64> = (0..n).map(|_| 0.02 + rng.gen::<f64>()).collect();
    normalize_exact(&mut mass);
    OutputDist::new(mass).expect("generated output law is a distribution")
}

/// Decoding-metric styles: 0 continuous (no ties), 1 tie-rich small pool,
/// 2 sparse with forbidden pairs. Every output keeps at least one usable
/// symbol inside the prior's support.
fn gen_metric(rng: &mut ChaCha8Rng, nx: usize, ny: usize, style: u8, prior: &Prior) -> Metric {
    const POOL: [f64; 6] = [-1.5, -0.5, 0.0, 0.5, 1.0, 2.0];
    let mut values: Vec<Vec<f64>> = (0..nx)
        .map(|_| {
            (0..ny)
                .map(|_| match style {
                    0 => rng.gen_range(-2.0..2.0),
                    1 => POOL[rng.gen_range(0..POOL.len())],
                    _ => {
                        if rng.gen_bool(0.2) {
                            f64::NEG_INFINITY
                        } else {
                            POOL[rng.gen_range(0..POOL.len())]
                        }
                    }
                })
                .collect()
        })
        .collect();
    for y in 0..ny {
        let ok = prior
            .support()
            .any(|x| values[x][y] != f64::NEG_INFINITY);
        if !ok {
            let x = prior.support().next().expect("prior has support");
            values[x][y] = 0.0;
        }
    }
    Metric::new(values).expect("generated metric has no NaN")
}

fn gen_code(rng: &mut ChaCha8Rng, nx: usize, m: usize) -> Codebook {
    let words: Vec<usize> = (0..m).map(|_| rng.gen_range(0..nx)).collect();
    Codebook::new(words, nx).expect("generated codewords are in range")
}

// ---------------------------------------------------------------------------
// Fleets
// ---------------------------------------------------------------------------

/// For random explicit codes, the exact error of the fair-tie decoder equals
/// the threshold CDF at `1/M` under the code's empirical input distribution.
pub fn check_converse_equality(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-12;
    const CASES: usize = 100;
    let mut t = Tracker::new();
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 1_000 + k as u64);
        let nx = rng.gen_range(2..=8);
        let ny = rng.gen_range(2..=8);
        let channel = gen_channel(&mut rng, nx, ny, true);
        let m = rng.gen_range(1..=16);
        let code = gen_code(&mut rng, nx, m);
        let metric = match rng.gen_range(0..4u8) {
            0 => Metric::ml(&channel),
            s => gen_metric(&mut rng, nx, ny, s - 1, &Prior::uniform(nx).unwrap()),
        };
        let chk = converse_equality_check(&code, &channel, &metric)
            .expect("generated instance is well-formed");
        t.observe(chk.gap.abs(), || format!("instance {k} (M = {m})"));
    }
    PropertyReport::from_worst("converse-equality", t.worst, TOL, CASES, t.at)
}

/// Half the clipped union bound never exceeds the exact random-coding error,
/// which never exceeds the clipped bound, across random rate sweeps.
pub fn check_sandwich(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-14;
    const CHANNELS: usize = 20;
    let rates = bounds::rate_grid(0.0, 3.0, 50).unwrap();
    let mut t = Tracker::new();
    for k in 0..CHANNELS {
        let mut rng = instance_rng(seed, 2_000 + k as u64);
        let nx = rng.gen_range(1..=6);
        let ny = rng.gen_range(1..=6);
        let channel = gen_channel(&mut rng, nx, ny, k % 2 == 0);
        let prior = gen_prior(&mut rng, nx);
        let metric = gen_metric(&mut rng, nx, ny, (k % 3) as u8, &prior);
        let curve = bounds::sweep(&prior, &channel, &metric, &rates)
            .expect("generated sweep is well-formed");
        for p in &curve.points {
            let upper = p.exact - p.clipped;
            let lower = 0.5 * p.clipped - p.exact;
            t.observe(upper.max(lower), || {
                format!("channel {k} at rate {:.3}", p.rate)
            });
        }
    }
    PropertyReport::from_worst("clipping-sandwich", t.worst, TOL, CHANNELS * rates.len(), t.at)
}

/// The clipped bound equals `e^R ∫_R^∞ F(z) e^{-z} dz`; the trapezoid
/// residual must be small and must not grow when the step is halved.
pub fn check_quadrature(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-6;
    const CASES: usize = 10;
    const STEP: f64 = 1e-4;
    let mut t = Tracker::new();
    let mut refinement_ok = true;
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 3_000 + k as u64);
        let nx = rng.gen_range(2..=6);
        let ny = rng.gen_range(2..=6);
        let channel = gen_channel(&mut rng, nx, ny, false);
        let prior = gen_prior(&mut rng, nx);
        let metric = gen_metric(&mut rng, nx, ny, 0, &prior);
        let rate = rng.gen_range(0.2..2.0);
        let res = bounds::quadrature_identity_residual(&prior, &channel, &metric, rate, STEP)
            .expect("generated instance is well-formed");
        let res_half =
            bounds::quadrature_identity_residual(&prior, &channel, &metric, rate, STEP / 2.0)
                .expect("generated instance is well-formed");
        if !(res_half < res || res_half <= 1e-12) {
            refinement_ok = false;
        }
        t.observe(res, || format!("instance {k} at rate {rate:.3}"));
    }
    let mut report = PropertyReport::from_worst(
        "quadrature-identity",
        t.worst,
        TOL,
        CASES,
        format!(
            "{}; refinement {}",
            t.at,
            if refinement_ok { "shrinks" } else { "GREW" }
        ),
    );
    report.passed = report.passed && refinement_ok;
    report
}

/// Central differences of the clipped bound and of its negative log match
/// the closed forms `P - F` and `F/P - 1` away from the CDF's kinks.
pub fn check_derivatives(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-4;
    const CASES: usize = 10;
    const PROBES: usize = 5;
    const H: f64 = 1e-4;
    let mut t = Tracker::new();
    let mut cases = 0;
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 4_000 + k as u64);
        let nx = rng.gen_range(2..=6);
        let ny = rng.gen_range(2..=6);
        let channel = gen_channel(&mut rng, nx, ny, false);
        let prior = gen_prior_floor(&mut rng, nx, 0.3);
        let metric = gen_metric(&mut rng, nx, ny, 0, &prior);
        let kinks = bounds::cdf_kinks(&prior, &channel, &metric).unwrap();
        let mut probes = 0;
        let mut attempts = 0;
        while probes < PROBES && attempts < 10_000 {
            attempts += 1;
            let r = rng.gen_range(0.2..1.8);
            if kinks.iter().any(|&z| (z - r).abs() < 5.0 * H) {
                continue;
            }
            probes += 1;
            cases += 1;
            let p_at = |rate: f64| {
                bounds::clipped_union_bound_at_rate(&prior, &channel, &metric, rate).unwrap()
            };
            let f = bounds::rate_cdf(&prior, &channel, &metric, r).unwrap();
            let p0 = p_at(r);
            let (pp, pm) = (p_at(r + H), p_at(r - H));
            let diff_p = ((pp - pm) / (2.0 * H) - (p0 - f)).abs();
            let diff_log = ((pm.ln() - pp.ln()) / (2.0 * H) - (f / p0 - 1.0)).abs();
            t.observe(diff_p.max(diff_log), || {
                format!("channel {k} at rate {r:.4}")
            });
        }
    }
    PropertyReport::from_worst("derivative-consistency", t.worst, TOL, cases, t.at)
}

/// The matched witness makes the hypothesis-testing bound equal the CDF, and
/// no output distribution pushes the bound above it.
pub fn check_witness(seed: u64) -> PropertyReport {
    const TOL_EQ: f64 = 1e-9;
    const TOL_DOM: f64 = 1e-12;
    const CASES: usize = 25;
    const RANDOM_LAWS: usize = 50;
    let mut t = Tracker::new();
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 5_000 + k as u64);
        let nx = rng.gen_range(2..=6);
        let ny = rng.gen_range(2..=6);
        let channel = gen_channel(&mut rng, nx, ny, false);
        let prior = gen_prior(&mut rng, nx);
        let metric = Metric::ml(&channel);
        let rate = rng.gen_range(0.05..2.5);
        let witness =
            matched_witness(&prior, &channel, rate).expect("full-support witness exists");
        let (beta, cdf) = beta_vs_cdf(&prior, &channel, &metric, &witness.q_y, rate)
            .expect("witness evaluation is well-formed");
        t.observe((beta - cdf).abs(), || {
            format!("witness equality, instance {k} at rate {rate:.3}")
        });
        for j in 0..RANDOM_LAWS {
            let q_y = gen_output_dist(&mut rng, ny);
            let (b, f) = beta_vs_cdf(&prior, &channel, &metric, &q_y, rate).unwrap();
            // Dominance has its own (tighter) tolerance; scale so one
            // tracker covers both checks.
            t.observe((b - f).max(0.0) * (TOL_EQ / TOL_DOM), || {
                format!("dominance, instance {k} law {j}")
            });
        }
    }
    PropertyReport::from_worst(
        "witness-tightness",
        t.worst,
        TOL_EQ,
        CASES * (1 + RANDOM_LAWS),
        t.at,
    )
}

/// The dithered pairwise probability is uniform under the prior: for every
/// output, `Σ_x Q(x) Pr{p(x, y) < u} = u`.
pub fn check_uniformity(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-12;
    const CASES: usize = 20;
    let mut t = Tracker::new();
    let mut points = 0;
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 6_000 + k as u64);
        let nx = rng.gen_range(1..=6);
        let ny = rng.gen_range(1..=6);
        // The identity involves only the prior and the metric; no channel.
        let prior = gen_prior(&mut rng, nx);
        let metric = gen_metric(&mut rng, nx, ny, (k % 3) as u8, &prior);
        for y in 0..ny {
            for step in 1..=19 {
                let u = 0.05 * step as f64;
                let mut below = 0.0;
                for x in prior.support() {
                    let stats = pairwise_stats(&prior, &metric, x, y).unwrap();
                    below += prior.mass(x) * (1.0 - stats.exceed_prob(u).unwrap());
                }
                points += 1;
                t.observe((below - u).abs(), || {
                    format!("config {k}, output {y}, level {u:.2}")
                });
            }
        }
    }
    PropertyReport::from_worst("dither-uniformity", t.worst, TOL, points, t.at)
}

/// Closed-form product-channel curves match brute-force enumeration of the
/// same product channels, and the huge-blocklength class table stays sound.
pub fn check_product_fidelity(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-10;
    let mut t = Tracker::new();
    let mut cases = 0;
    for n in 1..=6usize {
        let mut rng = instance_rng(seed, 7_000 + n as u64);
        let p = rng.gen_range(0.03..0.45);
        let spec = BscSpec::new(n, p).unwrap();
        let channel = build_bsc_product_channel(&spec).unwrap();
        let prior = product_uniform_prior(n).unwrap();
        let metric = Metric::ml(&channel);
        let rates = bounds::rate_grid(0.0, n as f64 * LN_2, 25).unwrap();
        let dense = bounds::sweep(&prior, &channel, &metric, &rates).unwrap();
        for (rate, seen) in rates.iter().zip(&dense.points) {
            let fast = bsc_point_at_rate(&spec, *rate).unwrap();
            let gap = (fast.cdf - seen.cdf)
                .abs()
                .max((fast.clipped - seen.clipped).abs())
                .max((fast.exact - seen.exact).abs());
            cases += 1;
            t.observe(gap, || format!("repeated symmetric n={n} rate {rate:.3}"));
        }
    }
    for n in 1..=4usize {
        let mut rng = instance_rng(seed, 7_100 + n as u64);
        let eps = rng.gen_range(0.1..0.9);
        let spec = BecSpec::new(n, eps).unwrap();
        let channel = build_bec_product_channel(&spec).unwrap();
        let prior = product_uniform_prior(n).unwrap();
        let metric = Metric::ml(&channel);
        let rates = bounds::rate_grid(0.0, n as f64 * LN_2, 25).unwrap();
        let dense = bounds::sweep(&prior, &channel, &metric, &rates).unwrap();
        for (rate, seen) in rates.iter().zip(&dense.points) {
            let fast = bec_point_at_rate(&spec, *rate).unwrap();
            let gap = (fast.cdf - seen.cdf)
                .abs()
                .max((fast.clipped - seen.clipped).abs())
                .max((fast.exact - seen.exact).abs());
            cases += 1;
            t.observe(gap, || format!("repeated erasure n={n} rate {rate:.3}"));
        }
    }
    // Huge blocklength: the class-table weights must still sum to one.
    let big = BscSpec::new(500, 0.11).unwrap();
    let norm_gap = (bsc_weight_norm(&big) - 1.0).abs();
    cases += 1;
    t.observe(norm_gap * (TOL / 1e-8), || {
        "weight normalization at blocklength 500".to_string()
    });
    PropertyReport::from_worst("product-fidelity", t.worst, TOL, cases, t.at)
}

/// Monte-Carlo random-coding estimates agree with the exact closed form to
/// within four standard errors in at least 19 of 20 configurations.
pub fn check_monte_carlo(seed: u64) -> PropertyReport {
    const CASES: usize = 20;
    const SIGMA: f64 = 4.0;
    let mut t = Tracker::new();
    let mut hits = 0;
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 8_000 + k as u64);
        let nx = rng.gen_range(2..=5);
        let ny = rng.gen_range(2..=5);
        let channel = gen_channel(&mut rng, nx, ny, false);
        let prior = gen_prior(&mut rng, nx);
        let metric = if k % 2 == 0 {
            Metric::ml(&channel)
        } else {
            gen_metric(&mut rng, nx, ny, 0, &prior)
        };
        let m = rng.gen_range(2..=8u64);
        let trials = if k % 5 == 0 { 1_000_000 } else { 100_000 };
        let exact = bounds::exact_rc_error(&prior, &channel, &metric, m as f64).unwrap();
        let est = random_coding_mc(&prior, &channel, &metric, m, trials, seed ^ k as u64)
            .expect("generated instance is well-formed");
        let sigmas = if est.stderr > 0.0 {
            (est.mean - exact).abs() / est.stderr
        } else if (est.mean - exact).abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        if sigmas <= SIGMA {
            hits += 1;
        }
        t.observe(sigmas, || {
            format!("config {k} (M = {m}, {trials} trials)")
        });
    }
    let mut report = PropertyReport::from_worst(
        "monte-carlo-agreement",
        t.worst,
        SIGMA,
        CASES,
        format!("{}; within-band {hits}/{CASES}", t.at),
    );
    // One excursion beyond four standard errors is statistically acceptable.
    report.passed = hits + 1 >= CASES;
    report
}

/// The hypothesis-testing bound under any auxiliary output law never exceeds
/// the exact maximum-likelihood error of an explicit code.
pub fn check_meta_converse(seed: u64) -> PropertyReport {
    const TOL: f64 = 1e-12;
    const CASES: usize = 50;
    let mut t = Tracker::new();
    for k in 0..CASES {
        let mut rng = instance_rng(seed, 9_000 + k as u64);
        let nx = rng.gen_range(2..=6);
        let ny = rng.gen_range(2..=6);
        let channel = gen_channel(&mut rng, nx, ny, true);
        let m = rng.gen_range(1..=16);
        let code = gen_code(&mut rng, nx, m);
        let q_y = gen_output_dist(&mut rng, ny);
        let bound = crate::hypothesis::meta_converse_code_bound(&code, &channel, &q_y)
            .expect("generated instance is well-formed");
        let exact = evaluate_code_exact(&code, &channel, &Metric::ml(&channel)).unwrap();
        t.observe(bound - exact, || format!("instance {k} (M = {m})"));
    }
    PropertyReport::from_worst("meta-converse-dominance", t.worst, TOL, CASES, t.at)
}

/// The logarithmic slope `F/P - 1` lies in `[-1, 0]` at every evaluated grid
/// point, on generic sweeps and on product-channel curves alike.
pub fn check_slope_range(seed: u64) -> PropertyReport {
    const CHANNELS: usize = 20;
    let rates = bounds::rate_grid(0.0, 3.0, 50).unwrap();
    let mut t = Tracker::new();
    let mut points = 0;
    let mut check_curve = |curve: &bounds::BoundCurve, label: &str, t: &mut Tracker| {
        for p in &curve.points {
            if let Some(s) = p.slope {
                points += 1;
                t.observe((s - 0.0).max(-1.0 - s).max(0.0), || {
                    format!("{label} at rate {:.3} (slope {s:.3e})", p.rate)
                });
            }
        }
    };
    for k in 0..CHANNELS {
        let mut rng = instance_rng(seed, 10_000 + k as u64);
        let nx = rng.gen_range(1..=6);
        let ny = rng.gen_range(1..=6);
        let channel = gen_channel(&mut rng, nx, ny, k % 2 == 0);
        let prior = gen_prior(&mut rng, nx);
        let metric = gen_metric(&mut rng, nx, ny, (k % 3) as u8, &prior);
        let curve = bounds::sweep(&prior, &channel, &metric, &rates).unwrap();
        check_curve(&curve, &format!("channel {k}"), &mut t);
    }
    let bsc = bsc_curve(
        &BscSpec::new(8, 0.2).unwrap(),
        &bounds::rate_grid(0.0, 8.0 * LN_2, 30).unwrap(),
    )
    .unwrap();
    check_curve(&bsc, "repeated symmetric n=8", &mut t);
    let bec = bec_curve(
        &BecSpec::new(6, 0.4).unwrap(),
        &bounds::rate_grid(0.0, 6.0 * LN_2, 30).unwrap(),
    )
    .unwrap();
    check_curve(&bec, "repeated erasure n=6", &mut t);
    PropertyReport::from_worst("slope-range", t.worst, 0.0, points, t.at)
}

/// Runs every certification fleet in a stable order.
pub fn run_all(seed: u64) -> Vec<PropertyReport> {
    vec![
        check_converse_equality(seed),
        check_sandwich(seed),
        check_quadrature(seed),
        check_derivatives(seed),
        check_witness(seed),
        check_uniformity(seed),
        check_product_fidelity(seed),
        check_monte_carlo(seed),
        check_meta_converse(seed),
        check_slope_range(seed),
    ]
}

/// True when every report passed; convenience for callers that only gate.
pub fn all_passed(reports: &[PropertyReport]) -> bool {
    reports.iter().all(|r| r.passed)
}
