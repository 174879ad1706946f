//! Discrete channels, input priors, decoding metrics, and the pairwise
//! competitor statistics that every bound in this crate is built from.
//!
//! For a transmitted input `x` and received output `y`, a single competitor
//! drawn from the prior beats `x` with probability
//!
//! ```text
//! p = q_gt + U * q_eq,    U ~ uniform[0, 1]
//! ```
//!
//! where `q_gt` is the prior mass of inputs whose metric at `y` strictly
//! exceeds `m(x, y)` and `q_eq` the mass of exact ties (the transmitted
//! symbol ties with itself, so `q_eq >= Q(x)`). Metric ties are decided by
//! exact equality of the stored `f64` values — no tolerance — and `-inf`
//! compares below every finite value and ties with itself.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Tolerance for "sums to one" validation of priors, rows and output laws.
pub const NORMALIZATION_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// A discrete memoryless channel: labeled input/output alphabets and a
/// row-stochastic transition matrix `W[x][y] = W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: Vec<String>,
    outputs: Vec<String>,
    w: Vec<Vec<f64>>,
}

impl Channel {
    /// Validates and builds a channel. Every entry must lie in `[0, 1]` and
    /// every row must sum to one within [`NORMALIZATION_TOL`].
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, w: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyAlphabet { what: "inputs" });
        }
        if outputs.is_empty() {
            return Err(Error::EmptyAlphabet { what: "outputs" });
        }
        if w.len() != inputs.len() {
            return Err(Error::DimensionMismatch {
                what: "transition matrix rows",
                got: w.len(),
                expected: inputs.len(),
            });
        }
        for (x, row) in w.iter().enumerate() {
            if row.len() != outputs.len() {
                return Err(Error::DimensionMismatch {
                    what: "transition matrix row",
                    got: row.len(),
                    expected: outputs.len(),
                });
            }
            for (y, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::BadMatrixEntry {
                        what: "transition matrix",
                        row: x,
                        col: y,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::RowNotStochastic { row: x, sum });
            }
        }
        Ok(Self { inputs, outputs, w })
    }

    /// Builds a channel with numbered labels `x0..`, `y0..`.
    pub fn from_rows(w: Vec<Vec<f64>>) -> Result<Self> {
        let nx = w.len();
        let ny = w.first().map_or(0, Vec::len);
        Self::new(
            (0..nx).map(|i| format!("x{i}")).collect(),
            (0..ny).map(|j| format!("y{j}")).collect(),
            w,
        )
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParameter {
                what: "crossover",
                value: p,
            });
        }
        Self::new(
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        )
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn input_labels(&self) -> &[String] {
        &self.inputs
    }

    pub fn output_labels(&self) -> &[String] {
        &self.outputs
    }

    /// Transition probability `W(y|x)`.
    pub fn w(&self, x: usize, y: usize) -> f64 {
        self.w[x][y]
    }

    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.inputs.iter().position(|l| l == label)
    }
}

// ---------------------------------------------------------------------------
// Probability vectors
// ---------------------------------------------------------------------------

fn validate_masses(mass: &[f64]) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::EmptyAlphabet {
            what: "distribution",
        });
    }
    for (i, &v) in mass.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::BadMassEntry { index: i, value: v });
        }
    }
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// Input prior `Q(x)`. Entries may be zero; the support is wherever
/// `Q(x) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    mass: Vec<f64>,
}

impl Prior {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        validate_masses(&mass)?;
        Ok(Self { mass })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlphabet {
                what: "distribution",
            });
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.mass[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Indices with strictly positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(x, _)| x)
    }
}

/// A distribution over the output alphabet (used by the hypothesis-testing
/// converses). Same validation rules as [`Prior`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDist {
    mass: Vec<f64>,
}

impl OutputDist {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        validate_masses(&mass)?;
        Ok(Self { mass })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlphabet {
                what: "distribution",
            });
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, y: usize) -> f64 {
        self.mass[y]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }
}

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

/// A decoding metric `m(x, y)`. Any real values, `-inf` allowed (it sorts
/// below every finite value and ties with itself); `NaN` is rejected because
/// it would make the competitor ordering non-total.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    values: Vec<Vec<f64>>,
}

impl Metric {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() || values[0].is_empty() {
            return Err(Error::EmptyAlphabet { what: "metric" });
        }
        let ny = values[0].len();
        for (x, row) in values.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::DimensionMismatch {
                    what: "metric row",
                    got: row.len(),
                    expected: ny,
                });
            }
            for (y, &v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::MetricNaN { row: x, col: y });
                }
            }
        }
        Ok(Self { values })
    }

    /// The maximum-likelihood metric `m(x, y) = log W(y|x)`, with
    /// `W(y|x) = 0` mapped to `-inf`.
    pub fn ml(channel: &Channel) -> Self {
        let values = (0..channel.num_inputs())
            .map(|x| {
                (0..channel.num_outputs())
                    .map(|y| {
                        let w = channel.w(x, y);
                        if w == 0.0 {
                            f64::NEG_INFINITY
                        } else {
                            w.ln()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { values }
    }

    pub fn num_inputs(&self) -> usize {
        self.values.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.values[0].len()
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.values[x][y]
    }

    /// Checks that every output column has at least one finite entry over
    /// the prior's support; a column violating this describes an output for
    /// which the decoder has no usable hypothesis at all.
    pub fn check_support(&self, prior: &Prior) -> Result<()> {
        for y in 0..self.num_outputs() {
            let ok = prior.support().any(|x| self.values[x][y].is_finite());
            if !ok {
                return Err(Error::MetricColumnUnsupported { col: y });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Pairwise statistics
// ---------------------------------------------------------------------------

/// Prior masses of competitors strictly beating (`q_gt`) and exactly tying
/// (`q_eq`) the transmitted symbol's metric at a given output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseStats {
    pub q_gt: f64,
    pub q_eq: f64,
}

impl PairwiseStats {
    /// Probability that the dithered competitor mass `q_gt + U * q_eq`
    /// reaches at least `t`, for `U` uniform on `[0, 1]`.
    ///
    /// Piecewise linear in `t`; for `q_eq = 0` it degenerates to an
    /// indicator. Errors if `t` is outside `[0, 1]`.
    pub fn exceed_prob(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) || t.is_nan() {
            return Err(Error::ThresholdOutOfRange { value: t });
        }
        Ok(self.exceed_prob_unchecked(t))
    }

    pub(crate) fn exceed_prob_unchecked(&self, t: f64) -> f64 {
        if self.q_eq > 0.0 {
            ((self.q_gt + self.q_eq - t) / self.q_eq).clamp(0.0, 1.0)
        } else if self.q_gt >= t {
            1.0
        } else {
            0.0
        }
    }
}

/// Competitor statistics for transmitted input `x` and output `y`: sums the
/// prior over inputs whose metric at `y` strictly exceeds / exactly ties
/// `m(x, y)`. Mass-zero symbols are counted (they contribute nothing), but
/// the transmitted symbol itself must lie in the support.
pub fn pairwise_stats(prior: &Prior, metric: &Metric, x: usize, y: usize) -> Result<PairwiseStats> {
    if prior.len() != metric.num_inputs() {
        return Err(Error::DimensionMismatch {
            what: "prior",
            got: prior.len(),
            expected: metric.num_inputs(),
        });
    }
    if x >= metric.num_inputs() {
        return Err(Error::IndexOutOfRange {
            what: "input",
            index: x,
            size: metric.num_inputs(),
        });
    }
    if y >= metric.num_outputs() {
        return Err(Error::IndexOutOfRange {
            what: "output",
            index: y,
            size: metric.num_outputs(),
        });
    }
    if prior.mass(x) == 0.0 {
        return Err(Error::SymbolOutsideSupport { index: x });
    }
    let own = metric.value(x, y);
    let mut q_gt = 0.0;
    let mut q_eq = 0.0;
    for xp in 0..prior.len() {
        let m = metric.value(xp, y);
        if m > own {
            q_gt += prior.mass(xp);
        } else if m == own {
            q_eq += prior.mass(xp);
        }
    }
    Ok(PairwiseStats { q_gt, q_eq })
}

// ---------------------------------------------------------------------------
// Channel configuration files
// ---------------------------------------------------------------------------

/// A channel plus the prior and metric to analyse it under. This is the
/// in-memory form of the JSON channel file:
///
/// ```json
/// {
///   "inputs":  ["0", "1"],
///   "outputs": ["0", "1"],
///   "W":       [[0.9, 0.1], [0.1, 0.9]],
///   "prior":   [0.5, 0.5],
///   "metric":  [[-0.105, "-inf"], [-2.303, -0.105]]
/// }
/// ```
///
/// `prior` defaults to uniform and `metric` to maximum likelihood. Metric
/// entries are numbers or the string `"-inf"`.
#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub channel: Channel,
    pub prior: Prior,
    pub metric: Metric,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MetricEntry {
    Num(f64),
    Str(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    inputs: Vec<String>,
    outputs: Vec<String>,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    #[serde(default)]
    prior: Option<Vec<f64>>,
    #[serde(default)]
    metric: Option<Vec<Vec<MetricEntry>>>,
}

impl ChannelConfig {
    pub fn new(channel: Channel, prior: Prior, metric: Metric) -> Result<Self> {
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
                got: metric.num_inputs() * metric.num_outputs(),
                expected: channel.num_inputs() * channel.num_outputs(),
            });
        }
        metric.check_support(&prior)?;
        Ok(Self {
            channel,
            prior,
            metric,
        })
    }

    /// Channel under uniform prior and maximum-likelihood metric.
    pub fn ml(channel: Channel) -> Result<Self> {
        let prior = Prior::uniform(channel.num_inputs())?;
        let metric = Metric::ml(&channel);
        Self::new(channel, prior, metric)
    }

    pub fn from_json_str(s: &str, origin: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(s).map_err(|e| Error::MalformedFile {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        let channel = Channel::new(file.inputs, file.outputs, file.w)?;
        let prior = match file.prior {
            Some(p) => Prior::new(p)?,
            None => Prior::uniform(channel.num_inputs())?,
        };
        let metric = match file.metric {
            Some(rows) => {
                let mut values = Vec::with_capacity(rows.len());
                for (x, row) in rows.into_iter().enumerate() {
                    let mut out = Vec::with_capacity(row.len());
                    for (y, e) in row.into_iter().enumerate() {
                        out.push(match e {
                            MetricEntry::Num(v) => v,
                            MetricEntry::Str(s) if s == "-inf" => f64::NEG_INFINITY,
                            MetricEntry::Str(s) => {
                                return Err(Error::MalformedFile {
                                    path: origin.to_string(),
                                    detail: format!(
                                        "metric entry at row {x}, column {y}: \
                                         expected a number or \"-inf\", got \"{s}\""
                                    ),
                                });
                            }
                        });
                    }
                    values.push(out);
                }
                Metric::new(values)?
            }
            None => Metric::ml(&channel),
        };
        Self::new(channel, prior, metric)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_json_str(&s, &path.display().to_string())
    }
}

/// Loads a bare prior file: a JSON array of masses.
pub fn prior_from_path(path: &Path) -> Result<Prior> {
    let s = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mass: Vec<f64> = serde_json::from_str(&s).map_err(|e| Error::MalformedFile {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    Prior::new(mass)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn four_symbol_metric() -> (Prior, Metric) {
        // One output column with values [3, 2, 2, 1].
        let prior = Prior::uniform(4).unwrap();
        let metric =
            Metric::new(vec![vec![3.0], vec![2.0], vec![2.0], vec![1.0]]).unwrap();
        (prior, metric)
    }

    #[test]
    fn bsc_rows_are_stochastic() {
        let ch = Channel::bsc(0.1).unwrap();
        assert_eq!(ch.num_inputs(), 2);
        assert_eq!(ch.w(0, 0), 0.9);
        assert_eq!(ch.w(0, 1), 0.1);
    }

    #[test]
    fn bad_row_sum_reports_row_and_sum() {
        let err = Channel::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.6]]).unwrap_err();
        match err {
            Error::RowNotStochastic { row, sum } => {
                assert_eq!(row, 1);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn negative_entry_rejected() {
        let err = Channel::from_rows(vec![vec![0.5, -0.2, 0.7]]).unwrap_err();
        assert!(matches!(err, Error::BadMatrixEntry { row: 0, col: 1, .. }));
    }

    #[test]
    fn oversized_entry_rejected_before_row_sum() {
        let err = Channel::from_rows(vec![vec![1.2, -0.2]]).unwrap_err();
        assert!(matches!(err, Error::BadMatrixEntry { row: 0, col: 0, .. }));
    }

    #[test]
    fn ml_metric_maps_zero_probability_to_neg_inf() {
        let ch = Channel::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let m = Metric::ml(&ch);
        assert_eq!(m.value(0, 1), f64::NEG_INFINITY);
        assert!((m.value(1, 0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn metric_rejects_nan() {
        let err = Metric::new(vec![vec![0.0, f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::MetricNaN { row: 0, col: 1 }));
    }

    #[test]
    fn pairwise_stats_counts_strict_and_tie_mass() {
        // Uniform prior over 4 symbols, column [3, 2, 2, 1]; querying a
        // symbol with value 2 gives strict mass 0.25 and tie mass 0.5.
        let (prior, metric) = four_symbol_metric();
        let s = pairwise_stats(&prior, &metric, 1, 0).unwrap();
        assert!((s.q_gt - 0.25).abs() < 1e-15);
        assert!((s.q_eq - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pairwise_stats_rejects_symbol_outside_support() {
        let prior = Prior::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let metric =
            Metric::new(vec![vec![3.0], vec![2.0], vec![2.0], vec![1.0]]).unwrap();
        let err = pairwise_stats(&prior, &metric, 2, 0).unwrap_err();
        assert!(matches!(err, Error::SymbolOutsideSupport { index: 2 }));
    }

    #[test]
    fn neg_inf_ties_with_itself() {
        let prior = Prior::uniform(3).unwrap();
        let metric = Metric::new(vec![
            vec![0.0],
            vec![f64::NEG_INFINITY],
            vec![f64::NEG_INFINITY],
        ])
        .unwrap();
        let s = pairwise_stats(&prior, &metric, 1, 0).unwrap();
        assert!((s.q_gt - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.q_eq - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exceed_prob_linear_case() {
        let s = PairwiseStats {
            q_gt: 0.3,
            q_eq: 0.2,
        };
        // Pr{0.3 + 0.2 U >= 0.4} = Pr{U >= 0.5} = 0.5.
        assert!((s.exceed_prob(0.4).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(s.exceed_prob(0.0).unwrap(), 1.0);
        assert_eq!(s.exceed_prob(1.0).unwrap(), 0.0);
    }

    #[test]
    fn exceed_prob_degenerate_is_indicator() {
        let s = PairwiseStats {
            q_gt: 0.3,
            q_eq: 0.0,
        };
        assert_eq!(s.exceed_prob(0.2).unwrap(), 1.0);
        assert_eq!(s.exceed_prob(0.3).unwrap(), 1.0);
        assert_eq!(s.exceed_prob(0.31).unwrap(), 0.0);
    }

    #[test]
    fn exceed_prob_rejects_bad_threshold() {
        let s = PairwiseStats {
            q_gt: 0.0,
            q_eq: 1.0,
        };
        assert!(s.exceed_prob(-0.1).is_err());
        assert!(s.exceed_prob(1.1).is_err());
    }

    #[test]
    fn channel_file_roundtrip_with_defaults() {
        let cfg = ChannelConfig::from_json_str(
            r#"{"inputs":["a","b"],"outputs":["0","1"],"W":[[0.9,0.1],[0.2,0.8]]}"#,
            "inline",
        )
        .unwrap();
        assert_eq!(cfg.prior.mass(0), 0.5);
        assert!((cfg.metric.value(0, 0) - 0.9f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn channel_file_metric_accepts_neg_inf_string() {
        let cfg = ChannelConfig::from_json_str(
            r#"{"inputs":["a","b"],"outputs":["0","1"],
                "W":[[0.5,0.5],[0.5,0.5]],
                "metric":[[0.0,"-inf"],[-1.0,0.5]]}"#,
            "inline",
        )
        .unwrap();
        assert_eq!(cfg.metric.value(0, 1), f64::NEG_INFINITY);
    }

    #[test]
    fn config_rejects_fully_forbidden_output_column() {
        // Column 1 has no finite metric value over the support.
        let err = ChannelConfig::from_json_str(
            r#"{"inputs":["a"],"outputs":["0","1"],"W":[[0.5,0.5]],
                "metric":[[0.0,"-inf"]]}"#,
            "inline",
        )
        .unwrap_err();
        assert!(matches!(err, Error::MetricColumnUnsupported { col: 1 }));
    }

    #[test]
    fn channel_file_rejects_junk_metric_string() {
        let err = ChannelConfig::from_json_str(
            r#"{"inputs":["a"],"outputs":["0"],"W":[[1.0]],"metric":[["huge"]]}"#,
            "inline",
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedFile { .. }));
    }

    #[test]
    fn config_rejects_all_neg_inf_column_over_support() {
        // Output column 1 has no finite metric entry over the support.
        let ch = Channel::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let prior = Prior::new(vec![1.0, 0.0]).unwrap();
        let metric = Metric::new(vec![
            vec![0.0, f64::NEG_INFINITY],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let err = ChannelConfig::new(ch, prior, metric).unwrap_err();
        assert!(matches!(err, Error::MetricColumnUnsupported { col: 1 }));
    }

    // -- properties ---------------------------------------------------------

    prop_compose! {
        /// A strictly positive prior whose masses sum to exactly 1.0
        /// (largest entry absorbs the float residue).
        fn full_support_prior(n: usize)
            (raw in prop::collection::vec(0.05f64..1.0, n)) -> Prior
        {
            let total: f64 = raw.iter().sum();
            let mut mass: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let k = mass
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            let sum: f64 = mass.iter().sum();
            mass[k] += 1.0 - sum;
            Prior::new(mass).unwrap()
        }
    }

    fn tied_metric_column(n: usize) -> impl Strategy<Value = Metric> {
        // Values from a small pool so exact ties actually occur.
        prop::collection::vec(
            prop::sample::select(vec![-1.5f64, 0.0, 0.5, 2.0, f64::NEG_INFINITY]),
            n,
        )
        .prop_filter("need a finite entry", |col| {
            col.iter().any(|v| v.is_finite())
        })
        .prop_map(|col| Metric::new(col.into_iter().map(|v| vec![v]).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn stats_mass_bounded_and_self_tie(
            prior in full_support_prior(5),
            metric in tied_metric_column(5),
        ) {
            for x in 0..5 {
                let s = pairwise_stats(&prior, &metric, x, 0).unwrap();
                prop_assert!(s.q_gt >= 0.0 && s.q_eq >= 0.0);
                prop_assert!(s.q_gt + s.q_eq <= 1.0 + 1e-12);
                // The transmitted symbol ties with itself.
                prop_assert!(s.q_eq >= prior.mass(x) - 1e-15);
            }
        }

        #[test]
        fn better_metric_never_raises_competitor_mass(
            prior in full_support_prior(5),
            metric in tied_metric_column(5),
        ) {
            for x1 in 0..5 {
                for x2 in 0..5 {
                    if metric.value(x1, 0) >= metric.value(x2, 0) {
                        let s1 = pairwise_stats(&prior, &metric, x1, 0).unwrap();
                        let s2 = pairwise_stats(&prior, &metric, x2, 0).unwrap();
                        prop_assert!(s1.q_gt <= s2.q_gt + 1e-15);
                        prop_assert!(
                            s1.q_gt + s1.q_eq <= s2.q_gt + s2.q_eq + 1e-15
                        );
                    }
                }
            }
        }

        #[test]
        fn dithered_mass_is_marginally_uniform(
            prior in full_support_prior(6),
            metric in tied_metric_column(6),
            u in 0.01f64..0.99,
        ) {
            // sum_x Q(x) * Pr{p_{x,y} < u} telescopes to u exactly.
            let mut below = 0.0;
            for x in 0..6 {
                let s = pairwise_stats(&prior, &metric, x, 0).unwrap();
                below += prior.mass(x) * (1.0 - s.exceed_prob(u).unwrap());
            }
            prop_assert!((below - u).abs() <= 1e-12, "got {below} for u={u}");
        }
    }
}
