//! Exact evaluation of explicit codes and Monte Carlo simulation of the
//! random-coding experiment.
//!
//! The decoder throughout is "maximum metric with uniform tie-breaking":
//! given `y`, every message attaining the maximum metric value gets equal
//! credit. [`evaluate_code_exact`] computes its average error probability in
//! closed form; [`converse_equality_check`] verifies that this equals the
//! pairwise-exponent CDF at rate `log M` under the code's empirical input
//! distribution — the identity that makes the CDF a converse bound.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::channel::{Channel, Metric, Prior};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Codebooks
// ---------------------------------------------------------------------------

/// An explicit codebook: one input-symbol index per message. Duplicate
/// codewords are allowed and count as distinct messages (the decoder then
/// splits credit between them).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    words: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    codewords: Vec<String>,
}

impl Codebook {
    pub fn new(words: Vec<usize>, num_inputs: usize) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        for &w in &words {
            if w >= num_inputs {
                return Err(Error::IndexOutOfRange {
                    what: "codeword symbol",
                    index: w,
                    size: num_inputs,
                });
            }
        }
        Ok(Self { words })
    }

    /// Resolves a list of input labels against a channel's input alphabet.
    pub fn from_labels(labels: &[String], channel: &Channel) -> Result<Self> {
        let mut words = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            match channel.input_index(label) {
                Some(x) => words.push(x),
                None => {
                    return Err(Error::UnknownCodewordLabel {
                        index: i,
                        label: label.clone(),
                    })
                }
            }
        }
        Self::new(words, channel.num_inputs())
    }

    /// Loads the JSON codebook file format `{"codewords": ["a", "b", ...]}`.
    pub fn from_path(path: &Path, channel: &Channel) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let file: CodebookFile = serde_json::from_str(&s).map_err(|e| Error::MalformedFile {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_labels(&file.codewords, channel)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    /// The empirical input distribution: multiplicity / M for each symbol.
    pub fn empirical_prior(&self, num_inputs: usize) -> Result<Prior> {
        let m = self.words.len() as f64;
        let mut mass = vec![0.0; num_inputs];
        for &w in &self.words {
            mass[w] += 1.0 / m;
        }
        Prior::new(mass)
    }
}

// ---------------------------------------------------------------------------
// Exact code evaluation
// ---------------------------------------------------------------------------

/// Probability that the max-metric decoder outputs each message given `y`:
/// `1{m in argmax} / |argmax|`. The credits sum to one for every `y`.
pub fn decoder_distribution(code: &Codebook, metric: &Metric, y: usize) -> Result<Vec<f64>> {
    if y >= metric.num_outputs() {
        return Err(Error::IndexOutOfRange {
            what: "output",
            index: y,
            size: metric.num_outputs(),
        });
    }
    let vals: Vec<f64> = code.words().iter().map(|&x| metric.value(x, y)).collect();
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = vals.iter().filter(|&&v| v == best).count();
    // `best` can be -inf (every word excluded); ties still covers all words.
    let credit = 1.0 / ties as f64;
    Ok(vals
        .iter()
        .map(|&v| if v == best { credit } else { 0.0 })
        .collect())
}

/// Average error probability of the max-metric randomized-tie decoder for an
/// explicit codebook:
/// `(1/M) Σ_m Σ_y W(y|x_m) (1 - 1{m in argmax}/|argmax(y)|)`.
pub fn evaluate_code_exact(code: &Codebook, channel: &Channel, metric: &Metric) -> Result<f64> {
    if metric.num_inputs() != channel.num_inputs()
        || metric.num_outputs() != channel.num_outputs()
    {
        return Err(Error::DimensionMismatch {
            what: "metric",
            got: metric.num_inputs(),
            expected: channel.num_inputs(),
        });
    }
    for &w in code.words() {
        if w >= channel.num_inputs() {
            return Err(Error::IndexOutOfRange {
                what: "codeword symbol",
                index: w,
                size: channel.num_inputs(),
            });
        }
    }
    let m = code.len() as f64;
    let mut err = 0.0;
    for y in 0..channel.num_outputs() {
        let credit = decoder_distribution(code, metric, y)?;
        for (msg, &x) in code.words().iter().enumerate() {
            err += channel.w(x, y) * (1.0 - credit[msg]) / m;
        }
    }
    Ok(err)
}

/// Result of the converse equality check: the decoder error of the explicit
/// code, the pairwise-exponent CDF at rate `log M` under the code's
/// empirical prior, and their absolute gap (zero up to float rounding).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConverseCheck {
    pub simulator_error: f64,
    pub cdf_value: f64,
    pub gap: f64,
}

/// Confirms, for one explicit code, that the exact decoder error equals the
/// CDF evaluated at threshold exactly `1/M` under the empirical prior.
pub fn converse_equality_check(
    code: &Codebook,
    channel: &Channel,
    metric: &Metric,
) -> Result<ConverseCheck> {
    let eps = evaluate_code_exact(code, channel, metric)?;
    let prior = code.empirical_prior(channel.num_inputs())?;
    let t = 1.0 / code.len() as f64;
    let cdf = bounds::threshold_cdf(&prior, channel, metric, t)?;
    Ok(ConverseCheck {
        simulator_error: eps,
        cdf_value: cdf,
        gap: (eps - cdf).abs(),
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// A seeded Monte Carlo estimate. Bit-identical for identical
/// `(seed, trials, configuration)` regardless of thread count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

fn cumulative(mass: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    mass.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

fn sample_index(cum: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Simulates the full random-coding experiment: draw `m` codewords i.i.d.
/// from the prior, a uniform message, a channel output, then decode by
/// maximum metric with a uniform coin over exact ties. Each trial runs on
/// its own counter-indexed stream of a seeded ChaCha generator, so results
/// are order-independent and parallelize deterministically.
pub fn random_coding_mc(
    prior: &Prior,
    channel: &Channel,
    metric: &Metric,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if m < 1 {
        return Err(Error::BadCodebookSize { value: m as f64 });
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if prior.len() != channel.num_inputs()
        || metric.num_inputs() != channel.num_inputs()
        || metric.num_outputs() != channel.num_outputs()
    {
        return Err(Error::DimensionMismatch {
            what: "prior/metric",
            got: prior.len(),
            expected: channel.num_inputs(),
        });
    }
    let prior_cum = cumulative(prior.masses());
    let row_cums: Vec<Vec<f64>> = (0..channel.num_inputs())
        .map(|x| cumulative(&(0..channel.num_outputs()).map(|y| channel.w(x, y)).collect::<Vec<_>>()))
        .collect();

    let m_us = m as usize;
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let words: Vec<usize> = (0..m_us).map(|_| sample_index(&prior_cum, &mut rng)).collect();
            let msg = rng.gen_range(0..m_us);
            let y = sample_index(&row_cums[words[msg]], &mut rng);
            let vals: Vec<f64> = words.iter().map(|&x| metric.value(x, y)).collect();
            let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<usize> = (0..m_us).filter(|&i| vals[i] == best).collect();
            let winner = ties[rng.gen_range(0..ties.len())];
            u64::from(winner != msg)
        })
        .sum();

    let mean = errors as f64 / trials as f64;
    let stderr = (mean * (1.0 - mean) / trials as f64).sqrt();
    Ok(McEstimate {
        mean,
        stderr,
        trials,
        seed,
    })
}

// ---------------------------------------------------------------------------
