//! Exact finite-blocklength error bounds for discrete memoryless channels
//! under arbitrary (possibly mismatched) decoding metrics.
//!
//! The design centers on the *dithered pairwise error probability*: given a
//! transmitted symbol `x` and received symbol `y`, a uniformly dithered
//! competitor drawn from the input prior beats the transmitted symbol with
//! probability `p = q_gt + U * q_eq`, where `q_gt` / `q_eq` are the prior
//! masses of inputs whose metric strictly exceeds / exactly ties the
//! transmitted one, and `U` is uniform on `[0, 1]`. Every quantity in the
//! crate reduces to closed-form integrals of that dither variable:
//!
//! * [`bounds::rate_cdf`] — probability the pairwise exponent `-log p` falls
//!   at or below a rate `R`; equals the exact error probability of the best
//!   rate-`R` code under randomized tie-breaking (converse direction).
//! * [`bounds::clipped_union_bound`] / [`bounds::exact_rc_error`] — clipped
//!   union bound and exact random-coding error, never differing by more than
//!   a factor of two.
//! * [`hypothesis`] — exact Neyman–Pearson beta, the output-distribution
//!   witness that makes the binary-hypothesis-testing converse tight, and the
//!   sphere-packing-style code lower bound.
//! * [`product`] — closed-form sufficient-statistic evaluations for n-fold
//!   binary symmetric and binary erasure channels (log-domain, n in the
//!   hundreds).
//! * [`simulator`] — exact per-code error evaluation and a seeded Monte Carlo
//!   of the full random-coding experiment.
//!
//! Rates are natural-log units (nats) everywhere; thresholds are `e^{-R}`.
//!
//! Rate-indexed curves follow the `M - 1 = e^R` convention: the clipping
//! factor and the exact-error exponent are both `e^R`, which is what makes
//! the integral identity `P(R) = e^R ∫_R^∞ F(z) e^{-z} dz` and the
//! derivative identity `dP/dR = P - F` hold. Functions parameterized by an
//! explicit codebook size `M` use factor `M - 1` instead.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod channel;
mod error;
pub mod hypothesis;
pub mod product;
pub mod simulator;
mod sum;
pub mod verify;

pub use error::{Error, Result};

pub use bounds::{BoundCurve, BoundPoint, RatePoint};
pub use channel::{Channel, ChannelConfig, Metric, OutputDist, PairwiseStats, Prior};
pub use hypothesis::{JointDist, MatchedWitness, NpResult};
pub use simulator::{Codebook, McEstimate};
pub use verify::PropertyReport;
