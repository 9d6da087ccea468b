//! Statistical inference for two Burr-XII populations observed under a
//! joint type-II censoring scheme.
//!
//! Two independent samples (sizes `m` and `n`) are put on test together
//! and the experiment stops at the `r`-th combined failure; each observed
//! failure carries a label for its population of origin. This crate
//! provides:
//!
//! * Burr-XII distribution primitives and a Kolmogorov-Smirnov fit check
//!   ([`model`]);
//! * the joint censored-sample representation, generation, and joint
//!   log-likelihood ([`data`]);
//! * maximum-likelihood fitting with Wald confidence intervals
//!   ([`fit_mle`]);
//! * importance-sampling Bayesian estimation under squared-error, LINEX,
//!   and generalized-entropy losses, with credible and HPD intervals
//!   ([`fit_bayes`]);
//! * linear-shrinkage and shrinkage-pretest wrappers ([`shrink`]);
//! * point and interval prediction of future failure times ([`predict`]).
//!
//! The crate is `no_std` compatible (with `alloc`); every operation is
//! pure given an explicit random stream, so everything can be driven
//! concurrently from replication harnesses.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;

pub mod data;
pub mod fit_bayes;
pub mod fit_mle;
pub mod model;
pub mod numeric;
pub mod predict;
pub mod shrink;

pub use data::{CensorCase, JointSample, ThetaVector};
pub use error::{Error, Result};
pub use fit_bayes::{GammaPriors, LossSpec, WeightedDraws};
pub use fit_mle::MleFit;
pub use model::BurrParams;
pub use predict::{PredictionTarget, PredictiveInterval};
pub use shrink::ShrinkConfig;
