//! Relevance-complexity analysis for the multi-stage (scalable) information
//! bottleneck.
//!
//! A decoder that receives `T` incremental descriptions of an observation
//! `Y` reconstructs a hidden source `X` with increasing fidelity; each stage
//! trades description rate (complexity) against the information it retains
//! about the source (relevance). This crate provides:
//!
//! - [`prob`]: exact finite-probability primitives (pmfs, entropies, mutual
//!   information, binary entropy and its inverse, binary convolution);
//! - [`analytic`]: closed-form region evaluators for binary and scalar
//!   Gaussian models, symmetric-rate tradeoff curves, threshold detection;
//! - [`ba`]: a Blahut-Arimoto type fixed-point solver for general discrete
//!   sources, with region-point extraction and multiplier sweeps;
//! - [`oracle`]: exhaustive lattice search certifying solver outputs on tiny
//!   instances;
//! - [`bounds`]: classification-error upper bounds driven by the achieved
//!   relevances.
//!
//! All information quantities are in bits.

pub mod analytic;
pub mod ba;
pub mod bounds;
pub mod error;
pub mod oracle;
pub mod prob;

pub use analytic::{
    binary_max_relevance, binary_symmetric_tradeoff, find_threshold, gamma_from_rates,
    gaussian_max_relevance, gaussian_symmetric_tradeoff, BinaryModel, GaussianModel, RegionPoint,
    ThresholdPoint, TradeoffCurve,
};
pub use ba::{ba_run, beta_sweep, extract_region_point, BaConfig, BaResult, UpdateRule};
pub use bounds::{binary_error_curve, error_upper_bound, ClassifierBoundInput};
pub use error::{Error, Result};
pub use oracle::{oracle_min_objective, oracle_region_frontier, GridSpec};
pub use prob::{
    conditional_mi, entropy, h2, h2_inv, mutual_information, star, ConditionalPmf, JointPmf,
    Marginal,
};
