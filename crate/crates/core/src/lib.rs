//! Local computation algorithms for `O(log Δ)`-approximate set cover.
//!
//! Instances are bipartite set/element graphs read through a query-counted
//! adjacency oracle ([`access`]). On top of it sit the sampling-based warmup
//! LCA ([`warmup_lca`]), the boosted main LCA with retroactive updates
//! ([`main_lca`]), their integral variants ([`integral`]), and a sublinear
//! estimator of the optimum ([`estimator`]). [`reference`] holds the global
//! algorithms used as ground truth.
//!
//! Weight-carrying code is generic over [`Scalar`]; use [`Weight`] for speed
//! and [`ExactWeight`] for bit-exact comparisons.

pub mod access;
pub mod estimator;
pub mod instance;
pub mod integral;
pub mod main_lca;
pub mod probe;
pub mod randomness;
pub mod reference;
pub mod scalar;
pub mod stats;
pub mod warmup_lca;

pub use access::{AlgoParams, CacheMode, ProbeContext, Vertex};
pub use estimator::{estimate_opt, EstimateReport};
pub use instance::{
    generate_instance, load_instance, validate_cover, CoverVerdict, ElementId, Family, FractionalCover, GeneratedInstance,
    IntegralCover, SetCoverInstance, SetId,
};
pub use integral::{covered_estimate, integral_probe_element, integral_probe_set, warmup_integral_probe, CoverDecision};
pub use main_lca::{degree_estimate, main_probe_weight, weight_estimate, BoostFrame, DegreeOutcome, ElementWeight};
pub use probe::{probe_all_sets, LcaKind};
pub use randomness::{RandomTape, RoundingTape};
pub use reference::{exact_cover, greedy_cover, run_alg1, run_alg2, run_alg6, RunTrace, SlackPolicy};
pub use scalar::Scalar;
pub use warmup_lca::{get_weight, is_ele_cov, is_set_dense, lca_weight, DensityVerdict};

/// Floating-point weight.
pub type Weight = f64;
/// Single-precision weight.
pub type Weight32 = f32;
/// Exact rational weight.
pub type ExactWeight = num_rational::Ratio<i64>;

pub type FractionalCover64 = FractionalCover<Weight>;
pub type ExactFractionalCover = FractionalCover<ExactWeight>;
