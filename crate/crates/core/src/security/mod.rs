//! Security analysis: analytic attack bounds, information estimators and
//! statistical randomness tests.

pub mod bounds;
pub mod estimate;
mod kdtree;
pub mod nist;

pub use bounds::{fano_bound, mi_gaussian, semantic_bound, BoundKind, BoundReport};
pub use estimate::{
    estimate_entropy, estimate_mi, EstimatorConfig, EstimatorKind, MiEstimate, Samples,
};
pub use nist::{nist_core_tests, NistParams, TestResult};
