//! Simulator and bounds calculator for Byzantine-resilient gradient coding.
//!
//! `n = m (s + u)` workers are split into `m` groups. Every member of a group
//! computes the sum of the same `p/m` partial gradients over `Z_q^d`. Up to
//! `s` workers are malicious. When a group disagrees, the main node runs an
//! elimination tournament: pairs of representatives descend a binary sum tree
//! to a single disputed gradient coordinate, their subsets vote on it, and
//! the main node computes that gradient itself only when the vote cannot
//! settle it.
//!
//! ```
//! use bgc_core::{random_gradients, run_scheme, full_gradient, AdversaryModel, ProtocolConfig,
//!     SchemeParams, SymmetrizationConfig};
//! use bgc_core::rng::{substream, Stream};
//!
//! let params = SchemeParams::new(2, 1, 1, 8, 1, 1 << 16).unwrap();
//! let truth = random_gradients(&params, 7);
//! let model = AdversaryModel::Symmetrization(SymmetrizationConfig::per_index());
//! let mut adversary = model.instantiate(&params, &truth, substream(7, Stream::Adversary, 0)).unwrap();
//! let mut rng = substream(7, Stream::Protocol, 0);
//! let out = run_scheme(&params, &truth, &mut adversary, ProtocolConfig::default(), &mut rng).unwrap();
//! assert_eq!(out.estimate, full_gradient(&truth).unwrap());
//! assert_eq!(out.metrics.local_computations, 2);
//! ```

pub mod adversary;
pub mod assignment;
pub mod bounds;
pub mod gradient;
pub mod matchtree;
pub mod message;
pub mod params;
pub mod protocol;
pub mod rng;

/// An element of `Z_q`, always in `0..q`.
pub type Residue = u64;
/// Exact ratios such as the replication factor.
pub type Rational = num_rational::Ratio<u64>;
/// Default float for bound evaluation.
pub type Real = f64;
pub type BoundsReport64 = bounds::BoundsReport<f64>;
pub type BoundsReport32 = bounds::BoundsReport<f32>;

pub use adversary::{
    two_case_worlds, Adversary, AdversaryError, AdversaryModel, ClaimedGradientTable,
    DisagreementSet, MessageStrategy, SymmetrizationConfig, SymmetrizationMode, TableAttack, World,
};
pub use assignment::{build_fractional_repetition, replication_factor, AssignmentMatrix};
pub use bounds::{
    check_compliance, comm_lower, disagreement_coverage_check, draco_baseline,
    indistinguishability_check, local_comp_lower, ratio_limit, scheme_upper_bounds, BoundsError,
    BoundsReport, Compliance, UpperBounds, Witness,
};
pub use gradient::{full_gradient, random_gradients, GradientError, GradientVector};
pub use matchtree::{infer_right_label, MatchTree, NodeRange};
pub use params::{ParamsError, SchemeParams, DEFAULT_ALPHABET};
pub use protocol::{
    run_scheme, DrawPolicy, Metrics, ProtocolConfig, ProtocolError, RunOutput, Transcript,
};
