//! Analysis of finite metric spaces.
//!
//! This crate decides, for a labeled point set with a validated distance
//! matrix:
//!
//! * whether the space is **ultrametric** or **additive** (tree-like), with
//!   violating witnesses when not ([`space`]);
//! * whether it has (strict) **p-negative type** for a given exponent, by the
//!   spectral test on the base-point-centered Gram-form matrix, and its
//!   **generalized roundness** — the supremal such exponent — by bracketed
//!   bisection with a determinant-based cross-check ([`negtype`]);
//! * its plain **roundness** behavior on quadruples, including per-quadruple
//!   critical exponents ([`roundness`]);
//! * an isometric **Euclidean embedding** of `(X, d^(p/2))` of minimal
//!   dimension whenever one exists ([`embed`]);
//! * the **polygonal equality** witnessing the supremal exponent of a
//!   non-ultrametric space ([`polygonal`]).
//!
//! The [`generators`] module constructs families with known answers for all
//! of the above: star leaf spaces with closed-form generalized roundness
//! (including inverse design for a target value), random dendrogram
//! ultrametrics and weighted-tree path metrics.
//!
//! Everything is a pure function of its inputs; values are immutable after
//! construction and safe to share across threads.
//!
//! ```
//! use finmetric::{generalized_roundness, make_lbk, GrOptions};
//!
//! let space = make_lbk(3.0, 2).unwrap();
//! let gr = generalized_roundness(&space, &GrOptions::default()).unwrap();
//! let value = gr.value.finite().unwrap();
//! assert!((value - 3.419022582702909).abs() < 1e-6);
//! ```

pub mod embed;
pub mod generators;
pub mod negtype;
pub mod polygonal;
pub mod roundness;
pub mod space;

pub use embed::{embed_euclidean, verify_isometry, EmbedError, EuclideanEmbedding, IsometryCheck};
pub use generators::{
    lbk_for_target, lbk_params, make_lbk, random_ultrametric, random_weighted_tree,
    tree_path_metric, Dendrogram, GeneratorError, LbkParams, Merge, WeightedTree,
};
pub use negtype::{
    deza_maehara_floor, generalized_roundness, gr_violation_search, gram_matrix,
    negative_type_status, p_distance_matrix, sanchez_invariant, GeneralizedRoundnessResult,
    GrMethod, GrOptions, GrValue, GrViolation, GramMatrix, NegTypeError, NegTypeResult,
    NegTypeStatus, PDistanceMatrix, SingularDistanceMatrix,
};
pub use polygonal::{
    find_polygonal_equality, polygonal_tolerance, verify_polygonal_equality, PolygonalEquality,
    PolygonalError,
};
pub use roundness::{
    is_infinite_roundness, roundness_exponent_check, roundness_profile, ProfileOptions,
    QuadrupleRecord, RoundnessCheck, RoundnessProfile, RoundnessWitness,
};
pub use space::{distance_power, ClassificationReport, FiniteMetricSpace, MetricError};
