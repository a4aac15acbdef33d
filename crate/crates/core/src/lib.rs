//! Exact inference for discrete hidden Markov models with logarithmic-span
//! parallelism.
//!
//! Two inference problems are solved over observation-conditioned chain
//! potentials: smoothing marginals per step (sum-product) and the single
//! most probable state sequence (max-product). Each problem has a classic
//! sequential recursion and an equivalent formulation as an inclusive scan
//! under an associative operator, which a balanced-tree engine evaluates
//! with span logarithmic in the sequence length. Matching brute-force
//! oracles, a bursty-channel model generator, and seeded simulation support
//! differential testing and benchmarking.
//!
//! # Layout
//!
//! * [`model`]: validated models, observation and state sequences,
//!   potential construction, joint path weights, JSON round-trip.
//! * [`scan`]: the generic scan engine and its instrumentation.
//! * [`sum_product`]: smoothing marginals, sequential and scan-based.
//! * [`max_product`]: three most-probable-path decoders.
//! * [`oracle`]: exponential-cost enumeration references.
//! * [`ge`]: the bursty binary channel model and trajectory simulation.
//!
//! # Scalars
//!
//! All numeric types are generic with `f64` defaults: probability-domain
//! code over [`FloatScalar`] (`f64`, `f32`), log-domain max-plus code over
//! [`MaxPlusWeight`] (`f64`, `f32`, and exact `i64`).

pub mod error;
pub mod ge;
pub mod matrix;
pub mod max_product;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod scan;
pub mod sum_product;

pub use error::{HmmError, Result};
pub use ge::{build_ge_model, simulate, GeParams, SimulationOutput};
pub use matrix::Matrix;
pub use max_product::{
    combine_max, combine_path, map_from_potentials, map_parallel, map_sequential,
    max_backward_elements, max_backward_parallel, max_backward_sequential,
    max_forward_elements, max_forward_parallel, max_forward_sequential, path_elements,
    viterbi_path_parallel, viterbi_path_parallel_with_capacity, viterbi_sequential,
    DecodeOutcome, MapResult, MaxProductElement, PathElement, AMBIGUITY_GAP_TOLERANCE,
    DEFAULT_PATH_CAPACITY, TIE_DETECTION_TOLERANCE,
};
pub use model::{
    build_potentials, joint_weight, HmmModel, ObservationSequence, PotentialSequence,
    StateSequence,
};
pub use oracle::{
    brute_force_log_evidence, brute_force_map, brute_force_marginals, BRUTE_FORCE_LIMIT,
};
pub use scalar::{FloatScalar, MaxPlusWeight};
pub use scan::{
    ceil_log2, parallel_depth_bound, parallel_invocation_bound, parallel_reduce, parallel_scan,
    sequential_scan, ScanDirection, ScanProblem, ScanStats,
};
pub use sum_product::{
    backward_elements, backward_parallel, backward_sequential, combine_sum, forward_elements,
    forward_parallel, forward_sequential, marginals, per_step_log_evidence, smooth_parallel,
    smooth_sequential, MarginalSet, ScaledVector, SmoothOutcome, SumProductElement,
};

/// Single-precision aliases; the bare names default to `f64`.
pub type HmmModel32 = HmmModel<f32>;
pub type PotentialSequence32 = PotentialSequence<f32>;
pub type MarginalSet32 = MarginalSet<f32>;
pub type MapResult32 = MapResult<f32>;
/// Exact-integer max-plus element for algebraic testing.
pub type MaxProductElementI64 = MaxProductElement<i64>;
