//! Finite experiments on Cayley graphs: word-metric balls, complement
//! components and end depth, ends estimates, gl-partitions of finite metric
//! spaces, and the sphere-size detectors for virtual cyclicity.

pub mod cayley;
pub mod classifiers;
pub mod ends;
pub mod error;
pub mod gl_partition;
pub mod group;
pub mod scalar;

pub use cayley::{
    build_axis, explore, sphere_counts, word_length, BallTable, GeodesicAxis, SphereCounts, DEFAULT_NODE_BUDGET,
};
pub use classifiers::{
    bounded_sphere_detector, criterion_radius, growth_dominates, linear_end_depth_check, sphere_bound_criterion,
    sphere_cover_demo, sphere_size_detector, DemoReport, DominationBounds, DominationWitness, GrowthSamples, Verdict,
    VerdictKind,
};
pub use ends::{
    check_obss_witness, complement_components, end_count_estimate, end_depth, end_depth_profile, EndDepthOptions,
    EndDepthProfile, EndsClass, EndsEstimate, ObssWitness, Truncation, WitnessReport,
};
pub use error::{Error, Result};
pub use gl_partition::{
    build_gl_partition, similar_partitions, sphere_as_metric_space, verify_gl_partition, FiniteMetricSpace,
    GlPartition, VerificationReport,
};
pub use group::{make_group, Element, GroupOracle, GroupSpec};
pub use scalar::Scalar;

/// Word-metric spaces carved out of Cayley graphs.
pub type WordMetricSpace = gl_partition::FiniteMetricSpace<u64>;
/// Metric spaces with real-valued distances.
pub type RealMetricSpace = gl_partition::FiniteMetricSpace<f64>;
pub type WordGlPartition = gl_partition::GlPartition<u64>;
pub type RealGlPartition = gl_partition::GlPartition<f64>;
pub type RealGrowthSamples = classifiers::GrowthSamples<f64>;
pub type IntGrowthSamples = classifiers::GrowthSamples<u64>;
