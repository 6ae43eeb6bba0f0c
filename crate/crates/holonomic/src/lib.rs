//! Normed isometry groups, holonomic metrics, and constant-curvature
//! holonomy at desk scale.
//!
//! The library models triplets (V, H, L): a Euclidean space V, a group H of
//! orthogonal maps, and a group-norm L on H. From these it computes the
//! modified metric d_L, the convexity and holonomy radii, and it validates
//! the whole construction against three independent oracles: closed forms on
//! the constant-curvature surfaces, ODE parallel transport, and brute-force
//! minimization over loop families.

pub mod extended;
pub mod group;
pub mod matrix;
pub mod search;
pub mod space;
pub mod spaceform;
pub mod suite;
pub mod transport;

pub use extended::Extended;
pub use group::{
    compose_norm_with_subadditive, left_invariant_distance, operator_norm, rotation_sample,
    validate_group_norm, GroupElement, GroupError, NormedGroupSample, SampleEntry,
    ValidationReport,
};
pub use matrix::Matrix;
pub use space::{
    counterexample_space, ConvexityViolation, GroupModel, HolonomicSpace, OneParamFamily,
    RadiusBracket, SpaceError,
};
pub use spaceform::{
    build_fiber_space, fiber_distance, isoperimetric_residual, length_norm, length_norm_numeric,
    manifold_holonomy_radius, AngleNorm, FiberDistance, NumericNorm, RadiusEstimate, SpaceForm,
    SpaceFormError,
};
pub use transport::{
    gauss_bonnet_residual, holonomy_angle, sphere_latitude_transport, transport_rotation,
    wrap_angle, GeodesicCircle, LoopSpec, TransportError, TransportResult,
};
