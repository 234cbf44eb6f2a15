//! Totally geodesic unit vector fields on surfaces.
//!
//! A unit field `ξ` on a surface `M` is a map `M → T₁M`; it is totally geodesic
//! when its image is a totally geodesic surface of the unit tangent bundle
//! with the Sasaki metric. Such fields live exactly on metrics
//! `du² + sin²α(u) dv²` with `α′ = 1 − (a+1)/cos α`, where they take the form
//! `θ = a·v + ω₀` (angle measured from `∂u`).
//!
//! The crate builds those metrics and fields and checks total geodesy two
//! independent ways: the closed-form second fundamental form in the moving
//! frame ([`frame_field`]) and geodesic shooting in `T₁M` ([`sasaki_bundle`]).
//! [`trajectories`] integrates the integral curves and their first integrals;
//! [`immersion`] realizes the metrics as surfaces of revolution.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
// Index loops mirror the tensor notation of the Christoffel sums.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod alpha_profile;
pub mod csv;
pub mod error;
pub mod frame_field;
pub mod immersion;
pub mod ode;
pub mod quadrature;
pub mod sasaki_bundle;
pub mod trajectories;
pub mod warped_metric;

pub use alpha_profile::{
    alpha_rhs, cos_alpha_from_curvature, solve_alpha, solve_alpha_with, verify_profile_identities, AlphaCurve,
    AlphaProfile, FieldParams, GuardMargins, PerturbedAlpha, ProfileIdentityCheck,
};
pub use error::{GeomError, Guard, Result};
pub use frame_field::{
    frame_invariants, second_fundamental_form, tg_field, tg_residual, FrameInvariants, FrameOptions, Grid,
    ResidualReport, Sff, UnitField,
};
pub use sasaki_bundle::{
    geodesic_shoot, imbed, induced_curvature, induced_metric, numeric_sff, sasaki_components, surface_deviation,
    BundlePath, SasakiMetric, SasakiPoint,
};
pub use trajectories::{
    first_integral, integrate_trajectory, intrinsic_relation_residual, sphere_circle, stereographic, xi_k,
    FirstIntegralCase, FirstIntegralValue, Trajectory,
};
pub use warped_metric::{Differentiation, Interval, Point2, Tangent2, VectorField, WarpedMetric};
