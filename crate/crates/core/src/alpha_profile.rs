//! The profile ODE `dα/du = 1 − (a+1)/cos α` and its curvature identities.
//!
//! A solution `α(u)` fixes the metric `du² + sin²α(u) dv²`, whose Gaussian
//! curvature is `K = α′`. The module solves the ODE with an adaptive
//! Dormand–Prince pair, stores the accepted nodes, and evaluates `α` between
//! them by quintic Hermite interpolation (α″ comes from the ODE).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csv;
use crate::error::{GeomError, Guard, Result};
use crate::ode::{dopri5_scalar, hermite5, AdaptiveOptions, StopReason};
use crate::warped_metric::{Interval, WarpedMetric};

/// Parameters of the rotating field `θ = a·v + ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    /// Angular speed along parallels.
    pub a: f64,
    /// Phase in radians.
    pub omega0: f64,
}

impl FieldParams {
    pub fn new(a: f64, omega0: f64) -> Self {
        Self { a, omega0 }
    }

    /// `m = −(a+1)`, the constant of the equivalent form `α′ = 1 + m/cos α`.
    pub fn m(&self) -> f64 {
        -(self.a + 1.0)
    }

    /// `a = −1` is the constant-curvature case `α′ ≡ 1` where `cos α` may vanish.
    pub fn is_sphere(&self) -> bool {
        self.a + 1.0 == 0.0
    }
}

/// Margins keeping a profile away from the excluded sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardMargins {
    pub cos_alpha: f64,
    pub sin_alpha: f64,
    pub curvature: f64,
}

impl Default for GuardMargins {
    fn default() -> Self {
        Self {
            cos_alpha: 1e-3,
            sin_alpha: 1e-3,
            curvature: 1e-6,
        }
    }
}

impl GuardMargins {
    /// First violated guard at `alpha`, if any. The `cos α` guard is skipped
    /// for `a = −1`, where the right-hand side has no pole.
    pub fn violation(&self, a: f64, alpha: f64) -> Option<(Guard, f64, f64)> {
        let c = alpha.cos().abs();
        if a + 1.0 != 0.0 && c < self.cos_alpha {
            return Some((Guard::CosAlpha, c, self.cos_alpha));
        }
        let s = alpha.sin().abs();
        if s < self.sin_alpha {
            return Some((Guard::SinAlpha, s, self.sin_alpha));
        }
        let k = match alpha_rhs(a, alpha) {
            Ok(k) => k.abs(),
            Err(_) => return Some((Guard::CosAlpha, c, self.cos_alpha)),
        };
        if k < self.curvature {
            return Some((Guard::Curvature, k, self.curvature));
        }
        None
    }

    /// Smallest `value / margin` ratio, identifying the guard that is closest to binding.
    fn tightest(&self, a: f64, alpha: f64) -> Guard {
        let mut best = (Guard::SinAlpha, alpha.sin().abs() / self.sin_alpha);
        if a + 1.0 != 0.0 {
            let r = alpha.cos().abs() / self.cos_alpha;
            if r < best.1 {
                best = (Guard::CosAlpha, r);
            }
        }
        if let Ok(k) = alpha_rhs(a, alpha) {
            let r = k.abs() / self.curvature;
            if r < best.1 {
                best = (Guard::Curvature, r);
            }
        }
        best.0
    }
}

/// Right-hand side `1 − (a+1)/cos α`.
pub fn alpha_rhs(a: f64, alpha: f64) -> Result<f64> {
    let m = a + 1.0;
    if m == 0.0 {
        return Ok(1.0);
    }
    let c = alpha.cos();
    if c == 0.0 {
        return Err(GeomError::Pole {
            what: "1 - (a+1)/cos(alpha)",
            at: alpha,
        });
    }
    Ok(1.0 - m / c)
}

/// `cos α = (a+1)/(1−K)`, the value forced on a profile with curvature `K`.
///
/// Returns [`GeomError::NonExistence`] when `|K − 1| < |a + 1|` (the result would
/// leave `[-1, 1]`), and [`GeomError::Pole`] at `K = 1`.
pub fn cos_alpha_from_curvature(a: f64, k: f64) -> Result<f64> {
    if k == 1.0 {
        return Err(GeomError::Pole {
            what: "(a+1)/(1-K)",
            at: k,
        });
    }
    let c = (a + 1.0) / (1.0 - k);
    if c.abs() >= 1.0 {
        return Err(GeomError::NonExistence(format!(
            "no totally geodesic field with angular speed a = {a} where K = {k}: |K-1| < |a+1| gives cos(alpha) = {c}"
        )));
    }
    Ok(c)
}

/// Any smooth `α(u)` that can generate the metric `du² + sin²α dv²`.
pub trait AlphaCurve {
    fn domain(&self) -> Interval;
    fn alpha(&self, u: f64) -> Result<f64>;
    fn alpha_prime(&self, u: f64) -> Result<f64>;
    fn alpha_second(&self, u: f64) -> Result<f64>;
}

/// Builds `f = sin α(u)` with closed-form `f′ = cos α·α′` and `f″ = −sin α·α′² + cos α·α″`.
pub fn warped_metric_for<C>(curve: Arc<C>) -> WarpedMetric
where
    C: AlphaCurve + Send + Sync + 'static,
{
    let domain = curve.domain();
    let (c0, c1, c2) = (curve.clone(), curve.clone(), curve);
    // The metric closures are only called after WarpedMetric checks the domain.
    WarpedMetric::with_derivatives(
        move |u| c0.alpha(u).map(f64::sin).unwrap_or(f64::NAN),
        move |u| match (c1.alpha(u), c1.alpha_prime(u)) {
            (Ok(al), Ok(ap)) => al.cos() * ap,
            _ => f64::NAN,
        },
        move |u| match (c2.alpha(u), c2.alpha_prime(u), c2.alpha_second(u)) {
            (Ok(al), Ok(ap), Ok(app)) => -al.sin() * ap * ap + al.cos() * app,
            _ => f64::NAN,
        },
        domain,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub u: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
}

/// Which guard ended integration at each side, if any.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Truncation {
    pub lower: Option<Guard>,
    pub upper: Option<Guard>,
}

impl Truncation {
    pub fn any(&self) -> bool {
        self.lower.is_some() || self.upper.is_some()
    }
}

/// Dense solution of the profile ODE on its validity interval.
#[derive(Debug, Clone)]
pub struct AlphaProfile {
    params: FieldParams,
    u0: f64,
    alpha0: f64,
    requested: Interval,
    validity: Interval,
    samples: Arc<[ProfileSample]>,
    truncation: Truncation,
    margins: GuardMargins,
    tol: f64,
}

/// Solves the profile ODE with default guard margins.
pub fn solve_alpha(params: FieldParams, u0: f64, alpha0: f64, u_span: Interval, tol: f64) -> Result<AlphaProfile> {
    solve_alpha_with(params, u0, alpha0, u_span, tol, GuardMargins::default())
}

pub fn solve_alpha_with(
    params: FieldParams,
    u0: f64,
    alpha0: f64,
    u_span: Interval,
    tol: f64,
    margins: GuardMargins,
) -> Result<AlphaProfile> {
    if !(tol > 0.0) {
        return Err(GeomError::Validation(format!("tolerance must be positive, got {tol}")));
    }
    if !params.a.is_finite() || !params.omega0.is_finite() || !alpha0.is_finite() {
        return Err(GeomError::Validation("parameters must be finite".into()));
    }
    if !u_span.contains(u0) {
        return Err(GeomError::Validation(format!(
            "u0 = {u0} is outside the requested span [{}, {}]",
            u_span.lo, u_span.hi
        )));
    }
    if let Some((guard, value, margin)) = margins.violation(params.a, alpha0) {
        return Err(GeomError::GuardViolation { guard, value, margin });
    }

    let a = params.a;
    let rhs = move |_u: f64, al: f64| alpha_rhs(a, al).unwrap_or(f64::NAN);
    // nodes alone can straddle a zero of cos α, sin α or α′ inside one step
    let same_sign = |x: f64, y: f64| x.signum() == y.signum();
    let ok = move |(_, al0, d0): (f64, f64, f64), (_, al1, d1): (f64, f64, f64)| {
        margins.violation(a, al1).is_none()
            && same_sign(al0.sin(), al1.sin())
            && (a + 1.0 == 0.0 || (same_sign(al0.cos(), al1.cos()) && same_sign(d0, d1)))
    };
    let opts = AdaptiveOptions {
        tol,
        ..AdaptiveOptions::default()
    };

    let forward = dopri5_scalar(rhs, u0, alpha0, u_span.hi, opts, ok);
    let backward = dopri5_scalar(rhs, u0, alpha0, u_span.lo, opts, ok);

    let side = |stopped: Option<StopReason>, last: f64| -> Result<Option<Guard>> {
        match stopped {
            None => Ok(None),
            Some(StopReason::Guard) | Some(StopReason::NonFinite) => Ok(Some(margins.tightest(a, last))),
            Some(StopReason::StepLimit) => Err(GeomError::Numeric("profile solver exhausted its step budget".into())),
        }
    };
    let truncation = Truncation {
        lower: side(backward.stopped, backward.nodes.last().map_or(alpha0, |n| n.1))?,
        upper: side(forward.stopped, forward.nodes.last().map_or(alpha0, |n| n.1))?,
    };

    let mut samples: Vec<ProfileSample> = backward
        .nodes
        .iter()
        .rev()
        .map(|&(u, alpha, alpha_prime)| ProfileSample { u, alpha, alpha_prime })
        .collect();
    samples.extend(
        forward
            .nodes
            .iter()
            .skip(1)
            .map(|&(u, alpha, alpha_prime)| ProfileSample { u, alpha, alpha_prime }),
    );
    let validity = Interval::new(samples[0].u, samples[samples.len() - 1].u);

    Ok(AlphaProfile {
        params,
        u0,
        alpha0,
        requested: u_span,
        validity,
        samples: samples.into(),
        truncation,
        margins,
        tol,
    })
}

impl AlphaProfile {
    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn initial_condition(&self) -> (f64, f64) {
        (self.u0, self.alpha0)
    }

    pub fn requested_span(&self) -> Interval {
        self.requested
    }

    pub fn validity(&self) -> Interval {
        self.validity
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation.any()
    }

    pub fn margins(&self) -> GuardMargins {
        self.margins
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn bracket(&self, u: f64) -> Result<(ProfileSample, ProfileSample)> {
        if !self.validity.contains(u) {
            return Err(GeomError::Domain {
                u,
                lo: self.validity.lo,
                hi: self.validity.hi,
            });
        }
        let s = &self.samples;
        if s.len() == 1 {
            return Ok((s[0], s[0]));
        }
        let i = s.partition_point(|x| x.u <= u).clamp(1, s.len() - 1);
        Ok((s[i - 1], s[i]))
    }

    /// `α(u)` and the derivative of its Hermite interpolant.
    pub fn interpolate(&self, u: f64) -> Result<(f64, f64)> {
        let (l, r) = self.bracket(u)?;
        let a = self.params.a;
        let jet = |s: ProfileSample| [s.alpha, s.alpha_prime, second_from_ode(a, s.alpha, s.alpha_prime)];
        Ok(hermite5(l.u, jet(l), r.u, jet(r), u))
    }

    /// Derivative of the interpolant, as opposed to the ODE right-hand side used by
    /// [`AlphaCurve::alpha_prime`].
    pub fn alpha_prime_interpolated(&self, u: f64) -> Result<f64> {
        Ok(self.interpolate(u)?.1)
    }

    /// `f = sin α(u)` with closed-form derivatives.
    pub fn metric(&self) -> WarpedMetric {
        warped_metric_for(Arc::new(self.clone()))
    }

    /// Profile CSV: `u, alpha, alpha_prime, K, cos_alpha` at every node.
    pub fn to_csv(&self) -> Result<String> {
        let metric = self.metric();
        let rows = self
            .samples
            .iter()
            .map(|s| Ok([s.u, s.alpha, s.alpha_prime, metric.gauss_curvature(s.u)?, s.alpha.cos()]))
            .collect::<Result<Vec<_>>>()?;
        Ok(csv::render(&["u", "alpha", "alpha_prime", "K", "cos_alpha"], rows))
    }
}

impl AlphaCurve for AlphaProfile {
    fn domain(&self) -> Interval {
        self.validity
    }

    fn alpha(&self, u: f64) -> Result<f64> {
        Ok(self.interpolate(u)?.0)
    }

    fn alpha_prime(&self, u: f64) -> Result<f64> {
        alpha_rhs(self.params.a, self.alpha(u)?)
    }

    fn alpha_second(&self, u: f64) -> Result<f64> {
        let al = self.alpha(u)?;
        Ok(second_from_ode(self.params.a, al, alpha_rhs(self.params.a, al)?))
    }
}

/// `α″ = −(a+1) sin α · α′ / cos²α`, differentiated from the ODE.
fn second_from_ode(a: f64, alpha: f64, alpha_prime: f64) -> f64 {
    let m = a + 1.0;
    if m == 0.0 {
        return 0.0;
    }
    let c = alpha.cos();
    -m * alpha.sin() * alpha_prime / (c * c)
}

/// `α(u) + ε·sin(ω u)`: a curve that does not solve the profile ODE.
#[derive(Debug, Clone)]
pub struct PerturbedAlpha {
    pub base: AlphaProfile,
    pub amplitude: f64,
    pub frequency: f64,
}

impl AlphaCurve for PerturbedAlpha {
    fn domain(&self) -> Interval {
        self.base.validity()
    }

    fn alpha(&self, u: f64) -> Result<f64> {
        Ok(self.base.alpha(u)? + self.amplitude * (self.frequency * u).sin())
    }

    fn alpha_prime(&self, u: f64) -> Result<f64> {
        Ok(self.base.alpha_prime(u)? + self.amplitude * self.frequency * (self.frequency * u).cos())
    }

    fn alpha_second(&self, u: f64) -> Result<f64> {
        let w = self.frequency;
        Ok(self.base.alpha_second(u)? - self.amplitude * w * w * (w * u).sin())
    }
}

/// Residuals of the curvature identity `K = α′` for a metric `du² + sin²α dv²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileIdentityCheck {
    /// `max |K − α′|` with `K = −(sin α)″/sin α`.
    pub curvature: f64,
    /// `max |α″_fd + α′(1−α′) tan α| / max(1, |α″|)`, `α″` by central differences of `α′`.
    pub second_derivative: f64,
    pub points: usize,
}

/// Evaluates `K − α′` on `n_points` evenly spaced points of the curve's domain.
pub fn verify_profile_identities<C>(curve: Arc<C>, n_points: usize) -> Result<ProfileIdentityCheck>
where
    C: AlphaCurve + Send + Sync + 'static,
{
    if n_points == 0 {
        return Err(GeomError::Validation("n_points must be positive".into()));
    }
    let h = 1e-4;
    let domain = curve.domain().shrink(2.0 * h);
    if domain.is_empty() {
        return Err(GeomError::Validation(
            "domain too short for the finite-difference check".into(),
        ));
    }
    let metric = warped_metric_for(curve.clone());
    let mut check = ProfileIdentityCheck {
        curvature: 0.0,
        second_derivative: 0.0,
        points: n_points,
    };
    for u in domain.linspace(n_points) {
        let al = curve.alpha(u)?;
        let ap = curve.alpha_prime(u)?;
        let k = metric.gauss_curvature(u)?;
        check.curvature = check.curvature.max((k - ap).abs());
        // step shrinks where α′ is large (near the pole of the ODE)
        let hs = h / ap.abs().max(1.0);
        let app = (curve.alpha_prime(u + hs)? - curve.alpha_prime(u - hs)?) / (2.0 * hs);
        let expected = -ap * (1.0 - ap) * al.tan();
        check.second_derivative = check
            .second_derivative
            .max((app - expected).abs() / expected.abs().max(1.0));
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn rhs_examples() {
        for al in [0.1, 1.0, FRAC_PI_2, 3.0] {
            assert_eq!(alpha_rhs(-1.0, al).unwrap(), 1.0);
        }
        assert!((alpha_rhs(0.0, FRAC_PI_3).unwrap() + 1.0).abs() < 1e-15);
        assert!((alpha_rhs(-0.5, FRAC_PI_4).unwrap() - 0.292_893_218_813_452_4).abs() < 1e-15);
    }

    #[test]
    fn rhs_matches_closed_form() {
        let p = FieldParams::new(0.3, 0.0);
        for al in [0.2, 0.9, 2.0] {
            let lhs = alpha_rhs(p.a, al).unwrap();
            assert!((lhs - (1.0 + p.m() / al.cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn cos_alpha_examples() {
        assert_eq!(cos_alpha_from_curvature(-1.0, 0.3).unwrap(), 0.0);
        assert!((cos_alpha_from_curvature(-0.5, -1.0).unwrap() - 0.25).abs() < 1e-16);
        assert!(matches!(
            cos_alpha_from_curvature(0.5, 0.5),
            Err(GeomError::NonExistence(_))
        ));
        assert!(matches!(
            cos_alpha_from_curvature(0.5, 1.0),
            Err(GeomError::Pole { .. })
        ));
    }

    #[test]
    fn sphere_profile_is_linear() {
        let p = solve_alpha(FieldParams::new(-1.0, 0.0), 0.0, 0.2, Interval::new(0.0, 2.0), 1e-10).unwrap();
        assert!(!p.is_truncated());
        for u in [0.0, 0.37, 1.2, 2.0] {
            assert!((p.alpha(u).unwrap() - (u + 0.2)).abs() < 1e-12);
            assert_eq!(p.alpha_prime(u).unwrap(), 1.0);
        }
    }

    #[test]
    fn sphere_profile_crosses_equator() {
        let p = solve_alpha(
            FieldParams::new(-1.0, 0.0),
            FRAC_PI_2,
            FRAC_PI_2,
            Interval::new(0.2, 2.9),
            1e-10,
        )
        .unwrap();
        assert!(!p.is_truncated());
        assert!((p.alpha(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_integral_holds_along_solution() {
        let p = solve_alpha(
            FieldParams::new(-0.5, 0.0),
            0.0,
            FRAC_PI_3 + 0.3,
            Interval::new(-1.0, 3.0),
            1e-10,
        )
        .unwrap();
        for s in p.samples() {
            let rel = s.alpha.cos() * (1.0 - s.alpha_prime);
            assert!((rel - 0.5).abs() < 1e-12);
        }
        for u in p.validity().linspace(97) {
            let al = p.alpha(u).unwrap();
            let ap = p.alpha_prime(u).unwrap();
            assert!((al.cos() * (1.0 - ap) - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn positive_a_truncates_before_pole() {
        let span = Interval::new(-1.0, 1.0);
        let p = solve_alpha(FieldParams::new(0.5, 0.0), 0.0, FRAC_PI_3, span, 1e-10).unwrap();
        assert!((p.alpha_prime(0.0).unwrap() + 2.0).abs() < 1e-12);
        // α decreases with u, so the pole cos α = 0 is approached going backwards
        assert_eq!(p.truncation().lower, Some(Guard::CosAlpha));
        assert!(p.validity().lo > span.lo);
        let c_end = p.samples()[0].alpha.cos();
        assert!((1e-3..2e-3).contains(&c_end), "stopped at cos = {c_end}");
        let reference = solve_alpha(FieldParams::new(0.5, 0.0), 0.0, FRAC_PI_3, span, 1e-12).unwrap();
        let inner = p.validity().shrink(1e-3);
        for u in inner.linspace(50) {
            let d = (p.alpha(u).unwrap() - reference.alpha(u).unwrap()).abs();
            assert!(d < 10.0 * 1e-10, "u = {u}: {d}");
        }
    }

    #[test]
    fn guard_catches_sign_change_between_nodes() {
        // α increases through 0 with α′ ≥ 1.5; sin α must stop the profile there
        let p = solve_alpha(FieldParams::new(-1.5, 0.0), 0.0, 1.0, Interval::new(-3.0, 3.0), 1e-10).unwrap();
        assert_eq!(p.truncation().lower, Some(Guard::SinAlpha));
        assert!(p.samples().iter().all(|s| s.alpha > 0.0));
    }

    #[test]
    fn inadmissible_initial_conditions() {
        let span = Interval::new(-1.0, 1.0);
        let e = solve_alpha(FieldParams::new(0.0, 0.0), 0.0, FRAC_PI_2, span, 1e-10).unwrap_err();
        assert!(matches!(
            e,
            GeomError::GuardViolation {
                guard: Guard::CosAlpha,
                ..
            }
        ));
        let e = solve_alpha(FieldParams::new(-1.0, 0.0), 0.0, PI, span, 1e-10).unwrap_err();
        assert!(matches!(
            e,
            GeomError::GuardViolation {
                guard: Guard::SinAlpha,
                ..
            }
        ));
        // α′ = 0 at cos α = a+1
        let e = solve_alpha(FieldParams::new(-0.5, 0.0), 0.0, FRAC_PI_3, span, 1e-10).unwrap_err();
        assert!(matches!(
            e,
            GeomError::GuardViolation {
                guard: Guard::Curvature,
                ..
            }
        ));
        assert!(solve_alpha(FieldParams::new(-0.5, 0.0), 2.0, 1.0, span, 1e-10).is_err());
        assert!(solve_alpha(FieldParams::new(-0.5, 0.0), 0.0, 1.0, span, 0.0).is_err());
    }

    #[test]
    fn sign_of_curvature_is_preserved() {
        for (a, al0) in [(-0.5, 1.3), (-0.5, 0.7), (-1.5, 1.0), (0.5, FRAC_PI_3), (-0.25, 1.0)] {
            let p = solve_alpha(FieldParams::new(a, 0.0), 0.0, al0, Interval::new(-2.0, 2.0), 1e-10).unwrap();
            let sign = p.samples()[0].alpha_prime.signum();
            assert!(p.samples().iter().all(|s| s.alpha_prime.signum() == sign), "a = {a}");
        }
    }

    #[test]
    fn interpolant_derivative_tracks_rhs() {
        let p = solve_alpha(FieldParams::new(-0.75, 0.0), 0.0, 0.8, Interval::new(-0.5, 2.0), 1e-10).unwrap();
        for u in p.validity().linspace(333) {
            let diff = p.alpha_prime_interpolated(u).unwrap() - p.alpha_prime(u).unwrap();
            assert!(diff.abs() < 1e-6, "u = {u}: {diff}");
        }
    }

    #[test]
    fn profile_identity_residuals() {
        let sphere = solve_alpha(FieldParams::new(-1.0, 0.0), 0.0, 0.2, Interval::new(0.0, 2.0), 1e-10).unwrap();
        let r = verify_profile_identities(Arc::new(sphere), 100).unwrap();
        assert!(r.curvature <= 1e-10 && r.second_derivative <= 1e-10, "{r:?}");

        let half = solve_alpha(FieldParams::new(-0.5, 0.0), 0.0, 1.3, Interval::new(-0.1, 3.0), 1e-10).unwrap();
        let r = verify_profile_identities(Arc::new(half.clone()), 100).unwrap();
        assert!(r.curvature <= 1e-7, "{r:?}");
        assert!(r.second_derivative <= 1e-5, "{r:?}");

        let bent = PerturbedAlpha {
            base: half,
            amplitude: 0.01,
            frequency: 5.0,
        };
        let r = verify_profile_identities(Arc::new(bent), 100).unwrap();
        assert!(r.curvature >= 1e-3, "{r:?}");
    }

    #[test]
    fn profile_curvature_equals_rhs() {
        let p = solve_alpha(FieldParams::new(-0.5, 0.0), 0.0, 1.3, Interval::new(-0.1, 3.0), 1e-10).unwrap();
        let m = p.metric();
        for u in p.validity().linspace(41) {
            let k = m.gauss_curvature(u).unwrap();
            let al = p.alpha(u).unwrap();
            assert!((k - (1.0 - 0.5 / al.cos())).abs() < 1e-8);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = solve_alpha(FieldParams::new(-1.0, 0.0), 0.0, 0.2, Interval::new(0.0, 0.1), 1e-10).unwrap();
        let text = p.to_csv().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("u,alpha,alpha_prime,K,cos_alpha"));
        assert_eq!(lines.count(), p.samples().len());
    }
}
