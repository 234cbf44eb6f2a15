//! Integral curves of the field `θ = a·v + ω₀` and their closed-form invariants.
//!
//! Along a unit-speed trajectory `u′ = cos ω`, `v′ = sin ω / sin α` with
//! `ω = a·v + ω₀`. Separating variables gives a first integral in three shapes
//! (generic `a`, `a = −2`, `a = 0`). For `a = −1` the metric is the round sphere
//! and the trajectories are the circles through the south pole; they project
//! stereographically to the horizontal lines `ρ sin φ = c`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::alpha_profile::{AlphaCurve, AlphaProfile, FieldParams};
use crate::csv;
use crate::error::{GeomError, Result};
use crate::frame_field::{frame_invariants, tg_field, FrameInvariants, FrameOptions};
use crate::ode::rk4_fixed;
use crate::warped_metric::Point2;

/// `|a|` or `|a + 2|` at or below this selects the special first integrals.
pub const CASE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstIntegralCase {
    Generic,
    AMinus2,
    AZero,
}

impl FirstIntegralCase {
    pub fn for_a(a: f64) -> Self {
        if a.abs() <= CASE_TOLERANCE {
            FirstIntegralCase::AZero
        } else if (a + 2.0).abs() <= CASE_TOLERANCE {
            FirstIntegralCase::AMinus2
        } else {
            FirstIntegralCase::Generic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstIntegralValue {
    pub case: FirstIntegralCase,
    /// The integration constant `c`.
    pub value: f64,
    pub omega0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    /// Arc length from the start.
    pub s: f64,
    pub u: f64,
    pub v: f64,
}

impl TrajectorySample {
    pub fn point(&self) -> Point2 {
        Point2::new(self.u, self.v)
    }
}

/// A unit-speed integral curve of the field over a solved profile.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: FieldParams,
    pub samples: Vec<TrajectorySample>,
    /// Set when the curve left the profile's validity interval early.
    pub truncated: bool,
    pub profile: AlphaProfile,
}

impl Trajectory {
    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        self.samples.iter().map(TrajectorySample::point)
    }

    /// Arc length actually covered.
    pub fn length(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s.abs())
    }

    /// CSV with columns `s,u,v,alpha,k,kappa,first_integral`; the last column
    /// is `NaN` where the first integral is undefined.
    pub fn to_csv(&self) -> Result<String> {
        let rows = self.table()?;
        Ok(csv::render(
            &["s", "u", "v", "alpha", "k", "kappa", "first_integral"],
            rows,
        ))
    }

    /// The rows written by [`Trajectory::to_csv`].
    pub fn table(&self) -> Result<Vec<[f64; 7]>> {
        let metric = self.profile.metric();
        let field = tg_field_with(&self.profile, self.params);
        self.samples
            .iter()
            .map(|s| {
                let p = s.point();
                let inv = frame_invariants(&metric, &field, p, FrameOptions::default())?;
                let c = first_integral(&self.profile, self.params, p).map_or(f64::NAN, |c| c.value);
                Ok([s.s, s.u, s.v, self.profile.alpha(s.u)?, inv.k, inv.kappa, c])
            })
            .collect()
    }
}

fn tg_field_with(profile: &AlphaProfile, params: FieldParams) -> crate::frame_field::UnitField {
    if params == profile.params() {
        tg_field(profile)
    } else {
        crate::frame_field::UnitField::rotating(params.a, params.omega0)
    }
}

fn check_params(profile: &AlphaProfile, params: FieldParams) -> Result<()> {
    if params.a != profile.params().a {
        return Err(GeomError::Validation(format!(
            "field speed a = {} does not match the profile's a = {}",
            params.a,
            profile.params().a
        )));
    }
    Ok(())
}

/// Fixed-step RK4 integration of `u′ = cos ω`, `v′ = sin ω / sin α(u)`.
/// A negative `length` integrates backwards.
pub fn integrate_trajectory(
    profile: &AlphaProfile,
    params: FieldParams,
    start: Point2,
    length: f64,
    step: f64,
) -> Result<Trajectory> {
    check_params(profile, params)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(GeomError::Validation(format!("step must be positive, got {step}")));
    }
    if !length.is_finite() {
        return Err(GeomError::Validation("length must be finite".into()));
    }
    let validity = profile.validity();
    if !validity.contains(start.u) {
        return Err(GeomError::Validation(format!(
            "start u = {} lies outside the profile's validity interval [{}, {}]",
            start.u, validity.lo, validity.hi
        )));
    }
    let (a, omega0) = (params.a, params.omega0);
    let rhs = |_s: f64, y: &[f64; 2]| -> [f64; 2] {
        let omega = a * y[1] + omega0;
        match profile.alpha(y[0]) {
            Ok(al) => [omega.cos(), omega.sin() / al.sin()],
            Err(_) => [f64::NAN; 2],
        }
    };
    let run = rk4_fixed(rhs, [start.u, start.v], length, step, |y| validity.contains(y[0]));
    let samples = run
        .samples
        .into_iter()
        .map(|(s, y)| TrajectorySample { s, u: y[0], v: y[1] })
        .collect();
    Ok(Trajectory {
        params,
        samples,
        truncated: run.truncated,
        profile: profile.clone(),
    })
}

/// `base^p` for the generic first integral; negative bases are allowed only
/// for integer `p`.
fn branch_power(base: f64, p: f64) -> Result<f64> {
    let rounded = p.round();
    if (p - rounded).abs() <= CASE_TOLERANCE {
        if base == 0.0 && rounded < 0.0 {
            return Err(GeomError::Branch { base });
        }
        return Ok(base.powi(rounded as i32));
    }
    if base <= 0.0 {
        return Err(GeomError::Branch { base });
    }
    Ok(base.powf(p))
}

/// The constant `c` of the matching first integral at `p`:
///
/// ```text
/// generic: tan(α/2) sin(av+ω₀) = c (a + (a+2) tan²(α/2))^((a+1)/(a+2))
/// a = −2:  tan(α/2) sin(−2v+ω₀) = c exp(½ tan²(α/2))
/// a = 0:   ½ tan ω₀ (1/(1 − cos α) + ln|tan(α/2)|) = v − c
/// ```
pub fn first_integral(profile: &AlphaProfile, params: FieldParams, p: Point2) -> Result<FirstIntegralValue> {
    check_params(profile, params)?;
    let alpha = profile.alpha(p.u)?;
    first_integral_at(params, alpha, p.v)
}

/// [`first_integral`] from `α` and `v` directly.
pub fn first_integral_at(params: FieldParams, alpha: f64, v: f64) -> Result<FirstIntegralValue> {
    let FieldParams { a, omega0 } = params;
    let t = (0.5 * alpha).tan();
    let case = FirstIntegralCase::for_a(a);
    let value = match case {
        FirstIntegralCase::Generic => {
            let base = a + (a + 2.0) * t * t;
            t * (a * v + omega0).sin() / branch_power(base, (a + 1.0) / (a + 2.0))?
        }
        FirstIntegralCase::AMinus2 => t * (-2.0 * v + omega0).sin() * (-0.5 * t * t).exp(),
        FirstIntegralCase::AZero => {
            check_azero_phase(omega0)?;
            v - 0.5 * omega0.tan() * (1.0 / (1.0 - alpha.cos()) + t.abs().ln())
        }
    };
    Ok(FirstIntegralValue { case, value, omega0 })
}

fn check_azero_phase(omega0: f64) -> Result<()> {
    if omega0.sin().abs() <= CASE_TOLERANCE {
        return Err(GeomError::DegenerateField(format!(
            "a = 0 with omega0 = {omega0} is a multiple of pi: the trajectories are meridians and cot(omega) is undefined"
        )));
    }
    Ok(())
}

/// `|LHS − RHS|` of the curvature relation matching `params.a`, with
/// `tan²(α/2) = k² + ϰ²`:
///
/// ```text
/// generic: k = c (a + (a+2)(k² + ϰ²))^((a+1)/(a+2))
/// a = −2:  k = c exp(½(k² + ϰ²))
/// a = 0:   k = sin ω₀ exp(2 cot ω₀ (v − c) − ½(1 + k² + ϰ²)/(k² + ϰ²))
/// ```
///
/// For `a = 0` the relation involves `v` and holds along one trajectory only.
pub fn intrinsic_relation_residual(inv: &FrameInvariants, c: f64, params: FieldParams, v: f64) -> Result<f64> {
    let FieldParams { a, omega0 } = params;
    let l2 = inv.k * inv.k + inv.kappa * inv.kappa;
    let rhs = match FirstIntegralCase::for_a(a) {
        FirstIntegralCase::Generic => c * branch_power(a + (a + 2.0) * l2, (a + 1.0) / (a + 2.0))?,
        FirstIntegralCase::AMinus2 => c * (0.5 * l2).exp(),
        FirstIntegralCase::AZero => {
            check_azero_phase(omega0)?;
            if l2 == 0.0 {
                return Err(GeomError::StationaryPoint {
                    u: f64::NAN,
                    v,
                    lambda: 0.0,
                });
            }
            omega0.sin() * (2.0 / omega0.tan() * (v - c) - 0.5 * (1.0 + l2) / l2).exp()
        }
    };
    Ok((inv.k - rhs).abs())
}

/// Derivative of `k` along the trajectory through `p`:
/// `ξ(k) = (a+1) cos ω sin ω / (2 cos²(α/2)) · (1 − 1/cos α)`.
pub fn xi_k(profile: &AlphaProfile, params: FieldParams, p: Point2) -> Result<f64> {
    check_params(profile, params)?;
    let alpha = profile.alpha(p.u)?;
    if let Some((guard, value, margin)) = profile.margins().violation(params.a, alpha) {
        return Err(GeomError::GuardViolation { guard, value, margin });
    }
    let m = params.a + 1.0;
    if m == 0.0 {
        return Ok(0.0);
    }
    let omega = params.a * p.v + params.omega0;
    let half = (0.5 * alpha).cos();
    Ok(m * omega.cos() * omega.sin() / (2.0 * half * half) * (1.0 - 1.0 / alpha.cos()))
}

/// The circle of the `a = −1` family with constant `c`, parameterized by `v`:
/// `r(v) = (2c sin v cos v, 2c sin²v, sin²v − c²) / (c² + sin²v)`.
pub fn sphere_circle(c: f64, v: f64) -> Result<[f64; 3]> {
    let (s, co) = v.sin_cos();
    let d = c * c + s * s;
    if d <= 1e-30 {
        return Err(GeomError::Parameterization(format!("c = 0 and sin v = 0 at v = {v}")));
    }
    Ok([2.0 * c * s * co / d, 2.0 * c * s * s / d, -(c * c - s * s) / d])
}

/// `(sin u cos v, sin u sin v, cos u)`.
pub fn sphere_point(p: Point2) -> [f64; 3] {
    let (su, cu) = p.u.sin_cos();
    let (sv, cv) = p.v.sin_cos();
    [su * cv, su * sv, cu]
}

/// `(ρ, φ) = (tan(u/2), v)`.
pub fn stereographic(p: Point2) -> Result<(f64, f64)> {
    let half = 0.5 * p.u;
    if half.cos().abs() < 1e-15 {
        return Err(GeomError::Pole {
            what: "stereographic projection",
            at: p.u,
        });
    }
    Ok((half.tan(), p.v))
}

/// Least-squares plane through a point cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneFit {
    /// Unit normal.
    pub normal: [f64; 3],
    pub centroid: [f64; 3],
    /// Largest distance of an input point from the plane.
    pub max_residual: f64,
}

impl PlaneFit {
    pub fn distance(&self, x: [f64; 3]) -> f64 {
        (0..3)
            .map(|i| (x[i] - self.centroid[i]) * self.normal[i])
            .sum::<f64>()
            .abs()
    }
}

pub fn fit_plane(points: &[[f64; 3]]) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(GeomError::Validation(format!(
            "a plane needs 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + Vector3::from(*p)) / n;
    let scatter = points.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = Vector3::from(*p) - centroid;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(scatter);
    let normal = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
    let fit = PlaneFit {
        normal: normal.into(),
        centroid: centroid.into(),
        max_residual: 0.0,
    };
    let max_residual = points.iter().map(|&p| fit.distance(p)).fold(0.0, f64::max);
    Ok(PlaneFit { max_residual, ..fit })
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Samples the curve `r(t)`, `t ∈ [lo, hi]`, bisecting until consecutive
/// points are at most `spacing` apart.
pub fn sample_curve<F>(r: F, lo: f64, hi: f64, spacing: f64) -> Result<Vec<[f64; 3]>>
where
    F: Fn(f64) -> Result<[f64; 3]>,
{
    if !(spacing > 0.0) {
        return Err(GeomError::Validation(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    const SEED_PIECES: usize = 64;
    let mut out = vec![r(lo)?];
    let mut stack = Vec::with_capacity(SEED_PIECES);
    for i in (1..=SEED_PIECES).rev() {
        let ti = lo + (hi - lo) * i as f64 / SEED_PIECES as f64;
        stack.push((ti, r(ti)?));
    }
    let (mut t, mut x) = (lo, out[0]);
    while let Some(&(t1, x1)) = stack.last() {
        let d = sub(x1, x);
        if dot(d, d).sqrt() <= spacing || t1 - t <= f64::EPSILON * t.abs().max(1.0) {
            out.push(x1);
            (t, x) = (t1, x1);
            stack.pop();
        } else {
            let mid = 0.5 * (t + t1);
            stack.push((mid, r(mid)?));
        }
    }
    Ok(out)
}

/// Points along the polyline at arc-length spacing at most `spacing`,
/// always including the original vertices.
pub fn resample_polyline(points: &[[f64; 3]], spacing: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        let d = sub(w[1], w[0]);
        let len = dot(d, d).sqrt();
        let pieces = ((len / spacing).ceil() as usize).max(1);
        for j in 0..pieces {
            let t = j as f64 / pieces as f64;
            out.push([w[0][0] + t * d[0], w[0][1] + t * d[1], w[0][2] + t * d[2]]);
        }
    }
    out.extend(points.last());
    out
}

/// Distance from `x` to the nearest point of the polyline.
pub fn polyline_distance(x: [f64; 3], polyline: &[[f64; 3]]) -> f64 {
    match polyline {
        [] => f64::INFINITY,
        [only] => dot(sub(x, *only), sub(x, *only)).sqrt(),
        _ => polyline
            .windows(2)
            .map(|w| {
                let d = sub(w[1], w[0]);
                let dd = dot(d, d);
                let t = if dd == 0.0 {
                    0.0
                } else {
                    (dot(sub(x, w[0]), d) / dd).clamp(0.0, 1.0)
                };
                let foot = [w[0][0] + t * d[0], w[0][1] + t * d[1], w[0][2] + t * d[2]];
                dot(sub(x, foot), sub(x, foot)).sqrt()
            })
            .fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha_profile::solve_alpha;
    use crate::warped_metric::Interval;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sphere(omega0: f64) -> AlphaProfile {
        solve_alpha(
            FieldParams::new(-1.0, omega0),
            FRAC_PI_2,
            FRAC_PI_2,
            Interval::new(0.0, PI),
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn meridian_for_a_zero() {
        let prof = solve_alpha(FieldParams::new(0.0, 0.0), 0.0, 1.0, Interval::new(-1.0, 1.0), 1e-10).unwrap();
        let tr = integrate_trajectory(&prof, prof.params(), Point2::new(0.0, 0.3), 0.5, 1e-3).unwrap();
        let end = tr.samples.last().unwrap();
        assert!((end.u - 0.5).abs() < 1e-12 && end.v == 0.3);
    }

    #[test]
    fn sphere_lines_are_conserved() {
        let prof = sphere(0.0);
        let tr = integrate_trajectory(&prof, prof.params(), Point2::new(1.0, 2.0), 5.0, 1e-3).unwrap();
        let c0 = (0.5f64).tan() * (2.0f64).sin();
        for s in &tr.samples {
            assert!(((0.5 * s.u).tan() * s.v.sin() - c0).abs() < 1e-6);
        }
    }

    #[test]
    fn first_integral_cases() {
        let fi = first_integral_at(FieldParams::new(-1.0, PI), 1.2, 0.7).unwrap();
        assert_eq!(fi.case, FirstIntegralCase::Generic);
        assert!((fi.value - (0.6f64).tan() * (0.7f64).sin()).abs() < 1e-15);
        let fi = first_integral_at(FieldParams::new(-2.0, 0.3), 2.0, 0.1).unwrap();
        assert_eq!(fi.case, FirstIntegralCase::AMinus2);
        let t = (1.0f64).tan();
        assert!((fi.value - t * (0.1f64).sin() * (-0.5 * t * t).exp()).abs() < 1e-15);
        assert!(matches!(
            first_integral_at(FieldParams::new(0.0, PI), 1.0, 0.0),
            Err(GeomError::DegenerateField(_))
        ));
        // base −0.5 + 1.5 tan²(0.25) < 0 with exponent 1/3
        assert!(matches!(
            first_integral_at(FieldParams::new(-0.5, 0.0), 0.5, 0.0),
            Err(GeomError::Branch { .. })
        ));
        // exponent −1 at a = −1.5 is an integer power
        assert!(first_integral_at(FieldParams::new(-1.5, 0.0), 0.5, 0.2).is_ok());
    }

    #[test]
    fn intrinsic_zero_at_k_zero() {
        let inv = FrameInvariants {
            k: 0.0,
            kappa: 0.8,
            lambda: 0.8,
            omega: 0.0,
            mu: 0.0,
            sigma: 0.0,
        };
        assert_eq!(
            intrinsic_relation_residual(&inv, 0.0, FieldParams::new(-0.5, 0.0), 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn xi_k_vanishes_on_sphere_and_axes() {
        let prof = sphere(0.3);
        assert_eq!(xi_k(&prof, prof.params(), Point2::new(1.0, 0.4)).unwrap(), 0.0);
        let prof = solve_alpha(FieldParams::new(-0.5, 0.0), 0.0, 1.3, Interval::new(-0.5, 0.5), 1e-10).unwrap();
        assert!(xi_k(&prof, prof.params(), Point2::new(0.1, 0.0)).unwrap().abs() < 1e-16);
    }

    #[test]
    fn sphere_circle_examples() {
        assert_eq!(sphere_circle(0.7, 0.0).unwrap(), [0.0, 0.0, -1.0]);
        let r = sphere_circle(1.0, FRAC_PI_2).unwrap();
        assert!(r[0].abs() < 1e-16 && (r[1] - 1.0).abs() < 1e-16 && r[2].abs() < 1e-16);
        assert!(matches!(sphere_circle(0.0, PI), Err(GeomError::Parameterization(_))));
    }

    #[test]
    fn stereographic_examples() {
        let (rho, phi) = stereographic(Point2::new(FRAC_PI_2, 0.0)).unwrap();
        assert!((rho - 1.0).abs() < 1e-15 && phi == 0.0);
        assert_eq!(stereographic(Point2::new(0.0, 1.3)).unwrap(), (0.0, 1.3));
        assert!(stereographic(Point2::new(PI, 0.0)).is_err());
    }

    #[test]
    fn plane_fit_recovers_circle_plane() {
        let pts: Vec<[f64; 3]> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                [t.cos(), t.sin(), 0.5 * t.cos() + 0.25]
            })
            .collect();
        let fit = fit_plane(&pts).unwrap();
        assert!(fit.max_residual < 1e-12);
        assert!((fit.distance([0.0, 0.0, 0.25])).abs() < 1e-12);
    }

    #[test]
    fn polyline_distance_basics() {
        let line = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        assert!((polyline_distance([0.5, 0.3, 0.0], &line) - 0.3).abs() < 1e-15);
        assert_eq!(resample_polyline(&line, 0.25).len(), 5);
        let arc = sample_curve(|t| Ok([t.cos(), t.sin(), 0.0]), 0.0, PI, 1e-2).unwrap();
        assert!(arc.windows(2).all(|w| polyline_distance(w[1], &[w[0]]) <= 1e-2));
        assert!(polyline_distance([0.0, 1.0, 0.0], &arc) < 2e-5);
    }
}
