//! Unit vector fields, their moving frame, and the second fundamental form of
//! the field's graph in the unit tangent bundle.
//!
//! A unit field is encoded by its angle `θ(u, v)` against `∂u`:
//! `ξ = cos θ ∂u + (sin θ / f) ∂v`. Its companion `η = sin θ ∂u − (cos θ / f) ∂v`
//! is `ξ` turned by `−π/2`. From `∇_ξ ξ = k η` and `∇_η η = ϰ ξ` one builds
//! `λ = √(k² + ϰ²)`, `ω = atan2(k, ϰ)` and the frame
//!
//! ```text
//! e₀ = (ϰ ξ + k η)/λ,   e₁ = (k ξ − ϰ η)/λ,
//! ```
//!
//! in which `∇_{e₀} ξ = 0`. With `∇_{e₀} e₀ = μ e₁` and `∇_{e₁} e₁ = σ e₀` the
//! second fundamental form of `ξ(M) ⊂ T₁M` is
//!
//! ```text
//!     ⎡ −μ λ/√(1+λ²)                         ½(σλ + (1−λ²)/(1+λ²) e₀(λ)) ⎤
//! Ω = ⎣ ½(σλ + (1−λ²)/(1+λ²) e₀(λ))          e₁(λ/√(1+λ²))              ⎦
//! ```

use std::sync::Arc;

use serde::Serialize;

use crate::alpha_profile::AlphaProfile;
use crate::error::{GeomError, Result};
use crate::warped_metric::{Differentiation, Interval, Point2, Tangent2, VectorField, WarpedMetric};

pub type AngleFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
/// Returns `[θ_uu, θ_uv, θ_vv]`.
pub type HessianFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

/// Unit vector field given by its angle against `∂u`.
#[derive(Clone)]
pub struct UnitField {
    theta: AngleFn,
    gradient: Option<GradientFn>,
    hessian: Option<HessianFn>,
}

impl std::fmt::Debug for UnitField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitField")
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl UnitField {
    pub fn new(theta: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            theta: Arc::new(theta),
            gradient: None,
            hessian: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    /// `θ = a·v + ω₀`.
    pub fn rotating(a: f64, omega0: f64) -> Self {
        Self::new(move |_u, v| a * v + omega0)
            .with_gradient(move |_, _| [0.0, a])
            .with_hessian(|_, _| [0.0; 3])
    }

    pub fn constant(theta0: f64) -> Self {
        Self::rotating(0.0, theta0)
    }

    /// Adds `ε·sin v` to the angle, keeping closed-form derivatives where present.
    pub fn plus_sin_v(self, eps: f64) -> Self {
        let UnitField {
            theta,
            gradient,
            hessian,
        } = self;
        UnitField {
            theta: Arc::new(move |u, v| theta(u, v) + eps * v.sin()),
            gradient: gradient.map(|g| -> GradientFn {
                Arc::new(move |u, v| {
                    let [gu, gv] = g(u, v);
                    [gu, gv + eps * v.cos()]
                })
            }),
            hessian: hessian.map(|h| -> HessianFn {
                Arc::new(move |u, v| {
                    let [huu, huv, hvv] = h(u, v);
                    [huu, huv, hvv - eps * v.sin()]
                })
            }),
        }
    }

    /// Drops closed-form derivatives so every derivative is taken numerically.
    pub fn without_derivatives(&self) -> Self {
        Self {
            theta: self.theta.clone(),
            gradient: None,
            hessian: None,
        }
    }

    pub fn theta(&self, p: Point2) -> f64 {
        (self.theta)(p.u, p.v)
    }

    pub fn gradient(&self, p: Point2, diff: Differentiation) -> Result<[f64; 2]> {
        match diff {
            Differentiation::Analytic => self
                .gradient
                .as_ref()
                .map(|g| g(p.u, p.v))
                .ok_or_else(|| GeomError::DerivativeUnavailable("field angle has no closed-form gradient".into())),
            Differentiation::FiniteDifference { step } => {
                let hu = step * p.u.abs().max(1.0);
                let hv = step * p.v.abs().max(1.0);
                let t = &self.theta;
                Ok([
                    (t(p.u + hu, p.v) - t(p.u - hu, p.v)) / (2.0 * hu),
                    (t(p.u, p.v + hv) - t(p.u, p.v - hv)) / (2.0 * hv),
                ])
            }
        }
    }

    pub fn hessian(&self, p: Point2, diff: Differentiation) -> Result<[f64; 3]> {
        match diff {
            Differentiation::Analytic => self
                .hessian
                .as_ref()
                .map(|h| h(p.u, p.v))
                .ok_or_else(|| GeomError::DerivativeUnavailable("field angle has no closed-form Hessian".into())),
            Differentiation::FiniteDifference { step } => {
                let hu = 10.0 * step * p.u.abs().max(1.0);
                let hv = 10.0 * step * p.v.abs().max(1.0);
                let t = &self.theta;
                let (u, v) = (p.u, p.v);
                let c = t(u, v);
                Ok([
                    (t(u + hu, v) - 2.0 * c + t(u - hu, v)) / (hu * hu),
                    (t(u + hu, v + hv) - t(u + hu, v - hv) - t(u - hu, v + hv) + t(u - hu, v - hv)) / (4.0 * hu * hv),
                    (t(u, v + hv) - 2.0 * c + t(u, v - hv)) / (hv * hv),
                ])
            }
        }
    }

    /// `ξ` at `p` in coordinates.
    pub fn vector(&self, metric: &WarpedMetric, p: Point2) -> Result<Tangent2> {
        angle_vector(self.theta(p), metric.f(p.u)?)
    }

    /// `η = ξ` turned by `−π/2`.
    pub fn normal(&self, metric: &WarpedMetric, p: Point2) -> Result<Tangent2> {
        angle_vector(self.theta(p) - std::f64::consts::FRAC_PI_2, metric.f(p.u)?)
    }
}

fn angle_vector(phi: f64, f: f64) -> Result<Tangent2> {
    if f == 0.0 {
        return Err(GeomError::Validation(
            "unit field undefined where the warp factor vanishes".into(),
        ));
    }
    Ok(Tangent2::new(phi.cos(), phi.sin() / f))
}

/// Jacobian of `(cos φ, sin φ / f)` given `∇φ`, `f` and `f′`.
fn angle_jacobian(phi: f64, grad: [f64; 2], f: f64, fp: f64) -> [[f64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [
        [-s * grad[0], -s * grad[1]],
        [c * grad[0] / f - s * fp / (f * f), c * grad[1] / f],
    ]
}

impl VectorField for UnitField {
    fn at(&self, metric: &WarpedMetric, p: Point2) -> Result<Tangent2> {
        self.vector(metric, p)
    }

    fn jacobian(&self, metric: &WarpedMetric, p: Point2) -> Option<Result<[[f64; 2]; 2]>> {
        let g = self.gradient.as_ref()?;
        Some((|| {
            Ok(angle_jacobian(
                self.theta(p),
                g(p.u, p.v),
                metric.f(p.u)?,
                metric.f_prime(p.u)?,
            ))
        })())
    }
}

/// `η` as a vector field.
struct Companion<'a>(&'a UnitField);

impl VectorField for Companion<'_> {
    fn at(&self, metric: &WarpedMetric, p: Point2) -> Result<Tangent2> {
        self.0.normal(metric, p)
    }

    fn jacobian(&self, metric: &WarpedMetric, p: Point2) -> Option<Result<[[f64; 2]; 2]>> {
        let g = self.0.gradient.as_ref()?;
        let phi = self.0.theta(p) - std::f64::consts::FRAC_PI_2;
        Some((|| {
            Ok(angle_jacobian(phi, g(p.u, p.v), metric.f(p.u)?, metric.f_prime(p.u)?))
        })())
    }
}

/// Which member of the adapted frame.
#[derive(Clone, Copy, PartialEq, Eq)]
enum FrameMember {
    E0,
    E1,
}

/// `e₀` or `e₁` as a vector field over the surface.
struct FrameVectorField<'a> {
    field: &'a UnitField,
    member: FrameMember,
    opts: FrameOptions,
}

impl VectorField for FrameVectorField<'_> {
    fn at(&self, metric: &WarpedMetric, p: Point2) -> Result<Tangent2> {
        let basic = basic_frame(metric, self.field, p, self.opts.inner())?;
        Ok(match self.member {
            FrameMember::E0 => basic.e0,
            FrameMember::E1 => basic.e1,
        })
    }

    fn jacobian(&self, metric: &WarpedMetric, p: Point2) -> Option<Result<[[f64; 2]; 2]>> {
        if self.opts.diff != Differentiation::Analytic {
            return None;
        }
        Some((|| {
            let c = Connection::analytic(metric, self.field, p)?;
            let lambda2 = c.p * c.p + c.q * c.q;
            // e₀ has angle atan2(P, −Q); e₁ = e₀ turned by +π/2
            let phi0 = c.p.atan2(-c.q);
            let grad = [
                (-c.q * c.dp[0] + c.p * c.dq[0]) / lambda2,
                (-c.q * c.dp[1] + c.p * c.dq[1]) / lambda2,
            ];
            let phi = match self.member {
                FrameMember::E0 => phi0,
                FrameMember::E1 => phi0 + std::f64::consts::FRAC_PI_2,
            };
            Ok(angle_jacobian(phi, grad, c.f, c.fp))
        })())
    }
}

/// Components of the connection form `dθ + f′ dv` in the orthonormal coframe,
/// `P = θ_u`, `Q = (θ_v + f′)/f`, with closed-form gradients.
struct Connection {
    p: f64,
    q: f64,
    dp: [f64; 2],
    dq: [f64; 2],
    f: f64,
    fp: f64,
}

impl Connection {
    fn analytic(metric: &WarpedMetric, field: &UnitField, pt: Point2) -> Result<Self> {
        let [tu, tv] = field.gradient(pt, Differentiation::Analytic)?;
        let [tuu, tuv, tvv] = field.hessian(pt, Differentiation::Analytic)?;
        let f = metric.f(pt.u)?;
        let fp = metric.f_prime(pt.u)?;
        let fpp = metric.f_second(pt.u)?;
        let q = (tv + fp) / f;
        Ok(Self {
            p: tu,
            q,
            dp: [tuu, tuv],
            dq: [(tuv + fpp) / f - q * fp / f, tvv / f],
            f,
            fp,
        })
    }
}

/// Options shared by the frame computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    pub diff: Differentiation,
    /// Points with `λ ≤ eps_lambda` are rejected as stationary.
    pub eps_lambda: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self {
            diff: Differentiation::Analytic,
            eps_lambda: 1e-6,
        }
    }
}

impl FrameOptions {
    pub fn finite_difference() -> Self {
        Self {
            diff: Differentiation::finite_difference(),
            ..Self::default()
        }
    }

    /// Options for frame quantities that are themselves differenced again.
    fn inner(self) -> Self {
        match self.diff {
            Differentiation::Analytic => self,
            Differentiation::FiniteDifference { step } => Self {
                diff: Differentiation::FiniteDifference {
                    step: (step * INNER_STEP_RATIO).min(INNER_STEP_MAX),
                },
                ..self
            },
        }
    }
}

const INNER_STEP_RATIO: f64 = 100.0;
const INNER_STEP_MAX: f64 = 1e-2;

struct BasicFrame {
    xi: Tangent2,
    eta: Tangent2,
    e0: Tangent2,
    e1: Tangent2,
    k: f64,
    kappa: f64,
    lambda: f64,
    omega: f64,
}

fn basic_frame(metric: &WarpedMetric, field: &UnitField, p: Point2, opts: FrameOptions) -> Result<BasicFrame> {
    let xi = field.vector(metric, p)?;
    let eta = field.normal(metric, p)?;
    let d_xi = metric.covariant_derivative(field, xi, p, opts.diff)?;
    let d_eta = metric.covariant_derivative(&Companion(field), eta, p, opts.diff)?;
    let k = metric.inner(p, d_xi, eta)?;
    let kappa = metric.inner(p, d_eta, xi)?;
    let lambda = k.hypot(kappa);
    if !(lambda > opts.eps_lambda) {
        return Err(GeomError::StationaryPoint { u: p.u, v: p.v, lambda });
    }
    let e0 = xi.scale(kappa / lambda).add(eta.scale(k / lambda));
    let e1 = xi.scale(k / lambda).sub(eta.scale(kappa / lambda));
    Ok(BasicFrame {
        xi,
        eta,
        e0,
        e1,
        k,
        kappa,
        lambda,
        omega: k.atan2(kappa),
    })
}

/// Moving-frame invariants of a unit field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameInvariants {
    /// Signed geodesic curvature of the `ξ`-trajectories.
    pub k: f64,
    /// Signed geodesic curvature of the `η`-trajectories.
    pub kappa: f64,
    pub lambda: f64,
    /// Angle from `e₀` to `ξ`.
    pub omega: f64,
    /// Geodesic curvature of the `e₀`-curves.
    pub mu: f64,
    /// Geodesic curvature of the `e₁`-curves.
    pub sigma: f64,
}

/// The frame vectors in coordinates, alongside the invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub xi: Tangent2,
    pub eta: Tangent2,
    pub e0: Tangent2,
    pub e1: Tangent2,
}

pub fn frame_invariants(
    metric: &WarpedMetric,
    field: &UnitField,
    p: Point2,
    opts: FrameOptions,
) -> Result<FrameInvariants> {
    Ok(frame_at(metric, field, p, opts)?.0)
}

pub fn frame_at(
    metric: &WarpedMetric,
    field: &UnitField,
    p: Point2,
    opts: FrameOptions,
) -> Result<(FrameInvariants, Frame)> {
    let b = basic_frame(metric, field, p, opts)?;
    let e0_field = FrameVectorField {
        field,
        member: FrameMember::E0,
        opts,
    };
    let e1_field = FrameVectorField {
        field,
        member: FrameMember::E1,
        opts,
    };
    let d_e0 = metric.covariant_derivative(&e0_field, b.e0, p, opts.diff)?;
    let d_e1 = metric.covariant_derivative(&e1_field, b.e1, p, opts.diff)?;
    let inv = FrameInvariants {
        k: b.k,
        kappa: b.kappa,
        lambda: b.lambda,
        omega: b.omega,
        mu: metric.inner(p, d_e0, b.e1)?,
        sigma: metric.inner(p, d_e1, b.e0)?,
    };
    Ok((
        inv,
        Frame {
            xi: b.xi,
            eta: b.eta,
            e0: b.e0,
            e1: b.e1,
        },
    ))
}

/// Symmetric 2×2 matrix in the `(e₀, e₁)` frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sff {
    pub m00: f64,
    pub m01: f64,
    pub m11: f64,
}

impl Sff {
    pub fn max_abs(&self) -> f64 {
        self.m00.abs().max(self.m01.abs()).max(self.m11.abs())
    }

    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.m00, self.m01], [self.m01, self.m11]]
    }

    pub fn frobenius(&self) -> f64 {
        (self.m00 * self.m00 + 2.0 * self.m01 * self.m01 + self.m11 * self.m11).sqrt()
    }
}

/// Everything computed at one point for the closed-form second fundamental form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SffPoint {
    pub invariants: FrameInvariants,
    pub frame: Frame,
    /// `e₀(λ)`
    pub e0_lambda: f64,
    /// `e₁(λ)`
    pub e1_lambda: f64,
    pub sff: Sff,
}

/// `λ` only, for finite differences along the frame.
fn lambda_at(metric: &WarpedMetric, field: &UnitField, p: Point2, opts: FrameOptions) -> Result<f64> {
    Ok(basic_frame(metric, field, p, opts.inner())?.lambda)
}

pub fn second_fundamental_form(metric: &WarpedMetric, field: &UnitField, p: Point2, opts: FrameOptions) -> Result<Sff> {
    Ok(sff_point(metric, field, p, opts)?.sff)
}

pub fn sff_point(metric: &WarpedMetric, field: &UnitField, p: Point2, opts: FrameOptions) -> Result<SffPoint> {
    let (inv, frame) = frame_at(metric, field, p, opts)?;
    let (e0_lambda, e1_lambda) = match opts.diff {
        Differentiation::Analytic => {
            let c = Connection::analytic(metric, field, p)?;
            let lambda = c.p.hypot(c.q);
            let grad = [
                (c.p * c.dp[0] + c.q * c.dq[0]) / lambda,
                (c.p * c.dp[1] + c.q * c.dq[1]) / lambda,
            ];
            let along = |x: Tangent2| grad[0] * x.a_u + grad[1] * x.a_v;
            (along(frame.e0), along(frame.e1))
        }
        Differentiation::FiniteDifference { step } => {
            let along = |x: Tangent2| -> Result<f64> {
                let plus = lambda_at(metric, field, p.offset(x, step), opts)?;
                let minus = lambda_at(metric, field, p.offset(x, -step), opts)?;
                Ok((plus - minus) / (2.0 * step))
            };
            (along(frame.e0)?, along(frame.e1)?)
        }
    };
    let l = inv.lambda;
    let l2 = l * l;
    let root = (1.0 + l2).sqrt();
    let m01 = 0.5 * (inv.sigma * l + (1.0 - l2) / (1.0 + l2) * e0_lambda);
    let sff = Sff {
        m00: -inv.mu * l / root,
        m01,
        // e₁(λ/√(1+λ²)) = e₁(λ)/(1+λ²)^{3/2}
        m11: e1_lambda / (root * root * root),
    };
    Ok(SffPoint {
        invariants: inv,
        frame,
        e0_lambda,
        e1_lambda,
        sff,
    })
}

/// The totally geodesic candidate `θ = a·v + ω₀` for a solved profile.
pub fn tg_field(profile: &AlphaProfile) -> UnitField {
    let p = profile.params();
    UnitField::rotating(p.a, p.omega0)
}

/// Evenly spaced `n_u × n_v` lattice including the interval endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub u: Interval,
    pub v: Interval,
    pub n_u: usize,
    pub n_v: usize,
}

impl Grid {
    pub fn new(u: Interval, v: Interval, n_u: usize, n_v: usize) -> Self {
        Self { u, v, n_u, n_v }
    }

    pub fn points(&self) -> Vec<Point2> {
        let vs = self.v.linspace(self.n_v);
        self.u
            .linspace(self.n_u)
            .into_iter()
            .flat_map(|u| vs.iter().map(move |&v| Point2::new(u, v)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSample {
    pub point: Point2,
    pub sff: Sff,
}

/// Sup-norm of `Ω` over a lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub argmax: [f64; 2],
    pub grid: [usize; 2],
}

impl ResidualReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// `Ω` at every lattice point, in `u`-major order.
pub fn evaluate_grid(
    metric: &WarpedMetric,
    field: &UnitField,
    grid: &Grid,
    opts: FrameOptions,
) -> Result<Vec<GridSample>> {
    if grid.n_u == 0 || grid.n_v == 0 {
        return Err(GeomError::Validation(format!(
            "empty lattice {} x {}",
            grid.n_u, grid.n_v
        )));
    }
    grid.points()
        .into_iter()
        .map(|point| {
            Ok(GridSample {
                point,
                sff: second_fundamental_form(metric, field, point, opts)?,
            })
        })
        .collect()
}

pub fn tg_residual(
    metric: &WarpedMetric,
    field: &UnitField,
    grid: &Grid,
    opts: FrameOptions,
) -> Result<ResidualReport> {
    Ok(summarize(&evaluate_grid(metric, field, grid, opts)?, grid))
}

pub fn summarize(samples: &[GridSample], grid: &Grid) -> ResidualReport {
    let mut report = ResidualReport {
        max_abs: 0.0,
        argmax: [f64::NAN; 2],
        grid: [grid.n_u, grid.n_v],
    };
    for s in samples {
        let m = s.sff.max_abs();
        if m > report.max_abs || report.argmax[0].is_nan() {
            report.max_abs = m;
            report.argmax = [s.point.u, s.point.v];
        }
    }
    report
}
