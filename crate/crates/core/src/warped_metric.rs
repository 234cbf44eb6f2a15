//! Surface metrics of the form `ds² = du² + f(u)² dv²`.
//!
//! Meridians are the `u`-curves, parallels the `v`-curves. Everything here is
//! exact Levi-Civita geometry of that family: Christoffel symbols, Gaussian
//! curvature, covariant derivatives of vector fields and fixed-step geodesics.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::ode::rk4_fixed;

/// Shared scalar function of one variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default relative step for finite-difference fallbacks.
pub const FD_STEP: f64 = 1e-5;

/// Closed interval `[lo, hi]` used for metric domains and validity ranges.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo: lo.min(hi),
            hi: lo.max(hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// The sub-interval obtained by trimming `margin` from both ends.
    pub fn shrink(&self, margin: f64) -> Self {
        Self::new(self.lo + margin, self.hi - margin)
    }

    /// `n` evenly spaced points including both endpoints (`n == 1` gives the midpoint).
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (self.lo + self.hi)],
            _ => {
                let h = self.len() / (n - 1) as f64;
                (0..n)
                    .map(|i| if i + 1 == n { self.hi } else { self.lo + i as f64 * h })
                    .collect()
            }
        }
    }
}

/// A point `(u, v)` in semi-geodesic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point2 {
    pub u: f64,
    pub v: f64,
}

impl Point2 {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// `self + t · x` in coordinates.
    pub fn offset(&self, x: Tangent2, t: f64) -> Self {
        Self {
            u: self.u + t * x.a_u,
            v: self.v + t * x.a_v,
        }
    }
}

/// Tangent vector in the coordinate frame `(∂u, ∂v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Tangent2 {
    pub a_u: f64,
    pub a_v: f64,
}

impl Tangent2 {
    pub const ZERO: Tangent2 = Tangent2 { a_u: 0.0, a_v: 0.0 };

    pub fn new(a_u: f64, a_v: f64) -> Self {
        Self { a_u, a_v }
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            a_u: s * self.a_u,
            a_v: s * self.a_v,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: Tangent2) -> Self {
        Self {
            a_u: self.a_u + o.a_u,
            a_v: self.a_v + o.a_v,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: Tangent2) -> Self {
        Self {
            a_u: self.a_u - o.a_u,
            a_v: self.a_v - o.a_v,
        }
    }

    fn max_abs(&self) -> f64 {
        self.a_u.abs().max(self.a_v.abs())
    }
}

/// Nonzero Christoffel symbols of a warped metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    /// `Γ^u_vv = −f f′`
    pub u_vv: f64,
    /// `Γ^v_uv = f′/f`
    pub v_uv: f64,
    /// `Γ^v_vu`, equal to `v_uv`
    pub v_vu: f64,
}

/// How derivatives of fields are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Differentiation {
    /// Use caller-supplied closed forms; missing ones are an error.
    Analytic,
    /// Fourth-order central differences with the given base step.
    FiniteDifference { step: f64 },
}

impl Differentiation {
    pub fn finite_difference() -> Self {
        Differentiation::FiniteDifference { step: FD_STEP }
    }
}

/// A smooth vector field on the surface.
pub trait VectorField {
    /// Coordinate components at `p`.
    fn at(&self, metric: &WarpedMetric, p: Point2) -> Result<Tangent2>;

    /// Closed-form Jacobian `[[∂u X^u, ∂v X^u], [∂u X^v, ∂v X^v]]`, if known.
    fn jacobian(&self, _metric: &WarpedMetric, _p: Point2) -> Option<Result<[[f64; 2]; 2]>> {
        None
    }
}

/// `ds² = du² + f(u)² dv²` on a closed `u`-interval.
#[derive(Clone)]
pub struct WarpedMetric {
    f: ScalarFn,
    f_prime: Option<ScalarFn>,
    f_second: Option<ScalarFn>,
    domain: Interval,
}

impl fmt::Debug for WarpedMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedMetric")
            .field("domain", &self.domain)
            .field("analytic_f_prime", &self.f_prime.is_some())
            .field("analytic_f_second", &self.f_second.is_some())
            .finish()
    }
}

impl WarpedMetric {
    /// Metric with only `f` known; derivatives fall back to central differences.
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, domain: Interval) -> Self {
        Self {
            f: Arc::new(f),
            f_prime: None,
            f_second: None,
            domain,
        }
    }

    pub fn with_derivatives(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
    ) -> Self {
        Self {
            f: Arc::new(f),
            f_prime: Some(Arc::new(f_prime)),
            f_second: Some(Arc::new(f_second)),
            domain,
        }
    }

    /// Flat cylinder, `f ≡ 1`.
    pub fn flat(domain: Interval) -> Self {
        Self::with_derivatives(|_| 1.0, |_| 0.0, |_| 0.0, domain)
    }

    /// Unit sphere in geodesic polar coordinates, `f = sin u` on `[0, π]`.
    pub fn unit_sphere() -> Self {
        Self::with_derivatives(
            f64::sin,
            f64::cos,
            |u| -u.sin(),
            Interval::new(0.0, std::f64::consts::PI),
        )
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.f_prime.is_some() && self.f_second.is_some()
    }

    pub fn check(&self, u: f64) -> Result<()> {
        if self.domain.contains(u) {
            Ok(())
        } else {
            Err(GeomError::Domain {
                u,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    pub fn f(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok((self.f)(u))
    }

    fn fd_step(&self, u: f64, base: f64) -> Result<f64> {
        let h = base * u.abs().max(1.0);
        if !self.domain.contains(u - h) || !self.domain.contains(u + h) {
            return Err(GeomError::DerivativeUnavailable(format!(
                "finite difference around u = {u} leaves the domain"
            )));
        }
        Ok(h)
    }

    pub fn f_prime(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        match &self.f_prime {
            Some(fp) => Ok(fp(u)),
            None => {
                let h = self.fd_step(u, FD_STEP)?;
                Ok(((self.f)(u + h) - (self.f)(u - h)) / (2.0 * h))
            }
        }
    }

    pub fn f_second(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        match &self.f_second {
            Some(fpp) => Ok(fpp(u)),
            None => {
                // second differences need a larger step to keep rounding at ~1e-8
                let h = self.fd_step(u, 10.0 * FD_STEP)?;
                Ok(((self.f)(u + h) - 2.0 * (self.f)(u) + (self.f)(u - h)) / (h * h))
            }
        }
    }

    pub fn christoffel(&self, u: f64) -> Result<Christoffel> {
        let f = self.f(u)?;
        if f == 0.0 {
            return Err(GeomError::SingularParallel { u });
        }
        let fp = self.f_prime(u)?;
        Ok(Christoffel {
            u_vv: -f * fp,
            v_uv: fp / f,
            v_vu: fp / f,
        })
    }

    /// `K = −f″/f`.
    pub fn gauss_curvature(&self, u: f64) -> Result<f64> {
        let f = self.f(u)?;
        if f == 0.0 {
            return Err(GeomError::SingularParallel { u });
        }
        Ok(-self.f_second(u)? / f)
    }

    pub fn inner(&self, p: Point2, x: Tangent2, y: Tangent2) -> Result<f64> {
        let f = self.f(p.u)?;
        Ok(x.a_u * y.a_u + f * f * x.a_v * y.a_v)
    }

    pub fn norm_sq(&self, p: Point2, x: Tangent2) -> Result<f64> {
        self.inner(p, x, x)
    }

    /// `∇_X Y` at `p`, expanded in `(∂u, ∂v)`.
    pub fn covariant_derivative(
        &self,
        field: &dyn VectorField,
        direction: Tangent2,
        p: Point2,
        diff: Differentiation,
    ) -> Result<Tangent2> {
        let y = field.at(self, p)?;
        let g = self.christoffel(p.u)?;
        let dir_deriv = match diff {
            Differentiation::Analytic => {
                let j = field
                    .jacobian(self, p)
                    .ok_or_else(|| GeomError::DerivativeUnavailable("field has no closed-form Jacobian".into()))??;
                Tangent2::new(
                    j[0][0] * direction.a_u + j[0][1] * direction.a_v,
                    j[1][0] * direction.a_u + j[1][1] * direction.a_v,
                )
            }
            Differentiation::FiniteDifference { step } => {
                let size = direction.max_abs();
                if size == 0.0 {
                    Tangent2::ZERO
                } else {
                    let t = step * p.u.abs().max(1.0) / size;
                    let far = [p.offset(direction, 2.0 * t), p.offset(direction, -2.0 * t)];
                    if far.iter().any(|q| !self.domain.contains(q.u)) {
                        return Err(GeomError::DerivativeUnavailable(format!(
                            "finite difference around ({}, {}) leaves the domain",
                            p.u, p.v
                        )));
                    }
                    let at = |s: f64| field.at(self, p.offset(direction, s * t));
                    let near = at(1.0)?.sub(at(-1.0)?);
                    let wide = at(2.0)?.sub(at(-2.0)?);
                    near.scale(8.0).sub(wide).scale(1.0 / (12.0 * t))
                }
            }
        };
        Ok(Tangent2::new(
            dir_deriv.a_u + g.u_vv * direction.a_v * y.a_v,
            dir_deriv.a_v + g.v_uv * direction.a_u * y.a_v + g.v_vu * direction.a_v * y.a_u,
        ))
    }

    /// Fixed-step RK4 geodesic from `p` with unit initial velocity `x`.
    pub fn geodesic_integrate_2d(&self, p: Point2, x: Tangent2, length: f64, step: f64) -> Result<GeodesicPath> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(GeomError::Validation(format!("step must be positive, got {step}")));
        }
        let n2 = self.norm_sq(p, x)?;
        if (n2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(GeomError::Validation(format!(
                "initial velocity has norm {} instead of 1",
                n2.sqrt()
            )));
        }
        let domain = self.domain;
        let rhs = |_s: f64, y: &[f64; 4]| -> [f64; 4] {
            let (u, du, dv) = (y[0], y[2], y[3]);
            let f = (self.f)(u);
            let fp = match &self.f_prime {
                Some(fp) => fp(u),
                None => self.f_prime(u).unwrap_or(f64::NAN),
            };
            // u'' = −Γ^u_vv v'², v'' = −2 Γ^v_uv u' v'
            [du, dv, f * fp * dv * dv, -2.0 * fp / f * du * dv]
        };
        let run = rk4_fixed(rhs, [p.u, p.v, x.a_u, x.a_v], length, step, |y| domain.contains(y[0]));
        let samples = run
            .samples
            .into_iter()
            .map(|(s, y)| GeodesicSample {
                s,
                point: Point2::new(y[0], y[1]),
                velocity: Tangent2::new(y[2], y[3]),
            })
            .collect();
        Ok(GeodesicPath {
            samples,
            truncated: run.truncated,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSample {
    pub s: f64,
    pub point: Point2,
    pub velocity: Tangent2,
}

/// Output of [`WarpedMetric::geodesic_integrate_2d`].
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    /// Set when the path left the metric domain before the requested length.
    pub truncated: bool,
}

impl GeodesicPath {
    pub fn end(&self) -> Point2 {
        self.samples.last().expect("path holds its start").point
    }
}
