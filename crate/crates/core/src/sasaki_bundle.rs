//! The unit tangent bundle `T₁M` in coordinates `(u, v, θ)` with the Sasaki
//! metric `g̃ = du² + f² dv² + (dθ + f′ dv)²`.
//!
//! A unit field is a section `ξ: M → T₁M`, `(u, v) ↦ (u, v, θ(u, v))`. This
//! module gives an oracle for total geodesy of that graph that does not use the
//! moving frame: shoot `g̃`-geodesics tangent to the graph and watch whether they
//! leave it, or difference the embedding and project onto the unit normal.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alpha_profile::{alpha_rhs, AlphaCurve, AlphaProfile};
use crate::csv;
use crate::error::{GeomError, Result};
use crate::frame_field::UnitField;
use crate::ode::rk4_fixed;
use crate::warped_metric::{Differentiation, Point2, Tangent2, WarpedMetric};

pub type Mat3 = [[f64; 3]; 3];
pub type Mat2 = [[f64; 2]; 2];
/// `Γ̃^k_ij` indexed `[k][i][j]`.
pub type Christoffel3 = [[[f64; 3]; 3]; 3];

/// A unit tangent vector `cos θ ∂u + (sin θ/f) ∂v` at `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SasakiPoint {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
}

impl SasakiPoint {
    pub fn new(u: f64, v: f64, theta: f64) -> Self {
        Self { u, v, theta }
    }

    pub fn base(&self) -> Point2 {
        Point2::new(self.u, self.v)
    }
}

/// Sasaki metric over a warped base.
#[derive(Debug, Clone)]
pub struct SasakiMetric {
    base: WarpedMetric,
}

impl SasakiMetric {
    pub fn new(base: WarpedMetric) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &WarpedMetric {
        &self.base
    }

    /// `[[1,0,0],[0,f²+f′²,f′],[0,f′,1]]` in the `(du, dv, dθ)` basis.
    pub fn components(&self, u: f64) -> Result<Mat3> {
        let f = self.base.f(u)?;
        let fp = self.base.f_prime(u)?;
        Ok([[1.0, 0.0, 0.0], [0.0, f * f + fp * fp, fp], [0.0, fp, 1.0]])
    }

    pub fn inverse(&self, u: f64) -> Result<Mat3> {
        let f = self.base.f(u)?;
        let fp = self.base.f_prime(u)?;
        let f2 = f * f;
        Ok([
            [1.0, 0.0, 0.0],
            [0.0, 1.0 / f2, -fp / f2],
            [0.0, -fp / f2, (f2 + fp * fp) / f2],
        ])
    }

    pub fn inner(&self, u: f64, x: [f64; 3], y: [f64; 3]) -> Result<f64> {
        let g = self.components(u)?;
        Ok(quad3(&g, &x, &y))
    }

    /// Christoffel symbols of `g̃`; only `∂u` of the components is nonzero.
    pub fn christoffel(&self, u: f64) -> Result<Christoffel3> {
        let f = self.base.f(u)?;
        let fp = self.base.f_prime(u)?;
        let fpp = self.base.f_second(u)?;
        let ginv = self.inverse(u)?;
        let mut du_g = [[0.0; 3]; 3];
        du_g[1][1] = 2.0 * fp * (f + fpp);
        du_g[1][2] = fpp;
        du_g[2][1] = fpp;
        let dg = |l: usize, i: usize, j: usize| if l == 0 { du_g[i][j] } else { 0.0 };
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for (k, row) in gamma.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    row[i][j] = 0.5
                        * (0..3)
                            .map(|l| ginv[k][l] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j)))
                            .sum::<f64>();
                }
            }
        }
        Ok(gamma)
    }
}

fn quad3(g: &Mat3, x: &[f64; 3], y: &[f64; 3]) -> f64 {
    (0..3).map(|i| (0..3).map(|j| g[i][j] * x[i] * y[j]).sum::<f64>()).sum()
}

pub fn sasaki_components(sm: &SasakiMetric, q: SasakiPoint) -> Result<Mat3> {
    sm.components(q.u)
}

/// `(u, v, θ(u, v))`, with no reduction of the angle.
pub fn imbed(field: &UnitField, p: Point2) -> SasakiPoint {
    SasakiPoint::new(p.u, p.v, field.theta(p))
}

/// Pushforward of a base vector through the graph embedding.
pub fn lift(field: &UnitField, p: Point2, x: [f64; 2], diff: Differentiation) -> Result<[f64; 3]> {
    let [tu, tv] = field.gradient(p, diff)?;
    Ok([x[0], x[1], tu * x[0] + tv * x[1]])
}

/// Pullback of `g̃` to the graph, in the `(du, dv)` basis.
pub fn induced_metric(sm: &SasakiMetric, field: &UnitField, p: Point2, diff: Differentiation) -> Result<Mat2> {
    let g = sm.components(p.u)?;
    let fu = lift(field, p, [1.0, 0.0], diff)?;
    let fv = lift(field, p, [0.0, 1.0], diff)?;
    let off = quad3(&g, &fu, &fv);
    Ok([[quad3(&g, &fu, &fu), off], [off, quad3(&g, &fv, &fv)]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleSample {
    pub t: f64,
    pub point: SasakiPoint,
    pub velocity: [f64; 3],
}

/// Output of [`geodesic_shoot`].
#[derive(Debug, Clone)]
pub struct BundlePath {
    pub samples: Vec<BundleSample>,
    /// Set when the path left the base domain before the requested length.
    pub truncated: bool,
}

impl BundlePath {
    /// Signed angle gap to the graph of `field` at every sample.
    pub fn deviations(&self, field: &UnitField) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| angle_gap(s.point.theta, field.theta(s.point.base())))
            .collect()
    }

    /// CSV with columns `t,u,v,theta,deviation`.
    pub fn to_csv(&self, field: &UnitField) -> String {
        let rows = self
            .samples
            .iter()
            .zip(self.deviations(field))
            .map(|(s, d)| [s.t, s.point.u, s.point.v, s.point.theta, d]);
        csv::render(&["t", "u", "v", "theta", "deviation"], rows)
    }
}

/// `a − b` reduced to the representative nearest zero.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - TAU * (d / TAU).round()
}

/// Fixed-step RK4 geodesic of `g̃` from `q` with `g̃`-unit velocity `w`.
pub fn geodesic_shoot(sm: &SasakiMetric, q: SasakiPoint, w: [f64; 3], length: f64, step: f64) -> Result<BundlePath> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(GeomError::Validation(format!("step must be positive, got {step}")));
    }
    let norm = sm.inner(q.u, w, w)?.sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(GeomError::Validation(format!(
            "initial velocity has Sasaki norm {norm} instead of 1"
        )));
    }
    let domain = sm.base.domain();
    let rhs = |_t: f64, y: &[f64; 6]| -> [f64; 6] {
        let vel = [y[3], y[4], y[5]];
        let Ok(gamma) = sm.christoffel(y[0]) else {
            return [f64::NAN; 6];
        };
        let mut acc = [0.0; 3];
        for (k, a) in acc.iter_mut().enumerate() {
            *a = -quad3(&gamma[k], &vel, &vel);
        }
        [vel[0], vel[1], vel[2], acc[0], acc[1], acc[2]]
    };
    let run = rk4_fixed(rhs, [q.u, q.v, q.theta, w[0], w[1], w[2]], length, step, |y| {
        domain.contains(y[0])
    });
    let samples = run
        .samples
        .into_iter()
        .map(|(t, y)| BundleSample {
            t,
            point: SasakiPoint::new(y[0], y[1], y[2]),
            velocity: [y[3], y[4], y[5]],
        })
        .collect();
    Ok(BundlePath {
        samples,
        truncated: run.truncated,
    })
}

/// Largest angle gap between the path and the graph of `field`.
pub fn surface_deviation(path: &BundlePath, field: &UnitField) -> f64 {
    path.deviations(field).into_iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// `n` `g̃`-unit vectors tangent to the graph at `p`, at directions drawn
/// uniformly from the base unit circle by a ChaCha8 stream seeded with `seed`.
pub fn random_graph_tangents(
    sm: &SasakiMetric,
    field: &UnitField,
    p: Point2,
    n: usize,
    seed: u64,
    diff: Differentiation,
) -> Result<Vec<[f64; 3]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = sm.base.f(p.u)?;
    (0..n)
        .map(|_| {
            let phi = rng.random_range(0.0..TAU);
            let w = lift(field, p, [phi.cos(), phi.sin() / f], diff)?;
            let norm = sm.inner(p.u, w, w)?.sqrt();
            Ok(w.map(|x| x / norm))
        })
        .collect()
}

/// Second fundamental form of the graph in the coordinate basis
/// `(∂u, ∂v)` pushed forward, against the `g̃`-unit normal with positive
/// `dθ`-component. Derivatives of the embedding are central differences at
/// steps `h` and `2h` combined by Richardson extrapolation.
pub fn numeric_sff(sm: &SasakiMetric, field: &UnitField, p: Point2, h: f64) -> Result<Mat2> {
    if !(h > 0.0) {
        return Err(GeomError::Validation(format!("step must be positive, got {h}")));
    }
    let dom = sm.base.domain();
    if !dom.contains(p.u - 2.0 * h) || !dom.contains(p.u + 2.0 * h) {
        return Err(GeomError::Domain {
            u: p.u,
            lo: dom.lo + 2.0 * h,
            hi: dom.hi - 2.0 * h,
        });
    }
    let t = |du: f64, dv: f64| field.theta(Point2::new(p.u + du, p.v + dv));
    let t0 = t(0.0, 0.0);
    let first = |s: f64| {
        [
            (t(s, 0.0) - t(-s, 0.0)) / (2.0 * s),
            (t(0.0, s) - t(0.0, -s)) / (2.0 * s),
        ]
    };
    let second = |s: f64| {
        [
            (t(s, 0.0) - 2.0 * t0 + t(-s, 0.0)) / (s * s),
            (t(s, s) - t(s, -s) - t(-s, s) + t(-s, -s)) / (4.0 * s * s),
            (t(0.0, s) - 2.0 * t0 + t(0.0, -s)) / (s * s),
        ]
    };
    let richardson = |fine: f64, coarse: f64| (4.0 * fine - coarse) / 3.0;
    let (g1h, g12h) = (first(h), first(2.0 * h));
    let grad = [richardson(g1h[0], g12h[0]), richardson(g1h[1], g12h[1])];
    let (s1h, s12h) = (second(h), second(2.0 * h));
    let hess = [
        richardson(s1h[0], s12h[0]),
        richardson(s1h[1], s12h[1]),
        richardson(s1h[2], s12h[2]),
    ];

    let tangents = [[1.0, 0.0, grad[0]], [0.0, 1.0, grad[1]]];
    let seconds = [
        [[0.0, 0.0, hess[0]], [0.0, 0.0, hess[1]]],
        [[0.0, 0.0, hess[1]], [0.0, 0.0, hess[2]]],
    ];
    let normal = [-grad[0], -grad[1], 1.0];
    let ginv = sm.inverse(p.u)?;
    let norm = quad3(&ginv, &normal, &normal).sqrt();
    let raised_theta: f64 = (0..3).map(|l| ginv[2][l] * normal[l]).sum();
    let sign = if raised_theta < 0.0 { -1.0 } else { 1.0 };
    let gamma = sm.christoffel(p.u)?;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let accel: Vec<f64> = (0..3)
                .map(|k| seconds[i][j][k] + quad3(&gamma[k], &tangents[i], &tangents[j]))
                .collect();
            out[i][j] = sign * (0..3).map(|k| normal[k] * accel[k]).sum::<f64>() / norm;
        }
    }
    Ok(out)
}

/// Rewrites a bilinear form given in the coordinate basis in another basis
/// whose vectors have coordinate components `b[0]`, `b[1]`.
pub fn change_basis(m: Mat2, b: [[f64; 2]; 2]) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (0..2)
                .map(|r| (0..2).map(|s| m[r][s] * b[i][r] * b[j][s]).sum::<f64>())
                .sum();
        }
    }
    out
}

/// [`numeric_sff`] evaluated on the lifts of two base vectors, each scaled to
/// `g̃`-unit length. With the frame `(e₀, e₁)` of a unit field this is the
/// orthonormal frame of the graph in which the closed-form matrix is written.
pub fn numeric_sff_in_frame(
    sm: &SasakiMetric,
    field: &UnitField,
    p: Point2,
    h: f64,
    basis: [Tangent2; 2],
    diff: Differentiation,
) -> Result<Mat2> {
    let m = numeric_sff(sm, field, p, h)?;
    let mut b = [[0.0; 2]; 2];
    for (row, x) in b.iter_mut().zip(basis) {
        let lifted = lift(field, p, [x.a_u, x.a_v], diff)?;
        let norm = sm.inner(p.u, lifted, lifted)?.sqrt();
        *row = [x.a_u / norm, x.a_v / norm];
    }
    Ok(change_basis(m, b))
}

/// Gaussian curvature of the graph's induced metric,
/// `K̃ = ¼ K (K − 2 cot(α/2) dK/dα)` with `K = 1 − (a+1)/cos α`.
pub fn induced_curvature(profile: &AlphaProfile, u: f64) -> Result<f64> {
    let a = profile.params().a;
    induced_curvature_at(a, profile.alpha(u)?)
}

/// [`induced_curvature`] as a function of `α` directly.
pub fn induced_curvature_at(a: f64, alpha: f64) -> Result<f64> {
    let half = 0.5 * alpha;
    if half.sin().abs() < 1e-300 {
        return Err(GeomError::Pole {
            what: "cot(alpha/2)",
            at: alpha,
        });
    }
    let k = alpha_rhs(a, alpha)?;
    let c = alpha.cos();
    let dk = if a + 1.0 == 0.0 {
        0.0
    } else {
        -(a + 1.0) * alpha.sin() / (c * c)
    };
    Ok(0.25 * k * (k - 2.0 * dk * half.cos() / half.sin()))
}
