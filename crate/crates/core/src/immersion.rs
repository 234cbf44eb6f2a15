//! Surfaces of revolution realizing the profile metrics in Euclidean space.
//!
//! In the parameter `α` the metric reads
//! `ds² = (cos α/(a+1−cos α))² dα² + sin²α dv²`. It is realized by revolving the
//! meridian `x(α) = sin α`, `z(α) = ∫ cos t/(a+1−cos t)·√(1−(a+1−cos t)²) dt`
//! about the `z`-axis, which needs `|a+1−cos α| ≤ 1`. That leaves a nonempty
//! range of `cos α` only for `|a+1| < 1`.

use std::cell::RefCell;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::csv;
use crate::error::{GeomError, Result};
use crate::quadrature::adaptive_simpson;
use crate::warped_metric::Interval;

/// Required distance (in `cos α`) from the ends of the admissible range.
pub const ENDPOINT_MARGIN: f64 = 1e-6;
/// Finite-difference step used by [`revolve_and_check`].
pub const CHECK_STEP: f64 = 1e-5;
/// Samples with `|cos α|` below this are left out of the curvature residual:
/// the meridian has zero speed there and `K` has a pole.
pub const CUSP_MARGIN: f64 = 1e-3;

fn is_sphere(a: f64) -> bool {
    a + 1.0 == 0.0
}

/// Open interval of `cos α` on which the immersion exists.
pub fn admissible_range(a: f64) -> Result<Interval> {
    if !a.is_finite() {
        return Err(GeomError::Validation(format!("a must be finite, got {a}")));
    }
    let m = a + 1.0;
    if m.abs() >= 1.0 {
        return Err(GeomError::NonExistence(format!(
            "|a+1| = {} >= 1: no isometric immersion as a surface of revolution",
            m.abs()
        )));
    }
    Ok(if is_sphere(a) {
        Interval::new(-1.0, 1.0)
    } else if m < 0.0 {
        Interval::new(m, (m + 1.0).min(1.0))
    } else {
        Interval::new(a.max(-1.0), m)
    })
}

/// The admissible range as an interval of `α ∈ (0, π)`.
pub fn admissible_alpha_range(a: f64) -> Result<Interval> {
    let c = admissible_range(a)?;
    Ok(Interval::new(c.hi.acos(), c.lo.acos()))
}

/// `z′(α)`, or an error where the radicand is negative.
pub fn meridian_slope(a: f64, alpha: f64) -> Result<f64> {
    let c = alpha.cos();
    if is_sphere(a) {
        return Ok(-alpha.sin());
    }
    let d = a + 1.0 - c;
    let radicand = 1.0 - d * d;
    if radicand < 0.0 {
        return Err(GeomError::Numeric(format!(
            "complex integrand at alpha = {alpha}: radicand {radicand}"
        )));
    }
    Ok(c / d * radicand.sqrt())
}

/// `(cos α/(a+1−cos α))²`, the `dα²` coefficient of the metric.
pub fn metric_e(a: f64, alpha: f64) -> f64 {
    let c = alpha.cos();
    let r = c / (a + 1.0 - c);
    r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevolutionSample {
    pub alpha: f64,
    pub x: f64,
    pub z: f64,
    pub z_prime: f64,
}

/// Sampled meridian of the surface of revolution.
#[derive(Debug, Clone, Serialize)]
pub struct RevolutionProfile {
    pub a: f64,
    /// From the first to the last sample (may be decreasing in `α`).
    pub alpha_range: Interval,
    pub samples: Vec<RevolutionSample>,
    pub quadrature_tol: f64,
}

impl RevolutionProfile {
    /// `max |x′² + z′² − E(α)|` over the samples, with `x′ = cos α`.
    pub fn speed_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.alpha.cos().powi(2) + s.z_prime * s.z_prime - metric_e(self.a, s.alpha)).abs())
            .fold(0.0, f64::max)
    }

    /// `z` at an arbitrary `α`, integrating from the nearest sample.
    pub fn z_at(&self, alpha: f64) -> Result<f64> {
        let nearest = self
            .samples
            .iter()
            .min_by(|p, q| (p.alpha - alpha).abs().total_cmp(&(q.alpha - alpha).abs()))
            .expect("profiles hold at least two samples");
        Ok(nearest.z + integrate(self.a, nearest.alpha, alpha, self.quadrature_tol)?)
    }

    /// CSV with columns `alpha,x,z`.
    pub fn to_csv(&self) -> String {
        csv::render(&["alpha", "x", "z"], self.samples.iter().map(|s| [s.alpha, s.x, s.z]))
    }
}

fn integrate(a: f64, from: f64, to: f64, tol: f64) -> Result<f64> {
    if is_sphere(a) {
        return Ok(to.cos() - from.cos());
    }
    let failure = RefCell::new(None);
    let value = adaptive_simpson(
        |t| {
            meridian_slope(a, t).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        },
        from,
        to,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => value,
    }
}

/// Samples `x(α) = sin α` and `z(α) = ∫_{α₀}^{α} z′` at `n` evenly spaced
/// points from `alpha0` to `alpha1`.
pub fn immersion_profile(a: f64, alpha0: f64, alpha1: f64, n: usize, tol: f64) -> Result<RevolutionProfile> {
    if n < 2 {
        return Err(GeomError::Validation(format!("need at least 2 samples, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(GeomError::Validation(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    let range = admissible_range(a)?;
    for alpha in [alpha0, alpha1] {
        let c = alpha.cos();
        let inside = c > range.lo + ENDPOINT_MARGIN && c < range.hi - ENDPOINT_MARGIN;
        if !inside || !(alpha > 0.0 && alpha < std::f64::consts::PI) {
            return Err(GeomError::Validation(format!(
                "alpha = {alpha} (cos = {c}) is not inside the admissible range ({}, {}) with margin {ENDPOINT_MARGIN}",
                range.lo, range.hi
            )));
        }
    }
    // cos α is monotone on (0, π), so both ends inside means every sample is
    let per_piece = tol / (n - 1) as f64;
    let mut samples = Vec::with_capacity(n);
    let mut z = if is_sphere(a) { alpha0.cos() } else { 0.0 };
    let mut prev = alpha0;
    for i in 0..n {
        let alpha = alpha0 + (alpha1 - alpha0) * i as f64 / (n - 1) as f64;
        z += integrate(a, prev, alpha, per_piece)?;
        prev = alpha;
        samples.push(RevolutionSample {
            alpha,
            x: alpha.sin(),
            z,
            z_prime: meridian_slope(a, alpha)?,
        });
    }
    Ok(RevolutionProfile {
        a,
        alpha_range: Interval::new(alpha0, alpha1),
        samples,
        quadrature_tol: tol,
    })
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices, counterclockwise seen from outside.
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Wavefront-style text: `v x y z` lines, then one-based `f i j k` lines.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!(
                "v {} {} {}\n",
                csv::fmt17(v[0]),
                csv::fmt17(v[1]),
                csv::fmt17(v[2])
            ));
        }
        for t in &self.triangles {
            out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        out
    }
}

/// Surface plus the residuals of the realization checks.
#[derive(Debug, Clone)]
pub struct RevolutionCheck {
    pub mesh: Mesh,
    /// Largest deviation of the finite-difference first fundamental form from
    /// `(E, F, G) = ((cos α/(a+1−cos α))², 0, sin²α)`.
    pub metric_residual: f64,
    /// Largest `|K_num − K|/max(1, |K|)` with `K = 1 − (a+1)/cos α`, over
    /// samples with `|cos α| ≥` [`CUSP_MARGIN`].
    pub curvature_residual: f64,
}

fn surface_point(x: f64, z: f64, v: f64) -> [f64; 3] {
    [x * v.cos(), x * v.sin(), z]
}

/// Revolves the meridian through a full turn with `n_v` points per parallel and
/// checks the metric and curvature at every interior sample.
pub fn revolve_and_check(profile: &RevolutionProfile, n_v: usize) -> Result<RevolutionCheck> {
    if n_v < 3 {
        return Err(GeomError::Validation(format!(
            "need at least 3 points per parallel, got {n_v}"
        )));
    }
    let vs: Vec<f64> = (0..n_v).map(|j| TAU * j as f64 / n_v as f64).collect();
    let vertices: Vec<[f64; 3]> = profile
        .samples
        .iter()
        .flat_map(|s| vs.iter().map(move |&v| surface_point(s.x, s.z, v)))
        .collect();
    let mut triangles = Vec::with_capacity(2 * n_v * (profile.samples.len() - 1));
    for i in 0..profile.samples.len() - 1 {
        for j in 0..n_v {
            let jn = (j + 1) % n_v;
            let (p, q, r, s) = (i * n_v + j, (i + 1) * n_v + j, (i + 1) * n_v + jn, i * n_v + jn);
            for tri in [[p, q, r], [p, r, s]] {
                triangles.push(outward(&vertices, tri));
            }
        }
    }

    let a = profile.a;
    let h = CHECK_STEP;
    let interior = &profile.samples[1..profile.samples.len() - 1];
    let mut metric_residual: f64 = 0.0;
    let mut curvature_residual: f64 = 0.0;
    for s in interior {
        let (zm, zp) = (profile.z_at(s.alpha - h)?, profile.z_at(s.alpha + h)?);
        for &v in vs.iter().take(4) {
            let x_a = sub(
                surface_point((s.alpha + h).sin(), zp, v),
                surface_point((s.alpha - h).sin(), zm, v),
            );
            let x_a = x_a.map(|c| c / (2.0 * h));
            let x_v = sub(surface_point(s.x, s.z, v + h), surface_point(s.x, s.z, v - h)).map(|c| c / (2.0 * h));
            let (e, f, g) = (dot(x_a, x_a), dot(x_a, x_v), dot(x_v, x_v));
            let err = (e - metric_e(a, s.alpha)).abs().max(f.abs()).max((g - s.x * s.x).abs());
            metric_residual = metric_residual.max(err);
        }
        let c = s.alpha.cos();
        if c.abs() < CUSP_MARGIN {
            continue;
        }
        let k_num = meridian_curvature(a, s.alpha, h)?;
        let k = 1.0 - (a + 1.0) / c;
        curvature_residual = curvature_residual.max((k_num - k).abs() / k.abs().max(1.0));
    }
    Ok(RevolutionCheck {
        mesh: Mesh { vertices, triangles },
        metric_residual,
        curvature_residual,
    })
}

/// Gaussian curvature of the surface of revolution of `(x, z)` at `α`:
/// `K = z′(x′z″ − x″z′) / (x (x′² + z′²)²)`, with `z″` from a fourth-order
/// central difference of the slope.
fn meridian_curvature(a: f64, alpha: f64, h: f64) -> Result<f64> {
    let (x, x1, x2) = (alpha.sin(), alpha.cos(), -alpha.sin());
    let z1 = meridian_slope(a, alpha)?;
    let slope = |t: f64| meridian_slope(a, t);
    let z2 = (8.0 * (slope(alpha + h)? - slope(alpha - h)?) - (slope(alpha + 2.0 * h)? - slope(alpha - 2.0 * h)?))
        / (12.0 * h);
    let speed2 = x1 * x1 + z1 * z1;
    Ok(z1 * (x1 * z2 - x2 * z1) / (x * speed2 * speed2))
}

fn sub(p: [f64; 3], q: [f64; 3]) -> [f64; 3] {
    [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
}

fn dot(p: [f64; 3], q: [f64; 3]) -> f64 {
    p[0] * q[0] + p[1] * q[1] + p[2] * q[2]
}

fn cross(p: [f64; 3], q: [f64; 3]) -> [f64; 3] {
    [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ]
}

/// Orders the triangle so its normal points away from the axis.
fn outward(vertices: &[[f64; 3]], [i, j, k]: [usize; 3]) -> [usize; 3] {
    let (p, q, r) = (vertices[i], vertices[j], vertices[k]);
    let n = cross(sub(q, p), sub(r, p));
    let centroid = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0, 0.0];
    if dot(n, centroid) < 0.0 {
        [i, k, j]
    } else {
        [i, j, k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn ranges() {
        let r = admissible_range(-0.5).unwrap();
        assert!((r.lo + 0.5).abs() < 1e-15 && (r.hi - 0.5).abs() < 1e-15);
        let al = admissible_alpha_range(-0.5).unwrap();
        assert!((al.lo - FRAC_PI_3).abs() < 1e-15 && (al.hi - 2.0 * FRAC_PI_3).abs() < 1e-15);
        let r = admissible_range(-1.5).unwrap();
        assert!((r.lo + 0.5).abs() < 1e-15 && (r.hi - 0.5).abs() < 1e-15);
        assert!(matches!(admissible_range(0.5), Err(GeomError::NonExistence(_))));
        assert!(matches!(admissible_range(-2.0), Err(GeomError::NonExistence(_))));
        assert_eq!(admissible_range(-1.0).unwrap(), Interval::new(-1.0, 1.0));
    }

    #[test]
    fn empty_integral() {
        let p = immersion_profile(-0.5, 1.3, 1.3, 5, 1e-10).unwrap();
        assert!(p.samples.iter().all(|s| s.z == 0.0));
    }

    #[test]
    fn radicand_positive_for_a_minus_three_halves() {
        for i in 0..=600 {
            let t = 1.2 + 0.6 * i as f64 / 600.0;
            let d = -0.5 - t.cos();
            assert!(1.0 - d * d > 0.0);
        }
        let p = immersion_profile(-1.5, 1.2, 1.8, 50, 1e-10).unwrap();
        assert!(p.speed_residual() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(immersion_profile(-0.5, 1.0, 1.8, 10, 1e-10).is_err());
        assert!(immersion_profile(-0.5, 1.2, 1.8, 1, 1e-10).is_err());
    }

    #[test]
    fn sphere_is_round() {
        let p = immersion_profile(-1.0, 0.5, 2.5, 20, 1e-10).unwrap();
        for s in &p.samples {
            assert!((s.x * s.x + s.z * s.z - 1.0).abs() < 1e-14);
        }
        let check = revolve_and_check(&p, 12).unwrap();
        assert!(check.metric_residual < 1e-8);
        assert!(check.curvature_residual < 1e-4);
    }

    #[test]
    fn mesh_faces_point_outward() {
        let p = immersion_profile(-0.5, 1.2, 1.4, 4, 1e-10).unwrap();
        let check = revolve_and_check(&p, 6).unwrap();
        assert_eq!(check.mesh.vertices.len(), 24);
        assert_eq!(check.mesh.triangles.len(), 36);
        let obj = check.mesh.to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 24);
        assert!(obj.lines().any(|l| l == "f 1 7 8" || l == "f 1 8 7"));
        assert!(revolve_and_check(&p, 2).is_err());
    }
}
