//! The pipelines behind each subcommand.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use tgfield_core::frame_field::{evaluate_grid, summarize};
use tgfield_core::immersion::{immersion_profile, revolve_and_check};
use tgfield_core::sasaki_bundle::random_graph_tangents;
use tgfield_core::trajectories::{fit_plane, sample_curve, sphere_point, Trajectory};
use tgfield_core::{
    csv, geodesic_shoot, imbed, integrate_trajectory, intrinsic_relation_residual, solve_alpha, sphere_circle,
    stereographic, xi_k, AlphaProfile, Differentiation, FieldParams, FrameInvariants, FrameOptions, GeomError, Grid,
    Interval, Point2, SasakiMetric, UnitField,
};

use crate::config::{Command, RunConfig};

/// Constants of the circles drawn by `sphere-demo`.
pub const SPHERE_DEMO_CONSTANTS: [f64; 8] = [-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0];

/// Result of a successful pipeline.
#[derive(Debug)]
pub struct Outcome {
    /// Single-line JSON written to standard output.
    pub summary: Value,
    /// Some computation stopped at a singularity before the requested span.
    pub truncated: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.output_dir.display()))?;
    let mut out = Artifacts {
        dir: &cfg.output_dir,
        files: Vec::new(),
    };
    let (mut summary, truncated) = match cfg.command {
        Command::SolveAlpha => solve(cfg, &mut out)?,
        Command::VerifyTg => verify(cfg, &mut out)?,
        Command::Shoot => shoot(cfg, &mut out)?,
        Command::Trace => trace(cfg, &mut out)?,
        Command::SphereDemo => sphere_demo(cfg, &mut out)?,
        Command::Immerse => immerse(cfg, &mut out)?,
    };
    summary["command"] = json!(cfg.command.to_string());
    summary["config"] = serde_json::to_value(cfg)?;
    summary["files"] = json!(out.files);
    summary["truncated"] = json!(truncated);
    Ok(Outcome { summary, truncated })
}

struct Artifacts<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(path.display().to_string());
        Ok(())
    }
}

fn params(cfg: &RunConfig) -> FieldParams {
    FieldParams::new(cfg.a, cfg.omega0)
}

fn profile(cfg: &RunConfig) -> Result<AlphaProfile> {
    Ok(solve_alpha(
        params(cfg),
        cfg.u0,
        cfg.alpha0,
        Interval::new(cfg.u_span[0], cfg.u_span[1]),
        cfg.tol,
    )?)
}

/// `θ = (a + δa)·v + ω₀ + ε sin v`, without closed-form derivatives in
/// finite-difference mode.
fn field(cfg: &RunConfig) -> UnitField {
    let mut f = UnitField::rotating(cfg.a + cfg.perturb_a, cfg.omega0);
    if cfg.perturb_sin != 0.0 {
        f = f.plus_sin_v(cfg.perturb_sin);
    }
    if cfg.fd {
        f.without_derivatives()
    } else {
        f
    }
}

fn mode(cfg: &RunConfig) -> (&'static str, FrameOptions) {
    if cfg.fd {
        ("finite-difference", FrameOptions::finite_difference())
    } else {
        ("analytic", FrameOptions::default())
    }
}

/// Whether a curve that left the profile's validity interval at `u` did so
/// through a side where a guard stopped the profile, as opposed to the end of
/// the requested span.
fn left_through_singularity(profile: &AlphaProfile, u: f64) -> bool {
    let (v, t) = (profile.validity(), profile.truncation());
    if u - v.lo < v.hi - u {
        t.lower.is_some()
    } else {
        t.upper.is_some()
    }
}

fn truncation_json(profile: &AlphaProfile) -> Value {
    let t = profile.truncation();
    let name = |g: Option<tgfield_core::Guard>| g.map(|g| g.to_string());
    json!({ "lower": name(t.lower), "upper": name(t.upper) })
}

fn solve(cfg: &RunConfig, out: &mut Artifacts) -> Result<(Value, bool)> {
    let profile = profile(cfg)?;
    let metric = profile.metric();
    let m = cfg.a + 1.0;
    let (mut curvature, mut conserved) = (0.0f64, 0.0f64);
    for s in profile.samples() {
        let k = metric.gauss_curvature(s.u)?;
        curvature = curvature.max((s.alpha_prime - k).abs());
        conserved = conserved.max((s.alpha.cos() * (1.0 - k) - m).abs());
    }
    out.write("alpha_profile.csv", &profile.to_csv()?)?;
    let v = profile.validity();
    let summary = json!({
        "validity": [v.lo, v.hi],
        "samples": profile.samples().len(),
        "stopped_by": truncation_json(&profile),
        "max_curvature_residual": curvature,
        "max_conserved_residual": conserved,
    });
    Ok((summary, profile.is_truncated()))
}

fn verify(cfg: &RunConfig, out: &mut Artifacts) -> Result<(Value, bool)> {
    let profile = profile(cfg)?;
    let validity = profile.validity();
    let (u_range, truncated) = match cfg.grid_u {
        None => (validity.shrink(0.05 * validity.len()), false),
        Some([lo, hi]) => {
            let clipped = Interval::new(lo.max(validity.lo), hi.min(validity.hi));
            (clipped, clipped.lo > lo || clipped.hi < hi)
        }
    };
    if u_range.is_empty() {
        return Err(GeomError::Domain {
            u: u_range.lo,
            lo: validity.lo,
            hi: validity.hi,
        }
        .into());
    }
    let grid = Grid::new(u_range, Interval::new(cfg.grid_v[0], cfg.grid_v[1]), cfg.n_u, cfg.n_v);
    let (mode_name, opts) = mode(cfg);
    let samples = evaluate_grid(&profile.metric(), &field(cfg), &grid, opts)?;
    let rows = samples
        .iter()
        .map(|s| [s.point.u, s.point.v, s.sff.m00, s.sff.m01, s.sff.m11, s.sff.max_abs()]);
    out.write(
        "tg_residual.csv",
        &csv::render(&["u", "v", "omega00", "omega01", "omega11", "max_abs"], rows),
    )?;
    let report = summarize(&samples, &grid);
    let summary = json!({
        "mode": mode_name,
        "grid_u": [u_range.lo, u_range.hi],
        "max_abs": report.max_abs,
        "argmax": report.argmax,
        "grid": report.grid,
    });
    Ok((summary, truncated))
}

fn shoot(cfg: &RunConfig, out: &mut Artifacts) -> Result<(Value, bool)> {
    let profile = profile(cfg)?;
    let validity = profile.validity();
    let p = Point2::new(cfg.base_u.unwrap_or(0.5 * (validity.lo + validity.hi)), cfg.base_v);
    let sm = SasakiMetric::new(profile.metric());
    let f = field(cfg);
    let diff = if cfg.fd {
        Differentiation::finite_difference()
    } else {
        Differentiation::Analytic
    };
    let tangents = random_graph_tangents(&sm, &f, p, cfg.shots, cfg.seed, diff)?;
    let mut rows = Vec::new();
    let mut per_shot = Vec::with_capacity(tangents.len());
    let (mut left, mut truncated) = (0usize, 0usize);
    for (i, w) in tangents.into_iter().enumerate() {
        let path = geodesic_shoot(&sm, imbed(&f, p), w, cfg.length, cfg.step)?;
        if path.truncated {
            left += 1;
            let last = path.samples.last().expect("paths hold their start");
            truncated += usize::from(left_through_singularity(&profile, last.point.u));
        }
        let deviations = path.deviations(&f);
        per_shot.push(deviations.iter().fold(0.0f64, |m, d| m.max(d.abs())));
        for (s, d) in path.samples.iter().zip(deviations) {
            rows.push([i as f64, s.t, s.point.u, s.point.v, s.point.theta, d]);
        }
    }
    out.write(
        "shots.csv",
        &csv::render(&["shot", "t", "u", "v", "theta", "deviation"], rows),
    )?;
    let summary = json!({
        "base_point": [p.u, p.v],
        "shots": per_shot.len(),
        "seed": cfg.seed,
        "max_deviation": per_shot.iter().copied().fold(0.0, f64::max),
        "min_shot_deviation": per_shot.iter().copied().fold(f64::INFINITY, f64::min),
        "shots_leaving_profile": left,
    });
    Ok((summary, truncated > 0))
}

/// Largest `|ξ(k) − dk/ds|` with `dk/ds` from five-point central differences.
fn xi_k_residual(traj: &Trajectory, table: &[[f64; 7]], h: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 2..table.len().saturating_sub(2) {
        let dk = (table[i - 2][4] - 8.0 * table[i - 1][4] + 8.0 * table[i + 1][4] - table[i + 2][4]) / (12.0 * h);
        let expected = xi_k(&traj.profile, traj.params, traj.samples[i].point())?;
        worst = worst.max((expected - dk).abs());
    }
    Ok(worst)
}

fn trace(cfg: &RunConfig, out: &mut Artifacts) -> Result<(Value, bool)> {
    let profile = profile(cfg)?;
    let traj = integrate_trajectory(
        &profile,
        params(cfg),
        Point2::new(cfg.start[0], cfg.start[1]),
        cfg.length,
        cfg.step,
    )?;
    let table = traj.table()?;
    out.write("trajectory.csv", &traj.to_csv()?)?;
    let c0 = table[0][6];
    let (drift, intrinsic) = if c0.is_nan() {
        (None, None)
    } else {
        let scale = if c0 == 0.0 { 1.0 } else { c0.abs() };
        let mut drift = 0.0f64;
        let mut intrinsic = 0.0f64;
        for row in &table {
            drift = drift.max((row[6] - c0).abs() / scale);
            let inv = FrameInvariants {
                k: row[4],
                kappa: row[5],
                lambda: row[4].hypot(row[5]),
                omega: 0.0,
                mu: 0.0,
                sigma: 0.0,
            };
            intrinsic = intrinsic.max(intrinsic_relation_residual(&inv, c0, params(cfg), row[2])?);
        }
        (Some(drift), Some(intrinsic))
    };
    let summary = json!({
        "start": cfg.start,
        "length": traj.length(),
        "samples": table.len(),
        "first_integral": if c0.is_nan() { Value::Null } else { json!(c0) },
        "max_relative_drift": drift,
        "max_intrinsic_residual": intrinsic,
        "max_xi_k_residual": xi_k_residual(&traj, &table, cfg.step)?,
        "left_profile": traj.truncated,
    });
    let last = traj.samples.last().expect("trajectories hold their start");
    Ok((summary, traj.truncated && left_through_singularity(&profile, last.u)))
}

/// The trajectory through `start` followed in both directions, ordered by arc length.
fn both_ways(
    profile: &AlphaProfile,
    p: FieldParams,
    start: Point2,
    length: f64,
    step: f64,
) -> Result<(Vec<(f64, Point2)>, bool)> {
    let back = integrate_trajectory(profile, p, start, -length, step)?;
    let fwd = integrate_trajectory(profile, p, start, length, step)?;
    let mut pts: Vec<(f64, Point2)> = back.samples.iter().rev().map(|s| (s.s, s.point())).collect();
    pts.extend(fwd.samples.iter().skip(1).map(|s| (s.s, s.point())));
    Ok((pts, back.truncated || fwd.truncated))
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Distance from `x` to the circle on the unit sphere cut by the plane
/// through three of its points.
fn circle_distance(x: [f64; 3], on_circle: [[f64; 3]; 3]) -> f64 {
    let (d1, d2) = (sub(on_circle[1], on_circle[0]), sub(on_circle[2], on_circle[0]));
    let n = [
        d1[1] * d2[2] - d1[2] * d2[1],
        d1[2] * d2[0] - d1[0] * d2[2],
        d1[0] * d2[1] - d1[1] * d2[0],
    ];
    let len = dot(n, n).sqrt();
    let n = n.map(|c| c / len);
    let offset = dot(n, on_circle[0]);
    let radius = (1.0 - offset * offset).max(0.0).sqrt();
    let height = dot(n, x) - offset;
    // the circle's center is offset·n, and x minus its normal part sits in the plane through it
    let in_plane = sub(x, n.map(|c| c * dot(n, x)));
    (height * height + (dot(in_plane, in_plane).sqrt() - radius).powi(2)).sqrt()
}

/// `a = −1`, `ω₀ = π`: the trajectories are the circles through the south
/// pole, and stereographically the lines `ρ sin φ = c`. Curves run until the
/// profile's `|sin α|` guard near the poles; that end is geometric and does
/// not count as a truncation.
fn sphere_demo(cfg: &RunConfig, out: &mut Artifacts) -> Result<(Value, bool)> {
    let p = FieldParams::new(-1.0, PI);
    let profile = solve_alpha(p, FRAC_PI_2, FRAC_PI_2, Interval::new(0.0, PI), cfg.tol)?;
    let mut rows = Vec::new();
    let mut circle_rows = Vec::new();
    let (mut plane, mut pole, mut circle, mut stereo) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for c in SPHERE_DEMO_CONSTANTS {
        let start = Point2::new(2.0 * c.abs().atan(), FRAC_PI_2.copysign(c));
        let (pts, _) = both_ways(&profile, p, start, cfg.length, cfg.step)?;
        let reference = [
            sphere_circle(c, PI / 4.0)?,
            sphere_circle(c, FRAC_PI_2)?,
            sphere_circle(c, 3.0 * PI / 4.0)?,
        ];
        let mut embedded = Vec::with_capacity(pts.len());
        for &(s, q) in &pts {
            let x = sphere_point(q);
            let (rho, phi) = stereographic(q)?;
            stereo = stereo.max((rho * phi.sin() - c).abs());
            circle = circle.max(circle_distance(x, reference));
            embedded.push(x);
            rows.push([c, s, q.u, q.v, x[0], x[1], x[2], rho, phi]);
        }
        let fit = fit_plane(&embedded)?;
        plane = plane.max(fit.max_residual);
        pole = pole.max(fit.distance([0.0, 0.0, -1.0]));
        for x in sample_curve(|v| sphere_circle(c, v), 0.0, PI, 1e-2)? {
            circle_rows.push([c, x[0], x[1], x[2]]);
        }
    }
    out.write(
        "sphere_trajectories.csv",
        &csv::render(&["c", "s", "u", "v", "x", "y", "z", "rho", "phi"], rows),
    )?;
    out.write("sphere_circles.csv", &csv::render(&["c", "x", "y", "z"], circle_rows))?;
    out.write("sphere_profile.csv", &profile.to_csv()?)?;
    let summary = json!({
        "constants": SPHERE_DEMO_CONSTANTS,
        "max_plane_residual": plane,
        "max_pole_distance": pole,
        "max_circle_distance": circle,
        "max_stereographic_residual": stereo,
    });
    Ok((summary, false))
}

fn immerse(cfg: &RunConfig, out: &mut Artifacts) -> Result<(Value, bool)> {
    let [lo, hi] = cfg.alpha_range;
    let meridian = immersion_profile(cfg.a, lo, hi, cfg.n_alpha, cfg.tol)?;
    let check = revolve_and_check(&meridian, cfg.n_rev)?;
    out.write("immersion_profile.csv", &meridian.to_csv())?;
    out.write("immersion_mesh.obj", &check.mesh.to_obj())?;
    let summary = json!({
        "alpha_range": cfg.alpha_range,
        "metric_residual": check.metric_residual,
        "curvature_residual": check.curvature_residual,
        "speed_residual": meridian.speed_residual(),
        "vertices": check.mesh.vertices.len(),
        "triangles": check.mesh.triangles.len(),
    });
    Ok((summary, false))
}
