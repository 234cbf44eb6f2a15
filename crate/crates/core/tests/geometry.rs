use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use tgfield_core::frame_field::sff_point;
use tgfield_core::immersion::{immersion_profile, revolve_and_check};
use tgfield_core::sasaki_bundle::{numeric_sff_in_frame, random_graph_tangents};
use tgfield_core::{
    first_integral, geodesic_shoot, imbed, integrate_trajectory, solve_alpha, surface_deviation, tg_field, tg_residual,
    Differentiation, FieldParams, FrameOptions, Grid, Interval, Point2, SasakiMetric, UnitField,
};

fn profile(a: f64, omega0: f64, alpha0: f64) -> tgfield_core::AlphaProfile {
    solve_alpha(
        FieldParams::new(a, omega0),
        0.0,
        alpha0,
        Interval::new(-3.0, 3.0),
        1e-10,
    )
    .unwrap()
}

#[test]
fn tg_field_has_vanishing_second_fundamental_form() {
    let pr = profile(-0.75, 0.4, 0.8);
    let grid = Grid::new(Interval::new(-0.25, 2.9), Interval::new(0.0, 2.0 * PI), 12, 12);
    let metric = pr.metric();
    let field = tg_field(&pr);
    assert!(
        tg_residual(&metric, &field, &grid, FrameOptions::default())
            .unwrap()
            .max_abs
            < 1e-12
    );
    let fd = tg_residual(
        &metric,
        &field.without_derivatives(),
        &grid,
        FrameOptions::finite_difference(),
    )
    .unwrap();
    assert!(fd.max_abs < 1e-6, "{}", fd.max_abs);
    let bent = field.plus_sin_v(0.2);
    assert!(
        tg_residual(&metric, &bent, &grid, FrameOptions::default())
            .unwrap()
            .max_abs
            > 1e-2
    );
}

#[test]
fn closed_form_matches_the_numeric_second_fundamental_form() {
    let pr = profile(-0.75, 0.4, 0.8);
    let metric = pr.metric();
    let sm = SasakiMetric::new(metric.clone());
    let field = tg_field(&pr).plus_sin_v(0.3);
    for (u, v) in [(0.5, 0.3), (1.2, 2.0), (2.0, -1.0)] {
        let p = Point2::new(u, v);
        let sp = sff_point(&metric, &field, p, FrameOptions::default()).unwrap();
        let num = numeric_sff_in_frame(
            &sm,
            &field,
            p,
            1e-4,
            [sp.frame.e0, sp.frame.e1],
            Differentiation::Analytic,
        )
        .unwrap();
        let closed = sp.sff.as_matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (num[i][j] + closed[i][j]).abs() < 1e-6,
                    "({u}, {v}) [{i}][{j}]: {} vs {}",
                    num[i][j],
                    closed[i][j]
                );
            }
        }
    }
}

#[test]
fn bundle_geodesics_stay_on_tg_graph() {
    let pr = profile(-1.0, 0.2, 1.0);
    let sm = SasakiMetric::new(pr.metric());
    let field = tg_field(&pr);
    let p = Point2::new(0.6, 0.0);
    for w in random_graph_tangents(&sm, &field, p, 5, 7, Differentiation::Analytic).unwrap() {
        let path = geodesic_shoot(&sm, imbed(&field, p), w, 0.3, 1e-3).unwrap();
        assert!(!path.truncated);
        assert!(surface_deviation(&path, &field) < 1e-12);
    }
    let bent = UnitField::rotating(-0.9, 0.2);
    let worst = random_graph_tangents(&sm, &bent, p, 5, 7, Differentiation::Analytic)
        .unwrap()
        .into_iter()
        .map(|w| surface_deviation(&geodesic_shoot(&sm, imbed(&bent, p), w, 0.3, 1e-3).unwrap(), &bent))
        .fold(0.0, f64::max);
    assert!(worst > 1e-4, "{worst}");
}

#[test]
fn trajectory_keeps_its_first_integral() {
    let params = FieldParams::new(-0.5, 0.3);
    let pr = profile(-0.5, 0.3, 1.3);
    let traj = integrate_trajectory(&pr, params, Point2::new(0.0, 0.0), 2.0, 1e-3).unwrap();
    let c0 = first_integral(&pr, params, traj.samples[0].point()).unwrap().value;
    for p in traj.points().step_by(100) {
        assert!((first_integral(&pr, params, p).unwrap().value - c0).abs() < 1e-8);
    }
}

#[test]
fn meridian_trajectories_on_a_zero() {
    let params = FieldParams::new(0.0, 0.0);
    let pr = profile(0.0, 0.0, 1.0);
    let traj = integrate_trajectory(&pr, params, Point2::new(0.0, FRAC_PI_4), 0.2, 1e-3).unwrap();
    assert!(traj.points().all(|p| (p.v - FRAC_PI_4).abs() < 1e-14));
}

#[test]
fn immersion_realizes_the_metric() {
    let p = immersion_profile(-0.5, 1.2, 1.8, 120, 1e-10).unwrap();
    let check = revolve_and_check(&p, 32).unwrap();
    assert!(check.metric_residual < 1e-6);
    assert!(check.curvature_residual < 1e-4);
    assert!(p.samples.iter().any(|s| (s.alpha - FRAC_PI_2).abs() < 0.01));
}
