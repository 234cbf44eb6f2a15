use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

use tgfield_core::alpha_profile::AlphaCurve;
use tgfield_core::frame_field::frame_at;
use tgfield_core::sasaki_bundle::lift;
use tgfield_core::{
    cos_alpha_from_curvature, frame_invariants, solve_alpha, sphere_circle, tg_field, Differentiation, FieldParams,
    FrameOptions, GeomError, Interval, Point2, SasakiMetric, Tangent2, UnitField, WarpedMetric,
};

fn sphere_point() -> impl Strategy<Value = Point2> {
    (0.3..PI - 0.3, -PI..PI).prop_map(|(u, v)| Point2::new(u, v))
}

fn direction() -> impl Strategy<Value = Tangent2> {
    (0.0..TAU).prop_map(|t| Tangent2::new(t.cos(), t.sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariant_derivative_is_metric_compatible(
        p in sphere_point(), x in direction(),
        a1 in -2.0..1.0f64, w1 in -PI..PI, a2 in -2.0..1.0f64, w2 in -PI..PI,
    ) {
        let m = WarpedMetric::unit_sphere();
        let (f1, f2) = (UnitField::rotating(a1, w1), UnitField::rotating(a2, w2));
        let (y, z) = (f1.vector(&m, p).unwrap(), f2.vector(&m, p).unwrap());
        let dy = m.covariant_derivative(&f1, x, p, Differentiation::Analytic).unwrap();
        let dz = m.covariant_derivative(&f2, x, p, Differentiation::Analytic).unwrap();
        // ⟨Y, Z⟩ = cos(θ₁ − θ₂)
        let gap = a1 * p.v + w1 - a2 * p.v - w2;
        let lhs = -gap.sin() * (a1 - a2) * x.a_v;
        let rhs = m.inner(p, dy, z).unwrap() + m.inner(p, y, dz).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn unit_fields_stay_unit(p in sphere_point(), x in direction(), b in -1.0..1.0f64, w in -PI..PI) {
        let m = WarpedMetric::unit_sphere();
        let field = UnitField::new(move |u, v| b * u * u + v.sin() + w);
        let xi = field.vector(&m, p).unwrap();
        prop_assert!((m.norm_sq(p, xi).unwrap() - 1.0).abs() < 1e-14);
        let d = m.covariant_derivative(&field, x, p, Differentiation::finite_difference()).unwrap();
        prop_assert!(m.inner(p, d, xi).unwrap().abs() < 1e-9);
    }

    #[test]
    fn horizontal_lift_is_an_isometry(p in sphere_point(), xu in -2.0..2.0f64, xv in -2.0..2.0f64) {
        let m = WarpedMetric::unit_sphere();
        let fp = m.f_prime(p.u).unwrap();
        let sm = SasakiMetric::new(m.clone());
        let h = [xu, xv, -fp * xv];
        let lifted = sm.inner(p.u, h, h).unwrap();
        let base = m.norm_sq(p, Tangent2::new(xu, xv)).unwrap();
        prop_assert!((lifted - base).abs() < 1e-12 * base.max(1.0));
        // the vertical direction is unit and orthogonal to every horizontal vector
        prop_assert!((sm.inner(p.u, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        prop_assert!(sm.inner(p.u, h, [0.0, 0.0, 1.0]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn sasaki_inverse(u in 0.2..PI - 0.2) {
        let sm = SasakiMetric::new(WarpedMetric::unit_sphere());
        let (g, gi) = (sm.components(u).unwrap(), sm.inverse(u).unwrap());
        for (i, row) in g.iter().enumerate() {
            for (j, _) in gi.iter().enumerate() {
                let e: f64 = (0..3).map(|k| row[k] * gi[k][j]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((e - delta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_decomposes_the_field(p in sphere_point(), a in -2.0..1.0f64, w in -PI..PI) {
        let m = WarpedMetric::unit_sphere();
        let field = UnitField::rotating(a, w);
        let Ok((inv, fr)) = frame_at(&m, &field, p, FrameOptions::default()) else { return Ok(()) };
        let rebuilt = fr.e0.scale(inv.omega.cos()).add(fr.e1.scale(inv.omega.sin()));
        prop_assert!(rebuilt.sub(fr.xi).a_u.abs() < 1e-12 && rebuilt.sub(fr.xi).a_v.abs() < 1e-12);
        prop_assert!((inv.k - inv.lambda * inv.omega.sin()).abs() < 1e-12);
        prop_assert!((inv.kappa - inv.lambda * inv.omega.cos()).abs() < 1e-12);
        prop_assert!(m.inner(p, fr.e0, fr.e1).unwrap().abs() < 1e-12);
        prop_assert!((m.norm_sq(p, fr.e0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_circles_lie_on_the_sphere(c in -5.0..5.0f64, v in 0.05..PI - 0.05) {
        let r = sphere_circle(c, v).unwrap();
        prop_assert!((r[0] * r[0] + r[1] * r[1] + r[2] * r[2] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn curvature_dichotomy(a in -3.0..1.0f64, k in -3.0..3.0f64) {
        prop_assume!((k - 1.0).abs() > 1e-6 && ((k - 1.0).abs() - (a + 1.0).abs()).abs() > 1e-9);
        match cos_alpha_from_curvature(a, k) {
            Ok(c) => {
                prop_assert!((k - 1.0).abs() > (a + 1.0).abs());
                prop_assert!(c.abs() < 1.0);
                if a + 1.0 != 0.0 {
                    prop_assert!((tgfield_core::alpha_rhs(a, c.acos()).unwrap() - k).abs() < 1e-12 * k.abs().max(1.0) / c.abs().max(1e-3));
                }
            }
            Err(GeomError::NonExistence(_)) => prop_assert!((k - 1.0).abs() < (a + 1.0).abs()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn profiles_conserve_their_first_integral(a in -1.9..0.9f64, alpha0 in 0.4..1.3f64, w in -PI..PI) {
        prop_assume!((a + 1.0).abs() > 1e-3 && (1.0 - (a + 1.0) / alpha0.cos()).abs() > 1e-2);
        let profile = solve_alpha(FieldParams::new(a, w), 0.0, alpha0, Interval::new(-2.0, 2.0), 1e-10).unwrap();
        let dom = profile.validity();
        for u in dom.linspace(41) {
            let (al, ap) = (profile.alpha(u).unwrap(), profile.alpha_prime(u).unwrap());
            prop_assert!((al.cos() * (1.0 - ap) - (a + 1.0)).abs() < 1e-8, "u = {u}");
        }
    }

    #[test]
    fn tg_fields_have_geodesic_frame_curves(a in -1.9..0.9f64, alpha0 in 0.4..1.3f64, w in -PI..PI, t in 0.1..0.9f64, v in -PI..PI) {
        prop_assume!((a + 1.0).abs() > 1e-3 && (1.0 - (a + 1.0) / alpha0.cos()).abs() > 1e-2);
        let profile = solve_alpha(FieldParams::new(a, w), 0.0, alpha0, Interval::new(-2.0, 2.0), 1e-10).unwrap();
        let dom = profile.validity();
        let u = dom.lo + t * dom.len();
        let metric = profile.metric();
        let field = tg_field(&profile);
        let p = Point2::new(u, v);
        let inv = frame_invariants(&metric, &field, p, FrameOptions::default()).unwrap();
        let (al, ap) = (profile.alpha(u).unwrap(), profile.alpha_prime(u).unwrap());
        prop_assert!(inv.mu.abs() < 1e-8, "mu = {}", inv.mu);
        prop_assert!((inv.sigma + ap / al.tan()).abs() < 1e-8, "sigma = {} vs {}", inv.sigma, -ap / al.tan());
        prop_assert!((inv.lambda - (0.5 * al).tan()).abs() < 1e-8);
        prop_assert!((inv.k - (0.5 * al).tan() * (a * v + w).sin()).abs() < 1e-8);
    }
}

#[test]
fn lift_of_coordinate_vectors() {
    let field = UnitField::rotating(-0.5, 0.3);
    let l = lift(&field, Point2::new(1.0, 2.0), [0.0, 1.0], Differentiation::Analytic).unwrap();
    assert_abs_diff_eq!(l[2], -0.5, epsilon = 1e-15);
}
