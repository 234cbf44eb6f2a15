use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use tgfield_core::immersion::{immersion_profile, revolve_and_check};
use tgfield_core::sasaki_bundle::random_graph_tangents;
use tgfield_core::{
    geodesic_shoot, imbed, integrate_trajectory, solve_alpha, tg_field, tg_residual, Differentiation, FieldParams,
    FrameOptions, Grid, Interval, Point2, SasakiMetric,
};

fn params() -> FieldParams {
    FieldParams::new(-0.75, 0.3)
}

fn profile() -> tgfield_core::AlphaProfile {
    solve_alpha(params(), 0.0, 0.8, Interval::new(-3.0, 3.0), 1e-10).unwrap()
}

fn bench_profile(c: &mut Criterion) {
    c.bench_function("solve_alpha", |b| {
        b.iter(|| solve_alpha(black_box(params()), 0.0, 0.8, Interval::new(-3.0, 3.0), 1e-10).unwrap())
    });
}

fn bench_residual(c: &mut Criterion) {
    let pr = profile();
    let metric = pr.metric();
    let field = tg_field(&pr);
    let fd_field = field.without_derivatives();
    let grid = Grid::new(Interval::new(-0.25, 2.9), Interval::new(0.0, TAU), 20, 20);
    let mut group = c.benchmark_group("tg_residual_20x20");
    group.bench_function("analytic", |b| {
        b.iter(|| tg_residual(&metric, &field, black_box(&grid), FrameOptions::default()).unwrap())
    });
    group.bench_function("finite_difference", |b| {
        b.iter(|| tg_residual(&metric, &fd_field, black_box(&grid), FrameOptions::finite_difference()).unwrap())
    });
    group.finish();
}

fn bench_shooting(c: &mut Criterion) {
    let pr = profile();
    let sm = SasakiMetric::new(pr.metric());
    let field = tg_field(&pr);
    let p = Point2::new(0.2, 0.5);
    let w = random_graph_tangents(&sm, &field, p, 1, 3, Differentiation::Analytic).unwrap()[0];
    c.bench_function("geodesic_shoot_1000_steps", |b| {
        b.iter(|| geodesic_shoot(&sm, imbed(&field, p), black_box(w), 1.0, 1e-3).unwrap())
    });
}

fn bench_trajectory(c: &mut Criterion) {
    let pr = profile();
    c.bench_function("integrate_trajectory_1000_steps", |b| {
        b.iter(|| integrate_trajectory(&pr, params(), black_box(Point2::new(0.2, 0.0)), 1.0, 1e-3).unwrap())
    });
}

fn bench_immersion(c: &mut Criterion) {
    c.bench_function("immersion_200x64", |b| {
        b.iter(|| {
            let meridian = immersion_profile(black_box(-0.5), 1.2, 1.8, 200, 1e-10).unwrap();
            revolve_and_check(&meridian, 64).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_profile,
    bench_residual,
    bench_shooting,
    bench_trajectory,
    bench_immersion
);
criterion_main!(benches);
