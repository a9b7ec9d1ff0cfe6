use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hpicp_core::experiment::{build_problem, make_noisy_data, solver_config, ExperimentSpec};
use hpicp_core::forward::forward;
use hpicp_core::iterate::{hpicp_step, licp_step, IterationState};
use hpicp_core::penalty::{fista_rof, tv1d_prox};
use hpicp_core::{ConjugateMap, GridFunction, Mesh, Method};

fn forward_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for spec in [ExperimentSpec::default_1d(), ExperimentSpec::default_2d()] {
        let (model, truth) = build_problem(&spec).unwrap();
        group.bench_with_input(
            BenchmarkId::new(format!("{:?}", spec.problem), spec.elements),
            &truth,
            |b, t| b.iter(|| forward(&model, black_box(t)).unwrap()),
        );
    }
    group.finish();
}

fn tv_prox(c: &mut Criterion) {
    let mut group = c.benchmark_group("tv_prox");
    for n in [256usize, 4096] {
        let mesh = Mesh::interval(n).unwrap();
        let data = GridFunction::from_fn(&mesh, |p| (p[0] > 0.1) as u8 as f64 + 0.2 * (23.0 * p[0]).sin());
        group.bench_with_input(BenchmarkId::new("exact_1d", n), &data, |b, d| {
            b.iter(|| tv1d_prox(black_box(d.values()), mesh.quad_weights(), 0.05))
        });
    }
    let mesh = Mesh::interval(256).unwrap();
    let data = GridFunction::from_fn(&mesh, |p| (p[0] > 0.1) as u8 as f64 + 0.2 * (23.0 * p[0]).sin());
    group.bench_function("fista_1d/256", |b| {
        b.iter(|| fista_rof(black_box(&data), 0.05, &mesh, 5000, 1e-8))
    });
    let mesh = Mesh::square(32).unwrap();
    let data = GridFunction::from_fn(&mesh, |p| (p[0].abs().max(p[1].abs()) < 0.5) as u8 as f64);
    group.bench_function("fista_2d/2048", |b| {
        b.iter(|| fista_rof(black_box(&data), 0.05, &mesh, 5000, 1e-6))
    });
    group.finish();
}

fn outer_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("outer_step");
    for spec in [ExperimentSpec::default_1d(), ExperimentSpec::default_2d()] {
        let (model, truth) = build_problem(&spec).unwrap();
        let u = forward(&model, &truth).unwrap();
        let (u_delta, delta) = make_noisy_data(&u, &spec, model.mesh()).unwrap();
        for method in [Method::Hpicp, Method::Licp] {
            let config = solver_config(&spec, method, delta);
            let state = IterationState::initial(&model, &spec.penalty, &config, &u_delta).unwrap();
            let mut map = ConjugateMap::new(spec.penalty);
            let step = match method {
                Method::Hpicp => hpicp_step,
                Method::Licp => licp_step,
            };
            group.bench_function(format!("{:?}/{method}", spec.problem), |b| {
                b.iter(|| step(black_box(&state), &model, &mut map, &config, &u_delta).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, forward_solve, tv_prox, outer_step);
criterion_main!(benches);
