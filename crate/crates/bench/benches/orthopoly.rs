use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dbar_bench::{ellipse_weight, polys};
use dbar_core::orthopoly::{compute_moments, compute_orthopolys, moment_rule};

fn moments(c: &mut Criterion) {
    let w = ellipse_weight(8);
    let mut g = c.benchmark_group("moments");
    g.sample_size(10);
    for n_max in [4, 8] {
        let rule = moment_rule(&w, n_max, 1).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n_max), &n_max, |b, &n| {
            b.iter(|| compute_moments(&w, n, &rule).unwrap())
        });
    }
    g.finish();
}

fn cholesky(c: &mut Criterion) {
    let w = ellipse_weight(8);
    let rule = moment_rule(&w, 8, 1).unwrap();
    let m = compute_moments(&w, 8, &rule).unwrap();
    c.bench_function("orthopolys_n8", |b| b.iter(|| compute_orthopolys(&m, 8).unwrap()));
    let set = polys(&w, 8);
    c.bench_function("zeros_n8", |b| b.iter(|| dbar_core::orthopoly::zeros(&set, 8).unwrap()));
}

criterion_group!(benches, moments, cholesky);
criterion_main!(benches);
