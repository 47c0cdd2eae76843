use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use signlab::concentration::{rho_exact, small_ball_mc};
use signlab::experiments::opnorm::opnorm_bracket;
use signlab::lcd::lcd;
use signlab::lcd::search::DEFAULT_RESOLUTION;
use signlab::numerics::exact::is_singular_i64;
use signlab::numerics::svd::op_norm;
use signlab::rng::{standard_normal, SeedSpec};
use signlab::sample::SignSymMatrix;

fn unit(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeedSpec::new(seed, "bench-vec").rng(0);
    let g: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let s = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.into_iter().map(|x| x / s).collect()
}

fn singularity(c: &mut Criterion) {
    let mut g = c.benchmark_group("is_singular");
    for n in [8usize, 16, 32] {
        let mut rng = SeedSpec::new(1, "bench-sing").rng(0);
        let mats: Vec<Vec<i64>> = (0..64).map(|_| SignSymMatrix::sample(n, &mut rng).to_i64()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &mats, |b, mats| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % mats.len();
                black_box(is_singular_i64(n, &mats[i]))
            })
        });
    }
    g.finish();
}

fn op_norms(c: &mut Criterion) {
    let n = 64;
    let mut rng = SeedSpec::new(2, "bench-op").rng(0);
    let a = SignSymMatrix::sample(n, &mut rng);
    let start: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let mut g = c.benchmark_group("op_norm_64");
    g.bench_function("jacobi_svd", |b| b.iter(|| black_box(op_norm(&a.to_real()).unwrap())));
    g.bench_function("power_bracket", |b| b.iter(|| black_box(opnorm_bracket(&a, &start))));
    g.finish();
}

fn rho(c: &mut Criterion) {
    let mut g = c.benchmark_group("rho_exact");
    for n in [12usize, 20] {
        let generic = unit(n, n as u64);
        let ones = vec![1.0; n];
        g.bench_with_input(BenchmarkId::new("generic", n), &generic, |b, v| b.iter(|| black_box(rho_exact(v).unwrap())));
        g.bench_with_input(BenchmarkId::new("all_ones", n), &ones, |b, v| b.iter(|| black_box(rho_exact(v).unwrap())));
    }
    g.finish();
}

fn lcd_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("lcd");
    for d in [4usize, 16] {
        let v = unit(d, 100 + d as u64);
        g.bench_with_input(BenchmarkId::from_parameter(d), &v, |b, v| b.iter(|| black_box(lcd(v, 0.05, 32.0, DEFAULT_RESOLUTION).unwrap())));
    }
    g.finish();
}

fn small_ball(c: &mut Criterion) {
    let n = 10;
    let v = unit(n, 7);
    let seed = SeedSpec::new(3, "bench-sb");
    c.bench_function("small_ball_mc_n10_4096", |b| b.iter(|| black_box(small_ball_mc(&v, 0.1, n, 2, 0.25, 4096, &seed).unwrap())));
}

criterion_group!(benches, singularity, op_norms, rho, lcd_search, small_ball);
criterion_main!(benches);
