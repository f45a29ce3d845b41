use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use widthlab::bases::hierarchical::RefinementPlan;
use widthlab::bases::Domain;
use widthlab::problems::{galerkin_solve, ManufacturedSolution};
use widthlab::widths::sweep_max_active;
use widthlab::widths::sampling::sampling_worst_case;

// Each kernel runs once on a single-thread pool (the sequential baseline)
// and once on the default pool.
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let threads = default.current_num_threads();
    vec![
        ("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        (format!("{threads}-threads"), default),
    ]
}

fn kernels(c: &mut Criterion) {
    let pools = pools();
    let u = ManufacturedSolution::with_bubble(1.0, &[(1, 1.0)]).unwrap();
    let plan = RefinementPlan::uniform(8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plane = DMatrix::from_fn(12, 2, |_, _| rng.random::<f64>() - 0.5);

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in &pools {
        group.bench_function(BenchmarkId::new("sampling_worst_case", name), |b| {
            b.iter(|| pool.install(|| sampling_worst_case(2.0, 256).unwrap()))
        });
        group.bench_function(BenchmarkId::new("hierarchical_coefficients", name), |b| {
            b.iter(|| pool.install(|| u.hierarchical_coefficients(&plan)))
        });
        group.bench_function(BenchmarkId::new("galerkin_solve", name), |b| {
            b.iter(|| pool.install(|| galerkin_solve(Domain::LShape, 5, &|p| u.rhs(p)).unwrap()))
        });
        group.bench_function(BenchmarkId::new("sweep_max_active", name), |b| {
            b.iter(|| pool.install(|| sweep_max_active(&plane, 100_000, 1e-5)))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
