//! Parallel versus sequential throughput.
//!
//! With the default `parallel` feature every workload runs twice: inside a
//! one-thread rayon pool (`pool-1`) and inside the default pool
//! (`default-pool-N`). Building with `--no-default-features` benchmarks the
//! sequential fallback under the label `sequential`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gabor_recover::experiments::{run_experiment, ExperimentConfig, Mode};
use gabor_recover::{
    apply_erasure, gabor_row, recover_rows, sample_erasure, Complex64, GridDims, Signal2D,
    SolverOptions, TransformKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Runner = Box<dyn Fn(&mut (dyn FnMut() + Send))>;

fn runners() -> Vec<(String, Runner)> {
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool = rayon::ThreadPoolBuilder::new().build().unwrap();
        let label = format!("default-pool-{}", pool.current_num_threads());
        vec![
            (
                "pool-1".to_string(),
                Box::new(move |f: &mut (dyn FnMut() + Send)| single.install(f)),
            ),
            (
                label,
                Box::new(move |f: &mut (dyn FnMut() + Send)| pool.install(f)),
            ),
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![(
            "sequential".to_string(),
            Box::new(|f: &mut (dyn FnMut() + Send)| f()),
        )]
    }
}

fn random_signal(n: usize, t: usize) -> Signal2D {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    Signal2D::from_fn(GridDims::new(n, t).unwrap(), |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .unwrap()
}

fn bench(c: &mut Criterion) {
    let runners = runners();

    let f = random_signal(512, 256);
    let mut group = c.benchmark_group("gabor_row_512x256");
    for (label, run) in &runners {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(gabor_row(&f)))))
        });
    }
    group.finish();

    let d = GridDims::new(128, 16).unwrap();
    let sparse = Signal2D::from_fn(d, |x, y| {
        if (x * 7 + y * 3) % 64 == 0 {
            Complex64::new(1.0, 0.5)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .unwrap();
    let pattern = sample_erasure(d, 0.1, 2).unwrap();
    let problem = apply_erasure(&gabor_row(&sparse), &pattern, TransformKind::GaborRow).unwrap();
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("recover_rows_128x16");
    for (label, run) in &runners {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| {
                run(&mut || {
                    drop(std::hint::black_box(
                        recover_rows(&problem, None, &opts).unwrap(),
                    ))
                })
            })
        });
    }
    group.finish();

    let mut config = ExperimentConfig::new(Mode::RowRecovery, 64, 4, 0.05, 2, 64);
    config.base_seed = 11;
    let mut group = c.benchmark_group("row_recovery_experiment_64x4_64_trials");
    group.sample_size(10);
    for (label, run) in &runners {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(run_experiment(&config).unwrap()))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
