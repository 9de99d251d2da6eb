use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loplab_bench::{circuit, order};
use loplab_core::oracle::Oracle;
use loplab_core::{approx_count, count_exact, solve, Driver, OracleModel, Policy, SolverConfig};

fn exact_counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_exact");
    for n in [12, 16, 20] {
        let circ = circuit(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &circ, |b, circ| b.iter(|| count_exact(circ).unwrap()));
    }
    g.finish();
}

fn approximate_counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("approx_count_k8");
    let circ = circuit(10, 2);
    for driver in Driver::ALL {
        g.bench_function(driver.to_string(), |b| {
            b.iter(|| approx_count(&circ, 8, &mut Oracle::new(&OracleModel::Threshold), driver).unwrap())
        });
    }
    g.finish();
}

fn solving(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(20);
    let adversary = OracleModel::adversarial(Policy::SeededHash, 0);
    for n in [4, 6] {
        let e = order(n, 3);
        for driver in Driver::ALL {
            let config = SolverConfig::with_driver(driver);
            g.bench_function(format!("n{n}/{driver}"), |b| {
                b.iter(|| solve(&e, &mut Oracle::new(&adversary), &config).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, exact_counting, approximate_counting, solving);
criterion_main!(benches);
