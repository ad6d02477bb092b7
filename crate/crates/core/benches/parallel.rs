use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use thinfilm::kernel::{sample_phi, KernelSpec};
use thinfilm::linear::evolve_many;
use thinfilm::profile::{ProfileSpec, Shape};
use thinfilm::similarity::{convergence_report, Normalisation};
use thinfilm::{Execution, Grid1D};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_sample_phi(c: &mut Criterion) {
    let spec = KernelSpec::default();
    let u: Vec<f64> = (0..=2000).map(|i| -10.0 + 0.01 * i as f64).collect();
    let mut group = c.benchmark_group("sample_phi");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sample_phi(&u, 0, &spec, exec).unwrap())
        });
    }
    group.finish();
}

fn gate_field(n: usize) -> thinfilm::Field {
    let grid = Grid1D::centered(0.1, n).unwrap();
    ProfileSpec::centered(Shape::Gate { width: 1.0, amplitude: 0.1 })
        .unwrap()
        .sample(&grid)
        .unwrap()
}

fn bench_evolve_many(c: &mut Criterion) {
    let initial = gate_field(8192);
    let times: Vec<f64> = (0..16).map(|i| 10f64.powf(i as f64 / 5.0)).collect();
    let mut group = c.benchmark_group("evolve_many");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| evolve_many(&initial, &times, 2, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_convergence(c: &mut Criterion) {
    let initial = gate_field(4096);
    let spec = KernelSpec::default();
    let times = [10.0, 30.0, 100.0, 300.0];
    let mut group = c.benchmark_group("convergence_report");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                convergence_report(&initial, &times, Normalisation::ByVolume, &spec, (10.0, 300.0), exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sample_phi, bench_evolve_many, bench_convergence);
criterion_main!(benches);
