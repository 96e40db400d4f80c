use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dicore::experiment::{run_mc, Execution, McConfig};

fn battery(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_battery");
    group.sample_size(10);
    for &(n, m, trials) in &[(100u64, 300u64, 2000u64), (1000, 3300, 200)] {
        let cfg = McConfig { n, m, k1: 1, k2: 2, trials, seed: 1, keep_records: false };
        let label = format!("n{n}_m{m}_t{trials}");
        group.bench_with_input(BenchmarkId::new("sequential", &label), &cfg, |b, cfg| {
            b.iter(|| run_mc(cfg, Execution::Sequential).unwrap())
        });
        let jobs = std::thread::available_parallelism().map_or(4, |p| p.get().max(2));
        group.bench_with_input(BenchmarkId::new(format!("parallel_{jobs}"), &label), &cfg, |b, cfg| {
            b.iter(|| run_mc(cfg, Execution::Parallel { jobs }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, battery);
criterion_main!(benches);
