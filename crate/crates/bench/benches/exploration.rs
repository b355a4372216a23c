use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epiprofile::config_model::{construct, split_backedges};
use epiprofile::degree_laws::sample_degrees;
use epiprofile::exploration_stats::{discrete_lamperti, height_profile, x_walk};
use epiprofile::{CriticalDegreeLaw, ExplorationMode};

fn exploration(c: &mut Criterion) {
    let law = CriticalDegreeLaw::solve(1.5, 0.5, 1000).unwrap();
    let mut group = c.benchmark_group("construct");
    group.sample_size(20);
    for n in [10_000usize, 100_000] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let degrees = sample_degrees(&law, n, &mut rng).unwrap();
        for mode in [ExplorationMode::BreadthFirst, ExplorationMode::DepthFirst] {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &degrees, |b, d| {
                let mut rng = ChaCha8Rng::seed_from_u64(2);
                b.iter(|| construct(d, mode, &mut rng).unwrap())
            });
        }
    }
    group.finish();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let degrees = sample_degrees(&law, 100_000, &mut rng).unwrap();
    let (g, log) = construct(&degrees, ExplorationMode::BreadthFirst, &mut rng).unwrap();
    c.bench_function("split_backedges/100000", |b| b.iter(|| split_backedges(&g, &log)));
    let x = x_walk(&split_backedges(&g, &log));
    c.bench_function("discrete_lamperti/100000", |b| b.iter(|| discrete_lamperti(&x, 1).unwrap()));
    let root = log.order[0];
    c.bench_function("height_profile/100000", |b| b.iter(|| height_profile(&g, root)));
}

criterion_group!(benches, exploration);
criterion_main!(benches);
