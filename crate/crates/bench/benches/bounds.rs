use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use modedisc::losses::{heuristic_channel_lossy, HeuristicOptions, LossChannel};
use modedisc::source::{dual_geometric_solve, exact_lp_bound, fock_table, FockBoundTable};
use modedisc::{gram, EnergyConstraint, ModeFamily, Task};

fn bench_channel_sdp(c: &mut Criterion) {
    let mut g = c.benchmark_group("channel_sdp");
    g.sample_size(10);
    let ec = EnergyConstraint::new(1.0, 50).unwrap();

    let two_mode = ModeFamily::two_mode(Complex64::new(0.5, 0.0)).unwrap();
    g.bench_function("two_mode_prob_nmax50", |b| {
        b.iter(|| gram::channel_bound(black_box(&two_mode), &ec, Task::Probabilistic).unwrap())
    });

    let phase3 = ModeFamily::phase(3).unwrap();
    g.bench_function("phase3_ud_nmax50", |b| {
        b.iter(|| gram::channel_bound(black_box(&phase3), &ec, Task::Unambiguous).unwrap())
    });

    let dps2 = ModeFamily::dps(2).unwrap();
    g.bench_function("dps2_prob_nmax50", |b| {
        b.iter(|| gram::channel_bound(black_box(&dps2), &ec, Task::Probabilistic).unwrap())
    });
    g.finish();
}

fn bench_fock_tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("fock_table");
    g.sample_size(10);
    let comp_ft3 = ModeFamily::comp_ft(3).unwrap();
    g.bench_function("comp_ft3_prob_nmax6", |b| {
        b.iter(|| fock_table(black_box(&comp_ft3), 6, Task::Probabilistic).unwrap())
    });
    g.finish();
}

fn bench_energy_lp(c: &mut Criterion) {
    let mut g = c.benchmark_group("energy_lp");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let a: Vec<f64> = (0..=300)
        .map(|n| 1.0 - 0.9f64 * 0.97f64.powi(n))
        .map(|v| v + rng.gen_range(-1e-3..1e-3))
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    let table = FockBoundTable::from_values(a, Task::Probabilistic, "bench").unwrap();
    g.bench_function("simplex_nmax300", |b| {
        b.iter(|| exact_lp_bound(black_box(&table), 7.3).unwrap())
    });
    g.bench_function("envelope_nmax300", |b| {
        b.iter(|| dual_geometric_solve(black_box(&table), 7.3).unwrap())
    });
    g.finish();
}

fn bench_loss_heuristic(c: &mut Criterion) {
    let mut g = c.benchmark_group("loss_heuristic");
    g.sample_size(10);
    let ch = LossChannel::new(0.5).unwrap();
    let opts = HeuristicOptions {
        restarts: 1,
        ..HeuristicOptions::default()
    };
    g.bench_function("single_restart_ntrunc5", |b| {
        b.iter(|| {
            heuristic_channel_lossy(black_box(Complex64::new(0.4, 0.0)), 1.0, &ch, &opts).unwrap()
        })
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_channel_sdp,
    bench_fock_tables,
    bench_energy_lp,
    bench_loss_heuristic
);
criterion_main!(benches);
