use auctionsim::equilibria::{fpsb_bne_numeric, fpsb_curve_analytic};
use auctionsim::matrix::Matrix;
use auctionsim::mechanisms::{
    max_assignment, run_msaa_outcome, run_vcg, AuctionInstance, MsaaConfig,
};
use auctionsim::rng;
use auctionsim::stfs::{
    optimize_dispersion, DispersionState, DispersionTolerances, SlotGrid, StfsInstance,
};
use auctionsim::valuation::{self, ValuationParams};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn reference_params() -> ValuationParams {
    ValuationParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap()
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng::stream(seed, &[0xbe, rows as u64, cols as u64]);
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng::uniform_01(&mut r) * 4.0).collect())
        .unwrap()
}

fn bench_valuation(c: &mut Criterion) {
    let params = reference_params();
    c.bench_function("valuation/sample 5x2000", |b| {
        b.iter(|| valuation::sample(black_box(&params), 5, 2000, 7).unwrap())
    });
    c.bench_function("valuation/cdf", |b| {
        b.iter(|| valuation::cdf(black_box(&params), black_box(1.3)).unwrap())
    });
}

fn bench_equilibria(c: &mut Criterion) {
    let params = reference_params();
    let grid: Vec<f64> = (0..200).map(|i| 0.1 + 3.9 * i as f64 / 199.0).collect();
    c.bench_function("equilibria/analytic curve 200pts K=5", |b| {
        b.iter(|| fpsb_curve_analytic(black_box(&params), 5, black_box(&grid)).unwrap())
    });
    let matrix = valuation::sample(&params, 5, 2000, 7).unwrap();
    c.bench_function("equilibria/numeric bid I=2000", |b| {
        b.iter(|| fpsb_bne_numeric(black_box(&matrix), 0, black_box(2.0)).unwrap())
    });
}

fn bench_mechanisms(c: &mut Criterion) {
    for (k, n) in [(6usize, 6usize), (31, 10)] {
        let values = random_matrix(k, n, 3);
        c.bench_function(&format!("hungarian/{k}x{n}"), |b| {
            b.iter(|| max_assignment(black_box(&values)).unwrap())
        });
        let instance = AuctionInstance::new(values.clone(), 0.0).unwrap();
        c.bench_function(&format!("vcg/{k}x{n}"), |b| {
            b.iter(|| run_vcg(black_box(&instance)).unwrap())
        });
        let config = MsaaConfig::defaults_for(&instance);
        c.bench_function(&format!("msaa/{k}x{n}"), |b| {
            b.iter(|| run_msaa_outcome(black_box(&instance), black_box(&config), 5).unwrap())
        });
    }
}

fn bench_dispersion(c: &mut Criterion) {
    let instance = StfsInstance::random(12, SlotGrid::new(4, 3), 21);
    let initial = DispersionState::uncompensated(&instance);
    let tol = DispersionTolerances::default();
    c.bench_function("dispersion/optimize K=12", |b| {
        b.iter_batched(
            || initial.clone(),
            |state| optimize_dispersion(black_box(&instance), &state, &tol).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_valuation, bench_equilibria, bench_mechanisms, bench_dispersion);
criterion_main!(benches);
