use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use discord_cert::bell::{bell_value, expression, MeasurementConfig};
use discord_cert::discord::{conditional_entropy, discord_certified};
use discord_cert::linalg::{c, ComplexMatrix};
use discord_cert::state::{assemble_state, StateParams};

const BENCH_SEED: u64 = 0xbe9c;

fn random_params(rng: &mut ChaCha8Rng) -> StateParams {
    let mu = loop {
        let cand = [
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        ];
        if cand.iter().sum::<f64>() <= 1.0 {
            break cand;
        }
    };
    let mut a = [0.0; 12];
    for v in &mut a {
        *v = rng.gen_range(0.0..TAU);
    }
    StateParams {
        mu0: mu[0],
        mu1: mu[1],
        mu2: mu[2],
        theta: a[0],
        psi: a[1],
        theta_p: a[2],
        psi_p: a[3],
        theta_0: a[4],
        psi_0: a[5],
        theta_21: a[6],
        psi_21: a[7],
        theta_32: a[8],
        psi_32: a[9],
        chi: a[10],
        zeta: a[11],
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    g.add(&g.adjoint()).scaled(c(0.5, 0.0))
}

fn kernels(criterion: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(BENCH_SEED);
    let params = random_params(&mut rng);
    let rho = assemble_state(&params).unwrap();
    let herm = random_hermitian(&mut rng);
    let expr = expression("chsh").unwrap();
    let cfg = MeasurementConfig {
        alice: vec![(1.2, 0.3)],
        bob: vec![(0.7, 0.1), (2.1, 4.0)],
        discord_angles: (0.4, 0.9),
    };

    criterion.bench_function("hermitian_eigen_4x4", |b| {
        b.iter(|| black_box(&herm).hermitian_eigen().unwrap())
    });
    criterion.bench_function("assemble_state", |b| {
        b.iter(|| assemble_state(black_box(&params)).unwrap())
    });
    criterion.bench_function("bell_value_chsh", |b| {
        b.iter(|| bell_value(black_box(&rho), &cfg, &expr).unwrap())
    });
    criterion.bench_function("conditional_entropy", |b| {
        b.iter(|| conditional_entropy(black_box(&rho), 0.9, 2.3).unwrap())
    });
    criterion.bench_function("discord_certified_32", |b| {
        b.iter(|| discord_certified(black_box(&rho), 32, 200).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = kernels
}
criterion_main!(benches);
