#![allow(dead_code)]

use std::sync::Arc;

use hamsys_core::functionals::{
    energy_dual, energy_fourth_order, energy_reduced, gradient_dual, gradient_fourth_order, gradient_reduced,
    DualPair,
};
use hamsys_core::problem::ExponentPair;
use hamsys_core::spectral::{Field, SpectralBasis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_TOLERANCE: f64 = 1e-5;

/// `φ_1` plus a decaying random perturbation.
pub fn random_field(basis: &Arc<SpectralBasis>, rng: &mut ChaCha8Rng, amp: f64) -> Field {
    let c = (0..basis.mode_count())
        .map(|n| {
            let base = if n == 0 { 1.0 } else { 0.0 };
            base + amp * rng.random_range(-1.0..1.0) / (1.0 + n as f64).powi(2)
        })
        .collect();
    Field::from_coefficients(basis, c).unwrap()
}

fn direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|k| rng.random_range(-1.0..1.0) / (1.0 + k as f64)).collect()
}

fn central(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

fn relative(fd: f64, an: f64) -> f64 {
    (fd - an).abs() / an.abs().max(f64::MIN_POSITIVE)
}

/// Worst directional error of the dual gradient over `seeds` random pairs.
pub fn dual_gradient_error(basis: &Arc<SpectralBasis>, e: &ExponentPair, seeds: u64) -> f64 {
    let w = basis.weights();
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(basis, &mut rng, 0.5);
        let g = random_field(basis, &mut rng, 0.5);
        let d = DualPair::from_fields(&f, &g).unwrap();
        let scale = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let (sf, sg) = (scale(&d.f), scale(&d.g));
        let df: Vec<f64> = basis.synthesize(&direction(basis.mode_count(), &mut rng)).iter().map(|x| x * sf).collect();
        let dg: Vec<f64> = basis.synthesize(&direction(basis.mode_count(), &mut rng)).iter().map(|x| x * sg).collect();
        let (gf, gg) = gradient_dual(&d, e);
        let an: f64 = (0..w.len()).map(|j| w[j] * (gf[j] * df[j] + gg[j] * dg[j])).sum();
        let fd = central(
            |t| {
                let moved = DualPair::new(
                    basis,
                    d.f.iter().zip(&df).map(|(a, b)| a + t * b).collect(),
                    d.g.iter().zip(&dg).map(|(a, b)| a + t * b).collect(),
                )
                .unwrap();
                energy_dual(&moved, e).unwrap()
            },
            1e-5,
        );
        worst = worst.max(relative(fd, an));
    }
    worst
}

fn coefficient_error(
    basis: &Arc<SpectralBasis>,
    seeds: u64,
    value: impl Fn(&Field) -> f64,
    grad: impl Fn(&Field) -> Field,
) -> f64 {
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let u = random_field(basis, &mut rng, 0.5);
        let xi = direction(basis.mode_count(), &mut rng);
        let g = grad(&u);
        let an: f64 = g.coefficients().iter().zip(&xi).map(|(a, b)| a * b).sum();
        let fd = central(
            |t| {
                let c = u.coefficients().iter().zip(&xi).map(|(a, b)| a + t * b).collect();
                value(&Field::from_coefficients(basis, c).unwrap())
            },
            1e-5,
        );
        worst = worst.max(relative(fd, an));
    }
    worst
}

pub fn fourth_order_gradient_error(basis: &Arc<SpectralBasis>, e: &ExponentPair, seeds: u64) -> f64 {
    coefficient_error(basis, seeds, |u| energy_fourth_order(u, e), |u| gradient_fourth_order(u, e))
}

pub fn reduced_gradient_error(basis: &Arc<SpectralBasis>, e: &ExponentPair, lambda: f64, seeds: u64) -> f64 {
    coefficient_error(
        basis,
        seeds,
        |u| energy_reduced(u, e, lambda).unwrap(),
        |u| gradient_reduced(u, e, lambda).unwrap(),
    )
}
