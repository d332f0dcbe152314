//! Seeded generators for random test instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::operator::{HermitianMatrix, C64};
use crate::state::{center_direction, Direction, FaithfulDensity};

pub type InstanceRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Hermitian matrix with entries uniform in the unit square, times `scale`.
pub fn hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> HermitianMatrix {
    let g = nalgebra::DMatrix::from_fn(n, n, |_, _| uniform_c64(rng) * scale);
    HermitianMatrix::symmetrized(g)
}

/// Uniformly distributed unit vector in `ℂⁿ`.
pub fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| uniform_c64(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // rejection from the cube keeps the direction uniform
        if norm > 1e-3 && v.iter().all(|z| z.norm_sqr() <= 1.0) {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random unitary conjugate of `diag(values)`.
pub fn with_spectrum(rng: &mut impl Rng, values: &[f64]) -> Result<HermitianMatrix> {
    let basis = hermitian(rng, values.len(), 1.0).eig()?;
    Ok(basis.with_values(values))
}

/// Positive definite matrix with eigenvalues uniform in `[lo, hi]`.
pub fn positive_definite(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Result<HermitianMatrix> {
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    with_spectrum(rng, &values)
}

/// Positive semidefinite matrix `Σ cᵢ wᵢwᵢ†` of random rank, trace at most `scale`.
pub fn positive_semidefinite(rng: &mut impl Rng, n: usize, scale: f64) -> HermitianMatrix {
    let rank = rng.random_range(1..=n);
    let mut acc = HermitianMatrix::zeros(n);
    for _ in 0..rank {
        let w = unit_vector(rng, n);
        let c = rng.random_range(0.0..scale) / rank as f64;
        acc = acc
            .add(&HermitianMatrix::outer(&w).scale(c))
            .expect("same dimension");
    }
    acc
}

/// Faithful density matrix whose eigenvalues are bounded below by roughly
/// `0.02 / n`.
pub fn density(rng: &mut impl Rng, n: usize) -> Result<FaithfulDensity> {
    let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..1.0)).collect();
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|x| *x /= total);
    let rho = with_spectrum(rng, &values)?;
    let trace = rho.trace();
    FaithfulDensity::new(rho.scale(1.0 / trace))
}

/// Centered direction with entries of order `scale`.
pub fn direction(rng: &mut impl Rng, rho: &FaithfulDensity, scale: f64) -> Result<Direction> {
    let k = hermitian(rng, rho.dim(), scale);
    center_direction(rho, &k)
}

/// Strictly positive probability vector.
pub fn probability(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..1.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// `k − Σ pᵢkᵢ` for `k` uniform in `[-scale, scale]ⁿ`.
pub fn centered_values(rng: &mut impl Rng, p: &[f64], scale: f64) -> Vec<f64> {
    let k: Vec<f64> = p.iter().map(|_| rng.random_range(-scale..scale)).collect();
    let mean: f64 = p.iter().zip(&k).map(|(p, k)| p * k).sum();
    k.into_iter().map(|x| x - mean).collect()
}
