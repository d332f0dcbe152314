//! Reference implementations used only by the tests. None of them call the
//! library's solvers: the scalar inverse is plain bisection, eigensystems come
//! from nalgebra's own Hermitian solver, and traces are formed explicitly.

#![allow(dead_code)]

use deformexp::{HermitianMatrix, C64};
use nalgebra::DMatrix;

/// `ln exp_φ(u)` by bisection on `e^w − 1 + λw = u`.
pub fn ln_exp_phi(u: f64, lambda: f64) -> f64 {
    let h = |w: f64| w.exp() - 1.0 + lambda * w - u;
    let (mut lo, mut hi) = if u >= 0.0 {
        (-1.0, u.ln_1p() + 1.0)
    } else {
        ((u - 1.0) / lambda - 1.0, 1.0)
    };
    assert!(h(lo) < 0.0 && h(hi) > 0.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn exp_phi(u: f64, lambda: f64) -> f64 {
    ln_exp_phi(u, lambda).exp()
}

/// `φ(exp_φ(u))`.
pub fn phi_exp_phi(u: f64, lambda: f64) -> f64 {
    let v = exp_phi(u, lambda);
    v / (lambda + v)
}

/// `α` with `Σ pᵢ exp_φ(kᵢ − α) = 1`, by bisection over a bracket that is
/// widened until it contains the root.
pub fn classical_alpha(p: &[f64], k: &[f64], lambda: f64) -> f64 {
    let n = |b: f64| -> f64 { p.iter().zip(k).map(|(p, k)| p * exp_phi(k - b, lambda)).sum() };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while n(lo) < 1.0 {
        lo *= 2.0;
    }
    while n(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if n(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues (ascending) and eigenvectors from nalgebra.
pub fn eigh(m: &HermitianMatrix) -> (Vec<f64>, DMatrix<C64>) {
    let e = m.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.dim(), m.dim(), |r, c| e.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `f(A)` through nalgebra's eigensystem.
pub fn matrix_fn(m: &HermitianMatrix, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (values, u) = eigh(m);
    let d = DMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            C64::new(f(values[i]), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &u * d * u.adjoint()
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(AB)`.
pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    trace(&(a * b)).re
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let h = m.adjoint();
    let sym = (m + h).scale(0.5);
    sym.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// The closed form of the 2×2 Loewner determinant of `u − exp_φ(u)` at
/// `x = (1+ε)y`.
pub fn appendix_determinant(y: f64, eps: f64, lambda: f64) -> f64 {
    let x = (1.0 + eps) * y;
    let l = lambda * eps.ln_1p();
    let r = l / (eps * y + l);
    lambda / (lambda + x) * lambda / (lambda + y) - r * r
}

/// `λ(3 − e)/(e² − 3e + 1)`.
pub fn threshold(lambda: f64) -> f64 {
    let e = std::f64::consts::E;
    lambda * (3.0 - e) / (e * e - 3.0 * e + 1.0)
}

/// Zero of [`appendix_determinant`] in `y` at `ε = e − 1`.
pub fn determinant_zero(lambda: f64) -> f64 {
    let eps = std::f64::consts::E - 1.0;
    let (mut lo, mut hi) = (0.1 * lambda, 10.0 * lambda);
    assert!(appendix_determinant(lo, eps, lambda) < 0.0);
    assert!(appendix_determinant(hi, eps, lambda) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if appendix_determinant(mid, eps, lambda) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(ρ, K)` model quantities computed from explicit matrices.
pub struct ModelOracle {
    pub alpha: f64,
    pub sigma: DMatrix<C64>,
    pub escort: DMatrix<C64>,
    pub z: f64,
    pub dalpha_dt: f64,
}

/// Evaluates the model at direction `k` by diagonalizing `k`, solving for `α`
/// with [`classical_alpha`] on the weights `⟨uᵢ|ρ|uᵢ⟩`, and forming all
/// matrices explicitly.
pub fn model(rho: &HermitianMatrix, k: &HermitianMatrix, lambda: f64) -> ModelOracle {
    let (kv, u) = eigh(k);
    let r = rho.as_matrix();
    let w: Vec<f64> = (0..kv.len())
        .map(|i| {
            let col = u.column(i);
            (col.adjoint() * r * col)[(0, 0)].re
        })
        .collect();
    let total: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
    let alpha = classical_alpha(&w, &kv, lambda);
    let sqrt = matrix_fn(rho, f64::sqrt);
    let y = matrix_fn(k, |x| exp_phi(x - alpha, lambda));
    let phi_y = matrix_fn(k, |x| phi_exp_phi(x - alpha, lambda));
    let k_phi_y = matrix_fn(k, |x| x * phi_exp_phi(x - alpha, lambda));
    let sigma = &sqrt * &y * &sqrt;
    let z = trace_product(r, &phi_y);
    let escort = (&sqrt * &phi_y * &sqrt).scale(1.0 / z);
    let dalpha_dt = trace_product(r, &k_phi_y) / z;
    ModelOracle {
        alpha,
        sigma,
        escort,
        z,
        dalpha_dt,
    }
}

pub fn diag(values: &[f64]) -> HermitianMatrix {
    HermitianMatrix::diagonal(values)
}
