//! Dense Hermitian matrices and their functional calculus.
//!
//! A [`HermitianMatrix`] is the finite-dimensional stand-in for a self-adjoint
//! operator. Its spectral decomposition is computed by a cyclic complex Jacobi
//! method ([`EigenSystem`]), from which matrix functions
//! `f(A) = U·diag(f(λᵢ))·U†`, the Loewner order and the 2×2 Loewner
//! determinant are built.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Relative asymmetry accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative tolerance of [`psd_order_leq`].
pub const PSD_TOL: f64 = 1e-10;

/// Below this `|u − v|` the divided difference is replaced by the derivative.
pub const DIVIDED_DIFFERENCE_SWITCH: f64 = 1e-7;

const MAX_SWEEPS: usize = 100;

/// A dense complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Wraps `data` after checking `A = A†` to within
    /// `1e-12·(1 + max|aᵢⱼ|)`; the stored matrix is `(A + A†)/2`.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Malformed(format!(
                "matrix is {}x{}, expected square",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.nrows() == 0 {
            return Err(Error::Malformed("matrix has dimension 0".into()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Malformed("matrix has non-finite entries".into()));
        }
        let scale = 1.0 + data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let asym = asymmetry(&data);
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self::symmetrized(data))
    }

    /// `(A + A†)/2` without any check.
    pub fn symmetrized(data: DMatrix<C64>) -> Self {
        let adj = data.adjoint();
        HermitianMatrix {
            data: (data + adj).scale(0.5),
        }
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != dim * dim || im.len() != dim * dim {
            return Err(Error::Malformed(format!(
                "expected {} entries per part, got {} and {}",
                dim * dim,
                re.len(),
                im.len()
            )));
        }
        let data = DMatrix::from_fn(dim, dim, |i, j| C64::new(re[i * dim + j], im[i * dim + j]));
        Self::new(data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("rows have unequal length".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianMatrix {
            data: DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix {
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            data: DMatrix::zeros(dim, dim),
        }
    }

    /// `w w†` for a column vector `w`.
    pub fn outer(w: &[C64]) -> Self {
        let n = w.len();
        HermitianMatrix {
            data: DMatrix::from_fn(n, n, |i, j| w[i] * w[j].conj()),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    /// Row-major real parts.
    pub fn re_rows(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n * n).map(|k| self.data[(k / n, k % n)].re).collect()
    }

    /// Row-major imaginary parts.
    pub fn im_rows(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n * n).map(|k| self.data[(k / n, k % n)].im).collect()
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    /// `max |aᵢⱼ|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |aᵢⱼ − bᵢⱼ|`.
    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn check_dim(&self, other: &HermitianMatrix) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.dim(), other.dim()))
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.check_dim(other)?;
        Ok(HermitianMatrix {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.check_dim(other)?;
        Ok(HermitianMatrix {
            data: &self.data - &other.data,
        })
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix {
            data: self.data.map(|z| z * c),
        }
    }

    /// `A + c·I`.
    pub fn shift(&self, c: f64) -> HermitianMatrix {
        let mut data = self.data.clone();
        for i in 0..self.dim() {
            data[(i, i)] += C64::new(c, 0.0);
        }
        HermitianMatrix { data }
    }

    /// `S·A·S` for Hermitian `S`, which is again Hermitian.
    pub fn sandwich(&self, s: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.check_dim(s)?;
        Ok(Self::symmetrized(&s.data * &self.data * &s.data))
    }

    /// `tr(A·B)`, real for Hermitian `A`, `B`.
    pub fn trace_product(&self, other: &HermitianMatrix) -> Result<f64> {
        self.check_dim(other)?;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[(i, j)] * other.data[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// Spectral decomposition by cyclic Jacobi rotations.
    pub fn eig(&self) -> Result<EigenSystem> {
        jacobi_eigh(&self.data)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues[0])
    }

    /// `f(A) = U·diag(f(λᵢ))·U†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        Ok(self.eig()?.reconstruct(f))
    }

    /// As [`HermitianMatrix::map_spectrum`] for a function that can reject
    /// part of the spectrum.
    pub fn try_map_spectrum(
        &self,
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<HermitianMatrix> {
        self.eig()?.try_reconstruct(f)
    }
}

fn asymmetry(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in ascending order with a unitary matrix of eigenvectors
/// (as columns).
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U·diag(f(λᵢ))·U†`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.with_values(&values)
    }

    pub fn try_reconstruct(&self, f: impl Fn(f64) -> Result<f64>) -> Result<HermitianMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&x| f(x))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.with_values(&values))
    }

    /// `U·diag(values)·U†` for arbitrary real `values` in eigenvector order.
    pub fn with_values(&self, values: &[f64]) -> HermitianMatrix {
        let n = self.dim();
        let u = &self.vectors;
        let data = DMatrix::from_fn(n, n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &d) in values.iter().enumerate() {
                acc += u[(i, k)] * u[(j, k)].conj() * d;
            }
            acc
        });
        HermitianMatrix::symmetrized(data)
    }

    /// Diagonal of `U†·M·U`, i.e. `⟨uᵢ|M|uᵢ⟩` for each eigenvector.
    pub fn diagonal_weights(&self, m: &HermitianMatrix) -> Result<Vec<f64>> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), m.dim()));
        }
        let n = self.dim();
        let u = &self.vectors;
        let a = m.as_matrix();
        Ok((0..n)
            .map(|k| {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    let mut row = C64::new(0.0, 0.0);
                    for j in 0..n {
                        row += a[(i, j)] * u[(j, k)];
                    }
                    acc += u[(i, k)].conj() * row;
                }
                acc.re
            })
            .collect())
    }

    /// Eigensystem of `t·A`.
    pub fn scaled(&self, t: f64) -> EigenSystem {
        let mut values: Vec<f64> = self.eigenvalues.iter().map(|x| t * x).collect();
        let mut vectors = self.vectors.clone();
        if t < 0.0 {
            values.reverse();
            let n = self.dim();
            vectors = DMatrix::from_fn(n, n, |i, j| self.vectors[(i, n - 1 - j)]);
        }
        EigenSystem {
            eigenvalues: values,
            vectors,
        }
    }

    /// `max |(U·Λ·U† − A)ᵢⱼ|`.
    pub fn reconstruction_residual(&self, a: &HermitianMatrix) -> Result<f64> {
        self.reconstruct(|x| x).max_abs_diff(a)
    }

    /// `max |(U†U − I)ᵢⱼ|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.dim();
        let g = self.vectors.adjoint() * &self.vectors;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` by a diagonal unitary and
/// then annihilates the now real off-diagonal pair with a real plane
/// rotation. Sweeps stop when the off-diagonal Frobenius norm drops below
/// `ε·‖A‖_F`.
fn jacobi_eigh(input: &DMatrix<C64>) -> Result<EigenSystem> {
    let n = input.nrows();
    let mut a = (input + input.adjoint()).scale(0.5);
    let mut v = DMatrix::<C64>::identity(n, n);
    let total = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let off_norm = |a: &DMatrix<C64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = n <= 1 || total == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                routine: "jacobi eigensolver",
                iterations: MAX_SWEEPS,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // phase: scale index q by e^{-iθ} so that a_pq becomes real
                let phase = apq / r;
                let phase_c = phase.conj();
                for k in 0..n {
                    a[(k, q)] *= phase_c;
                }
                for k in 0..n {
                    a[(q, k)] *= phase;
                }
                for k in 0..n {
                    v[(k, q)] *= phase_c;
                }

                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(app - t * r, 0.0);
                a[(q, q)] = C64::new(aqq + t * r, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
        converged = off_norm(&a) <= f64::EPSILON * total;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenSystem {
        eigenvalues,
        vectors,
    })
}

/// `f(A)` for a real function defined on the spectrum of `A`.
pub fn apply_fn(a: &HermitianMatrix, f: impl Fn(f64) -> Result<f64>) -> Result<HermitianMatrix> {
    a.try_map_spectrum(f)
}

/// Smallest eigenvalue of `B − A`.
pub fn order_gap(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    b.sub(a)?.min_eigenvalue()
}

/// `A ≤ B` in the Loewner order: `λ_min(B − A) ≥ −tol·(1 + ρ(B − A))`.
pub fn psd_order_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    let values = b.sub(a)?.eigenvalues()?;
    let min = values[0];
    let radius = values[0].abs().max(values[values.len() - 1].abs());
    Ok(min >= -tol * (1.0 + radius))
}

/// A real function together with its derivative.
pub trait DifferentiableFn {
    fn value(&self, x: f64) -> Result<f64>;
    fn derivative(&self, x: f64) -> Result<f64>;
}

/// Adapts a pair of closures into a [`DifferentiableFn`].
pub struct FnWithDerivative<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> DifferentiableFn for FnWithDerivative<F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    fn value(&self, x: f64) -> Result<f64> {
        Ok((self.f)(x))
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        Ok((self.df)(x))
    }
}

/// The 2×2 Loewner matrix `[[f′(u), Δ], [Δ, f′(v)]]` and its determinant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerPair {
    pub u: f64,
    pub v: f64,
    pub fprime_u: f64,
    pub fprime_v: f64,
    pub divided_difference: f64,
    pub determinant: f64,
}

impl LoewnerPair {
    /// Smallest eigenvalue of the 2×2 Loewner matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.fprime_u + self.fprime_v);
        let half_diff = 0.5 * (self.fprime_u - self.fprime_v);
        mean - half_diff.hypot(self.divided_difference)
    }
}

/// Loewner determinant `f′(u)f′(v) − [(f(u) − f(v))/(u − v)]²`.
///
/// For `|u − v| < 1e-7` the divided difference is taken as `f′((u+v)/2)`.
pub fn loewner2_det(f: &impl DifferentiableFn, u: f64, v: f64) -> Result<LoewnerPair> {
    let fprime_u = f.derivative(u)?;
    let fprime_v = f.derivative(v)?;
    let divided_difference = if (u - v).abs() < DIVIDED_DIFFERENCE_SWITCH {
        f.derivative(0.5 * (u + v))?
    } else {
        (f.value(u)? - f.value(v)?) / (u - v)
    };
    Ok(LoewnerPair {
        u,
        v,
        fprime_u,
        fprime_v,
        divided_difference,
        determinant: fprime_u * fprime_v - divided_difference * divided_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(2.0, 1.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
        let rect = DMatrix::<C64>::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(rect), Err(Error::Malformed(_))));
        assert!(HermitianMatrix::from_parts(2, &[1.0; 3], &[0.0; 4]).is_err());
    }

    #[test]
    fn identity_spectrum() {
        let e = HermitianMatrix::identity(4).eig().unwrap();
        assert!(e.eigenvalues.iter().all(|&x| x == 1.0));
        assert!(e.orthonormality_residual() < 1e-15);
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let d = HermitianMatrix::diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(d.eigenvalues().unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let h = HermitianMatrix::new(m).unwrap();
        let e = h.eig().unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert!(e.reconstruction_residual(&h).unwrap() < 1e-14);
    }

    #[test]
    fn scaled_eigensystem_reverses_for_negative_t() {
        let h = HermitianMatrix::diagonal(&[-1.0, 0.5, 2.0]);
        let e = h.eig().unwrap().scaled(-2.0);
        assert_eq!(e.eigenvalues, vec![-4.0, -1.0, 2.0]);
        assert!(e.reconstruction_residual(&h.scale(-2.0)).unwrap() < 1e-14);
    }

    #[test]
    fn apply_fn_domain_error_propagates() {
        let h = HermitianMatrix::diagonal(&[-1.0, 2.0]);
        let r = apply_fn(&h, |x| {
            if x > 0.0 {
                Ok(x.ln())
            } else {
                Err(Error::Domain { what: "log", value: x })
            }
        });
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn psd_order_examples() {
        let a = HermitianMatrix::diagonal(&[0.0, 0.0]);
        let b = HermitianMatrix::diagonal(&[1.0, 2.0]);
        assert!(psd_order_leq(&a, &b, PSD_TOL).unwrap());
        assert!(!psd_order_leq(&b, &a, PSD_TOL).unwrap());
        assert!(psd_order_leq(&b, &b, PSD_TOL).unwrap());
        let c3 = HermitianMatrix::identity(3);
        assert!(matches!(
            psd_order_leq(&a, &c3, PSD_TOL),
            Err(Error::DimensionMismatch(..))
        ));
    }

    #[test]
    fn loewner_identity_is_borderline() {
        let id = FnWithDerivative { f: |x: f64| x, df: |_x: f64| 1.0 };
        for &(u, v) in &[(0.0, 1.0), (-3.0, 7.5), (2.0, 2.0)] {
            let p = loewner2_det(&id, u, v).unwrap();
            assert!(p.determinant.abs() < 1e-15);
        }
    }

    #[test]
    fn loewner_continuity_at_coincident_points() {
        let f = FnWithDerivative { f: f64::exp, df: f64::exp };
        let at = loewner2_det(&f, 0.3, 0.3).unwrap();
        let near = loewner2_det(&f, 0.3, 0.3 + 1e-7).unwrap();
        assert!((at.determinant - near.determinant).abs() < 1e-6);
        assert!(at.determinant.abs() < 1e-15);
    }
}
