//! Scalar deformed logarithm and exponential.
//!
//! The deformation is `φ(u) = u / (λ + u)` with a fixed `λ > 0`. It induces
//!
//! ```text
//! log_φ(v) = ∫₁ᵛ du / φ(u) = v − 1 + λ·ln v,        v > 0
//! exp_φ    = log_φ⁻¹,                                 defined on all of ℝ
//! ```
//!
//! `exp_φ` has no closed form for general `λ` (for `λ = 1` it is
//! `W₀(e^{1+u})`), so it is obtained by a safeguarded Newton iteration on
//! `w = ln exp_φ(u)`. Working with the logarithm keeps the iteration finite
//! for arguments far beyond the range where `e^u` overflows, and lets
//! [`exp_phi_ln`] report `ln exp_φ(u)` even when `exp_φ(u)` itself underflows.
//!
//! The predicates at the bottom of the module ([`series_bound`],
//! [`square_gap`], [`ft_lower_bound`], ...) expose the inequalities satisfied by
//! these functions at `λ = 1` so that they can be checked numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The constant `λ > 0` of the deformation `φ(u) = u / (λ + u)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DeformationParameter(f64);

impl DeformationParameter {
    /// `λ = 1`, the deformation for which all the scalar inequalities hold.
    pub const UNIT: Self = DeformationParameter(1.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(DeformationParameter(lambda))
        } else {
            Err(Error::domain("deformation parameter lambda", lambda))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_unit(self) -> bool {
        self.0 == 1.0
    }
}

impl Default for DeformationParameter {
    fn default() -> Self {
        Self::UNIT
    }
}

impl TryFrom<f64> for DeformationParameter {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<DeformationParameter> for f64 {
    fn from(p: DeformationParameter) -> f64 {
        p.0
    }
}

/// Controls for the inversion of `log_φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarEvalConfig {
    /// Relative tolerance on `exp_φ(u)`, i.e. absolute tolerance on its log.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Beyond this `|u|` the Newton iteration is started from the asymptotic
    /// forms `exp_φ(u) ≈ 1 + u − λ ln(1+u)` and `exp_φ(u) ≈ e^{(1+u)/λ}`.
    pub asymptotic_threshold: f64,
}

impl Default for ScalarEvalConfig {
    fn default() -> Self {
        ScalarEvalConfig {
            newton_tol: 1e-12,
            max_iter: 100,
            asymptotic_threshold: 700.0,
        }
    }
}

impl ScalarEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.newton_tol <= 1e-6) {
            return Err(Error::InvalidConfig(format!(
                "newton_tol must lie in (0, 1e-6], got {}",
                self.newton_tol
            )));
        }
        if self.max_iter < 10 {
            return Err(Error::InvalidConfig(format!(
                "max_iter must be at least 10, got {}",
                self.max_iter
            )));
        }
        if !(self.asymptotic_threshold.is_finite() && self.asymptotic_threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "asymptotic_threshold must be positive, got {}",
                self.asymptotic_threshold
            )));
        }
        Ok(())
    }
}

/// `φ(u) = u / (λ + u)` for `u > 0`.
pub fn phi(u: f64, p: DeformationParameter) -> Result<f64> {
    if !(u > 0.0) || u.is_nan() {
        return Err(Error::domain("phi argument", u));
    }
    if u.is_infinite() {
        return Ok(1.0);
    }
    Ok(u / (p.value() + u))
}

/// `log_φ(v) = v − 1 + λ ln v` for `v > 0`.
pub fn log_phi(v: f64, p: DeformationParameter) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain("log_phi argument", v));
    }
    Ok((v - 1.0) + p.value() * v.ln())
}

/// `ln exp_φ(u)`: the root `w` of `e^w − 1 + λw = u`.
///
/// The residual is convex and increasing in `w`, and the root is bracketed by
/// `[ln(1 + u/(1+λ)), ln(1+u)]` for `u ≥ 0` and `[u/λ, min((1+u)/λ, 0)]` for
/// `u < 0`. Newton steps that leave the current bracket are replaced by
/// bisection.
pub fn exp_phi_ln(u: f64, p: DeformationParameter, cfg: &ScalarEvalConfig) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::domain("exp_phi argument", u));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let lam = p.value();
    let residual = |w: f64| w.exp_m1() + lam * w - u;

    let (mut lo, mut hi) = if u > 0.0 {
        ((u / (1.0 + lam)).ln_1p(), u.ln_1p())
    } else {
        (u / lam, ((1.0 + u) / lam).min(0.0))
    };
    if hi <= lo {
        return Ok(lo);
    }

    let mut w = if u > cfg.asymptotic_threshold {
        let v0 = 1.0 + u;
        (v0 - lam * v0.ln()).ln()
    } else if u < -cfg.asymptotic_threshold {
        (1.0 + u - ((1.0 + u) / lam).exp()) / lam
    } else {
        hi
    };
    if !(w > lo && w < hi) {
        w = hi;
    }

    for _ in 0..cfg.max_iter {
        let g = residual(w);
        if g == 0.0 {
            return Ok(w);
        }
        if g > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let slope = w.exp() + lam;
        let mut next = w - g / slope;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let scale = next.abs();
        if (next - w).abs() <= cfg.newton_tol * scale || hi - lo <= 4.0 * f64::EPSILON * scale {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::NoConvergence {
        routine: "exp_phi",
        iterations: cfg.max_iter,
    })
}

/// `exp_φ(u)`, the inverse of [`log_phi`].
///
/// Underflows to zero below roughly `u ≈ −745λ`; use [`exp_phi_ln`] there.
pub fn exp_phi(u: f64, p: DeformationParameter, cfg: &ScalarEvalConfig) -> Result<f64> {
    exp_phi_ln(u, p, cfg).map(f64::exp)
}

/// `exp_φ(u) − 1`, accurate for small `|u|`.
pub fn exp_phi_m1(u: f64, p: DeformationParameter, cfg: &ScalarEvalConfig) -> Result<f64> {
    exp_phi_ln(u, p, cfg).map(f64::exp_m1)
}

/// `d/du exp_φ(u) = φ(exp_φ(u))`.
pub fn exp_phi_derivative(u: f64, p: DeformationParameter, cfg: &ScalarEvalConfig) -> Result<f64> {
    let w = exp_phi_ln(u, p, cfg)?;
    Ok(1.0 / (1.0 + p.value() * (-w).exp()))
}

/// `exp_φ(t·log_φ(λ) + μ)` for `t > 0`, `λ > 0`.
///
/// `lam` is the first argument of the two-argument function, not the
/// deformation parameter.
pub fn f_t(
    t: f64,
    lam: f64,
    mu: f64,
    p: DeformationParameter,
    cfg: &ScalarEvalConfig,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("f_t exponent t", t));
    }
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::domain("f_t argument", lam));
    }
    if !mu.is_finite() {
        return Err(Error::domain("f_t shift", mu));
    }
    exp_phi(t * log_phi(lam, p)? + mu, p, cfg)
}

/// Lower bound `tλ/2` on [`f_t`], available when `0 < t ≤ 1` and
/// `μ + 2(1−t) + t ln 2 ≥ 0` (λ = 1 only).
pub fn ft_lower_bound(t: f64, lam: f64, mu: f64) -> Option<f64> {
    let applies = t > 0.0 && t <= 1.0 && mu + 2.0 * (1.0 - t) + t * std::f64::consts::LN_2 >= 0.0;
    applies.then_some(0.5 * t * lam)
}

/// Upper bound `tλ + γ`, `γ = exp(1 + (μ − t ln t)/(1 − t))`, on [`f_t`] for
/// `0 < t < 1` (λ = 1 only).
pub fn ft_upper_bound(t: f64, lam: f64, mu: f64) -> Option<f64> {
    if !(t > 0.0 && t < 1.0) {
        return None;
    }
    let gamma = (1.0 + (mu - t * t.ln()) / (1.0 - t)).exp();
    Some(t * lam + gamma)
}

/// The secant slope `(exp_φ(u) − 1)/u`, continued by `φ(1)` at `u = 0`.
pub fn secant_f(u: f64, p: DeformationParameter, cfg: &ScalarEvalConfig) -> Result<f64> {
    if u == 0.0 {
        return Ok(1.0 / (1.0 + p.value()));
    }
    Ok(exp_phi_m1(u, p, cfg)? / u)
}

/// `1 + u·exp_φ(u) − exp_φ(u)²`; non-negative with a single zero at `u = 0`
/// when `λ = 1`.
pub fn square_gap(u: f64, p: DeformationParameter, cfg: &ScalarEvalConfig) -> Result<f64> {
    let em1 = exp_phi_m1(u, p, cfg)?;
    let e = 1.0 + em1;
    // 1 + u e − e² = (u − em1)·e − em1, which avoids cancelling two O(1) terms near 0
    Ok((u - em1) * e - em1)
}

/// `1 + u/2 + u²/12`, a quadratic majorant of `exp_φ` at `λ = 1`.
#[inline]
pub fn series_bound(u: f64) -> f64 {
    1.0 + 0.5 * u + u * u / 12.0
}

/// `1 + u/2`, a linear minorant of `exp_φ` at `λ = 1`.
#[inline]
pub fn linear_lower_bound(u: f64) -> f64 {
    1.0 + 0.5 * u
}

/// Value used for the constant in `[ln φ(u)]² ≤ C + (log_φ u)²`.
pub const LOG_SQUARE_CONSTANT: f64 = 0.52;

/// `[ln φ(u)]² − (log_φ u)²` at `λ = 1`, for `u > 0`.
pub fn log_square_excess(u: f64) -> f64 {
    let ln_phi = u.ln() - u.ln_1p();
    let log_phi = (u - 1.0) + u.ln();
    ln_phi * ln_phi - log_phi * log_phi
}

/// Right minus left side of
/// `[ln(1+u)]² ≤ (ln 2)² + (u−1)² + [u − 1 + ln(1+u)]·ln u`.
pub fn log_square_lemma_gap(u: f64) -> f64 {
    let l1 = u.ln_1p();
    let ln2 = std::f64::consts::LN_2;
    ln2 * ln2 + (u - 1.0) * (u - 1.0) + (u - 1.0 + l1) * u.ln() - l1 * l1
}

/// `n` points spaced uniformly in `ln u` over `[lo, hi]`.
pub fn log_uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidConfig(format!(
            "log-uniform grid needs 0 < lo < hi and n >= 2 (got [{lo}, {hi}], n = {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect())
}

/// The grid used for the constant scan: `[1e-8, 1e8]` with `2·10⁵ + 1` points.
pub fn default_constant_grid() -> Vec<f64> {
    log_uniform_grid(1e-8, 1e8, 200_001).expect("static grid bounds are valid")
}

/// Supremum of [`log_square_excess`] over a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantScan {
    pub sup: f64,
    pub argmax: f64,
    pub points: usize,
}

pub fn scan_constant_c(grid: &[f64]) -> Result<ConstantScan> {
    let mut best = ConstantScan {
        sup: f64::NEG_INFINITY,
        argmax: f64::NAN,
        points: grid.len(),
    };
    for &u in grid {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::domain("constant scan grid point", u));
        }
        let r = log_square_excess(u);
        if r > best.sup {
            best.sup = r;
            best.argmax = u;
        }
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("constant scan grid is empty".into()));
    }
    Ok(best)
}
