//! Counterexamples to operator monotonicity.
//!
//! `u ↦ u − exp_φ(u)` and `u ↦ ln exp_φ(u)` are increasing (and the latter
//! concave) on ℝ, yet neither is operator monotone. Writing `x = exp_φ(u)`,
//! `y = exp_φ(v)` and `x = (1+ε)y`, the Loewner determinant of
//! `f(u) = u − exp_φ(u)` becomes
//!
//! ```text
//! D = λ/(λ+x) · λ/(λ+y) − [λ ln(1+ε) / (εy + λ ln(1+ε))]²
//! ```
//!
//! which, for `ε = e − 1`, is negative exactly when
//! `y < λ(3 − e)/(e² − 3e + 1)`.
//!
//! A negative `D` turns into explicit matrices: for `B = diag(u, v)` and
//! `P` the all-ones matrix, the Fréchet derivative of `f` at `B` in the
//! direction `P` is the Schur product of the Loewner matrix with `P`, i.e. the
//! Loewner matrix itself. So `A = B + tP ≥ B` while `f(A) − f(B) ≈ t·L` has a
//! negative eigenvalue for small enough `t`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{loewner2_det, psd_order_leq, DifferentiableFn, HermitianMatrix, LoewnerPair, PSD_TOL};
use crate::random;
use crate::scalar::{self, DeformationParameter, ScalarEvalConfig};

/// The scalar functions the lab knows how to lift to matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabFunction {
    /// `u − exp_φ(u)`
    UMinusExpPhi,
    /// `ln exp_φ(u)`
    LogExpPhi,
    /// `log_φ(u)`, defined for `u > 0`
    LogPhi,
    Identity,
}

impl LabFunction {
    pub fn name(self) -> &'static str {
        match self {
            LabFunction::UMinusExpPhi => "u-minus-exp-phi",
            LabFunction::LogExpPhi => "log-exp-phi",
            LabFunction::LogPhi => "log-phi",
            LabFunction::Identity => "identity",
        }
    }
}

impl fmt::Display for LabFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u-minus-exp-phi" => Ok(LabFunction::UMinusExpPhi),
            "log-exp-phi" => Ok(LabFunction::LogExpPhi),
            "log-phi" => Ok(LabFunction::LogPhi),
            "identity" => Ok(LabFunction::Identity),
            other => Err(Error::InvalidConfig(format!("unknown function {other:?}"))),
        }
    }
}

/// A [`LabFunction`] bound to a deformation.
#[derive(Clone, Copy, Debug)]
pub struct DeformedFn {
    pub kind: LabFunction,
    pub lambda: DeformationParameter,
    pub cfg: ScalarEvalConfig,
}

impl DeformedFn {
    pub fn new(kind: LabFunction, lambda: DeformationParameter) -> Self {
        DeformedFn {
            kind,
            lambda,
            cfg: ScalarEvalConfig::default(),
        }
    }

    /// `f(A)` by the spectral calculus.
    pub fn apply(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        a.try_map_spectrum(|x| self.value(x))
    }
}

impl DifferentiableFn for DeformedFn {
    fn value(&self, u: f64) -> Result<f64> {
        let p = self.lambda;
        match self.kind {
            LabFunction::UMinusExpPhi => Ok(u - scalar::exp_phi(u, p, &self.cfg)?),
            LabFunction::LogExpPhi => scalar::exp_phi_ln(u, p, &self.cfg),
            LabFunction::LogPhi => scalar::log_phi(u, p),
            LabFunction::Identity => Ok(u),
        }
    }

    fn derivative(&self, u: f64) -> Result<f64> {
        let lam = self.lambda.value();
        match self.kind {
            // 1 − φ(x) = λ/(λ + x)
            LabFunction::UMinusExpPhi => {
                let w = scalar::exp_phi_ln(u, self.lambda, &self.cfg)?;
                Ok(1.0 / (1.0 + w.exp() / lam))
            }
            // φ(x)/x = 1/(λ + x)
            LabFunction::LogExpPhi => Ok(1.0 / (lam + scalar::exp_phi(u, self.lambda, &self.cfg)?)),
            LabFunction::LogPhi => {
                if u > 0.0 {
                    Ok(1.0 + lam / u)
                } else {
                    Err(Error::Domain {
                        what: "log_phi argument",
                        value: u,
                    })
                }
            }
            LabFunction::Identity => Ok(1.0),
        }
    }
}

/// `λ(3 − e)/(e² − 3e + 1)`: for `ε = e − 1` the Loewner determinant at
/// `y = exp_φ(v)` is negative below this value and positive above it.
pub fn violation_threshold(lambda: DeformationParameter) -> f64 {
    let e = std::f64::consts::E;
    lambda.value() * (3.0 - e) / (e * e - 3.0 * e + 1.0)
}

/// The point `(u, v) = (log_φ((1+ε)y), log_φ(y))` and the Loewner data of
/// `u − exp_φ(u)` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixPoint {
    pub y: f64,
    pub epsilon: f64,
    pub x: f64,
    pub u: f64,
    pub v: f64,
    /// `D` from its closed form in `(y, ε, λ)`.
    pub closed_form_determinant: f64,
    /// `D` from divided differences of the function itself.
    pub pair: LoewnerPair,
}

pub fn appendix_point(
    y: f64,
    epsilon: f64,
    lambda: DeformationParameter,
    cfg: &ScalarEvalConfig,
) -> Result<AppendixPoint> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Domain { what: "appendix y", value: y });
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain {
            what: "appendix epsilon",
            value: epsilon,
        });
    }
    let lam = lambda.value();
    let x = (1.0 + epsilon) * y;
    let u = scalar::log_phi(x, lambda)?;
    let v = scalar::log_phi(y, lambda)?;
    let l = lam * epsilon.ln_1p();
    let ratio = l / (epsilon * y + l);
    let closed_form_determinant = lam / (lam + x) * lam / (lam + y) - ratio * ratio;
    let f = DeformedFn {
        kind: LabFunction::UMinusExpPhi,
        lambda,
        cfg: *cfg,
    };
    let pair = loewner2_det(&f, u, v)?;
    Ok(AppendixPoint {
        y,
        epsilon,
        x,
        u,
        v,
        closed_form_determinant,
        pair,
    })
}

/// Parameters of [`build_counterexample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub lambda: DeformationParameter,
    pub seed: u64,
    /// Values of `y/λ` tried in order.
    pub y_grid: Vec<f64>,
    pub epsilon: f64,
    /// Sizes `t` of the all-ones perturbation, largest first.
    pub perturbation_sizes: Vec<f64>,
    pub violation_tol: f64,
    /// Number of seeded random candidates tried if the guided search fails.
    pub random_trials: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            lambda: DeformationParameter::UNIT,
            seed: 0,
            y_grid: vec![0.5, 0.25, 0.75, 0.1, 1.0, 0.05],
            epsilon: std::f64::consts::E - 1.0,
            perturbation_sizes: vec![0.5, 0.25, 0.1, 0.05, 0.01],
            violation_tol: 1e-6,
            random_trials: 20_000,
        }
    }
}

impl SearchConfig {
    pub fn with_lambda(lambda: DeformationParameter) -> Self {
        SearchConfig {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.y_grid.is_empty() || self.y_grid.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
            return Err(Error::InvalidConfig("y_grid must be non-empty and positive".into()));
        }
        if self.perturbation_sizes.is_empty()
            || self.perturbation_sizes.iter().any(|&t| !(t > 0.0) || !t.is_finite())
        {
            return Err(Error::InvalidConfig(
                "perturbation sizes must be non-empty and positive".into(),
            ));
        }
        if !(self.epsilon > 0.0) || !(self.violation_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "epsilon and violation_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    /// Built from a negative Loewner determinant and the all-ones direction.
    Guided,
    /// Found by the seeded random fallback.
    Random,
}

/// Matrices `A ≥ B` with `f(A) − f(B)` not positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct LoewnerCertificate {
    pub function: LabFunction,
    pub lambda: DeformationParameter,
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    /// `λ_min(A − B)`, zero up to rounding for a rank-one perturbation.
    pub order_gap: f64,
    /// `λ_min(f(A) − f(B))`.
    pub violation: f64,
    pub violation_tol: f64,
    pub perturbation: f64,
    pub method: SearchMethod,
    /// `y/λ` of the appendix point the guided search used.
    pub y: Option<f64>,
    pub loewner_point: Option<LoewnerPair>,
}

/// Result of re-checking a certificate from its matrices alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revalidation {
    pub order_gap: f64,
    pub violation: f64,
    pub ordered: bool,
    pub violated: bool,
}

impl Revalidation {
    pub fn is_valid(&self) -> bool {
        self.ordered && self.violated
    }
}

impl LoewnerCertificate {
    /// Recomputes `λ_min(A − B)` and `λ_min(f(A) − f(B))` from scratch.
    pub fn revalidate(&self, cfg: &ScalarEvalConfig) -> Result<Revalidation> {
        revalidate_pair(self.function, self.lambda, &self.a, &self.b, self.violation_tol, cfg)
    }
}

/// Checks `B ≤ A` and `λ_min(f(A) − f(B)) < −tol`.
pub fn revalidate_pair(
    function: LabFunction,
    lambda: DeformationParameter,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    violation_tol: f64,
    cfg: &ScalarEvalConfig,
) -> Result<Revalidation> {
    let f = DeformedFn {
        kind: function,
        lambda,
        cfg: *cfg,
    };
    let order_gap = a.sub(b)?.min_eigenvalue()?;
    let ordered = psd_order_leq(b, a, PSD_TOL)?;
    let violation = f.apply(a)?.sub(&f.apply(b)?)?.min_eigenvalue()?;
    Ok(Revalidation {
        order_gap,
        violation,
        ordered,
        violated: violation < -violation_tol,
    })
}

/// Searches for a certificate that `kind` is not operator monotone.
///
/// Each `y` of the grid gives a point `(u, v)`; if the Loewner determinant of
/// `kind` is negative there, `B = diag(u, v)` and `A = B + t·𝟙𝟙ᵀ` are tried
/// for each `t` of the ladder. If no grid point succeeds, seeded random pairs
/// `A = B + t·wwᵀ` are tried.
pub fn build_counterexample(
    kind: LabFunction,
    cfg: &SearchConfig,
    scalar_cfg: &ScalarEvalConfig,
) -> Result<LoewnerCertificate> {
    cfg.validate()?;
    let f = DeformedFn {
        kind,
        lambda: cfg.lambda,
        cfg: *scalar_cfg,
    };
    let lam = cfg.lambda.value();
    let mut best = f64::INFINITY;
    let ones = HermitianMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]])?;

    for &y_rel in &cfg.y_grid {
        let point = appendix_point(lam * y_rel, cfg.epsilon, cfg.lambda, scalar_cfg)?;
        let pair = match loewner2_det(&f, point.u, point.v) {
            Ok(pair) if pair.determinant < 0.0 => pair,
            Ok(_) | Err(Error::Domain { .. }) => continue,
            Err(e) => return Err(e),
        };
        let b = HermitianMatrix::diagonal(&[point.u, point.v]);
        let fb = f.apply(&b)?;
        for &t in &cfg.perturbation_sizes {
            let a = b.add(&ones.scale(t))?;
            let violation = f.apply(&a)?.sub(&fb)?.min_eigenvalue()?;
            best = best.min(violation);
            if violation < -cfg.violation_tol {
                return Ok(LoewnerCertificate {
                    function: kind,
                    lambda: cfg.lambda,
                    order_gap: a.sub(&b)?.min_eigenvalue()?,
                    a,
                    b,
                    violation,
                    violation_tol: cfg.violation_tol,
                    perturbation: t,
                    method: SearchMethod::Guided,
                    y: Some(y_rel),
                    loewner_point: Some(pair),
                });
            }
        }
    }

    let mut rng = random::seeded(cfg.seed);
    for trial in 0..cfg.random_trials {
        let spread = 3.0 * lam.max(1.0);
        let values = [rng.random_range(-spread..spread), rng.random_range(-spread..spread)];
        let b = random::with_spectrum(&mut rng, &values)?;
        let w = random::unit_vector(&mut rng, 2);
        let t = cfg.perturbation_sizes[trial % cfg.perturbation_sizes.len()];
        let a = b.add(&HermitianMatrix::outer(&w).scale(t))?;
        let violation = match f.apply(&a).and_then(|fa| fa.sub(&f.apply(&b)?)) {
            Ok(diff) => diff.min_eigenvalue()?,
            Err(Error::Domain { .. }) => continue,
            Err(e) => return Err(e),
        };
        best = best.min(violation);
        if violation < -cfg.violation_tol {
            return Ok(LoewnerCertificate {
                function: kind,
                lambda: cfg.lambda,
                order_gap: a.sub(&b)?.min_eigenvalue()?,
                a,
                b,
                violation,
                violation_tol: cfg.violation_tol,
                perturbation: t,
                method: SearchMethod::Random,
                y: None,
                loewner_point: None,
            });
        }
    }
    Err(Error::SearchExhausted {
        best_violation: best,
    })
}

/// Outcome of testing `A ≤ B ⟹ f(A) ≤ f(B)` (or midpoint concavity) on
/// random pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub trials: usize,
    pub failures: usize,
    /// Smallest eigenvalue observed in the tested differences.
    pub worst_slack: f64,
}

/// Draws `trials` pairs `0 < A ≤ B` of dimension 2–6 and counts those with
/// `f(A) ≰ f(B)`. `extra_pairs` (lower, upper) are tested in addition.
pub fn monotone_sanity(
    f: &DeformedFn,
    trials: usize,
    seed: u64,
    extra_pairs: &[(HermitianMatrix, HermitianMatrix)],
    tol: f64,
) -> Result<SanityReport> {
    let mut rng = random::seeded(seed);
    let mut report = SanityReport {
        trials: trials + extra_pairs.len(),
        failures: 0,
        worst_slack: f64::INFINITY,
    };
    let mut record = |lower: &HermitianMatrix, upper: &HermitianMatrix| -> Result<()> {
        let diff = f.apply(upper)?.sub(&f.apply(lower)?)?;
        let slack = diff.min_eigenvalue()?;
        report.worst_slack = report.worst_slack.min(slack);
        if !psd_order_leq(&f.apply(lower)?, &f.apply(upper)?, tol)? {
            report.failures += 1;
        }
        Ok(())
    };
    for i in 0..trials {
        let n = 2 + i % 5;
        let a = random::positive_definite(&mut rng, n, 0.05, 5.0)?;
        let b = a.add(&random::positive_semidefinite(&mut rng, n, 5.0))?;
        record(&a, &b)?;
    }
    for (lower, upper) in extra_pairs {
        record(lower, upper)?;
    }
    Ok(report)
}

/// Midpoint operator concavity `f((A+B)/2) ≥ (f(A) + f(B))/2` on random
/// positive definite pairs of dimension 2–6.
pub fn concavity_sanity(f: &DeformedFn, trials: usize, seed: u64, tol: f64) -> Result<SanityReport> {
    let mut rng = random::seeded(seed);
    let mut report = SanityReport {
        trials,
        failures: 0,
        worst_slack: f64::INFINITY,
    };
    for i in 0..trials {
        let n = 2 + i % 5;
        let a = random::positive_definite(&mut rng, n, 0.05, 5.0)?;
        let b = random::positive_definite(&mut rng, n, 0.05, 5.0)?;
        let mid = f.apply(&a.add(&b)?.scale(0.5))?;
        let avg = f.apply(&a)?.add(&f.apply(&b)?)?.scale(0.5);
        let slack = mid.sub(&avg)?.min_eigenvalue()?;
        report.worst_slack = report.worst_slack.min(slack);
        if slack < -tol {
            report.failures += 1;
        }
    }
    Ok(report)
}

/// The pair `(B, A)` of a certificate followed by `count − 1` copies shifted
/// by a common small Hermitian matrix, for seeding [`monotone_sanity`].
pub fn pairs_near(cert: &LoewnerCertificate, count: usize, seed: u64) -> Result<Vec<(HermitianMatrix, HermitianMatrix)>> {
    let mut rng = random::seeded(seed);
    let mut out = vec![(cert.b.clone(), cert.a.clone())];
    for _ in 1..count {
        let jitter = random::hermitian(&mut rng, cert.b.dim(), 1e-4);
        let lower = cert.b.add(&jitter)?;
        let upper = cert.a.add(&jitter)?;
        out.push((lower, upper));
    }
    Ok(out)
}
