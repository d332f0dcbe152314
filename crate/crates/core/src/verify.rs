//! Verification suites: every inequality and invariant of the library,
//! evaluated on seeded random samples and reported as named checks.
//!
//! Each check aggregates many sample points and keeps the one closest to (or
//! furthest past) its bound. A suite is a pure function of its
//! [`VerifyConfig`], so two runs with the same seed give identical reports.

use std::f64::consts::{E, LN_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lab::{self, DeformedFn, LabFunction, SearchConfig};
use crate::operator::{loewner2_det, psd_order_leq, DifferentiableFn, HermitianMatrix, PSD_TOL};
use crate::random::{self, InstanceRng};
use crate::report::{digest, Check, Relation, RunReport};
use crate::scalar::{self, DeformationParameter, ScalarEvalConfig};
use crate::state::{self, Direction, FaithfulDensity, ModelConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Scalar,
    Operator,
    State,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Scalar => "scalar",
            Suite::Operator => "operator",
            Suite::State => "state",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Suite::Scalar),
            "operator" => Ok(Suite::Operator),
            "state" => Ok(Suite::State),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidConfig(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random matrix instances per operator and state check.
    pub trials: usize,
    /// Random points of the scalar identities.
    pub scalar_points: usize,
    /// Random pairs of the operator monotonicity and concavity checks.
    pub monotone_trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            trials: 100,
            scalar_points: 100_000,
            monotone_trials: 500,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.scalar_points == 0 || self.monotone_trials == 0 {
            return Err(Error::InvalidConfig("sample counts must be positive".into()));
        }
        Ok(())
    }
}

/// Keeps the sample of a family closest to violating its bound.
struct Worst {
    name: String,
    tag: &'static str,
    relation: Relation,
    tol: f64,
    lhs: f64,
    rhs: f64,
    margin: f64,
    count: usize,
}

impl Worst {
    fn new(name: &str, tag: &'static str, relation: Relation, tol: f64) -> Self {
        Worst {
            name: name.to_owned(),
            tag,
            relation,
            tol,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NEG_INFINITY,
            count: 0,
        }
    }

    fn le(name: &str, tag: &'static str, tol: f64) -> Self {
        Self::new(name, tag, Relation::Le, tol)
    }

    fn ge(name: &str, tag: &'static str, tol: f64) -> Self {
        Self::new(name, tag, Relation::Ge, tol)
    }

    fn observe(&mut self, lhs: f64, rhs: f64) {
        let margin = match self.relation {
            Relation::Le | Relation::Lt => lhs - rhs,
            Relation::Ge => rhs - lhs,
            Relation::Eq => (lhs - rhs).abs(),
        };
        let margin = if margin.is_nan() { f64::INFINITY } else { margin };
        if self.count == 0 || margin > self.margin {
            self.lhs = lhs;
            self.rhs = rhs;
            self.margin = margin;
        }
        self.count += 1;
    }

    fn finish(self) -> Check {
        if self.count == 0 {
            return Check::holds(self.name, self.tag, false).skip("no applicable samples");
        }
        Check::new(self.name, self.tag, self.relation, self.lhs, self.rhs, self.tol)
            .with_note(format!("worst of {} samples", self.count))
    }
}

fn sub_rng(seed: u64, stream: u64) -> InstanceRng {
    random::seeded(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream)
}

/// Output of a suite: checks plus summary values.
pub struct SuiteOutcome {
    pub checks: Vec<Check>,
    pub results: serde_json::Map<String, Value>,
}

impl SuiteOutcome {
    fn new() -> Self {
        SuiteOutcome {
            checks: Vec::new(),
            results: serde_json::Map::new(),
        }
    }

    fn extend(&mut self, other: SuiteOutcome) {
        self.checks.extend(other.checks);
        self.results.extend(other.results);
    }
}

/// Runs a suite and wraps its outcome into a report.
pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<RunReport> {
    cfg.validate()?;
    let outcome = match suite {
        Suite::Scalar => scalar_suite(cfg)?,
        Suite::Operator => operator_suite(cfg)?,
        Suite::State => state_suite(cfg)?,
        Suite::All => {
            let mut all = scalar_suite(cfg)?;
            all.extend(operator_suite(cfg)?);
            all.extend(state_suite(cfg)?);
            all
        }
    };
    let mut results = serde_json::Map::new();
    results.insert("suite".into(), json!(suite.name()));
    results.insert("seed".into(), json!(cfg.seed));
    results.insert("trials".into(), json!(cfg.trials));
    results.extend(outcome.results);
    let failures = outcome.checks.iter().filter(|c| c.failed()).count();
    results.insert("checks".into(), json!(outcome.checks.len()));
    results.insert("failures".into(), json!(failures));
    let inputs = serde_json::to_vec(&(suite, cfg)).expect("plain data serializes");
    Ok(RunReport {
        command: "verify".into(),
        inputs: digest([b"verify".as_slice(), &inputs]),
        results: Value::Object(results),
        checks: outcome.checks,
    })
}

const TAG_EXP: &str = "deformed-exponential";
const TAG_LOG: &str = "deformed-logarithm";
const TAG_SECANT: &str = "secant-function";
const TAG_FT: &str = "two-argument-bounds";
const TAG_LOGSQ: &str = "log-square-bound";

/// Scalar identities and inequalities at `λ = 1`.
pub fn scalar_suite(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let p = DeformationParameter::UNIT;
    let sc = ScalarEvalConfig::default();
    let mut out = SuiteOutcome::new();
    let mut rng = sub_rng(cfg.seed, 1);

    let mut points: Vec<f64> = (0..cfg.scalar_points)
        .map(|_| rng.random_range(-50.0..=50.0))
        .collect();
    points.extend([0.0, -50.0, 50.0, 1e-12, -1e-12]);
    let probes = [-1e6, -1.2e3, -1e3, -710.0, 710.0, 1e3, 1.2e3, 1e6];

    let mut identity = Worst::le("scalar.log_identity", TAG_EXP, 1e-10);
    let mut round_trip = Worst::le("scalar.round_trip", TAG_LOG, 1e-9);
    let mut lower = Worst::ge("scalar.linear_lower_bound", TAG_EXP, 1e-9);
    let mut series = Worst::le("scalar.series_upper_bound", TAG_EXP, 1e-9);
    let mut sandwich_hi = Worst::le("scalar.negative_sandwich_upper", TAG_EXP, 1e-9);
    let mut sandwich_lo = Worst::ge("scalar.negative_sandwich_lower", TAG_EXP, 1e-9);
    let mut gap = Worst::ge("scalar.square_gap_nonnegative", TAG_EXP, 1e-12);
    let mut gap_strict = Worst::new("scalar.square_gap_positive_away_from_zero", TAG_EXP, Relation::Ge, 0.0);
    let mut secant_range = Worst::le("scalar.secant_below_one", TAG_SECANT, 0.0);
    let mut secant_pos = Worst::ge("scalar.secant_positive", TAG_SECANT, 0.0);

    for &u in points.iter().chain(&probes) {
        let w = scalar::exp_phi_ln(u, p, &sc)?;
        let v = w.exp();
        // e − (1 + u − ln e) relative to max(1, e)
        identity.observe((v - (1.0 + u - w)).abs() / v.max(1.0), 0.0);
        // log_φ(exp_φ(u)) = e^w − 1 + w, absolute on [−700, 700], relative beyond
        round_trip.observe((w.exp_m1() + w - u).abs() / u.abs().max(700.0) * 700.0, 0.0);
        lower.observe(v, scalar::linear_lower_bound(u));
        series.observe(v, scalar::series_bound(u));
        if u < 0.0 {
            // e^u ≤ exp_φ(u) ≤ e^{1+u}, compared in the logarithm
            sandwich_hi.observe(w, 1.0 + u);
            sandwich_lo.observe(w, u);
        }
        let g = scalar::square_gap(u, p, &sc)?;
        gap.observe(g, 0.0);
        if u.abs() >= 1e-4 {
            gap_strict.observe(g, f64::MIN_POSITIVE);
        }
        if u != 0.0 {
            let f = scalar::secant_f(u, p, &sc)?;
            secant_range.observe(f, 1.0);
            secant_pos.observe(f, 0.0);
        }
    }
    let zero_gap = scalar::square_gap(0.0, p, &sc)?;
    out.checks.extend([
        identity.finish(),
        round_trip.finish(),
        lower.finish(),
        series.finish(),
        sandwich_hi.finish(),
        sandwich_lo.finish(),
        gap.finish(),
        gap_strict.finish(),
        Check::close("scalar.square_gap_zero_at_origin", TAG_EXP, zero_gap, 0.0, 0.0),
        secant_range.finish(),
        secant_pos.finish(),
    ]);

    // Lipschitz bounds on random pairs, both nearby and far apart
    let mut lipschitz = Worst::le("scalar.exp_lipschitz", TAG_EXP, 1e-12);
    let mut secant_lip = Worst::le("scalar.secant_half_lipschitz", TAG_SECANT, 1e-12);
    for i in 0..cfg.scalar_points / 4 {
        let u: f64 = rng.random_range(-50.0..=50.0);
        let v = if i % 2 == 0 {
            u + rng.random_range(-1.0..=1.0)
        } else {
            rng.random_range(-50.0..=50.0)
        };
        let (eu, ev) = (scalar::exp_phi(u, p, &sc)?, scalar::exp_phi(v, p, &sc)?);
        lipschitz.observe((eu - ev).abs(), (u - v).abs());
        let (fu, fv) = (scalar::secant_f(u, p, &sc)?, scalar::secant_f(v, p, &sc)?);
        secant_lip.observe((fu - fv).abs(), 0.5 * (u - v).abs());
    }
    out.checks.push(lipschitz.finish());
    out.checks.push(secant_lip.finish());

    // three-term identity of the logarithm
    let mut three = Worst::le("scalar.log_product_identity", TAG_LOG, 1e-10);
    for _ in 0..cfg.scalar_points / 4 {
        let u: f64 = 100.0 - rng.random_range(0.0..100.0);
        let v: f64 = 100.0 - rng.random_range(0.0..100.0);
        let lhs = scalar::log_phi(u * v, p)?;
        let rhs = scalar::log_phi(u, p)? + scalar::log_phi(v, p)? + (u - 1.0) * (v - 1.0);
        three.observe((lhs - rhs).abs() / lhs.abs().max(1.0), 0.0);
    }
    out.checks.push(three.finish());

    // derivatives by central differences
    let mut deriv = Worst::le("scalar.exp_derivative_matches_difference", TAG_EXP, 1e-6);
    let mut deriv_range = Worst::le("scalar.exp_derivative_below_one", TAG_EXP, 0.0);
    let mut secant_slope = Worst::le("scalar.secant_slope_below_half", TAG_SECANT, 1e-9);
    let mut secant_incr = Worst::ge("scalar.secant_increasing", TAG_SECANT, 0.0);
    let h = 1e-6;
    let n_grid = 10_001;
    let mut prev = scalar::secant_f(-50.0, p, &sc)?;
    for i in 0..n_grid {
        let u = -50.0 + 100.0 * i as f64 / (n_grid - 1) as f64;
        let d = scalar::exp_phi_derivative(u, p, &sc)?;
        let fd = (scalar::exp_phi(u + h, p, &sc)? - scalar::exp_phi(u - h, p, &sc)?) / (2.0 * h);
        deriv.observe((d - fd).abs(), 0.0);
        deriv_range.observe(d, 1.0 - f64::EPSILON);
        let hs = 1e-4;
        let slope = (scalar::secant_f(u + hs, p, &sc)? - scalar::secant_f(u - hs, p, &sc)?) / (2.0 * hs);
        secant_slope.observe(slope, 0.5);
        let f = scalar::secant_f(u, p, &sc)?;
        if i > 0 {
            secant_incr.observe(f - prev, -1e-15);
        }
        prev = f;
    }
    out.checks.extend([
        deriv.finish(),
        deriv_range.finish(),
        secant_slope.finish(),
        secant_incr.finish(),
        Check::le(
            "scalar.secant_limit_minus_infinity",
            TAG_SECANT,
            scalar::secant_f(-1e6, p, &sc)?,
            0.0,
            1e-3,
        ),
        Check::close(
            "scalar.secant_limit_plus_infinity",
            TAG_SECANT,
            scalar::secant_f(1e6, p, &sc)?,
            1.0,
            1e-3,
        ),
    ]);

    // two-argument function exp_φ(t log_φ(λ) + μ)
    let mut ft_lower = Worst::ge("scalar.two_argument_lower_bound", TAG_FT, 1e-9);
    let mut ft_upper = Worst::le("scalar.two_argument_upper_bound", TAG_FT, 1e-9);
    let mut ft_incr_lam = Worst::ge("scalar.two_argument_increasing_first", TAG_FT, 0.0);
    let mut ft_incr_mu = Worst::ge("scalar.two_argument_increasing_second", TAG_FT, 0.0);
    for _ in 0..cfg.scalar_points / 5 {
        let t: f64 = 1.0 - rng.random_range(0.0..1.0);
        let lam: f64 = (rng.random_range(-8.0..8.0f64)).exp();
        let mu: f64 = rng.random_range(-5.0..5.0);
        let f = scalar::f_t(t, lam, mu, p, &sc)?;
        if let Some(b) = scalar::ft_lower_bound(t, lam, mu) {
            ft_lower.observe(f / (1.0 + b), b / (1.0 + b));
        }
        if let Some(b) = scalar::ft_upper_bound(t, lam, mu) {
            if b.is_finite() {
                ft_upper.observe(f / (1.0 + b), b / (1.0 + b));
            }
        }
        let t2: f64 = rng.random_range(0.05..3.0);
        let f2 = scalar::f_t(t2, lam * 1.25, mu, p, &sc)?;
        ft_incr_lam.observe(f2 - scalar::f_t(t2, lam, mu, p, &sc)?, f64::MIN_POSITIVE);
        let f3 = scalar::f_t(t2, lam, mu + 0.25, p, &sc)?;
        ft_incr_mu.observe(f3 - scalar::f_t(t2, lam, mu, p, &sc)?, f64::MIN_POSITIVE);
    }
    out.checks.extend([
        ft_lower.finish(),
        ft_upper.finish(),
        ft_incr_lam.finish(),
        ft_incr_mu.finish(),
    ]);

    // constant of the log-square inequality
    let grid = scalar::default_constant_grid();
    let scan = scalar::scan_constant_c(&grid)?;
    let mut pointwise = Worst::le("scalar.log_square_inequality", TAG_LOGSQ, 0.0);
    let mut lemma = Worst::ge("scalar.log_square_auxiliary_inequality", TAG_LOGSQ, 1e-12);
    for &u in &grid {
        pointwise.observe(scalar::log_square_excess(u), scalar::LOG_SQUARE_CONSTANT);
        lemma.observe(scalar::log_square_lemma_gap(u), 0.0);
    }
    out.checks.extend([
        Check::lt("scalar.constant_scan_below", TAG_LOGSQ, scan.sup, scalar::LOG_SQUARE_CONSTANT, 0.0),
        Check::ge("scalar.constant_scan_above_unit_value", TAG_LOGSQ, scan.sup, LN_2 * LN_2, 0.0),
        Check::ge("scalar.constant_scan_lower", TAG_LOGSQ, scan.sup, 0.48, 0.0),
        pointwise.finish(),
        lemma.finish(),
    ]);
    out.results.insert(
        "constant_scan".into(),
        json!({ "sup": scan.sup, "argmax": scan.argmax, "points": scan.points }),
    );
    Ok(out)
}

const TAG_EIG: &str = "spectral-decomposition";
const TAG_FN: &str = "functional-calculus";
const TAG_ORDER: &str = "loewner-order";
const TAG_MONO: &str = "operator-monotonicity";
const TAG_LAB: &str = "monotonicity-counterexamples";

/// Linear algebra, the matrix inequalities of `log_φ`, and the
/// counterexample lab.
pub fn operator_suite(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let p = DeformationParameter::UNIT;
    let sc = ScalarEvalConfig::default();
    let mut out = SuiteOutcome::new();
    let mut rng = sub_rng(cfg.seed, 2);

    let mut recon = Worst::le("operator.eigen_reconstruction", TAG_EIG, 1e-10);
    let mut ortho = Worst::le("operator.eigen_orthonormality", TAG_EIG, 1e-10);
    let mut spectral = Worst::le("operator.spectral_mapping", TAG_FN, 1e-9);
    let mut commute = Worst::le("operator.function_commutes", TAG_FN, 1e-9);
    let mut round_trip = Worst::le("operator.exp_log_round_trip", TAG_FN, 1e-8);
    let mut identity = Worst::le("operator.identity_function", TAG_FN, 1e-10);
    let mut rank_one = Worst::ge("operator.rank_one_order", TAG_ORDER, 0.0);
    let mut dims: Vec<usize> = (0..cfg.trials).map(|i| 2 + i % 15).collect();
    dims.push(64);
    for &n in &dims {
        let a = random::hermitian(&mut rng, n, 3.0);
        let eig = a.eig()?;
        let radius = eig.eigenvalues[0].abs().max(eig.eigenvalues[n - 1].abs());
        recon.observe(eig.reconstruction_residual(&a)? / (1.0 + radius), 0.0);
        ortho.observe(eig.orthonormality_residual(), 0.0);

        let ea = a.try_map_spectrum(|x| scalar::exp_phi(x, p, &sc))?;
        let mut got = ea.eigenvalues()?;
        let mut want = eig
            .eigenvalues
            .iter()
            .map(|&x| scalar::exp_phi(x, p, &sc))
            .collect::<Result<Vec<f64>>>()?;
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        let scale = 1.0 + want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mapping_err = got.iter().zip(&want).fold(0.0f64, |m, (g, w)| m.max((g - w).abs()));
        spectral.observe(mapping_err / scale, 0.0);
        let (am, em) = (a.as_matrix(), ea.as_matrix());
        let comm = (am * em - em * am).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        commute.observe(comm / (scale * (1.0 + radius)), 0.0);

        if n <= 8 {
            let back = ea.try_map_spectrum(|v| scalar::log_phi(v, p))?;
            round_trip.observe(back.max_abs_diff(&a)?, 0.0);
        }
        identity.observe(a.map_spectrum(|x| x)?.max_abs_diff(&a)? / (1.0 + radius), 0.0);
        let w = random::unit_vector(&mut rng, n);
        let b = a.add(&HermitianMatrix::outer(&w).scale(rng.random_range(0.0..2.0)))?;
        rank_one.observe(if psd_order_leq(&a, &b, PSD_TOL)? { 1.0 } else { 0.0 }, 1.0);
    }
    out.checks.extend([
        recon.finish(),
        ortho.finish(),
        spectral.finish(),
        commute.finish(),
        round_trip.finish(),
        identity.finish(),
        rank_one.finish(),
    ]);

    // 2×2 Loewner determinants
    let log_phi = DeformedFn::new(LabFunction::LogPhi, p);
    let u_minus = DeformedFn::new(LabFunction::UMinusExpPhi, p);
    let mut log_det = Worst::ge("operator.log_loewner_determinant", TAG_MONO, 1e-12);
    let mut symmetric = Worst::le("operator.loewner_symmetry", TAG_ORDER, 0.0);
    let mut continuity = Worst::le("operator.loewner_continuity", TAG_ORDER, 1e-6);
    for _ in 0..cfg.trials * 10 {
        let u: f64 = (rng.random_range(-6.0..6.0f64)).exp();
        let v: f64 = (rng.random_range(-6.0..6.0f64)).exp();
        let d = loewner2_det(&log_phi, u, v)?;
        log_det.observe(d.determinant, 0.0);
        let x: f64 = rng.random_range(-5.0..5.0);
        let y: f64 = rng.random_range(-5.0..5.0);
        let (a, b) = (loewner2_det(&u_minus, x, y)?, loewner2_det(&u_minus, y, x)?);
        symmetric.observe((a.determinant - b.determinant).abs(), 0.0);
        for delta in [2e-7, 5e-8] {
            let near = loewner2_det(&u_minus, x, x + delta)?;
            let limit = u_minus.derivative(x + 0.5 * delta)?;
            continuity.observe((near.divided_difference - limit).abs(), 0.0);
            continuity.observe(near.determinant.abs(), 0.0);
        }
    }
    out.checks.extend([log_det.finish(), symmetric.finish(), continuity.finish()]);

    // operator monotonicity and concavity of log_φ
    let mono = lab::monotone_sanity(&log_phi, cfg.monotone_trials, cfg.seed, &[], 1e-8)?;
    let conc = lab::concavity_sanity(&log_phi, cfg.monotone_trials, cfg.seed.wrapping_add(1), 1e-8)?;
    let ident = DeformedFn::new(LabFunction::Identity, p);
    let ident_mono = lab::monotone_sanity(&ident, cfg.monotone_trials / 5 + 1, cfg.seed, &[], 1e-10)?;
    out.checks.extend([
        Check::close("operator.log_monotone_failures", TAG_MONO, mono.failures as f64, 0.0, 0.0)
            .with_note(format!("{} trials", mono.trials)),
        Check::ge("operator.log_monotone_slack", TAG_MONO, mono.worst_slack, 0.0, 1e-8),
        Check::close("operator.log_concave_failures", TAG_MONO, conc.failures as f64, 0.0, 0.0)
            .with_note(format!("{} trials", conc.trials)),
        Check::ge("operator.log_concave_slack", TAG_MONO, conc.worst_slack, 0.0, 1e-8),
        Check::close("operator.identity_monotone_failures", TAG_MONO, ident_mono.failures as f64, 0.0, 0.0),
    ]);
    out.results.insert(
        "log_phi_sanity".into(),
        json!({
            "monotone_trials": mono.trials,
            "monotone_worst_slack": mono.worst_slack,
            "concave_trials": conc.trials,
            "concave_worst_slack": conc.worst_slack,
        }),
    );

    let (lab_checks, lab_results) = lab_checks(cfg, &sc)?;
    out.checks.extend(lab_checks);
    out.results.insert("lab".into(), lab_results);
    Ok(out)
}

/// Zero of the closed-form Loewner determinant in `y` at `ε = e − 1`, by
/// bisection on `[0.5λ, 2λ]`.
fn determinant_zero(lambda: DeformationParameter, sc: &ScalarEvalConfig) -> Result<f64> {
    let eps = E - 1.0;
    let d = |y: f64| lab::appendix_point(y, eps, lambda, sc).map(|pt| pt.closed_form_determinant);
    let (mut lo, mut hi) = (0.5 * lambda.value(), 2.0 * lambda.value());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn lab_checks(cfg: &VerifyConfig, sc: &ScalarEvalConfig) -> Result<(Vec<Check>, Value)> {
    let mut checks = Vec::new();
    let p = DeformationParameter::UNIT;
    let eps = E - 1.0;

    let threshold = lab::violation_threshold(p);
    let zero = determinant_zero(p, sc)?;
    checks.push(Check::close("lab.threshold_matches_determinant_zero", TAG_LAB, threshold, zero, 1e-5));
    let doubled = lab::violation_threshold(DeformationParameter::new(2.0)?);
    checks.push(Check::close("lab.threshold_linear_in_lambda", TAG_LAB, doubled, 2.0 * threshold, 0.0));

    let below = lab::appendix_point(0.5, eps, p, sc)?;
    let above = lab::appendix_point(1.3, eps, p, sc)?;
    checks.extend([
        Check::close("lab.appendix_determinant", TAG_LAB, below.closed_form_determinant, -0.00673, 1e-5),
        Check::lt("lab.appendix_determinant_negative_below", TAG_LAB, below.pair.determinant, 0.0, 0.0),
        Check::ge("lab.appendix_determinant_positive_above", TAG_LAB, above.pair.determinant, f64::MIN_POSITIVE, 0.0),
    ]);
    let mut agree = Worst::le("lab.closed_form_matches_divided_differences", TAG_LAB, 1e-10);
    let mut gap = Worst::le("lab.parametrization_identity", TAG_LAB, 1e-10);
    let mut rng = sub_rng(cfg.seed, 3);
    for _ in 0..cfg.trials {
        let y: f64 = (rng.random_range(-4.0..2.0f64)).exp();
        let e: f64 = (rng.random_range(-3.0..2.0f64)).exp();
        let pt = lab::appendix_point(y, e, p, sc)?;
        agree.observe((pt.closed_form_determinant - pt.pair.determinant).abs(), 0.0);
        gap.observe(((pt.u - pt.v) - (e * y + e.ln_1p())).abs(), 0.0);
    }
    checks.extend([agree.finish(), gap.finish()]);

    let mut certs = Vec::new();
    for &lam in &[0.5, 1.0, 2.0] {
        let lambda = DeformationParameter::new(lam)?;
        let scaled = lab::appendix_point(0.5 * lam, eps, lambda, sc)?;
        checks.push(Check::close(
            format!("lab.determinant_scale_invariant[lambda={lam}]"),
            TAG_LAB,
            scaled.closed_form_determinant,
            below.closed_form_determinant,
            1e-12,
        ));
        for function in [LabFunction::UMinusExpPhi, LabFunction::LogExpPhi] {
            let search = SearchConfig {
                seed: cfg.seed,
                ..SearchConfig::with_lambda(lambda)
            };
            let name = format!("lab.certificate[{function},lambda={lam}]");
            match lab::build_counterexample(function, &search, sc) {
                Ok(cert) => {
                    let re = cert.revalidate(sc)?;
                    checks.push(Check::le(format!("{name}.violation"), TAG_LAB, re.violation, -cert.violation_tol, 0.0));
                    checks.push(Check::holds(format!("{name}.ordered"), TAG_LAB, re.ordered));
                    certs.push(json!({
                        "function": function.name(),
                        "lambda": lam,
                        "violation": re.violation,
                        "order_gap": re.order_gap,
                        "perturbation": cert.perturbation,
                        "y": cert.y,
                    }));
                    if lam == 1.0 && function == LabFunction::UMinusExpPhi {
                        let near = lab::pairs_near(&cert, 8, cfg.seed)?;
                        let f = DeformedFn::new(function, lambda);
                        let report = lab::monotone_sanity(&f, 0, cfg.seed, &near, 1e-8)?;
                        checks.push(Check::ge(
                            "lab.monotone_sanity_detects_certificate",
                            TAG_LAB,
                            report.failures as f64,
                            1.0,
                            0.0,
                        ));
                    }
                }
                Err(Error::SearchExhausted { best_violation }) => {
                    checks.push(Check::le(format!("{name}.violation"), TAG_LAB, best_violation, -1e-6, 0.0)
                        .with_note("search exhausted"));
                }
                Err(e) => return Err(e),
            }
        }
    }
    let results = json!({
        "threshold": threshold,
        "determinant_zero": zero,
        "appendix_determinant": below.closed_form_determinant,
        "certificates": certs,
    });
    Ok((checks, results))
}

const TAG_NORM: &str = "normalization";
const TAG_BOUNDS: &str = "normalization-bounds";
const TAG_STATE: &str = "vector-state";
const TAG_ESCORT: &str = "escort-state";
const TAG_TANGENT: &str = "tangent";
const TAG_DIAG: &str = "commutative-reduction";

/// The finite-dimensional model: normalization, bounds, states, escorts,
/// derivatives and the commutative special case.
pub fn state_suite(cfg: &VerifyConfig) -> Result<SuiteOutcome> {
    let mc = ModelConfig::default();
    let mut out = SuiteOutcome::new();
    let mut rng = sub_rng(cfg.seed, 4);

    let mut norm = Worst::le("state.normalization_residual", TAG_NORM, 1e-11);
    let mut nonneg = Worst::ge("state.alpha_nonnegative", TAG_NORM, 1e-10);
    let mut shift = Worst::le("state.shift_covariance", TAG_NORM, 1e-10);
    let mut convex = Worst::le("state.midpoint_convexity", TAG_NORM, 1e-10);
    let mut decreasing = Worst::ge("state.normalization_decreasing", TAG_NORM, 0.0);
    let mut bound_failures = 0usize;
    let mut bound_checks = 0usize;
    let mut bound_skipped = 0usize;
    let mut worst_bound: Option<Check> = None;
    let mut trace_sigma = Worst::le("state.sigma_trace", TAG_STATE, 1e-10);
    let mut trace_y = Worst::le("state.y_normalization", TAG_STATE, 1e-11);
    let mut separating = Worst::ge("state.sigma_positive_definite", TAG_STATE, 0.0);
    let mut recover = Worst::le("state.recover_y", TAG_STATE, 1e-8);
    let mut injective = Worst::ge("state.distinct_directions_distinct_states", TAG_STATE, 1e-8);
    let mut z_range = Worst::le("state.escort_normalizer_at_most_half", TAG_ESCORT, 1e-15);
    let mut z_pos = Worst::ge("state.escort_normalizer_positive", TAG_ESCORT, 0.0);
    let mut escort_trace = Worst::le("state.escort_trace", TAG_ESCORT, 1e-10);
    let mut phi_lo = Worst::ge("state.phi_y_positive", TAG_ESCORT, 0.0);
    let mut phi_hi = Worst::le("state.phi_y_below_one", TAG_ESCORT, 0.0);
    let mut deriv = Worst::le("state.alpha_derivative_matches_difference", TAG_TANGENT, 1e-6);
    let mut deriv_zero = Worst::le("state.alpha_derivative_vanishes_at_zero", TAG_TANGENT, 1e-12);
    let mut deriv_mono = Worst::ge("state.alpha_derivative_nondecreasing", TAG_TANGENT, 1e-12);
    let mut tangent = Worst::le("state.tangent_matches_difference", TAG_TANGENT, 1e-5);
    let mut tangent_unit = Worst::le("state.tangent_of_identity_vanishes", TAG_TANGENT, 1e-10);

    let h = 1e-4;
    for i in 0..cfg.trials {
        let n = 2 + i % 7;
        let rho = random::density(&mut rng, n)?;
        let scale = rng.random_range(0.1..2.0);
        let d = random::direction(&mut rng, &rho, scale)?;

        let alpha = state::solve_alpha(&d, &mc)?;
        norm.observe((state::normalization_value(&d, alpha, &mc)? - 1.0).abs(), 0.0);
        nonneg.observe(alpha, 0.0);

        let c: f64 = rng.random_range(-10.0..10.0);
        let shifted = state::solve_alpha_uncentered(&rho, &d.matrix().shift(c), &mc)?;
        shift.observe((shifted - alpha - c).abs(), 0.0);

        let (t1, t2): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let a1 = state::solve_alpha(&d.scaled(t1), &mc)?;
        let a2 = state::solve_alpha(&d.scaled(t2), &mc)?;
        let am = state::solve_alpha(&d.scaled(0.5 * (t1 + t2)), &mc)?;
        convex.observe(am, 0.5 * (a1 + a2));

        let b1: f64 = rng.random_range(-3.0..3.0);
        let b2 = b1 + rng.random_range(1e-3..1.0);
        let (n1, n2) = (
            state::normalization_value(&d, b1, &mc)?,
            state::normalization_value(&d, b2, &mc)?,
        );
        decreasing.observe(n1 - n2, f64::MIN_POSITIVE);

        let betas: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
        let bounds = state::verify_alpha_bounds(&d, &betas, &mc)?;
        for check in bounds.checks {
            match check.status {
                crate::report::CheckStatus::Skipped => bound_skipped += 1,
                crate::report::CheckStatus::Fail => {
                    bound_failures += 1;
                    bound_checks += 1;
                    worst_bound.get_or_insert(check);
                }
                crate::report::CheckStatus::Pass => bound_checks += 1,
            }
        }

        let mp = state::make_state(&rho, &d, &mc)?;
        trace_sigma.observe((mp.sigma.trace() - 1.0).abs(), 0.0);
        trace_y.observe((rho.matrix().trace_product(&mp.y)? - 1.0).abs(), 0.0);
        separating.observe(mp.sigma.min_eigenvalue()?, f64::MIN_POSITIVE);
        recover.observe(state::recover_y(&rho, &mp.sigma)?.max_abs_diff(&mp.y)?, 0.0);
        let other = random::direction(&mut rng, &rho, 1.0)?;
        let mp2 = state::make_state(&rho, &other, &mc)?;
        injective.observe(mp.sigma.max_abs_diff(&mp2.sigma)?, 0.0);

        let esc = state::escort(&rho, &mp, &mc)?;
        z_range.observe(esc.z, 0.5);
        z_pos.observe(esc.z, f64::MIN_POSITIVE);
        escort_trace.observe((esc.rho_tilde.trace() - 1.0).abs(), 0.0);
        let phi = esc.phi_y.eigenvalues()?;
        phi_lo.observe(phi[0], f64::MIN_POSITIVE);
        phi_hi.observe(phi[n - 1], 1.0 - f64::EPSILON);

        if i < 20 {
            deriv_zero.observe(state::alpha_derivative(&rho, &d, 0.0, &mc)?.abs(), 0.0);
            let mut ts: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
            ts.sort_by(f64::total_cmp);
            let mut prev = f64::NEG_INFINITY;
            for &t in &ts {
                let da = state::alpha_derivative(&rho, &d, t, &mc)?;
                let fd = (state::solve_alpha(&d.scaled(t + h), &mc)? - state::solve_alpha(&d.scaled(t - h), &mc)?)
                    / (2.0 * h);
                deriv.observe((da - fd).abs(), 0.0);
                deriv_mono.observe(da, prev);
                prev = da;
            }
        }

        if i < 10 {
            let mut probes: Vec<HermitianMatrix> = (0..5).map(|_| random::hermitian(&mut rng, n, 1.0)).collect();
            probes.push(HermitianMatrix::identity(n));
            let t: f64 = rng.random_range(-2.0..2.0);
            let grid = [t - h, t, t + h];
            let curve = state::geodesic_sample(&rho, &d, &grid, &probes, &mc)?;
            for (j, _) in probes.iter().enumerate() {
                let fd = (curve[2].omega[j] - curve[0].omega[j]) / (2.0 * h);
                if j < 5 {
                    tangent.observe((curve[1].tangent[j] - fd).abs(), 0.0);
                } else {
                    tangent_unit.observe(curve[1].tangent[j].abs(), 0.0);
                }
            }
        }
    }
    let bounds_check = match worst_bound {
        Some(first) => Check::close("state.alpha_bounds", TAG_BOUNDS, bound_failures as f64, 0.0, 0.0)
            .with_note(format!("first failure: {} ({} <> {})", first.name, first.lhs, first.rhs)),
        None => Check::close("state.alpha_bounds", TAG_BOUNDS, 0.0, 0.0, 0.0)
            .with_note(format!("{bound_checks} applicable, {bound_skipped} skipped")),
    };
    out.checks.extend([
        norm.finish(),
        nonneg.finish(),
        shift.finish(),
        convex.finish(),
        decreasing.finish(),
        bounds_check,
        trace_sigma.finish(),
        trace_y.finish(),
        separating.finish(),
        recover.finish(),
        injective.finish(),
        z_range.finish(),
        z_pos.finish(),
        escort_trace.finish(),
        phi_lo.finish(),
        phi_hi.finish(),
        deriv.finish(),
        deriv_zero.finish(),
        deriv_mono.finish(),
        tangent.finish(),
        tangent_unit.finish(),
    ]);

    // reference qubit against the bisection oracle
    let qubit = FaithfulDensity::maximally_mixed(2);
    let qd = Direction::new(&qubit, HermitianMatrix::diagonal(&[1.0, -1.0]))?;
    let q_alpha = state::solve_alpha(&qd, &mc)?;
    let q_oracle = state::classical_oracle_alpha(&[0.5, 0.5], &[1.0, -1.0], &mc)?;
    out.checks.extend([
        Check::close("state.qubit_alpha_reference", TAG_NORM, q_alpha, 0.1299, 5e-4),
        Check::close("state.qubit_alpha_oracle", TAG_NORM, q_alpha, q_oracle, 1e-12),
    ]);
    out.results.insert("qubit_alpha".into(), json!(q_alpha));

    let (diag_checks, diag_count) = diagonal_checks(cfg, &mc)?;
    out.checks.extend(diag_checks);
    out.results.insert("diagonal_instances".into(), json!(diag_count));
    Ok(out)
}

/// Simultaneously diagonal `(ρ, K)` against the commutative pipeline.
fn diagonal_checks(cfg: &VerifyConfig, mc: &ModelConfig) -> Result<(Vec<Check>, usize)> {
    let mut rng = sub_rng(cfg.seed, 5);
    let count = cfg.trials.div_ceil(2);
    let mut alpha = Worst::le("state.diagonal_alpha", TAG_DIAG, 1e-10);
    let mut sigma = Worst::le("state.diagonal_sigma", TAG_DIAG, 1e-10);
    let mut esc = Worst::le("state.diagonal_escort", TAG_DIAG, 1e-10);
    let mut deriv = Worst::le("state.diagonal_derivative", TAG_DIAG, 1e-10);
    for i in 0..count {
        let n = 2 + i % 7;
        let p = random::probability(&mut rng, n);
        let scale = rng.random_range(0.1..3.0);
        let k = random::centered_values(&mut rng, &p, scale);
        let classical = state::classical_point(&p, &k, mc)?;

        let rho = FaithfulDensity::new(HermitianMatrix::diagonal(&p).scale(1.0 / p.iter().sum::<f64>()))?;
        let d = Direction::new(&rho, HermitianMatrix::diagonal(&k))?;
        let mp = state::make_state(&rho, &d, mc)?;
        let e = state::escort(&rho, &mp, mc)?;
        let da = state::alpha_derivative(&rho, &d, 1.0, mc)?;
        alpha.observe((mp.alpha - classical.alpha).abs(), 0.0);
        sigma.observe(mp.sigma.max_abs_diff(&HermitianMatrix::diagonal(&classical.sigma))?, 0.0);
        esc.observe(e.rho_tilde.max_abs_diff(&HermitianMatrix::diagonal(&classical.escort))?, 0.0);
        deriv.observe((da - classical.dalpha_dt).abs(), 0.0);
    }
    Ok((vec![alpha.finish(), sigma.finish(), esc.finish(), deriv.finish()], count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Scalar, Suite::Operator, Suite::State, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("lab".parse::<Suite>().is_err());
    }

    #[test]
    fn worst_keeps_largest_margin() {
        let mut w = Worst::le("x", "t", 0.0);
        w.observe(1.0, 2.0);
        w.observe(3.0, 2.5);
        w.observe(0.0, 5.0);
        let c = w.finish();
        assert!(c.failed());
        assert_eq!((c.lhs, c.rhs), (3.0, 2.5));
        let mut nan = Worst::ge("y", "t", 0.0);
        nan.observe(1.0, 0.0);
        nan.observe(f64::NAN, 0.0);
        assert!(nan.finish().failed());
        assert!(Worst::new("z", "t", Relation::Eq, 0.0).finish().status == crate::report::CheckStatus::Skipped);
    }

    #[test]
    fn rejects_empty_samples() {
        let cfg = VerifyConfig {
            trials: 0,
            ..VerifyConfig::default()
        };
        assert!(run(Suite::Scalar, &cfg).is_err());
    }
}
