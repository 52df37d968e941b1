//! The weight Q: pointwise evaluation, spherical means q_{x0}(r), ball
//! means and their liminf proxy Q0, and the finite-mean-oscillation
//! estimator.
//!
//! Conventions for extended values follow the usual potential-theory
//! rules: a/inf = 0 for a != inf, a/0 = inf for a > 0, 0 * inf = 0. A
//! sampled +inf is recorded and the mean reported as +inf; NaN is always
//! an error naming the sample point.

use crate::error::{Error, Result};
use crate::expr::RadialExpr;
use crate::geometry::{self, SphericalRing};
use crate::quadrature::{self, SingularEndpoints};
use serde::Serialize;
use std::sync::Arc;

/// Default Monte Carlo budget: 1e5 points keeps standard errors at or
/// below one percent on smooth integrands.
pub const DEFAULT_BUDGET: usize = 100_000;

/// Default seed; the CLI overrides it via RINGBOUNDS_SEED or --seed.
pub const DEFAULT_SEED: u64 = 42;

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nonnegative measurable weight: a point evaluator, plus the exact
/// radial profile r -> q(r) when the weight is radial about a declared
/// center (`None` center means the origin in any dimension).
#[derive(Clone)]
pub struct WeightField {
    label: String,
    evaluator: PointFn,
    radial_profile: Option<RadialFn>,
    center: Option<Vec<f64>>,
}

impl std::fmt::Debug for WeightField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightField")
            .field("label", &self.label)
            .field("radial", &self.radial_profile.is_some())
            .finish()
    }
}

impl WeightField {
    /// Weight from an arbitrary point evaluator, no radial structure.
    pub fn from_evaluator<F>(label: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        WeightField {
            label: label.into(),
            evaluator: Arc::new(evaluator),
            radial_profile: None,
            center: None,
        }
    }

    /// Radial weight about the origin; the evaluator is derived from the
    /// profile.
    pub fn from_profile<F>(label: impl Into<String>, profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let profile: RadialFn = Arc::new(profile);
        let eval_profile = Arc::clone(&profile);
        WeightField {
            label: label.into(),
            evaluator: Arc::new(move |x: &[f64]| eval_profile(geometry::norm(x))),
            radial_profile: Some(profile),
            center: None,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_profile(format!("constant({value})"), move |_| value)
    }

    /// scale * r^exponent. At r = 0 the conventions give +inf for
    /// negative exponents and 0 for positive ones.
    pub fn radial_power(scale: f64, exponent: f64) -> Self {
        Self::from_profile(format!("power({scale}*r^{exponent})"), move |r| {
            if r == 0.0 {
                if exponent < 0.0 {
                    f64::INFINITY
                } else if exponent > 0.0 {
                    0.0
                } else {
                    scale
                }
            } else {
                scale * r.powf(exponent)
            }
        })
    }

    /// log(1/r), clamped at 0 outside the unit ball so the weight stays
    /// nonnegative.
    pub fn radial_log() -> Self {
        Self::from_profile("log(1/r)", |r| {
            if r == 0.0 {
                f64::INFINITY
            } else {
                (1.0 / r).ln().max(0.0)
            }
        })
    }

    /// Radial weight given by a parsed expression in r; negative values
    /// are clamped to 0 to honor the nonnegativity invariant.
    pub fn from_expression(expr: RadialExpr) -> Self {
        let label = format!("expr({})", expr.source());
        Self::from_profile(label, move |r| expr.eval(r).max(0.0))
    }

    /// Moves the center of radiality away from the origin.
    pub fn with_center(mut self, center: Vec<f64>) -> Self {
        let profile = self
            .radial_profile
            .clone()
            .expect("with_center requires a radial profile");
        let c = center.clone();
        self.evaluator = Arc::new(move |x: &[f64]| profile(geometry::dist(x, &c)));
        self.center = Some(center);
        self
    }

    /// Drops the radial profile, forcing Monte Carlo paths; used by tests
    /// to cross-check the closed-form routes.
    pub fn without_profile(mut self) -> Self {
        self.radial_profile = None;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn has_profile(&self) -> bool {
        self.radial_profile.is_some()
    }

    /// The radial profile value q(r), when the weight is radial.
    pub fn profile(&self, r: f64) -> Option<f64> {
        self.radial_profile.as_ref().map(|p| p(r))
    }

    /// True when the declared center of radiality matches `x0`.
    pub fn is_radial_about(&self, x0: &[f64]) -> bool {
        if self.radial_profile.is_none() {
            return false;
        }
        match &self.center {
            None => x0.iter().all(|&c| c == 0.0),
            Some(center) => center.len() == x0.len() && geometry::dist(center, x0) == 0.0,
        }
    }
}

/// How a mean was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeanMethod {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// A spherical or ball mean with its sampling pedigree.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanReport {
    pub value: f64,
    pub method: MeanMethod,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanReport {
    fn closed_form(value: f64) -> Self {
        MeanReport {
            value,
            method: MeanMethod::ClosedForm,
            std_error: 0.0,
            samples: 1,
        }
    }
}

/// Surface average of Q over S(x0, r). Uses the radial profile when the
/// weight is radial about x0 (then the mean is the profile value itself);
/// otherwise uniform sphere sampling with a reported standard error.
pub fn spherical_mean(
    q: &WeightField,
    x0: &[f64],
    r: f64,
    budget: usize,
    seed: u64,
) -> Result<MeanReport> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("sphere radius must be positive, got {r}")));
    }
    if q.is_radial_about(x0) {
        let value = q.profile(r).expect("radial weight has a profile");
        if value.is_nan() {
            return Err(Error::NanSample { point: vec![r] });
        }
        return Ok(MeanReport::closed_form(value));
    }
    let (value, std_error, samples) =
        quadrature::sphere_mean(&|x: &[f64]| q.eval(x), x0, r, budget, seed)?;
    Ok(MeanReport {
        value,
        method: MeanMethod::MonteCarlo,
        std_error,
        samples,
    })
}

/// Absolute quadrature tolerance for a shell integral over (0, eps),
/// scaled to the integrand's observed magnitude so the relative accuracy
/// stays near 1e-12 regardless of how small eps^n is.
fn shell_tol<F: Fn(f64) -> f64>(integrand: &F, eps: f64) -> f64 {
    let mut magnitude = 0.0f64;
    for k in 1..8 {
        let v = integrand(eps * k as f64 / 8.0).abs();
        if v.is_finite() {
            magnitude = magnitude.max(v);
        }
    }
    (1e-12 * magnitude * eps).max(1e-300)
}

/// Ball mean (1 / (Omega_n eps^n)) * integral of Q over B(x0, eps). For
/// radial weights this reduces through the shell formula to the 1D
/// integral n/eps^n * int_0^eps q(rho) rho^{n-1} d rho.
pub fn ball_mean(
    q: &WeightField,
    x0: &[f64],
    eps: f64,
    budget: usize,
    seed: u64,
) -> Result<MeanReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {eps}")));
    }
    let n = x0.len();
    if q.is_radial_about(x0) {
        let nf = n as f64;
        let integrand = |rho: f64| q.profile(rho).unwrap() * rho.powf(nf - 1.0);
        let shell = quadrature::integrate_1d(
            &integrand,
            0.0,
            eps,
            shell_tol(&integrand, eps),
            SingularEndpoints::lower(),
        );
        return match shell {
            Ok(res) => Ok(MeanReport::closed_form(nf / eps.powf(nf) * res.value)),
            // profile hit +inf inside the shell: the mean is +inf by
            // convention; NaN stays an error
            Err(Error::NonFiniteValue { x, value }) if value.is_infinite() => {
                let _ = x;
                Ok(MeanReport::closed_form(f64::INFINITY))
            }
            Err(e) => Err(e),
        };
    }
    let (value, std_error, samples) =
        quadrature::ball_mean_mc(&|x: &[f64]| q.eval(x), x0, eps, budget, seed)?;
    Ok(MeanReport {
        value,
        method: MeanMethod::MonteCarlo,
        std_error,
        samples,
    })
}

/// Liminf proxy for the ball means of Q at x0 over a finite decreasing
/// radius sequence, with the full table for monotonicity inspection.
#[derive(Debug, Clone, Serialize)]
pub struct Q0Report {
    /// Minimum of the ball means over the sequence.
    pub liminf_proxy: f64,
    /// (eps, ball mean) pairs in the order probed.
    pub table: Vec<(f64, f64)>,
    /// Set when the means increase monotonically and grow without bound
    /// across the probe range (the +inf trend flag).
    pub diverging: bool,
}

pub fn q0_estimate(
    q: &WeightField,
    x0: &[f64],
    eps_sequence: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Q0Report> {
    if eps_sequence.is_empty() {
        return Err(Error::Domain("eps sequence must be nonempty".into()));
    }
    for pair in eps_sequence.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::Domain(
                "eps sequence must be strictly decreasing".into(),
            ));
        }
    }
    if eps_sequence[eps_sequence.len() - 1] <= 0.0 {
        return Err(Error::Domain("eps values must be positive".into()));
    }

    let mut table = Vec::with_capacity(eps_sequence.len());
    for (k, &eps) in eps_sequence.iter().enumerate() {
        let mean = ball_mean(q, x0, eps, budget, seed.wrapping_add(k as u64))?;
        table.push((eps, mean.value));
    }
    let liminf_proxy = table
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    let increasing = table.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-12));
    let first = table[0].1;
    let last = table[table.len() - 1].1;
    let diverging = increasing && (last.is_infinite() || (first > 0.0 && last >= 10.0 * first));
    Ok(Q0Report {
        liminf_proxy,
        table,
        diverging,
    })
}

/// Mean oscillation (1 / (Omega_n eps^n)) * integral of |Q - mean| over
/// B(x0, eps). Two passes sharing one sample set: the ball mean first,
/// then the absolute deviation around it.
pub fn fmo_oscillation(
    q: &WeightField,
    x0: &[f64],
    eps: f64,
    budget: usize,
    seed: u64,
) -> Result<MeanReport> {
    let mean = ball_mean(q, x0, eps, budget, seed)?;
    if mean.value.is_infinite() {
        return Ok(MeanReport {
            value: f64::INFINITY,
            method: mean.method,
            std_error: 0.0,
            samples: mean.samples,
        });
    }
    let n = x0.len();
    let m = mean.value;
    if q.is_radial_about(x0) {
        let nf = n as f64;
        let integrand = |rho: f64| (q.profile(rho).unwrap() - m).abs() * rho.powf(nf - 1.0);
        let res = quadrature::integrate_1d(
            &integrand,
            0.0,
            eps,
            shell_tol(&integrand, eps),
            SingularEndpoints::lower(),
        );
        return match res {
            Ok(res) => Ok(MeanReport::closed_form(nf / eps.powf(nf) * res.value)),
            Err(Error::NonFiniteValue { value, .. }) if value.is_infinite() => {
                Ok(MeanReport::closed_form(f64::INFINITY))
            }
            Err(e) => Err(e),
        };
    }
    // shared sample set: the deterministic chunked generator reproduces
    // the first-pass points exactly for the same (budget, seed)
    let (value, std_error, samples) =
        quadrature::ball_mean_mc(&|x: &[f64]| (q.eval(x) - m).abs(), x0, eps, budget, seed)?;
    Ok(MeanReport {
        value,
        method: MeanMethod::MonteCarlo,
        std_error,
        samples,
    })
}

/// Outcome of the finite-mean-oscillation probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FmoVerdict {
    #[serde(rename = "finite")]
    Finite,
    #[serde(rename = "diverging")]
    Diverging,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for FmoVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FmoVerdict::Finite => write!(f, "finite"),
            FmoVerdict::Diverging => write!(f, "diverging"),
            FmoVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FmoReport {
    pub verdict: FmoVerdict,
    /// Max oscillation over the last half of the grid.
    pub limsup_proxy: f64,
    pub table: Vec<(f64, f64)>,
}

/// Classifies the oscillation trend on a decreasing geometric eps grid:
/// "diverging" when the sequence grows monotonically by a factor of at
/// least 2 per decade, "finite" when it stays within twice its median
/// over the last half of the grid, otherwise "inconclusive".
pub fn fmo_verdict(
    q: &WeightField,
    x0: &[f64],
    eps_grid: &[f64],
    budget: usize,
    seed: u64,
) -> Result<FmoReport> {
    if eps_grid.len() < 2 {
        return Err(Error::Domain("eps grid needs at least two radii".into()));
    }
    for pair in eps_grid.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::Domain("eps grid must be strictly decreasing".into()));
        }
    }
    let mut table = Vec::with_capacity(eps_grid.len());
    for (k, &eps) in eps_grid.iter().enumerate() {
        let osc = fmo_oscillation(q, x0, eps, budget, seed.wrapping_add(k as u64))?;
        table.push((eps, osc.value));
    }
    let values: Vec<f64> = table.iter().map(|&(_, v)| v).collect();
    let half = &values[values.len() / 2..];
    let mut sorted: Vec<f64> = half.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = sorted[sorted.len() / 2];
    let limsup_proxy = half.iter().fold(0.0f64, |a, &b| a.max(b));

    let any_infinite = values.iter().any(|v| v.is_infinite());
    let increasing = values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let decades = (eps_grid[0] / eps_grid[eps_grid.len() - 1]).log10();
    let growth_ok = any_infinite
        || (values[0] > 0.0 && values[values.len() - 1] / values[0] >= 2f64.powf(decades));
    // quadrature noise floor: oscillations this small count as zero
    let peak = values.iter().fold(0.0f64, |a, &b| if b.is_finite() { a.max(b) } else { a });
    let noise_floor = 1e-9 * (1.0 + peak);
    let verdict = if increasing && growth_ok && decades > 0.0 && peak > noise_floor {
        FmoVerdict::Diverging
    } else if !any_infinite && values.iter().all(|&v| v <= 2.0 * median + noise_floor) {
        FmoVerdict::Finite
    } else {
        FmoVerdict::Inconclusive
    };
    Ok(FmoReport {
        verdict,
        limsup_proxy,
        table,
    })
}

/// Geometric grid eps0 * ratio^k, k = 0..count-1, strictly decreasing for
/// ratio in (0, 1). The default liminf/limsup probe uses ratio 1/2 and 21
/// levels.
pub fn geometric_grid(eps0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| eps0 * ratio.powi(k as i32)).collect()
}

/// Shell moment omega_{n-1} * int q(rho) rho^{n-1} rho over a ring cell;
/// the building block used by the variational verifiers.
pub fn shell_integral(q: &WeightField, ring: &SphericalRing, tol: f64) -> Result<f64> {
    let n = ring.center.len() as f64;
    let omega = geometry::unit_sphere_area(ring.center.len())?;
    let profile = |rho: f64| {
        q.profile(rho)
            .expect("shell_integral requires a radial weight")
            * rho.powf(n - 1.0)
    };
    let res = quadrature::integrate_1d(&profile, ring.r1, ring.r2, tol, SingularEndpoints::none())?;
    Ok(omega * res.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spherical_mean_of_constant() {
        let q = WeightField::constant(5.0);
        let report = spherical_mean(&q, &[0.0; 3], 0.7, 10_000, 1).unwrap();
        assert_eq!(report.method, MeanMethod::ClosedForm);
        assert_eq!(report.value, 5.0);
        assert_eq!(report.std_error, 0.0);
    }

    #[test]
    fn spherical_mean_of_radial_square() {
        let q = WeightField::radial_power(1.0, 2.0);
        let report = spherical_mean(&q, &[0.0, 0.0], 0.5, 10_000, 1).unwrap();
        assert!((report.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn spherical_mean_of_direction_dependent_weight() {
        // x1^2/|x|^2 averages to 1/n by coordinate symmetry
        let q = WeightField::from_evaluator("x1^2/|x|^2", |x: &[f64]| {
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            x[0] * x[0] / norm2
        });
        let report = spherical_mean(&q, &[0.0; 3], 0.8, 100_000, 2).unwrap();
        assert_eq!(report.method, MeanMethod::MonteCarlo);
        let third = 1.0 / 3.0;
        assert!(
            (report.value - third).abs() <= 3.0 * report.std_error + 1e-12,
            "{} vs 1/3, sigma {}",
            report.value,
            report.std_error
        );
    }

    #[test]
    fn spherical_mean_rejects_bad_radius() {
        let q = WeightField::constant(1.0);
        assert!(spherical_mean(&q, &[0.0; 3], 0.0, 10_000, 1).is_err());
        assert!(spherical_mean(&q, &[0.0; 3], -1.0, 10_000, 1).is_err());
    }

    #[test]
    fn nan_sample_is_identified() {
        let q = WeightField::from_evaluator("nan", |_: &[f64]| f64::NAN);
        let err = spherical_mean(&q, &[0.0; 3], 0.5, 10_000, 1).unwrap_err();
        assert!(matches!(err, Error::NanSample { .. }));
    }

    #[test]
    fn ball_mean_of_constant_and_inverse_radius() {
        let q = WeightField::constant(2.5);
        let report = ball_mean(&q, &[0.0; 3], 0.3, 10_000, 1).unwrap();
        assert!((report.value - 2.5).abs() < 1e-10);

        // shell reduction: (3/eps^3) int_0^eps rho d rho = 1.5 / eps
        let q = WeightField::radial_power(1.0, -1.0);
        for eps in [0.5, 0.1, 0.02] {
            let report = ball_mean(&q, &[0.0; 3], eps, 10_000, 1).unwrap();
            assert!(
                (report.value - 1.5 / eps).abs() < 1e-8 * (1.5 / eps),
                "eps = {eps}: {}",
                report.value
            );
        }
    }

    #[test]
    fn ball_mean_of_radius_weight() {
        // 3 int_0^1 rho^3 d rho = 3/4
        let q = WeightField::radial_power(1.0, 1.0);
        let report = ball_mean(&q, &[0.0; 3], 1.0, 10_000, 1).unwrap();
        assert!((report.value - 0.75).abs() < 1e-10);
    }

    #[test]
    fn ball_mean_monte_carlo_agrees_with_shell() {
        let q = WeightField::radial_power(2.0, 0.5);
        let closed = ball_mean(&q, &[0.0; 3], 0.8, 10_000, 1).unwrap();
        let mc = ball_mean(&q.clone().without_profile(), &[0.0; 3], 0.8, 200_000, 3).unwrap();
        assert_eq!(mc.method, MeanMethod::MonteCarlo);
        assert!(
            (mc.value - closed.value).abs() <= 3.0 * mc.std_error,
            "{} vs {}",
            mc.value,
            closed.value
        );
    }

    #[test]
    fn q0_table_for_constant_weight() {
        let q = WeightField::constant(4.0);
        let grid = geometric_grid(0.5, 0.5, 10);
        let report = q0_estimate(&q, &[0.0; 3], &grid, 10_000, 1).unwrap();
        assert!((report.liminf_proxy - 4.0).abs() < 1e-10);
        assert!(!report.diverging);
    }

    #[test]
    fn q0_diverges_for_inverse_radius() {
        let q = WeightField::radial_power(1.0, -1.0);
        let grid = geometric_grid(0.5, 0.5, 12);
        let report = q0_estimate(&q, &[0.0; 3], &grid, 10_000, 1).unwrap();
        assert!(report.diverging);
        // closed form 1.5/eps at every level
        for &(eps, v) in &report.table {
            assert!((v - 1.5 / eps).abs() < 1e-7 * (1.5 / eps));
        }
    }

    #[test]
    fn q0_rejects_bad_sequences() {
        let q = WeightField::constant(1.0);
        assert!(q0_estimate(&q, &[0.0; 3], &[], 10_000, 1).is_err());
        assert!(q0_estimate(&q, &[0.0; 3], &[0.1, 0.2], 10_000, 1).is_err());
    }

    #[test]
    fn oscillation_of_constant_is_zero() {
        let q = WeightField::constant(7.0);
        let report = fmo_oscillation(&q, &[0.0; 3], 0.25, 10_000, 1).unwrap();
        assert!(report.value.abs() < 1e-12);
    }

    #[test]
    fn oscillation_of_log_weight_is_scale_invariant() {
        // substituting u = rho/eps shows the oscillation of log(1/|x|)
        // equals n * int_0^1 |log(1/u) - 1/n| u^{n-1} du at every eps
        let n = 3.0;
        let expected = quadrature::integrate_1d(
            &|u: f64| ((1.0 / u).ln() - 1.0 / n).abs() * u * u,
            0.0,
            1.0,
            1e-12,
            SingularEndpoints::lower(),
        )
        .unwrap()
        .value
            * n;
        let q = WeightField::radial_log();
        for eps in [1e-1, 1e-3, 1e-6] {
            let report = fmo_oscillation(&q, &[0.0; 3], eps, 10_000, 1).unwrap();
            assert!(
                (report.value - expected).abs() < 1e-7,
                "eps = {eps}: {} vs {expected}",
                report.value
            );
            assert!(report.value <= 2.0);
        }
    }

    #[test]
    fn oscillation_of_inverse_radius_grows() {
        let q = WeightField::radial_power(1.0, -1.0);
        let at_01 = fmo_oscillation(&q, &[0.0; 3], 0.1, 10_000, 1).unwrap().value;
        let at_001 = fmo_oscillation(&q, &[0.0; 3], 0.001, 10_000, 1).unwrap().value;
        assert!(
            (at_001 / at_01 - 100.0).abs() < 1.0,
            "growth {} not ~ 1/eps",
            at_001 / at_01
        );
    }

    #[test]
    fn fmo_verdicts() {
        let grid = geometric_grid(0.1, 0.1, 6); // 1e-1 .. 1e-6
        let x0 = [0.0; 3];
        let finite = fmo_verdict(&WeightField::constant(3.0), &x0, &grid, 10_000, 1).unwrap();
        assert_eq!(finite.verdict, FmoVerdict::Finite);

        let log = fmo_verdict(&WeightField::radial_log(), &x0, &grid, 10_000, 1).unwrap();
        assert_eq!(log.verdict, FmoVerdict::Finite);
        assert!(log.limsup_proxy <= 2.0);

        let inverse = fmo_verdict(&WeightField::radial_power(1.0, -1.0), &x0, &grid, 10_000, 1)
            .unwrap();
        assert_eq!(inverse.verdict, FmoVerdict::Diverging);
    }

    #[test]
    fn scaling_of_means_is_exact_on_both_paths() {
        let lambda = 3.5;
        let base = WeightField::radial_power(1.0, 0.5);
        let scaled = WeightField::radial_power(lambda, 0.5);
        let a = spherical_mean(&base, &[0.0; 3], 0.6, 10_000, 5).unwrap();
        let b = spherical_mean(&scaled, &[0.0; 3], 0.6, 10_000, 5).unwrap();
        assert!((b.value - lambda * a.value).abs() < 1e-14);

        // Monte Carlo with a shared seed samples the same points, so the
        // scaling is exact there too
        let base_mc = base.clone().without_profile();
        let scaled_mc = scaled.clone().without_profile();
        let a = spherical_mean(&base_mc, &[0.0; 3], 0.6, 20_000, 5).unwrap();
        let b = spherical_mean(&scaled_mc, &[0.0; 3], 0.6, 20_000, 5).unwrap();
        assert!((b.value - lambda * a.value).abs() < 1e-12 * b.value.abs());
    }

    #[test]
    fn profile_matches_monte_carlo_for_random_radii() {
        let q = WeightField::radial_power(1.5, 1.25);
        let stripped = q.clone().without_profile();
        let radii = [0.9, 0.7, 0.55, 0.4, 0.33, 0.21, 0.17, 0.12, 0.08, 0.05];
        for (k, &r) in radii.iter().enumerate() {
            let exact = spherical_mean(&q, &[0.0; 3], r, 10_000, 1).unwrap();
            let mc = spherical_mean(&stripped, &[0.0; 3], r, 50_000, 100 + k as u64).unwrap();
            assert!(
                (mc.value - exact.value).abs() <= 3.0 * mc.std_error + 1e-12,
                "r = {r}: {} vs {}",
                mc.value,
                exact.value
            );
        }
    }

    #[test]
    fn infinite_sample_propagates_as_infinity() {
        // q = r^{-1} has an integrable singularity in the shell formula,
        // but a hard +inf plateau must surface as an infinite mean
        let q = WeightField::from_profile("plateau", |r| {
            if r < 0.05 {
                f64::INFINITY
            } else {
                1.0
            }
        });
        let report = ball_mean(&q, &[0.0; 2], 0.2, 10_000, 1).unwrap();
        assert!(report.value.is_infinite());
    }

    #[test]
    fn evaluator_agrees_with_profile_on_spheres() {
        let q = WeightField::radial_power(1.7, -0.4).with_center(vec![0.2, -0.1, 0.3]);
        let center = [0.2, -0.1, 0.3];
        for (k, &r) in [0.05, 0.3, 0.8, 1.5].iter().enumerate() {
            for x in quadrature::sample_sphere_points(&center, r, 50, k as u64) {
                let by_point = q.eval(&x);
                let by_profile = q.profile(r).unwrap();
                assert!(
                    (by_point - by_profile).abs() <= 1e-10 * (1.0 + by_profile),
                    "r = {r}: {by_point} vs {by_profile}"
                );
            }
        }
    }

    #[test]
    fn off_center_weight_uses_monte_carlo() {
        let q = WeightField::radial_power(1.0, 2.0).with_center(vec![0.5, 0.0, 0.0]);
        // about its own center: closed form
        let at_center = spherical_mean(&q, &[0.5, 0.0, 0.0], 0.2, 10_000, 1).unwrap();
        assert_eq!(at_center.method, MeanMethod::ClosedForm);
        // about the origin: must sample
        let at_origin = spherical_mean(&q, &[0.0; 3], 0.2, 10_000, 1).unwrap();
        assert_eq!(at_origin.method, MeanMethod::MonteCarlo);
    }
}
