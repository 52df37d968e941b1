//! Integral functionals over radial weights, growth-hypothesis
//! validators, and the distortion-bound evaluators built from them:
//! image-measure bounds, Schwarz-type ratio scans, the ball-mean growth
//! bound, and log-Hoelder envelopes.

use crate::error::{Error, Result};
use crate::geometry::{self, validate, Params, Regime, Requirement};
use crate::quadrature::{self, SingularEndpoints};
use crate::weights::{self, WeightField};
use serde::Serialize;
use std::sync::Arc;

/// Default quadrature tolerance for the radial functionals.
const RADIAL_TOL: f64 = 1e-11;

/// Spherical mean q_{x0}(r) as a plain radial function: the exact profile
/// when the weight is radial about x0, Monte Carlo with a radius-derived
/// stream otherwise.
pub(crate) struct RadialMeanView<'a> {
    q: &'a WeightField,
    x0: Vec<f64>,
    budget: usize,
    seed: u64,
}

impl<'a> RadialMeanView<'a> {
    pub fn new(q: &'a WeightField, x0: &[f64], budget: usize, seed: u64) -> Self {
        RadialMeanView {
            q,
            x0: x0.to_vec(),
            budget,
            seed,
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if self.q.is_radial_about(&self.x0) {
            let v = self.q.profile(r).expect("radial weight has a profile");
            if v.is_nan() {
                return Err(Error::NanSample { point: vec![r] });
            }
            return Ok(v);
        }
        let node_seed = self.seed ^ r.to_bits().rotate_left(17);
        let report = weights::spherical_mean(self.q, &self.x0, r, self.budget, node_seed)?;
        Ok(report.value)
    }
}

/// Result of the weighted radial integral I(x0, r1, r2).
#[derive(Debug, Clone, Serialize)]
pub struct IntegralI {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

/// I(x0, r1, r2) = int_{r1}^{r2} dr / (r^{(n-1)/(p-1)} q_{x0}^{1/(p-1)}(r)).
///
/// Conventions: q = +inf contributes 0 to the integrand; a vanishing
/// spherical mean makes the integrand +inf and the whole integral is
/// reported as +inf with a diagnostic rather than an error.
pub fn integral_i(
    params: Params,
    q: &WeightField,
    x0: &[f64],
    r1: f64,
    r2: f64,
) -> Result<IntegralI> {
    integral_i_with(params, q, x0, r1, r2, weights::DEFAULT_BUDGET, weights::DEFAULT_SEED)
}

pub fn integral_i_with(
    params: Params,
    q: &WeightField,
    x0: &[f64],
    r1: f64,
    r2: f64,
    budget: usize,
    seed: u64,
) -> Result<IntegralI> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::DegenerateRing(format!(
            "need 0 < r1 < r2, got r1 = {r1}, r2 = {r2}"
        )));
    }
    let view = RadialMeanView::new(q, x0, budget, seed);
    let s = params.radial_exponent();
    let inv_pm1 = 1.0 / (params.p() - 1.0);
    let integrand = |r: f64| -> f64 {
        // evaluation failures surface as a NonFiniteValue error below
        let qr = view.eval(r).unwrap_or(f64::NAN);
        if qr.is_infinite() {
            return 0.0;
        }
        if qr == 0.0 {
            return f64::INFINITY;
        }
        1.0 / (r.powf(s) * qr.powf(inv_pm1))
    };
    match quadrature::integrate_1d(&integrand, r1, r2, RADIAL_TOL, SingularEndpoints::none()) {
        Ok(res) => Ok(IntegralI {
            value: res.value,
            abs_error: res.abs_error_estimate,
            converged: res.converged,
            diagnostic: if res.converged {
                None
            } else {
                Some("quadrature budget exhausted".into())
            },
        }),
        Err(Error::NonFiniteValue { x, value }) if value.is_infinite() => Ok(IntegralI {
            value: f64::INFINITY,
            abs_error: 0.0,
            converged: true,
            diagnostic: Some(format!(
                "spherical mean vanished near r = {x}; integral is +inf by convention"
            )),
        }),
        Err(e) => Err(e),
    }
}

/// A nonnegative kernel psi on (0, infinity) with closed-form primitives
/// where the canonical choices admit them.
#[derive(Clone)]
pub struct Psi {
    kind: PsiKind,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    singular: SingularEndpoints,
}

#[derive(Clone, Debug, PartialEq)]
enum PsiKind {
    /// 1/t on (0, 1).
    ReciprocalT,
    /// (t log(1/t))^{-ratio} on (0, 1), ratio = n/p.
    LogCanonical { ratio: f64 },
    Custom,
}

impl std::fmt::Debug for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Psi").field("kind", &self.kind).finish()
    }
}

impl Psi {
    /// psi(t) = 1/t on (0, 1), 0 outside.
    pub fn reciprocal() -> Self {
        Psi {
            kind: PsiKind::ReciprocalT,
            f: Arc::new(|t| if t > 0.0 && t < 1.0 { 1.0 / t } else { 0.0 }),
            singular: SingularEndpoints::none(),
        }
    }

    /// psi(t) = 1 / (t log(1/t))^{n/p} on (0, 1): the kernel that turns a
    /// finite-mean-oscillation weight into an admissible growth
    /// hypothesis.
    pub fn log_canonical(params: Params) -> Self {
        let ratio = params.nf() / params.p();
        Psi {
            kind: PsiKind::LogCanonical { ratio },
            f: Arc::new(move |t| {
                if t <= 0.0 || t >= 1.0 {
                    0.0
                } else {
                    (t * (1.0 / t).ln()).powf(-ratio)
                }
            }),
            singular: SingularEndpoints::none(),
        }
    }

    pub fn custom<F>(f: F, singular: SingularEndpoints) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Psi {
            kind: PsiKind::Custom,
            f: Arc::new(f),
            singular,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// J(r) = int_r^1 psi(t) dt. Fails (hypothesis violated) when the
    /// integral is nonpositive or diverges.
    pub fn primitive_to_one(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("primitive requires 0 < r < 1, got {r}")));
        }
        match &self.kind {
            PsiKind::ReciprocalT => Ok((1.0 / r).ln()),
            PsiKind::LogCanonical { ratio } if *ratio >= 1.0 => Err(Error::HypothesisViolated(
                format!(
                    "int_r^1 of the log-canonical kernel diverges at the upper endpoint for n/p = {ratio} >= 1"
                ),
            )),
            _ => self.integral(r, 1.0 - 1e-15),
        }
    }

    /// I(eps, eps0) = int_eps^eps0 psi(t) dt.
    pub fn integral(&self, eps: f64, eps0: f64) -> Result<f64> {
        if !(eps > 0.0 && eps0 > eps) {
            return Err(Error::Domain(format!(
                "integral requires 0 < eps < eps0, got eps = {eps}, eps0 = {eps0}"
            )));
        }
        if self.kind == PsiKind::ReciprocalT && eps0 <= 1.0 {
            return Ok((eps0 / eps).ln());
        }
        let f = Arc::clone(&self.f);
        let res = quadrature::integrate_1d(&move |t| f(t), eps, eps0, RADIAL_TOL, self.singular)?;
        if !res.converged && res.abs_error_estimate > 1e-6 * res.value.abs().max(1.0) {
            return Err(Error::HypothesisViolated(format!(
                "psi integral over ({eps}, {eps0}) did not converge (estimate {}, error {})",
                res.value, res.abs_error_estimate
            )));
        }
        if res.value <= 0.0 {
            return Err(Error::HypothesisViolated(format!(
                "psi integral over ({eps}, {eps0}) is nonpositive: {}",
                res.value
            )));
        }
        Ok(res.value)
    }
}

/// The three growth conditions the bounds are stated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthKind {
    /// weighted annulus mass over A(r, 1) bounded by c * J^alpha(r).
    PrimitivePower,
    /// mass of Q(x)/|x|^p over A(r, 1) bounded by c * ln(1/r).
    LogRatio,
    /// weighted mass over A(eps, eps0) bounded by K * I^q(eps, eps0).
    IntegralPower,
}

/// Hypothesis package for [`check_growth_condition`].
#[derive(Clone, Debug)]
pub struct GrowthHypothesis {
    pub psi: Psi,
    pub alpha: f64,
    /// The constant c (or K for the integral-power kind).
    pub c: f64,
    pub kind: GrowthKind,
    /// Exponent q < p, integral-power kind only.
    pub q_exponent: Option<f64>,
    /// Upper annulus radius for the integral-power kind; 1 otherwise.
    pub eps0: f64,
    /// Probe radii must stay below this.
    pub eps0_prime: f64,
}

impl GrowthHypothesis {
    pub fn primitive_power(params: Params, psi: Psi, alpha: f64, c: f64) -> Result<Self> {
        if alpha > params.p() + 1e-15 {
            return Err(Error::InvalidParams(format!(
                "growth exponent alpha must satisfy alpha <= p, got alpha = {alpha}, p = {}",
                params.p()
            )));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidParams(format!("constant must be positive, got {c}")));
        }
        Ok(GrowthHypothesis {
            psi,
            alpha,
            c,
            kind: GrowthKind::PrimitivePower,
            q_exponent: None,
            eps0: 1.0,
            eps0_prime: 1.0,
        })
    }

    pub fn log_ratio(params: Params, c: f64) -> Result<Self> {
        Self::primitive_power(params, Psi::reciprocal(), 1.0, c).map(|mut h| {
            h.kind = GrowthKind::LogRatio;
            h
        })
    }

    pub fn integral_power(
        params: Params,
        psi: Psi,
        q_exponent: f64,
        k: f64,
        eps0: f64,
        eps0_prime: f64,
    ) -> Result<Self> {
        if q_exponent >= params.p() {
            return Err(Error::InvalidParams(format!(
                "envelope exponent must satisfy q < p, got q = {q_exponent}, p = {}",
                params.p()
            )));
        }
        if !(k > 0.0) {
            return Err(Error::InvalidParams(format!("constant must be positive, got {k}")));
        }
        if !(eps0 > 0.0 && eps0_prime > 0.0 && eps0_prime < eps0) {
            return Err(Error::InvalidParams(format!(
                "need 0 < eps0' < eps0, got eps0 = {eps0}, eps0' = {eps0_prime}"
            )));
        }
        Ok(GrowthHypothesis {
            psi,
            alpha: q_exponent,
            c: k,
            kind: GrowthKind::IntegralPower,
            q_exponent: Some(q_exponent),
            eps0,
            eps0_prime,
        })
    }
}

/// One probed radius of a growth-condition check.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    /// Left side: the weighted annulus mass.
    pub lhs: f64,
    /// Right-side comparator without its constant.
    pub comparator: f64,
    /// lhs / comparator: the smallest constant making this radius pass.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    pub rows: Vec<GrowthRow>,
    /// Smallest constant making the inequality hold on the whole grid.
    pub min_feasible_c: f64,
    /// Whether the supplied constant passes on the grid.
    pub pass: bool,
}

/// Evaluates the hypothesis left side on every grid radius (shell
/// reduction for radial Q, annulus Monte Carlo otherwise) and reports the
/// smallest feasible constant together with pass/fail for the supplied
/// one.
pub fn check_growth_condition(
    params: Params,
    q: &WeightField,
    hyp: &GrowthHypothesis,
    r_grid: &[f64],
    budget: usize,
    seed: u64,
) -> Result<GrowthCheck> {
    if r_grid.is_empty() {
        return Err(Error::Domain("probe grid must be nonempty".into()));
    }
    for pair in r_grid.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::Domain("probe grid must be strictly decreasing".into()));
        }
    }
    let upper = hyp.eps0;
    if r_grid[0] >= upper {
        return Err(Error::Domain(format!(
            "probe radii must lie below the annulus top {upper}, got {}",
            r_grid[0]
        )));
    }

    let n = params.n();
    let x0 = vec![0.0; n];
    let nf = params.nf();
    let p = params.p();
    let omega = params.omega();
    let psi = hyp.psi.clone();

    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let lhs = if q.is_radial_about(&x0) {
            let integrand = |t: f64| {
                q.profile(t).unwrap() * psi.eval(t).powf(p) * t.powf(nf - 1.0)
            };
            let res = quadrature::integrate_1d(
                &integrand,
                r,
                upper,
                RADIAL_TOL,
                SingularEndpoints::none(),
            );
            match res {
                Ok(res) => {
                    if !res.converged && res.abs_error_estimate > 1e-6 * res.value.abs().max(1.0) {
                        return Err(Error::HypothesisViolated(format!(
                            "left side diverges on A({r}, {upper})"
                        )));
                    }
                    omega * res.value
                }
                Err(Error::NonFiniteValue { .. }) => {
                    return Err(Error::HypothesisViolated(format!(
                        "left side is infinite on A({r}, {upper})"
                    )))
                }
                Err(e) => return Err(e),
            }
        } else {
            let ring = geometry::SphericalRing::centered_at_origin(n, r, upper)?;
            let h = |x: &[f64]| {
                let t = geometry::norm(x);
                q.eval(x) * psi.eval(t).powf(p)
            };
            let res = quadrature::annulus_integral(&h, &ring, budget, seed)?;
            res.value
        };

        let comparator = match hyp.kind {
            GrowthKind::PrimitivePower => hyp.psi.primitive_to_one(r)?.powf(hyp.alpha),
            GrowthKind::LogRatio => (1.0 / r).ln(),
            GrowthKind::IntegralPower => {
                let i = hyp.psi.integral(r, upper)?;
                i.powf(hyp.q_exponent.expect("integral-power kind carries q"))
            }
        };
        if !(comparator.is_finite() && comparator > 0.0) {
            return Err(Error::HypothesisViolated(format!(
                "comparator at r = {r} is not positive and finite: {comparator}"
            )));
        }
        rows.push(GrowthRow {
            r,
            lhs,
            comparator,
            ratio: lhs / comparator,
        });
    }

    let min_feasible_c = rows.iter().map(|row| row.ratio).fold(0.0f64, f64::max);
    let pass = rows
        .iter()
        .all(|row| row.lhs <= hyp.c * row.comparator * (1.0 + 1e-12));
    Ok(GrowthCheck {
        rows,
        min_feasible_c,
        pass,
    })
}

/// beta = (n-p)/(p-1) * (omega_{n-1}/c)^{1/(p-1)}, the constant of the
/// subcritical (p < n) image-measure bound.
pub fn beta_constant(params: Params, c: f64) -> Result<f64> {
    validate(params, Requirement::PBelowN, "image-measure bound constant beta")?;
    let n = params.nf();
    let p = params.p();
    Ok((n - p) / (p - 1.0) * (params.omega() / c).powf(1.0 / (p - 1.0)))
}

/// gamma = n * (omega_{n-1}/c)^{1/(n-1)}, the constant of the critical
/// (p = n) image-measure bound.
pub fn gamma_constant(params: Params, c: f64) -> Result<f64> {
    validate(params, Requirement::PEqualsN, "image-measure bound constant gamma")?;
    let n = params.nf();
    Ok(n * (params.omega() / c).powf(1.0 / (n - 1.0)))
}

/// gamma_0 = (omega_{n-1}/c)^{1/(n-1)}: the sharp stretch exponent of the
/// critical Schwarz-type bound.
pub fn gamma0_constant(params: Params, c: f64) -> Result<f64> {
    validate(params, Requirement::PEqualsN, "Schwarz-type exponent gamma0")?;
    Ok((params.omega() / c).powf(1.0 / (params.nf() - 1.0)))
}

/// Upper bound on m(f(B(0, r))) given the growth constant c, exponent
/// alpha and the primitive value J(r).
pub fn measure_bound(params: Params, alpha: f64, c: f64, j_r: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("constant must be positive, got {c}")));
    }
    if j_r < 0.0 {
        return Err(Error::Domain(format!("primitive value must be nonnegative, got {j_r}")));
    }
    let n = params.nf();
    let p = params.p();
    let volume = params.ball_volume();
    match params.regime() {
        Regime::AtDim => {
            let gamma = gamma_constant(params, c)?;
            Ok(volume * (-gamma * j_r.powf((n - alpha) / (n - 1.0))).exp())
        }
        Regime::BelowDim | Regime::BetweenDimMinus1AndDim => {
            let beta = beta_constant(params, c)?;
            let inner = 1.0 + beta * j_r.powf((p - alpha) / (p - 1.0));
            Ok(volume * inner.powf(-n * (p - 1.0) / (n - p)))
        }
        Regime::AboveDim => Err(Error::RegimeMismatch {
            context: "image-measure bound".into(),
            violated: format!("requires p <= n, got p = {p}, n = {n}"),
        }),
    }
}

/// One probed radius of a bound-versus-measurement table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundRow {
    pub r: f64,
    pub bound: f64,
    pub measured: f64,
    pub slack: f64,
}

/// Constants attached to a bound report.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BoundConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted: Option<f64>,
}

/// Evaluated bound against measured values over a radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub constants: BoundConstants,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Scans the ratio l_f(r) / R(r) of a map's minimal modulus against the
/// Schwarz-type comparison function R built from (alpha, c, psi). The
/// liminf conclusion passes when the smallest probed ratio is at most
/// 1 + 1e-9.
pub fn schwarz_ratio_scan<F>(
    map_probe: F,
    params: Params,
    alpha: f64,
    c: f64,
    psi: &Psi,
    r_grid: &[f64],
) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
{
    if r_grid.is_empty() {
        return Err(Error::Domain("probe grid must be nonempty".into()));
    }
    let volume = params.ball_volume();
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut min_ratio = f64::INFINITY;
    for &r in r_grid {
        let j = psi.primitive_to_one(r)?;
        let comparison = (measure_bound(params, alpha, c, j)? / volume).powf(1.0 / params.nf());
        let measured = map_probe(r);
        min_ratio = min_ratio.min(measured / comparison);
        rows.push(BoundRow {
            r,
            bound: comparison,
            measured,
            slack: comparison - measured,
        });
    }
    let mut constants = BoundConstants::default();
    match params.regime() {
        Regime::AtDim => {
            constants.gamma = Some(gamma_constant(params, c)?);
            constants.gamma0 = Some(gamma0_constant(params, c)?);
        }
        _ => constants.beta = Some(beta_constant(params, c)?),
    }
    let pass = min_ratio <= 1.0 + 1e-9;
    Ok(BoundReport {
        rows,
        constants,
        pass,
        notes: vec![format!("min ratio over grid = {min_ratio:.15e}")],
    })
}

/// The explicit constant of the ball-mean growth bound, assembled from
/// the test-annulus capacity estimate at eps2 = 2 eps1 and the
/// measure-based capacity lower bound:
/// c0 = Omega_n^{-1/n} * (2^n Omega_n / c1)^{1/(n-p)} with
/// c1 = n Omega_n^{p/n} ((n-p)/(p-1))^{p-1}.
pub fn growth_c0(params: Params) -> Result<f64> {
    validate(params, Requirement::PBelowN, "ball-mean growth bound")?;
    let n = params.nf();
    let p = params.p();
    let volume = params.ball_volume();
    let c1 = n * volume.powf(p / n) * ((n - p) / (p - 1.0)).powf(p - 1.0);
    Ok(volume.powf(-1.0 / n) * (2f64.powf(n) * volume / c1).powf(1.0 / (n - p)))
}

/// c0 * Q0^{1/(n-p)}: the liminf bound on |f(x)|/|x| under a finite
/// ball-mean limit Q0.
pub fn theorem_growth_bound(params: Params, q0: f64) -> Result<f64> {
    validate(params, Requirement::PBelowN, "ball-mean growth bound")?;
    if q0 < 0.0 {
        return Err(Error::Domain(format!("ball-mean limit must be nonnegative, got {q0}")));
    }
    let c0 = growth_c0(params)?;
    Ok(c0 * q0.powf(1.0 / (params.nf() - params.p())))
}

/// One epsilon level of a Hoelder-envelope fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeRow {
    pub eps: f64,
    pub i_value: f64,
    /// Measured displacement |f(x) - f(x0)| at |x - x0| = eps.
    pub delta_f: f64,
    /// Smallest constant covering this level alone.
    pub n_local: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    /// (q - p)(n - 1)/p, the envelope exponent.
    pub exponent: f64,
    pub rows: Vec<EnvelopeRow>,
    /// Fitted constant: max of the local ones over the whole range.
    pub n_fitted: f64,
    /// Fitted constant using only the first (largest-eps) decade.
    pub n_first_decade: f64,
    /// The fit is stable when extending the range multiplies the
    /// constant by at most 2.
    pub stable: bool,
}

/// Fits the minimal constant N with |f(x) - f(x0)| <= N * I^{(q-p)(n-1)/p}
/// over a probe table of (eps, I(eps, eps0), |f(x) - f(x0)|) triples,
/// eps strictly decreasing.
pub fn holder_envelope(
    params: Params,
    probes: &[(f64, f64, f64)],
    q_exponent: f64,
) -> Result<EnvelopeReport> {
    validate(params, Requirement::PBetweenNMinus1AndN, "Hoelder envelope bound")?;
    if q_exponent >= params.p() {
        return Err(Error::InvalidParams(format!(
            "envelope requires q < p, got q = {q_exponent}, p = {}",
            params.p()
        )));
    }
    if probes.len() < 2 {
        return Err(Error::Domain("need at least two probe levels".into()));
    }
    for pair in probes.windows(2) {
        if pair[1].0 >= pair[0].0 {
            return Err(Error::Domain("probe eps must be strictly decreasing".into()));
        }
        if pair[1].1 <= pair[0].1 {
            return Err(Error::HypothesisViolated(
                "I(eps, eps0) must be strictly increasing as eps decreases".into(),
            ));
        }
    }
    if probes.iter().any(|&(_, i, _)| !(i > 0.0)) {
        return Err(Error::HypothesisViolated("I values must be positive".into()));
    }

    let exponent = (q_exponent - params.p()) * (params.nf() - 1.0) / params.p();
    let rows: Vec<EnvelopeRow> = probes
        .iter()
        .map(|&(eps, i_value, delta_f)| EnvelopeRow {
            eps,
            i_value,
            delta_f,
            n_local: delta_f / i_value.powf(exponent),
        })
        .collect();
    let n_fitted = rows.iter().map(|r| r.n_local).fold(0.0f64, f64::max);
    let first_decade_floor = probes[0].0 / 10.0;
    let n_first_decade = rows
        .iter()
        .filter(|r| r.eps >= first_decade_floor)
        .map(|r| r.n_local)
        .fold(0.0f64, f64::max);
    let stable = n_first_decade > 0.0 && n_fitted <= 2.0 * n_first_decade;
    Ok(EnvelopeReport {
        exponent,
        rows,
        n_fitted,
        n_first_decade,
        stable,
    })
}

/// The double-log envelope exponent (1-p)(n-1)/p of the
/// finite-mean-oscillation modulus bound.
pub fn fmo_envelope_exponent(params: Params) -> f64 {
    (1.0 - params.p()) * (params.nf() - 1.0) / params.p()
}

/// The canonical kernel for finite-mean-oscillation weights together
/// with its closed-form integral lower bound.
#[derive(Debug, Clone)]
pub struct FmoPsi {
    pub psi: Psi,
    pub eps0: f64,
}

impl FmoPsi {
    /// log( log(1/eps) / log(1/eps0) ) <= I(eps, eps0).
    pub fn lower_bound(&self, eps: f64) -> f64 {
        ((1.0 / eps).ln() / (1.0 / self.eps0).ln()).ln()
    }
}

/// Builds the canonical FMO kernel; requires eps0 < e^{-1} so that
/// t log(1/t) stays below 1 on the probe range.
pub fn fmo_psi(params: Params, eps0: f64) -> Result<FmoPsi> {
    if !(eps0 > 0.0 && eps0 < (-1.0f64).exp()) {
        return Err(Error::Domain(format!(
            "eps0 must lie in (0, e^-1), got {eps0}"
        )));
    }
    Ok(FmoPsi {
        psi: Psi::log_canonical(params),
        eps0,
    })
}
