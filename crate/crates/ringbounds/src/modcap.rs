//! p-moduli of spherical-ring curve families, p-capacities of spherical
//! condensers, the capacity bounds that sandwich them, and the
//! extremal-density verifier.
//!
//! All capacities here are for concentric spherical condensers, where the
//! curve-family modulus and the condenser capacity coincide and radial
//! symmetry gives closed forms to test against.

use crate::bounds;
use crate::error::{Error, Result};
use crate::geometry::{validate, Params, Requirement};
use crate::quadrature::{self, SingularEndpoints};
use crate::weights::WeightField;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Piecewise-constant radial density on a knot grid spanning [r1, r2].
#[derive(Debug, Clone, Serialize)]
pub struct GridDensity {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || values.len() + 1 != knots.len() {
            return Err(Error::Domain(format!(
                "need one more knot than cell values, got {} knots and {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("knots must be strictly increasing".into()));
        }
        if values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Domain("density values must be nonnegative".into()));
        }
        Ok(GridDensity { knots, values })
    }

    /// Uniform cells over [r1, r2].
    pub fn uniform_knots(r1: f64, r2: f64, cells: usize) -> Vec<f64> {
        (0..=cells)
            .map(|i| r1 + (r2 - r1) * i as f64 / cells as f64)
            .collect()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell_widths(&self) -> Vec<f64> {
        self.knots.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// The line integral of the density over [r1, r2].
    pub fn integral(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| v * (w[1] - w[0]))
            .sum()
    }

    /// Admissible-normalized check: unit line integral within 1e-10.
    pub fn is_admissible_normalized(&self) -> bool {
        (self.integral() - 1.0).abs() <= 1e-10
    }

    /// Rescales to unit line integral.
    pub fn normalized(mut self) -> Result<Self> {
        let total = self.integral();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Domain(format!(
                "cannot normalize a density with integral {total}"
            )));
        }
        for v in &mut self.values {
            *v /= total;
        }
        Ok(self)
    }
}

/// Classical modulus of the curve family joining the boundary spheres of
/// the ring a < |x| < b:
/// omega_{n-1} * (int_a^b r^{-(n-1)/(p-1)} dr)^{1-p},
/// which collapses to omega_{n-1} (log(b/a))^{1-n} at p = n.
pub fn ring_modulus_exact(params: Params, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return Err(Error::DegenerateRing(format!(
            "need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    let omega = params.omega();
    let p = params.p();
    let s = params.radial_exponent();
    let core = if (s - 1.0).abs() <= 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(1.0 - s) - a.powf(1.0 - s)) / (1.0 - s)
    };
    Ok(omega * core.powf(1.0 - p))
}

/// Outcome of the brute-force discrete modulus.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteModulus {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub cells: usize,
}

/// Per-cell energy weights sum w_i v_i^p for a piecewise-constant radial
/// density: w_i = omega_{n-1} * int_{cell} q(rho) rho^{n-1} d rho. With
/// q == 1 the cell integral is the exact shell volume.
fn cell_energy_weights(
    params: Params,
    q: Option<&WeightField>,
    knots: &[f64],
) -> Result<Vec<f64>> {
    let omega = params.omega();
    let nf = params.nf();
    let mut weights = Vec::with_capacity(knots.len() - 1);
    for w in knots.windows(2) {
        let value = match q {
            None => (w[1].powf(nf) - w[0].powf(nf)) / nf,
            Some(q) => {
                let integrand =
                    |rho: f64| q.profile(rho).expect("radial weight") * rho.powf(nf - 1.0);
                quadrature::integrate_1d(&integrand, w[0], w[1], 1e-13, SingularEndpoints::none())?
                    .value
            }
        };
        weights.push(omega * value);
    }
    Ok(weights)
}

/// Projection used by the discrete minimizers: clip to nonnegative, then
/// renormalize the line integral to 1.
fn project(values: &mut [f64], widths: &[f64]) {
    let mut total = 0.0;
    for (v, w) in values.iter_mut().zip(widths) {
        if *v < 0.0 {
            *v = 0.0;
        }
        total += *v * w;
    }
    if total > 0.0 {
        for v in values.iter_mut() {
            *v /= total;
        }
    } else {
        let span: f64 = widths.iter().sum();
        for v in values.iter_mut() {
            *v = 1.0 / span;
        }
    }
}

fn energy(weights: &[f64], values: &[f64], p: f64) -> f64 {
    weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * v.powf(p))
        .sum()
}

struct PgOutcome {
    energy: f64,
    converged: bool,
    iterations: usize,
}

/// Projected gradient descent over the admissible simplex-like set
/// { v >= 0, sum v_i dr_i = 1 }: the gradient is projected onto the
/// tangent hyperplane of the line-integral constraint (coordinates
/// pinned at zero stay put), and the step comes from an exact ternary
/// line search on the feasible segment, along which the energy is
/// convex. Stops once the per-iteration relative decrease falls below
/// 1e-14 twice in a row.
fn minimize_energy(
    weights: &[f64],
    widths: &[f64],
    p: f64,
    start: Vec<f64>,
    max_iterations: usize,
) -> PgOutcome {
    let m = start.len();
    let mut values = start;
    project(&mut values, widths);
    let mut current = energy(weights, &values, p);
    let width_norm2: f64 = widths.iter().map(|w| w * w).sum();

    let mut gradient = vec![0.0; m];
    let mut direction = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut iterations = 0usize;
    let mut stall = 0usize;
    while iterations < max_iterations {
        iterations += 1;
        for i in 0..m {
            gradient[i] = p * weights[i] * values[i].powf(p - 1.0);
        }
        let mu = gradient
            .iter()
            .zip(widths)
            .map(|(g, w)| g * w)
            .sum::<f64>()
            / width_norm2;
        let mut norm2 = 0.0;
        for i in 0..m {
            let mut d = mu * widths[i] - gradient[i];
            if values[i] <= 0.0 && d < 0.0 {
                d = 0.0;
            }
            direction[i] = d;
            norm2 += d * d;
        }
        if norm2.sqrt() <= 1e-18 * (1.0 + current.abs()) {
            return PgOutcome {
                energy: current,
                converged: true,
                iterations,
            };
        }
        // largest step keeping the iterate nonnegative; the direction
        // integrates to zero, so some coordinate always decreases
        let mut theta_max = f64::INFINITY;
        for i in 0..m {
            if direction[i] < 0.0 {
                theta_max = theta_max.min(-values[i] / direction[i]);
            }
        }
        if !theta_max.is_finite() || theta_max <= 0.0 {
            return PgOutcome {
                energy: current,
                converged: true,
                iterations,
            };
        }

        let phi = |theta: f64, buf: &mut [f64]| -> f64 {
            for i in 0..m {
                buf[i] = (values[i] + theta * direction[i]).max(0.0);
            }
            energy(weights, buf, p)
        };
        let (mut lo, mut hi) = (0.0f64, theta_max);
        for _ in 0..48 {
            let t1 = lo + (hi - lo) / 3.0;
            let t2 = hi - (hi - lo) / 3.0;
            if phi(t1, &mut trial) <= phi(t2, &mut trial) {
                hi = t2;
            } else {
                lo = t1;
            }
        }
        let theta = 0.5 * (lo + hi);
        for i in 0..m {
            trial[i] = (values[i] + theta * direction[i]).max(0.0);
        }
        project(&mut trial, widths);
        let next = energy(weights, &trial, p);
        if next < current {
            let decrease = (current - next) / current.abs().max(1e-300);
            values.copy_from_slice(&trial);
            current = next;
            stall = if decrease < 1e-14 { stall + 1 } else { 0 };
        } else {
            stall += 1;
        }
        if stall >= 2 {
            return PgOutcome {
                energy: current,
                converged: true,
                iterations,
            };
        }
    }
    PgOutcome {
        energy: current,
        converged: false,
        iterations,
    }
}

/// Brute-force oracle for the ring modulus: minimizes the p-energy
/// omega_{n-1} sum rho_i^p * (shell volume of cell i) over
/// piecewise-constant radial densities with unit line integral. The
/// candidates are genuinely admissible, so the value always dominates
/// [`ring_modulus_exact`] and converges to it under grid refinement.
pub fn discrete_ring_modulus(
    params: Params,
    a: f64,
    b: f64,
    grid_size: usize,
) -> Result<DiscreteModulus> {
    if grid_size < 64 {
        return Err(Error::Domain(format!(
            "oracle grid must have at least 64 cells, got {grid_size}"
        )));
    }
    if !(a > 0.0 && b > a) {
        return Err(Error::DegenerateRing(format!(
            "need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    let knots = GridDensity::uniform_knots(a, b, grid_size);
    let weights = cell_energy_weights(params, None, &knots)?;
    let widths: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let start = vec![1.0 / (b - a); grid_size];
    let outcome = minimize_energy(&weights, &widths, params.p(), start, 20_000);
    Ok(DiscreteModulus {
        value: outcome.energy,
        converged: outcome.converged,
        iterations: outcome.iterations,
        cells: grid_size,
    })
}

/// Capacity lower bound from the measure of the compact plate:
/// n Omega_n^{p/n} ((n-p)/(p-1))^{p-1} m(C)^{(n-p)/n}, valid for
/// 1 < p < n.
pub fn cap_lower_bound_measure(params: Params, m_compact: f64) -> Result<f64> {
    validate(params, Requirement::PBelowN, "measure capacity lower bound")?;
    if m_compact < 0.0 {
        return Err(Error::Domain(format!(
            "plate measure must be nonnegative, got {m_compact}"
        )));
    }
    let n = params.nf();
    let p = params.p();
    let volume = params.ball_volume();
    Ok(n * volume.powf(p / n) * ((n - p) / (p - 1.0)).powf(p - 1.0) * m_compact.powf((n - p) / n))
}

/// Capacity lower bound from the plate diameter and hull measure:
/// (c1 d(C)^p / m(A)^{1-n+p})^{1/(n-1)}, valid for p > n-1. The constant
/// c1 is supplied by the caller (default 1 in the CLI) and the bound is
/// used for relative comparisons only.
pub fn cap_lower_bound_diameter(
    params: Params,
    d_compact: f64,
    m_hull: f64,
    c1: f64,
) -> Result<f64> {
    validate(params, Requirement::PAboveNMinus1, "diameter capacity lower bound")?;
    if !(d_compact > 0.0 && m_hull > 0.0 && c1 > 0.0) {
        return Err(Error::Domain(format!(
            "diameter, hull measure and c1 must be positive, got d = {d_compact}, m = {m_hull}, c1 = {c1}"
        )));
    }
    let n = params.nf();
    let p = params.p();
    Ok((c1 * d_compact.powf(p) / m_hull.powf(1.0 - n + p)).powf(1.0 / (n - 1.0)))
}

/// Capacity lower bound in the isoperimetric reduced form used along the
/// image-measure derivation:
/// (n Omega_n^{1/n} m(C)^{(n-1)/n})^p / m(A difference C)^{p-1}.
pub fn cap_lower_bound_isoperimetric(
    params: Params,
    m_compact: f64,
    m_gap: f64,
) -> Result<f64> {
    if !(m_compact >= 0.0 && m_gap > 0.0) {
        return Err(Error::Domain(format!(
            "need m(C) >= 0 and m(A minus C) > 0, got {m_compact}, {m_gap}"
        )));
    }
    let n = params.nf();
    let p = params.p();
    let volume = params.ball_volume();
    let surface = n * volume.powf(1.0 / n) * m_compact.powf((n - 1.0) / n);
    Ok(surface.powf(p) / m_gap.powf(p - 1.0))
}

/// Capacity upper bound omega_{n-1} / I^{p-1} from the weighted radial
/// integral; I = +inf gives 0 and I = 0 gives +inf, following the
/// extended-value conventions.
#[derive(Debug, Clone, Serialize)]
pub struct CapUpperBound {
    pub value: f64,
    pub integral: f64,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

pub fn cap_upper_bound(
    params: Params,
    q: &WeightField,
    x0: &[f64],
    r1: f64,
    r2: f64,
) -> Result<CapUpperBound> {
    let i = bounds::integral_i(params, q, x0, r1, r2)?;
    let p = params.p();
    let omega = params.omega();
    let value = if i.value.is_infinite() {
        0.0
    } else if i.value == 0.0 {
        f64::INFINITY
    } else {
        omega / i.value.powf(p - 1.0)
    };
    Ok(CapUpperBound {
        value,
        integral: i.value,
        converged: i.converged,
        diagnostic: i.diagnostic,
    })
}

/// The extremal unit-integral density 1/(I r^{(n-1)/(p-1)} q^{1/(p-1)}),
/// returned as per-cell averages so its discrete line integral matches
/// the continuum one to quadrature accuracy.
pub fn extremal_eta(
    params: Params,
    q: &WeightField,
    x0: &[f64],
    r1: f64,
    r2: f64,
    grid: usize,
) -> Result<GridDensity> {
    let i = bounds::integral_i(params, q, x0, r1, r2)?;
    if i.value == 0.0 || i.value.is_infinite() {
        return Err(Error::ExtremalUndefined(format!(
            "weighted radial integral is {}, the extremal density needs 0 < I < inf",
            i.value
        )));
    }
    let s = params.radial_exponent();
    let inv_pm1 = 1.0 / (params.p() - 1.0);
    let i_value = i.value;
    let profile = |r: f64| -> f64 {
        let qr = q.profile(r).expect("extremal density needs a radial weight");
        if qr.is_infinite() {
            return 0.0;
        }
        1.0 / (i_value * r.powf(s) * qr.powf(inv_pm1))
    };
    let knots = GridDensity::uniform_knots(r1, r2, grid);
    let mut values = Vec::with_capacity(grid);
    for w in knots.windows(2) {
        let cell =
            quadrature::integrate_1d(&profile, w[0], w[1], 1e-13, SingularEndpoints::none())?;
        values.push(cell.value / (w[1] - w[0]));
    }
    let eta = GridDensity::new(knots, values)?;
    let total = eta.integral();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NotConverged(format!(
            "extremal density integrated to {total}, expected 1 within 1e-8"
        )));
    }
    Ok(eta)
}

/// The weighted p-energy F(eta) = omega_{n-1} int q(r) r^{n-1} eta^p(r) dr
/// of a piecewise-constant density, with exact per-cell moments.
pub fn weighted_energy(params: Params, q: &WeightField, eta: &GridDensity) -> Result<f64> {
    let weights = cell_energy_weights(params, Some(q), eta.knots())?;
    Ok(energy(&weights, eta.values(), params.p()))
}

/// The weighted p-energy of the exact (continuum) extremal density,
/// evaluated by direct quadrature of the full integrand. Algebraically
/// this equals omega_{n-1} / I^{p-1}; computing it the long way is the
/// verification route.
pub fn extremal_energy(
    params: Params,
    q: &WeightField,
    x0: &[f64],
    r1: f64,
    r2: f64,
) -> Result<f64> {
    let i = bounds::integral_i(params, q, x0, r1, r2)?;
    if i.value == 0.0 || i.value.is_infinite() {
        return Err(Error::ExtremalUndefined(format!(
            "weighted radial integral is {}",
            i.value
        )));
    }
    let s = params.radial_exponent();
    let p = params.p();
    let inv_pm1 = 1.0 / (p - 1.0);
    let nf = params.nf();
    let i_value = i.value;
    let integrand = |r: f64| -> f64 {
        let qr = q.profile(r).expect("extremal energy needs a radial weight");
        if qr.is_infinite() {
            return 0.0;
        }
        let eta = 1.0 / (i_value * r.powf(s) * qr.powf(inv_pm1));
        qr * r.powf(nf - 1.0) * eta.powf(p)
    };
    let res = quadrature::integrate_1d(&integrand, r1, r2, 1e-13, SingularEndpoints::none())?;
    Ok(params.omega() * res.value)
}

/// Report of the extremality verification.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalityReport {
    /// omega_{n-1} / I^{p-1}: the claimed minimum.
    pub closed_form: f64,
    /// Energy of the extremal density, by direct quadrature of the full
    /// integrand (the independent route to the closed form).
    pub f_eta0: f64,
    /// Best energy among random admissible competitors.
    pub min_random: f64,
    /// Energy reached by projected gradient from the uniform start.
    pub pg_minimum: f64,
    pub pg_converged: bool,
    /// Overall minimum across every candidate evaluated.
    pub min_value: f64,
    /// Whether the extremal density attains the minimum (1e-5 slack for
    /// grid discretization).
    pub attained_by_eta0: bool,
    /// Largest relative amount by which any candidate undercut the
    /// closed form; nonpositive slack means nothing beat it.
    pub worst_violation: f64,
    pub trials: usize,
}

/// Random admissible competitor: independent log-uniform cell values,
/// renormalized. Spans both smooth and spiky densities.
fn random_density(rng: &mut ChaCha8Rng, widths: &[f64]) -> Vec<f64> {
    let mut values: Vec<f64> = (0..widths.len())
        .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
        .collect();
    project(&mut values, widths);
    values
}

/// Multiplicative perturbation of a base density, renormalized.
fn perturbed_density(rng: &mut ChaCha8Rng, base: &[f64], widths: &[f64], spread: f64) -> Vec<f64> {
    let mut values: Vec<f64> = base
        .iter()
        .map(|v| v * 10f64.powf(rng.gen_range(-spread..spread)))
        .collect();
    project(&mut values, widths);
    values
}

/// Verifies that the extremal density minimizes the weighted p-energy:
/// evaluates F for the sampled extremal density, `trials` random
/// admissible densities (half fresh, half perturbations of the extremal
/// one, plus the uniform density), and a projected-gradient minimization
/// from the uniform start.
#[allow(clippy::too_many_arguments)]
pub fn verify_extremality(
    params: Params,
    q: &WeightField,
    x0: &[f64],
    r1: f64,
    r2: f64,
    trials: usize,
    seed: u64,
    grid: usize,
) -> Result<ExtremalityReport> {
    if trials < 10 {
        return Err(Error::Domain(format!(
            "extremality verification needs at least 10 trials, got {trials}"
        )));
    }
    let i = bounds::integral_i(params, q, x0, r1, r2)?;
    if i.value == 0.0 || i.value.is_infinite() {
        return Err(Error::ExtremalUndefined(format!(
            "weighted radial integral is {}",
            i.value
        )));
    }
    let closed_form = params.omega() / i.value.powf(params.p() - 1.0);

    let eta0 = extremal_eta(params, q, x0, r1, r2, grid)?;
    let weights = cell_energy_weights(params, Some(q), eta0.knots())?;
    let widths = eta0.cell_widths();
    let p = params.p();
    let f_eta0 = extremal_energy(params, q, x0, r1, r2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_random = f64::INFINITY;
    for t in 0..trials {
        let candidate = if t % 2 == 0 {
            random_density(&mut rng, &widths)
        } else {
            perturbed_density(&mut rng, eta0.values(), &widths, 0.5)
        };
        min_random = min_random.min(energy(&weights, &candidate, p));
    }
    // the uniform density is always among the competitors
    let mut uniform = vec![1.0; widths.len()];
    project(&mut uniform, &widths);
    let f_uniform = energy(&weights, &uniform, p);
    min_random = min_random.min(f_uniform);

    let pg = minimize_energy(&weights, &widths, p, uniform, 20_000);

    let min_value = f_eta0.min(min_random).min(pg.energy);
    let worst_violation = (closed_form - min_value) / closed_form;
    let attained_by_eta0 = f_eta0 <= min_value * (1.0 + 1e-5);
    Ok(ExtremalityReport {
        closed_form,
        f_eta0,
        min_random,
        pg_minimum: pg.energy,
        pg_converged: pg.converged,
        min_value,
        attained_by_eta0,
        worst_violation,
        trials: trials + 1,
    })
}

/// Every capacity bound evaluated on one spherical condenser, with the
/// exact value when available (unweighted identity scenario).
#[derive(Debug, Clone, Serialize)]
pub struct CapacityBoundReport {
    /// (name, value) pairs of lower bounds, in evaluation order.
    pub lower_bounds: Vec<(String, f64)>,
    /// The weighted-integral upper bound.
    pub upper_bound: f64,
    pub exact_or_oracle: Option<f64>,
    /// every lower <= exact <= upper within 1e-9 relative.
    pub consistent: bool,
}

/// Assembles the bound sandwich for the unweighted spherical condenser
/// (closed inner ball of radius r_inner inside the open ball of radius
/// r_outer): exact modulus, the applicable lower bounds, and the
/// weighted upper bound with Q == 1.
pub fn capacity_sandwich(
    params: Params,
    condenser: &crate::geometry::SphericalCondenser,
    c1: f64,
) -> Result<CapacityBoundReport> {
    let n = params.nf();
    let volume = params.ball_volume();
    let r_in = condenser.r_inner;
    let r_out = condenser.r_outer;
    let m_plate = volume * r_in.powf(n);
    let m_gap = volume * (r_out.powf(n) - r_in.powf(n));

    let mut lower_bounds = Vec::new();
    lower_bounds.push((
        "isoperimetric".to_string(),
        cap_lower_bound_isoperimetric(params, m_plate, m_gap)?,
    ));
    if validate(params, Requirement::PBelowN, "sandwich").is_ok() {
        lower_bounds.push((
            "measure".to_string(),
            cap_lower_bound_measure(params, m_plate)?,
        ));
    }
    if validate(params, Requirement::PAboveNMinus1, "sandwich").is_ok() {
        lower_bounds.push((
            "diameter".to_string(),
            cap_lower_bound_diameter(params, 2.0 * r_in, volume * r_out.powf(n), c1)?,
        ));
    }

    let exact = ring_modulus_exact(params, r_in, r_out)?;
    let upper = cap_upper_bound(
        params,
        &WeightField::constant(1.0),
        &condenser.center,
        r_in,
        r_out,
    )?;
    let consistent = lower_bounds
        .iter()
        .all(|&(_, low)| low <= exact * (1.0 + 1e-9))
        && exact <= upper.value * (1.0 + 1e-9);
    Ok(CapacityBoundReport {
        lower_bounds,
        upper_bound: upper.value,
        exact_or_oracle: Some(exact),
        consistent,
    })
}

/// Generates `count` random admissible densities on the given knots;
/// exposed for the ring-mapping definition verifier.
pub fn random_admissible_densities(
    knots: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<GridDensity>> {
    let widths: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| GridDensity::new(knots.to_vec(), random_density(&mut rng, &widths)))
        .collect()
}
