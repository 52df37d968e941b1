//! The test-mapping zoo: radial power stretches x -> |x|^{a-1} x of the
//! unit ball, with closed-form image geometry, the derived weight oracle
//! that makes each stretch an admissible ring mapping with per-ring
//! equality, and the definition verifier itself.

use crate::error::{Error, Result};
use crate::geometry::{self, Params, SphericalRing};
use crate::modcap::{self, GridDensity};
use crate::weights::WeightField;
use serde::Serialize;

/// Radial power stretch f(x) = |x|^{a-1} x on the closed unit ball;
/// |f(x)| = |x|^a and f(0) = 0 for every a > 0. a = 1 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialMap {
    stretch: f64,
    dim: usize,
}

impl RadialMap {
    pub fn new(stretch: f64, dim: usize) -> Result<Self> {
        if !(stretch.is_finite() && stretch > 0.0) {
            return Err(Error::InvalidParams(format!(
                "stretch exponent must be positive, got {stretch}"
            )));
        }
        if !(2..=geometry::MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension {
                n: dim as i64,
                reason: "map dimension must lie in [2, 16]",
            });
        }
        Ok(RadialMap { stretch, dim })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(1.0, dim)
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.stretch == 1.0
    }

    /// Applies the map; the domain is |x| <= 1.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!(
                "point dimension {} does not match map dimension {}",
                x.len(),
                self.dim
            )));
        }
        let norm = geometry::norm(x);
        if norm > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "point with |x| = {norm} is outside the closed unit ball"
            )));
        }
        if norm == 0.0 {
            return Ok(vec![0.0; self.dim]);
        }
        let factor = norm.powf(self.stretch - 1.0);
        Ok(x.iter().map(|v| v * factor).collect())
    }

    /// l_f(r) = min over |x| = r of |f(x)| = r^a.
    pub fn min_modulus(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!(
                "radius must lie in (0, 1], got {r}"
            )));
        }
        Ok(r.powf(self.stretch))
    }

    /// m(f(B(0, r))) = Omega_n r^{n a}.
    pub fn image_ball_measure(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!(
                "radius must lie in (0, 1], got {r}"
            )));
        }
        let volume = geometry::unit_ball_volume(self.dim)?;
        Ok(volume * r.powf(self.dim as f64 * self.stretch))
    }

    /// Modulus of the image family: the ring (r1, r2) maps onto the ring
    /// (r1^a, r2^a), whose modulus is a closed form.
    pub fn image_ring_modulus(&self, params: Params, r1: f64, r2: f64) -> Result<f64> {
        if params.n() != self.dim {
            return Err(Error::Domain(format!(
                "parameter dimension {} does not match map dimension {}",
                params.n(),
                self.dim
            )));
        }
        if r2 > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "ring must sit inside the unit ball, got r2 = {r2}"
            )));
        }
        modcap::ring_modulus_exact(params, r1.powf(self.stretch), r2.powf(self.stretch))
    }

    /// The derived weight oracle q0(r) = a^{1-p} r^{-(a-1)(p-n)}: the
    /// radial weight for which the capacity upper bound of the image ring
    /// is attained with equality at the extremal density. At p = n it
    /// collapses to the constant a^{1-n}.
    pub fn oracle_weight(&self, params: Params) -> Result<WeightField> {
        if params.n() != self.dim {
            return Err(Error::Domain(format!(
                "parameter dimension {} does not match map dimension {}",
                params.n(),
                self.dim
            )));
        }
        let a = self.stretch;
        let p = params.p();
        let n = params.nf();
        let scale = a.powf(1.0 - p);
        let exponent = -(a - 1.0) * (p - n);
        Ok(WeightField::radial_power(scale, exponent))
    }

    /// Sampling check for the inclusion B(0, l_f(r)) inside f(B(0, r)):
    /// every y with |y| < l_f(r)(1 - 1e-6) must have a preimage in
    /// B(0, r). For the stretch family the preimage is the direction-
    /// preserving radial inversion y |y|^{1/a - 1}.
    pub fn inclusion_check(&self, r: f64, samples: usize, seed: u64) -> Result<bool> {
        let l = self.min_modulus(r)?;
        let target = l * (1.0 - 1e-6);
        let points = sample_ball(self.dim, target, samples, seed);
        for y in &points {
            let norm_y = geometry::norm(y);
            if norm_y == 0.0 {
                continue; // f(0) = 0
            }
            let factor = norm_y.powf(1.0 / self.stretch - 1.0);
            let x: Vec<f64> = y.iter().map(|v| v * factor).collect();
            if geometry::norm(&x) >= r {
                return Ok(false);
            }
            let image = self.apply(&x)?;
            if geometry::dist(&image, y) > 1e-12 * norm_y.max(1e-12) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn sample_ball(n: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_distr::StandardNormal;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let direction: Vec<f64> = loop {
                let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let norm = geometry::norm(&u);
                if norm > 1e-12 {
                    break u.iter().map(|v| v / norm).collect();
                }
            };
            let u: f64 = rng.gen();
            let rho = radius * u.powf(1.0 / n as f64);
            direction.iter().map(|v| v * rho).collect()
        })
        .collect()
}

/// Report of the ring-mapping definition check for one ring.
#[derive(Debug, Clone, Serialize)]
pub struct RingDefinitionReport {
    /// Modulus of the image curve family.
    pub image_modulus: f64,
    /// Weighted energy of the extremal density.
    pub rhs_extremal: f64,
    /// Smallest weighted energy among the random admissible densities.
    pub rhs_random_min: f64,
    /// Largest ratio (image modulus) / (weighted energy) over all tested
    /// densities; pass needs it at most 1 + 1e-9.
    pub worst_ratio: f64,
    pub pass: bool,
    pub trials: usize,
}

/// Tests the definition inequality M_p(f(ring family)) <= int Q eta^p dm
/// for the extremal density and `trials` random admissible ones.
pub fn verify_ring_definition(
    map: &RadialMap,
    q: &WeightField,
    params: Params,
    ring: &SphericalRing,
    trials: usize,
    seed: u64,
    grid: usize,
) -> Result<RingDefinitionReport> {
    if trials < 10 {
        return Err(Error::Domain(format!(
            "definition check needs at least 10 trials, got {trials}"
        )));
    }
    if ring.center.iter().any(|&c| c != 0.0) {
        return Err(Error::Domain(
            "the stretch zoo is defined about the origin; ring must be origin-centered".into(),
        ));
    }
    let lhs = map.image_ring_modulus(params, ring.r1, ring.r2)?;

    // the extremal side is evaluated on the exact density, not its grid
    // sampling, so equality cases resolve to quadrature accuracy
    let rhs_extremal = modcap::extremal_energy(params, q, &ring.center, ring.r1, ring.r2)?;
    let mut worst_ratio = lhs / rhs_extremal;

    let knots = GridDensity::uniform_knots(ring.r1, ring.r2, grid);
    let mut rhs_random_min = f64::INFINITY;
    for eta in modcap::random_admissible_densities(&knots, trials, seed)? {
        let rhs = modcap::weighted_energy(params, q, &eta)?;
        rhs_random_min = rhs_random_min.min(rhs);
        worst_ratio = worst_ratio.max(lhs / rhs);
    }
    Ok(RingDefinitionReport {
        image_modulus: lhs,
        rhs_extremal,
        rhs_random_min,
        worst_ratio,
        pass: worst_ratio <= 1.0 + 1e-9,
        trials,
    })
}
