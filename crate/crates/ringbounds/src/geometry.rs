//! Dimensional constants and geometry primitives shared by all modules:
//! unit-ball volume, unit-sphere area, the exponent pair (n, p) with its
//! regime classification, and spherical rings/condensers.

use crate::error::{Error, Result};
use serde::Serialize;

/// Largest supported dimension. Every bound in the library is explicit in
/// n and the test plan never needs more; capping also keeps the gamma
/// products exact.
pub const MAX_DIM: usize = 16;

/// Tolerance used when classifying p = n.
pub const REGIME_EQ_TOL: f64 = 1e-12;

/// Gamma function at half-integer arguments 2x = k, k >= 1, via the exact
/// factorial product. Only what the volume formula needs.
fn gamma_half_integer(two_x: u32) -> f64 {
    debug_assert!(two_x >= 1);
    if two_x.is_multiple_of(2) {
        // integer argument: Gamma(m) = (m-1)!
        let m = two_x / 2;
        (1..m).map(|k| k as f64).product()
    } else {
        // Gamma(1/2) = sqrt(pi), then Gamma(x) = (x-1) Gamma(x-1)
        let mut value = std::f64::consts::PI.sqrt();
        let mut k = 1u32; // current argument is k/2
        while k < two_x {
            value *= k as f64 / 2.0;
            k += 2;
        }
        value
    }
}

/// Volume of the unit ball in R^n: pi^{n/2} / Gamma(n/2 + 1).
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidDimension {
            n: n as i64,
            reason: "unit ball volume requires n >= 1",
        });
    }
    if n > MAX_DIM {
        return Err(Error::InvalidDimension {
            n: n as i64,
            reason: "dimension capped at 16",
        });
    }
    let half_n = n as f64 / 2.0;
    Ok(std::f64::consts::PI.powf(half_n) / gamma_half_integer(n as u32 + 2))
}

/// Surface area of the unit sphere S^{n-1} in R^n: n * Omega_n.
pub fn unit_sphere_area(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            n: n as i64,
            reason: "sphere area requires n >= 2",
        });
    }
    Ok(n as f64 * unit_ball_volume(n)?)
}

/// Exponent regime of (n, p), classified with tolerance [`REGIME_EQ_TOL`]
/// on the equality p = n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// 1 < p < n, with p outside (n-1, n).
    BelowDim,
    /// n - 1 < p < n.
    BetweenDimMinus1AndDim,
    /// p = n.
    AtDim,
    /// p > n.
    AboveDim,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::BelowDim => write!(f, "1<p<n"),
            Regime::BetweenDimMinus1AndDim => write!(f, "n-1<p<n"),
            Regime::AtDim => write!(f, "p=n"),
            Regime::AboveDim => write!(f, "p>n"),
        }
    }
}

/// Regime a bound evaluator may require from its caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    /// Any p > 1.
    Any,
    /// 1 < p < n.
    PBelowN,
    /// p = n (within tolerance).
    PEqualsN,
    /// n - 1 < p < n.
    PBetweenNMinus1AndN,
    /// p > n - 1.
    PAboveNMinus1,
}

/// The exponent pair (n, p). Immutable once constructed; n in [2, 16],
/// p > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    n: usize,
    p: f64,
}

impl Params {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidDimension {
                n: n as i64,
                reason: "n must lie in [2, 16]",
            });
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParams(format!("p must satisfy p > 1, got p = {p}")));
        }
        Ok(Params { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn regime(&self) -> Regime {
        let n = self.nf();
        if (self.p - n).abs() <= REGIME_EQ_TOL {
            Regime::AtDim
        } else if self.p > n {
            Regime::AboveDim
        } else if self.p > n - 1.0 {
            Regime::BetweenDimMinus1AndDim
        } else {
            Regime::BelowDim
        }
    }

    /// True when 1 < p < n (strictly, beyond the equality tolerance).
    pub fn is_below_dim(&self) -> bool {
        matches!(self.regime(), Regime::BelowDim | Regime::BetweenDimMinus1AndDim)
    }

    pub fn omega(&self) -> f64 {
        // n is validated, unwrap cannot fire
        unit_sphere_area(self.n).expect("validated dimension")
    }

    pub fn ball_volume(&self) -> f64 {
        unit_ball_volume(self.n).expect("validated dimension")
    }

    /// The radial exponent (n-1)/(p-1) appearing in every weighted
    /// integral of the library.
    pub fn radial_exponent(&self) -> f64 {
        (self.nf() - 1.0) / (self.p - 1.0)
    }
}

/// Checks that `params` satisfies `requirement`; the error names the
/// calling bound and the violated inequality.
pub fn validate(params: Params, requirement: Requirement, context: &str) -> Result<Params> {
    let n = params.nf();
    let p = params.p();
    let fail = |violated: String| {
        Err(Error::RegimeMismatch {
            context: context.to_string(),
            violated,
        })
    };
    match requirement {
        Requirement::Any => Ok(params),
        Requirement::PBelowN => {
            if params.regime() == Regime::AtDim || p >= n {
                fail(format!("requires p < n, got p = {p}, n = {n}"))
            } else {
                Ok(params)
            }
        }
        Requirement::PEqualsN => {
            if params.regime() == Regime::AtDim {
                Ok(params)
            } else {
                fail(format!("requires p = n, got p = {p}, n = {n}"))
            }
        }
        Requirement::PBetweenNMinus1AndN => {
            if params.regime() == Regime::BetweenDimMinus1AndDim {
                Ok(params)
            } else {
                fail(format!("requires n-1 < p < n, got p = {p}, n = {n}"))
            }
        }
        Requirement::PAboveNMinus1 => {
            if p > n - 1.0 {
                Ok(params)
            } else {
                fail(format!("requires p > n-1, got p = {p}, n = {n}"))
            }
        }
    }
}

/// Open annulus r1 < |x - center| < r2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalRing {
    pub center: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
}

impl SphericalRing {
    pub fn new(center: Vec<f64>, r1: f64, r2: f64) -> Result<Self> {
        if !(r1.is_finite() && r2.is_finite()) || r1 <= 0.0 || r2 <= r1 {
            return Err(Error::DegenerateRing(format!(
                "need 0 < r1 < r2, got r1 = {r1}, r2 = {r2}"
            )));
        }
        Ok(SphericalRing { center, r1, r2 })
    }

    pub fn centered_at_origin(n: usize, r1: f64, r2: f64) -> Result<Self> {
        Self::new(vec![0.0; n], r1, r2)
    }
}

/// Condenser (open outer ball, closed inner ball) about a common center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalCondenser {
    pub center: Vec<f64>,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl SphericalCondenser {
    pub fn new(center: Vec<f64>, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner.is_finite() && r_outer.is_finite()) || r_inner <= 0.0 || r_outer <= r_inner {
            return Err(Error::DegenerateRing(format!(
                "need 0 < r_inner < r_outer, got r_inner = {r_inner}, r_outer = {r_outer}"
            )));
        }
        Ok(SphericalCondenser {
            center,
            r_inner,
            r_outer,
        })
    }

    /// The annulus separating the plates.
    pub fn gap(&self) -> SphericalRing {
        SphericalRing {
            center: self.center.clone(),
            r1: self.r_inner,
            r2: self.r_outer,
        }
    }
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Distance between two points of equal dimension.
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ball_volume_low_dimensions() {
        assert!(rel_err(unit_ball_volume(1).unwrap(), 2.0) < 1e-15);
        assert!(rel_err(unit_ball_volume(2).unwrap(), PI) < 1e-15);
        assert!(rel_err(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0) < 1e-15);
    }

    #[test]
    fn sphere_area_low_dimensions() {
        assert!(rel_err(unit_sphere_area(2).unwrap(), 2.0 * PI) < 1e-15);
        assert!(rel_err(unit_sphere_area(3).unwrap(), 4.0 * PI) < 1e-15);
    }

    #[test]
    fn sphere_area_is_n_times_volume() {
        for n in 2..=MAX_DIM {
            let omega = unit_sphere_area(n).unwrap();
            let volume = unit_ball_volume(n).unwrap();
            assert!(
                rel_err(omega, n as f64 * volume) < 1e-13,
                "identity failed at n = {n}"
            );
        }
    }

    #[test]
    fn volume_matches_two_step_recurrence() {
        // Omega_n = Omega_{n-2} * 2 pi / n
        for n in 3..=MAX_DIM {
            let direct = unit_ball_volume(n).unwrap();
            let recurred = unit_ball_volume(n - 2).unwrap() * 2.0 * PI / n as f64;
            assert!(
                rel_err(direct, recurred) < 1e-12,
                "recurrence failed at n = {n}: {direct} vs {recurred}"
            );
        }
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(unit_ball_volume(0).is_err());
        assert!(unit_sphere_area(1).is_err());
        assert!(unit_ball_volume(17).is_err());
    }

    #[test]
    fn regime_classification() {
        assert_eq!(Params::new(3, 2.0).unwrap().regime(), Regime::BelowDim);
        assert_eq!(
            Params::new(3, 2.5).unwrap().regime(),
            Regime::BetweenDimMinus1AndDim
        );
        assert_eq!(Params::new(3, 3.0).unwrap().regime(), Regime::AtDim);
        assert_eq!(
            Params::new(3, 3.0 - 1e-13).unwrap().regime(),
            Regime::AtDim
        );
        assert_eq!(Params::new(2, 3.0).unwrap().regime(), Regime::AboveDim);
    }

    #[test]
    fn validate_examples() {
        let p32 = Params::new(3, 2.0).unwrap();
        assert!(validate(p32, Requirement::PBelowN, "test").is_ok());

        let p33 = Params::new(3, 3.0).unwrap();
        let err = validate(p33, Requirement::PBelowN, "measure growth bound").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("requires p < n"), "got: {message}");
        assert!(message.contains("measure growth bound"), "got: {message}");

        let p325 = Params::new(3, 2.5).unwrap();
        assert!(validate(p325, Requirement::PBetweenNMinus1AndN, "test").is_ok());
        assert!(validate(p32, Requirement::PBetweenNMinus1AndN, "test").is_err());
    }

    #[test]
    fn params_rejects_bad_inputs() {
        assert!(Params::new(1, 2.0).is_err());
        assert!(Params::new(3, 1.0).is_err());
        assert!(Params::new(3, f64::NAN).is_err());
    }

    #[test]
    fn ring_and_condenser_validation() {
        assert!(SphericalRing::centered_at_origin(3, 0.5, 1.0).is_ok());
        assert!(SphericalRing::centered_at_origin(3, 1.0, 1.0).is_err());
        assert!(SphericalRing::centered_at_origin(3, 0.0, 1.0).is_err());
        assert!(SphericalCondenser::new(vec![0.0; 3], 0.5, 1.0).is_ok());
        assert!(SphericalCondenser::new(vec![0.0; 3], 1.0, 0.5).is_err());
    }
}
