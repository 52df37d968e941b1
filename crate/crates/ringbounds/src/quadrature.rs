//! Numerical integration engine: adaptive 1D Gauss-Kronrod quadrature
//! tolerant of endpoint singularities, and seed-deterministic Monte Carlo
//! over spheres, balls and annuli.
//!
//! Monte Carlo accumulation is performed in fixed-size chunks whose RNG
//! streams depend only on (seed, chunk index), so results are bit-identical
//! for a given seed regardless of how calls are scheduled.

use crate::error::{Error, Result};
use crate::geometry::{self, SphericalRing};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Default absolute tolerance for 1D quadrature.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Evaluation budget for 1D quadrature; exceeding it yields a
/// not-converged result, never a panic.
pub const MAX_EVALUATIONS_1D: usize = 1_000_000;

/// Point budget for Monte Carlo sampling.
pub const MAX_POINTS_MC: usize = 10_000_000;

/// Samples per deterministic RNG chunk.
const CHUNK: usize = 4096;

/// Result of a quadrature or Monte Carlo call. For Monte Carlo the error
/// field carries the standard error of the estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Endpoint singularity flags for [`integrate_1d`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SingularEndpoints {
    pub lower: bool,
    pub upper: bool,
}

impl SingularEndpoints {
    pub fn none() -> Self {
        Self::default()
    }
    pub fn lower() -> Self {
        SingularEndpoints { lower: true, upper: false }
    }
    pub fn upper() -> Self {
        SingularEndpoints { lower: false, upper: true }
    }
    pub fn both() -> Self {
        SingularEndpoints { lower: true, upper: true }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1];
// standard abscissae/weights quoted at full published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod pass over [a, b]. Returns (value, error estimate,
/// integral of |f|) or the first non-finite sample.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue { x, value: v })
        }
    };

    let f_mid = eval(mid)?;
    let mut resk = WGK[7] * f_mid;
    let mut resg = WG[3] * f_mid;
    let mut resabs = WGK[7] * f_mid.abs();
    let mut samples = [0.0f64; 15];
    samples[7] = f_mid;

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(mid - dx)?;
        let f2 = eval(mid + dx)?;
        samples[j] = f1;
        samples[14 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            // XGK odd indices are the embedded Gauss nodes
            resg += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (samples[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((samples[j] - mean).abs() + (samples[14 - j] - mean).abs());
    }

    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > 0.0 {
        err = err.max(floor);
    }
    Ok((value, err))
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive Gauss-Kronrod on a finite interval with a smooth (possibly
/// steep) integrand. Subdivides the largest-error interval until the
/// total estimate meets `tol` or the budget runs out.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, budget: usize) -> Result<QuadResult> {
    let (v0, e0) = gk15(f, a, b)?;
    let mut evaluations = 15usize;
    let mut total_value = v0;
    let mut total_error = e0;
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value: v0, error: e0 });

    let min_width = (b - a).abs() * 1e-15;
    while total_error > tol && evaluations + 30 <= budget {
        let worst = match heap.pop() {
            Some(i) => i,
            None => break,
        };
        if (worst.b - worst.a).abs() <= min_width {
            // cannot refine further; put it back and stop
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (vl, el) = gk15(f, worst.a, mid)?;
        let (vr, er) = gk15(f, mid, worst.b)?;
        evaluations += 30;
        total_value += vl + vr - worst.value;
        total_error += el + er - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: vl, error: el });
        heap.push(Interval { a: mid, b: worst.b, value: vr, error: er });
    }

    Ok(QuadResult {
        value: total_value,
        abs_error_estimate: total_error.max(0.0),
        evaluations,
        converged: total_error <= tol,
    })
}

/// Adaptive 1D quadrature of `f` over (a, b).
///
/// Flagged endpoints are treated as integrable singularities: the interval
/// is mapped through x = a + (b-a) u^6 (resp. mirrored), which turns
/// r^s-type singularities with s > -1 into tame integrands while keeping
/// all nodes strictly inside (a, b). The `converged` flag is honest: when
/// it is set, the reported error estimate is at or below `tol`.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    singular: SingularEndpoints,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Domain(format!(
            "integration interval must satisfy a < b with finite endpoints, got [{a}, {b}]"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }

    match (singular.lower, singular.upper) {
        (false, false) => adaptive(f, a, b, tol, MAX_EVALUATIONS_1D),
        (true, false) => {
            // x = a + (b-a) u^6, dx = 6 (b-a) u^5 du
            let span = b - a;
            let g = |u: f64| {
                let u5 = u * u * u * u * u;
                f(a + span * u5 * u) * 6.0 * span * u5
            };
            transformed(&g, a, span, tol)
        }
        (false, true) => {
            let span = b - a;
            let g = |u: f64| {
                let u5 = u * u * u * u * u;
                f(b - span * u5 * u) * 6.0 * span * u5
            };
            transformed(&g, b, span, tol)
        }
        (true, true) => {
            let mid = 0.5 * (a + b);
            let left = integrate_1d(f, a, mid, 0.5 * tol, SingularEndpoints::lower())?;
            let right = integrate_1d(f, mid, b, 0.5 * tol, SingularEndpoints::upper())?;
            Ok(QuadResult {
                value: left.value + right.value,
                abs_error_estimate: left.abs_error_estimate + right.abs_error_estimate,
                evaluations: left.evaluations + right.evaluations,
                converged: left.converged && right.converged,
            })
        }
    }
}

/// Integrates a transformed singular-endpoint integrand g over (0, 1].
///
/// When the singular endpoint sits at a nonzero coordinate, points closer
/// to it than float spacing are unrepresentable, so the u-domain is cut
/// at the representability floor and the remaining tail is extrapolated
/// from a local power-law fit; the extrapolated mass is also charged to
/// the error estimate. A singular endpoint at exactly 0 has no floor.
fn transformed<G: Fn(f64) -> f64>(g: &G, endpoint: f64, span: f64, tol: f64) -> Result<QuadResult> {
    let scale = endpoint.abs();
    let u_floor = if scale == 0.0 {
        0.0
    } else {
        ((4.0 * f64::EPSILON * scale) / span).powf(1.0 / 6.0).min(0.25)
    };
    let mut res = adaptive(g, u_floor.max(0.0), 1.0, tol, MAX_EVALUATIONS_1D)?;
    if u_floor > 0.0 {
        let g1 = g(u_floor);
        let g2 = g(2.0 * u_floor);
        if g1.is_finite() && g2.is_finite() && g1 > 0.0 && g2 > 0.0 {
            let m = (g2 / g1).ln() / std::f64::consts::LN_2;
            if m > -1.0 {
                let tail = g1 * u_floor / (m + 1.0);
                res.value += tail;
                res.abs_error_estimate += tail.abs();
            } else {
                res.abs_error_estimate += g2.abs() * u_floor * 10.0;
            }
        }
        res.evaluations += 2;
        res.converged = res.abs_error_estimate <= tol;
    }
    Ok(res)
}

/// RNG for one accumulation chunk; depends only on (seed, chunk index).
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk.wrapping_add(1));
    rng
}

/// Uniform direction on S^{n-1} via normalized Gaussians.
fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = geometry::norm(&u);
        if norm > 1e-12 {
            return u.iter().map(|v| v / norm).collect();
        }
    }
}

/// Fold a direction into the positive orthant and enumerate its 2^n
/// sign copies; used for orthant-stratified sampling when n is small.
fn orthant_copies(direction: &[f64]) -> Vec<Vec<f64>> {
    let n = direction.len();
    let base: Vec<f64> = direction.iter().map(|v| v.abs()).collect();
    (0..1usize << n)
        .map(|mask| {
            base.iter()
                .enumerate()
                .map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v })
                .collect()
        })
        .collect()
}

/// Running mean/variance accumulator (Welford).
#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
    saw_infinite: bool,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        if x.is_infinite() {
            self.saw_infinite = true;
            return;
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn mean(&self) -> f64 {
        if self.saw_infinite {
            f64::INFINITY
        } else {
            self.mean
        }
    }

    fn std_error(&self) -> f64 {
        if self.saw_infinite || self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count as f64 - 1.0) / self.count as f64).sqrt()
        }
    }
}

/// Monte Carlo estimate of the mean of `g` over points produced by
/// `make_point`, chunked deterministically. One observation per base draw;
/// when stratified, the observation is the orthant average.
fn mc_mean<P, G>(
    n: usize,
    budget: usize,
    seed: u64,
    make_point: P,
    g: G,
) -> Result<(Accumulator, usize)>
where
    P: Fn(&mut ChaCha8Rng, &[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Result<f64>,
{
    let stratify = n <= 6;
    let copies = if stratify { 1usize << n } else { 1 };
    let base_draws = (budget / copies).max(1);
    let budget_cap = MAX_POINTS_MC / copies;
    let base_draws = base_draws.min(budget_cap.max(1));

    let mut acc = Accumulator::default();
    let mut emitted = 0usize;
    let chunks = base_draws.div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = chunk_rng(seed, chunk as u64);
        let in_chunk = CHUNK.min(base_draws - chunk * CHUNK);
        for _ in 0..in_chunk {
            let direction = random_direction(&mut rng, n);
            if stratify {
                let mut sum = 0.0f64;
                let mut infinite = false;
                for copy in orthant_copies(&direction) {
                    let point = make_point(&mut rng, &copy);
                    let v = g(&point)?;
                    emitted += 1;
                    if v.is_infinite() {
                        infinite = true;
                    } else {
                        sum += v;
                    }
                }
                if infinite {
                    acc.push(f64::INFINITY);
                } else {
                    acc.push(sum / copies as f64);
                }
            } else {
                let point = make_point(&mut rng, &direction);
                let v = g(&point)?;
                emitted += 1;
                acc.push(v);
            }
        }
    }
    Ok((acc, emitted))
}

fn check_sample(point: &[f64], v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::NanSample { point: point.to_vec() })
    } else {
        Ok(v)
    }
}

/// Mean of `g` over the sphere S(x0, r), with standard error.
/// Returns (mean, std_error, samples).
pub fn sphere_mean<G: Fn(&[f64]) -> f64>(
    g: &G,
    x0: &[f64],
    r: f64,
    budget: usize,
    seed: u64,
) -> Result<(f64, f64, usize)> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("sphere radius must be positive, got {r}")));
    }
    if budget < 1000 {
        return Err(Error::Domain(format!(
            "monte-carlo budget must be at least 1000, got {budget}"
        )));
    }
    let n = x0.len();
    let make_point = |_: &mut ChaCha8Rng, dir: &[f64]| -> Vec<f64> {
        dir.iter().zip(x0).map(|(d, c)| c + r * d).collect()
    };
    let (acc, emitted) = mc_mean(n, budget, seed, make_point, |pt| check_sample(pt, g(pt)))?;
    Ok((acc.mean(), acc.std_error(), emitted))
}

/// Integral of `g` over the sphere S(x0, r) with respect to the
/// (n-1)-dimensional surface measure.
pub fn sphere_integral<G: Fn(&[f64]) -> f64>(
    g: &G,
    x0: &[f64],
    r: f64,
    budget: usize,
    seed: u64,
) -> Result<QuadResult> {
    let n = x0.len();
    let area = geometry::unit_sphere_area(n)? * r.powi(n as i32 - 1);
    let (mean, std_error, samples) = sphere_mean(g, x0, r, budget, seed)?;
    Ok(QuadResult {
        value: area * mean,
        abs_error_estimate: area * std_error,
        evaluations: samples,
        converged: true,
    })
}

/// Mean of `g` over the ball B(x0, eps): radius drawn with density
/// proportional to r^{n-1}, direction uniform.
pub fn ball_mean_mc<G: Fn(&[f64]) -> f64>(
    g: &G,
    x0: &[f64],
    eps: f64,
    budget: usize,
    seed: u64,
) -> Result<(f64, f64, usize)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {eps}")));
    }
    let n = x0.len();
    let make_point = |rng: &mut ChaCha8Rng, dir: &[f64]| -> Vec<f64> {
        let u: f64 = rng.gen();
        let radius = eps * u.powf(1.0 / n as f64);
        dir.iter().zip(x0).map(|(d, c)| c + radius * d).collect()
    };
    let (acc, emitted) = mc_mean(n, budget, seed, make_point, |pt| check_sample(pt, g(pt)))?;
    Ok((acc.mean(), acc.std_error(), emitted))
}

/// Integral of `h` over the annulus `ring` with respect to Lebesgue
/// measure; radius drawn with density proportional to r^{n-1}.
pub fn annulus_integral<H: Fn(&[f64]) -> f64>(
    h: &H,
    ring: &SphericalRing,
    budget: usize,
    seed: u64,
) -> Result<QuadResult> {
    let n = ring.center.len();
    let volume = geometry::unit_ball_volume(n)? * (ring.r2.powi(n as i32) - ring.r1.powi(n as i32));
    let r1n = ring.r1.powi(n as i32);
    let r2n = ring.r2.powi(n as i32);
    let make_point = |rng: &mut ChaCha8Rng, dir: &[f64]| -> Vec<f64> {
        let u: f64 = rng.gen();
        let radius = (r1n + u * (r2n - r1n)).powf(1.0 / n as f64);
        dir.iter()
            .zip(&ring.center)
            .map(|(d, c)| c + radius * d)
            .collect()
    };
    let (acc, emitted) = mc_mean(n, budget, seed, make_point, |pt| check_sample(pt, h(pt)))?;
    Ok(QuadResult {
        value: volume * acc.mean(),
        abs_error_estimate: volume * acc.std_error(),
        evaluations: emitted,
        converged: true,
    })
}

/// Deterministic sphere point sample used by tests to verify the
/// on-sphere invariant; same generator as [`sphere_mean`].
pub fn sample_sphere_points(x0: &[f64], r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = x0.len();
    let mut points = Vec::with_capacity(count);
    let mut chunk = 0u64;
    'outer: loop {
        let mut rng = chunk_rng(seed, chunk);
        for _ in 0..CHUNK {
            if points.len() >= count {
                break 'outer;
            }
            let dir = random_direction(&mut rng, n);
            points.push(dir.iter().zip(x0).map(|(d, c)| c + r * d).collect());
        }
        chunk += 1;
    }
    points
}
