//! Acceptance suite: every verification criterion the library promises,
//! with its tolerance and runtime budget pinned in code. One pass/fail
//! line per criterion (visible with --nocapture).

use ringbounds::bounds::{self, GrowthHypothesis, Psi};
use ringbounds::geometry::Params;
use ringbounds::maps::RadialMap;
use ringbounds::modcap;
use ringbounds::quadrature::{self, SingularEndpoints};
use ringbounds::weights::{self, WeightField};
use std::time::{Duration, Instant};

fn params(n: usize, p: f64) -> Params {
    Params::new(n, p).unwrap()
}

fn conclude(criterion: &str, started: Instant, budget: Duration, pass: bool, detail: String) {
    let elapsed = started.elapsed();
    let verdict = if pass && elapsed <= budget { "PASS" } else { "FAIL" };
    println!("[{verdict}] {criterion}: {detail} (elapsed {elapsed:.2?}, budget {budget:.2?})");
    assert!(pass, "{criterion}: {detail}");
    assert!(
        elapsed <= budget,
        "{criterion}: runtime {elapsed:.2?} exceeded budget {budget:.2?}"
    );
}

const NP_SET: [(usize, f64); 4] = [(2, 2.0), (3, 3.0), (3, 2.0), (3, 2.5)];
const RING_SET: [(f64, f64); 2] = [(0.5, 1.0), (0.1, 0.9)];

#[test]
fn criterion_1_closed_form_consistency() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for &(n, p) in &NP_SET {
        for &(r1, r2) in &RING_SET {
            let pr = params(n, p);
            let upper = modcap::cap_upper_bound(pr, &WeightField::constant(1.0), &vec![0.0; n], r1, r2)
                .unwrap();
            let exact = modcap::ring_modulus_exact(pr, r1, r2).unwrap();
            worst = worst.max(((upper.value - exact) / exact).abs());
        }
    }
    conclude(
        "criterion 1 (weighted upper bound matches classical modulus, Q == 1)",
        started,
        Duration::from_secs(1),
        worst <= 1e-10,
        format!("max relative deviation {worst:.3e} (tolerance 1e-10)"),
    );
}

#[test]
fn criterion_2_discrete_oracle_proxy() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for &(n, p) in &NP_SET {
        for &(r1, r2) in &RING_SET {
            let pr = params(n, p);
            let exact = modcap::ring_modulus_exact(pr, r1, r2).unwrap();
            let discrete = modcap::discrete_ring_modulus(pr, r1, r2, 1024).unwrap();
            all_converged &= discrete.converged;
            worst = worst.max(((discrete.value - exact) / exact).abs());
        }
    }
    conclude(
        "criterion 2 (discrete modulus oracle within 2% at grid 1024)",
        started,
        Duration::from_secs(30),
        worst <= 0.02 && all_converged,
        format!("max relative deviation {worst:.3e} (tolerance 2e-2), converged = {all_converged}"),
    );
}

#[test]
fn criterion_3_extremal_density_minimizes() {
    let started = Instant::now();
    // ten pinned draws of (n, p, ring, power-profile weight)
    let cases = [
        (2usize, 1.6, 0.3, 0.9, -1.0, 1.7),
        (3, 2.0, 0.5, 1.0, 0.5, 0.8),
        (3, 2.5, 0.4, 1.2, -0.5, 2.3),
        (3, 3.0, 0.6, 1.5, 2.0, 0.9),
        (4, 2.2, 0.7, 1.1, 1.0, 1.4),
        (2, 2.0, 0.2, 0.5, -0.8, 2.0),
        (4, 4.0, 0.5, 0.9, 1.5, 1.1),
        (5, 3.1, 0.8, 1.6, 0.0, 0.7),
        (3, 1.8, 0.35, 0.75, -1.0, 1.0),
        (2, 1.9, 0.45, 1.3, 0.9, 1.6),
    ];
    let mut worst_pg: f64 = 0.0;
    let mut worst_violation: f64 = 0.0;
    for (k, &(n, p, r1, r2, s, scale)) in cases.iter().enumerate() {
        let pr = params(n, p);
        let q = WeightField::radial_power(scale, s);
        let outcome = modcap::verify_extremality(
            pr,
            &q,
            &vec![0.0; n],
            r1,
            r2,
            100,
            7000 + k as u64,
            1024,
        )
        .unwrap();
        worst_pg = worst_pg
            .max(((outcome.pg_minimum - outcome.closed_form) / outcome.closed_form).abs());
        worst_violation = worst_violation.max(outcome.worst_violation);
        assert!(outcome.attained_by_eta0, "case {k}: {outcome:?}");
    }
    conclude(
        "criterion 3 (extremal density attains the weighted-energy minimum)",
        started,
        Duration::from_secs(60),
        worst_pg <= 0.01 && worst_violation <= 1e-6,
        format!(
            "max |PG - closed form| / closed form = {worst_pg:.3e} (tol 1e-2), \
             worst undercut {worst_violation:.3e} (tol 1e-6), 100 random densities per case"
        ),
    );
}

#[test]
fn criterion_4_measure_bound_sharp_at_critical_exponent() {
    let started = Instant::now();
    let radii = [1e-1f64, 1e-2, 1e-3, 1e-4, 1e-5];
    let mut worst_eq: f64 = 0.0;
    // p = n: the bound equals the true image measure for every stretch
    for n in [2usize, 3] {
        let pr = params(n, n as f64);
        for &a in &[0.5, 1.0, 2.0] {
            let map = RadialMap::new(a, n).unwrap();
            let c = pr.omega() * a.powf(1.0 - pr.nf());
            for &r in &radii {
                let j = (1.0 / r).ln();
                let bound = bounds::measure_bound(pr, 1.0, c, j).unwrap();
                let truth = map.image_ball_measure(r).unwrap();
                let closed = pr.ball_volume() * r.powf(pr.nf() * a);
                worst_eq = worst_eq.max(((bound - truth) / truth).abs());
                worst_eq = worst_eq.max(((bound - closed) / closed).abs());
            }
        }
    }
    // 1 < p < n: the bound dominates the true measure with nonnegative
    // slack once the growth constant is feasible on the grid
    let mut worst_slack: f64 = f64::INFINITY;
    for &(n, p) in &[(3usize, 2.0), (3, 2.5)] {
        let pr = params(n, p);
        for &a in &[1.0, 2.0] {
            let map = RadialMap::new(a, n).unwrap();
            let q = map.oracle_weight(pr).unwrap();
            let hyp = GrowthHypothesis::primitive_power(pr, Psi::reciprocal(), 1.0, 1.0).unwrap();
            let check =
                bounds::check_growth_condition(pr, &q, &hyp, &radii, 10_000, 1).unwrap();
            let c = check.min_feasible_c;
            for &r in &radii {
                let j = (1.0 / r).ln();
                let bound = bounds::measure_bound(pr, 1.0, c, j).unwrap();
                let truth = map.image_ball_measure(r).unwrap();
                worst_slack = worst_slack.min((bound - truth) / bound);
            }
        }
    }
    conclude(
        "criterion 4 (image-measure bound: equality at p = n, domination below)",
        started,
        Duration::from_secs(5),
        worst_eq <= 1e-10 && worst_slack >= -1e-12,
        format!(
            "max relative deviation at p = n: {worst_eq:.3e} (tol 1e-10); \
             min relative slack below: {worst_slack:.3e} (must be >= 0)"
        ),
    );
}

#[test]
fn criterion_5_critical_schwarz_sharpness() {
    let started = Instant::now();
    let radii = [1e-1f64, 1e-2, 1e-3, 1e-4, 1e-5];
    let mut worst_gamma: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for n in [2usize, 3] {
        let pr = params(n, n as f64);
        for &a in &[0.5, 1.0, 2.0] {
            let map = RadialMap::new(a, n).unwrap();
            let c = pr.omega() * a.powf(1.0 - pr.nf());
            let gamma0 = bounds::gamma0_constant(pr, c).unwrap();
            worst_gamma = worst_gamma.max((gamma0 - a).abs() / a);
            for &r in &radii {
                let ratio = map.min_modulus(r).unwrap() / r.powf(gamma0);
                worst_ratio = worst_ratio.max((ratio - 1.0).abs());
            }
        }
    }
    conclude(
        "criterion 5 (sharp stretch exponent and unit ratio at p = n)",
        started,
        Duration::from_secs(1),
        worst_gamma <= 1e-12 && worst_ratio <= 1e-12,
        format!(
            "max |gamma0 - a|/a = {worst_gamma:.3e}, max |l_f(r)/r^gamma0 - 1| = {worst_ratio:.3e} \
             (tolerance 1e-12)"
        ),
    );
}

#[test]
fn criterion_6_ball_mean_growth_pipeline() {
    let started = Instant::now();
    let pr = params(3, 2.0);
    let x0 = [0.0; 3];
    let grid = weights::geometric_grid(0.25, 0.5, 21);

    // constant weights: flat table, finite positive bound, homogeneity
    let mut flat_ok = true;
    let mut bound_ok = true;
    for &k in &[1.0, 2.7, 10.0] {
        let q = WeightField::constant(k);
        let q0 = weights::q0_estimate(&q, &x0, &grid, 10_000, 1).unwrap();
        for &(_, mean) in &q0.table {
            flat_ok &= ((mean - k) / k).abs() <= 1e-12;
        }
        let bound = bounds::theorem_growth_bound(pr, q0.liminf_proxy).unwrap();
        bound_ok &= bound.is_finite() && bound > 0.0;
    }
    let b1 = bounds::theorem_growth_bound(pr, 1.0).unwrap();
    let b3 = bounds::theorem_growth_bound(pr, 3.0).unwrap();
    let exponent = 1.0 / (pr.nf() - pr.p());
    let homogeneous = ((b3 / b1 - 3f64.powf(exponent)) / 3f64.powf(exponent)).abs() <= 1e-12;

    // stretch oracle with a > 1: ball means and radial ratios both fall
    // toward zero, consistently with the bound
    let a = 2.0;
    let map = RadialMap::new(a, 3).unwrap();
    let q = map.oracle_weight(pr).unwrap();
    let q0 = weights::q0_estimate(&q, &x0, &grid, 10_000, 1).unwrap();
    let means: Vec<f64> = q0.table.iter().map(|&(_, v)| v).collect();
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let vanishing = means[means.len() - 1] <= 1e-2 * means[0];
    let mut min_ratio = f64::INFINITY;
    for &eps in &grid {
        min_ratio = min_ratio.min(map.min_modulus(eps).unwrap() / eps);
    }
    let bound = bounds::theorem_growth_bound(pr, q0.liminf_proxy).unwrap();
    let consistent = min_ratio <= bound * (1.0 + 1e-9);

    conclude(
        "criterion 6 (ball-mean growth bound pipeline)",
        started,
        Duration::from_secs(5),
        flat_ok && bound_ok && homogeneous && decreasing && vanishing && consistent,
        format!(
            "constant tables flat to 1e-12: {flat_ok}; homogeneity 1/(n-p): {homogeneous}; \
             oracle means fall {:.3e} -> {:.3e}; min ratio {min_ratio:.3e} <= bound {bound:.3e}",
            means[0],
            means[means.len() - 1]
        ),
    );
}

#[test]
fn criterion_7_envelope_fit_is_stable() {
    let started = Instant::now();
    let pr = params(3, 2.5);
    let eps0 = 0.25;
    let mut stable_all = true;
    let mut details = Vec::new();
    for &a in &[1.0, 2.0] {
        let map = RadialMap::new(a, 3).unwrap();
        let q = map.oracle_weight(pr).unwrap();
        // probes spanning three decades below eps0/10
        let mut probes = Vec::new();
        for k in 0..13 {
            let eps = (eps0 / 10.0) * 10f64.powf(-3.0 * k as f64 / 12.0);
            let i = bounds::integral_i(pr, &q, &[0.0; 3], eps, eps0).unwrap().value;
            probes.push((eps, i, map.min_modulus(eps).unwrap()));
        }
        let envelope = bounds::holder_envelope(pr, &probes, 1.0).unwrap();
        stable_all &= envelope.stable;
        details.push(format!(
            "a = {a}: N = {:.4e}, first decade {:.4e}, stable = {}",
            envelope.n_fitted, envelope.n_first_decade, envelope.stable
        ));
    }
    let theorem4 = bounds::fmo_envelope_exponent(pr);
    let expected = (1.0 - pr.p()) * (pr.nf() - 1.0) / pr.p();
    let exponent_exact = theorem4 == expected && (theorem4 + 1.2).abs() < 1e-12;
    conclude(
        "criterion 7 (log-Hoelder envelope constant stable over three decades)",
        started,
        Duration::from_secs(5),
        stable_all && exponent_exact,
        format!("{}; double-log exponent = {theorem4}", details.join("; ")),
    );
}

#[test]
fn criterion_8_mean_oscillation_suite() {
    let started = Instant::now();
    let x0 = [0.0; 3];
    let grid = weights::geometric_grid(0.1, 0.1, 6); // 1e-1 .. 1e-6

    let constant = weights::fmo_verdict(&WeightField::constant(5.0), &x0, &grid, 10_000, 1)
        .unwrap()
        .verdict;
    let log = weights::fmo_verdict(&WeightField::radial_log(), &x0, &grid, 10_000, 1)
        .unwrap()
        .verdict;
    let inverse =
        weights::fmo_verdict(&WeightField::radial_power(1.0, -1.0), &x0, &grid, 10_000, 1)
            .unwrap()
            .verdict;
    let verdicts_ok = constant == weights::FmoVerdict::Finite
        && log == weights::FmoVerdict::Finite
        && inverse == weights::FmoVerdict::Diverging;

    // canonical-kernel growth for the log weight: the weighted mass over
    // A(eps, eps0) stays bounded against log log(1/eps)
    let pr = params(3, 2.4);
    let kernel = bounds::fmo_psi(pr, 0.3).unwrap();
    let hyp = GrowthHypothesis::integral_power(pr, kernel.psi.clone(), 1.0, 1.0, 0.3, 0.29)
        .unwrap();
    let scan: Vec<f64> = vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let check = bounds::check_growth_condition(
        pr,
        &WeightField::radial_log(),
        &hyp,
        &scan,
        10_000,
        1,
    )
    .unwrap();
    let ratios: Vec<f64> = check
        .rows
        .iter()
        .map(|row| row.lhs / (1.0 / row.r).ln().ln())
        .collect();
    let bounded = ratios.iter().all(|r| r.is_finite())
        && ratios.iter().all(|&r| r <= ratios[0] * 1.05);

    conclude(
        "criterion 8 (mean-oscillation verdicts and canonical-kernel growth)",
        started,
        Duration::from_secs(60),
        verdicts_ok && bounded,
        format!(
            "verdicts: constant = {constant}, log = {log}, inverse = {inverse}; \
             kernel-mass / loglog ratios {:?}",
            ratios.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_9_quadrature_floor_and_shell_consistency() {
    let started = Instant::now();
    let sqrt_integral = quadrature::integrate_1d(
        &|r: f64| r.powf(-0.5),
        0.0,
        1.0,
        1e-10,
        SingularEndpoints::lower(),
    )
    .unwrap();
    let floor_ok = (sqrt_integral.value - 2.0).abs() <= 1e-8;

    // shell consistency: omega * I equals the annulus mass of Q psi^p
    // computed by n-dimensional Monte Carlo, within three standard errors
    let cases = [
        (2usize, 1.7, 0.4, 0.9, 0.5, 1.2),
        (3, 2.0, 0.5, 1.0, 0.0, 1.0),
        (3, 2.5, 0.3, 0.8, 1.0, 0.7),
        (3, 3.0, 0.6, 1.3, -0.5, 1.5),
        (4, 2.4, 0.5, 1.1, 0.8, 2.0),
        (2, 2.0, 0.2, 0.6, -1.0, 0.9),
        (4, 3.5, 0.7, 1.4, 1.5, 1.1),
        (5, 4.0, 0.8, 1.5, 0.3, 0.6),
        (3, 2.2, 0.45, 0.95, 2.0, 1.3),
        (2, 1.5, 0.35, 0.85, -0.6, 1.8),
    ];
    let mut worst_sigma: f64 = 0.0;
    for (k, &(n, p, r1, r2, s, scale)) in cases.iter().enumerate() {
        let pr = params(n, p);
        let q = WeightField::radial_power(scale, s);
        let i = bounds::integral_i(pr, &q, &vec![0.0; n], r1, r2).unwrap();
        let shell_route = pr.omega() * i.value;

        let radial_exp = pr.radial_exponent();
        let inv_pm1 = 1.0 / (p - 1.0);
        let h = move |x: &[f64]| {
            let t = ringbounds::geometry::norm(x);
            let qt = scale * t.powf(s);
            let psi = 1.0 / (t.powf(radial_exp) * qt.powf(inv_pm1));
            qt * psi.powf(p)
        };
        let ring = ringbounds::geometry::SphericalRing::centered_at_origin(n, r1, r2).unwrap();
        let mc = quadrature::annulus_integral(&h, &ring, 200_000, 430 + k as u64).unwrap();
        let sigma = (mc.value - shell_route).abs() / mc.abs_error_estimate.max(1e-300);
        worst_sigma = worst_sigma.max(sigma);
    }
    conclude(
        "criterion 9 (singular quadrature floor and shell/Monte-Carlo agreement)",
        started,
        Duration::from_secs(30),
        floor_ok && worst_sigma <= 3.0,
        format!(
            "inverse-sqrt integral error {:.3e} (tol 1e-8); worst shell deviation \
             {worst_sigma:.2} standard errors (tol 3)",
            (sqrt_integral.value - 2.0).abs()
        ),
    );
}
