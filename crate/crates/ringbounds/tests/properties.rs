//! Property tests for the algebraic invariants: scaling laws, monotone
//! behavior, admissibility after normalization, and quadrature
//! exactness on low-degree polynomials.

use proptest::prelude::*;
use ringbounds::bounds;
use ringbounds::geometry::{self, Params};
use ringbounds::maps::RadialMap;
use ringbounds::modcap::{self, GridDensity};
use ringbounds::quadrature::{self, SingularEndpoints};
use ringbounds::weights::WeightField;

fn params_strategy() -> impl Strategy<Value = Params> {
    (2usize..=5, 1.2f64..4.0).prop_filter_map("p > 1", |(n, p)| Params::new(n, p).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scaling the ring by lambda multiplies the modulus by lambda^{n-p}.
    #[test]
    fn ring_modulus_scaling_law(
        pr in params_strategy(),
        a in 0.1f64..1.0,
        gap in 0.2f64..2.0,
        lambda in 0.3f64..3.0,
    ) {
        let b = a + gap;
        let base = modcap::ring_modulus_exact(pr, a, b).unwrap();
        let scaled = modcap::ring_modulus_exact(pr, lambda * a, lambda * b).unwrap();
        let expected = base * lambda.powf(pr.nf() - pr.p());
        prop_assert!(
            (scaled - expected).abs() <= 1e-10 * expected.abs(),
            "{scaled} vs {expected}"
        );
    }

    /// Widening the ring can only decrease its modulus.
    #[test]
    fn ring_modulus_monotone_in_outer_radius(
        pr in params_strategy(),
        a in 0.1f64..1.0,
        gap in 0.1f64..1.0,
        extra in 0.01f64..1.0,
    ) {
        let narrow = modcap::ring_modulus_exact(pr, a, a + gap).unwrap();
        let wide = modcap::ring_modulus_exact(pr, a, a + gap + extra).unwrap();
        prop_assert!(wide <= narrow * (1.0 + 1e-12));
    }

    /// |f(x)| = |x|^a for the stretch family, across the ball.
    #[test]
    fn stretch_modulus_identity(
        a in 0.2f64..4.0,
        coords in proptest::collection::vec(-0.57f64..0.57, 3),
    ) {
        let map = RadialMap::new(a, 3).unwrap();
        let image = map.apply(&coords).unwrap();
        let expected = geometry::norm(&coords).powf(a);
        prop_assert!((geometry::norm(&image) - expected).abs() <= 1e-14);
    }

    /// Any positive density normalizes to an admissible one.
    #[test]
    fn normalization_makes_densities_admissible(
        values in proptest::collection::vec(1e-3f64..1e3, 4..64),
        r1 in 0.1f64..1.0,
        width in 0.1f64..2.0,
    ) {
        let knots = GridDensity::uniform_knots(r1, r1 + width, values.len());
        let eta = GridDensity::new(knots, values).unwrap().normalized().unwrap();
        prop_assert!(eta.is_admissible_normalized());
    }

    /// The capacity upper bound is linear in a constant weight.
    #[test]
    fn cap_upper_bound_scales_with_weight(
        pr in params_strategy(),
        lambda in 0.1f64..10.0,
    ) {
        let n = pr.n();
        let unit = modcap::cap_upper_bound(pr, &WeightField::constant(1.0), &vec![0.0; n], 0.5, 1.0)
            .unwrap()
            .value;
        let scaled = modcap::cap_upper_bound(
            pr,
            &WeightField::constant(lambda),
            &vec![0.0; n],
            0.5,
            1.0,
        )
        .unwrap()
        .value;
        prop_assert!((scaled - lambda * unit).abs() <= 1e-10 * (lambda * unit));
    }

    /// Adaptive quadrature reproduces cubic primitives exactly.
    #[test]
    fn quadrature_exact_on_cubics(
        c0 in -5.0f64..5.0,
        c1 in -5.0f64..5.0,
        c2 in -5.0f64..5.0,
        c3 in -5.0f64..5.0,
        a in -2.0f64..0.0,
        width in 0.5f64..3.0,
    ) {
        let b = a + width;
        let f = |x: f64| c0 + c1 * x + c2 * x * x + c3 * x * x * x;
        let primitive = |x: f64| {
            c0 * x + c1 * x * x / 2.0 + c2 * x * x * x / 3.0 + c3 * x * x * x * x / 4.0
        };
        let res = quadrature::integrate_1d(&f, a, b, 1e-12, SingularEndpoints::none()).unwrap();
        let exact = primitive(b) - primitive(a);
        prop_assert!((res.value - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
    }

    /// The weighted radial integral is additive over adjacent rings.
    #[test]
    fn radial_integral_additivity(
        pr in params_strategy(),
        scale in 0.2f64..3.0,
        exponent in -1.0f64..2.0,
        r1 in 0.2f64..0.5,
        split in 0.1f64..0.9,
    ) {
        let q = WeightField::radial_power(scale, exponent);
        let r2 = r1 + 0.6;
        let rm = r1 + 0.6 * split;
        let x0 = vec![0.0; pr.n()];
        let whole = bounds::integral_i(pr, &q, &x0, r1, r2).unwrap().value;
        let left = bounds::integral_i(pr, &q, &x0, r1, rm).unwrap().value;
        let right = bounds::integral_i(pr, &q, &x0, rm, r2).unwrap().value;
        prop_assert!(
            (whole - (left + right)).abs() <= 1e-9 * whole.abs().max(1.0),
            "{whole} vs {}",
            left + right
        );
    }
}
