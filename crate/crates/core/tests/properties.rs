//! Property tests for the norm and scheme invariants.

use proptest::prelude::*;

use roughflow_core::commutator::{kruzkov_f, kruzkov_gbar};
use roughflow_core::flux::FluxLaw;
use roughflow_core::forge::{spectral_field, RoughFieldSpec};
use roughflow_core::grid::{
    discrete_w1p, lorentz_q1_norm, lp_norm, Exponent, GridSpec, ScalarField, VectorField,
};
use roughflow_core::kernel::{discrete_seminorm, SemiNormParams};
use roughflow_core::scheme::{self, SchemeDef};

fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norm_is_homogeneous(values in field_strategy(32), lambda in -5.0f64..5.0, p in 1.0f64..4.0) {
        let g = GridSpec::new(1, 32, 1e-3).unwrap();
        let u = ScalarField::new(g, values).unwrap();
        let base = lp_norm(&u, Exponent::Finite(p)).unwrap();
        let scaled = lp_norm(&u.scale(lambda), Exponent::Finite(p)).unwrap();
        prop_assert!((scaled - lambda.abs() * base).abs() <= 1e-10 * (1.0 + base));
    }

    #[test]
    fn l1_bounded_by_lp_on_unit_torus(values in field_strategy(64), p in 1.0f64..4.0) {
        let g = GridSpec::new(1, 64, 1e-3).unwrap();
        let u = ScalarField::new(g, values).unwrap();
        let l1 = lp_norm(&u, Exponent::Finite(1.0)).unwrap();
        let lp = lp_norm(&u, Exponent::Finite(p)).unwrap();
        prop_assert!(l1 <= lp * (1.0 + 1e-12));
    }

    #[test]
    fn lorentz_indicator_is_exact_measure_power(cells in 1usize..64, q in 1.1f64..5.0) {
        let g = GridSpec::new(1, 64, 1e-3).unwrap();
        let u = ScalarField::new(
            g,
            (0..64).map(|i| if i < cells { 1.0 } else { 0.0 }).collect(),
        )
        .unwrap();
        let measure = cells as f64 / 64.0;
        let norm = lorentz_q1_norm(&u, q).unwrap();
        prop_assert!((norm - measure.powf(1.0 / q)).abs() <= 1e-12);
    }

    #[test]
    fn shift_roundtrips(node in 0usize..256, k in 0usize..2, tau in -9i64..9) {
        let g = GridSpec::new(2, 16, 1e-3).unwrap();
        let node = node % g.node_count();
        prop_assert_eq!(g.shift_node(g.shift_node(node, k, tau), k, -tau), node);
    }

    #[test]
    fn seminorm_translation_invariant(values in field_strategy(16), offset in 0usize..16) {
        let g = GridSpec::new(1, 16, 1e-3).unwrap();
        let u = ScalarField::new(g, values.clone()).unwrap();
        let rotated: Vec<f64> = (0..16).map(|i| values[(i + offset) % 16]).collect();
        let v = ScalarField::new(g, rotated).unwrap();
        let params = SemiNormParams::new(0.5, 1.0, 0.5, &g).unwrap();
        let su = discrete_seminorm(&u, &params).unwrap();
        let sv = discrete_seminorm(&v, &params).unwrap();
        prop_assert!((su - sv).abs() <= 1e-10 * (1.0 + su));
    }

    #[test]
    fn w1p_vanishes_only_on_constants(c in -3.0f64..3.0) {
        let g = GridSpec::new(2, 8, 1e-3).unwrap();
        let a = VectorField::constant(g, &[c, -c]);
        prop_assert_eq!(discrete_w1p(&a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn kruzkov_f_symmetric_nonneg_lipschitz(xi in -2.0f64..2.0, zeta in -2.0f64..2.0) {
        for law in [FluxLaw::linear(), FluxLaw::burgers(2.0)] {
            let f = kruzkov_f(&law, xi, zeta);
            prop_assert!((f - kruzkov_f(&law, zeta, xi)).abs() <= 1e-14);
            prop_assert!(f.abs() <= law.lip() * (xi - zeta).abs() + 1e-12);
            let gbar = kruzkov_gbar(&law, xi, zeta);
            prop_assert!((gbar + kruzkov_gbar(&law, zeta, xi)).abs() <= 1e-14);
        }
        // F >= 0 wherever f is nondecreasing: everywhere for f = Id,
        // on the nonnegative half-line for the quadratic flux
        prop_assert!(kruzkov_f(&FluxLaw::linear(), xi, zeta) >= -1e-14);
        prop_assert!(kruzkov_f(&FluxLaw::burgers(2.0), xi.abs(), zeta.abs()) >= -1e-14);
    }

    #[test]
    fn step_conserves_mass_and_order(seed in 0u64..400, bump in 0.01f64..0.3) {
        let g = GridSpec::new(1, 32, 1e-3).unwrap();
        let a = spectral_field(&RoughFieldSpec::new(1.5, seed, false), &g).unwrap();
        let a = a.scale(1.0 / a.max_component().max(1e-9));
        let base = roughflow_core::forge::spectral_scalar(
            &RoughFieldSpec::new(2.0, seed + 1, false), &g, "prop-u0");
        let lo = base.min();
        let span = (base.max() - lo).max(1e-9);
        let u: Vec<f64> = base.values().iter().map(|v| (v - lo) / span).collect();
        let v: Vec<f64> = u.iter().map(|x| x + bump).collect();
        let u = ScalarField::new(g, u).unwrap();
        let v = ScalarField::new(g, v).unwrap();
        let scheme = SchemeDef::lax_friedrichs(g, FluxLaw::burgers(1.5), 0.25).unwrap();
        let (nu, rep) = scheme::step(&scheme, &a, &u).unwrap();
        let (nv, _) = scheme::step(&scheme, &a, &v).unwrap();
        prop_assert!((rep.mass_out - rep.mass_in).abs() <= 1e-13 * rep.mass_in.abs().max(1.0));
        for (x, y) in nu.values().iter().zip(nv.values()) {
            prop_assert!(*x <= *y + 1e-12);
        }
    }
}
