//! End-to-end smoke: synthesize fields, run the scheme with the ledger,
//! and confirm the diagnostic stack holds together over a full trajectory.

use roughflow_core::commutator::discrete_commutator;
use roughflow_core::flux::FluxLaw;
use roughflow_core::forge::{spectral_field, spectral_scalar, RoughFieldSpec};
use roughflow_core::grid::{GridSpec, ScalarField};
use roughflow_core::kernel::{
    discrete_seminorm_with_ladder, KernelLadder, SemiNormParams,
};
use roughflow_core::scheme::{self, SchemeDef};

#[test]
fn rough_transport_run_with_full_diagnostics() {
    let n = 128;
    let g = GridSpec::new(1, n, 0.2 / n as f64).unwrap();
    let a = spectral_field(&RoughFieldSpec::new(1.5, 42, false), &g).unwrap();
    let a = a.scale(1.0 / a.max_component());
    let base = spectral_scalar(&RoughFieldSpec::new(2.0, 43, false), &g, "pipeline-u0");
    let lo = base.min();
    let span = base.max() - lo;
    let u0 = ScalarField::new(
        g,
        base.values().iter().map(|v| (v - lo) / span).collect(),
    )
    .unwrap();
    // the congestion flux pins the invariant range [0, u_c] exactly

    let flux = FluxLaw::logistic(1.0);
    let scheme = SchemeDef::lax_friedrichs(g, flux.clone(), 0.25).unwrap();
    let params = SemiNormParams::new(0.5, 1.0, 0.5, &g).unwrap();
    let ladder = KernelLadder::for_params(g, &params).unwrap();

    let mut u = u0.clone();
    let mass0 = u.sum();
    let semi0 = discrete_seminorm_with_ladder(&u, 1.0, 0.5, &ladder).unwrap();
    let mut peak_semi = semi0;
    for step_idx in 0..100 {
        let (next, _) = scheme::step(&scheme, &a, &u).unwrap();
        let ledger = scheme::kruzkov_ledger(&scheme, &a, &u, &next, &ladder).unwrap();
        for e in &ledger.entries {
            assert!(
                e.slack_rel >= -1e-8,
                "step {step_idx} h={}: slack {}",
                e.h,
                e.slack_rel
            );
            assert!(e.commutator.is_finite());
            assert!(e.d_term_bound.is_finite());
        }
        u = next;
        let semi = discrete_seminorm_with_ladder(&u, 1.0, 0.5, &ladder).unwrap();
        peak_semi = peak_semi.max(semi);
    }
    // mass exact, density in range, regularity did not blow up
    assert!((u.sum() - mass0).abs() <= 1e-12 * mass0.abs().max(1.0));
    assert!(u.min() >= -1e-12 && u.max() <= 1.0 + 1e-12);
    assert!(peak_semi <= 3.0 * semi0.max(0.1), "semi-norm blew up: {peak_semi} vs {semi0}");

    // the standalone commutator diagnostic agrees in magnitude with the
    // ledger's recorded term on the final state
    let (next, _) = scheme::step(&scheme, &a, &u).unwrap();
    let ledger = scheme::kruzkov_ledger(&scheme, &a, &u, &next, &ladder).unwrap();
    for (entry, folded) in ledger.entries.iter().zip(ladder.entries()) {
        let direct = discrete_commutator(&a, &u, &flux, folded);
        assert!(
            (entry.commutator - direct).abs() <= 1e-10 * direct.abs().max(1.0),
            "ledger commutator {} vs direct {direct}",
            entry.commutator
        );
    }
}
