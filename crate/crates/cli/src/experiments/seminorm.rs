//! Semi-norm experiments: per-h profiles, the p = 2 spectral equivalence, and
//! the mollification bound, over a single configured field or the
//! mode/indicator/noise suite.

use roughflow_core::forge::{rng_for, spectral_scalar, RoughFieldSpec};
use roughflow_core::grid::{GridSpec, ScalarField};
use roughflow_core::kernel::{
    discrete_seminorm_with_ladder, fourier_equiv_check, mollification_error, seminorm_profile,
    KernelLadder, SemiNormParams,
};
use rand::Rng;

use crate::calibration as cal;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{ExperimentOutcome, Table};

pub fn run(cfg: &ExperimentConfig, _threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("seminorm", &cfg.hash());
    let theta = cfg.ladder.theta;

    let fields = if cfg.run.trials > 1 {
        suite_fields(cfg)?
    } else {
        let grid = cfg.grid_with_speed(1.0)?;
        vec![("configured".to_string(), cfg.init.build(&grid, cfg.seed)?)]
    };

    let mut ladders: std::collections::HashMap<(usize, usize), KernelLadder> =
        std::collections::HashMap::new();

    let mut ratio_lo = f64::INFINITY;
    let mut ratio_hi = f64::NEG_INFINITY;
    let mut moll_worst = 0.0f64;
    let mut ratio_table = Table::new(
        "seminorm-equivalence",
        vec!["field".into(), "lhs".into(), "rhs".into(), "ratio".into()],
    );
    let mut profile_table = Table::new(
        "seminorm-profile",
        vec!["h".into(), "value".into(), "field_index".into()],
    );

    for (idx, (name, u)) in fields.iter().enumerate() {
        let grid = *u.grid();
        let key = (grid.dim(), grid.cells_per_axis());
        if let std::collections::hash_map::Entry::Vacant(slot) = ladders.entry(key) {
            let params = SemiNormParams::new(1.0, 2.0, theta, &grid)?;
            slot.insert(KernelLadder::for_params(grid, &params)?);
        }
        let ladder = &ladders[&key];

        let rep = fourier_equiv_check(u, theta, ladder)?;
        if rep.ratio.is_finite() {
            ratio_lo = ratio_lo.min(rep.ratio);
            ratio_hi = ratio_hi.max(rep.ratio);
        }
        ratio_table.push(vec![idx as f64, rep.lhs, rep.rhs, rep.ratio]);

        // per-h profile records {h, value}, the sup being the semi-norm
        let profile = seminorm_profile(u, 2.0, theta, ladder);
        let sup = profile.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
        for (h, v) in profile {
            profile_table.push(vec![h, v, idx as f64]);
        }

        // mollification bound against the p = 1 semi-norm
        let semi1 = discrete_seminorm_with_ladder(u, 1.0, theta, ladder)?;
        if semi1 > 1e-12 {
            for entry in ladder.entries() {
                let err = mollification_error(u, entry)?;
                let bound = (-entry.h().ln()).powf(theta - 1.0) * semi1;
                moll_worst = moll_worst.max(err / bound);
            }
        }
        if cfg.run.trials <= 1 {
            outcome.note(format!(
                "{name}: semi-norm (sup over ladder) {sup:.6e}, equivalence ratio {:.4}",
                rep.ratio
            ));
        }
    }

    outcome.tables.push(ratio_table);
    outcome.tables.push(profile_table);

    if cfg.run.trials > 1 {
        outcome.check(
            ratio_lo >= cal::PROP1_RATIO_LO && ratio_hi <= cal::PROP1_RATIO_HI,
            format!(
                "spectral equivalence ratios in [{ratio_lo:.3}, {ratio_hi:.3}] within frozen \
                 [{}, {}] over {} fields",
                cal::PROP1_RATIO_LO,
                cal::PROP1_RATIO_HI,
                fields.len()
            ),
        );
        outcome.check(
            moll_worst <= cal::MOLLIFY_C,
            format!(
                "mollification ratio max {moll_worst:.3} <= frozen C = {}",
                cal::MOLLIFY_C
            ),
        );
    } else {
        outcome.note(format!("mollification ratio max {moll_worst:.3}"));
    }
    Ok(outcome)
}

/// Deterministic 50-field suite: pure modes, interval/box indicators, and
/// spectral noise at several regularities, mostly 1D at the configured n plus
/// a handful of small 2D fields.
pub fn suite_fields(cfg: &ExperimentConfig) -> Result<Vec<(String, ScalarField)>> {
    let g1 = GridSpec::new(1, cfg.grid.n, 1e-3)?;
    let g2 = GridSpec::new(2, 32, 1e-3)?;
    let mut rng = rng_for(cfg.seed, "seminorm-suite");
    let mut fields = Vec::new();

    for m in [1i64, 2, 4, 8, 16, 32] {
        fields.push((
            format!("mode-{m}"),
            ScalarField::from_fn(g1, move |x| {
                (std::f64::consts::TAU * m as f64 * x[0]).cos()
            }),
        ));
    }
    for i in 0..10 {
        let width = [0.0625, 0.125, 0.25, 0.375, 0.5][i % 5];
        let start = rng.gen_range(0.0..1.0);
        fields.push((
            format!("indicator-{i}"),
            ScalarField::from_fn(g1, move |x| {
                let pos = (x[0] - start).rem_euclid(1.0);
                if pos < width {
                    1.0
                } else {
                    0.0
                }
            }),
        ));
    }
    for i in 0..5 {
        let w1 = rng.gen_range(0.05..0.2);
        let w2 = rng.gen_range(0.05..0.2);
        let s1 = rng.gen_range(0.0..0.4);
        let s2 = rng.gen_range(0.5..0.8);
        fields.push((
            format!("double-indicator-{i}"),
            ScalarField::from_fn(g1, move |x| {
                if (x[0] >= s1 && x[0] < s1 + w1) || (x[0] >= s2 && x[0] < s2 + w2) {
                    1.0
                } else {
                    0.0
                }
            }),
        ));
    }
    for i in 0..4 {
        let half = 0.1 + 0.1 * i as f64;
        fields.push((
            format!("box2d-{i}"),
            ScalarField::from_fn(g2, move |x| {
                if x[0] < half && x[1] < half {
                    1.0
                } else {
                    0.0
                }
            }),
        ));
    }
    let mut idx = 0;
    for beta in [0.5, 1.0, 1.5, 2.5] {
        for _ in 0..5 {
            idx += 1;
            let spec = RoughFieldSpec::new(beta, cfg.seed.wrapping_add(idx), false);
            fields.push((format!("noise1d-b{beta}-{idx}"), spectral_scalar(&spec, &g1, "suite")));
        }
    }
    for (i, beta) in [(0u64, 1.0), (1, 1.5), (2, 2.0), (3, 1.2), (4, 0.8)] {
        let spec = RoughFieldSpec::new(beta, cfg.seed.wrapping_add(1000 + i), false);
        fields.push((format!("noise2d-{i}"), spectral_scalar(&spec, &g2, "suite")));
    }
    Ok(fields)
}
