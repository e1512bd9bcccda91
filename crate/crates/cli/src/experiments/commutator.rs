//! Commutator scaling sweeps: per-h pair sums averaged over a field ensemble,
//! fitted against `log |log h|`, for the signed (cancellation) sum and the
//! no-cancellation control.

use roughflow_core::commutator::{
    cancellation_series, commutator_report, control_series, fit_scaling, GradKernelLadder,
};
use roughflow_core::forge::{spectral_scalar, RoughFieldSpec};

use crate::calibration as cal;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::record::{ExperimentOutcome, Table};
use crate::util::parallel_map;

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("commutator", &cfg.hash());
    let grid = cfg.grid_with_speed(1.0)?;
    let hs = cfg.ladder.explicit_ladder();
    if hs.len() < 4 {
        return Err(CliError::Config("commutator ladder needs at least 4 rungs".into()));
    }
    let branch = cfg.run.branch.as_str();
    let fields = cfg.run.fields.max(1);
    let ladder = GradKernelLadder::new(grid, &hs)?;

    // ensemble mean of |pair sum| per h
    let per_field = parallel_map(threads, (0..fields as u64).collect(), |fi| {
        let a_seed = cfg.seed.wrapping_add(fi);
        let g_seed = cfg.seed.wrapping_add(1000 + fi);
        let a = cfg.velocity.build(&grid, a_seed, &roughflow_core::ScalarField::constant(grid, 0.0))?;
        let mut g_spec = RoughFieldSpec::new(cfg.init.beta, g_seed, false);
        g_spec.log_damping = cfg.init.log_damping;
        let gf = spectral_scalar(&g_spec, &grid, "commutator-g");
        let series = match branch {
            "control" => control_series(&a, &gf, &ladder),
            _ => cancellation_series(&a, &gf, &ladder),
        };
        Ok::<Vec<(f64, f64)>, CliError>(series)
    });

    let mut mean = vec![0.0f64; hs.len()];
    let mut used = 0usize;
    for r in per_field {
        let series = r?;
        for (i, (_, v)) in series.iter().enumerate() {
            mean[i] += v.abs();
        }
        used += 1;
    }
    for v in mean.iter_mut() {
        *v /= used as f64;
    }
    let series: Vec<(f64, f64)> = hs.iter().copied().zip(mean.iter().copied()).collect();
    let fit = fit_scaling(&series)?;

    let mut table = Table::new(
        format!("commutator-{branch}"),
        vec!["h".into(), "mean_abs_pair_sum".into()],
    )
    .loglog();
    for (h, v) in &series {
        table.push(vec![*h, *v]);
    }
    outcome.tables.push(table);
    outcome.note(format!(
        "{branch}: slope {:.3} (stderr {:.3}) over {} fields, ladder {:?}",
        fit.slope, fit.slope_stderr, used, hs
    ));

    match branch {
        "cancellation" => outcome.check(
            fit.slope <= cal::CANCELLATION_SLOPE_MAX,
            format!("cancellation slope {:.3} <= {}", fit.slope, cal::CANCELLATION_SLOPE_MAX),
        ),
        "control" => outcome.check(
            fit.slope >= cal::CONTROL_SLOPE_MIN,
            format!("control slope {:.3} >= {}", fit.slope, cal::CONTROL_SLOPE_MIN),
        ),
        _ => {
            // report mode: single-field full report with both rhs brackets
            let a = cfg.velocity.build(
                &grid,
                cfg.seed,
                &roughflow_core::ScalarField::constant(grid, 0.0),
            )?;
            let gf = spectral_scalar(
                &RoughFieldSpec::new(cfg.init.beta, cfg.seed + 1, false),
                &grid,
                "commutator-g",
            );
            let rep = commutator_report(&a, &gf, &hs, cfg.ladder.p, cfg.ladder.q)?;
            let mut t = Table::new(
                "commutator-brackets",
                vec!["h".into(), "lhs".into(), "rhs_grad".into(), "rhs_div".into()],
            )
            .loglog();
            for r in &rep.records {
                t.push(vec![r.h, r.lhs, r.rhs_grad_term, r.rhs_div_term]);
            }
            outcome.tables.push(t);
            if let Some(f) = rep.fitted_exponent {
                outcome.note(format!("single-field exponent {:.3}", f.slope));
            }
        }
    }
    Ok(outcome)
}
