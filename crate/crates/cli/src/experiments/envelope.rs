//! Uniform-regularity sweep: the log-scale semi-norm trajectory of the scheme
//! under refinement, against the per-run envelope assembled from the ledger
//! norms with one frozen constant.

use roughflow_core::grid::{discrete_w1p, lp_norm, Exponent, GridSpec};
use roughflow_core::kernel::{seminorm_profile, KernelLadder, SemiNormParams};
use roughflow_core::scheme;

use crate::calibration as cal;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{ExperimentOutcome, Table};
use crate::util::parallel_map;

struct RefinementResult {
    n: usize,
    peak_seminorm: f64,
    /// ladder scales, for the per-h trajectory columns
    ladder_hs: Vec<f64>,
    /// rows (time, sup, envelope, per-h values...)
    trajectory: Vec<Vec<f64>>,
    envelope_ok: bool,
    blew_up: bool,
}

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("regularity-envelope", &cfg.hash());
    let theta = cfg.ladder.theta;
    let p = cfg.ladder.p;
    let hypotheses_hold = theta >= 1.0 - 1.0 / p;
    if !hypotheses_hold {
        outcome.note(format!(
            "warning: theta = {theta} below 1 - 1/p = {}; envelope check skipped",
            1.0 - 1.0 / p
        ));
    }

    let ns = if cfg.run.refinements.is_empty() {
        vec![cfg.grid.n]
    } else {
        cfg.run.refinements.clone()
    };
    let flux = cfg.flux.build()?;

    let results = parallel_map(threads, ns.clone(), |n| -> Result<RefinementResult> {
        refine_one(cfg, n, &flux, hypotheses_hold)
    });

    let mut peaks = Vec::new();
    let mut any_blowup = false;
    for r in results {
        let r = r?;
        let mut columns = vec!["time".to_string(), "seminorm".into(), "envelope".into()];
        for h in &r.ladder_hs {
            columns.push(format!("h={h}"));
        }
        let mut table = Table::new(format!("envelope-n{:04}", r.n), columns);
        for row in &r.trajectory {
            table.push(row.clone());
        }
        outcome.tables.push(table);
        if hypotheses_hold && !cfg.run.expect_growth {
            outcome.check(
                r.envelope_ok,
                format!("n={}: trajectory under the frozen-C envelope", r.n),
            );
        }
        any_blowup |= r.blew_up;
        peaks.push((r.n, r.peak_seminorm));
    }

    let mut peak_table = Table::new(
        "envelope-peaks",
        vec!["n".into(), "peak_seminorm".into()],
    );
    for (n, peak) in &peaks {
        peak_table.push(vec![*n as f64, *peak]);
    }
    outcome.tables.push(peak_table);

    let finite: Vec<f64> = peaks.iter().map(|(_, p)| *p).filter(|p| p.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = peaks
        .iter()
        .map(|(_, p)| *p)
        .fold(0.0f64, |m, v| if v.is_finite() { m.max(v) } else { f64::INFINITY });

    if cfg.run.expect_growth {
        let grew = any_blowup || hi / lo >= cal::CONTROL_GROWTH_MIN;
        outcome.check(
            grew,
            format!(
                "control peak semi-norm grew {}x across refinements (need >= {}x)",
                if any_blowup { f64::INFINITY } else { hi / lo },
                cal::CONTROL_GROWTH_MIN
            ),
        );
    } else if peaks.len() > 1 {
        outcome.check(
            hi / lo <= cal::ENVELOPE_RATIO_MAX,
            format!(
                "peak semi-norm ratio {:.3} <= {} across refinements {:?}",
                hi / lo,
                cal::ENVELOPE_RATIO_MAX,
                ns
            ),
        );
    }
    Ok(outcome)
}

fn refine_one(
    cfg: &ExperimentConfig,
    n: usize,
    flux: &roughflow_core::FluxLaw,
    hypotheses_hold: bool,
) -> Result<RefinementResult> {
    let theta = cfg.ladder.theta;
    let p = cfg.ladder.p;
    let pstar = if p > 1.0 { p / (p - 1.0) } else { f64::INFINITY };
    let q = cfg.ladder.q.max(pstar + 0.5);

    let probe_grid = GridSpec::new(cfg.grid.d, n, 1.0)?;
    let u0_probe = cfg.init.build(&probe_grid, cfg.seed)?;
    let a_probe = cfg.velocity.build(&probe_grid, cfg.seed, &u0_probe)?;
    let speed = a_probe.max_component() * flux.lip_on(u0_probe.min(), u0_probe.max());
    let dx = 1.0 / n as f64;
    let cfl = cfg.grid.cfl.unwrap_or(0.2);
    let dt_cap = cfl * dx / speed.max(1e-12);
    let steps = ((cfg.run.t_final / dt_cap).ceil() as usize).max(1);
    let grid = GridSpec::new(cfg.grid.d, n, cfg.run.t_final / steps as f64)?;

    let u0 = cfg.init.build(&grid, cfg.seed)?;
    let a = cfg.velocity.build(&grid, cfg.seed, &u0)?;
    let scheme = cfg.build_scheme(grid, flux.clone())?;

    let params = SemiNormParams::new(cfg.ladder.alpha, 1.0, theta, &grid)?;
    let ladder = KernelLadder::for_params(grid, &params)?;

    // static-field norms entering the envelope
    let div = scheme::discrete_divergence(&scheme, &a)?;
    let a_w1p = discrete_w1p(&a, p)?;
    let a_lp = roughflow_core::grid::lp_norm_vec(&a, Exponent::new(p)?)?;
    let theta_d = (p * (theta - 1.0 / pstar)).clamp(0.0, 1.0);
    let d_semi = sup_of(&seminorm_profile(&div.d, p, theta_d, &ladder));
    let lip = flux.lip_on(u0.min(), u0.max());
    let profile0 = seminorm_profile(&u0, 1.0, theta, &ladder);
    let semi0 = sup_of(&profile0);
    let gamma = scheme.gamma();
    let remainder = grid.dx().powf(gamma - cfg.ladder.alpha * (1.0 + theta));

    let sample_every = steps.checked_div(cfg.run.sample_times).unwrap_or(1).max(1);

    let mut u = u0.clone();
    let mut sup_uq = lp_norm(&u0, Exponent::new(q)?)?;
    let mut sup_up = lp_norm(&u0, Exponent::new(pstar)?)?;
    let mut peak = semi0;
    let ladder_hs: Vec<f64> = ladder.hs();
    let env0 = envelope_at(
        0.0, lip, div.dmax, semi0, sup_uq, sup_up, a_w1p, d_semi, a_lp, remainder,
    );
    let mut trajectory = vec![trajectory_row(0.0, semi0, env0, &profile0)];
    let mut envelope_ok = true;
    let mut blew_up = false;

    for step_idx in 1..=steps {
        match scheme::step(&scheme, &a, &u) {
            Ok((next, _)) => u = next,
            Err(roughflow_core::CoreError::NonFiniteField) => {
                blew_up = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
        if !u.values().iter().all(|v| v.is_finite()) {
            blew_up = true;
            break;
        }
        sup_uq = sup_uq.max(lp_norm(&u, Exponent::new(q)?)?);
        sup_up = sup_up.max(lp_norm(&u, Exponent::new(pstar)?)?);
        if step_idx % sample_every == 0 || step_idx == steps {
            let t = step_idx as f64 * grid.dt();
            let profile = seminorm_profile(&u, 1.0, theta, &ladder);
            let semi = sup_of(&profile);
            peak = peak.max(semi);
            let env = envelope_at(
                t, lip, div.dmax, semi0, sup_uq, sup_up, a_w1p, d_semi, a_lp, remainder,
            );
            if hypotheses_hold && semi > env {
                envelope_ok = false;
            }
            trajectory.push(trajectory_row(t, semi, env, &profile));
        }
    }
    if blew_up {
        peak = f64::INFINITY;
    }
    Ok(RefinementResult { n, peak_seminorm: peak, ladder_hs, trajectory, envelope_ok, blew_up })
}

fn sup_of(profile: &[(f64, f64)]) -> f64 {
    profile.iter().map(|(_, v)| *v).fold(0.0f64, f64::max)
}

fn trajectory_row(t: f64, sup: f64, env: f64, profile: &[(f64, f64)]) -> Vec<f64> {
    let mut row = vec![t, sup, env];
    row.extend(profile.iter().map(|(_, v)| *v));
    row
}

/// `e^{C lip |D| t} ( ||u0|| + C lip sup||u||_q t ||a||_W1p
///   + C lip sup||u||_p* t ||D||_seminorm + C dx^{gamma-alpha-alpha theta}
///     lip sup||u||_p* t ||a||_p )` with the single frozen constant.
#[allow(clippy::too_many_arguments)]
fn envelope_at(
    t: f64,
    lip: f64,
    dmax: f64,
    semi0: f64,
    sup_uq: f64,
    sup_up: f64,
    a_w1p: f64,
    d_semi: f64,
    a_lp: f64,
    remainder: f64,
) -> f64 {
    let c = cal::ENVELOPE_C;
    (c * lip * dmax * t).exp()
        * (semi0
            + c * lip * sup_uq * t * a_w1p
            + c * lip * sup_up * t * d_semi
            + c * remainder * lip * sup_up * t * a_lp)
}
