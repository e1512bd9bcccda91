//! Refinement studies: self-convergence of the piecewise-constant solutions
//! under grid refinement (exact restriction between nested grids), and
//! convergence against the characteristics and Riemann oracles.

use roughflow_core::fit::fit_loglog;
use roughflow_core::flux::FluxLaw;
use roughflow_core::grid::{GridSpec, ScalarField, VectorField};
use roughflow_core::oracle::{
    characteristics_advect, crossing_position, riemann_exact, FnVelocity, RiemannProblem,
};
use roughflow_core::scheme;

use crate::calibration as cal;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::record::{ExperimentOutcome, Table};
use crate::util::parallel_map;

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    match cfg.run.compare.as_str() {
        "self" => self_convergence(cfg, threads),
        "characteristics" => characteristics_convergence(cfg, threads),
        "riemann" => riemann_convergence(cfg, threads),
        other => Err(CliError::Config(format!("unknown compare mode: {other}"))),
    }
}

fn refinements(cfg: &ExperimentConfig) -> Result<Vec<usize>> {
    let r = cfg.run.refinements.clone();
    if r.len() < 2 {
        return Err(CliError::Config("need at least two refinements".into()));
    }
    for w in r.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(CliError::Config("refinements must double".into()));
        }
    }
    Ok(r)
}

/// Time step hitting t_final exactly while honoring the CFL fraction.
fn resolved_grid(cfg: &ExperimentConfig, n: usize, speed: f64) -> Result<GridSpec> {
    let dx = 1.0 / n as f64;
    let cfl = cfg.grid.cfl.unwrap_or(0.25);
    let dt_cap = cfl * dx / speed.max(1e-12);
    let steps = (cfg.run.t_final / dt_cap).ceil().max(1.0);
    Ok(GridSpec::new(cfg.grid.d, n, cfg.run.t_final / steps)?)
}

/// Average fine cells onto a coarser nested grid: the exact L^1 projection of
/// the piecewise-constant interpolant.
pub fn restrict(fine: &ScalarField, coarse: &GridSpec) -> ScalarField {
    let gf = fine.grid();
    let factor = gf.cells_per_axis() / coarse.cells_per_axis();
    debug_assert!(factor >= 1);
    let nc = coarse.cells_per_axis();
    let nf = gf.cells_per_axis();
    let fv = fine.values();
    let mut out = vec![0.0; coarse.node_count()];
    match gf.dim() {
        1 => {
            for (i, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for c in 0..factor {
                    s += fv[i * factor + c];
                }
                *o = s / factor as f64;
            }
        }
        _ => {
            for i0 in 0..nc {
                for i1 in 0..nc {
                    let mut s = 0.0;
                    for c0 in 0..factor {
                        for c1 in 0..factor {
                            s += fv[(i0 * factor + c0) * nf + i1 * factor + c1];
                        }
                    }
                    out[i0 * nc + i1] = s / (factor * factor) as f64;
                }
            }
        }
    }
    ScalarField::new(*coarse, out).expect("restriction of finite field")
}

fn l1_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.grid().cell_volume()
        * a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
}

fn self_convergence(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("convergence", &cfg.hash());
    let ns = refinements(cfg)?;
    let flux = cfg.flux.build()?;

    let solutions = parallel_map(threads, ns.clone(), |n| -> Result<(usize, ScalarField)> {
        let probe_grid = GridSpec::new(cfg.grid.d, n, 1.0)?;
        let u0_probe = cfg.init.build(&probe_grid, cfg.seed)?;
        let a_probe = cfg.velocity.build(&probe_grid, cfg.seed, &u0_probe)?;
        let speed = a_probe.max_component() * flux.lip_on(u0_probe.min(), u0_probe.max());
        let grid = resolved_grid(cfg, n, speed)?;
        let u0 = cfg.init.build(&grid, cfg.seed)?;
        let a = cfg.velocity.build(&grid, cfg.seed, &u0)?;
        let scheme = cfg.build_scheme(grid, flux.clone())?;
        let steps = (cfg.run.t_final / grid.dt()).round() as usize;
        let mut u = u0;
        for _ in 0..steps {
            let (next, _) = scheme::step(&scheme, &a, &u)?;
            u = next;
        }
        Ok((n, u))
    });

    let mut finals = Vec::new();
    for s in solutions {
        finals.push(s?);
    }

    let mut diffs = Vec::new();
    let mut table = Table::new(
        "convergence-self",
        vec!["dx".into(), "l1_diff".into()],
    )
    .loglog();
    for w in finals.windows(2) {
        let (nc, coarse) = &w[0];
        let (_, fine) = &w[1];
        let cg = GridSpec::new(cfg.grid.d, *nc, 1e-3)?;
        let restricted = restrict(fine, &cg);
        let diff = l1_diff(coarse, &restricted);
        diffs.push((1.0 / *nc as f64, diff));
        table.push(vec![1.0 / *nc as f64, diff]);
    }
    outcome.tables.push(table);

    let decreasing = diffs.windows(2).all(|w| w[1].1 < w[0].1);
    outcome.check(
        decreasing,
        format!(
            "successive l1 differences decrease monotonically: {:?}",
            diffs.iter().map(|(_, d)| *d).collect::<Vec<_>>()
        ),
    );
    if cfg.run.min_order > 0.0 {
        let xs: Vec<f64> = diffs.iter().map(|(dx, _)| *dx).collect();
        let ys: Vec<f64> = diffs.iter().map(|(_, d)| *d).collect();
        let fit = fit_loglog(&xs, &ys, 2)?;
        outcome.check(
            fit.slope >= cfg.run.min_order,
            format!("fitted decay order {:.3} >= {}", fit.slope, cfg.run.min_order),
        );
    }
    Ok(outcome)
}

fn characteristics_convergence(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("convergence", &cfg.hash());
    if cfg.grid.d != 1 {
        return Err(CliError::Config("characteristics comparison is 1D".into()));
    }
    let ns = refinements(cfg)?;
    let flux = cfg.flux.build()?;
    if !matches!(flux.kind(), roughflow_core::FluxKind::Linear) {
        return Err(CliError::Config("characteristics oracle needs f = Id".into()));
    }
    // smooth analytic velocity a(x) = c + A sin(2 pi x); the scheme transports
    // along -a, so it receives the mirrored lattice field
    let mean = cfg.velocity.value.first().copied().unwrap_or(1.0);
    let amp = cfg.velocity.amplitude;
    let t_final = cfg.run.t_final;

    let errors = parallel_map(threads, ns.clone(), |n| -> Result<(f64, f64)> {
        let speed = (mean.abs() + amp.abs()).max(1e-9);
        let grid = resolved_grid(cfg, n, speed)?;
        let u0 = cfg.init.build(&grid, cfg.seed)?;
        let a_lattice = VectorField::from_components(vec![ScalarField::from_fn(
            grid,
            move |x| -(mean + amp * (std::f64::consts::TAU * x[0]).sin()),
        )])?;
        let scheme = cfg.build_scheme(grid, FluxLaw::linear())?;
        let steps = (t_final / grid.dt()).round() as usize;
        let mut u = u0.clone();
        for _ in 0..steps {
            let (next, _) = scheme::step(&scheme, &a_lattice, &u)?;
            u = next;
        }
        let vel = FnVelocity {
            vel: move |_t: f64, x: &[f64]| {
                [mean + amp * (std::f64::consts::TAU * x[0]).sin(), 0.0]
            },
            div: move |_t: f64, x: &[f64]| {
                amp * std::f64::consts::TAU * (std::f64::consts::TAU * x[0]).cos()
            },
        };
        let oracle = characteristics_advect(&vel, &u0, t_final, (4 * steps).max(256))?;
        Ok((grid.dx(), l1_diff(&u, &oracle)))
    });

    let mut series = Vec::new();
    for e in errors {
        series.push(e?);
    }
    let mut table = Table::new(
        "convergence-characteristics",
        vec!["dx".into(), "l1_error".into()],
    )
    .loglog();
    for (dx, err) in &series {
        table.push(vec![*dx, *err]);
    }
    outcome.tables.push(table);

    let xs: Vec<f64> = series.iter().map(|(dx, _)| *dx).collect();
    let ys: Vec<f64> = series.iter().map(|(_, e)| *e).collect();
    let fit = fit_loglog(&xs, &ys, 2)?;
    let floor = if cfg.run.min_order > 0.0 { cfg.run.min_order } else { cal::ADVECTION_ORDER_MIN };
    outcome.check(
        fit.slope >= floor,
        format!("advection error order {:.3} >= {}", fit.slope, floor),
    );
    Ok(outcome)
}

fn riemann_convergence(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("convergence", &cfg.hash());
    if cfg.grid.d != 1 {
        return Err(CliError::Config("riemann comparison is 1D".into()));
    }
    let ns = refinements(cfg)?;
    let flux = cfg.flux.build()?;
    let u_left = cfg.init.value;
    let jump_up = cfg.init.jump_up;
    let jump_down = cfg.init.jump_down;
    let t_final = cfg.run.t_final;
    let shock = RiemannProblem::new(flux.clone(), u_left, 0.0)?;
    let fan = RiemannProblem::new(flux.clone(), 0.0, u_left)?;
    let shock_x = jump_down + shock.shock_speed() * t_final;
    // the rarefaction head must not catch the shock within the run
    let head = jump_up + flux.derivative(u_left) * t_final;
    if head >= shock_x {
        return Err(CliError::Config(format!(
            "rarefaction head {head:.3} reaches the shock at {shock_x:.3} before t_final"
        )));
    }

    let results = parallel_map(threads, ns.clone(), |n| -> Result<(usize, f64, f64)> {
        let lip = flux.lip_on(0.0, u_left);
        let grid = resolved_grid(cfg, n, lip)?;
        let u0 = ScalarField::from_fn(grid, |x| {
            if x[0] >= jump_up && x[0] < jump_down {
                u_left
            } else {
                0.0
            }
        });
        // the scheme transports along -a: a = -1 realizes d_t u + d_x f(u) = 0
        let a = VectorField::constant(grid, &[-1.0]);
        let scheme = cfg.build_scheme(grid, flux.clone())?;
        let steps = (t_final / grid.dt()).round() as usize;
        let mut u = u0;
        for _ in 0..steps {
            let (next, _) = scheme::step(&scheme, &a, &u)?;
            u = next;
        }
        // locate the numerical shock as the half-level crossing right of the fan
        let lo = ((jump_down * n as f64) as usize).saturating_sub(2);
        let hi = (((shock_x + 0.2) * n as f64) as usize).min(2 * n);
        let pos = crossing_position(&u, 0.5 * u_left, (lo, hi))
            .ok_or_else(|| CliError::Assertion(format!("no shock crossing found at n={n}")))?;
        // l1 distance to the composed exact profile
        let mut exact = vec![0.0; n];
        for (i, e) in exact.iter_mut().enumerate() {
            let x = (i as f64 + 0.5) * grid.dx();
            *e = if x < shock_x {
                riemann_exact(&fan, x - jump_up, t_final)?
            } else {
                0.0
            };
        }
        let l1 = grid.cell_volume()
            * u.values()
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        Ok((n, (pos - shock_x).abs(), l1))
    });

    let mut table = Table::new(
        "convergence-riemann",
        vec!["n".into(), "shock_error".into(), "allowance".into(), "l1_error".into()],
    );
    let mut all_ok = true;
    let mut lines = Vec::new();
    for r in results {
        let (n, err, l1) = r?;
        let allowance = cal::SHOCK_TOL_CELLS / n as f64;
        table.push(vec![n as f64, err, allowance, l1]);
        let ok = err <= allowance;
        all_ok &= ok;
        lines.push(format!("n={n}: shock error {err:.3e} (allow {allowance:.3e}), l1 {l1:.3e}"));
    }
    outcome.tables.push(table);
    for l in lines {
        outcome.note(l);
    }
    outcome.check(all_ok, "shock position within 2 dx at every refinement".to_string());
    Ok(outcome)
}
