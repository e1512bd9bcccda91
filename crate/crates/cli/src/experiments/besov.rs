//! Littlewood-Paley sanity checks and the delocalized-convolution sweep:
//! partition-of-unity residuals, block reconstruction, and the growth of
//! `int_{h0}^1 ||L_r * u||_p dr/r` against `|log h0|`.

use roughflow_core::besov::{
    besov_norm_with_partition, delocalized_conv_profile, lp_blocks, DyadicPartition, MollifierL,
};
use roughflow_core::fit::fit_line;
use roughflow_core::forge::{spectral_scalar, RoughFieldSpec};
use roughflow_core::grid::{lp_norm, Exponent};
use roughflow_core::spectral::Spectral;

use crate::calibration as cal;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::record::{ExperimentOutcome, Table};
use crate::util::parallel_map;

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::new("besov-check", &cfg.hash());
    let grid = cfg.grid_with_speed(1.0)?;
    let p = cfg.ladder.p;
    let q = cfg.ladder.q;

    // partition of unity on resolvable frequencies
    let part = DyadicPartition::new(grid);
    let spectral = Spectral::new(grid);
    let mut worst_partition = 0.0f64;
    for bin in 0..grid.node_count() {
        let f = spectral.freq_norm(bin);
        let total: f64 = (0..=part.k_max()).map(|k| part.multiplier(k, f)).sum();
        worst_partition = worst_partition.max((total - 1.0).abs());
    }
    outcome.check(
        worst_partition <= 1e-12,
        format!("partition of unity residual {worst_partition:.3e} <= 1e-12"),
    );

    // reconstruction on one configured field
    let probe = spectral_scalar(
        &RoughFieldSpec::new(cfg.init.beta, cfg.seed, false),
        &grid,
        "besov-probe",
    );
    let blocks = lp_blocks(&probe, &part);
    let mut recon = vec![0.0; grid.node_count()];
    for b in &blocks {
        for (r, v) in recon.iter_mut().zip(b.values()) {
            *r += v;
        }
    }
    let scale = probe.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let recon_err = recon
        .iter()
        .zip(probe.values())
        .map(|(r, v)| (r - v).abs())
        .fold(0.0f64, f64::max)
        / scale;
    outcome.check(recon_err <= 1e-10, format!("block reconstruction {recon_err:.3e} <= 1e-10"));

    // delocalized convolution sweep over an ensemble
    let mollifier = MollifierL::difference_of_bumps(0.5);
    let h0_min = 2.0f64.powi(-cfg.ladder.h_min_pow);
    let fields = cfg.run.fields.max(1);
    let per_field = parallel_map(threads, (0..fields as u64).collect(), |fi| {
        let mut spec = RoughFieldSpec::new(cfg.init.beta, cfg.seed.wrapping_add(fi), false);
        spec.log_damping = cfg.init.log_damping;
        let u = spectral_scalar(&spec, &grid, "conv-sweep");
        let profile = delocalized_conv_profile(&u, &mollifier, h0_min, p)?;
        let besov = besov_norm_with_partition(&u, 0.0, p, q, &part)?;
        let l2 = lp_norm(&u, Exponent::Finite(2.0))?;
        Ok::<_, CliError>((profile, besov, l2))
    });

    let ladder: Vec<i32> = (cfg.ladder.h_max_pow..=cfg.ladder.h_min_pow).collect();
    let mut mean_integral = vec![0.0f64; ladder.len()];
    let mut worst_c = 0.0f64;
    let mut used = 0usize;
    for r in per_field {
        let (profile, besov, _l2) = r?;
        for (i, &m) in ladder.iter().enumerate() {
            let h0 = 2.0f64.powi(-m);
            let integral: f64 = std::f64::consts::LN_2
                * profile
                    .iter()
                    .filter(|(rr, _)| *rr >= h0 * (1.0 - 1e-12))
                    .map(|(_, v)| v)
                    .sum::<f64>();
            mean_integral[i] += integral;
            if besov > 1e-14 {
                let envelope = (-h0.ln()).powf(1.0 - 1.0 / q) * besov;
                worst_c = worst_c.max(integral / envelope);
            }
        }
        used += 1;
    }
    for v in mean_integral.iter_mut() {
        *v /= used as f64;
    }

    let mut table = Table::new(
        "besov-conv-integral",
        vec!["h0".into(), "mean_integral".into()],
    )
    .loglog();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &m) in ladder.iter().enumerate() {
        let h0 = 2.0f64.powi(-m);
        table.push(vec![h0, mean_integral[i]]);
        xs.push((-h0.ln()).ln());
        ys.push(mean_integral[i].max(1e-300).ln());
    }
    outcome.tables.push(table);
    let fit = fit_line(&xs, &ys)?;
    outcome.note(format!(
        "conv integral slope {:.3} (stderr {:.3}) over {} fields",
        fit.slope, fit.slope_stderr, used
    ));
    outcome.check(
        fit.slope <= cal::CONV_INTEGRAL_SLOPE_MAX,
        format!("conv integral slope {:.3} <= {}", fit.slope, cal::CONV_INTEGRAL_SLOPE_MAX),
    );
    outcome.check(
        worst_c <= cal::CONV1_BESOV_C,
        format!("Besov envelope ratio {worst_c:.3} <= frozen C = {}", cal::CONV1_BESOV_C),
    );
    Ok(outcome)
}
