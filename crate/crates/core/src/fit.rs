//! Least-squares line fits for scaling-exponent checks.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

/// Ordinary least squares of y against x.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(CoreError::LadderTooShort { n: xs.len().min(ys.len()), min: 2 });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(CoreError::Parse("degenerate fit: constant x".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: (ss_res / dof / sxx).sqrt(),
        points: xs.len(),
    })
}

/// Fit of `log y` against `log x`, skipping non-positive entries.
pub fn fit_loglog(xs: &[f64], ys: &[f64], min_points: usize) -> Result<LineFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x > 0.0 && y > 0.0 {
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    if lx.len() < min_points {
        return Err(CoreError::LadderTooShort { n: lx.len(), min: min_points });
    }
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_recovered() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, 2.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, -1.0, epsilon = 1e-12);
        assert!(fit.slope_stderr < 1e-12);
    }

    #[test]
    fn power_law_slope_on_log_axes() {
        let xs = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.8)).collect();
        let fit = fit_loglog(&xs, &ys, 4).unwrap();
        assert_relative_eq!(fit.slope, 0.8, epsilon = 1e-10);
    }

    #[test]
    fn short_ladders_are_rejected() {
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0], 4).is_err());
    }
}
