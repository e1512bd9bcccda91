//! The scalar non-linearity `f` with its Lipschitz data, normalized so that
//! `f(0) = 0`.

use serde::{Deserialize, Serialize};

/// Built-in flux shapes plus user-supplied piecewise-linear profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FluxKind {
    /// f(u) = u
    Linear,
    /// f(u) = u^2 / 2
    Burgers,
    /// Congestion flux f(u) = u (u_c - u)_+, zero above the critical density.
    Logistic { u_c: f64 },
    /// Continuous piecewise-linear interpolant through (x, y) breakpoints,
    /// extended by its end slopes, shifted so f(0) = 0.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

/// A flux `f` together with a Lipschitz bound valid on the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxLaw {
    kind: FluxKind,
    lip: f64,
}

impl FluxLaw {
    pub fn linear() -> Self {
        FluxLaw { kind: FluxKind::Linear, lip: 1.0 }
    }

    /// Burgers flux with |f'| bounded on |u| <= u_max.
    pub fn burgers(u_max: f64) -> Self {
        FluxLaw { kind: FluxKind::Burgers, lip: u_max.abs() }
    }

    /// Congestion flux; |f'| = |u_c - 2u| <= u_c on [0, u_c].
    pub fn logistic(u_c: f64) -> Self {
        assert!(u_c > 0.0);
        FluxLaw { kind: FluxKind::Logistic { u_c }, lip: u_c }
    }

    /// Piecewise-linear flux through the given breakpoints (sorted by x).
    pub fn piecewise_linear(mut points: Vec<(f64, f64)>) -> Self {
        assert!(points.len() >= 2);
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let lip = points
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max);
        let mut law = FluxLaw { kind: FluxKind::PiecewiseLinear { points }, lip };
        // normalize so f(0) = 0
        let f0 = law.eval_unnormalized(0.0);
        if f0 != 0.0 {
            if let FluxKind::PiecewiseLinear { points } = &mut law.kind {
                for p in points.iter_mut() {
                    p.1 -= f0;
                }
            }
        }
        law
    }

    pub fn kind(&self) -> &FluxKind {
        &self.kind
    }

    /// The declared `sup |f'|` bound.
    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval_unnormalized(u)
    }

    fn eval_unnormalized(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Linear => u,
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::Logistic { u_c } => u * (u_c - u).max(0.0),
            FluxKind::PiecewiseLinear { points } => {
                let n = points.len();
                if u <= points[0].0 {
                    let s = (points[1].1 - points[0].1) / (points[1].0 - points[0].0);
                    points[0].1 + s * (u - points[0].0)
                } else if u >= points[n - 1].0 {
                    let s = (points[n - 1].1 - points[n - 2].1)
                        / (points[n - 1].0 - points[n - 2].0);
                    points[n - 1].1 + s * (u - points[n - 1].0)
                } else {
                    let k = points.partition_point(|p| p.0 <= u) - 1;
                    let (x0, y0) = points[k];
                    let (x1, y1) = points[k + 1];
                    y0 + (y1 - y0) * (u - x0) / (x1 - x0)
                }
            }
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Linear => 1.0,
            FluxKind::Burgers => u,
            FluxKind::Logistic { u_c } => {
                if u < *u_c {
                    u_c - 2.0 * u
                } else {
                    0.0
                }
            }
            FluxKind::PiecewiseLinear { points } => {
                let n = points.len();
                let k = if u < points[0].0 {
                    0
                } else if u >= points[n - 1].0 {
                    n - 2
                } else {
                    points.partition_point(|p| p.0 <= u).saturating_sub(1).min(n - 2)
                };
                (points[k + 1].1 - points[k].1) / (points[k + 1].0 - points[k].0)
            }
        }
    }

    /// sup |f'| sampled over [lo, hi] (dense sampling plus breakpoints).
    pub fn lip_on(&self, lo: f64, hi: f64) -> f64 {
        match &self.kind {
            FluxKind::Linear => 1.0,
            FluxKind::Burgers => lo.abs().max(hi.abs()),
            FluxKind::Logistic { u_c } => {
                let cand = [lo, hi, 0.0f64.max(lo).min(hi)];
                cand.iter()
                    .map(|&u| if u < *u_c { (u_c - 2.0 * u).abs() } else { 0.0 })
                    .fold(0.0, f64::max)
            }
            FluxKind::PiecewiseLinear { .. } => {
                let m = 257;
                (0..m)
                    .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
                    .map(|u| self.derivative(u).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Range of f' over [lo, hi] as (min, max).
    pub fn derivative_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let m = 257;
        let mut dmin = f64::INFINITY;
        let mut dmax = f64::NEG_INFINITY;
        for i in 0..m {
            let u = lo + (hi - lo) * i as f64 / (m - 1) as f64;
            let d = self.derivative(u);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        (dmin, dmax)
    }

    /// Exact integral of f' over [lo, hi] (signed), i.e. f(hi) - f(lo),
    /// computed segment by segment so it serves as an independent route.
    pub fn derivative_integral(&self, lo: f64, hi: f64) -> f64 {
        if lo > hi {
            return -self.derivative_integral(hi, lo);
        }
        match &self.kind {
            FluxKind::Linear => hi - lo,
            FluxKind::Burgers => 0.5 * (hi * hi - lo * lo),
            FluxKind::Logistic { u_c } => {
                // f'(u) = u_c - 2u on [0 (well, anywhere), u_c), 0 on [u_c, inf)
                let anti = |u: f64| u_c * u - u * u; // antiderivative below u_c
                let a = lo.min(*u_c);
                let b = hi.min(*u_c);
                if b > a {
                    anti(b) - anti(a)
                } else {
                    0.0
                }
            }
            FluxKind::PiecewiseLinear { points } => {
                // f' piecewise constant between breakpoints
                let mut knots: Vec<f64> = vec![lo];
                for p in points.iter() {
                    if p.0 > lo && p.0 < hi {
                        knots.push(p.0);
                    }
                }
                knots.push(hi);
                let mut s = 0.0;
                for w in knots.windows(2) {
                    let mid = 0.5 * (w[0] + w[1]);
                    s += self.derivative(mid) * (w[1] - w[0]);
                }
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn all_kinds_vanish_at_zero() {
        let laws = [
            FluxLaw::linear(),
            FluxLaw::burgers(1.0),
            FluxLaw::logistic(2.0),
            FluxLaw::piecewise_linear(vec![(-1.0, -0.3), (0.5, 1.0), (2.0, 0.7)]),
        ];
        for law in &laws {
            assert_relative_eq!(law.eval(0.0), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn lip_bounds_hold_on_sampled_range() {
        let laws = [
            (FluxLaw::linear(), -2.0, 2.0),
            (FluxLaw::burgers(1.5), -1.5, 1.5),
            (FluxLaw::logistic(2.0), 0.0, 2.0),
            (FluxLaw::piecewise_linear(vec![(-1.0, -0.3), (0.5, 1.0), (2.0, 0.7)]), -1.0, 2.0),
        ];
        for (law, lo, hi) in &laws {
            let m = 400;
            for i in 0..m {
                let x = lo + (hi - lo) * i as f64 / m as f64;
                let y = lo + (hi - lo) * ((i * 7 + 3) % m) as f64 / m as f64;
                assert!(
                    (law.eval(x) - law.eval(y)).abs() <= law.lip() * (x - y).abs() + 1e-12,
                    "lip violated for {law:?} at ({x}, {y})"
                );
            }
        }
    }

    #[test]
    fn logistic_caps_at_critical_density() {
        let law = FluxLaw::logistic(1.0);
        assert_relative_eq!(law.eval(0.5), 0.25);
        assert_eq!(law.eval(1.0), 0.0);
        assert_eq!(law.eval(1.5), 0.0);
        assert_eq!(law.derivative(1.5), 0.0);
    }

    #[test]
    fn derivative_integral_matches_flux_difference() {
        let laws = [
            FluxLaw::linear(),
            FluxLaw::burgers(2.0),
            FluxLaw::logistic(1.5),
            FluxLaw::piecewise_linear(vec![(-1.0, -0.3), (0.5, 1.0), (2.0, 0.7)]),
        ];
        for law in &laws {
            for (lo, hi) in [(0.0, 1.0), (0.25, 1.4), (-0.5, 0.75), (1.2, 0.1)] {
                assert_relative_eq!(
                    law.derivative_integral(lo, hi),
                    law.eval(hi) - law.eval(lo),
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
            }
        }
    }
}
