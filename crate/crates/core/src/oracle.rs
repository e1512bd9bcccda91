//! Independent reference solutions: backward characteristics with Jacobian
//! weighting for the smooth continuity equation, and exact Riemann solutions
//! for convex 1D conservation laws.

use crate::error::{CoreError, Result};
use crate::flux::FluxLaw;
use crate::grid::{GridSpec, ScalarField, VectorField, MAX_DIM};

pub use crate::scheme::{entropy_pair_check, EntropyReport};

/// Velocity field sampled continuously in space and time.
pub trait Velocity {
    fn eval(&self, t: f64, x: &[f64]) -> [f64; MAX_DIM];
    fn divergence(&self, t: f64, x: &[f64]) -> f64;
}

/// A static lattice field with bilinear periodic interpolation; divergence
/// precomputed spectrally.
pub struct SmoothVelocity {
    field: VectorField,
    div: ScalarField,
}

impl SmoothVelocity {
    pub fn from_field(field: VectorField) -> Self {
        let div = crate::forge::spectral_divergence(&field);
        SmoothVelocity { field, div }
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }
}

impl Velocity for SmoothVelocity {
    fn eval(&self, _t: f64, x: &[f64]) -> [f64; MAX_DIM] {
        let g = self.field.grid();
        let mut out = [0.0; MAX_DIM];
        for k in 0..g.dim() {
            out[k] = interp_periodic(g, self.field.component(k), x);
        }
        out
    }

    fn divergence(&self, _t: f64, x: &[f64]) -> f64 {
        interp_periodic(self.field.grid(), self.div.values(), x)
    }
}

/// Velocity given by closures (analytic test fields, time-dependent families).
pub struct FnVelocity<V, D>
where
    V: Fn(f64, &[f64]) -> [f64; MAX_DIM],
    D: Fn(f64, &[f64]) -> f64,
{
    pub vel: V,
    pub div: D,
}

impl<V, D> Velocity for FnVelocity<V, D>
where
    V: Fn(f64, &[f64]) -> [f64; MAX_DIM],
    D: Fn(f64, &[f64]) -> f64,
{
    fn eval(&self, t: f64, x: &[f64]) -> [f64; MAX_DIM] {
        (self.vel)(t, x)
    }

    fn divergence(&self, t: f64, x: &[f64]) -> f64 {
        (self.div)(t, x)
    }
}

/// Bilinear periodic interpolation of node values at a point of the torus.
pub fn interp_periodic(g: &GridSpec, values: &[f64], x: &[f64]) -> f64 {
    let n = g.cells_per_axis();
    let dx = g.dx();
    match g.dim() {
        1 => {
            let s = wrap_unit(x[0]) / dx;
            let i0 = s.floor() as usize % n;
            let w = s - s.floor();
            let i1 = (i0 + 1) % n;
            values[i0] * (1.0 - w) + values[i1] * w
        }
        _ => {
            let s0 = wrap_unit(x[0]) / dx;
            let s1 = wrap_unit(x[1]) / dx;
            let i0 = s0.floor() as usize % n;
            let j0 = s1.floor() as usize % n;
            let w0 = s0 - s0.floor();
            let w1 = s1 - s1.floor();
            let i1 = (i0 + 1) % n;
            let j1 = (j0 + 1) % n;
            values[i0 * n + j0] * (1.0 - w0) * (1.0 - w1)
                + values[i1 * n + j0] * w0 * (1.0 - w1)
                + values[i0 * n + j1] * (1.0 - w0) * w1
                + values[i1 * n + j1] * w0 * w1
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Solve the continuity equation `du/dt + div(b u) = 0` for a smooth velocity
/// by backward characteristics: integrate `dX/dtau = -b(T - tau, X)` from
/// every node with a 4-stage one-step method, accumulate the divergence along
/// the path, and weight the pulled-back data by `exp(-int div b)`.
pub fn characteristics_advect(
    vel: &dyn Velocity,
    u0: &ScalarField,
    t_final: f64,
    steps: usize,
) -> Result<ScalarField> {
    if steps == 0 {
        return Err(CoreError::CharacteristicsFailed("zero substeps".into()));
    }
    let g = *u0.grid();
    let d = g.dim();
    let dtau = t_final / steps as f64;
    let nodes = g.node_count();
    let mut out = vec![0.0; nodes];

    for i in 0..nodes {
        let xi = g.coords(i);
        let mut state = [xi[0], xi[1], 0.0]; // position (d comps) + accumulated divergence
        for s in 0..steps {
            let tau = s as f64 * dtau;
            rk4_step(vel, t_final, &mut state, tau, dtau, d);
        }
        let jac = (-state[2]).exp();
        if !jac.is_finite() {
            return Err(CoreError::CharacteristicsFailed(format!(
                "Jacobian factor overflow at node {i}"
            )));
        }
        out[i] = interp_periodic(&g, u0.values(), &state[..d]) * jac;
    }
    ScalarField::new(g, out)
}

fn rk4_step(vel: &dyn Velocity, t_final: f64, state: &mut [f64; 3], tau: f64, dtau: f64, d: usize) {
    let f = |s: &[f64; 3], tau_local: f64| -> [f64; 3] {
        let t = t_final - tau_local;
        let v = vel.eval(t, &s[..d]);
        let div = vel.divergence(t, &s[..d]);
        [-v[0], if d > 1 { -v[1] } else { 0.0 }, div]
    };
    let k1 = f(state, tau);
    let s2 = add_scaled(state, &k1, 0.5 * dtau);
    let k2 = f(&s2, tau + 0.5 * dtau);
    let s3 = add_scaled(state, &k2, 0.5 * dtau);
    let k3 = f(&s3, tau + 0.5 * dtau);
    let s4 = add_scaled(state, &k3, dtau);
    let k4 = f(&s4, tau + dtau);
    for c in 0..3 {
        state[c] += dtau / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
}

fn add_scaled(s: &[f64; 3], k: &[f64; 3], w: f64) -> [f64; 3] {
    [s[0] + w * k[0], s[1] + w * k[1], s[2] + w * k[2]]
}

/// A 1D Riemann problem for `du/dt + d f(u)/dx = 0` with convex flux.
#[derive(Debug, Clone)]
pub struct RiemannProblem {
    pub flux: FluxLaw,
    pub u_left: f64,
    pub u_right: f64,
}

impl RiemannProblem {
    pub fn new(flux: FluxLaw, u_left: f64, u_right: f64) -> Result<Self> {
        // convexity on the relevant range: f' nondecreasing (sampled)
        let lo = u_left.min(u_right);
        let hi = u_left.max(u_right);
        let m = 129;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=m {
            let u = lo + (hi - lo) * i as f64 / m as f64;
            let d = flux.derivative(u);
            if d < prev - 1e-10 {
                return Err(CoreError::NonConvexFlux);
            }
            prev = prev.max(d);
        }
        Ok(RiemannProblem { flux, u_left, u_right })
    }

    /// Rankine-Hugoniot speed `(f(u_l) - f(u_r)) / (u_l - u_r)`.
    pub fn shock_speed(&self) -> f64 {
        (self.flux.eval(self.u_left) - self.flux.eval(self.u_right))
            / (self.u_left - self.u_right)
    }
}

/// The entropy solution at `(x, t)` with the jump initially at `x = 0`:
/// a shock when `u_l > u_r`, a rarefaction fan `(f')^{-1}(x/t)` when
/// `u_l < u_r`.
pub fn riemann_exact(prob: &RiemannProblem, x: f64, t: f64) -> Result<f64> {
    let (ul, ur) = (prob.u_left, prob.u_right);
    if t <= 0.0 {
        return Ok(if x < 0.0 { ul } else { ur });
    }
    if ul == ur {
        return Ok(ul);
    }
    if ul > ur {
        let s = prob.shock_speed();
        return Ok(if x < s * t { ul } else { ur });
    }
    // rarefaction
    let sl = prob.flux.derivative(ul);
    let sr = prob.flux.derivative(ur);
    if x <= sl * t {
        return Ok(ul);
    }
    if x >= sr * t {
        return Ok(ur);
    }
    if sr - sl < 1e-12 {
        // linear flux: contact moving at the common speed
        return Ok(if x < sl * t { ul } else { ur });
    }
    // invert f' by bisection on [ul, ur]
    let target = x / t;
    let mut lo = ul;
    let mut hi = ur;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if prob.flux.derivative(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Interpolated descending crossing of `level` in a 1D field, searched inside
/// the index window; used to locate numerical shock fronts.
pub fn crossing_position(u: &ScalarField, level: f64, window: (usize, usize)) -> Option<f64> {
    let g = u.grid();
    debug_assert_eq!(g.dim(), 1);
    let v = u.values();
    let n = g.cells_per_axis();
    for idx in window.0..window.1 {
        let i = idx % n;
        let j = (idx + 1) % n;
        if v[i] >= level && v[j] < level {
            let w = (v[i] - level) / (v[i] - v[j]);
            return Some((idx as f64 + w) * g.dx());
        }
    }
    None
}
