//! The near-singular averaging kernel `K_h(z) = phi(|z|) / (|z| + h)^d`, its
//! gradient surrogate, and the log-scale semi-norms built from it.
//!
//! Pair sums over the lattice take the form
//! `sum_{i in grid} sum_{|tau| dx <= 2} K_h(tau dx) |u_i - u_{i-tau}|^p`
//! with `u` extended periodically. Because the summand only depends on
//! `tau mod n`, every such sum factors through two reusable pieces:
//! a kernel table folded onto residues (per `h`, cheap) and the pair moduli
//! `m_p(rho) = sum_i |u_i - u_{i-rho}|^p` (per field, one `O(n^{2d})` pass
//! shared by the whole `h` ladder). For `p = 2` the moduli pass is replaced
//! by two FFT convolutions.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{lp_norm, Exponent, GridSpec, ScalarField};
use crate::spectral::Spectral;

/// C^2 radial cutoff: 1 on `[0,1]`, smootherstep down to 0 on `[1,2]`.
pub fn cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let t = r - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// The kernel `K_h` on a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct LogKernel {
    grid: GridSpec,
    h: f64,
}

impl LogKernel {
    pub fn new(grid: GridSpec, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(CoreError::InvalidExponent(format!("h = {h}, need 0 < h <= 1/2")));
        }
        Ok(LogKernel { grid, h })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `K_h(x) = phi(|x|) / (|x| + h)^d`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = crate::grid::norm_d(x);
        let phi = cutoff(r);
        if phi == 0.0 {
            return 0.0;
        }
        phi / (r + self.h).powi(self.grid.dim() as i32)
    }

    /// The gradient-shaped kernel `x phi(|x|) / (|x| + h)^{d+1}`,
    /// antisymmetric under `x -> -x`.
    pub fn grad_eval(&self, x: &[f64]) -> [f64; 2] {
        let r = crate::grid::norm_d(x);
        let phi = cutoff(r);
        let mut out = [0.0; 2];
        if phi == 0.0 {
            return out;
        }
        let w = phi / (r + self.h).powi(self.grid.dim() as i32 + 1);
        for (o, xi) in out.iter_mut().zip(x.iter()) {
            *o = xi * w;
        }
        out
    }

    /// Lattice table value `K^h_i = K_h(i dx)` at a signed offset.
    pub fn table(&self, offset: &[i64]) -> f64 {
        let dx = self.grid.dx();
        let mut x = [0.0; 2];
        for (xi, oi) in x.iter_mut().zip(offset.iter()) {
            *xi = *oi as f64 * dx;
        }
        self.eval(&x[..self.grid.dim()])
    }

    /// Per-axis half-width of the support window: `K^h_tau = 0` beyond it.
    pub fn window(&self) -> i64 {
        2 * self.grid.cells_per_axis() as i64 + 2
    }
}

/// Kernel table summed over all integer images onto residues mod n, plus the
/// total mass `sum_tau K^h_tau` (a scalar since the grid is translation
/// invariant).
#[derive(Debug, Clone)]
pub struct FoldedKernel {
    grid: GridSpec,
    h: f64,
    table: Vec<f64>,
    total: f64,
}

impl FoldedKernel {
    pub fn new(grid: GridSpec, h: f64) -> Result<Self> {
        let kernel = LogKernel::new(grid, h)?;
        let n = grid.cells_per_axis() as i64;
        let w = kernel.window();
        let nodes = grid.node_count();
        let mut table = vec![0.0; nodes];
        match grid.dim() {
            1 => {
                for tau in -w..=w {
                    let v = kernel.table(&[tau]);
                    if v != 0.0 {
                        table[tau.rem_euclid(n) as usize] += v;
                    }
                }
            }
            _ => {
                let dx = grid.dx();
                let d = 2i32;
                for t0 in -w..=w {
                    let x0 = t0 as f64 * dx;
                    let row = t0.rem_euclid(n) as usize * n as usize;
                    for t1 in -w..=w {
                        let x1 = t1 as f64 * dx;
                        let r = (x0 * x0 + x1 * x1).sqrt();
                        if r >= 2.0 {
                            continue;
                        }
                        let phi = cutoff(r);
                        if phi == 0.0 {
                            continue;
                        }
                        table[row + t1.rem_euclid(n) as usize] += phi / (r + h).powi(d);
                    }
                }
            }
        }
        let total = table.iter().sum();
        Ok(FoldedKernel { grid, h, table, total })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Folded table, indexed by residue node.
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `sum_tau K^h_tau` over the whole support window.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `|log h|` weight used in the semi-norms (natural log).
    pub fn log_weight(&self) -> f64 {
        -self.h.ln()
    }

    /// Pair sum `sum_{i,tau} K^h_tau w(rho(tau))` against any residue vector.
    pub fn dot(&self, residue_values: &[f64]) -> f64 {
        self.table.iter().zip(residue_values).map(|(k, v)| k * v).sum()
    }

    /// Normalized mollification `Kbar_h * u` (kernel divided by its lattice
    /// mass, so constants are reproduced exactly).
    pub fn mollify(&self, u: &ScalarField, spectral: &Spectral) -> ScalarField {
        let conv = spectral.circular_convolve(&self.table, u.values());
        let inv = 1.0 / self.total;
        ScalarField::new(self.grid, conv.iter().map(|v| v * inv).collect())
            .expect("mollification produced non-finite values")
    }
}

/// The gradient-shaped kernel folded onto residues, one table per component.
#[derive(Debug, Clone)]
pub struct FoldedGradKernel {
    grid: GridSpec,
    h: f64,
    comps: Vec<Vec<f64>>,
    /// fold of |grad K| (Euclidean norm), for no-cancellation controls
    abs: Vec<f64>,
}

impl FoldedGradKernel {
    pub fn new(grid: GridSpec, h: f64) -> Result<Self> {
        let kernel = LogKernel::new(grid, h)?;
        let n = grid.cells_per_axis() as i64;
        let w = kernel.window();
        let nodes = grid.node_count();
        let d = grid.dim();
        let mut comps = vec![vec![0.0; nodes]; d];
        let mut abs = vec![0.0; nodes];
        let dx = grid.dx();
        match d {
            1 => {
                for tau in -w..=w {
                    let x = tau as f64 * dx;
                    let r = x.abs();
                    let phi = cutoff(r);
                    if phi == 0.0 {
                        continue;
                    }
                    let wgt = phi / (r + h).powi(2);
                    let rho = tau.rem_euclid(n) as usize;
                    comps[0][rho] += x * wgt;
                    abs[rho] += r * wgt;
                }
            }
            _ => {
                for t0 in -w..=w {
                    let x0 = t0 as f64 * dx;
                    let row = t0.rem_euclid(n) as usize * n as usize;
                    for t1 in -w..=w {
                        let x1 = t1 as f64 * dx;
                        let r = (x0 * x0 + x1 * x1).sqrt();
                        if r >= 2.0 {
                            continue;
                        }
                        let phi = cutoff(r);
                        if phi == 0.0 {
                            continue;
                        }
                        let wgt = phi / (r + h).powi(3);
                        let rho = row + t1.rem_euclid(n) as usize;
                        comps[0][rho] += x0 * wgt;
                        comps[1][rho] += x1 * wgt;
                        abs[rho] += r * wgt;
                    }
                }
            }
        }
        Ok(FoldedGradKernel { grid, h, comps, abs })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.comps[k]
    }

    pub fn abs_table(&self) -> &[f64] {
        &self.abs
    }
}

/// Parameters of the discrete log-scale semi-norm: floor exponent `alpha`,
/// integrability `p`, log exponent `theta`, and the dyadic ladder
/// `h_m = 2^-m` restricted to `[dx^alpha, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiNormParams {
    pub alpha: f64,
    pub p: f64,
    pub theta: f64,
    pub h_set: Vec<f64>,
}

impl SemiNormParams {
    pub fn new(alpha: f64, p: f64, theta: f64, grid: &GridSpec) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CoreError::InvalidExponent(format!("alpha = {alpha}")));
        }
        if !(p >= 1.0) {
            return Err(CoreError::InvalidExponent(format!("p = {p}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(CoreError::InvalidExponent(format!("theta = {theta}")));
        }
        let h_set = dyadic_ladder(grid.dx().powf(alpha));
        if h_set.is_empty() {
            return Err(CoreError::EmptyLadder);
        }
        Ok(SemiNormParams { alpha, p, theta, h_set })
    }
}

/// Dyadic ladder `{ 2^-m : m >= 1, 2^-m >= h_min }`, decreasing.
pub fn dyadic_ladder(h_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut h = 0.5;
    while h >= h_min * (1.0 - 1e-12) {
        out.push(h);
        h *= 0.5;
    }
    out
}

/// Folded kernels for a whole `h` ladder, built once and reused across fields
/// and time steps.
#[derive(Debug, Clone)]
pub struct KernelLadder {
    grid: GridSpec,
    entries: Vec<FoldedKernel>,
}

impl KernelLadder {
    pub fn new(grid: GridSpec, h_set: &[f64]) -> Result<Self> {
        if h_set.is_empty() {
            return Err(CoreError::EmptyLadder);
        }
        let entries = h_set
            .iter()
            .map(|&h| FoldedKernel::new(grid, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelLadder { grid, entries })
    }

    pub fn for_params(grid: GridSpec, params: &SemiNormParams) -> Result<Self> {
        Self::new(grid, &params.h_set)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn entries(&self) -> &[FoldedKernel] {
        &self.entries
    }

    pub fn hs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.h()).collect()
    }
}

/// Residue pair moduli `m_p(rho) = sum_i |u_i - u_{i-rho}|^p`.
///
/// One `O(n^{2d})` pass; every kernel pair sum over the ladder is then a dot
/// product with a folded table.
pub fn pair_moduli(u: &ScalarField, p: f64) -> Vec<f64> {
    let g = u.grid();
    let nodes = g.node_count();
    let v = u.values();
    let mut out = vec![0.0; nodes];
    match g.dim() {
        1 => {
            for rho in 0..nodes {
                let mut s = 0.0;
                if p == 1.0 {
                    for i in 0..nodes {
                        let j = if i >= rho { i - rho } else { i + nodes - rho };
                        s += (v[i] - v[j]).abs();
                    }
                } else if p == 2.0 {
                    for i in 0..nodes {
                        let j = if i >= rho { i - rho } else { i + nodes - rho };
                        let d = v[i] - v[j];
                        s += d * d;
                    }
                } else {
                    for i in 0..nodes {
                        let j = if i >= rho { i - rho } else { i + nodes - rho };
                        s += (v[i] - v[j]).abs().powf(p);
                    }
                }
                out[rho] = s;
            }
        }
        _ => {
            let n = g.cells_per_axis();
            for r0 in 0..n {
                for r1 in 0..n {
                    let rho = r0 * n + r1;
                    let mut s = 0.0;
                    for i0 in 0..n {
                        let j0 = (i0 + n - r0) % n;
                        let row_i = i0 * n;
                        let row_j = j0 * n;
                        if p == 1.0 {
                            for i1 in 0..n {
                                let j1 = (i1 + n - r1) % n;
                                s += (v[row_i + i1] - v[row_j + j1]).abs();
                            }
                        } else if p == 2.0 {
                            for i1 in 0..n {
                                let j1 = (i1 + n - r1) % n;
                                let d = v[row_i + i1] - v[row_j + j1];
                                s += d * d;
                            }
                        } else {
                            for i1 in 0..n {
                                let j1 = (i1 + n - r1) % n;
                                s += (v[row_i + i1] - v[row_j + j1]).abs().powf(p);
                            }
                        }
                    }
                    out[rho] = s;
                }
            }
        }
    }
    out
}

/// The kernel pair sum `S_h = sum_{i,tau} K^h_tau |u_i - u_{i-tau}|^p` for one
/// ladder entry, given precomputed moduli (any p) or via FFT (p = 2).
pub fn kernel_pair_sum(kernel: &FoldedKernel, moduli: &[f64]) -> f64 {
    kernel.dot(moduli)
}

/// FFT route for p = 2:
/// `sum_{i,tau} K_tau |u_i - u_{i-tau}|^2 = 2 (sum K) sum u^2 - 2 sum_i u_i (K*u)_i`.
pub fn kernel_pair_sum_p2(kernel: &FoldedKernel, u: &ScalarField, spectral: &Spectral) -> f64 {
    let conv = spectral.circular_convolve(kernel.table(), u.values());
    let sum_sq: f64 = u.values().iter().map(|v| v * v).sum();
    let cross: f64 = u.values().iter().zip(conv.iter()).map(|(a, b)| a * b).sum();
    2.0 * kernel.total() * sum_sq - 2.0 * cross
}

/// Discrete log-scale semi-norm
/// `sup_h ( |log h|^-theta dx^{2d} S_h )^{1/p}` over the ladder.
pub fn discrete_seminorm(u: &ScalarField, params: &SemiNormParams) -> Result<f64> {
    let ladder = KernelLadder::for_params(*u.grid(), params)?;
    discrete_seminorm_with_ladder(u, params.p, params.theta, &ladder)
}

/// Same, with a caller-supplied ladder (reused across steps).
pub fn discrete_seminorm_with_ladder(
    u: &ScalarField,
    p: f64,
    theta: f64,
    ladder: &KernelLadder,
) -> Result<f64> {
    u.check_finite()?;
    if ladder.entries().is_empty() {
        return Err(CoreError::EmptyLadder);
    }
    let g = u.grid();
    let scale = g.cell_volume() * g.cell_volume();
    let mut best = 0.0f64;
    if p == 2.0 {
        let spectral = Spectral::new(*g);
        for entry in ladder.entries() {
            let s = kernel_pair_sum_p2(entry, u, &spectral);
            let val = entry.log_weight().powf(-theta) * scale * s.max(0.0);
            best = best.max(val);
        }
    } else {
        let moduli = pair_moduli(u, p);
        for entry in ladder.entries() {
            let s = kernel_pair_sum(entry, &moduli);
            let val = entry.log_weight().powf(-theta) * scale * s;
            best = best.max(val);
        }
    }
    Ok(best.powf(1.0 / p))
}

/// Per-h values `( |log h|^-theta dx^{2d} S_h )^{1/p}` (no sup), for reports.
pub fn seminorm_profile(
    u: &ScalarField,
    p: f64,
    theta: f64,
    ladder: &KernelLadder,
) -> Vec<(f64, f64)> {
    let g = u.grid();
    let scale = g.cell_volume() * g.cell_volume();
    let moduli = pair_moduli(u, p);
    ladder
        .entries()
        .iter()
        .map(|entry| {
            let s = kernel_pair_sum(entry, &moduli);
            (entry.h(), (entry.log_weight().powf(-theta) * scale * s).powf(1.0 / p))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// kernel mass
// ---------------------------------------------------------------------------

const GL16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn gauss16(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL16_X.iter().zip(GL16_W.iter()) {
        s += w * (f(c + hw * x) + f(c - hw * x));
    }
    s * hw
}

/// `int_{B(0,2)} K_h(z) dz`, by dyadic-band radial quadrature. Grows like
/// `|log h|` as `h` shrinks.
pub fn kernel_mass(d: usize, h: f64) -> f64 {
    let surface = match d {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI,
    };
    let integrand = |r: f64| cutoff(r) * r.powi(d as i32 - 1) / (r + h).powi(d as i32);
    // bands [0,h], [h,2h], ..., capped at 2
    let mut total = gauss16(integrand, 0.0, h.min(2.0));
    let mut lo = h.min(2.0);
    while lo < 2.0 {
        let hi = (2.0 * lo).min(2.0);
        total += gauss16(integrand, lo, hi);
        lo = hi;
    }
    surface * total
}

// ---------------------------------------------------------------------------
// continuous semi-norm by cell-pair quadrature
// ---------------------------------------------------------------------------

const GL8_X: [f64; 4] = [
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_W: [f64; 4] = [
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gauss8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        s += w * (f(c + hw * x) + f(c - hw * x));
    }
    s * hw
}

/// Cell-pair weights `W(tau) = int_{C_0} int_{C_tau} K_h(x-y) dx dy`, folded
/// onto residues. The tent correlation of two cells is exact for
/// piecewise-constant fields; only the kernel factor is quadratured.
fn folded_cell_weights(grid: &GridSpec, h: f64) -> Vec<f64> {
    let n = grid.cells_per_axis() as i64;
    let dx = grid.dx();
    let w = 2 * grid.cells_per_axis() as i64 + 2;
    let nodes = grid.node_count();
    let mut out = vec![0.0; nodes];
    match grid.dim() {
        1 => {
            let kern = |z: f64| {
                let r = z.abs();
                cutoff(r) / (r + h)
            };
            for tau in -w..=w {
                let z0 = tau as f64 * dx;
                // int_{-dx}^{dx} K(z0+s) (dx - |s|) ds, split at the tent kink
                let val = gauss8(|s| kern(z0 + s) * (dx - s.abs()), -dx, 0.0)
                    + gauss8(|s| kern(z0 + s) * (dx - s.abs()), 0.0, dx);
                if val != 0.0 {
                    out[tau.rem_euclid(n) as usize] += val;
                }
            }
        }
        _ => {
            let kern = |z0: f64, z1: f64| {
                let r = (z0 * z0 + z1 * z1).sqrt();
                if r >= 2.0 {
                    0.0
                } else {
                    cutoff(r) / (r + h).powi(2)
                }
            };
            let panels = [(-dx, 0.0), (0.0, dx)];
            for t0 in -w..=w {
                let z0 = t0 as f64 * dx;
                if (z0.abs() - 2.0) > 2.0 * dx {
                    continue;
                }
                let row = t0.rem_euclid(n) as usize * n as usize;
                for t1 in -w..=w {
                    let z1 = t1 as f64 * dx;
                    let mut val = 0.0;
                    for (a0, b0) in panels {
                        for (a1, b1) in panels {
                            val += gauss8(
                                |s0| {
                                    gauss8(
                                        |s1| kern(z0 + s0, z1 + s1) * (dx - s1.abs()),
                                        a1,
                                        b1,
                                    ) * (dx - s0.abs())
                                },
                                a0,
                                b0,
                            );
                        }
                    }
                    if val != 0.0 {
                        out[row + t1.rem_euclid(n) as usize] += val;
                    }
                }
            }
        }
    }
    out
}

/// Continuous semi-norm of the piecewise-constant interpolant of `u`:
/// `sup_h ( |log h|^-theta int int K_h |u(x)-u(y)|^p )^{1/p}`, the double
/// integral evaluated exactly per cell pair, sup over the dyadic ladder down
/// to `h = dx`.
pub fn continuous_seminorm(u: &ScalarField, p: f64, theta: f64) -> Result<f64> {
    u.check_finite()?;
    let g = u.grid();
    let ladder = dyadic_ladder(g.dx());
    if ladder.is_empty() {
        return Err(CoreError::EmptyLadder);
    }
    let moduli = pair_moduli(u, p);
    let mut best = 0.0f64;
    for h in ladder {
        let weights = folded_cell_weights(g, h);
        let s: f64 = weights.iter().zip(moduli.iter()).map(|(w, m)| w * m).sum();
        let val = (-h.ln()).powf(-theta) * s;
        best = best.max(val);
    }
    Ok(best.powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Fourier-side equivalence (p = 2)
// ---------------------------------------------------------------------------

/// Two routes to the p=2 semi-norm scale: the kernel pair sums plus the L^2
/// floor on one side, the log-weighted spectral sum on the other.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierEquivReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub per_h: Vec<(f64, f64)>,
}

/// Compares `||u||_{2,theta}^2 + ||u||_{L^2}^2` against
/// `sup_h sum_m (|log(1/(2 pi |m|) + h)| + 1) / |log h|^theta |c_m|^2`.
///
/// The zero mode carries plain weight 1 (its L^2 mass); on the torus it has
/// no intrinsic frequency scale.
pub fn fourier_equiv_check(u: &ScalarField, theta: f64, ladder: &KernelLadder) -> Result<FourierEquivReport> {
    let g = u.grid();
    let spectral = Spectral::new(*g);
    let semi = discrete_seminorm_with_ladder(u, 2.0, theta, ladder)?;
    let l2 = lp_norm(u, Exponent::Finite(2.0))?;
    let lhs = semi * semi + l2 * l2;

    let coeffs = spectral.forward(u);
    let mut rhs = 0.0f64;
    let mut per_h = Vec::new();
    for entry in ladder.entries() {
        let h = entry.h();
        let logh = -h.ln();
        let mut s = 0.0;
        for (bin, c) in coeffs.iter().enumerate() {
            let e = c.norm_sqr();
            if e == 0.0 {
                continue;
            }
            let m = spectral.freq_norm(bin);
            if m == 0.0 {
                s += e;
            } else {
                let xi = 2.0 * std::f64::consts::PI * m;
                s += ((1.0 / xi + h).ln().abs() + 1.0) / logh.powf(theta) * e;
            }
        }
        per_h.push((h, s));
        rhs = rhs.max(s);
    }
    let ratio = if rhs > 0.0 { lhs / rhs } else { f64::NAN };
    Ok(FourierEquivReport { lhs, rhs, ratio, per_h })
}

/// `||u - Kbar_h * u||_{l^1}`, the mollification error controlled by
/// `C |log h|^{theta-1} ||u||_{1,theta}`.
pub fn mollification_error(u: &ScalarField, kernel: &FoldedKernel) -> Result<f64> {
    let spectral = Spectral::new(*u.grid());
    let smooth = kernel.mollify(u, &spectral);
    let diff = ScalarField::new(
        *u.grid(),
        u.values().iter().zip(smooth.values()).map(|(a, b)| a - b).collect(),
    )?;
    lp_norm(&diff, Exponent::Finite(1.0))
}
