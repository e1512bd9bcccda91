//! Periodic Cartesian lattice geometry, field storage and the discrete norms
//! used everywhere else.
//!
//! The domain is fixed to the unit torus `[0,1)^d` with `n` cells per axis
//! (`n` a power of two so the spectral paths apply), `dx = 1/n`. Scalar
//! fields hold one value per node, vector fields `d` values per node stored
//! component-major.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const MAX_DIM: usize = 2;

/// Lattice geometry: dimension, cells per axis, cell width and time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n: usize,
    dx: f64,
    dt: f64,
}

impl GridSpec {
    /// A `d`-dimensional periodic grid with `n` cells per axis and time step `dt`.
    pub fn new(d: usize, n: usize, dt: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(CoreError::InvalidGrid(format!("d = {d}, must be 1 or 2")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!(
                "n = {n}, must be a power of two >= 2"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(CoreError::InvalidGrid(format!("dt = {dt}, must be > 0")));
        }
        Ok(GridSpec { d, n, dx: 1.0 / n as f64, dt })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// dt/dx, the mesh ratio entering every explicit update.
    pub fn mesh_ratio(&self) -> f64 {
        self.dt / self.dx
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        GridSpec::new(self.d, self.n, dt)
    }

    /// Total number of nodes, `n^d`.
    pub fn node_count(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Cell volume `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.d as i32)
    }

    /// Flat index of a multi-index (row-major, axis 0 slowest).
    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.d);
        match self.d {
            1 => idx[0],
            _ => idx[0] * self.n + idx[1],
        }
    }

    /// Multi-index of a flat node index.
    pub fn unflatten(&self, node: usize) -> [usize; MAX_DIM] {
        match self.d {
            1 => [node, 0],
            _ => [node / self.n, node % self.n],
        }
    }

    /// Node center coordinates `x_i = i * dx`.
    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.unflatten(node);
        [idx[0] as f64 * self.dx, idx[1] as f64 * self.dx]
    }

    /// The multi-index where coordinate `k` of `i` is shifted by `tau`,
    /// wrapping periodically modulo `n`.
    pub fn shift(&self, idx: &[usize], k: usize, tau: i64) -> [usize; MAX_DIM] {
        debug_assert!(k < self.d);
        let mut out = [0usize; MAX_DIM];
        out[..idx.len()].copy_from_slice(idx);
        out[k] = self.wrap(idx[k] as i64 + tau);
        out
    }

    /// Same shift acting on flat node indices.
    pub fn shift_node(&self, node: usize, k: usize, tau: i64) -> usize {
        let idx = self.unflatten(node);
        let shifted = self.shift(&idx[..self.d], k, tau);
        self.flatten(&shifted[..self.d])
    }

    /// Flat index of `node` displaced by a signed multi-offset, periodically.
    pub fn offset_node(&self, node: usize, off: &[i64]) -> usize {
        let idx = self.unflatten(node);
        match self.d {
            1 => self.wrap(idx[0] as i64 + off[0]),
            _ => self.wrap(idx[0] as i64 + off[0]) * self.n + self.wrap(idx[1] as i64 + off[1]),
        }
    }

    fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    /// Signed lattice frequency of an FFT bin index, in `(-n/2, n/2]`.
    pub fn signed_freq(&self, bin: usize) -> i64 {
        let n = self.n as i64;
        let b = bin as i64;
        if b <= n / 2 {
            b
        } else {
            b - n
        }
    }
}

/// One real value per lattice node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(CoreError::InvalidGrid(format!(
                "scalar field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFiniteField);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.node_count()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..grid.dim()])
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw node sum (no dx weight).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::NonFiniteField)
        }
    }
}

/// `d` real values per lattice node, component-major: component `k` lives in
/// `values[k*n^d .. (k+1)*n^d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.dim() * grid.node_count() {
            return Err(CoreError::InvalidGrid(format!(
                "vector field has {} values, expected {}",
                values.len(),
                grid.dim() * grid.node_count()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFiniteField);
        }
        Ok(VectorField { grid, values })
    }

    pub fn constant(grid: GridSpec, value: &[f64]) -> Self {
        let nodes = grid.node_count();
        let mut values = Vec::with_capacity(grid.dim() * nodes);
        for k in 0..grid.dim() {
            values.extend(std::iter::repeat_n(value[k], nodes));
        }
        VectorField { grid, values }
    }

    pub fn zero(grid: GridSpec) -> Self {
        VectorField { grid, values: vec![0.0; grid.dim() * grid.node_count()] }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components[0].grid();
        if components.len() != grid.dim() {
            return Err(CoreError::GridMismatch);
        }
        let mut values = Vec::with_capacity(grid.dim() * grid.node_count());
        for c in &components {
            if c.grid() != &grid {
                return Err(CoreError::GridMismatch);
            }
            values.extend_from_slice(c.values());
        }
        Ok(VectorField { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Component `k` as a slice over nodes.
    pub fn component(&self, k: usize) -> &[f64] {
        let nodes = self.grid.node_count();
        &self.values[k * nodes..(k + 1) * nodes]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut [f64] {
        let nodes = self.grid.node_count();
        &mut self.values[k * nodes..(k + 1) * nodes]
    }

    /// The vector at one node.
    pub fn at(&self, node: usize) -> [f64; MAX_DIM] {
        let nodes = self.grid.node_count();
        let mut out = [0.0; MAX_DIM];
        for k in 0..self.grid.dim() {
            out[k] = self.values[k * nodes + node];
        }
        out
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Max over nodes of the Euclidean node norm.
    pub fn max_node_norm(&self) -> f64 {
        let nodes = self.grid.node_count();
        (0..nodes)
            .map(|i| {
                let a = self.at(i);
                norm_d(&a[..self.grid.dim()])
            })
            .fold(0.0, f64::max)
    }

    /// Max over nodes and components of |a_{i,k}|.
    pub fn max_component(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, lambda: f64) -> Self {
        VectorField {
            grid: self.grid,
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::NonFiniteField)
        }
    }
}

pub(crate) fn norm_d(v: &[f64]) -> f64 {
    match v.len() {
        1 => v[0].abs(),
        _ => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Integrability exponent: a finite `p >= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Inf)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Err(CoreError::InvalidExponent(format!("p = {p}, need p >= 1 or inf")))
        }
    }
}

/// Normalized discrete l^p norm, `(dx^d sum_i |u_i|^p)^(1/p)`; max norm for p = inf.
pub fn lp_norm(u: &ScalarField, p: Exponent) -> Result<f64> {
    u.check_finite()?;
    lp_of_slice(u.values(), u.grid(), p)
}

/// l^p norm of a vector field, using the Euclidean norm at each node.
pub fn lp_norm_vec(a: &VectorField, p: Exponent) -> Result<f64> {
    a.check_finite()?;
    let g = a.grid();
    let nodes = g.node_count();
    match p {
        Exponent::Inf => Ok(a.max_node_norm()),
        Exponent::Finite(p) => {
            let mut s = 0.0;
            for i in 0..nodes {
                let v = a.at(i);
                s += norm_d(&v[..g.dim()]).powf(p);
            }
            Ok((g.cell_volume() * s).powf(1.0 / p))
        }
    }
}

fn lp_of_slice(values: &[f64], grid: &GridSpec, p: Exponent) -> Result<f64> {
    match p {
        Exponent::Inf => Ok(values.iter().fold(0.0, |m, v| m.max(v.abs()))),
        Exponent::Finite(p) => {
            let s: f64 = if p == 1.0 {
                values.iter().map(|v| v.abs()).sum()
            } else if p == 2.0 {
                values.iter().map(|v| v * v).sum()
            } else {
                values.iter().map(|v| v.abs().powf(p)).sum()
            };
            Ok((grid.cell_volume() * s).powf(1.0 / p))
        }
    }
}

/// Discrete Sobolev semi-norm
/// `(dx^d sum_i sum_k |a_i - a_{i+[1]_k}|^p)^(1/p)`
/// with the Euclidean norm on node differences and periodic wrap.
pub fn discrete_w1p(a: &VectorField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(CoreError::InvalidExponent(format!("p = {p}")));
    }
    a.check_finite()?;
    let g = a.grid();
    let nodes = g.node_count();
    let d = g.dim();
    let mut s = 0.0;
    for k in 0..d {
        for i in 0..nodes {
            let j = g.shift_node(i, k, 1);
            let mut diff = [0.0; MAX_DIM];
            for c in 0..d {
                diff[c] = a.component(c)[i] - a.component(c)[j];
            }
            s += norm_d(&diff[..d]).powf(p);
        }
    }
    Ok((g.cell_volume() * s).powf(1.0 / p))
}

/// Lorentz `L^{q,1}` norm of a nonnegative field, exact for lattice step
/// functions: with values sorted decreasing `v_1 >= ... >= v_N`,
/// `sum_m (m dx^d)^{1/q} (v_m - v_{m+1})`, `v_{N+1} = 0`.
pub fn lorentz_q1_norm(u: &ScalarField, q: f64) -> Result<f64> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(CoreError::InvalidExponent(format!("q = {q}, need q > 1")));
    }
    u.check_finite()?;
    if u.values().iter().any(|&v| v < 0.0) {
        return Err(CoreError::NegativeLorentzInput);
    }
    let mut sorted: Vec<f64> = u.values().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let vol = u.grid().cell_volume();
    let mut total = 0.0;
    for m in 0..sorted.len() {
        let next = if m + 1 < sorted.len() { sorted[m + 1] } else { 0.0 };
        let drop = sorted[m] - next;
        if drop > 0.0 {
            total += ((m + 1) as f64 * vol).powf(1.0 / q) * drop;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, n, 1e-3).unwrap()
    }

    #[test]
    fn grid_invariants_enforced() {
        assert!(GridSpec::new(3, 8, 1e-3).is_err());
        assert!(GridSpec::new(1, 12, 1e-3).is_err());
        assert!(GridSpec::new(1, 8, 0.0).is_err());
        let g = grid1(8);
        assert_relative_eq!(g.dx(), 0.125);
    }

    #[test]
    fn shift_wraps_periodically() {
        let g = grid1(8);
        assert_eq!(g.shift(&[0], 0, 1)[0], 1);
        assert_eq!(g.shift(&[7], 0, 1)[0], 0);
        let g2 = GridSpec::new(2, 4, 1e-3).unwrap();
        assert_eq!(g2.shift(&[3, 0], 1, -1), [3, 3]);
    }

    #[test]
    fn shift_composed_with_inverse_is_identity() {
        let g = GridSpec::new(2, 8, 1e-3).unwrap();
        for node in 0..g.node_count() {
            for k in 0..2 {
                for tau in [-3i64, -1, 1, 5] {
                    assert_eq!(g.shift_node(g.shift_node(node, k, tau), k, -tau), node);
                }
            }
        }
    }

    #[test]
    fn lp_norm_zero_and_constant() {
        let g = grid1(16);
        let zero = ScalarField::constant(g, 0.0);
        assert_eq!(lp_norm(&zero, Exponent::Finite(1.0)).unwrap(), 0.0);
        // unit torus: dx^d * n^d = 1, so a constant c has norm |c| for every p
        let c = ScalarField::constant(g, -2.5);
        for p in [1.0, 2.0, 3.5] {
            assert_relative_eq!(lp_norm(&c, Exponent::Finite(p)).unwrap(), 2.5, epsilon = 1e-14);
        }
        assert_relative_eq!(lp_norm(&c, Exponent::Inf).unwrap(), 2.5);
    }

    #[test]
    fn lp_norm_hand_sum() {
        // n=4, d=1, u=(1,2,3,4), p=2 -> sqrt(30/4)
        let g = grid1(4);
        let u = ScalarField::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(
            lp_norm(&u, Exponent::Finite(2.0)).unwrap(),
            (30.0f64 / 4.0).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn lp_norm_rejects_non_finite() {
        let g = grid1(4);
        let mut u = ScalarField::constant(g, 1.0);
        u.values_mut()[2] = f64::NAN;
        assert!(matches!(lp_norm(&u, Exponent::Finite(1.0)), Err(CoreError::NonFiniteField)));
    }

    #[test]
    fn w1p_constant_vanishes() {
        let g = GridSpec::new(2, 8, 1e-3).unwrap();
        let a = VectorField::constant(g, &[3.0, -1.0]);
        assert_eq!(discrete_w1p(&a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn w1p_hand_sums() {
        // d=1, n=2, a=(0,1), p=1: two wrap differences of size 1 -> dx*2 = 1
        let g = grid1(2);
        let a = VectorField::new(g, vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(discrete_w1p(&a, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        // d=1, n=4, a=(0,1,0,1), p=2: four unit differences -> (dx*4)^(1/2) = 1
        let g = grid1(4);
        let a = VectorField::new(g, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(discrete_w1p(&a, 2.0).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lorentz_zero_and_indicator() {
        let g = grid1(8);
        assert_eq!(lorentz_q1_norm(&ScalarField::constant(g, 0.0), 2.0).unwrap(), 0.0);
        // indicator of measure 1/2, q=2 -> sqrt(1/2)
        let u = ScalarField::from_fn(g, |x| if x[0] < 0.5 { 1.0 } else { 0.0 });
        assert_relative_eq!(lorentz_q1_norm(&u, 2.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn lorentz_sorted_sum_oracle() {
        // n=4, d=1, u=(4,3,2,1), q=2, computed by the sorted-sum definition
        let g = grid1(4);
        let u = ScalarField::new(g, vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let dx = 0.25f64;
        let expected = (1.0 * dx).sqrt() * 1.0
            + (2.0 * dx).sqrt() * 1.0
            + (3.0 * dx).sqrt() * 1.0
            + (4.0 * dx).sqrt() * 1.0;
        assert_relative_eq!(lorentz_q1_norm(&u, 2.0).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn lorentz_rejects_negative() {
        let g = grid1(4);
        let u = ScalarField::new(g, vec![1.0, -0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(lorentz_q1_norm(&u, 2.0), Err(CoreError::NegativeLorentzInput)));
    }

    #[test]
    fn indicator_lorentz_is_measure_power() {
        let g = grid1(32);
        for q in [1.5, 2.0, 4.0] {
            for cells in [1usize, 5, 16, 32] {
                let u = ScalarField::new(
                    g,
                    (0..32).map(|i| if i < cells { 1.0 } else { 0.0 }).collect(),
                )
                .unwrap();
                let measure = cells as f64 / 32.0;
                assert_relative_eq!(
                    lorentz_q1_norm(&u, q).unwrap(),
                    measure.powf(1.0 / q),
                    epsilon = 1e-13
                );
            }
        }
    }
}
