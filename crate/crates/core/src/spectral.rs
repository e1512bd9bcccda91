//! FFT plumbing for the unit torus: forward/inverse transforms of scalar
//! fields in d = 1, 2 and the standard frequency bookkeeping.
//!
//! Conventions: the forward transform returns coefficients `c_m` of the
//! expansion `u(x) = sum_m c_m exp(2 pi i m . x)` over signed lattice
//! frequencies `m` (so Parseval reads `||u||_{L^2}^2 = sum |c_m|^2` with the
//! normalized lattice norm).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::{GridSpec, ScalarField};

/// Forward/inverse DFT pair bound to one grid.
pub struct Spectral {
    grid: GridSpec,
    planner: std::cell::RefCell<FftPlanner<f64>>,
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        Spectral { grid, planner: std::cell::RefCell::new(FftPlanner::new()) }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Fourier coefficients of `u` (normalized by 1/N).
    pub fn forward(&self, u: &ScalarField) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> =
            u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        let scale = 1.0 / u.grid().node_count() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf
    }

    /// Real part of the inverse transform of coefficients.
    pub fn inverse(&self, coeffs: &[Complex64]) -> ScalarField {
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, false);
        ScalarField::new(self.grid, buf.iter().map(|c| c.re).collect())
            .expect("inverse transform produced non-finite values")
    }

    /// In-place unnormalized DFT along every axis. `forward` selects the sign.
    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let n = self.grid.cells_per_axis();
        let mut planner = self.planner.borrow_mut();
        let fft = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        match self.grid.dim() {
            1 => fft.process(buf),
            _ => {
                // rows (axis 1 contiguous)
                for row in buf.chunks_mut(n) {
                    fft.process(row);
                }
                // columns via transpose, transform, transpose back
                let mut col = vec![Complex64::default(); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    fft.process(&mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
            }
        }
        if !forward {
            let scale = 1.0; // normalization handled by forward
            let _ = scale;
        }
    }

    /// Signed frequency multi-index of a flat bin.
    pub fn freq(&self, bin: usize) -> [i64; 2] {
        let g = &self.grid;
        let idx = g.unflatten(bin);
        match g.dim() {
            1 => [g.signed_freq(idx[0]), 0],
            _ => [g.signed_freq(idx[0]), g.signed_freq(idx[1])],
        }
    }

    /// |m| of the signed frequency of a flat bin.
    pub fn freq_norm(&self, bin: usize) -> f64 {
        let m = self.freq(bin);
        ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt()
    }

    /// Spectral derivative symbol `2 pi i m_k`, zeroed at the Nyquist
    /// frequency so derivatives of real fields stay real.
    pub fn derivative_symbol(&self, bin: usize, axis: usize) -> Complex64 {
        let m = self.freq(bin);
        let nyq = self.grid.cells_per_axis() as i64 / 2;
        if m[axis].abs() >= nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, std::f64::consts::TAU * m[axis] as f64)
        }
    }

    /// Periodic circular convolution `(k * u)_i = sum_tau k_tau u_{i-tau}`
    /// of two node tables (no dx weight).
    pub fn circular_convolve(&self, kernel: &[f64], u: &[f64]) -> Vec<f64> {
        let nodes = self.grid.node_count();
        assert_eq!(kernel.len(), nodes);
        assert_eq!(u.len(), nodes);
        let mut kb: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut ub: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut kb, true);
        self.transform(&mut ub, true);
        for (a, b) in kb.iter_mut().zip(ub.iter()) {
            *a *= b;
        }
        self.transform(&mut kb, false);
        let scale = 1.0 / nodes as f64;
        kb.iter().map(|c| c.re * scale).collect()
    }

    /// Periodic cross-correlation `z(rho) = sum_i x_i y_{i-rho}`.
    pub fn circular_correlate(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nodes = self.grid.node_count();
        assert_eq!(x.len(), nodes);
        assert_eq!(y.len(), nodes);
        let mut xb: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut yb: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut xb, true);
        self.transform(&mut yb, true);
        for (a, b) in xb.iter_mut().zip(yb.iter()) {
            *a *= b.conj();
        }
        self.transform(&mut xb, false);
        let scale = 1.0 / nodes as f64;
        xb.iter().map(|c| c.re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn forward_inverse_roundtrip_1d() {
        let g = GridSpec::new(1, 32, 1e-3).unwrap();
        let u = ScalarField::from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).cos() + 0.5);
        let sp = Spectral::new(g);
        let c = sp.forward(&u);
        let back = sp.inverse(&c);
        for (a, b) in u.values().iter().zip(back.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = GridSpec::new(1, 16, 1e-3).unwrap();
        let sp = Spectral::new(g);
        let u = ScalarField::from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).cos());
        let c = sp.forward(&u);
        for (bin, coeff) in c.iter().enumerate() {
            let m = sp.freq(bin)[0];
            if m.abs() == 3 {
                assert_relative_eq!(coeff.re, 0.5, epsilon = 1e-12);
            } else {
                assert!(coeff.norm() < 1e-12, "leak at m={m}");
            }
        }
    }

    #[test]
    fn roundtrip_2d_and_parseval() {
        let g = GridSpec::new(2, 16, 1e-3).unwrap();
        let u = ScalarField::from_fn(g, |x| {
            (2.0 * PI * x[0]).sin() * (2.0 * PI * 2.0 * x[1]).cos() + 0.25
        });
        let sp = Spectral::new(g);
        let c = sp.forward(&u);
        let back = sp.inverse(&c);
        for (a, b) in u.values().iter().zip(back.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let l2 = crate::grid::lp_norm(&u, crate::grid::Exponent::Finite(2.0)).unwrap();
        let spec_l2: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(l2, spec_l2, epsilon = 1e-12);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let g = GridSpec::new(1, 16, 1e-3).unwrap();
        let sp = Spectral::new(g);
        let kernel: Vec<f64> = (0..16).map(|i| ((i * 13 + 5) % 7) as f64 * 0.3).collect();
        let u: Vec<f64> = (0..16).map(|i| ((i * 11 + 2) % 5) as f64 - 2.0).collect();
        let fast = sp.circular_convolve(&kernel, &u);
        for i in 0..16 {
            let mut direct = 0.0;
            for tau in 0..16 {
                direct += kernel[tau] * u[(i + 16 - tau) % 16];
            }
            assert_relative_eq!(fast[i], direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn correlation_matches_direct_sum() {
        for (d, n) in [(1usize, 16usize), (2, 4)] {
            let g = GridSpec::new(d, n, 1e-3).unwrap();
            let sp = Spectral::new(g);
            let nodes = g.node_count();
            let x: Vec<f64> = (0..nodes).map(|i| ((i * 7 + 1) % 9) as f64 * 0.4 - 1.0).collect();
            let y: Vec<f64> = (0..nodes).map(|i| ((i * 5 + 3) % 11) as f64 * 0.2).collect();
            let fast = sp.circular_correlate(&x, &y);
            for rho in 0..nodes {
                let mut direct = 0.0;
                for i in 0..nodes {
                    let ci = g.unflatten(i);
                    let cr = g.unflatten(rho);
                    let j = match d {
                        1 => (ci[0] + n - cr[0]) % n,
                        _ => ((ci[0] + n - cr[0]) % n) * n + (ci[1] + n - cr[1]) % n,
                    };
                    direct += x[i] * y[j];
                }
                assert_relative_eq!(fast[rho], direct, epsilon = 1e-9);
            }
        }
    }
}
