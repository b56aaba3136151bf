//! Collocation grids on the torus and the FFT pair between grid values and
//! Fourier coefficients.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::lattice::LatticeBox;
use super::torus::TorusFunction;
use crate::error::{Error, Result};

/// Uniform grid with `n_phi` points per angle `φ_h` and `n_x` points in `x`.
/// Values are stored with `x` fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub nu: usize,
    pub n_phi: usize,
    pub n_x: usize,
}

impl Grid {
    pub fn new(nu: usize, n_phi: usize, n_x: usize) -> Self {
        Grid { nu, n_phi, n_x }
    }

    /// Grid that resolves products of `factor` box functions without aliasing.
    pub fn for_box(bx: &LatticeBox, factor: usize) -> Self {
        let n_phi = (factor * (2 * bx.k_phi + 1)).next_power_of_two();
        let n_x = (factor * (2 * bx.k_x + 1)).next_power_of_two();
        Grid::new(bx.nu, n_phi, n_x)
    }

    pub fn len(&self) -> usize {
        self.n_phi.pow(self.nu as u32) * self.n_x
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.n_phi; self.nu];
        s.push(self.n_x);
        s
    }

    /// Coordinates `(φ, x)` of grid point `idx`.
    pub fn point(&self, mut idx: usize) -> (Vec<f64>, f64) {
        let tau = std::f64::consts::TAU;
        let x = (idx % self.n_x) as f64 * tau / self.n_x as f64;
        idx /= self.n_x;
        let mut phi = vec![0.0; self.nu];
        for slot in phi.iter_mut().rev() {
            *slot = (idx % self.n_phi) as f64 * tau / self.n_phi as f64;
            idx /= self.n_phi;
        }
        (phi, x)
    }

    fn check(&self, bx: &LatticeBox) -> Result<()> {
        if bx.nu != self.nu || self.n_phi < 2 * bx.k_phi + 1 || self.n_x < 2 * bx.k_x + 1 {
            return Err(Error::InvalidParameter(format!(
                "grid {:?} does not resolve box {:?}",
                self, bx
            )));
        }
        Ok(())
    }

    fn slot(&self, l: &[i64], j: i64) -> usize {
        let mut idx = 0usize;
        for &c in l {
            idx = idx * self.n_phi + c.rem_euclid(self.n_phi as i64) as usize;
        }
        idx * self.n_x + j.rem_euclid(self.n_x as i64) as usize
    }

    /// Point values `u(φ_p, x_q)`.
    pub fn synthesize(&self, u: &TorusFunction) -> Result<Vec<C64>> {
        let bx = u.lattice();
        self.check(&bx)?;
        let mut data = vec![C64::new(0.0, 0.0); self.len()];
        for r in u.to_records() {
            data[self.slot(&r.l, r.j)] = C64::new(r.re, r.im);
        }
        fft_nd(&mut data, &self.shape(), true);
        Ok(data)
    }

    /// Fourier coefficients inside `bx` of the trigonometric interpolant.
    /// The l2 mass of resolved modes outside the box goes to the budget.
    pub fn analyze(&self, values: &[C64], bx: LatticeBox) -> Result<TorusFunction> {
        self.check(&bx)?;
        if values.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "{} grid values for a grid of {} points",
                values.len(),
                self.len()
            )));
        }
        let mut data = values.to_vec();
        fft_nd(&mut data, &self.shape(), false);
        let scale = 1.0 / self.len() as f64;
        let total: f64 = data.iter().map(|c| c.norm_sqr()).sum::<f64>() * scale * scale;
        let mut out = TorusFunction::zeros(bx);
        let lr = bx.l_range();
        let nj = bx.n_j();
        let mut kept = 0.0;
        for li in 0..lr.len() {
            let l = lr.vector(li);
            for jj in 0..nj {
                let c = data[self.slot(&l, bx.j_value(jj))] * scale;
                kept += c.norm_sqr();
                out.coeffs_mut()[li * nj + jj] = c;
            }
        }
        out.budget = (total - kept).max(0.0).sqrt();
        Ok(out)
    }

    /// Apply a pointwise map and refit onto `bx`.
    pub fn compose_pointwise(
        &self,
        u: &TorusFunction,
        bx: LatticeBox,
        f: impl Fn(C64) -> C64,
    ) -> Result<TorusFunction> {
        let v: Vec<C64> = self.synthesize(u)?.into_iter().map(f).collect();
        self.analyze(&v, bx)
    }
}

/// In-place multidimensional DFT. `inverse = true` computes
/// `Σ c e^{+i k·θ}` without normalization.
pub fn fft_nd(data: &mut [C64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    let mut stride = 1usize;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        if n > 1 {
            let fft: Arc<dyn Fft<f64>> = if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            };
            let mut line = vec![C64::new(0.0, 0.0); n];
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    fft.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
        stride *= n;
    }
}
