use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::lattice::{jap, LatticeBox, MultiRange};
use crate::error::{Error, Result};

/// One Fourier mode as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub l: Vec<i64>,
    pub j: i64,
    pub re: f64,
    pub im: f64,
}

/// Truncated Fourier series `u(φ,x) = Σ u_{ℓ,j} e^{i(ℓ·φ + jx)}`.
///
/// Coefficients are stored densely, row `ℓ` (flattened with
/// [`MultiRange`]) times column `j + k_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusFunction {
    bx: LatticeBox,
    coeffs: Vec<C64>,
    /// Accumulated l2 mass dropped by truncations that produced this value.
    pub budget: f64,
}

/// Coefficient-level parity and reality flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub even_phi: bool,
    pub odd_phi: bool,
    pub even_x: bool,
    pub odd_x: bool,
    pub real: bool,
}

impl TorusFunction {
    pub fn zeros(bx: LatticeBox) -> Self {
        TorusFunction {
            bx,
            coeffs: vec![C64::new(0.0, 0.0); bx.len()],
            budget: 0.0,
        }
    }

    pub fn constant(bx: LatticeBox, c: f64) -> Self {
        let mut u = Self::zeros(bx);
        let z = u.zero_index();
        u.coeffs[z] = C64::new(c, 0.0);
        u
    }

    /// Single mode `c e^{i(ℓ·φ + jx)}`.
    pub fn mode(bx: LatticeBox, l: &[i64], j: i64, c: C64) -> Result<Self> {
        let mut u = Self::zeros(bx);
        u.set(l, j, c)?;
        Ok(u)
    }

    /// `amp · cos(l·φ) cos(jx)` style products built from real trigonometric factors.
    /// `phi_cos` / `x_cos`: true for cosine, false for sine.
    pub fn trig(bx: LatticeBox, amp: f64, l: &[i64], phi_cos: bool, j: i64, x_cos: bool) -> Result<Self> {
        let mut u = Self::zeros(bx);
        let neg: Vec<i64> = l.iter().map(|c| -c).collect();
        let zero_l = l.iter().all(|&c| c == 0);
        // factor for e^{+i l φ} and e^{-i l φ}
        let (pp, pm) = if zero_l {
            if phi_cos {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            }
        } else if phi_cos {
            (C64::new(0.5, 0.0), C64::new(0.5, 0.0))
        } else {
            (C64::new(0.0, -0.5), C64::new(0.0, 0.5))
        };
        let (xp, xm) = if j == 0 {
            if x_cos {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            }
        } else if x_cos {
            (C64::new(0.5, 0.0), C64::new(0.5, 0.0))
        } else {
            (C64::new(0.0, -0.5), C64::new(0.0, 0.5))
        };
        for (lv, pc) in [(l, pp), (&neg[..], pm)] {
            for (jv, xc) in [(j, xp), (-j, xm)] {
                let c = pc * xc * amp;
                if c != C64::new(0.0, 0.0) {
                    let old = u.get(lv, jv);
                    u.set(lv, jv, old + c)?;
                }
            }
        }
        Ok(u)
    }

    pub fn lattice(&self) -> LatticeBox {
        self.bx
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn from_coeffs(bx: LatticeBox, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != bx.len() {
            return Err(Error::BoxMismatch(format!(
                "coefficient vector of length {} for box of size {}",
                coeffs.len(),
                bx.len()
            )));
        }
        Ok(TorusFunction {
            bx,
            coeffs,
            budget: 0.0,
        })
    }

    fn zero_index(&self) -> usize {
        self.bx.l_range().zero() * self.bx.n_j() + self.bx.k_x
    }

    pub fn flat_index(&self, l: &[i64], j: i64) -> Option<usize> {
        if l.len() != self.bx.nu {
            return None;
        }
        let li = self.bx.l_range().index(l)?;
        let jj = self.bx.j_index(j)?;
        Some(li * self.bx.n_j() + jj)
    }

    /// Coefficient at `(ℓ, j)`; zero outside the box.
    pub fn get(&self, l: &[i64], j: i64) -> C64 {
        self.flat_index(l, j)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, l: &[i64], j: i64, c: C64) -> Result<()> {
        let i = self.flat_index(l, j).ok_or_else(|| {
            Error::InvalidParameter(format!("mode ({l:?}, {j}) outside box {:?}", self.bx))
        })?;
        self.coeffs[i] = c;
        Ok(())
    }

    pub fn mean(&self) -> C64 {
        self.coeffs[self.zero_index()]
    }

    pub fn from_records(bx: LatticeBox, records: &[ModeRecord]) -> Result<Self> {
        let mut u = Self::zeros(bx);
        for (index, r) in records.iter().enumerate() {
            if r.l.len() != bx.nu {
                return Err(Error::MalformedRecord {
                    index,
                    reason: format!("'l' has {} components, expected {}", r.l.len(), bx.nu),
                });
            }
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::MalformedRecord {
                    index,
                    reason: "non-finite coefficient".into(),
                });
            }
            let i = u.flat_index(&r.l, r.j).ok_or_else(|| Error::MalformedRecord {
                index,
                reason: format!("mode ({:?}, {}) outside box", r.l, r.j),
            })?;
            u.coeffs[i] += C64::new(r.re, r.im);
        }
        Ok(u)
    }

    /// Nonzero modes in storage order.
    pub fn to_records(&self) -> Vec<ModeRecord> {
        let lr = self.bx.l_range();
        let nj = self.bx.n_j();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| ModeRecord {
                l: lr.vector(i / nj),
                j: self.bx.j_value(i % nj),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    fn same(&self, other: &Self) -> Result<()> {
        self.bx.check_same(&other.bx)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(TorusFunction {
            bx: self.bx,
            coeffs,
            budget: self.budget + other.budget,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(TorusFunction {
            bx: self.bx,
            coeffs,
            budget: self.budget + other.budget,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        TorusFunction {
            bx: self.bx,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            budget: self.budget * c.norm(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Apply `f(ℓ, j, u_{ℓ,j})` coefficientwise.
    pub fn map_modes(&self, f: impl Fn(&[i64], i64, C64) -> C64) -> Self {
        let lr = self.bx.l_range();
        let nj = self.bx.n_j();
        let mut out = self.clone();
        for li in 0..lr.len() {
            let l = lr.vector(li);
            for jj in 0..nj {
                let i = li * nj + jj;
                out.coeffs[i] = f(&l, self.bx.j_value(jj), self.coeffs[i]);
            }
        }
        out
    }

    /// `∂_x u`.
    pub fn dx(&self) -> Self {
        self.map_modes(|_, j, c| c * C64::new(0.0, j as f64))
    }

    /// `∂_{φ_h} u`.
    pub fn dphi(&self, h: usize) -> Self {
        self.map_modes(|l, _, c| c * C64::new(0.0, l[h] as f64))
    }

    /// `ω·∂_φ u`.
    pub fn omega_dphi(&self, omega: &[f64]) -> Self {
        self.map_modes(|l, _, c| {
            let w: f64 = l.iter().zip(omega).map(|(&a, &b)| a as f64 * b).sum();
            c * C64::new(0.0, w)
        })
    }

    fn permuted(&self, flip_l: bool, flip_j: bool) -> Self {
        let lr = self.bx.l_range();
        let nj = self.bx.n_j();
        let mut out = Self::zeros(self.bx);
        out.budget = self.budget;
        for li in 0..lr.len() {
            let src_l = if flip_l { lr.neg(li) } else { li };
            for jj in 0..nj {
                let src_j = if flip_j { nj - 1 - jj } else { jj };
                out.coeffs[li * nj + jj] = self.coeffs[src_l * nj + src_j];
            }
        }
        out
    }

    /// `u(φ, -x)`.
    pub fn reflect_x(&self) -> Self {
        self.permuted(false, true)
    }

    /// `u(-φ, x)`.
    pub fn reflect_phi(&self) -> Self {
        self.permuted(true, false)
    }

    /// Pointwise complex conjugate `conj(u(φ,x))`.
    pub fn conj_fn(&self) -> Self {
        let mut out = self.permuted(true, true);
        for c in out.coeffs.iter_mut() {
            *c = c.conj();
        }
        out
    }

    /// Real part of the function, `(u + conj u)/2`.
    pub fn real_part(&self) -> Self {
        let c = self.conj_fn();
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&c.coeffs) {
            *a = (*a + b) * 0.5;
        }
        out
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let lr = self.bx.l_range();
        let nj = self.bx.n_j();
        let mut acc = 0.0;
        for li in 0..lr.len() {
            let l1 = lr.norm1(li);
            for jj in 0..nj {
                let c = self.coeffs[li * nj + jj];
                if c.re != 0.0 || c.im != 0.0 {
                    let w = jap(l1, self.bx.j_value(jj)).powf(s);
                    acc += w * w * c.norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Majorant function `Σ |u_{ℓ,j}| e^{i(ℓ·φ + jx)}`.
    pub fn majorant(&self) -> Self {
        TorusFunction {
            bx: self.bx,
            coeffs: self.coeffs.iter().map(|c| C64::new(c.norm(), 0.0)).collect(),
            budget: self.budget,
        }
    }

    /// Wiener bound on the sup norm.
    pub fn wiener_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Exact convolution product, truncated back to the box.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let bx = self.bx;
        let lr = bx.l_range();
        let nj = bx.n_j() as i64;
        let kx = bx.k_x as i64;
        // ℓ-sums live in a twice wider range; accumulate there and cut.
        let wide = MultiRange::new(bx.nu, 2 * bx.k_phi);
        let wide_nj = (4 * bx.k_x + 1) as i64;
        let mut acc = vec![C64::new(0.0, 0.0); wide.len() * wide_nj as usize];
        let to_wide: Vec<usize> = (0..lr.len()).map(|i| lr.reindex(i, &wide).unwrap()).collect();
        let wzero = wide.zero();
        let nz_a: Vec<(usize, usize, C64)> = nonzero(&self.coeffs, nj as usize);
        let nz_b: Vec<(usize, usize, C64)> = nonzero(&other.coeffs, nj as usize);
        for &(la, ja, ca) in &nz_a {
            let wa = to_wide[la];
            for &(lb, jb, cb) in &nz_b {
                // the centered layout makes flat indices additive
                let wl = wa + to_wide[lb] - wzero;
                let j = (ja as i64 - kx) + (jb as i64 - kx);
                let idx = wl * wide_nj as usize + (j + 2 * kx) as usize;
                acc[idx] += ca * cb;
            }
        }
        let mut out = Self::zeros(bx);
        let mut kept = vec![false; acc.len()];
        for li in 0..lr.len() {
            let wl = to_wide[li];
            for jj in 0..nj {
                let idx = wl * wide_nj as usize + (jj + kx) as usize;
                out.coeffs[li * nj as usize + jj as usize] = acc[idx];
                kept[idx] = true;
            }
        }
        let dropped: f64 = acc
            .iter()
            .zip(&kept)
            .filter(|(_, k)| !**k)
            .map(|(c, _)| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        out.budget = dropped + self.budget * other.wiener_norm() + other.budget * self.wiener_norm();
        Ok(out)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.conj_fn()) <= tol
    }

    pub fn default_sym_tol(&self) -> f64 {
        1e-12 * (1.0 + self.sobolev_norm(self.bx.s0()))
    }

    pub fn symmetry_check(&self) -> SymmetryReport {
        self.symmetry_check_tol(self.default_sym_tol())
    }

    pub fn symmetry_check_tol(&self, tol: f64) -> SymmetryReport {
        let rp = self.reflect_phi();
        let rx = self.reflect_x();
        let cmp = |a: &Self, sign: f64| {
            self.coeffs
                .iter()
                .zip(&a.coeffs)
                .map(|(u, v)| (u - v * sign).norm())
                .fold(0.0, f64::max)
                <= tol
        };
        SymmetryReport {
            even_phi: cmp(&rp, 1.0),
            odd_phi: cmp(&rp, -1.0),
            even_x: cmp(&rx, 1.0),
            odd_x: cmp(&rx, -1.0),
            real: self.is_real(tol),
        }
    }

    /// Copy into another box, dropping modes that do not fit.
    pub fn rebox(&self, bx: LatticeBox) -> Result<Self> {
        if bx.nu != self.bx.nu {
            return Err(Error::BoxMismatch(format!("nu {} vs {}", self.bx.nu, bx.nu)));
        }
        let mut out = Self::zeros(bx);
        let mut dropped = 0.0;
        for r in self.to_records() {
            let c = C64::new(r.re, r.im);
            match out.flat_index(&r.l, r.j) {
                Some(i) => out.coeffs[i] = c,
                None => dropped += c.norm_sqr(),
            }
        }
        out.budget = self.budget + dropped.sqrt();
        Ok(out)
    }

    /// x-Fourier coefficients `g_j(φ) = Σ_ℓ û(ℓ, j) e^{iℓ·φ}`, indexed `j + K_x`.
    pub fn x_profile(&self, phi: &[f64]) -> Vec<C64> {
        let lr = self.bx.l_range();
        let nj = self.bx.n_j();
        let mut g = vec![C64::new(0.0, 0.0); nj];
        for li in 0..lr.len() {
            let row = &self.coeffs[li * nj..(li + 1) * nj];
            if row.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            let th: f64 = lr.vector(li).iter().zip(phi).map(|(&l, &p)| l as f64 * p).sum();
            let e = C64::from_polar(1.0, th);
            for (gj, c) in g.iter_mut().zip(row) {
                *gj += c * e;
            }
        }
        g
    }

    /// `u(φ, x)` at an arbitrary point.
    pub fn eval(&self, phi: &[f64], x: f64) -> C64 {
        eval_profile(&self.x_profile(phi), x).0
    }
}

/// Value and x-derivative of `Σ_j g_j e^{ijx}` with `j` centred.
pub fn eval_profile(g: &[C64], x: f64) -> (C64, C64) {
    let k = (g.len() / 2) as i64;
    let mut v = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for (i, c) in g.iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let j = i as i64 - k;
        let t = c * C64::from_polar(1.0, j as f64 * x);
        v += t;
        d += t * C64::new(0.0, j as f64);
    }
    (v, d)
}

fn nonzero(c: &[C64], nj: usize) -> Vec<(usize, usize, C64)> {
    c.iter()
        .enumerate()
        .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
        .map(|(i, z)| (i / nj, i % nj, *z))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 3, 4).unwrap()
    }

    #[test]
    fn sobolev_examples() {
        let one = TorusFunction::constant(bx(), 1.0);
        assert_abs_diff_eq!(one.sobolev_norm(0.0), 1.0);
        assert_abs_diff_eq!(one.sobolev_norm(3.7), 1.0);
        let e2 = TorusFunction::mode(bx(), &[0], 2, C64::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(e2.sobolev_norm(1.0), 2.0);
        let cosx = TorusFunction::trig(bx(), 1.0, &[0], true, 1, true).unwrap();
        // two modes of weight 1 and modulus 1/2
        let oracle = (2.0f64 * 0.25).sqrt();
        assert_abs_diff_eq!(cosx.sobolev_norm(2.0), oracle, epsilon = 1e-15);
    }

    #[test]
    fn cos_squared() {
        let c = TorusFunction::trig(bx(), 1.0, &[0], true, 1, true).unwrap();
        let p = c.multiply(&c).unwrap();
        assert_abs_diff_eq!(p.get(&[0], 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(&[0], 2).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(&[0], -2).re, 0.25, epsilon = 1e-15);
        assert_eq!(p.budget, 0.0);
    }

    #[test]
    fn truncation_budget_counts_dropped_mass() {
        let e = TorusFunction::mode(bx(), &[2], 3, C64::new(1.0, 0.0)).unwrap();
        let p = e.multiply(&e).unwrap();
        assert_eq!(p.max_abs(), 0.0);
        assert_abs_diff_eq!(p.budget, 1.0);
    }

    #[test]
    fn symmetry_flags() {
        let f = TorusFunction::trig(bx(), 1.0, &[1], true, 1, true).unwrap();
        let r = f.symmetry_check();
        assert!(r.even_phi && r.even_x && r.real && !r.odd_x);
        let g = TorusFunction::trig(bx(), 1.0, &[1], true, 1, false).unwrap();
        let r = g.symmetry_check();
        assert!(r.even_phi && r.odd_x && r.real);
        let e = TorusFunction::mode(bx(), &[0], 1, C64::new(1.0, 0.0)).unwrap();
        let r = e.symmetry_check();
        assert!(!r.even_x && !r.odd_x && !r.real);
    }

    #[test]
    fn records_round_trip_and_errors() {
        let f = TorusFunction::trig(bx(), 0.3, &[1], true, 2, false).unwrap();
        let g = TorusFunction::from_records(bx(), &f.to_records()).unwrap();
        assert_eq!(f, g);
        let bad = vec![ModeRecord { l: vec![0], j: 0, re: 1.0, im: 0.0 }, ModeRecord { l: vec![9], j: 0, re: 1.0, im: 0.0 }];
        match TorusFunction::from_records(bx(), &bad) {
            Err(Error::MalformedRecord { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
