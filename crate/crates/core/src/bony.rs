//! Bony-smoothing couples `(M, R)`: an operator written as a majorant-bounded
//! part plus a smoothing part, normed with different weights.
//!
//! The Bony split depends on the absolute indices `(ℓ, j)`, not only on
//! differences, so couples are stored as dense matrices on the flattened
//! function box.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::{jap, LatticeBox};
use crate::pseudo::Symbol;
use crate::toeplitz::{power_iteration, BlockOperator2x2, ToeplitzOperator};

pub type DenseMat = Mat<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Points of the window `[s*, s₁]` over which the Bony part's norm is sampled.
pub const WINDOW_POINTS: usize = 5;

pub fn dense_from_toeplitz(a: &ToeplitzOperator) -> DenseMat {
    let dim = a.lattice().len();
    let flat = a.flatten();
    Mat::from_fn(dim, dim, |i, j| flat[i * dim + j])
}

pub fn dense_mul(a: &DenseMat, b: &DenseMat) -> DenseMat {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), C64::new(1.0, 0.0), Par::Seq);
    out
}

fn dense_zip(a: &DenseMat, b: &DenseMat, f: impl Fn(C64, C64) -> C64) -> DenseMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| f(a[(i, j)], b[(i, j)]))
}

pub fn dense_add(a: &DenseMat, b: &DenseMat) -> DenseMat {
    dense_zip(a, b, |x, y| x + y)
}

pub fn dense_sub(a: &DenseMat, b: &DenseMat) -> DenseMat {
    dense_zip(a, b, |x, y| x - y)
}

pub fn dense_scale(a: &DenseMat, c: C64) -> DenseMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * c)
}

pub fn dense_max_abs(a: &DenseMat) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

fn dense_apply(a: &DenseMat, v: &[C64], adjoint: bool) -> Vec<C64> {
    let (r, c) = (a.nrows(), a.ncols());
    if adjoint {
        (0..c).map(|j| (0..r).map(|i| a[(i, j)].conj() * v[i]).sum()).collect()
    } else {
        (0..r).map(|i| (0..c).map(|j| a[(i, j)] * v[j]).sum()).collect()
    }
}

/// `⟨ℓ, j⟩` for each flattened index of the box.
pub fn box_weights(bx: &LatticeBox) -> Vec<f64> {
    let lr = bx.l_range();
    let mut w = Vec::with_capacity(bx.len());
    for li in 0..lr.len() {
        let l1 = lr.norm1(li);
        for jj in 0..bx.n_j() {
            w.push(jap(l1, bx.j_value(jj)));
        }
    }
    w
}

/// `|A|_{s,s'}`: operator norm of the entrywise modulus between weighted spaces.
pub fn dense_majorant_norm(a: &DenseMat, w: &[f64], s: f64, s_prime: f64) -> f64 {
    let m = Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        C64::new(a[(i, j)].norm() * w[i].powf(s) / w[j].powf(s_prime), 0.0)
    });
    power_iteration(m.ncols(), |v| dense_apply(&m, v, false), |v| dense_apply(&m, v, true)).value
}

/// Flattened index → `(|ℓ|₁, j)` and the signed vector `ℓ`.
fn box_coords(bx: &LatticeBox) -> Vec<(Vec<i64>, i64)> {
    let lr = bx.l_range();
    let mut out = Vec::with_capacity(bx.len());
    for li in 0..lr.len() {
        let l = lr.vector(li);
        for jj in 0..bx.n_j() {
            out.push((l.clone(), bx.j_value(jj)));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct BonyCouple {
    bx: LatticeBox,
    pub m: DenseMat,
    pub r: DenseMat,
    pub s_star: f64,
    pub s1: f64,
}

/// Time/space Bony decomposition of a dense operator: entries with
/// `|ℓ−ℓ'| + |j−j'| < ½(|ℓ| + |j|)` form the Bony part.
pub fn bony_split_dense(bx: LatticeBox, a: &DenseMat, s1: f64) -> BonyCouple {
    let coords = box_coords(&bx);
    let dim = coords.len();
    let mut m = Mat::zeros(dim, dim);
    let mut r = Mat::zeros(dim, dim);
    for i in 0..dim {
        let (li, ji) = &coords[i];
        let size: i64 = li.iter().map(|c| c.abs()).sum::<i64>() + ji.abs();
        for k in 0..dim {
            let c = a[(i, k)];
            if c == ZERO {
                continue;
            }
            let (lk, jk) = &coords[k];
            let dist: i64 = li.iter().zip(lk).map(|(a, b)| (a - b).abs()).sum::<i64>() + (ji - jk).abs();
            if 2 * dist < size {
                m[(i, k)] = c;
            } else {
                r[(i, k)] = c;
            }
        }
    }
    BonyCouple {
        bx,
        m,
        r,
        s_star: bx.s_star(),
        s1,
    }
}

pub fn bony_split(a: &ToeplitzOperator, s1: f64) -> BonyCouple {
    bony_split_dense(a.lattice(), &dense_from_toeplitz(a), s1)
}

impl BonyCouple {
    pub fn zeros(bx: LatticeBox, s1: f64) -> Self {
        let d = bx.len();
        BonyCouple {
            bx,
            m: Mat::zeros(d, d),
            r: Mat::zeros(d, d),
            s_star: bx.s_star(),
            s1,
        }
    }

    /// `(Id, 0)`.
    pub fn identity(bx: LatticeBox, s1: f64) -> Self {
        let mut c = Self::zeros(bx, s1);
        for i in 0..bx.len() {
            c.m[(i, i)] = C64::new(1.0, 0.0);
        }
        c
    }

    pub fn lattice(&self) -> LatticeBox {
        self.bx
    }

    fn check(&self, o: &Self) -> Result<()> {
        self.bx.check_same(&o.bx)?;
        if self.s_star != o.s_star || self.s1 != o.s1 {
            return Err(Error::BoxMismatch(format!(
                "window [{}, {}] vs [{}, {}]",
                self.s_star, self.s1, o.s_star, o.s1
            )));
        }
        Ok(())
    }

    fn with(&self, m: DenseMat, r: DenseMat) -> Self {
        BonyCouple {
            bx: self.bx,
            m,
            r,
            s_star: self.s_star,
            s1: self.s1,
        }
    }

    /// The represented operator `M + R`.
    pub fn operator(&self) -> DenseMat {
        dense_add(&self.m, &self.r)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(self.with(dense_add(&self.m, &o.m), dense_add(&self.r, &o.r)))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(self.with(dense_sub(&self.m, &o.m), dense_sub(&self.r, &o.r)))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.with(dense_scale(&self.m, c), dense_scale(&self.r, c))
    }

    /// `(M₁M₂, M₁R₂ + R₁M₂ + R₁R₂)`.
    pub fn product(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let m = dense_mul(&self.m, &o.m);
        let r = dense_add(
            &dense_add(&dense_mul(&self.m, &o.r), &dense_mul(&self.r, &o.m)),
            &dense_mul(&self.r, &o.r),
        );
        Ok(self.with(m, r))
    }

    /// Product followed by a fresh Bony split of the result.
    pub fn product_resplit(&self, o: &Self) -> Result<Self> {
        let p = self.product(o)?;
        Ok(bony_split_dense(self.bx, &p.operator(), self.s1))
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.product(o)?.sub(&o.product(self)?)
    }

    /// `ad_A^k[B]`.
    pub fn ad_power(&self, b: &Self, k: usize) -> Result<Self> {
        let mut acc = b.clone();
        for _ in 0..k {
            acc = self.commutator(&acc)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        dense_apply(&self.operator(), v, false)
    }

    pub fn max_abs(&self) -> f64 {
        dense_max_abs(&self.m).max(dense_max_abs(&self.r))
    }

    fn window_grid(&self) -> Vec<f64> {
        if self.s1 <= self.s_star {
            return vec![self.s_star];
        }
        (0..WINDOW_POINTS)
            .map(|i| self.s_star + (self.s1 - self.s_star) * i as f64 / (WINDOW_POINTS - 1) as f64)
            .collect()
    }

    /// `sup_{s*≤p≤s₁} |M|_{p,p} + |R|_{s*,s}`.
    pub fn norm(&self, s: f64) -> Result<f64> {
        if s < self.s_star - 1e-12 || s > self.s1 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "s = {s} outside the window [{}, {}]",
                self.s_star, self.s1
            )));
        }
        let w = box_weights(&self.bx);
        let mb = self
            .window_grid()
            .into_iter()
            .map(|p| dense_majorant_norm(&self.m, &w, p, p))
            .fold(0.0, f64::max);
        let rs = dense_majorant_norm(&self.r, &w, self.s_star, s);
        Ok(mb + rs)
    }

    /// Weighted Lipschitz norm over parameter samples `(ω, A(ω))`.
    pub fn lip_norm(samples: &[(Vec<f64>, BonyCouple)], s: f64, gamma: f64) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        let mut sup: f64 = 0.0;
        for (_, a) in samples {
            sup = sup.max(a.norm(s)?);
        }
        let mut lip: f64 = 0.0;
        for i in 0..samples.len() {
            for k in i + 1..samples.len() {
                let d: f64 = samples[i]
                    .0
                    .iter()
                    .zip(&samples[k].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d == 0.0 {
                    return Err(Error::InvalidParameter("repeated parameter sample".into()));
                }
                let diff = samples[i].1.sub(&samples[k].1)?;
                lip = lip.max(diff.norm((s - 1.0).max(diff.s_star))? / d);
            }
        }
        Ok(sup + gamma * lip)
    }

    /// `(Id + Q)⁻¹` by the Neumann series in the couple algebra.
    pub fn invert(&self) -> Result<InverseCouple> {
        let id = BonyCouple::identity(self.bx, self.s1);
        let q = self.sub(&id)?;
        let qn = q.norm(self.s_star)?;
        if qn >= 0.5 {
            return Err(Error::Smallness(format!("couple inverse needs ‖Q‖_(s*) < 1/2, got {qn}")));
        }
        let mut sum = id.clone();
        let mut term = id;
        let mut k = 0;
        while k < 200 {
            term = term.product(&q)?.scale(C64::new(-1.0, 0.0));
            sum = sum.add(&term)?;
            k += 1;
            if term.max_abs() <= 1e-17 * sum.max_abs() {
                break;
            }
        }
        Ok(InverseCouple {
            inverse: sum,
            terms: k,
            bound: 1.0 / (1.0 - qn),
        })
    }

    /// `exp(Q) = Σ Q^k / k!`.
    pub fn exp(&self) -> Result<Self> {
        let mut sum = BonyCouple::identity(self.bx, self.s1);
        let mut term = sum.clone();
        for k in 1..=60 {
            term = term.product(self)?.scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term)?;
            if term.max_abs() <= 1e-18 * sum.max_abs() {
                break;
            }
        }
        Ok(sum)
    }
}

#[derive(Clone, Debug)]
pub struct InverseCouple {
    pub inverse: BonyCouple,
    pub terms: usize,
    /// `1/(1 − ⦀Q⦀_{s*})`.
    pub bound: f64,
}

/// Couple representing `⟨D⟩^{−n1} Op(a) ⟨D⟩^{−n2}`.
pub fn couple_from_pseudo(a: &Symbol, n1: f64, n2: f64, s1: f64) -> Result<BonyCouple> {
    if (n1 + n2 - a.order_m).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weights {n1} + {n2} do not match the order {}",
            a.order_m
        )));
    }
    use crate::toeplitz::Side;
    let op = a.quantize().jap_d_pow(-n1, Side::Left).jap_d_pow(-n2, Side::Right);
    Ok(bony_split(&op, s1))
}

/// Four couples indexed by `σ, σ'`.
#[derive(Clone, Debug)]
pub struct BonyCouple2x2 {
    pub blocks: [[BonyCouple; 2]; 2],
}

impl BonyCouple2x2 {
    pub fn from_block(a: &BlockOperator2x2, s1: f64) -> Self {
        let b = |s: usize, t: usize| bony_split(a.block(s, t), s1);
        BonyCouple2x2 {
            blocks: [[b(0, 0), b(0, 1)], [b(1, 0), b(1, 1)]],
        }
    }

    /// `max_σ Σ_σ' ⦀A_σ^σ'⦀_s`.
    pub fn norm(&self, s: f64) -> Result<f64> {
        let mut m: f64 = 0.0;
        for row in &self.blocks {
            m = m.max(row[0].norm(s)? + row[1].norm(s)?);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::TorusFunction;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 2, 4).unwrap()
    }

    #[test]
    fn diagonal_split() {
        let b = bx();
        let c = bony_split(&ToeplitzOperator::identity(b), 6.0);
        let z = b.l_range().zero() * b.n_j() + b.k_x;
        assert_eq!(c.r[(z, z)], C64::new(1.0, 0.0));
        assert_eq!(c.m[(z, z)], ZERO);
        assert_eq!(c.m[(z + 1, z + 1)], C64::new(1.0, 0.0));
        let total = dense_sub(&c.operator(), &dense_from_toeplitz(&ToeplitzOperator::identity(b)));
        assert_eq!(dense_max_abs(&total), 0.0);
    }

    #[test]
    fn identity_norm_is_one() {
        let b = bx();
        let id = BonyCouple::identity(b, b.s_star() + 2.0);
        assert!((id.norm(b.s_star() + 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_is_homomorphism() {
        let b = bx();
        let u = TorusFunction::trig(b, 0.3, &[1], true, 1, true).unwrap();
        let v = TorusFunction::trig(b, 0.2, &[0], true, 2, false).unwrap();
        let a = bony_split(&ToeplitzOperator::multiplication(&u), 6.0);
        let c = bony_split(&ToeplitzOperator::multiplication(&v).d_x(), 6.0);
        let p = a.product(&c).unwrap().operator();
        let direct = dense_mul(&a.operator(), &c.operator());
        assert!(dense_max_abs(&dense_sub(&p, &direct)) < 1e-14);
    }

    #[test]
    fn small_inverse() {
        let b = bx();
        let u = TorusFunction::trig(b, 1e-3, &[0], true, 1, true).unwrap();
        let q = bony_split(&ToeplitzOperator::multiplication(&u), 6.0);
        let a = BonyCouple::identity(b, 6.0).add(&q).unwrap();
        let inv = a.invert().unwrap();
        let r = dense_sub(
            &dense_mul(&inv.inverse.operator(), &a.operator()),
            &BonyCouple::identity(b, 6.0).operator(),
        );
        assert!(dense_max_abs(&r) < 1e-15);
    }
}
