use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{jap, LatticeBox, MultiRange, TorusFunction};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Operator whose matrix depends on time frequencies only through `ℓ − ℓ'`:
/// `(Au)_{ℓ,j} = Σ A_j^k(ℓ − ℓ') u_{ℓ',k}`.
///
/// Each `ℓ` in the band `[-2K_phi, 2K_phi]^nu` owns an optional dense
/// `(2K_x+1)²` slice, row-major with entry `(j,k)` at `(j+K_x)·n + (k+K_x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzOperator {
    bx: LatticeBox,
    band: MultiRange,
    n: usize,
    slices: Vec<Option<Vec<C64>>>,
    /// Frobenius mass of entries dropped because they left the band.
    pub budget: f64,
}

impl ToeplitzOperator {
    pub fn zeros(bx: LatticeBox) -> Self {
        let band = bx.band_range();
        let len = band.len();
        ToeplitzOperator {
            bx,
            band,
            n: bx.n_j(),
            slices: vec![None; len],
            budget: 0.0,
        }
    }

    /// Fourier multiplier `j ↦ f(j)` (diagonal, `ℓ = 0`).
    pub fn multiplier(bx: LatticeBox, f: impl Fn(i64) -> C64) -> Self {
        let mut a = Self::zeros(bx);
        let z = a.band.zero();
        let n = a.n;
        let s = a.slice_mut(z);
        for jj in 0..n {
            s[jj * n + jj] = f(bx.j_value(jj));
        }
        a
    }

    pub fn identity(bx: LatticeBox) -> Self {
        Self::multiplier(bx, |_| C64::new(1.0, 0.0))
    }

    /// Multiplication by `u(φ,x)`: `A_j^k(ℓ) = u_{ℓ, j−k}`.
    pub fn multiplication(u: &TorusFunction) -> Self {
        let bx = u.lattice();
        let mut a = Self::zeros(bx);
        let lr = bx.l_range();
        let n = a.n;
        let kx = bx.k_x as i64;
        for li in 0..lr.len() {
            let l = lr.vector(li);
            let row = &u.coeffs()[li * n..(li + 1) * n];
            if row.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            let bi = a.band.index(&l).unwrap();
            let s = a.slice_mut(bi);
            for jj in 0..n {
                for kk in 0..n {
                    let d = jj as i64 - kk as i64;
                    if d.abs() <= kx {
                        s[jj * n + kk] = row[(d + kx) as usize];
                    }
                }
            }
        }
        a
    }

    pub fn lattice(&self) -> LatticeBox {
        self.bx
    }

    pub fn band(&self) -> &MultiRange {
        &self.band
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn slice(&self, bi: usize) -> Option<&[C64]> {
        self.slices[bi].as_deref()
    }

    pub fn slice_mut(&mut self, bi: usize) -> &mut Vec<C64> {
        let n = self.n;
        self.slices[bi].get_or_insert_with(|| vec![ZERO; n * n])
    }

    pub fn set_slice(&mut self, bi: usize, s: Option<Vec<C64>>) {
        debug_assert!(s.as_ref().map_or(true, |v| v.len() == self.n * self.n));
        self.slices[bi] = s;
    }

    /// Band indices that carry a slice.
    pub fn support(&self) -> Vec<usize> {
        (0..self.slices.len()).filter(|&i| self.slices[i].is_some()).collect()
    }

    pub fn entry(&self, l: &[i64], j: i64, k: i64) -> C64 {
        let (Some(bi), Some(jj), Some(kk)) = (self.band.index(l), self.bx.j_index(j), self.bx.j_index(k))
        else {
            return ZERO;
        };
        self.slices[bi].as_ref().map_or(ZERO, |s| s[jj * self.n + kk])
    }

    pub fn set_entry(&mut self, l: &[i64], j: i64, k: i64, c: C64) -> Result<()> {
        let (Some(bi), Some(jj), Some(kk)) = (self.band.index(l), self.bx.j_index(j), self.bx.j_index(k))
        else {
            return Err(Error::InvalidParameter(format!("entry ({l:?},{j},{k}) outside band")));
        };
        let n = self.n;
        self.slice_mut(bi)[jj * n + kk] = c;
        Ok(())
    }

    fn check(&self, other: &Self) -> Result<()> {
        self.bx.check_same(&other.bx)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zeros(self.bx);
        for bi in 0..self.slices.len() {
            out.slices[bi] = match (&self.slices[bi], &other.slices[bi]) {
                (None, None) => None,
                (Some(a), None) => Some(a.iter().map(|&x| f(x, ZERO)).collect()),
                (None, Some(b)) => Some(b.iter().map(|&y| f(ZERO, y)).collect()),
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()),
            };
        }
        out.budget = self.budget + other.budget;
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for s in out.slices.iter_mut().flatten() {
            for x in s.iter_mut() {
                *x *= c;
            }
        }
        out.budget *= c.norm();
        out
    }

    /// Entrywise reweighting `A_j^k(ℓ) ↦ w(ℓ, j, k) A_j^k(ℓ)`.
    pub fn reweight(&self, w: impl Fn(&[i64], i64, i64) -> C64) -> Self {
        let mut out = self.clone();
        let n = self.n;
        for bi in 0..self.slices.len() {
            if let Some(s) = out.slices[bi].as_mut() {
                let l = self.band.vector(bi);
                for jj in 0..n {
                    for kk in 0..n {
                        s[jj * n + kk] *= w(&l, self.bx.j_value(jj), self.bx.j_value(kk));
                    }
                }
            }
        }
        out
    }

    /// Keep only slices whose `ℓ` passes the predicate.
    pub fn filter_l(&self, keep: impl Fn(&[i64]) -> bool) -> Self {
        let mut out = self.clone();
        for bi in 0..self.slices.len() {
            if out.slices[bi].is_some() && !keep(&self.band.vector(bi)) {
                out.slices[bi] = None;
            }
        }
        out
    }

    /// Drop slices whose largest entry is at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let mut out = self.clone();
        for s in out.slices.iter_mut() {
            if let Some(v) = s {
                if v.iter().all(|c| c.norm() <= tol) {
                    *s = None;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.slices
            .iter()
            .flatten()
            .flat_map(|s| s.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.slices
            .iter()
            .flatten()
            .flat_map(|s| s.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Operator composition; products leaving the band are dropped into the budget.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.compose_pruned(other, 0.0)
    }

    /// As [`compose`](Self::compose), skipping input slices with entries all `<= tol`.
    pub fn compose_pruned(&self, other: &Self, tol: f64) -> Result<Self> {
        self.check(other)?;
        let n = self.n;
        let band = &self.band;
        let vecs: Vec<Vec<i64>> = (0..band.len()).map(|i| band.vector(i)).collect();
        let live = |op: &Self| -> Vec<usize> {
            (0..op.slices.len())
                .filter(|&i| {
                    op.slices[i]
                        .as_ref()
                        .is_some_and(|s| s.iter().any(|c| c.norm() > tol))
                })
                .collect()
        };
        let la = live(self);
        let lb = live(other);
        let mut by_target: Vec<Vec<(usize, usize)>> = vec![Vec::new(); band.len()];
        let mut overflow: Vec<(usize, usize)> = Vec::new();
        for &a in &la {
            for &b in &lb {
                let sum: Vec<i64> = vecs[a].iter().zip(&vecs[b]).map(|(x, y)| x + y).collect();
                match band.index(&sum) {
                    Some(t) => by_target[t].push((a, b)),
                    None => overflow.push((a, b)),
                }
            }
        }
        let slices: Vec<Option<Vec<C64>>> = by_target
            .par_iter()
            .map(|pairs| {
                if pairs.is_empty() {
                    return None;
                }
                let mut acc = vec![ZERO; n * n];
                for &(a, b) in pairs {
                    matmul_acc(
                        &mut acc,
                        self.slices[a].as_ref().unwrap(),
                        other.slices[b].as_ref().unwrap(),
                        n,
                    );
                }
                Some(acc)
            })
            .collect();
        let mut dropped = 0.0;
        for &(a, b) in &overflow {
            let mut acc = vec![ZERO; n * n];
            matmul_acc(&mut acc, self.slices[a].as_ref().unwrap(), other.slices[b].as_ref().unwrap(), n);
            dropped += acc.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        Ok(ToeplitzOperator {
            bx: self.bx,
            band: self.band.clone(),
            n,
            slices,
            budget: dropped.sqrt() + self.budget * other.frobenius() + other.budget * self.frobenius(),
        })
    }

    /// `(Au)_{ℓ,j} = Σ A_j^k(ℓ−ℓ') u_{ℓ',k}` for `(ℓ, j)` in the function box.
    pub fn apply(&self, u: &TorusFunction) -> Result<TorusFunction> {
        self.bx.check_same(&u.lattice())?;
        let out = self.apply_raw(u.coeffs(), false);
        TorusFunction::from_coeffs(self.bx, out)
    }

    /// Raw apply on a coefficient vector laid out like [`TorusFunction`];
    /// `adjoint = true` applies the conjugate transpose of the truncation.
    pub fn apply_raw(&self, u: &[C64], adjoint: bool) -> Vec<C64> {
        let lr = self.bx.l_range();
        let n = self.n;
        let nl = lr.len();
        let mut out = vec![ZERO; nl * n];
        let lvecs: Vec<Vec<i64>> = (0..nl).map(|i| lr.vector(i)).collect();
        for (lo, lv_out) in lvecs.iter().enumerate() {
            for (li, lv_in) in lvecs.iter().enumerate() {
                let diff: Vec<i64> = if adjoint {
                    lv_in.iter().zip(lv_out).map(|(a, b)| a - b).collect()
                } else {
                    lv_out.iter().zip(lv_in).map(|(a, b)| a - b).collect()
                };
                let Some(bi) = self.band.index(&diff) else { continue };
                let Some(s) = self.slices[bi].as_ref() else { continue };
                let src = &u[li * n..(li + 1) * n];
                let dst = &mut out[lo * n..(lo + 1) * n];
                if adjoint {
                    // (A* u)(ℓ_out, k) = Σ conj(A_j^k(ℓ_in − ℓ_out)) u(ℓ_in, j)
                    for j in 0..n {
                        let uj = src[j];
                        if uj.re == 0.0 && uj.im == 0.0 {
                            continue;
                        }
                        let row = &s[j * n..(j + 1) * n];
                        for k in 0..n {
                            dst[k] += row[k].conj() * uj;
                        }
                    }
                } else {
                    for j in 0..n {
                        let row = &s[j * n..(j + 1) * n];
                        let mut acc = ZERO;
                        for k in 0..n {
                            acc += row[k] * src[k];
                        }
                        dst[j] += acc;
                    }
                }
            }
        }
        out
    }

    /// Dense matrix on the function box, `M[(ℓ,j),(ℓ',k)] = A_j^k(ℓ−ℓ')`, row-major.
    pub fn flatten(&self) -> Vec<C64> {
        let lr = self.bx.l_range();
        let n = self.n;
        let dim = lr.len() * n;
        let mut m = vec![ZERO; dim * dim];
        for lo in 0..lr.len() {
            let vo = lr.vector(lo);
            for li in 0..lr.len() {
                let vi = lr.vector(li);
                let diff: Vec<i64> = vo.iter().zip(&vi).map(|(a, b)| a - b).collect();
                let Some(bi) = self.band.index(&diff) else { continue };
                let Some(s) = self.slices[bi].as_ref() else { continue };
                for j in 0..n {
                    for k in 0..n {
                        m[(lo * n + j) * dim + li * n + k] = s[j * n + k];
                    }
                }
            }
        }
        m
    }

    /// `(ω·∂_φ A)_j^k(ℓ) = i ω·ℓ A_j^k(ℓ)`.
    pub fn omega_dphi(&self, omega: &[f64]) -> Self {
        self.reweight(|l, _, _| {
            C64::new(0.0, l.iter().zip(omega).map(|(&a, &b)| a as f64 * b).sum())
        })
    }

    pub fn d_x(&self) -> Self {
        self.reweight(|_, j, k| C64::new(0.0, (j - k) as f64))
    }

    pub fn d_phi(&self, h: usize) -> Self {
        self.reweight(|l, _, _| C64::new(0.0, l[h] as f64))
    }

    /// `⟨d_φ⟩^b A`: entries scaled by `max{1, |ℓ|}^b`.
    pub fn jap_dphi_pow(&self, b: f64) -> Self {
        self.reweight(|l, _, _| {
            let a: i64 = l.iter().map(|c| c.abs()).sum();
            C64::new((a.max(1) as f64).powf(b), 0.0)
        })
    }

    /// `Π_N`: keep `|ℓ| <= N`.
    pub fn pi_n(&self, n: usize) -> Self {
        self.filter_l(|l| l.iter().map(|c| c.abs()).sum::<i64>() <= n as i64)
    }

    /// `Π_N^⊥ = Id − Π_N`.
    pub fn pi_n_perp(&self, n: usize) -> Self {
        self.filter_l(|l| l.iter().map(|c| c.abs()).sum::<i64>() > n as i64)
    }

    /// `⟨D⟩^p A` (left) or `A ⟨D⟩^p` (right).
    pub fn jap_d_pow(&self, p: f64, side: Side) -> Self {
        self.reweight(|_, j, k| {
            let m = match side {
                Side::Left => j,
                Side::Right => k,
            };
            C64::new((m.abs().max(1) as f64).powf(p), 0.0)
        })
    }

    /// Entrywise `conj(B_{−j}^{−k}(−ℓ))`.
    pub fn conj_op(&self) -> Self {
        let mut out = Self::zeros(self.bx);
        let n = self.n;
        for bi in 0..self.slices.len() {
            if let Some(s) = self.slices[self.band.neg(bi)].as_ref() {
                let mut t = vec![ZERO; n * n];
                for j in 0..n {
                    for k in 0..n {
                        t[j * n + k] = s[(n - 1 - j) * n + (n - 1 - k)].conj();
                    }
                }
                out.slices[bi] = Some(t);
            }
        }
        out.budget = self.budget;
        out
    }

    /// Entrywise `B_{−j}^{−k}(ℓ)` (space reflection).
    pub fn reflect_x(&self) -> Self {
        let mut out = self.clone();
        let n = self.n;
        for s in out.slices.iter_mut().flatten() {
            let t: Vec<C64> = (0..n * n).map(|i| s[(n - 1 - i / n) * n + (n - 1 - i % n)]).collect();
            *s = t;
        }
        out
    }

    /// Entrywise `B_j^k(−ℓ)` (time reflection).
    pub fn reflect_l(&self) -> Self {
        let mut out = Self::zeros(self.bx);
        for bi in 0..self.slices.len() {
            out.slices[bi] = self.slices[self.band.neg(bi)].clone();
        }
        out.budget = self.budget;
        out
    }

    /// Largest entry difference over `|ℓ|_1 <= l_max`, `|j|,|k| <= j_max`.
    pub fn max_diff_interior(&self, other: &Self, l_max: usize, j_max: usize) -> f64 {
        let n = self.n;
        let kx = self.bx.k_x as i64;
        let mut m: f64 = 0.0;
        for bi in 0..self.slices.len() {
            if self.band.norm1(bi) > l_max as i64 {
                continue;
            }
            let a = self.slices[bi].as_deref();
            let b = other.slices[bi].as_deref();
            if a.is_none() && b.is_none() {
                continue;
            }
            for jj in 0..n {
                if (jj as i64 - kx).unsigned_abs() as usize > j_max {
                    continue;
                }
                for kk in 0..n {
                    if (kk as i64 - kx).unsigned_abs() as usize > j_max {
                        continue;
                    }
                    let x = a.map_or(ZERO, |s| s[jj * n + kk]);
                    let y = b.map_or(ZERO, |s| s[jj * n + kk]);
                    m = m.max((x - y).norm());
                }
            }
        }
        m
    }

    /// `( Σ_{p,h} ⟨p,h⟩^{2s} sup_{j−k=h} |A_j^k(p)|² )^{1/2}`.
    pub fn decay_norm(&self, s: f64) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for bi in 0..self.slices.len() {
            let Some(sl) = self.slices[bi].as_ref() else { continue };
            let p1 = self.band.norm1(bi);
            for h in -(n as i64 - 1)..=(n as i64 - 1) {
                let mut sup: f64 = 0.0;
                for jj in 0..n as i64 {
                    let kk = jj - h;
                    if kk < 0 || kk >= n as i64 {
                        continue;
                    }
                    sup = sup.max(sl[(jj * n as i64 + kk) as usize].norm());
                }
                if sup > 0.0 {
                    let w = jap(p1, h).powf(s);
                    acc += w * w * sup * sup;
                }
            }
        }
        acc.sqrt()
    }

    /// Entrywise absolute values.
    pub fn majorant(&self) -> Self {
        let mut out = self.clone();
        for s in out.slices.iter_mut().flatten() {
            for c in s.iter_mut() {
                *c = C64::new(c.norm(), 0.0);
            }
        }
        out
    }

    /// Estimate of `‖A‖_{s,s'} = sup ‖Au‖_s / ‖u‖_{s'}` on the function box.
    pub fn op_norm(&self, s: f64, s_prime: f64) -> NormEstimate {
        let bx = self.bx;
        let w_out = sobolev_weights(&bx, s);
        let w_in = sobolev_weights(&bx, s_prime);
        power_iteration(
            bx.len(),
            |v| {
                let x: Vec<C64> = v.iter().zip(&w_in).map(|(a, w)| a / w).collect();
                let y = self.apply_raw(&x, false);
                y.iter().zip(&w_out).map(|(a, w)| a * w).collect()
            },
            |v| {
                let x: Vec<C64> = v.iter().zip(&w_out).map(|(a, w)| a * w).collect();
                let y = self.apply_raw(&x, true);
                y.iter().zip(&w_in).map(|(a, w)| a / w).collect()
            },
        )
    }

    /// Majorant norm `|A|_{s,s'}`: operator norm of the entrywise modulus.
    pub fn majorant_norm(&self, s: f64, s_prime: f64) -> NormEstimate {
        self.majorant().op_norm(s, s_prime)
    }

    pub fn norm(&self, s: f64, s_prime: f64, mode: NormMode) -> NormEstimate {
        match mode {
            NormMode::Op => self.op_norm(s, s_prime),
            NormMode::Majorant => self.majorant_norm(s, s_prime),
            NormMode::Decay => NormEstimate {
                value: self.decay_norm(s),
                converged: true,
                iterations: 0,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    Op,
    Majorant,
    Decay,
}

/// Result of an iterative norm estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub(crate) fn sobolev_weights(bx: &LatticeBox, s: f64) -> Vec<f64> {
    let lr = bx.l_range();
    let n = bx.n_j();
    let mut w = Vec::with_capacity(bx.len());
    for li in 0..lr.len() {
        let l1 = lr.norm1(li);
        for jj in 0..n {
            w.push(jap(l1, bx.j_value(jj)).powf(s));
        }
    }
    w
}

pub const POWER_ITERS: usize = 50;
pub const POWER_RTOL: f64 = 1e-8;

/// Largest singular value of `B` via power iteration on `B*B`, from a
/// fixed pseudo-random start.
pub fn power_iteration(
    dim: usize,
    apply: impl Fn(&[C64]) -> Vec<C64>,
    adjoint: impl Fn(&[C64]) -> Vec<C64>,
) -> NormEstimate {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nrm = |x: &[C64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let n0 = nrm(&v);
    v.iter_mut().for_each(|c| *c /= n0);
    let mut sigma = 0.0;
    for it in 1..=POWER_ITERS {
        let bv = apply(&v);
        let next = nrm(&bv);
        if next == 0.0 {
            return NormEstimate { value: 0.0, converged: true, iterations: it };
        }
        let mut w = adjoint(&bv);
        let nw = nrm(&w);
        if nw == 0.0 {
            return NormEstimate { value: next, converged: true, iterations: it };
        }
        w.iter_mut().for_each(|c| *c /= nw);
        let conv = (next - sigma).abs() <= POWER_RTOL * next;
        sigma = next;
        v = w;
        if conv && it > 2 {
            return NormEstimate { value: sigma, converged: true, iterations: it };
        }
    }
    NormEstimate { value: sigma, converged: false, iterations: POWER_ITERS }
}

/// `acc += a · b` for row-major `n×n` complex matrices.
pub(crate) fn matmul_acc(acc: &mut [C64], a: &[C64], b: &[C64], n: usize) {
    for i in 0..n {
        let out = &mut acc[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            for j in 0..n {
                out[j] += aik * row[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 2, 3).unwrap()
    }

    #[test]
    fn identity_and_multiplier() {
        let u = TorusFunction::trig(bx(), 0.5, &[1], true, 2, false).unwrap();
        let id = ToeplitzOperator::identity(bx());
        assert_eq!(id.apply(&u).unwrap().coeffs(), u.coeffs());
        let dm = ToeplitzOperator::multiplier(bx(), |j| C64::new(((j * j + 1) as f64).sqrt(), 0.0));
        let v = dm.apply(&u).unwrap();
        let c = u.get(&[1], 2) * 5f64.sqrt();
        assert_abs_diff_eq!((v.get(&[1], 2) - c).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn multiplication_matches_product() {
        let a = TorusFunction::trig(bx(), 1.0, &[0], true, 1, true).unwrap();
        let u = TorusFunction::trig(bx(), 1.0, &[1], true, 1, false).unwrap();
        let lhs = ToeplitzOperator::multiplication(&a).apply(&u).unwrap();
        let rhs = a.multiply(&u).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn compose_matches_dense_product() {
        use rand::{Rng, SeedableRng};
        let bx = LatticeBox::new(1, 1, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut rand_op = || {
            let mut a = ToeplitzOperator::zeros(bx);
            // support |ℓ| <= 1 so that products stay in band and flatten exactly
            for l in -1..=1 {
                for j in -2..=2 {
                    for k in -2..=2 {
                        a.set_entry(&[l], j, k, C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                            .unwrap();
                    }
                }
            }
            a
        };
        let a = rand_op();
        let b = rand_op();
        let ab = a.compose(&b).unwrap();
        // on the infinite ℓ lattice: (AB)(ℓ) = Σ A(ℓ−ℓ'')B(ℓ'')
        for l in -2i64..=2 {
            for j in -2..=2 {
                for k in -2..=2 {
                    let mut s = C64::new(0.0, 0.0);
                    for l2 in -1..=1 {
                        for m in -2..=2 {
                            s += a.entry(&[l - l2], j, m) * b.entry(&[l2], m, k);
                        }
                    }
                    assert!((ab.entry(&[l], j, k) - s).norm() < 1e-14);
                }
            }
        }
        assert_eq!(ab.budget, 0.0);
    }

    #[test]
    fn identity_norms_are_one() {
        let id = ToeplitzOperator::identity(bx());
        assert_abs_diff_eq!(id.op_norm(2.0, 2.0).value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.majorant_norm(1.0, 1.0).value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decay_norm_of_multiplication() {
        let a = TorusFunction::trig(bx(), 0.3, &[1], true, 2, true).unwrap()
            .add(&TorusFunction::trig(bx(), 0.1, &[0], true, 1, false).unwrap())
            .unwrap();
        let op = ToeplitzOperator::multiplication(&a);
        assert_abs_diff_eq!(op.decay_norm(2.0), a.sobolev_norm(2.0), epsilon = 1e-14);
    }

    #[test]
    fn d_x_of_multiplication() {
        let a = TorusFunction::trig(bx(), 0.3, &[1], true, 2, true).unwrap();
        let lhs = ToeplitzOperator::multiplication(&a).d_x();
        let rhs = ToeplitzOperator::multiplication(&a.dx());
        assert!(lhs.max_diff_interior(&rhs, 10, 10) < 1e-15);
    }
}
