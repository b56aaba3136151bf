use num_complex::Complex64 as C64;
use serde::Serialize;

use super::operator::{power_iteration, sobolev_weights, NormEstimate, NormMode, Side, ToeplitzOperator};
use crate::error::Result;
use crate::fourier::{LatticeBox, TorusFunction};

/// Index of a sign `σ ∈ {+, −}` in the block arrays.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;

pub fn sigma_sign(s: usize) -> f64 {
    if s == PLUS {
        1.0
    } else {
        -1.0
    }
}

/// 2×2 matrix of Töplitz operators `T_σ^{σ'}`, indexed `[σ][σ']`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator2x2 {
    pub blocks: [[ToeplitzOperator; 2]; 2],
}

/// Maximal violation of each structural identity and the resulting flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub real_to_real: bool,
    pub reversible: bool,
    pub reversibility_preserving: bool,
    pub parity_preserving: bool,
    pub real_to_real_violation: f64,
    pub reversible_violation: f64,
    pub reversibility_preserving_violation: f64,
    pub parity_violation: f64,
    pub tol: f64,
}

impl StructureReport {
    /// Largest violation among real-to-real, reversibility preserving and
    /// parity preserving, the identities a symbol-side operator satisfies.
    pub fn max_violation(&self) -> f64 {
        self.real_to_real_violation
            .max(self.reversibility_preserving_violation)
            .max(self.parity_violation)
    }
}

impl BlockOperator2x2 {
    pub fn from_blocks(pp: ToeplitzOperator, pm: ToeplitzOperator, mp: ToeplitzOperator, mm: ToeplitzOperator) -> Self {
        BlockOperator2x2 {
            blocks: [[pp, pm], [mp, mm]],
        }
    }

    pub fn zeros(bx: LatticeBox) -> Self {
        let z = ToeplitzOperator::zeros(bx);
        Self::from_blocks(z.clone(), z.clone(), z.clone(), z)
    }

    pub fn diag(a: ToeplitzOperator, b: ToeplitzOperator) -> Self {
        let bx = a.lattice();
        Self::from_blocks(a, ToeplitzOperator::zeros(bx), ToeplitzOperator::zeros(bx), b)
    }

    pub fn identity(bx: LatticeBox) -> Self {
        Self::diag(ToeplitzOperator::identity(bx), ToeplitzOperator::identity(bx))
    }

    /// `diag(A, conj A)`.
    pub fn diag_conj(a: ToeplitzOperator) -> Self {
        let c = a.conj_op();
        Self::diag(a, c)
    }

    pub fn lattice(&self) -> LatticeBox {
        self.blocks[0][0].lattice()
    }

    pub fn block(&self, s: usize, t: usize) -> &ToeplitzOperator {
        &self.blocks[s][t]
    }

    pub fn map(&self, f: impl Fn(&ToeplitzOperator) -> ToeplitzOperator) -> Self {
        BlockOperator2x2 {
            blocks: [
                [f(&self.blocks[0][0]), f(&self.blocks[0][1])],
                [f(&self.blocks[1][0]), f(&self.blocks[1][1])],
            ],
        }
    }

    /// `f(σ, σ', T_σ^{σ'})` blockwise.
    pub fn map_indexed(&self, f: impl Fn(usize, usize, &ToeplitzOperator) -> ToeplitzOperator) -> Self {
        BlockOperator2x2 {
            blocks: [
                [f(0, 0, &self.blocks[0][0]), f(0, 1, &self.blocks[0][1])],
                [f(1, 0, &self.blocks[1][0]), f(1, 1, &self.blocks[1][1])],
            ],
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&ToeplitzOperator, &ToeplitzOperator) -> Result<ToeplitzOperator>) -> Result<Self> {
        Ok(BlockOperator2x2 {
            blocks: [
                [f(&self.blocks[0][0], &other.blocks[0][0])?, f(&self.blocks[0][1], &other.blocks[0][1])?],
                [f(&self.blocks[1][0], &other.blocks[1][0])?, f(&self.blocks[1][1], &other.blocks[1][1])?],
            ],
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|a| a.scale(c))
    }

    /// Left multiplication by `E = diag(1, −1)`.
    pub fn left_e(&self) -> Self {
        self.map_indexed(|s, _, a| if s == PLUS { a.clone() } else { a.scale(C64::new(-1.0, 0.0)) })
    }

    /// `−iE·T` (generator from a symbol-side operator).
    pub fn generator(&self) -> Self {
        self.left_e().scale(C64::new(0.0, -1.0))
    }

    /// `iE·X` (inverse of [`generator`](Self::generator)).
    pub fn ungenerator(&self) -> Self {
        self.left_e().scale(C64::new(0.0, 1.0))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.compose_pruned(other, 0.0)
    }

    pub fn compose_pruned(&self, other: &Self, tol: f64) -> Result<Self> {
        let mut out: Vec<ToeplitzOperator> = Vec::with_capacity(4);
        for s in 0..2 {
            for t in 0..2 {
                let a = self.blocks[s][0].compose_pruned(&other.blocks[0][t], tol)?;
                let b = self.blocks[s][1].compose_pruned(&other.blocks[1][t], tol)?;
                out.push(a.add(&b)?);
            }
        }
        let mm = out.pop().unwrap();
        let mp = out.pop().unwrap();
        let pm = out.pop().unwrap();
        let pp = out.pop().unwrap();
        Ok(Self::from_blocks(pp, pm, mp, mm))
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self, tol: f64) -> Result<Self> {
        self.compose_pruned(other, tol)?.sub(&other.compose_pruned(self, tol)?)
    }

    pub fn apply(&self, u: &(TorusFunction, TorusFunction)) -> Result<(TorusFunction, TorusFunction)> {
        let a = self.blocks[0][0].apply(&u.0)?.add(&self.blocks[0][1].apply(&u.1)?)?;
        let b = self.blocks[1][0].apply(&u.0)?.add(&self.blocks[1][1].apply(&u.1)?)?;
        Ok((a, b))
    }

    /// Raw apply on the stacked vector `(u₊, u₋)`.
    pub fn apply_raw(&self, v: &[C64], adjoint: bool) -> Vec<C64> {
        let n = v.len() / 2;
        let (vp, vm) = v.split_at(n);
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        for s in 0..2 {
            for t in 0..2 {
                // adjoint of a block matrix swaps the block indices
                let (blk, src, dst) = if adjoint {
                    (&self.blocks[t][s], if t == 0 { vp } else { vm }, s)
                } else {
                    (&self.blocks[s][t], if t == 0 { vp } else { vm }, s)
                };
                let y = blk.apply_raw(src, adjoint);
                for (o, y) in out[dst * n..(dst + 1) * n].iter_mut().zip(y) {
                    *o += y;
                }
            }
        }
        out
    }

    /// Dense `2N×2N` matrix, `σ` slowest.
    pub fn flatten(&self) -> (usize, Vec<C64>) {
        let n = self.lattice().len();
        let dim = 2 * n;
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for s in 0..2 {
            for t in 0..2 {
                let b = self.blocks[s][t].flatten();
                for r in 0..n {
                    let dst = (s * n + r) * dim + t * n;
                    m[dst..dst + n].copy_from_slice(&b[r * n..(r + 1) * n]);
                }
            }
        }
        (dim, m)
    }

    pub fn omega_dphi(&self, omega: &[f64]) -> Self {
        self.map(|a| a.omega_dphi(omega))
    }

    pub fn prune(&self, tol: f64) -> Self {
        self.map(|a| a.prune(tol))
    }

    pub fn pi_n(&self, n: usize) -> Self {
        self.map(|a| a.pi_n(n))
    }

    pub fn pi_n_perp(&self, n: usize) -> Self {
        self.map(|a| a.pi_n_perp(n))
    }

    pub fn jap_d_pow(&self, p: f64, side: Side) -> Self {
        self.map(|a| a.jap_d_pow(p, side))
    }

    pub fn jap_dphi_pow(&self, b: f64) -> Self {
        self.map(|a| a.jap_dphi_pow(b))
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flatten().map(|b| b.max_abs()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|b| b.frobenius().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn budget(&self) -> f64 {
        self.blocks.iter().flatten().map(|b| b.budget).sum()
    }

    pub fn max_diff_interior(&self, other: &Self, l_max: usize, j_max: usize) -> f64 {
        let mut m: f64 = 0.0;
        for s in 0..2 {
            for t in 0..2 {
                m = m.max(self.blocks[s][t].max_diff_interior(&other.blocks[s][t], l_max, j_max));
            }
        }
        m
    }

    pub fn decay_norm(&self, s: f64) -> f64 {
        self.blocks.iter().flatten().map(|b| b.decay_norm(s)).fold(0.0, f64::max)
    }

    /// Weighted operator norm of the block operator on the function box.
    pub fn op_norm(&self, s: f64, s_prime: f64) -> NormEstimate {
        let bx = self.lattice();
        let mut w_out = sobolev_weights(&bx, s);
        w_out.extend(w_out.clone());
        let mut w_in = sobolev_weights(&bx, s_prime);
        w_in.extend(w_in.clone());
        power_iteration(
            2 * bx.len(),
            |v| {
                let x: Vec<C64> = v.iter().zip(&w_in).map(|(a, w)| a / w).collect();
                self.apply_raw(&x, false).iter().zip(&w_out).map(|(a, w)| a * w).collect()
            },
            |v| {
                let x: Vec<C64> = v.iter().zip(&w_out).map(|(a, w)| a * w).collect();
                self.apply_raw(&x, true).iter().zip(&w_in).map(|(a, w)| a / w).collect()
            },
        )
    }

    pub fn majorant_norm(&self, s: f64, s_prime: f64) -> NormEstimate {
        self.map(|a| a.majorant()).op_norm(s, s_prime)
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

    /// Image under the real-to-real involution: `conj(A_{−σ,−j}^{−σ',−k}(−ℓ))`.
    pub fn real_to_real_image(&self) -> Self {
        self.map_indexed(|s, t, _| self.blocks[1 - s][1 - t].conj_op())
    }

    /// `A_{−σ,j}^{−σ',k}(−ℓ)`.
    pub fn swap_reflect_image(&self) -> Self {
        self.map_indexed(|s, t, _| self.blocks[1 - s][1 - t].reflect_l())
    }

    /// `A_{σ,−j}^{σ',−k}(ℓ)`.
    pub fn parity_image(&self) -> Self {
        self.map(|a| a.reflect_x())
    }

    fn max_diff_all(&self, other: &Self, sign: f64) -> f64 {
        let mut m: f64 = 0.0;
        for s in 0..2 {
            for t in 0..2 {
                let a = &self.blocks[s][t];
                let b = &other.blocks[s][t];
                let d = if sign > 0.0 {
                    a.sub(b).expect("same box")
                } else {
                    a.add(b).expect("same box")
                };
                m = m.max(d.max_abs());
            }
        }
        m
    }

    pub fn structure_violations(&self) -> [f64; 4] {
        let rr = self.max_diff_all(&self.real_to_real_image(), 1.0);
        let sw = self.swap_reflect_image();
        let rev = self.max_diff_all(&sw, -1.0);
        let rp = self.max_diff_all(&sw, 1.0);
        let par = self.max_diff_all(&self.parity_image(), 1.0);
        [rr, rev, rp, par]
    }

    pub fn structure_check(&self) -> StructureReport {
        let tol = 1e-12 * (1.0 + self.max_abs());
        self.structure_check_tol(tol)
    }

    pub fn structure_check_tol(&self, tol: f64) -> StructureReport {
        let [rr, rev, rp, par] = self.structure_violations();
        StructureReport {
            real_to_real: rr <= tol,
            reversible: rev <= tol,
            reversibility_preserving: rp <= tol,
            parity_preserving: par <= tol,
            real_to_real_violation: rr,
            reversible_violation: rev,
            reversibility_preserving_violation: rp,
            parity_violation: par,
            tol,
        }
    }

    /// Project onto the operators fixed by the real-to-real and parity
    /// involutions, and either reversible (`reversible = true`) or
    /// reversibility preserving.
    pub fn symmetrize(&self, reversible: bool) -> Result<Self> {
        let half = C64::new(0.5, 0.0);
        let a = self.add(&self.real_to_real_image())?.scale(half);
        let sw = a.swap_reflect_image();
        let b = if reversible { a.sub(&sw)? } else { a.add(&sw)? }.scale(half);
        b.add(&b.parity_image()).map(|c| c.scale(half))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::TorusFunction;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 2, 3).unwrap()
    }

    fn dm() -> ToeplitzOperator {
        ToeplitzOperator::multiplier(bx(), |j| C64::new(((j * j + 1) as f64).sqrt(), 0.0))
    }

    #[test]
    fn ie_dm_is_reversible() {
        let t = BlockOperator2x2::diag(dm(), dm()).left_e().scale(C64::new(0.0, 1.0));
        let r = t.structure_check();
        assert!(r.real_to_real && r.reversible && r.parity_preserving);
        assert!(!r.reversibility_preserving);
    }

    #[test]
    fn even_multiplication_preserves_reversibility() {
        let a = TorusFunction::trig(bx(), 0.2, &[1], true, 1, true).unwrap();
        let m = ToeplitzOperator::multiplication(&a);
        let t = BlockOperator2x2::diag(m.clone(), m);
        let r = t.structure_check();
        assert!(r.reversibility_preserving && r.parity_preserving && r.real_to_real);
    }

    #[test]
    fn product_rule_for_structures() {
        let a = TorusFunction::trig(bx(), 0.2, &[1], true, 1, true).unwrap();
        let m = ToeplitzOperator::multiplication(&a);
        let rp = BlockOperator2x2::diag(m.clone(), m);
        let rev = BlockOperator2x2::diag(dm(), dm()).left_e().scale(C64::new(0.0, 1.0));
        let p = rp.compose(&rev).unwrap();
        let r = p.structure_check();
        assert!(r.reversible && r.parity_preserving && r.real_to_real);
    }

    #[test]
    fn symmetrize_is_idempotent_on_structured() {
        let t = BlockOperator2x2::diag(dm(), dm());
        let s = t.symmetrize(false).unwrap();
        assert!(s.max_diff_interior(&t, 100, 100) < 1e-15);
    }
}
