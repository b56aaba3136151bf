use num_complex::Complex64 as C64;

use super::block::BlockOperator2x2;
use super::operator::ToeplitzOperator;
use crate::error::{Error, Result};

/// Operations shared by scalar and 2×2 Töplitz operators.
pub trait TruncatedAlgebra: Sized + Clone {
    fn identity_like(&self) -> Self;
    fn zeros_like(&self) -> Self;
    fn plus(&self, o: &Self) -> Result<Self>;
    fn minus(&self, o: &Self) -> Result<Self>;
    fn times(&self, o: &Self) -> Result<Self>;
    fn scaled(&self, c: C64) -> Self;
    fn max_entry(&self) -> f64;
    /// `Σ_ℓ ‖A(ℓ)‖_F`, an upper bound for the ℓ² operator norm.
    fn slice_bound(&self) -> f64;
    fn dphi(&self, omega: &[f64]) -> Self;
}

impl TruncatedAlgebra for ToeplitzOperator {
    fn identity_like(&self) -> Self {
        ToeplitzOperator::identity(self.lattice())
    }
    fn zeros_like(&self) -> Self {
        ToeplitzOperator::zeros(self.lattice())
    }
    fn plus(&self, o: &Self) -> Result<Self> {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Result<Self> {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Result<Self> {
        self.compose(o)
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn max_entry(&self) -> f64 {
        self.max_abs()
    }
    fn slice_bound(&self) -> f64 {
        self.support()
            .into_iter()
            .map(|bi| self.slice(bi).unwrap().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }
    fn dphi(&self, omega: &[f64]) -> Self {
        self.omega_dphi(omega)
    }
}

impl TruncatedAlgebra for BlockOperator2x2 {
    fn identity_like(&self) -> Self {
        BlockOperator2x2::identity(self.lattice())
    }
    fn zeros_like(&self) -> Self {
        BlockOperator2x2::zeros(self.lattice())
    }
    fn plus(&self, o: &Self) -> Result<Self> {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Result<Self> {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Result<Self> {
        self.compose(o)
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn max_entry(&self) -> f64 {
        self.max_abs()
    }
    fn slice_bound(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..2 {
            let row: f64 = (0..2).map(|c| self.blocks[r][c].slice_bound()).sum();
            m = m.max(row);
        }
        m
    }
    fn dphi(&self, omega: &[f64]) -> Self {
        self.omega_dphi(omega)
    }
}

/// Result of an iterative inverse.
#[derive(Clone, Debug)]
pub struct InverseResult<T> {
    pub inverse: T,
    pub residual: f64,
    pub iterations: usize,
}

pub const INVERSE_TOL: f64 = 1e-15;

/// Newton–Schulz refinement `Y ← Y(2 − AY)` from the guess `y0`. Stops at
/// `tol` or when the residual stagnates at rounding level.
pub fn refine_inverse<T: TruncatedAlgebra>(a: &T, y0: T, tol: f64, max_iter: usize) -> Result<InverseResult<T>> {
    let id = a.identity_like();
    let mut y = y0;
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        let r = id.minus(&a.times(&y)?)?;
        let res = r.max_entry();
        let stalled = res >= 0.5 * last && res <= STALL_TOL;
        if res <= tol || stalled {
            return Ok(InverseResult { inverse: y, residual: res, iterations: it });
        }
        if res >= 1.0 || (res >= last && it > 0) {
            return Err(Error::NoConvergence { what: "truncated inverse".into(), iterations: it, residual: res });
        }
        last = res;
        y = y.plus(&y.times(&r)?)?;
    }
    Err(Error::NoConvergence { what: "truncated inverse".into(), iterations: max_iter, residual: last })
}

/// Residual level accepted once Newton–Schulz stops improving.
pub const STALL_TOL: f64 = 1e-12;

/// Inverse of `A` given a guess, polished to machine precision.
pub fn invert_with_guess<T: TruncatedAlgebra>(a: &T, guess: T) -> Result<InverseResult<T>> {
    refine_inverse(a, guess, INVERSE_TOL, 40)
}

/// `(Id + Q)⁻¹` by Neumann series, then refined.
pub fn invert_near_identity<T: TruncatedAlgebra>(a: &T) -> Result<InverseResult<T>> {
    let id = a.identity_like();
    let q = a.minus(&id)?;
    if q.slice_bound() >= 1.0 && q.max_entry() >= 0.5 {
        return Err(Error::Smallness(format!(
            "near-identity inverse needs a small defect, got max entry {}",
            q.max_entry()
        )));
    }
    let mut sum = id.clone();
    let mut term = id;
    for _ in 0..60 {
        term = term.times(&q)?.scaled(C64::new(-1.0, 0.0));
        sum = sum.plus(&term)?;
        if term.max_entry() <= 1e-17 * sum.max_entry() {
            break;
        }
    }
    invert_with_guess(a, sum)
}

/// `exp(τA)` by scaling and squaring with a Taylor core.
pub fn expm<T: TruncatedAlgebra>(a: &T, tau: f64) -> Result<T> {
    let scaled = a.scaled(C64::new(tau, 0.0));
    let nrm = scaled.slice_bound();
    let squarings = if nrm > 0.25 { (nrm / 0.25).log2().ceil() as i32 } else { 0 };
    let b = scaled.scaled(C64::new(0.5f64.powi(squarings), 0.0));
    let mut sum = b.identity_like();
    let mut term = sum.clone();
    for k in 1..=30 {
        term = term.times(&b)?.scaled(C64::new(1.0 / k as f64, 0.0));
        sum = sum.plus(&term)?;
        if term.max_entry() <= 1e-18 * sum.max_entry() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.times(&sum)?;
    }
    Ok(sum)
}

/// `Φ X Φ⁻¹ − (ω·∂_φ Φ) Φ⁻¹`: the generator after the change of variables `Φ`.
pub fn conjugate_generator<T: TruncatedAlgebra>(x: &T, phi: &T, phi_inv: &T, omega: &[f64]) -> Result<T> {
    let a = phi.times(x)?.times(phi_inv)?;
    let b = phi.dphi(omega).times(phi_inv)?;
    a.minus(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{LatticeBox, TorusFunction};

    #[test]
    fn exp_inverse_pair() {
        let bx = LatticeBox::new(1, 3, 5).unwrap();
        let u = TorusFunction::trig(bx, 0.05, &[1], true, 1, true).unwrap();
        let a = ToeplitzOperator::multiplication(&u).d_x();
        let e = expm(&a, 1.0).unwrap();
        let f = expm(&a, -1.0).unwrap();
        let r = e.compose(&f).unwrap().sub(&ToeplitzOperator::identity(bx)).unwrap();
        assert!(r.max_abs() < 1e-13, "{}", r.max_abs());
    }

    #[test]
    fn newton_schulz_recovers_truncated_inverse() {
        let bx = LatticeBox::new(1, 3, 5).unwrap();
        let u = TorusFunction::trig(bx, 0.1, &[1], true, 2, true).unwrap();
        let a = ToeplitzOperator::identity(bx).add(&ToeplitzOperator::multiplication(&u)).unwrap();
        let inv = invert_near_identity(&a).unwrap();
        assert!(inv.residual < 1e-14);
        let r = inv.inverse.compose(&a).unwrap().sub(&ToeplitzOperator::identity(bx)).unwrap();
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn conjugating_by_identity_is_noop() {
        let bx = LatticeBox::new(1, 2, 3).unwrap();
        let u = TorusFunction::trig(bx, 0.3, &[1], true, 1, true).unwrap();
        let m = ToeplitzOperator::multiplication(&u);
        let x = BlockOperator2x2::diag(m.clone(), m);
        let id = BlockOperator2x2::identity(bx);
        let y = conjugate_generator(&x, &id, &id, &[0.3]).unwrap();
        assert_eq!(y.sub(&x).unwrap().max_abs(), 0.0);
    }
}
