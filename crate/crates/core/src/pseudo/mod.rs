//! Symbols on the integer ξ lattice, their quantization and the `#` calculus.

mod symbol;

pub use symbol::{compose_sharp, dequantize, jap_xi, star_commutator, SharpMode, Symbol, TailModel, P_MAX};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::LatticeBox;
use crate::toeplitz::{expm, BlockOperator2x2, ToeplitzOperator};

/// Neumann series is refused above this symbol norm.
pub const NEUMANN_THRESHOLD: f64 = 0.5;
pub const TOL_NEUMANN: f64 = 1e-14;
/// `exp_symbol` is refused above this symbol norm.
pub const EXP_THRESHOLD: f64 = 1.0;

/// `(a b; c d)` acting on `(u, ū)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMatrix2x2 {
    pub entries: [[Symbol; 2]; 2],
}

impl SymbolMatrix2x2 {
    pub fn new(a: Symbol, b: Symbol, c: Symbol, d: Symbol) -> Self {
        SymbolMatrix2x2 { entries: [[a, b], [c, d]] }
    }

    /// Real-to-real matrix from its upper row.
    pub fn from_upper(a: Symbol, b: Symbol) -> Self {
        let c = b.conj_symbol();
        let d = a.conj_symbol();
        Self::new(a, b, c, d)
    }

    pub fn quantize(&self) -> BlockOperator2x2 {
        let [[a, b], [c, d]] = &self.entries;
        BlockOperator2x2::from_blocks(a.quantize(), b.quantize(), c.quantize(), d.quantize())
    }

    /// Row-by-column `#` product.
    pub fn compose(&self, other: &Self, mode: SharpMode) -> Result<Self> {
        let e = &self.entries;
        let f = &other.entries;
        let mut out: Vec<Symbol> = Vec::with_capacity(4);
        for i in 0..2 {
            for j in 0..2 {
                let p = compose_sharp(&e[i][0], &f[0][j], mode)?;
                out.push(p.add(&compose_sharp(&e[i][1], &f[1][j], mode)?)?);
            }
        }
        let mut it = out.into_iter();
        let mut next = || it.next().unwrap();
        Ok(Self::new(next(), next(), next(), next()))
    }
}

/// `exp(τ·Op(a))` for an order-0 symbol.
pub fn exp_symbol(a: &Symbol, tau: f64) -> Result<ToeplitzOperator> {
    let bx = a.lattice();
    let n = a.symbol_norm(bx.s0(), 0)?;
    if n * tau.abs() > EXP_THRESHOLD {
        return Err(Error::Smallness(format!(
            "exponential needs |τ|·‖a‖ ≤ {EXP_THRESHOLD}, got {}",
            n * tau.abs()
        )));
    }
    expm(&a.quantize(), tau)
}

/// Split of `(𝕀 − Op(a))⁻¹ − 𝕀 − Op(a)`.
#[derive(Clone, Debug)]
pub struct NeumannSplit {
    pub g_low: Symbol,
    pub g_high: Symbol,
    /// Terms used in the exact operator series.
    pub terms: usize,
}

pub fn neumann_inverse(a: &Symbol, rho: usize) -> Result<NeumannSplit> {
    if a.order_m > -1.0 {
        return Err(Error::InvalidParameter(format!("Neumann inverse needs order ≤ −1, got {}", a.order_m)));
    }
    if rho == 0 || rho > P_MAX + 1 {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside 1..={}", P_MAX + 1)));
    }
    let bx = a.lattice();
    let n = a.symbol_norm(bx.s0(), 0)?;
    if n > NEUMANN_THRESHOLD {
        return Err(Error::Smallness(format!("Neumann series needs ‖a‖ ≤ {NEUMANN_THRESHOLD}, got {n}")));
    }
    let mut g_low = Symbol::zeros(bx, a.k_xi(), 2.0 * a.order_m);
    let mut p = a.clone();
    for _ in 2..rho {
        p = compose_sharp(&p, a, SharpMode::Below(rho))?;
        g_low = g_low.add(&p)?;
    }
    let g_low = g_low.with_order(2.0 * a.order_m);

    let op = a.quantize();
    let mut pow = op.clone();
    let mut series = ToeplitzOperator::zeros(bx);
    let mut terms = 0;
    loop {
        pow = pow.compose(&op)?;
        series = series.add(&pow)?;
        terms += 1;
        let m = pow.max_abs();
        if m <= TOL_NEUMANN * series.max_abs().max(1e-300) || m == 0.0 {
            break;
        }
        if terms > 400 {
            return Err(Error::NoConvergence {
                what: "Neumann series".into(),
                iterations: terms,
                residual: m,
            });
        }
    }
    let residue = series.sub(&g_low.quantize())?;
    let g_high = dequantize(&residue).with_order(-(rho as f64));
    Ok(NeumannSplit { g_low, g_high, terms })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    Chi,
    ChiPlus,
    ChiMinus,
    Sign,
}

/// Cutoff multipliers on the integer grid.
pub fn cutoffs(bx: LatticeBox, kind: CutoffKind, k_xi: usize) -> Symbol {
    let chi_plus = |x: f64| {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            0.0
        } else {
            0.5
        }
    };
    let f = move |x: f64| -> f64 {
        match kind {
            CutoffKind::Chi => {
                if x == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            CutoffKind::ChiPlus => chi_plus(x),
            CutoffKind::ChiMinus => chi_plus(-x),
            CutoffKind::Sign => chi_plus(x) - chi_plus(-x),
        }
    };
    Symbol::multiplier(bx, k_xi, 0.0, |x| C64::new(f(x), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::TorusFunction;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 2, 5).unwrap()
    }

    #[test]
    fn szego_partition() {
        let b = bx();
        let p = cutoffs(b, CutoffKind::ChiPlus, 10).quantize();
        let m = cutoffs(b, CutoffKind::ChiMinus, 10).quantize();
        assert_eq!(p.add(&m).unwrap().max_diff_interior(&ToeplitzOperator::identity(b), 9, 9), 0.0);
        let pm = p.compose(&m).unwrap();
        let z = [0];
        assert_eq!(pm.entry(&z, 0, 0).re, 0.25);
        assert_eq!(pm.entry(&z, 2, 2).re, 0.0);
        assert_eq!(pm.entry(&z, -2, -2).re, 0.0);
    }

    #[test]
    fn exp_of_constant() {
        let b = bx();
        let a = Symbol::multiplier(b, 10, 0.0, |_| C64::new(0.3, 0.1));
        let e = exp_symbol(&a, 1.0).unwrap();
        let want = C64::new(0.3, 0.1).exp();
        assert!((e.entry(&[0], 2, 2) - want).norm() < 1e-14);
        let z = exp_symbol(&Symbol::zeros(b, 10, 0.0), 1.0).unwrap();
        assert_eq!(z.max_diff_interior(&ToeplitzOperator::identity(b), 9, 9), 0.0);
    }

    #[test]
    fn scalar_neumann() {
        let b = bx();
        let eps = 0.1;
        let a = Symbol::multiplier(b, 10, -1.0, |x| C64::new(eps / jap_xi(x), 0.0));
        let split = neumann_inverse(&a, 3).unwrap();
        let op = a.quantize();
        let inv = ToeplitzOperator::identity(b)
            .add(&op)
            .unwrap()
            .add(&split.g_low.quantize())
            .unwrap()
            .add(&split.g_high.quantize_on(b))
            .unwrap();
        for j in -5i64..=5 {
            let w = 1.0 / (1.0 - eps / jap_xi(j as f64));
            assert!((inv.entry(&[0], j, j).re - w).abs() < 1e-14);
        }
    }

    #[test]
    fn real_to_real_matrix_quantizes_to_real_to_real() {
        let b = bx();
        let u = TorusFunction::trig(b, 0.2, &[1], true, 1, false).unwrap();
        let a = Symbol::product(&u, 10, 0.0, |x| C64::new(0.0, x / 5.0));
        let v = TorusFunction::trig(b, 0.1, &[0], true, 2, true).unwrap();
        let c = Symbol::function(&v, 10);
        let m = SymbolMatrix2x2::from_upper(a, c).quantize();
        assert!(m.structure_violations()[0] < 1e-15);
    }
}
