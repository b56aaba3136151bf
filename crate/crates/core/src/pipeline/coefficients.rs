use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{LatticeBox, SymmetryReport, TorusFunction};
use crate::toeplitz::{dm, ToeplitzOperator};

/// Coefficients of `ψ_tt − ψ_xx + mψ + a2 ψ_xx + a1 ψ_x + a0 ψ = 0`.
#[derive(Clone, Debug)]
pub struct KGCoefficients {
    pub a2: TorusFunction,
    pub a1: TorusFunction,
    pub a0: TorusFunction,
    pub mass: f64,
    pub parity: [SymmetryReport; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientSummary {
    pub mass: f64,
    pub max_a2: f64,
    pub max_a1: f64,
    pub max_a0: f64,
}

impl KGCoefficients {
    /// Checks reality, `a2, a0` even-even and `a1` even in `φ`, odd in `x`.
    pub fn new(a2: TorusFunction, a1: TorusFunction, a0: TorusFunction, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        let bx = a2.lattice();
        bx.check_same(&a1.lattice())?;
        bx.check_same(&a0.lattice())?;
        let parity = [a2.symmetry_check(), a1.symmetry_check(), a0.symmetry_check()];
        let names = ["a2", "a1", "a0"];
        for (i, p) in parity.iter().enumerate() {
            if !p.real {
                return Err(Error::Symmetry(format!("{} is not real", names[i])));
            }
            if !p.even_phi {
                return Err(Error::Symmetry(format!("{} is not even in φ", names[i])));
            }
            let ok_x = if i == 1 { p.odd_x } else { p.even_x };
            if !ok_x {
                return Err(Error::Symmetry(format!(
                    "{} must be {} in x",
                    names[i],
                    if i == 1 { "odd" } else { "even" }
                )));
            }
        }
        Ok(KGCoefficients { a2, a1, a0, mass, parity })
    }

    pub fn zeros(bx: LatticeBox, mass: f64) -> Result<Self> {
        let z = TorusFunction::zeros(bx);
        Self::new(z.clone(), z.clone(), z, mass)
    }

    /// `a2 = 2ε cos φ₁ cos x`, `a1 = 2ε cos φ₁ sin x`, `a0 = 0`.
    pub fn reference(bx: LatticeBox, eps: f64, mass: f64) -> Result<Self> {
        let mut l = vec![0i64; bx.nu];
        l[0] = 1;
        let a2 = TorusFunction::trig(bx, 2.0 * eps, &l, true, 1, true)?;
        let a1 = TorusFunction::trig(bx, 2.0 * eps, &l, true, 1, false)?;
        Self::new(a2, a1, TorusFunction::zeros(bx), mass)
    }

    pub fn lattice(&self) -> LatticeBox {
        self.a2.lattice()
    }

    /// `b₁ = −a2/2`.
    pub fn b1(&self) -> TorusFunction {
        self.a2.scale_re(-0.5)
    }

    /// `b₀ = a1/2`.
    pub fn b0(&self) -> TorusFunction {
        self.a1.scale_re(0.5)
    }

    /// `b₋₁ = (m·a2 + a0)/2`.
    pub fn b_minus1(&self) -> Result<TorusFunction> {
        self.a2.scale_re(0.5 * self.mass).add(&self.a0.scale_re(0.5))
    }

    pub fn is_zero(&self) -> bool {
        self.a2.max_abs() == 0.0 && self.a1.max_abs() == 0.0 && self.a0.max_abs() == 0.0
    }

    pub fn summary(&self) -> CoefficientSummary {
        CoefficientSummary {
            mass: self.mass,
            max_a2: self.a2.max_abs(),
            max_a1: self.a1.max_abs(),
            max_a0: self.a0.max_abs(),
        }
    }

    /// `P = ½a2·(−ξ²/D_m) + ½a1·(iξ/D_m) + ½a0/D_m`, composed as
    /// multiplication after the Fourier multiplier.
    pub fn perturbation(&self) -> Result<ToeplitzOperator> {
        let bx = self.lattice();
        let m = self.mass;
        let half = |u: &TorusFunction| ToeplitzOperator::multiplication(&u.scale_re(0.5));
        let p2 = half(&self.a2).compose(&ToeplitzOperator::multiplier(bx, |k| {
            C64::new(-((k * k) as f64) / dm(k as f64, m), 0.0)
        }))?;
        let p1 = half(&self.a1).compose(&ToeplitzOperator::multiplier(bx, |k| C64::new(0.0, k as f64 / dm(k as f64, m))))?;
        let p0 = half(&self.a0).compose(&ToeplitzOperator::multiplier(bx, |k| C64::new(1.0 / dm(k as f64, m), 0.0)))?;
        p2.add(&p1)?.add(&p0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b1_of_reference() {
        let bx = LatticeBox::new(1, 2, 3).unwrap();
        let c = KGCoefficients::reference(bx, 1e-3, 1.0).unwrap();
        let b1 = c.b1();
        assert!((b1.eval(&[0.0], 0.0).re + 1e-3).abs() < 1e-16);
        assert!((c.b0().eval(&[0.0], std::f64::consts::FRAC_PI_2).re - 1e-3).abs() < 1e-16);
    }

    #[test]
    fn parity_is_enforced() {
        let bx = LatticeBox::new(1, 2, 3).unwrap();
        let odd = TorusFunction::trig(bx, 0.1, &[1], true, 1, false).unwrap();
        let z = TorusFunction::zeros(bx);
        assert!(matches!(KGCoefficients::new(odd, z.clone(), z, 1.0), Err(Error::Symmetry(_))));
    }
}
