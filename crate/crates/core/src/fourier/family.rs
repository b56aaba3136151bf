use super::torus::TorusFunction;
use crate::error::{Error, Result};

/// Samples `ω ↦ u(ω)` over a finite set of frequency vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamFamily {
    pub omegas: Vec<Vec<f64>>,
    pub values: Vec<TorusFunction>,
}

impl ParamFamily {
    pub fn new(omegas: Vec<Vec<f64>>, values: Vec<TorusFunction>) -> Result<Self> {
        if omegas.is_empty() || omegas.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} frequencies for {} values",
                omegas.len(),
                values.len()
            )));
        }
        let bx = values[0].lattice();
        for v in &values {
            bx.check_same(&v.lattice())?;
        }
        for (a, wa) in omegas.iter().enumerate() {
            if wa.len() != bx.nu {
                return Err(Error::InvalidParameter(format!(
                    "frequency {a} has {} components, expected {}",
                    wa.len(),
                    bx.nu
                )));
            }
            for wb in &omegas[a + 1..] {
                if wa == wb {
                    return Err(Error::InvalidParameter(format!("repeated frequency {wa:?}")));
                }
            }
        }
        Ok(ParamFamily { omegas, values })
    }

    /// Scalar family, each value stored as a constant function on `bx`.
    pub fn scalars(bx: super::LatticeBox, omegas: Vec<Vec<f64>>, values: &[f64]) -> Result<Self> {
        let v = values.iter().map(|&c| TorusFunction::constant(bx, c)).collect();
        Self::new(omegas, v)
    }

    /// `sup_ω ‖u(ω)‖_s + γ max_{ω₁≠ω₂} ‖u(ω₁) − u(ω₂)‖_{s−1} / |ω₁ − ω₂|`.
    pub fn lip_norm(&self, s: f64, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::InvalidParameter(format!("gamma {gamma} outside (0, 1/2)")));
        }
        let sup = self
            .values
            .iter()
            .map(|u| u.sobolev_norm(s))
            .fold(0.0, f64::max);
        if self.values.len() < 2 {
            return Ok(sup);
        }
        if s < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz part needs s >= 1 (got {s})"
            )));
        }
        let mut lip: f64 = 0.0;
        for a in 0..self.values.len() {
            for b in a + 1..self.values.len() {
                let dw: f64 = self.omegas[a]
                    .iter()
                    .zip(&self.omegas[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                let du = self.values[a].sub(&self.values[b])?.sobolev_norm(s - 1.0);
                lip = lip.max(du / dw);
            }
        }
        Ok(sup + gamma * lip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::LatticeBox;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;

    #[test]
    fn lip_examples() {
        let bx = LatticeBox::new(1, 1, 1).unwrap();
        let c = ParamFamily::scalars(bx, vec![vec![0.1], vec![0.2]], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(c.lip_norm(2.0, 0.1).unwrap(), 1.0);
        let f = ParamFamily::scalars(bx, vec![vec![0.3], vec![0.4]], &[2.0, 2.5]).unwrap();
        assert_abs_diff_eq!(f.lip_norm(1.0, 0.1).unwrap(), 3.0, epsilon = 1e-12);
        assert!(f.lip_norm(0.5, 0.1).is_err());
        let single = ParamFamily::scalars(bx, vec![vec![0.3]], &[2.0]).unwrap();
        assert_abs_diff_eq!(single.lip_norm(0.0, 0.1).unwrap(), 2.0);
    }

    #[test]
    fn linear_slope() {
        let bx = LatticeBox::new(1, 1, 2).unwrap();
        let ws = [0.1, 0.2, 0.4];
        let vals = ws
            .iter()
            .map(|&w| TorusFunction::mode(bx, &[0], 1, C64::new(w, 0.0)).unwrap())
            .collect();
        let fam = ParamFamily::new(ws.iter().map(|&w| vec![w]).collect(), vals).unwrap();
        // sup part ⟨0,1⟩^2·0.4 plus γ·1
        assert_abs_diff_eq!(fam.lip_norm(2.0, 0.1).unwrap(), 0.4 + 0.1, epsilon = 1e-12);
    }
}
