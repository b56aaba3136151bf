use num_complex::Complex64 as C64;
use serde::Serialize;

use super::block::{BlockOperator2x2, MINUS, PLUS};
use super::operator::ToeplitzOperator;
use crate::error::{Error, Result};
use crate::fourier::LatticeBox;

/// `√(ξ² + m)`.
pub fn dm(xi: f64, mass: f64) -> f64 {
    (xi * xi + mass).sqrt()
}

/// Diagonal constant-coefficient operator
/// `D_j^j = (1+𝔠)D_m(j) + r_j^j`, `D_j^{−j} = r_j^{−j}`.
///
/// `r_diag[j] = (r_j^j, r_j^{−j})` for `j ≥ 0`, unscaled; the scaled
/// values reported downstream are `⟨j⟩ r`. For `j = 0` only the first
/// component is used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalForm {
    pub c_frak: f64,
    pub mass: f64,
    pub r_diag: Vec<(f64, f64)>,
}

/// One eigenvalue pair. `minus` is absent for `j = 0` (no odd mode).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub j: usize,
    pub plus: f64,
    pub minus: Option<f64>,
}

impl NormalForm {
    pub fn unperturbed(k_x: usize, mass: f64) -> Self {
        NormalForm {
            c_frak: 0.0,
            mass,
            r_diag: vec![(0.0, 0.0); k_x + 1],
        }
    }

    pub fn k_x(&self) -> usize {
        self.r_diag.len() - 1
    }

    /// `λ_{j,±} = (1+𝔠)D_m(j) + r_j^j ± r_j^{−j}`.
    pub fn eigenvalues(&self) -> Vec<EigenPair> {
        self.r_diag
            .iter()
            .enumerate()
            .map(|(j, &(d, e))| {
                let base = (1.0 + self.c_frak) * dm(j as f64, self.mass) + d;
                EigenPair {
                    j,
                    plus: base + if j == 0 { 0.0 } else { e },
                    minus: if j == 0 { None } else { Some(base - e) },
                }
            })
            .collect()
    }

    /// Eigenvalue attached to storage slot `j ∈ [−K_x, K_x]` of the
    /// cos/sin basis: slot `j ≥ 0` holds the even mode, slot `−j` the odd one.
    pub fn slot_eigenvalue(&self, j: i64) -> f64 {
        let ev = &self.eigenvalues()[j.unsigned_abs() as usize];
        if j >= 0 {
            ev.plus
        } else {
            ev.minus.unwrap()
        }
    }

    /// Scaled corrections `⟨j⟩ r_j^{±j}`.
    pub fn scaled_r(&self) -> Vec<(f64, f64)> {
        self.r_diag
            .iter()
            .enumerate()
            .map(|(j, &(a, b))| {
                let w = j.max(1) as f64;
                (w * a, w * b)
            })
            .collect()
    }

    /// The `ℓ = 0` operator `D` on one block.
    pub fn block_operator(&self, bx: LatticeBox) -> ToeplitzOperator {
        let mut d = ToeplitzOperator::zeros(bx);
        let k = bx.k_x as i64;
        for j in -k..=k {
            let (a, b) = self.r_diag.get(j.unsigned_abs() as usize).copied().unwrap_or((0.0, 0.0));
            let diag = (1.0 + self.c_frak) * dm(j as f64, self.mass) + a;
            d.set_entry(&vec![0; bx.nu], j, j, C64::new(diag, 0.0)).unwrap();
            if j != 0 {
                d.set_entry(&vec![0; bx.nu], j, -j, C64::new(b, 0.0)).unwrap();
            }
        }
        d
    }

    /// `diag(D, D)`.
    pub fn to_block(&self, bx: LatticeBox) -> BlockOperator2x2 {
        let d = self.block_operator(bx);
        BlockOperator2x2::diag(d.clone(), d)
    }

    /// Add a normal-form correction.
    pub fn absorb(&mut self, other: &NormalForm) {
        self.c_frak += other.c_frak;
        for (a, b) in self.r_diag.iter_mut().zip(&other.r_diag) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }

    /// `r_j^{σj} = r_{−j}^{−σj}` on the stored block: exact by construction.
    pub fn parity_defect(&self, bx: LatticeBox) -> f64 {
        let d = self.block_operator(bx);
        let k = bx.k_x as i64;
        let z = vec![0; bx.nu];
        let mut m: f64 = 0.0;
        for j in -k..=k {
            m = m.max((d.entry(&z, j, j) - d.entry(&z, -j, -j)).norm());
            m = m.max((d.entry(&z, j, -j) - d.entry(&z, -j, j)).norm());
        }
        m
    }
}

/// Split `T = [T] + remainder` where `[T]` holds the `ℓ = 0`, `σ = σ'`,
/// `k = ±j` entries. The reality of `[T]` rests on `T` being real-to-real,
/// reversibility preserving and parity preserving, which is checked first.
///
/// The returned normal form carries `c_frak` and `mass` as given; its `r`
/// values are the projected entries minus `(1+𝔠)D_m(j)`.
pub fn normal_form_project(
    t: &BlockOperator2x2,
    mass: f64,
    c_frak: f64,
) -> Result<(NormalForm, BlockOperator2x2)> {
    let rep = t.structure_check_tol(1e-10 * (1.0 + t.max_abs()));
    if !(rep.real_to_real && rep.reversibility_preserving && rep.parity_preserving) {
        return Err(Error::Symmetry(format!(
            "normal-form projection needs a real-to-real, reversibility and parity preserving operator: {rep:?}"
        )));
    }
    Ok(normal_form_project_unchecked(t, mass, c_frak))
}

/// Projection without the structure precondition; imaginary parts are discarded.
pub fn normal_form_project_unchecked(
    t: &BlockOperator2x2,
    mass: f64,
    c_frak: f64,
) -> (NormalForm, BlockOperator2x2) {
    let bx = t.lattice();
    let k = bx.k_x as i64;
    let z = vec![0i64; bx.nu];
    let pp = &t.blocks[PLUS][PLUS];
    let mut r = Vec::with_capacity(bx.k_x + 1);
    for j in 0..=k {
        let d = pp.entry(&z, j, j).re - (1.0 + c_frak) * dm(j as f64, mass);
        let e = if j == 0 { 0.0 } else { pp.entry(&z, j, -j).re };
        r.push((d, e));
    }
    let nf = NormalForm {
        c_frak,
        mass,
        r_diag: r,
    };
    let mut rem = t.clone();
    for s in [PLUS, MINUS] {
        let blk = &mut rem.blocks[s][s];
        for j in -k..=k {
            for kk in [j, -j] {
                let _ = blk.set_entry(&z, j, kk, C64::new(0.0, 0.0));
            }
        }
    }
    (nf, rem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::TorusFunction;

    #[test]
    fn constant_diagonal_projects_to_itself() {
        let bx = LatticeBox::new(1, 2, 4).unwrap();
        let mut nf = NormalForm::unperturbed(4, 1.0);
        nf.c_frak = 0.01;
        nf.r_diag[2] = (1e-3, 2e-4);
        let t = nf.to_block(bx);
        let (p, rem) = normal_form_project(&t, 1.0, 0.01).unwrap();
        assert!(rem.max_abs() == 0.0);
        assert!((p.r_diag[2].0 - 1e-3).abs() < 1e-15 && (p.r_diag[2].1 - 2e-4).abs() < 1e-15);
        assert_eq!(p.parity_defect(bx), 0.0);
    }

    #[test]
    fn time_dependent_part_is_remainder() {
        let bx = LatticeBox::new(1, 2, 4).unwrap();
        let a = TorusFunction::trig(bx, 0.1, &[1], true, 0, true).unwrap();
        let m = ToeplitzOperator::multiplication(&a);
        let t = BlockOperator2x2::diag(m.clone(), m);
        let (p, rem) = normal_form_project(&t, 1.0, 0.0).unwrap();
        // D_m itself is missing, so r = −D_m(j)
        assert!((p.r_diag[3].0 + 10f64.sqrt()).abs() < 1e-15);
        assert!(rem.max_diff_interior(&t, 100, 100) == 0.0);
    }

    #[test]
    fn unperturbed_eigenvalues() {
        let nf = NormalForm::unperturbed(3, 1.0);
        let ev = nf.eigenvalues();
        assert_eq!(ev[0].plus, 1.0);
        assert!(ev[0].minus.is_none());
        assert_eq!(ev[3].plus, 10f64.sqrt());
        assert_eq!(ev[3].minus, Some(10f64.sqrt()));
    }
}
