use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centered multi-index range `[-b, b]^nu`, flattened with the first
/// component varying slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiRange {
    pub nu: usize,
    pub b: usize,
    width: usize,
    len: usize,
}

impl MultiRange {
    pub fn new(nu: usize, b: usize) -> Self {
        let width = 2 * b + 1;
        MultiRange {
            nu,
            b,
            width,
            len: width.pow(nu as u32),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self, l: &[i64]) -> Option<usize> {
        debug_assert_eq!(l.len(), self.nu);
        let b = self.b as i64;
        let mut idx = 0usize;
        for &c in l {
            if c < -b || c > b {
                return None;
            }
            idx = idx * self.width + (c + b) as usize;
        }
        Some(idx)
    }

    pub fn vector(&self, mut idx: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.nu];
        for slot in v.iter_mut().rev() {
            *slot = (idx % self.width) as i64 - self.b as i64;
            idx /= self.width;
        }
        v
    }

    /// Index of `-l`; the layout is point-symmetric.
    pub fn neg(&self, idx: usize) -> usize {
        self.len - 1 - idx
    }

    pub fn zero(&self) -> usize {
        (self.len - 1) / 2
    }

    pub fn norm1(&self, idx: usize) -> i64 {
        self.vector(idx).iter().map(|c| c.abs()).sum()
    }

    pub fn norm_inf(&self, idx: usize) -> i64 {
        self.vector(idx).iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Re-index an element of `self` inside `other` (None when out of range).
    pub fn reindex(&self, idx: usize, other: &MultiRange) -> Option<usize> {
        other.index(&self.vector(idx))
    }

    pub fn dot(&self, idx: usize, omega: &[f64]) -> f64 {
        self.vector(idx)
            .iter()
            .zip(omega)
            .map(|(&l, &w)| l as f64 * w)
            .sum()
    }
}

/// Finite index set `|l|_inf <= k_phi`, `|j| <= k_x` on `Z^nu x Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub nu: usize,
    pub k_phi: usize,
    pub k_x: usize,
}

impl LatticeBox {
    pub fn new(nu: usize, k_phi: usize, k_x: usize) -> Result<Self> {
        if nu == 0 || k_phi == 0 || k_x == 0 {
            return Err(Error::InvalidParameter(format!(
                "lattice box needs nu, k_phi, k_x >= 1 (got {nu}, {k_phi}, {k_x})"
            )));
        }
        Ok(LatticeBox { nu, k_phi, k_x })
    }

    pub fn l_range(&self) -> MultiRange {
        MultiRange::new(self.nu, self.k_phi)
    }

    /// ℓ-range of operators built on this box (twice as wide).
    pub fn band_range(&self) -> MultiRange {
        MultiRange::new(self.nu, 2 * self.k_phi)
    }

    pub fn n_j(&self) -> usize {
        2 * self.k_x + 1
    }

    pub fn n_l(&self) -> usize {
        (2 * self.k_phi + 1).pow(self.nu as u32)
    }

    pub fn len(&self) -> usize {
        self.n_l() * self.n_j()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn j_index(&self, j: i64) -> Option<usize> {
        let k = self.k_x as i64;
        if j < -k || j > k {
            None
        } else {
            Some((j + k) as usize)
        }
    }

    pub fn j_value(&self, jj: usize) -> i64 {
        jj as i64 - self.k_x as i64
    }

    pub fn check_same(&self, other: &LatticeBox) -> Result<()> {
        if self != other {
            return Err(Error::BoxMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// Thresholds recorded in reports: `s0 > (nu+7)/2` and `s* > (nu+5)/2`.
    pub fn s0(&self) -> f64 {
        ((self.nu as f64 + 7.0) / 2.0).ceil() + 0.5
    }

    pub fn s_star(&self) -> f64 {
        ((self.nu as f64 + 5.0) / 2.0).ceil() + 0.5
    }
}

/// `max{1, |l|_1, |j|}`.
pub fn jap(l1: i64, j: i64) -> f64 {
    1.max(l1).max(j.abs()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multirange_round_trip() {
        let r = MultiRange::new(2, 3);
        assert_eq!(r.len(), 49);
        for i in 0..r.len() {
            let v = r.vector(i);
            assert_eq!(r.index(&v), Some(i));
            let neg: Vec<i64> = v.iter().map(|c| -c).collect();
            assert_eq!(r.index(&neg), Some(r.neg(i)));
        }
        assert_eq!(r.vector(r.zero()), vec![0, 0]);
    }

    #[test]
    fn box_rejects_zero() {
        assert!(LatticeBox::new(0, 1, 1).is_err());
        assert!(LatticeBox::new(1, 1, 0).is_err());
    }
}
