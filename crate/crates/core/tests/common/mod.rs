#![allow(dead_code)]

use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::pseudo::{Symbol, TailModel};
use kg_reduce::C64;

/// Parameters of one mode of [`symbol_from_modes`]: coefficient, and two
/// shape parameters of its `ξ` profile.
pub type ModeParams = (f64, f64, f64, f64);

/// `a(φ,x,ξ) = Σ c_{ℓh} g_{ℓh}(ξ) e^{i(ℓφ+hx)}` over `|ℓ| ≤ 1`, `|h| ≤ 2`
/// (15 modes, `ν = 1`), with `g` of order `m`.
pub fn symbol_from_modes(bx: LatticeBox, order: f64, params: &[ModeParams]) -> Symbol {
    let kx = bx.k_x as i64;
    let nj = bx.n_j();
    let lr = bx.l_range();
    let mut modes = Vec::new();
    let mut it = params.iter();
    for l in -1i64..=1 {
        for h in -2i64..=2 {
            let &(re, im, p, q) = it.next().expect("15 modes");
            modes.push((lr.index(&[l]).unwrap() * nj + (h + kx) as usize, C64::new(re, im), p, q));
        }
    }
    Symbol::from_fn(bx, Symbol::default_k_xi(&bx), order, TailModel::Zero, |xi| {
        let x = xi as f64;
        let jx = x.abs().max(1.0);
        let mut u = TorusFunction::zeros(bx);
        for &(i, c, p, q) in &modes {
            u.coeffs_mut()[i] = c * jx.powf(order) * (1.0 + 0.3 * (p * x).sin() / jx + q / (1.0 + x * x));
        }
        u
    })
}

/// A function with coefficients `c` on `|ℓ|_∞ ≤ l_max`, `|j| ≤ j_max`, in
/// lexicographic order; missing entries are zero.
pub fn function_from(bx: LatticeBox, l_max: i64, j_max: i64, c: &[(f64, f64)]) -> TorusFunction {
    let mut u = TorusFunction::zeros(bx);
    let lr = bx.l_range();
    let nj = bx.n_j();
    let kx = bx.k_x as i64;
    let mut it = c.iter();
    for li in 0..lr.len() {
        if lr.norm_inf(li) > l_max {
            continue;
        }
        for j in -j_max..=j_max {
            if let Some(&(re, im)) = it.next() {
                u.coeffs_mut()[li * nj + (j + kx) as usize] = C64::new(re, im);
            }
        }
    }
    u
}
