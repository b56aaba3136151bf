//! The straightening transport equation, the quantitative Egorov
//! conjugation and the first-order straightening built on both.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bony::{bony_split, BonyCouple, BonyCouple2x2};
use crate::diffeo::{build_l, composition_pair, fit_slope, invert_diffeo, LOperator, TorusDiffeo};
use crate::error::{Error, Result};
use crate::fourier::{Grid, LatticeBox, TorusFunction};
use crate::pseudo::{dequantize, Symbol, TailModel};
use crate::toeplitz::{conjugate_generator, BlockOperator2x2, StructureReport, ToeplitzOperator};

/// `⟨ℓ⟩ = max(1, |ℓ|₁)`.
fn jap_l(l: &[i64]) -> f64 {
    (l.iter().map(|c| c.abs()).sum::<i64>().max(1)) as f64
}

fn dot(l: &[i64], omega: &[f64]) -> f64 {
    l.iter().zip(omega).map(|(&a, &b)| a as f64 * b).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct StraighteningResult {
    pub a_frak: f64,
    #[serde(skip)]
    pub beta_plus: TorusFunction,
    #[serde(skip)]
    pub beta_minus: TorusFunction,
    #[serde(skip)]
    pub alpha_plus: TorusFunction,
    #[serde(skip)]
    pub alpha_minus: TorusFunction,
    /// `H^{s0}` residual of the equation for `β₊`.
    pub residual: f64,
    /// Same for the reflected `β₋` in its own equation.
    pub residual_minus: f64,
    pub iterations: usize,
    pub diffeo_residual: f64,
}

/// `ω·∂_φβ − (1+a)(1+∂_xβ) + (1+𝔞)`.
pub fn transport_residual(a: &TorusFunction, beta: &TorusFunction, a_frak: f64, omega: &[f64], sign: f64) -> Result<TorusFunction> {
    let bx = a.lattice();
    let one_a = a.add(&TorusFunction::constant(bx, 1.0))?;
    let one_bx = beta.dx().add(&TorusFunction::constant(bx, 1.0))?;
    let prod = one_a.multiply(&one_bx)?;
    // sign = +1: ω∂β − (1+a)(1+β') + (1+𝔞); sign = −1: ω∂β + (1+a)(1+β') − (1+𝔞)
    beta.omega_dphi(omega)
        .sub(&prod.scale_re(sign))?
        .add(&TorusFunction::constant(bx, sign * (1.0 + a_frak)))
}

/// Solve `ω·∂_φβ₊ − (1+a)(1+∂_xβ₊) = −(1+𝔞₊)` by the fixed point
/// `(ω·∂_φ − (1+𝔞)∂_x)β = (a − 𝔞)(1 + ∂_xβ)`, with `𝔞` fixed by the zero mode.
pub fn solve_transport(
    a: &TorusFunction,
    omega: &[f64],
    gamma: f64,
    tau_dioph: f64,
    tol: f64,
    max_iter: usize,
) -> Result<StraighteningResult> {
    let bx = a.lattice();
    if omega.len() != bx.nu {
        return Err(Error::InvalidParameter(format!("ω has {} components, ν = {}", omega.len(), bx.nu)));
    }
    let s0 = bx.s0();
    let lr = bx.l_range();
    let nj = bx.n_j();
    let mut beta = TorusFunction::zeros(bx);
    let mut a_frak = a.mean().re;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let g = a.add(&a.multiply(&beta.dx())?)?;
        a_frak = g.mean().re;
        let am = a.sub(&TorusFunction::constant(bx, a_frak))?;
        let rhs = am.add(&am.multiply(&beta.dx())?)?;
        let mut next = TorusFunction::zeros(bx);
        for li in 0..lr.len() {
            let l = lr.vector(li);
            let wl = dot(&l, omega);
            for jj in 0..nj {
                let j = bx.j_value(jj);
                let c = rhs.coeffs()[li * nj + jj];
                if li == lr.zero() && j == 0 {
                    continue;
                }
                let div = wl - (1.0 + a_frak) * j as f64;
                if div.abs() < 2.0 * gamma * jap_l(&l).powf(-tau_dioph) {
                    return Err(Error::SmallDivisor {
                        witness: format!("ℓ = {l:?}, j = {j}"),
                        value: div,
                        threshold: 2.0 * gamma * jap_l(&l).powf(-tau_dioph),
                    });
                }
                next.coeffs_mut()[li * nj + jj] = c / C64::new(0.0, div);
            }
        }
        beta = next.real_part();
        residual = transport_residual(a, &beta, a_frak, omega, 1.0)?.sobolev_norm(s0);
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(Error::NoConvergence {
            what: "transport equation".into(),
            iterations,
            residual,
        });
    }
    let beta_minus = beta.reflect_x().scale_re(-1.0);
    let residual_minus = transport_residual(a, &beta_minus, a_frak, omega, -1.0)?.sobolev_norm(s0);
    let dp = invert_diffeo(&beta)?;
    let dm = invert_diffeo(&beta_minus)?;
    Ok(StraighteningResult {
        a_frak,
        alpha_plus: dp.alpha_inv.clone(),
        alpha_minus: dm.alpha_inv.clone(),
        beta_plus: beta,
        beta_minus,
        residual,
        residual_minus,
        iterations,
        diffeo_residual: dp.newton_residual.max(dm.newton_residual),
    })
}

impl StraighteningResult {
    /// Diffeomorphisms `x ↦ x + α_±` with `β_±` as inverses.
    pub fn diffeos(&self) -> Result<(TorusDiffeo, TorusDiffeo)> {
        let mk = |alpha: &TorusFunction, beta: &TorusFunction| -> Result<TorusDiffeo> {
            let chk = invert_diffeo(alpha)?;
            Ok(TorusDiffeo {
                alpha: alpha.clone(),
                alpha_inv: beta.clone(),
                newton_residual: chk.newton_residual.max(self.diffeo_residual),
            })
        };
        Ok((mk(&self.alpha_plus, &self.beta_plus)?, mk(&self.alpha_minus, &self.beta_minus)?))
    }
}

/// Symbol known in closed form at real `ξ`.
#[derive(Clone)]
pub struct ClosedSymbol {
    pub order_m: f64,
    pub f: Arc<dyn Fn(&[f64], f64, f64) -> C64 + Send + Sync>,
}

impl std::fmt::Debug for ClosedSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ClosedSymbol(order {})", self.order_m)
    }
}

impl ClosedSymbol {
    pub fn multiplier(order_m: f64, m: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ClosedSymbol {
            order_m,
            f: Arc::new(move |_, _, xi| C64::new(m(xi), 0.0)),
        }
    }

    /// Integer-ξ samples on `bx` for `|ξ| ≤ k_xi`, optionally pulled back
    /// along `(x, ξ) ↦ (x + α, ξ/(1 + α_x))`.
    pub fn sample(&self, bx: LatticeBox, k_xi: usize, alpha: Option<&TorusFunction>) -> Result<Symbol> {
        let g = Grid::for_box(&bx, 2);
        let pts: Vec<(Vec<f64>, f64)> = (0..g.len()).map(|i| g.point(i)).collect();
        let (av, adx) = match alpha {
            Some(a) => (g.synthesize(a)?, g.synthesize(&a.dx())?),
            None => (vec![C64::new(0.0, 0.0); g.len()], vec![C64::new(0.0, 0.0); g.len()]),
        };
        let mut slices = Vec::with_capacity(2 * k_xi + 1);
        for xi in -(k_xi as i64)..=k_xi as i64 {
            let mut vals = Vec::with_capacity(g.len());
            for (i, (phi, x)) in pts.iter().enumerate() {
                let jac = 1.0 + adx[i].re;
                if jac <= 0.0 {
                    return Err(Error::Smallness("flow degeneracy: 1 + α_x ≤ 0".into()));
                }
                vals.push((self.f)(phi, x + av[i].re, xi as f64 / jac));
            }
            slices.push(g.analyze(&vals, bx)?);
        }
        Symbol::from_slices(bx, self.order_m, TailModel::PowerLaw, slices)
    }
}

#[derive(Clone, Debug)]
pub struct EgorovResult {
    pub q_principal: Symbol,
    pub q_sub: Symbol,
    pub remainder_couple: BonyCouple,
    pub depth_rho: usize,
    /// `max|·|` of the remainder on interior modes.
    pub remainder_interior: f64,
    /// `C_α Op(w) C_α⁻¹` in the truncated algebra.
    pub conjugated: ToeplitzOperator,
}

fn wide(bx: &LatticeBox) -> LatticeBox {
    LatticeBox {
        nu: bx.nu,
        k_phi: 2 * bx.k_phi,
        k_x: 2 * bx.k_x,
    }
}

/// Conjugate `Op(w)` by `C_α`. The principal symbol is the pullback of `w`
/// along the characteristic flow; the lower orders `m−1, …, m−ρ` are
/// fitted in powers of `|ξ|` on each sign branch of the exact symbol.
pub fn egorov_conjugate(w: &ClosedSymbol, d: &TorusDiffeo, depth_rho: usize, s1: f64) -> Result<EgorovResult> {
    if depth_rho == 0 {
        return Err(Error::InvalidParameter("depth ρ must be ≥ 1".into()));
    }
    let bx = d.alpha.lattice();
    let wb = wide(&bx);
    let alpha_w = d.alpha.rebox(wb)?;
    let (c, ci) = composition_pair(d)?;
    let opw = w.sample(wb, bx.k_x, None)?.quantize_on(bx);
    let conjugated = c.compose(&opw)?.compose(&ci)?;
    let q_principal = w.sample(wb, bx.k_x, Some(&alpha_w))?;
    let exact = dequantize(&conjugated);
    let diff = exact.sub(&q_principal.clone().with_order(0.0))?;
    let q_sub = fit_lower_orders(&diff, w.order_m, depth_rho, bx.k_x)?;
    let model = q_principal.add(&q_sub)?.quantize_on(bx);
    let rem = conjugated.sub(&model)?;
    let jm = (2 * bx.k_x / 3).max(1);
    let remainder_interior = rem.max_diff_interior(&ToeplitzOperator::zeros(bx), bx.k_phi, jm);
    Ok(EgorovResult {
        q_principal,
        q_sub,
        remainder_couple: bony_split(&rem, s1),
        depth_rho,
        remainder_interior,
        conjugated,
    })
}

/// Least-squares fit of `Σ_{k=1}^{ρ} c_k^± |ξ|^{m−k}` on each sign branch,
/// over `1 ≤ |ξ| ≤ 2K_x/3`. The `ξ = 0` slice is copied.
fn fit_lower_orders(diff: &Symbol, m: f64, rho: usize, k_x: usize) -> Result<Symbol> {
    let bx = diff.lattice();
    let hi = (2 * k_x / 3).max(rho);
    let xs: Vec<f64> = (1..=hi).map(|x| x as f64).collect();
    let basis = |x: f64| -> Vec<f64> { (1..=rho).map(|k| x.powf(m - k as f64)).collect() };
    // Normal equations G c = b, shared across Fourier coefficients.
    let mut gm = vec![0.0; rho * rho];
    for &x in &xs {
        let b = basis(x);
        for i in 0..rho {
            for j in 0..rho {
                gm[i * rho + j] += b[i] * b[j];
            }
        }
    }
    let ginv = invert_small(&gm, rho)?;
    let kx = diff.k_xi() as i64;
    let mut slices: Vec<TorusFunction> = (-kx..=kx).map(|_| TorusFunction::zeros(bx)).collect();
    slices[kx as usize] = diff.slice(0).clone();
    for sign in [1i64, -1] {
        let mut rhs: Vec<TorusFunction> = (0..rho).map(|_| TorusFunction::zeros(bx)).collect();
        for &x in &xs {
            let b = basis(x);
            let s = diff.slice(sign * x as i64);
            for i in 0..rho {
                rhs[i] = rhs[i].add(&s.scale_re(b[i]))?;
            }
        }
        let mut coef: Vec<TorusFunction> = Vec::with_capacity(rho);
        for i in 0..rho {
            let mut ci = TorusFunction::zeros(bx);
            for j in 0..rho {
                ci = ci.add(&rhs[j].scale_re(ginv[i * rho + j]))?;
            }
            coef.push(ci);
        }
        for x in 1..=kx {
            let b = basis(x as f64);
            let mut v = TorusFunction::zeros(bx);
            for i in 0..rho {
                v = v.add(&coef[i].scale_re(b[i]))?;
            }
            slices[(kx + sign * x) as usize] = v;
        }
    }
    Symbol::from_slices(bx, m - 1.0, TailModel::Zero, slices)
}

fn invert_small(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))
            .unwrap();
        if m[piv * n + col].abs() < 1e-300 {
            return Err(Error::InvalidParameter("singular fit".into()));
        }
        for k in 0..n {
            m.swap(col * n + k, piv * n + k);
            inv.swap(col * n + k, piv * n + k);
        }
        let p = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for k in 0..n {
                    m[r * n + k] -= f * m[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Ok(inv)
}

/// Band profile of `C_α Op(w) C_α⁻¹ − Op(q_principal)` against `Op(w)`:
/// for each `|j|` in `bands`, the ratio of row maxima. Returns the ratios
/// and the log-log slope over the nonzero ones.
#[derive(Clone, Debug, Serialize)]
pub struct PrincipalDefect {
    pub bands: Vec<i64>,
    pub ratios: Vec<f64>,
    pub slope: Option<f64>,
    /// Largest ratio; at rounding level the conjugation is exact.
    pub max_ratio: f64,
}

pub fn principal_defect(w: &ClosedSymbol, d: &TorusDiffeo, bands: std::ops::RangeInclusive<i64>) -> Result<PrincipalDefect> {
    let bx = d.alpha.lattice();
    let wb = wide(&bx);
    let (c, ci) = composition_pair(d)?;
    let opw = w.sample(wb, bx.k_x, None)?.quantize_on(bx);
    let conj = c.compose(&opw)?.compose(&ci)?;
    let qp = w.sample(wb, bx.k_x, Some(&d.alpha.rebox(wb)?))?.quantize_on(bx);
    let diff = conj.sub(&qp)?;
    let row_max = |a: &ToeplitzOperator, j: i64| -> f64 {
        let n = bx.n_j();
        let jj = (j + bx.k_x as i64) as usize;
        let mut m: f64 = 0.0;
        for bi in a.support() {
            let s = a.slice(bi).unwrap();
            for kk in 0..n {
                m = m.max(s[jj * n + kk].norm());
            }
        }
        m
    };
    let mut bl = Vec::new();
    let mut ratios = Vec::new();
    let mut pts = Vec::new();
    for j in bands {
        let r = row_max(&diff, j).max(row_max(&diff, -j)) / row_max(&opw, j).max(row_max(&opw, -j));
        bl.push(j);
        ratios.push(r);
        if r > 0.0 {
            pts.push(((j as f64).ln(), r.ln()));
        }
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(PrincipalDefect {
        bands: bl,
        ratios,
        slope: fit_slope(&pts),
        max_ratio,
    })
}

#[derive(Clone, Debug)]
pub struct FirstOrderStraightening {
    pub straightening: StraighteningResult,
    pub l: LOperator,
    /// `Θ X Θ⁻¹ − (ω∂_φΘ)Θ⁻¹` minus the constant-coefficient target, symbol side.
    pub remainder: BlockOperator2x2,
    pub remainder_couple: BonyCouple2x2,
    /// `‖R⟨D⟩‖` in the couple norm at `s*`.
    pub remainder_norm: f64,
    /// Largest non-constant part of the conjugated first-order coefficient,
    /// relative to `max|a|`.
    pub leading_defect: f64,
    pub structure: StructureReport,
}

/// `|D|` as a Töplitz multiplier.
pub fn abs_d(bx: LatticeBox) -> ToeplitzOperator {
    ToeplitzOperator::multiplier(bx, |j| C64::new(j.abs() as f64, 0.0))
}

/// Conjugate `ω·∂_φ − i(1+a)|D|` (both branches) by `Θ = diag(L, conj L)`.
pub fn straighten_first_order(
    a: &TorusFunction,
    omega: &[f64],
    gamma: f64,
    tau_dioph: f64,
    s1: f64,
) -> Result<FirstOrderStraightening> {
    let bx = a.lattice();
    let st = solve_transport(a, omega, gamma, tau_dioph, 1e-13, 200)?;
    let (dp, dmi) = st.diffeos()?;
    let l = build_l(&dp, &dmi)?;
    let one_a = ToeplitzOperator::multiplication(&a.add(&TorusFunction::constant(bx, 1.0))?);
    let t = one_a.compose(&abs_d(bx))?;
    let x = BlockOperator2x2::diag(t.clone(), t.conj_op()).generator();
    let xc = conjugate_generator(&x, &l.theta, &l.theta_inv, omega)?;
    let target_t = abs_d(bx).scale(C64::new(1.0 + st.a_frak, 0.0));
    let target = BlockOperator2x2::diag(target_t.clone(), target_t).generator();
    let remainder = xc.sub(&target)?.ungenerator();
    let structure = remainder.structure_check_tol(1e-10 * (1.0 + remainder.max_abs()));
    if !(structure.real_to_real && structure.reversibility_preserving && structure.parity_preserving) {
        return Err(Error::Symmetry(format!("straightening remainder lost its structure: {structure:?}")));
    }
    let weighted = remainder.jap_d_pow(1.0, crate::toeplitz::Side::Right);
    let remainder_couple = BonyCouple2x2::from_block(&weighted, s1);
    let remainder_norm = remainder_couple.norm(bx.s_star())?;
    let leading_defect = first_order_defect(a, &dp, st.a_frak, omega)?;
    Ok(FirstOrderStraightening {
        straightening: st,
        l,
        remainder,
        remainder_couple,
        remainder_norm,
        leading_defect,
        structure,
    })
}

/// Conjugate the differential operator `ω·∂_φ − (1+a)∂_x` by `C_{α₊}` and
/// measure how far the resulting coefficient of `∂_x` is from `−(1+𝔞)`,
/// on interior modes, relative to `max|a|`.
pub fn first_order_defect(a: &TorusFunction, d: &TorusDiffeo, a_frak: f64, omega: &[f64]) -> Result<f64> {
    let bx = a.lattice();
    let (c, ci) = composition_pair(d)?;
    let one_a = ToeplitzOperator::multiplication(&a.add(&TorusFunction::constant(bx, 1.0))?);
    let x = one_a.reweight(|_, _, k| C64::new(0.0, k as f64)).scale(C64::new(-1.0, 0.0));
    let xc = conjugate_generator(&x, &c, &ci, omega)?;
    let target = ToeplitzOperator::identity(bx).reweight(|_, _, k| C64::new(0.0, k as f64)).scale(C64::new(-(1.0 + a_frak), 0.0));
    let diff = xc.sub(&target)?;
    let jm = (2 * bx.k_x / 3) as i64;
    let n = bx.n_j();
    let kx = bx.k_x as i64;
    let mut worst: f64 = 0.0;
    for bi in diff.support() {
        let s = diff.slice(bi).unwrap();
        for j in -jm..=jm {
            for k in -jm..=jm {
                if k == 0 {
                    continue;
                }
                let e = s[((j + kx) as usize) * n + (k + kx) as usize];
                worst = worst.max(e.norm() / k.abs() as f64);
            }
        }
    }
    let scale = a.max_abs();
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 4, 8).unwrap()
    }

    const OMEGA: [f64; 1] = [0.3141592653589793];

    #[test]
    fn zero_coefficient() {
        let r = solve_transport(&TorusFunction::zeros(bx()), &OMEGA, 0.01, 7.0, 1e-13, 50).unwrap();
        assert_eq!(r.a_frak, 0.0);
        assert_eq!(r.beta_plus.max_abs(), 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn small_coefficient_converges() {
        let a = TorusFunction::trig(bx(), 1e-3, &[1], true, 1, true).unwrap();
        let r = solve_transport(&a, &OMEGA, 0.01, 7.0, 1e-13, 100).unwrap();
        assert!(r.residual <= 1e-11);
        assert!(r.residual_minus <= 1e-11);
        assert!(r.a_frak.abs() < 1e-5, "{}", r.a_frak);
    }

    #[test]
    fn egorov_identity_diffeo() {
        let b = LatticeBox::new(1, 2, 6).unwrap();
        let d = invert_diffeo(&TorusFunction::zeros(b)).unwrap();
        let w = ClosedSymbol::multiplier(1.0, |x| x);
        let e = egorov_conjugate(&w, &d, 1, 6.0).unwrap();
        assert!(e.remainder_interior < 1e-14);
        assert!(e.q_sub.max_abs() < 1e-14);
    }

    #[test]
    fn principal_defect_decays_for_dm() {
        let b = LatticeBox::new(1, 3, 16).unwrap();
        let beta = TorusFunction::trig(b, 0.02, &[1], true, 1, false).unwrap();
        let d = invert_diffeo(&beta).unwrap();
        let w = ClosedSymbol::multiplier(1.0, |x| crate::toeplitz::dm(x, 1.0));
        let p = principal_defect(&w, &d, 2..=8).unwrap();
        eprintln!("{:?}", p);
        assert!(p.slope.unwrap() < -1.5);
    }

    #[test]
    fn straightening_removes_first_order() {
        let b = LatticeBox::new(1, 3, 12).unwrap();
        let a = TorusFunction::trig(b, 1e-3, &[1], true, 1, true).unwrap();
        let f = straighten_first_order(&a, &OMEGA, 0.01, 7.0, 6.0).unwrap();
        eprintln!("defect {} rem {} {:?}", f.leading_defect, f.remainder_norm, f.structure);
        assert!(f.leading_defect < 1e-6);
    }
}
