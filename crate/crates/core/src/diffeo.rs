//! Torus diffeomorphisms `x ↦ x + α(φ, x)`, their composition operators and
//! the two-projector map `L = C_{α₊}Π₊ + C_{α₋}Π₋`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bony::{bony_split, BonyCouple};
use crate::error::{Error, Result};
use crate::fourier::{eval_profile, Grid, LatticeBox, TorusFunction};
use crate::pseudo::{cutoffs, dequantize, CutoffKind, Symbol, TailModel};
use crate::toeplitz::{invert_near_identity, invert_with_guess, BlockOperator2x2, Side, ToeplitzOperator, TruncatedAlgebra};

pub const TOL_DIFFEO: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 30;
/// Largest `‖∂_x α‖_∞` accepted.
pub const DERIVATIVE_BOUND: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct TorusDiffeo {
    pub alpha: TorusFunction,
    /// `ᾰ` with `x = y + ᾰ(φ, y)` whenever `y = x + α(φ, x)`.
    pub alpha_inv: TorusFunction,
    pub newton_residual: f64,
}

fn grid_for(bx: &LatticeBox) -> Grid {
    let g = Grid::for_box(bx, 2);
    Grid::new(g.nu, g.n_phi, g.n_x.max(4 * (2 * bx.k_x + 1)).next_power_of_two())
}

/// `max |∂_x α|` on a fine grid.
pub fn derivative_sup(alpha: &TorusFunction) -> Result<f64> {
    let g = grid_for(&alpha.lattice());
    Ok(g.synthesize(&alpha.dx())?.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

fn is_odd_odd(u: &TorusFunction, tol: f64) -> bool {
    u.add(&u.reflect_x().reflect_phi()).map(|s| s.max_abs() <= tol).unwrap_or(false)
}

/// Invert `y = x + α(φ, x)` pointwise by Newton and refit `ᾰ` on the box.
pub fn invert_diffeo(alpha: &TorusFunction) -> Result<TorusDiffeo> {
    let bx = alpha.lattice();
    let dsup = derivative_sup(alpha)?;
    if dsup > DERIVATIVE_BOUND {
        return Err(Error::Smallness(format!(
            "diffeomorphism needs ‖∂_x α‖_∞ ≤ {DERIVATIVE_BOUND}, got {dsup}"
        )));
    }
    let g = grid_for(&bx);
    let n_x = g.n_x;
    let n_phi_pts = g.len() / n_x;
    let tau = std::f64::consts::TAU;
    let mut vals = vec![C64::new(0.0, 0.0); g.len()];
    for p in 0..n_phi_pts {
        let (phi, _) = g.point(p * n_x);
        let prof = alpha.x_profile(&phi);
        for q in 0..n_x {
            let y = q as f64 * tau / n_x as f64;
            let mut x = y - eval_profile(&prof, y).0.re;
            let mut done = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (v, d) = eval_profile(&prof, x);
                let f = x + v.re - y;
                x -= f / (1.0 + d.re);
                if f.abs() <= 1e-15 {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(Error::NoConvergence {
                    what: "diffeomorphism inversion".into(),
                    iterations: NEWTON_MAX_ITER,
                    residual: (x + eval_profile(&prof, x).0.re - y).abs(),
                });
            }
            vals[p * n_x + q] = C64::new(x - y, 0.0);
        }
    }
    let alpha_inv = g.analyze(&vals, bx)?.real_part();
    let mut res: f64 = 0.0;
    for p in 0..n_phi_pts {
        let (phi, _) = g.point(p * n_x);
        let pa = alpha.x_profile(&phi);
        let pi = alpha_inv.x_profile(&phi);
        for q in 0..n_x {
            let x = (q as f64 + 0.5) * tau / n_x as f64;
            let y = x + eval_profile(&pa, x).0.re;
            res = res.max((y + eval_profile(&pi, y).0.re - x).abs());
        }
    }
    let tol = 1e-12 * (1.0 + alpha.max_abs());
    if is_odd_odd(alpha, tol) && !is_odd_odd(&alpha_inv, tol) {
        return Err(Error::Symmetry("inverse diffeomorphism lost the odd-odd parity".into()));
    }
    Ok(TorusDiffeo {
        alpha: alpha.clone(),
        alpha_inv,
        newton_residual: res,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Fwd,
    Inv,
}

fn wide_box(bx: &LatticeBox) -> LatticeBox {
    LatticeBox {
        nu: bx.nu,
        k_phi: 2 * bx.k_phi,
        k_x: 2 * bx.k_x,
    }
}

/// Symbol `t_β(φ, x, ξ) = e^{iξβ(φ,x)}` on the doubled box, for `|ξ| ≤ K_x`.
pub fn phase_symbol(beta: &TorusFunction) -> Result<Symbol> {
    let bx = beta.lattice();
    let w = wide_box(&bx);
    let g = Grid::for_box(&w, 2);
    let b = g.synthesize(beta)?;
    let mut out = Vec::with_capacity(2 * bx.k_x + 1);
    for xi in -(bx.k_x as i64)..=bx.k_x as i64 {
        let v: Vec<C64> = b.iter().map(|c| C64::from_polar(1.0, xi as f64 * c.re)).collect();
        out.push(g.analyze(&v, w)?);
    }
    Symbol::from_slices(w, 0.0, TailModel::Zero, out)
}

/// `(C_β u)(φ, x) = u(φ, x + β(φ, x))` with entries `t̂_β(ℓ, j−j', j')`.
pub fn composition_from(beta: &TorusFunction) -> Result<ToeplitzOperator> {
    Ok(phase_symbol(beta)?.quantize_on(beta.lattice()))
}

/// `C_α^τ` (`fwd`) or its inverse (`inv`), the latter refined to the exact
/// inverse in the truncated algebra.
pub fn composition_operator(d: &TorusDiffeo, tau: f64, direction: Direction) -> Result<ToeplitzOperator> {
    let bx = d.alpha.lattice();
    if tau == 0.0 {
        return Ok(ToeplitzOperator::identity(bx));
    }
    let fwd_fn = d.alpha.scale_re(tau);
    match direction {
        Direction::Fwd => composition_from(&fwd_fn),
        Direction::Inv => {
            let inv_fn = if tau == 1.0 {
                d.alpha_inv.clone()
            } else {
                invert_diffeo(&fwd_fn)?.alpha_inv
            };
            let c = composition_from(&fwd_fn)?;
            Ok(invert_with_guess(&c, composition_from(&inv_fn)?)?.inverse)
        }
    }
}

/// `C_α` and its truncated inverse.
pub fn composition_pair(d: &TorusDiffeo) -> Result<(ToeplitzOperator, ToeplitzOperator)> {
    let c = composition_from(&d.alpha)?;
    let ci = invert_with_guess(&c, composition_from(&d.alpha_inv)?)?.inverse;
    Ok((c, ci))
}

#[derive(Clone, Debug)]
pub struct DiffeoCouple {
    pub couple: BonyCouple,
    /// `(q, ⦀⟨d_φ⟩^q ·⦀_{s*})` for `q ∈ {0, b}`.
    pub weighted_norms: Vec<(f64, f64)>,
}

/// Couple of `⟨D⟩^{−N1}(C_α^τ − Id)⟨D⟩^{−N2}`.
pub fn diffeo_couple(d: &TorusDiffeo, tau: f64, n1: f64, n2: f64, b: f64, s1: f64) -> Result<DiffeoCouple> {
    let bx = d.alpha.lattice();
    let need = (bx.nu / 2) as f64 + 3.0 + b;
    if n1 + n2 <= need {
        return Err(Error::InvalidParameter(format!("N1 + N2 = {} must exceed {need}", n1 + n2)));
    }
    let c = composition_operator(d, tau, Direction::Fwd)?.sub(&ToeplitzOperator::identity(bx))?;
    let op = c.jap_d_pow(-n1, Side::Left).jap_d_pow(-n2, Side::Right);
    let couple = bony_split(&op, s1);
    let mut weighted_norms = Vec::new();
    for q in [0.0, b] {
        let wq = bony_split(&op.jap_dphi_pow(q), s1);
        weighted_norms.push((q, wq.norm(bx.s_star())?));
    }
    Ok(DiffeoCouple { couple, weighted_norms })
}

/// Which commutator `szego_commutator` computes.
#[derive(Clone, Debug)]
pub enum SzegoPair<'a> {
    PiVsC { sigma: i8, d: &'a TorusDiffeo },
    ChiVsC { d: &'a TorusDiffeo },
    PiVsOp { sigma: i8, r: &'a Symbol },
}

#[derive(Clone, Debug)]
pub struct SzegoCommutator {
    pub symbol: Symbol,
    /// Slope of `log max|entry|` against `log ⟨ξ⟩` over the nonzero columns.
    pub decay_slope: Option<f64>,
    pub support_ok: bool,
}

fn projector(bx: LatticeBox, sigma: i8) -> ToeplitzOperator {
    let kind = if sigma >= 0 { CutoffKind::ChiPlus } else { CutoffKind::ChiMinus };
    cutoffs(bx, kind, bx.k_x).quantize()
}

/// Exact commutator with a cutoff, as a symbol. Support and decay in `ξ`
/// are measured on the operator entries.
pub fn szego_commutator(pair: SzegoPair<'_>) -> Result<SzegoCommutator> {
    let (cut, other) = match pair {
        SzegoPair::PiVsC { sigma, d } => {
            let c = composition_from(&d.alpha)?;
            (projector(c.lattice(), sigma), c)
        }
        SzegoPair::ChiVsC { d } => {
            let c = composition_from(&d.alpha)?;
            (cutoffs(c.lattice(), CutoffKind::Chi, c.lattice().k_x).quantize(), c)
        }
        SzegoPair::PiVsOp { sigma, r } => {
            let bx = r.lattice();
            (projector(bx, sigma), r.quantize())
        }
    };
    let k = cut.compose(&other)?.sub(&other.compose(&cut)?)?;
    let bx = k.lattice();
    let kx = bx.k_x as i64;
    let band = k.band().clone();
    let mut support_ok = true;
    let mut col_max = vec![0.0f64; (2 * kx + 1) as usize];
    for bi in k.support() {
        let _ = band.vector(bi);
        let s = k.slice(bi).unwrap();
        let n = bx.n_j();
        for jj in 0..n {
            for kk in 0..n {
                let c = s[jj * n + kk];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let xi = kk as i64 - kx;
                let h = jj as i64 - kk as i64;
                if 2 * h.abs() <= 2 * xi.abs() - 1 {
                    support_ok = false;
                }
                col_max[kk] = col_max[kk].max(c.norm());
            }
        }
    }
    let pts: Vec<(f64, f64)> = (1..=kx)
        .filter_map(|xi| {
            let m = col_max[(xi + kx) as usize].max(col_max[(kx - xi) as usize]);
            (m > 0.0).then(|| ((xi as f64).ln(), m.ln()))
        })
        .collect();
    Ok(SzegoCommutator {
        symbol: dequantize(&k),
        decay_slope: fit_slope(&pts),
        support_ok,
    })
}

/// Least-squares slope; `None` with fewer than two points.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `Θ = diag(L, conj L)` with its inverse.
#[derive(Clone, Debug)]
pub struct LOperator {
    pub theta: BlockOperator2x2,
    pub theta_inv: BlockOperator2x2,
    /// `max|Q|` for `L∘Γ = Id + Q`, `Γ = C₊⁻¹Π₊ + C₋⁻¹Π₋`.
    pub defect_q: f64,
    /// `max|(conj L)⁻¹ − conj(L⁻¹)|`, both computed independently.
    pub conj_inverse_mismatch: f64,
    pub inverse_residual: f64,
}

pub fn build_l(plus: &TorusDiffeo, minus: &TorusDiffeo) -> Result<LOperator> {
    let ap = &plus.alpha;
    let am = &minus.alpha;
    let tol = 1e-12 * (1.0 + ap.max_abs());
    if am.add(&ap.reflect_x())?.max_abs() > tol {
        return Err(Error::Symmetry("α₋(φ,x) = −α₊(φ,−x) violated".into()));
    }
    if !is_odd_odd(ap, tol) {
        return Err(Error::Symmetry("α₊ must be odd in (φ, x) jointly".into()));
    }
    let bx = ap.lattice();
    let (cp, cpi) = composition_pair(plus)?;
    let (cm, cmi) = composition_pair(minus)?;
    let pp = projector(bx, 1);
    let pm = projector(bx, -1);
    let l = cp.compose(&pp)?.add(&cm.compose(&pm)?)?;
    let gamma = cpi.compose(&pp)?.add(&cmi.compose(&pm)?)?;
    let lg = l.compose(&gamma)?;
    let defect_q = lg.sub(&ToeplitzOperator::identity(bx))?.max_abs();
    let neu = invert_near_identity(&lg)?;
    let l_inv = invert_with_guess(&l, gamma.compose(&neu.inverse)?)?;
    let lc = l.conj_op();
    let gc = gamma.conj_op();
    let lgc = invert_near_identity(&lc.compose(&gc)?)?;
    let lc_inv = invert_with_guess(&lc, gc.compose(&lgc.inverse)?)?.inverse;
    let conj_inverse_mismatch = lc_inv.sub(&l_inv.inverse.conj_op())?.max_abs();
    let theta = BlockOperator2x2::diag(l, lc);
    let theta_inv = BlockOperator2x2::diag(l_inv.inverse.clone(), l_inv.inverse.conj_op());
    let inverse_residual = theta.times(&theta_inv)?.minus(&theta.identity_like())?.max_entry();
    Ok(LOperator {
        theta,
        theta_inv,
        defect_q,
        conj_inverse_mismatch,
        inverse_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_x(bx: LatticeBox, eps: f64) -> TorusFunction {
        TorusFunction::trig(bx, eps, &[0], true, 1, false).unwrap()
    }

    #[test]
    fn zero_diffeo() {
        let bx = LatticeBox::new(1, 2, 6).unwrap();
        let d = invert_diffeo(&TorusFunction::zeros(bx)).unwrap();
        assert_eq!(d.alpha_inv.max_abs(), 0.0);
        let c = composition_operator(&d, 1.0, Direction::Fwd).unwrap();
        assert!(c.max_diff_interior(&ToeplitzOperator::identity(bx), 100, 100) < 1e-15);
    }

    #[test]
    fn sine_inverse_series() {
        let bx = LatticeBox::new(1, 2, 24).unwrap();
        let eps = 0.1;
        let d = invert_diffeo(&sin_x(bx, eps)).unwrap();
        assert!(d.newton_residual < 1e-12, "{}", d.newton_residual);
        // ᾰ = −ε sin x + (ε²/2) sin 2x + O(ε³)
        let first = d.alpha_inv.get(&[0], 1) * C64::new(0.0, 2.0);
        assert!((first.re + eps).abs() < eps * eps, "{first}");
    }

    #[test]
    fn constant_shift_is_phase() {
        let bx = LatticeBox::new(1, 2, 6).unwrap();
        let c = 0.3;
        let d = invert_diffeo(&TorusFunction::constant(bx, c)).unwrap();
        let op = composition_operator(&d, 1.0, Direction::Fwd).unwrap();
        for j in -6i64..=6 {
            let e = op.entry(&[0], j, j);
            assert!((e - C64::from_polar(1.0, j as f64 * c)).norm() < 1e-14);
        }
    }

    #[test]
    fn szego_support_and_cos() {
        let bx = LatticeBox::new(1, 2, 8).unwrap();
        let cosx = TorusFunction::trig(bx, 1.0, &[0], true, 1, true).unwrap();
        let r = Symbol::function(&cosx, 16);
        let k = szego_commutator(SzegoPair::PiVsOp { sigma: 1, r: &r }).unwrap();
        assert!(k.support_ok);
        let k_xi = k.symbol.k_xi() as i64;
        for xi in -k_xi..=k_xi {
            if xi.abs() > 1 {
                assert_eq!(k.symbol.slice(xi).max_abs(), 0.0, "ξ = {xi}");
            }
        }
        let d = invert_diffeo(&sin_x(bx, 0.05)).unwrap();
        assert!(szego_commutator(SzegoPair::PiVsC { sigma: -1, d: &d }).unwrap().support_ok);
    }
}
