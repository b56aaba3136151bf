use num_complex::Complex64 as C64;
use serde::Serialize;

use super::coefficients::KGCoefficients;
use super::kam::{kam_reduce, KamConfig, KamOutcome};
use crate::diffeo::{build_l, TorusDiffeo};
use crate::error::{Error, Result};
use crate::fourier::{Grid, LatticeBox, TorusFunction};
use crate::pseudo::{exp_symbol, Symbol, TailModel};
use crate::toeplitz::{
    conjugate_generator, dm, invert_with_guess, BlockOperator2x2, NormalForm, StructureReport,
    ToeplitzOperator, MINUS, PLUS,
};
use crate::transport::{first_order_defect, solve_transport, StraighteningResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Assembled,
    Symmetrized,
    BlockDiagonal,
    Straightened,
    OrderZeroReduced,
    Reduced,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    pub gamma: f64,
    pub tau: f64,
    /// Number of off-diagonal sweeps.
    pub rho: usize,
    pub structure_tol: f64,
    pub kam: KamConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            gamma: 0.01,
            tau: 7.0,
            rho: 3,
            structure_tol: 1e-10,
            kam: KamConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub label: String,
    /// Of the operator after the stage, before re-symmetrization.
    pub structure: StructureReport,
    /// Of the change of variables.
    pub transform_structure: Option<StructureReport>,
    pub inverse_residual: f64,
    /// `max|T − D_m𝕀|` after the stage.
    pub perturbation_max: f64,
    /// `max` of the off-diagonal blocks.
    pub offdiag_max: f64,
    pub extra: Vec<(String, f64)>,
}

#[derive(Clone, Debug)]
pub struct Transform {
    pub stage: Stage,
    pub label: String,
    pub phi: BlockOperator2x2,
    pub phi_inv: BlockOperator2x2,
}

/// The current operator `ω·∂_φ − iE·T` and the accumulated change of
/// variables `𝔉`, with `𝔉 (ω·∂_φ − iE·T₀) 𝔉⁻¹ = ω·∂_φ − iE·T`.
#[derive(Clone, Debug)]
pub struct ReductionState {
    pub stage: Stage,
    pub omega: Vec<f64>,
    pub coeffs: KGCoefficients,
    pub t0: BlockOperator2x2,
    pub t: BlockOperator2x2,
    pub c_frak: f64,
    pub normal: NormalForm,
    pub f: BlockOperator2x2,
    pub f_inv: BlockOperator2x2,
    pub transforms: Vec<Transform>,
    pub records: Vec<StageRecord>,
    pub lambda: Option<TorusFunction>,
    pub straightening: Option<StraighteningResult>,
    pub order0_coeff: Option<(TorusFunction, TorusFunction)>,
    pub kam: Option<KamOutcome>,
    pub config: PipelineConfig,
}

impl ReductionState {
    pub fn lattice(&self) -> LatticeBox {
        self.coeffs.lattice()
    }

    /// `T − (1+𝔠)D_m𝕀`.
    pub fn perturbation(&self) -> Result<BlockOperator2x2> {
        let bx = self.lattice();
        let d = ToeplitzOperator::multiplier(bx, |j| C64::new((1.0 + self.c_frak) * dm(j as f64, self.coeffs.mass), 0.0));
        self.t.sub(&BlockOperator2x2::diag(d.clone(), d))
    }

    fn record(&mut self, label: &str, structure: StructureReport, ts: Option<StructureReport>, inv_res: f64, extra: Vec<(String, f64)>) -> Result<()> {
        let p = self.perturbation()?;
        let offdiag_max = p.blocks[PLUS][MINUS].max_abs().max(p.blocks[MINUS][PLUS].max_abs());
        self.records.push(StageRecord {
            stage: self.stage,
            label: label.into(),
            structure,
            transform_structure: ts,
            inverse_residual: inv_res,
            perturbation_max: p.max_abs(),
            offdiag_max,
            extra,
        });
        Ok(())
    }

    fn check(&self, what: &str, rep: &StructureReport) -> Result<()> {
        if rep.real_to_real && rep.reversibility_preserving && rep.parity_preserving {
            Ok(())
        } else {
            Err(Error::Symmetry(format!("{what}: {rep:?}")))
        }
    }

    /// Conjugate by `Φ`, check structure, re-symmetrize, log.
    pub fn apply_transform(
        &mut self,
        stage: Stage,
        label: &str,
        phi: BlockOperator2x2,
        phi_inv: BlockOperator2x2,
        inverse_residual: f64,
        extra: Vec<(String, f64)>,
    ) -> Result<()> {
        let tol = self.config.structure_tol;
        let ts = phi.structure_check_tol(tol);
        self.check(&format!("{label} transform"), &ts)?;
        let x = self.t.generator();
        let xc = conjugate_generator(&x, &phi, &phi_inv, &self.omega)?;
        let t = xc.ungenerator();
        let rep = t.structure_check_tol(tol);
        self.check(&format!("operator after {label}"), &rep)?;
        self.t = t.symmetrize(false)?;
        self.f = phi.compose(&self.f)?;
        self.f_inv = self.f_inv.compose(&phi_inv)?;
        self.stage = stage;
        self.transforms.push(Transform {
            stage,
            label: label.into(),
            phi,
            phi_inv,
        });
        self.record(label, rep, Some(ts), inverse_residual, extra)
    }
}

/// `T₀ = D_m𝕀 + 𝟏⊗P`.
pub fn build_system(c: &KGCoefficients, omega: &[f64], config: PipelineConfig) -> Result<ReductionState> {
    let bx = c.lattice();
    if omega.len() != bx.nu {
        return Err(Error::InvalidParameter(format!("ω has {} components, ν = {}", omega.len(), bx.nu)));
    }
    let d = ToeplitzOperator::multiplier(bx, |j| C64::new(dm(j as f64, c.mass), 0.0));
    let p = c.perturbation()?;
    let t0 = BlockOperator2x2::from_blocks(d.add(&p)?, p.clone(), p.conj_op(), d.add(&p.conj_op())?);
    let rep = t0.structure_check_tol(config.structure_tol);
    let id = BlockOperator2x2::identity(bx);
    let mut st = ReductionState {
        stage: Stage::Assembled,
        omega: omega.to_vec(),
        coeffs: c.clone(),
        t0: t0.clone(),
        t: t0,
        c_frak: 0.0,
        normal: NormalForm::unperturbed(bx.k_x, c.mass),
        f: id.clone(),
        f_inv: id,
        transforms: Vec::new(),
        records: Vec::new(),
        lambda: None,
        straightening: None,
        order0_coeff: None,
        kam: None,
        config,
    };
    st.check("assembled operator", &rep)?;
    st.record("assemble", rep, None, 0.0, Vec::new())?;
    Ok(st)
}

fn on_grid(u: &TorusFunction, f: impl Fn(f64) -> f64) -> Result<TorusFunction> {
    let bx = u.lattice();
    let g = Grid::for_box(&bx, 2);
    let v: Vec<C64> = g.synthesize(u)?.into_iter().map(|z| C64::new(f(z.re), 0.0)).collect();
    Ok(g.analyze(&v, bx)?.real_part())
}

/// `λ = √(1+2b₁)` and the pair `(f, g)` with `f² − g² = 1`.
pub fn symmetrizer_functions(b1: &TorusFunction) -> Result<(TorusFunction, TorusFunction, TorusFunction)> {
    let g = Grid::for_box(&b1.lattice(), 2);
    let minv = g.synthesize(b1)?.iter().map(|z| 1.0 + 2.0 * z.re).fold(f64::INFINITY, f64::min);
    if minv <= 0.0 {
        return Err(Error::Smallness(format!("1 + 2b₁ reaches {minv} ≤ 0")));
    }
    let lam = on_grid(b1, |b| (1.0 + 2.0 * b).sqrt())?;
    let f = on_grid(b1, |b| {
        let l = (1.0 + 2.0 * b).sqrt();
        (1.0 + l) / (2.0 * l.sqrt())
    })?;
    let gg = on_grid(b1, |b| {
        let l = (1.0 + 2.0 * b).sqrt();
        (1.0 - l) / (2.0 * l.sqrt())
    })?;
    Ok((lam, f, gg))
}

/// Conjugate by `U⁻¹`, `U = ((f,g),(g,f))`, making the order-one part diagonal.
pub fn symmetrize_order1(st: &mut ReductionState) -> Result<()> {
    let (lam, f, g) = symmetrizer_functions(&st.coeffs.b1())?;
    let mf = ToeplitzOperator::multiplication(&f);
    let mg = ToeplitzOperator::multiplication(&g);
    let neg = mg.scale(C64::new(-1.0, 0.0));
    let phi = BlockOperator2x2::from_blocks(mf.clone(), neg.clone(), neg, mf.clone());
    let guess = BlockOperator2x2::from_blocks(mf.clone(), mg.clone(), mg, mf);
    let inv = invert_with_guess(&phi, guess)?;
    st.lambda = Some(lam);
    st.apply_transform(Stage::Symmetrized, "symmetrize order one", phi, inv.inverse, inv.residual, Vec::new())
}

/// Largest entry of the off-diagonal blocks in row band `|j| = jb`.
fn offdiag_band(t: &BlockOperator2x2, jb: i64) -> f64 {
    let bx = t.lattice();
    let n = bx.n_j();
    let mut m: f64 = 0.0;
    for (s, u) in [(PLUS, MINUS), (MINUS, PLUS)] {
        let op = &t.blocks[s][u];
        for bi in op.support() {
            let sl = op.slice(bi).unwrap();
            for j in [jb, -jb] {
                let jj = (j + bx.k_x as i64) as usize;
                for kk in 0..n {
                    m = m.max(sl[jj * n + kk].norm());
                }
            }
        }
    }
    m
}

/// Log-log slope of the off-diagonal band maxima over `2 ≤ |j| ≤ 2K_x/3`.
pub fn offdiag_slope(t: &BlockOperator2x2) -> Option<f64> {
    let hi = (2 * t.lattice().k_x / 3) as i64;
    let pts: Vec<(f64, f64)> = (2..=hi)
        .filter_map(|j| {
            let v = offdiag_band(t, j);
            (v > 0.0).then(|| ((j as f64).ln(), v.ln()))
        })
        .collect();
    crate::diffeo::fit_slope(&pts)
}

/// `ρ` sweeps `Ψ = 𝕀 + offdiag(M)`, `M = (2λ)⁻¹·T_off·D_m⁻¹`; each removes
/// one order from the off-diagonal blocks.
pub fn block_diagonalize(st: &mut ReductionState, rho: usize) -> Result<()> {
    if rho == 0 {
        return Err(Error::InvalidParameter("ρ must be ≥ 1".into()));
    }
    let bx = st.lattice();
    let lam = st
        .lambda
        .clone()
        .ok_or_else(|| Error::InvalidParameter("block diagonalization needs the order-one symmetrization".into()))?;
    let half_inv = ToeplitzOperator::multiplication(&on_grid(&lam, |l| 0.5 / l)?);
    let dminv = ToeplitzOperator::multiplier(bx, |j| C64::new(1.0 / dm(j as f64, st.coeffs.mass), 0.0));
    let id = ToeplitzOperator::identity(bx);
    let slope_in = offdiag_slope(&st.t);
    for sweep in 0..rho {
        let m12 = half_inv.compose(&st.t.blocks[PLUS][MINUS])?.compose(&dminv)?;
        let m21 = half_inv.compose(&st.t.blocks[MINUS][PLUS])?.compose(&dminv)?;
        if m12.max_abs() == 0.0 && m21.max_abs() == 0.0 {
            st.stage = Stage::BlockDiagonal;
            let rep = st.t.structure_check_tol(st.config.structure_tol);
            return st.record("block diagonalize", rep, None, 0.0, Vec::new());
        }
        let neg = C64::new(-1.0, 0.0);
        let phi = BlockOperator2x2::from_blocks(id.clone(), m12.clone(), m21.clone(), id.clone());
        let guess = BlockOperator2x2::from_blocks(id.clone(), m12.scale(neg), m21.scale(neg), id.clone());
        let inv = invert_with_guess(&phi, guess)?;
        let mut extra = vec![("sweep".into(), sweep as f64)];
        if sweep + 1 == rho {
            if let Some(s) = slope_in {
                extra.push(("offdiag_slope_in".into(), s));
            }
        }
        st.apply_transform(Stage::BlockDiagonal, "block diagonalize", phi, inv.inverse, inv.residual, extra)?;
    }
    if let (Some(s), Some(r)) = (offdiag_slope(&st.t), st.records.last_mut()) {
        r.extra.push(("offdiag_slope_out".into(), s));
    }
    Ok(())
}

/// Straighten the diagonal first order `λD_m` to `(1+𝔠)D_m` with
/// `Θ₁ = diag(L, conj L)`.
pub fn reduce_order1(st: &mut ReductionState) -> Result<()> {
    let bx = st.lattice();
    let lam = st
        .lambda
        .clone()
        .ok_or_else(|| Error::InvalidParameter("straightening needs the order-one symmetrization".into()))?;
    let a = lam.sub(&TorusFunction::constant(bx, 1.0))?;
    let cfg = st.config.clone();
    let sr = solve_transport(&a, &st.omega, cfg.gamma, cfg.tau, 1e-13, 200)?;
    let (dp, dmi) = sr.diffeos()?;
    let l = build_l(&dp, &dmi)?;
    let defect = first_order_defect(&a, &dp, sr.a_frak, &st.omega)?;
    let extra = vec![
        ("transport_residual".into(), sr.residual),
        ("transport_residual_minus".into(), sr.residual_minus),
        ("leading_defect".into(), defect),
        ("l_defect".into(), l.defect_q),
    ];
    st.c_frak = sr.a_frak;
    st.straightening = Some(sr);
    st.apply_transform(Stage::Straightened, "straighten order one", l.theta, l.theta_inv, l.inverse_residual, extra)
}

/// `b₀(φ, x + α(φ,x))` sampled on the grid.
pub fn pull_back(b: &TorusFunction, d: &TorusDiffeo) -> Result<TorusFunction> {
    let bx = b.lattice();
    let g = Grid::for_box(&bx, 2);
    let av = g.synthesize(&d.alpha)?;
    let vals: Vec<C64> = (0..g.len())
        .map(|i| {
            let (phi, x) = g.point(i);
            b.eval(&phi, x + av[i].re)
        })
        .collect();
    Ok(g.analyze(&vals, bx)?.real_part())
}

/// Order-zero generator `d = d₊χ₊ + d₋χ₋` solving the homological equation
/// for the diagonal order-zero coefficient.
pub fn order0_generator(
    order0_plus: &TorusFunction,
    order0_minus: &TorusFunction,
    c_frak: f64,
    omega: &[f64],
    gamma: f64,
    tau: f64,
) -> Result<Symbol> {
    let bx = order0_plus.lattice();
    let lr = bx.l_range();
    let nj = bx.n_j();
    let mut dp = TorusFunction::zeros(bx);
    let mut dmn = TorusFunction::zeros(bx);
    for li in 0..lr.len() {
        let l = lr.vector(li);
        let wl = lr.dot(li, omega);
        let thr = 2.0 * gamma * (lr.norm1(li).max(1) as f64).powf(-tau);
        for jj in 0..nj {
            if li == lr.zero() && bx.j_value(jj) == 0 {
                continue;
            }
            let j = bx.j_value(jj) as f64;
            for (sign, src, dst) in [(1.0, order0_plus, &mut dp), (-1.0, order0_minus, &mut dmn)] {
                let div = wl - sign * (1.0 + c_frak) * j;
                let c = src.coeffs()[li * nj + jj];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                if div.abs() < thr {
                    return Err(Error::SmallDivisor {
                        witness: format!("ℓ = {l:?}, j = {}", bx.j_value(jj)),
                        value: div,
                        threshold: thr,
                    });
                }
                dst.coeffs_mut()[li * nj + jj] = sign * c / C64::new(0.0, div);
            }
        }
    }
    let k = bx.k_x as i64;
    let avg = dp.add(&dmn)?.scale_re(0.5);
    let slices = (-k..=k)
        .map(|xi| match xi.signum() {
            1 => dp.clone(),
            -1 => dmn.clone(),
            _ => avg.clone(),
        })
        .collect();
    Symbol::from_slices(bx, 0.0, TailModel::PowerLaw, slices)
}

/// Remove the diagonal order-zero part with `Θ₂ = diag(exp Op(d), conj)`.
pub fn reduce_order0(st: &mut ReductionState) -> Result<()> {
    let sr = st
        .straightening
        .clone()
        .ok_or_else(|| Error::InvalidParameter("order-zero reduction needs the straightening".into()))?;
    let (dp, dmi) = sr.diffeos()?;
    let b0 = st.coeffs.b0();
    let order0_plus = pull_back(&b0, &dp)?;
    let order0_minus = pull_back(&b0, &dmi)?;
    let parity = order0_minus.add(&order0_plus.reflect_x())?.max_abs();
    let cfg = st.config.clone();
    let d = order0_generator(&order0_plus, &order0_minus, st.c_frak, &st.omega, cfg.gamma, cfg.tau)?;
    let before = order0_level(st)?;
    let e = exp_symbol(&d, 1.0)?;
    let ei = exp_symbol(&d, -1.0)?;
    let phi = BlockOperator2x2::diag(e.clone(), e.conj_op());
    let phi_inv = BlockOperator2x2::diag(ei.clone(), ei.conj_op());
    let res = phi
        .compose(&phi_inv)?
        .sub(&BlockOperator2x2::identity(st.lattice()))?
        .max_abs();
    st.order0_coeff = Some((order0_plus, order0_minus));
    st.apply_transform(
        Stage::OrderZeroReduced,
        "reduce order zero",
        phi,
        phi_inv,
        res,
        vec![("order0_parity_defect".into(), parity), ("order0_before".into(), before)],
    )?;
    let after = order0_level(st)?;
    st.records.last_mut().unwrap().extra.push(("order0_after".into(), after));
    Ok(())
}

/// Size of the diagonal order-zero part: largest entry of `T_{++} − (1+𝔠)D_m`
/// in columns `K_x/2 ≤ |k| ≤ 2K_x/3`, rows `|j| ≤ 2K_x/3`.
pub fn order0_level(st: &ReductionState) -> Result<f64> {
    let p = st.perturbation()?;
    let bx = st.lattice();
    let op = &p.blocks[PLUS][PLUS];
    let n = bx.n_j();
    let kx = bx.k_x as i64;
    let hi = 2 * kx / 3;
    let lo = (kx / 2).max(1);
    let mut m: f64 = 0.0;
    for bi in op.support() {
        let s = op.slice(bi).unwrap();
        for j in -hi..=hi {
            for k in (-hi..=hi).filter(|k| k.abs() >= lo) {
                m = m.max(s[((j + kx) as usize) * n + (k + kx) as usize].norm());
            }
        }
    }
    Ok(m)
}

/// Interior part `|ℓ| ≤ l_max`, `|j|, |k| ≤ j_max` and its `L²` operator norm.
pub fn interior_norm(a: &BlockOperator2x2, l_max: usize, j_max: usize) -> f64 {
    let jm = j_max as i64;
    let lm = l_max as i64;
    let masked = a.map(|op| {
        op.reweight(|l, j, k| {
            let inside = l.iter().map(|c| c.abs()).sum::<i64>() <= lm && j.abs() <= jm && k.abs() <= jm;
            C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
    });
    masked.op_norm(0.0, 0.0).value
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugatorCheck {
    /// `‖𝔉 X₀ 𝔉⁻¹ − (ω·∂_φ𝔉)𝔉⁻¹ − X_∞‖` on interior modes.
    pub residual: f64,
    /// `max|𝔉𝔉⁻¹ − 𝕀|`.
    pub inverse_defect: f64,
    /// `max|𝔉 − 𝕀|`.
    pub distance_from_identity: f64,
    pub structure: StructureReport,
}

/// Verify the accumulated conjugation against the normal form.
pub fn assemble_conjugator(st: &ReductionState) -> Result<ConjugatorCheck> {
    let bx = st.lattice();
    let x0 = st.t0.generator();
    let xc = conjugate_generator(&x0, &st.f, &st.f_inv, &st.omega)?;
    let target = st.normal.to_block(bx).generator();
    let diff = xc.sub(&target)?;
    let residual = interior_norm(&diff, bx.k_phi / 2, 2 * bx.k_x / 3);
    let id = BlockOperator2x2::identity(bx);
    Ok(ConjugatorCheck {
        residual,
        inverse_defect: st.f.compose(&st.f_inv)?.sub(&id)?.max_abs(),
        distance_from_identity: st.f.sub(&id)?.max_abs(),
        structure: st.f.structure_check_tol(st.config.structure_tol),
    })
}

/// All stages, then the KAM iteration.
pub fn run_pipeline(c: &KGCoefficients, omega: &[f64], config: PipelineConfig) -> Result<ReductionState> {
    let rho = config.rho;
    let mut st = build_system(c, omega, config)?;
    symmetrize_order1(&mut st).map_err(|e| e.at_stage("symmetrize"))?;
    block_diagonalize(&mut st, rho).map_err(|e| e.at_stage("block_diagonalize"))?;
    reduce_order1(&mut st).map_err(|e| e.at_stage("straighten"))?;
    reduce_order0(&mut st).map_err(|e| e.at_stage("reduce_order_zero"))?;
    let kc = st.config.kam.clone();
    let out = kam_reduce(&st.t, st.c_frak, st.coeffs.mass, &st.omega, &kc, st.config.gamma, st.config.tau)
        .map_err(|e| e.at_stage("kam"))?;
    st.normal = out.normal.clone();
    st.t = out.t_final.clone();
    st.f = out.phi.compose(&st.f)?;
    st.f_inv = st.f_inv.compose(&out.phi_inv)?;
    st.stage = Stage::Reduced;
    let rep = out.final_structure;
    st.transforms.push(Transform {
        stage: Stage::Reduced,
        label: "kam".into(),
        phi: out.phi.clone(),
        phi_inv: out.phi_inv.clone(),
    });
    let steps = out.steps.len() as f64;
    st.kam = Some(out);
    st.record("kam", rep, None, 0.0, vec![("steps".into(), steps)])?;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    const OMEGA: [f64; 1] = [0.3141592653589793];

    #[test]
    fn f_g_unit_determinant() {
        let bx = LatticeBox::new(1, 4, 8).unwrap();
        let c = KGCoefficients::reference(bx, 1e-3, 1.0).unwrap();
        let (_, f, g) = symmetrizer_functions(&c.b1()).unwrap();
        let grid = Grid::for_box(&bx, 4);
        let fv = grid.synthesize(&f).unwrap();
        let gv = grid.synthesize(&g).unwrap();
        let worst = fv.iter().zip(&gv).map(|(a, b)| (a.re * a.re - b.re * b.re - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-14, "{worst}");
    }

    #[test]
    fn zero_perturbation_is_noop() {
        let bx = LatticeBox::new(1, 3, 6).unwrap();
        let c = KGCoefficients::zeros(bx, 1.0).unwrap();
        let st = run_pipeline(&c, &OMEGA, PipelineConfig::default()).unwrap();
        assert_eq!(st.c_frak, 0.0);
        assert!(st.f.sub(&BlockOperator2x2::identity(bx)).unwrap().max_abs() < 1e-12);
        for ev in st.normal.eigenvalues() {
            assert!((ev.plus - dm(ev.j as f64, 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn stages_on_reference() {
        let bx = LatticeBox::new(1, 4, 8).unwrap();
        let c = KGCoefficients::reference(bx, 1e-3, 1.0).unwrap();
        let st = run_pipeline(&c, &OMEGA, PipelineConfig::default()).unwrap();
        for r in &st.records {
            eprintln!("{:?} {} pert {:.3e} off {:.3e} viol {:?} {:?}", r.stage, r.label, r.perturbation_max, r.offdiag_max,
                [r.structure.real_to_real_violation, r.structure.reversibility_preserving_violation, r.structure.parity_violation], r.extra);
        }
        let kam = st.kam.as_ref().unwrap();
        eprintln!("eps {:?}", kam.eps_sequence);
        let chk = assemble_conjugator(&st).unwrap();
        eprintln!("{:?}", chk);
    }
}
