use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::LatticeBox;
use crate::toeplitz::{
    expm, normal_form_project, sigma_sign, BlockOperator2x2, NormalForm, Side, StructureReport, ToeplitzOperator, MINUS,
    PLUS,
};

#[derive(Clone, Debug, Serialize)]
pub struct KamConfig {
    pub n0: f64,
    pub max_steps: usize,
    /// Stop once `ε_n` is at or below this.
    pub tol: f64,
    /// Exponents of `γ` in the first and second Melnikov thresholds.
    pub gamma_exp_sum: f64,
    pub gamma_exp_diff: f64,
}

impl Default for KamConfig {
    fn default() -> Self {
        KamConfig {
            n0: 4.0,
            max_steps: 12,
            tol: 1e-12,
            gamma_exp_sum: 1.0,
            gamma_exp_diff: 1.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MelnikovViolation {
    pub step: usize,
    pub l: Vec<i64>,
    pub j: i64,
    pub k: i64,
    pub sigma: i8,
    pub sigma_prime: i8,
    pub divisor: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KamStep {
    pub n: usize,
    pub n_cut: usize,
    pub eps: f64,
    pub eps_b: f64,
    pub min_divisor: f64,
    pub generator_max: f64,
    pub structure: StructureReport,
    pub max_imag_normal: f64,
}

#[derive(Clone, Debug)]
pub struct KamOutcome {
    pub steps: Vec<KamStep>,
    /// `ε_0, ε_1, …` including the value after the last step.
    pub eps_sequence: Vec<f64>,
    pub eps_b_sequence: Vec<f64>,
    pub normal: NormalForm,
    pub phi: BlockOperator2x2,
    pub phi_inv: BlockOperator2x2,
    pub t_final: BlockOperator2x2,
    pub violations: Vec<MelnikovViolation>,
    pub converged: bool,
    pub final_structure: StructureReport,
}

/// Orthogonal change to the even/odd basis: slot `j ≥ 0` holds
/// `(e_j + e_{−j})/√2`, slot `−j` holds `(e_j − e_{−j})/√2`. Involutive.
fn parity_basis(bx: LatticeBox) -> Vec<f64> {
    let n = bx.n_j();
    let k = bx.k_x as i64;
    let mut u = vec![0.0; n * n];
    let idx = |j: i64| (j + k) as usize;
    u[idx(0) * n + idx(0)] = 1.0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 1..=k {
        u[idx(j) * n + idx(j)] = h;
        u[idx(-j) * n + idx(j)] = h;
        u[idx(j) * n + idx(-j)] = h;
        u[idx(-j) * n + idx(-j)] = -h;
    }
    u
}

fn rotate(op: &ToeplitzOperator, u: &[f64]) -> ToeplitzOperator {
    let bx = op.lattice();
    let n = bx.n_j();
    let mut out = ToeplitzOperator::zeros(bx);
    for bi in op.support() {
        let a = op.slice(bi).unwrap();
        let mut tmp = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let uik = u[i * n + k];
                if uik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    tmp[i * n + j] += a[k * n + j] * uik;
                }
            }
        }
        let s = out.slice_mut(bi);
        for i in 0..n {
            for k in 0..n {
                let t = tmp[i * n + k];
                if t == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let ukj = u[k * n + j];
                    if ukj != 0.0 {
                        s[i * n + j] += t * ukj;
                    }
                }
            }
        }
    }
    out
}

/// `ε = ‖P ⟨D⟩‖` in the `H^{s*}` operator norm, and the same with the
/// `⟨∂_φ⟩^b` weight.
fn measure(rem: &BlockOperator2x2, b: f64) -> (f64, f64) {
    let bx = rem.lattice();
    let s = bx.s_star();
    let w = rem.jap_d_pow(1.0, Side::Right);
    let e = w.op_norm(s, s).value;
    let eb = w.jap_dphi_pow(b).op_norm(s, s).value;
    (e, eb)
}

fn ad(s: &BlockOperator2x2, a: &BlockOperator2x2) -> Result<BlockOperator2x2> {
    s.compose(a)?.sub(&a.compose(s)?)
}

/// Iteratively conjugate `ω·∂_φ − iE·T` to `ω·∂_φ − iE·D_∞` with `D_∞`
/// diagonal in the even/odd basis and constant in time.
pub fn kam_reduce(
    t: &BlockOperator2x2,
    c_frak: f64,
    mass: f64,
    omega: &[f64],
    cfg: &KamConfig,
    gamma: f64,
    tau: f64,
) -> Result<KamOutcome> {
    let bx = t.lattice();
    let u = parity_basis(bx);
    let band = bx.band_range();
    let b_weight = (6.0 * tau + 6.0).min(bx.k_phi as f64);
    let thr_sum = gamma.powf(cfg.gamma_exp_sum);
    let thr_diff = gamma.powf(cfg.gamma_exp_diff);
    let n = bx.n_j();
    let kx = bx.k_x as i64;
    let id = BlockOperator2x2::identity(bx);

    let mut t_cur = t.clone();
    let (mut nf, mut rem) = normal_form_project(&t_cur, mass, c_frak)?;
    let (e0, eb0) = measure(&rem, b_weight);
    let mut eps_sequence = vec![e0];
    let mut eps_b_sequence = vec![eb0];
    let mut phi_acc = id.clone();
    let mut phi_inv_acc = id.clone();
    let mut steps = Vec::new();
    let mut violations = Vec::new();
    let mut final_structure = t_cur.structure_check();
    let mut converged = e0 <= cfg.tol;

    for step in 0..cfg.max_steps {
        if converged {
            break;
        }
        let n_cut = cfg.n0.powf(1.5f64.powi(step as i32)).round() as usize;
        let mu: Vec<f64> = (-kx..=kx).map(|j| nf.slot_eigenvalue(j)).collect();
        // Generator in the original basis: X = N + P with P = −iE·rem.
        let p_x = rem.generator();
        let mut s_x = BlockOperator2x2::zeros(bx);
        let mut min_div = f64::INFINITY;
        for sg in [PLUS, MINUS] {
            for sp in [PLUS, MINUS] {
                let pr = rotate(&p_x.blocks[sg][sp], &u);
                let mut sr = ToeplitzOperator::zeros(bx);
                let sigma = sigma_sign(sg);
                let sigma_p = sigma_sign(sp);
                for bi in pr.support() {
                    let l = band.vector(bi);
                    let l1 = band.norm1(bi);
                    if l1 > n_cut as i64 {
                        continue;
                    }
                    let wl = band.dot(bi, omega);
                    let jap_l = (l1.max(1) as f64).powf(-tau);
                    let src = pr.slice(bi).unwrap().to_vec();
                    let dst = sr.slice_mut(bi);
                    for a in 0..n {
                        for b in 0..n {
                            let c = src[a * n + b];
                            if c == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let (ja, jb) = (a as i64 - kx, b as i64 - kx);
                            if sg == sp && l1 == 0 && ja.abs() == jb.abs() {
                                continue;
                            }
                            let div = sigma * mu[a] - sigma_p * mu[b] - wl;
                            let thr = if sg == sp { thr_diff } else { thr_sum } * jap_l;
                            if div.abs() < thr {
                                violations.push(MelnikovViolation {
                                    step,
                                    l: l.clone(),
                                    j: ja,
                                    k: jb,
                                    sigma: sigma as i8,
                                    sigma_prime: sigma_p as i8,
                                    divisor: div,
                                    threshold: thr,
                                });
                                continue;
                            }
                            min_div = min_div.min(div.abs());
                            dst[a * n + b] = C64::new(0.0, 1.0) * c / div;
                        }
                    }
                }
                s_x.blocks[sg][sp] = rotate(&sr, &u);
            }
        }
        let nx = nf.to_block(bx).generator();
        // Lie series: X' = N + P + Σ_{k≥1} ad_S^{k−1}(H)/k!, H = [S,N] − ω·∂_φS + [S,P].
        let h = ad(&s_x, &nx)?.sub(&s_x.omega_dphi(omega))?.add(&ad(&s_x, &p_x)?)?;
        let mut x_new = nx.add(&p_x)?;
        let mut term = h;
        for k in 1..60 {
            let m = term.max_abs();
            x_new = x_new.add(&term)?;
            if m <= 1e-20 * (1.0 + x_new.max_abs()) {
                break;
            }
            term = ad(&s_x, &term)?.scale(C64::new(1.0 / (k + 1) as f64, 0.0));
        }
        let t_raw = x_new.ungenerator();
        let rep = t_raw.structure_check_tol(1e-10);
        if !(rep.real_to_real && rep.reversibility_preserving && rep.parity_preserving) {
            return Err(Error::Symmetry(format!("KAM step {step} lost structure: {rep:?}")));
        }
        final_structure = rep;
        t_cur = t_raw.symmetrize(false)?;
        let max_imag = max_imag_normal(&t_raw);
        if max_imag > 1e-10 {
            return Err(Error::Symmetry(format!("normal-form entries not real: {max_imag}")));
        }
        let proj = normal_form_project(&t_cur, mass, c_frak)?;
        nf = proj.0;
        rem = proj.1;
        let phi = expm(&s_x, 1.0)?;
        let phi_inv = expm(&s_x, -1.0)?;
        phi_acc = phi.compose(&phi_acc)?;
        phi_inv_acc = phi_inv_acc.compose(&phi_inv)?;
        let (e, eb) = measure(&rem, b_weight);
        steps.push(KamStep {
            n: step,
            n_cut,
            eps: e,
            eps_b: eb,
            min_divisor: min_div,
            generator_max: s_x.max_abs(),
            structure: rep,
            max_imag_normal: max_imag,
        });
        eps_sequence.push(e);
        eps_b_sequence.push(eb);
        converged = e <= cfg.tol;
    }
    Ok(KamOutcome {
        steps,
        eps_sequence,
        eps_b_sequence,
        normal: nf,
        phi: phi_acc,
        phi_inv: phi_inv_acc,
        t_final: t_cur,
        violations,
        converged,
        final_structure,
    })
}

fn max_imag_normal(t: &BlockOperator2x2) -> f64 {
    let bx = t.lattice();
    let z = vec![0i64; bx.nu];
    let k = bx.k_x as i64;
    let mut m: f64 = 0.0;
    for s in [PLUS, MINUS] {
        for j in -k..=k {
            m = m.max(t.blocks[s][s].entry(&z, j, j).im.abs());
            m = m.max(t.blocks[s][s].entry(&z, j, -j).im.abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_basis_is_involution() {
        let bx = LatticeBox::new(1, 1, 3).unwrap();
        let u = parity_basis(bx);
        let n = bx.n_j();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| u[i * n + k] * u[k * n + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normal_form_input_is_fixed_point() {
        let bx = LatticeBox::new(1, 2, 4).unwrap();
        let mut nf = NormalForm::unperturbed(4, 1.0);
        nf.r_diag[3] = (1e-4, 2e-5);
        let out = kam_reduce(&nf.to_block(bx), 0.0, 1.0, &[0.309], &KamConfig::default(), 0.01, 7.0).unwrap();
        assert!(out.converged && out.steps.is_empty());
        for (a, b) in out.normal.r_diag.iter().zip(&nf.r_diag) {
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
    }
}
