//! Time integration of the truncated complex system, the exact reduced
//! flow, and the brute-force spectral oracle.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::LatticeBox;
use crate::pipeline::{KGCoefficients, ReductionState};
use crate::toeplitz::{dm, BlockOperator2x2, NormalForm, MINUS, PLUS};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    /// Exponential midpoint: the diagonal `iE·D_m` part exact, the rest by
    /// the midpoint rule.
    ExpMidpoint,
    /// Integrating-factor RK4.
    ExpRk4,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionConfig {
    /// Initial time; the run covers `[t_start, t_start + t_final]`.
    pub t_start: f64,
    pub t_final: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub s_report: Vec<f64>,
    /// Time between recorded samples.
    pub sample_every: f64,
    /// Fourier coefficients of `ψ₀` and `v₀`, indexed `j + K_x`.
    #[serde(skip)]
    pub psi0: Vec<C64>,
    #[serde(skip)]
    pub v0: Vec<C64>,
}

impl EvolutionConfig {
    /// Real data `ψ₀ = Σ 2^{−|j|}(1 + ½i·sgn j)e^{ijx}`, `v₀ = 0`.
    pub fn with_default_data(k_x: usize, t_final: f64, dt: f64) -> Self {
        let k = k_x as i64;
        let psi0 = (-k..=k)
            .map(|j| C64::new(1.0, 0.5 * j.signum() as f64) * 0.5f64.powi(j.abs() as i32))
            .collect();
        EvolutionConfig {
            t_start: 0.0,
            t_final,
            dt,
            integrator: Integrator::ExpRk4,
            s_report: vec![2.0, 3.0, 4.0],
            sample_every: (t_final / 200.0).max(dt),
            psi0,
            v0: vec![ZERO; 2 * k_x + 1],
        }
    }
}

/// Dense `x`-space operators of one time-quasi-periodic family.
struct TimeFamily {
    n: usize,
    /// `(ℓ, M_ℓ)` with `M(φ) = Σ M_ℓ e^{iℓ·φ}`, row-major `2n × 2n`.
    slices: Vec<(Vec<i64>, Vec<C64>)>,
}

impl TimeFamily {
    fn from_block(op: &BlockOperator2x2) -> Self {
        let bx = op.lattice();
        let n = bx.n_j();
        let band = bx.band_range();
        let mut slices = Vec::new();
        for bi in 0..band.len() {
            let mut m = vec![ZERO; 4 * n * n];
            let mut any = false;
            for s in [PLUS, MINUS] {
                for t in [PLUS, MINUS] {
                    if let Some(sl) = op.blocks[s][t].slice(bi) {
                        for j in 0..n {
                            for k in 0..n {
                                let v = sl[j * n + k];
                                if v != ZERO {
                                    any = true;
                                    m[(s * n + j) * 2 * n + t * n + k] = v;
                                }
                            }
                        }
                    }
                }
            }
            if any {
                slices.push((band.vector(bi), m));
            }
        }
        TimeFamily { n, slices }
    }

    fn at(&self, phi: &[f64]) -> Vec<C64> {
        let d = 2 * self.n;
        let mut out = vec![ZERO; d * d];
        for (l, m) in &self.slices {
            let arg: f64 = l.iter().zip(phi).map(|(&a, &b)| a as f64 * b).sum();
            let e = C64::from_polar(1.0, arg);
            for (o, v) in out.iter_mut().zip(m) {
                *o += v * e;
            }
        }
        out
    }
}

fn matvec(m: &[C64], v: &[C64]) -> Vec<C64> {
    let d = v.len();
    (0..d)
        .map(|i| {
            let row = &m[i * d..(i + 1) * d];
            row.iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a * b)
        })
        .collect()
}

fn axpy(a: &[C64], h: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y * h).collect()
}

/// `ψ = D_m⁻¹(u + ū)/√2`, `v = i(u − ū)/√2`.
pub fn to_real(u: &[C64], mass: f64, k_x: usize) -> (Vec<C64>, Vec<C64>) {
    let n = 2 * k_x + 1;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let psi = (0..n)
        .map(|jj| (u[jj] + u[n + jj]) * (r / dm(jj as f64 - k_x as f64, mass)))
        .collect();
    let v = (0..n).map(|jj| (u[jj] - u[n + jj]) * C64::new(0.0, r)).collect();
    (psi, v)
}

/// `u = (D_mψ − iv)/√2`, `ū = (D_mψ + iv)/√2`.
pub fn to_complex(psi: &[C64], v: &[C64], mass: f64, k_x: usize) -> Vec<C64> {
    let n = 2 * k_x + 1;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = vec![ZERO; 2 * n];
    for jj in 0..n {
        let d = dm(jj as f64 - k_x as f64, mass);
        let iv = C64::new(0.0, 1.0) * v[jj];
        u[jj] = (psi[jj] * d - iv) * r;
        u[n + jj] = (psi[jj] * d + iv) * r;
    }
    u
}

/// `(Σ ⟨j⟩^{2s}|c_j|²)^{1/2}`, `⟨j⟩ = max(1,|j|)`.
pub fn sobolev_x(c: &[C64], s: f64) -> f64 {
    let k = (c.len() / 2) as i64;
    c.iter()
        .enumerate()
        .map(|(jj, z)| ((jj as i64 - k).abs().max(1) as f64).powf(2.0 * s) * z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub s_values: Vec<f64>,
    /// Per sample, per `s`: `‖ψ‖_{H^{s+1}} + ‖∂_tψ‖_{H^s}`.
    pub norms: Vec<Vec<f64>>,
    /// Per sample, per `s`: `(‖u‖²_{H^s} + ‖ū‖²_{H^s})^{1/2}`, conserved by the free flow.
    pub energy: Vec<Vec<f64>>,
    #[serde(skip)]
    pub states: Vec<Vec<C64>>,
    pub steps: usize,
}

impl Trajectory {
    /// `sup_t N_s(t) / N_s(0)` per `s`.
    pub fn sup_ratios(&self) -> Vec<f64> {
        sup_ratio(&self.norms, self.s_values.len())
    }

    /// `sup_t E_s(t) / E_s(0)` per `s`.
    pub fn sup_energy_ratios(&self) -> Vec<f64> {
        sup_ratio(&self.energy, self.s_values.len())
    }
}

fn sup_ratio(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| rows.iter().map(|r| r[i]).fold(0.0, f64::max) / rows[0][i])
        .collect()
}

/// `(‖u‖²_{H^s} + ‖ū‖²_{H^s})^{1/2}` of a stacked state.
pub fn energy_norm(u: &[C64], s: f64) -> f64 {
    let n = u.len() / 2;
    sobolev_x(&u[..n], s).hypot(sobolev_x(&u[n..], s))
}

impl Trajectory {
}

/// `(ψ, ∂_tψ)` norms from the complex state and its time derivative.
fn real_norms(u: &[C64], du: &[C64], mass: f64, k_x: usize, s_values: &[f64]) -> Vec<f64> {
    let (psi, _) = to_real(u, mass, k_x);
    let (psi_t, _) = to_real(du, mass, k_x);
    s_values.iter().map(|&s| sobolev_x(&psi, s + 1.0) + sobolev_x(&psi_t, s)).collect()
}

/// Integrate `∂_tU = iE𝔇(ωt)U` on the truncated box.
pub fn evolve_original(c: &KGCoefficients, omega: &[f64], cfg: &EvolutionConfig) -> Result<Trajectory> {
    let bx = c.lattice();
    let mass = c.mass;
    let t0 = system_operator(c)?;
    let fam = TimeFamily::from_block(&t0.ungenerator());
    let u0 = to_complex(&cfg.psi0, &cfg.v0, mass, bx.k_x);
    evolve_family(&fam, bx, mass, omega, cfg, u0, |_, _| {})
}

/// `T₀ = D_m𝕀 + 𝟏⊗P`, without the pipeline state.
pub fn system_operator(c: &KGCoefficients) -> Result<BlockOperator2x2> {
    let bx = c.lattice();
    let d = crate::toeplitz::ToeplitzOperator::multiplier(bx, |j| C64::new(dm(j as f64, c.mass), 0.0));
    let p = c.perturbation()?;
    Ok(BlockOperator2x2::from_blocks(d.add(&p)?, p.clone(), p.conj_op(), d.add(&p.conj_op())?))
}

fn evolve_family(
    fam: &TimeFamily,
    bx: LatticeBox,
    mass: f64,
    omega: &[f64],
    cfg: &EvolutionConfig,
    u0: Vec<C64>,
    mut observe: impl FnMut(f64, &[C64]),
) -> Result<Trajectory> {
    let n = bx.n_j();
    let d = 2 * n;
    let kx = bx.k_x;
    let lin: Vec<f64> = (0..d)
        .map(|i| {
            let sg = if i < n { 1.0 } else { -1.0 };
            sg * dm((i % n) as f64 - kx as f64, mass)
        })
        .collect();
    let max_lin = lin.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if !(cfg.dt > 0.0 && cfg.t_final >= 0.0) {
        return Err(Error::InvalidParameter("dt must be positive and T ≥ 0".into()));
    }
    if cfg.integrator == Integrator::Rk4 && cfg.dt * max_lin > 0.1 {
        return Err(Error::InvalidParameter(format!(
            "dt·max|D_m| = {} exceeds 0.1",
            cfg.dt * max_lin
        )));
    }
    // Perturbation part: iE·T(φ) minus the diagonal iE·D_m.
    let pert = |phi: &[f64]| -> Vec<C64> {
        let mut m = fam.at(phi);
        for i in 0..d {
            m[i * d + i] -= C64::new(0.0, lin[i]);
        }
        m
    };
    let phase = |h: f64| -> Vec<C64> { lin.iter().map(|&l| C64::from_polar(1.0, l * h)).collect() };
    let mul_diag = |e: &[C64], v: &[C64]| -> Vec<C64> { e.iter().zip(v).map(|(a, b)| a * b).collect() };
    let full_rhs = |t: f64, u: &[C64]| -> Vec<C64> {
        let phi: Vec<f64> = omega.iter().map(|w| w * t).collect();
        matvec(&fam.at(&phi), u)
    };

    let nsteps = (cfg.t_final / cfg.dt).round() as usize;
    let h = if nsteps > 0 { cfg.t_final / nsteps as f64 } else { cfg.dt };
    let e1 = phase(h);
    let e2 = phase(h / 2.0);
    let sample_stride = ((cfg.sample_every / h).round() as usize).max(1);
    let mut u = u0;
    let mut times = Vec::new();
    let mut norms = Vec::new();
    let mut energy = Vec::new();
    let mut states = Vec::new();
    let record = |t: f64, u: &[C64], times: &mut Vec<f64>, norms: &mut Vec<Vec<f64>>, energy: &mut Vec<Vec<f64>>, states: &mut Vec<Vec<C64>>| {
        let du = full_rhs(t, u);
        times.push(t);
        norms.push(real_norms(u, &du, mass, kx, &cfg.s_report));
        energy.push(cfg.s_report.iter().map(|&s| energy_norm(u, s)).collect());
        states.push(u.to_vec());
    };
    let t_start = cfg.t_start;
    record(t_start, &u, &mut times, &mut norms, &mut energy, &mut states);
    observe(t_start, &u);
    let n0 = sobolev_x(&u, 1.0);
    for step in 0..nsteps {
        let t = t_start + step as f64 * h;
        let ph = |tt: f64| -> Vec<f64> { omega.iter().map(|w| w * tt).collect() };
        u = match cfg.integrator {
            Integrator::Rk4 => {
                let k1 = full_rhs(t, &u);
                let k2 = full_rhs(t + h / 2.0, &axpy(&u, h / 2.0, &k1));
                let k3 = full_rhs(t + h / 2.0, &axpy(&u, h / 2.0, &k2));
                let k4 = full_rhs(t + h, &axpy(&u, h, &k3));
                (0..d).map(|i| u[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0)).collect()
            }
            Integrator::ExpMidpoint => {
                let a0 = pert(&ph(t));
                let am = pert(&ph(t + h / 2.0));
                let half = mul_diag(&e2, &axpy(&u, h / 2.0, &matvec(&a0, &u)));
                let k = mul_diag(&e2, &matvec(&am, &half));
                axpy(&mul_diag(&e1, &u), h, &k)
            }
            Integrator::ExpRk4 => {
                let a0 = pert(&ph(t));
                let am = pert(&ph(t + h / 2.0));
                let a1 = pert(&ph(t + h));
                let k1 = matvec(&a0, &u);
                let e2u = mul_diag(&e2, &u);
                let k2 = matvec(&am, &mul_diag(&e2, &axpy(&u, h / 2.0, &k1)));
                let k3 = matvec(&am, &axpy(&e2u, h / 2.0, &k2));
                let k4 = matvec(&a1, &axpy(&mul_diag(&e1, &u), h, &mul_diag(&e2, &k3)));
                let e1k1 = mul_diag(&e1, &k1);
                let e2k23 = mul_diag(&e2, &axpy(&k2, 1.0, &k3));
                (0..d)
                    .map(|i| e1[i] * u[i] + (e1k1[i] + e2k23[i] * 2.0 + k4[i]) * (h / 6.0))
                    .collect()
            }
        };
        let tn = t_start + (step + 1) as f64 * h;
        if (step + 1) % sample_stride == 0 || step + 1 == nsteps {
            let r = sobolev_x(&u, 1.0) / n0;
            if !r.is_finite() || r > 1e6 {
                return Err(Error::Blowup { t: tn, ratio: r });
            }
            record(tn, &u, &mut times, &mut norms, &mut energy, &mut states);
            observe(tn, &u);
        }
    }
    Ok(Trajectory {
        times,
        s_values: cfg.s_report.clone(),
        norms,
        energy,
        states,
        steps: nsteps,
    })
}

/// `e^{iE·D_∞ t} z₀`, exact: `D_∞` couples `j` and `−j` through
/// `[[d, e], [e, d]]`, diagonal in the even/odd basis.
pub fn reduced_flow(nf: &NormalForm, z0: &[C64], t: f64) -> Vec<C64> {
    let k = nf.k_x() as i64;
    let n = (2 * k + 1) as usize;
    let mut z = vec![ZERO; 2 * n];
    for (blk, sg) in [(0usize, 1.0), (1usize, -1.0)] {
        let off = blk * n;
        for j in 0..=k {
            let (rd, re) = nf.r_diag[j as usize];
            let dd = (1.0 + nf.c_frak) * dm(j as f64, nf.mass) + rd;
            let ph = C64::from_polar(1.0, sg * dd * t);
            let a = (j + k) as usize;
            if j == 0 {
                z[off + a] = ph * z0[off + a];
                continue;
            }
            let b = (-j + k) as usize;
            let c = (sg * re * t).cos();
            let s = C64::new(0.0, (sg * re * t).sin());
            z[off + a] = ph * (z0[off + a] * c + z0[off + b] * s);
            z[off + b] = ph * (z0[off + a] * s + z0[off + b] * c);
        }
    }
    z
}

/// Reduced trajectory: norms of `e^{iE·D_∞ t}z₀` at the given times.
pub fn evolve_reduced(nf: &NormalForm, z0: &[C64], times: &[f64], s: f64) -> Vec<f64> {
    times.iter().map(|&t| sobolev_x(&reduced_flow(nf, z0, t), s)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyCheck {
    pub times: Vec<f64>,
    /// `‖𝔉(ωt)U(t) − e^{iE·D_∞t}𝔉(0)U(0)‖ / ‖U(0)‖` at each sample.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub trajectory: Trajectory,
}

/// Integrate the original system and compare `𝔉(ωt)U(t)` against the
/// exact reduced flow.
pub fn conjugacy_check(st: &ReductionState, cfg: &EvolutionConfig) -> Result<ConjugacyCheck> {
    let bx = st.lattice();
    let mass = st.coeffs.mass;
    let fam = TimeFamily::from_block(&st.t0.ungenerator());
    let ff = TimeFamily::from_block(&st.f);
    let u0 = to_complex(&cfg.psi0, &cfg.v0, mass, bx.k_x);
    let phi0: Vec<f64> = st.omega.iter().map(|w| w * cfg.t_start).collect();
    let w0 = matvec(&ff.at(&phi0), &u0);
    let scale = u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut times = Vec::new();
    let mut errors = Vec::new();
    let omega = st.omega.clone();
    let traj = evolve_family(&fam, bx, mass, &omega, cfg, u0, |t, u| {
        let phi: Vec<f64> = omega.iter().map(|w| w * t).collect();
        let w = matvec(&ff.at(&phi), u);
        let r = reduced_flow(&st.normal, &w0, t - cfg.t_start);
        let e = w.iter().zip(&r).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / scale;
        times.push(t);
        errors.push(e);
    })?;
    let max_error = errors.iter().cloned().fold(0.0, f64::max);
    Ok(ConjugacyCheck {
        times,
        errors,
        max_error,
        trajectory: traj,
    })
}

pub const DIMENSION_CAP: usize = 8000;

/// Eigenvalues of `ω·∂_φ − iE·T₀` on the flattened `(ℓ, σ, j)` box.
pub fn brute_force_spectrum(t0: &BlockOperator2x2, omega: &[f64], cap: usize) -> Result<Vec<C64>> {
    let bx = t0.lattice();
    let lr = bx.l_range();
    let band = bx.band_range();
    let n = bx.n_j();
    let blk = 2 * n;
    let dim = lr.len() * blk;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let x = t0.generator();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for a in 0..lr.len() {
        let la = lr.vector(a);
        let wl = lr.dot(a, omega);
        for i in 0..blk {
            m[(a * blk + i, a * blk + i)] += C64::new(0.0, wl);
        }
        for b in 0..lr.len() {
            let lb = lr.vector(b);
            let diff: Vec<i64> = la.iter().zip(&lb).map(|(p, q)| p - q).collect();
            let Some(bi) = band.index(&diff) else { continue };
            for s in [PLUS, MINUS] {
                for t in [PLUS, MINUS] {
                    if let Some(sl) = x.blocks[s][t].slice(bi) {
                        for j in 0..n {
                            for k in 0..n {
                                let v = sl[j * n + k];
                                if v != ZERO {
                                    m[(a * blk + s * n + j, b * blk + t * n + k)] += v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    m.eigenvalues()
        .map_err(|e| Error::NoConvergence { what: format!("dense eigenvalues: {e:?}"), iterations: 0, residual: f64::NAN })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralComparison {
    pub matched: usize,
    pub max_relative_mismatch: f64,
    /// Worst predicted value and its match.
    pub worst: Option<(f64, f64)>,
    /// Largest `min |λ + conj λ'|` over computed eigenvalues: reversibility pairing defect.
    pub pairing_defect: f64,
}

/// Match `i(ω·ℓ − σλ_j)` for `|ℓ| ≤ l_int`, `|j| ≤ j_int` to the computed
/// spectrum, nearest unused eigenvalue first, and report the worst relative mismatch.
pub fn compare_spectrum(
    computed: &[C64],
    nf: &NormalForm,
    omega: &[f64],
    bx: LatticeBox,
    l_int: usize,
    j_int: usize,
) -> SpectralComparison {
    let lr = bx.l_range();
    let mut predicted = Vec::new();
    for li in 0..lr.len() {
        if lr.norm1(li) as usize > l_int {
            continue;
        }
        let wl = lr.dot(li, omega);
        for j in -(j_int as i64)..=j_int as i64 {
            let mu = nf.slot_eigenvalue(j);
            for sg in [1.0, -1.0] {
                predicted.push(wl - sg * mu);
            }
        }
    }
    predicted.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut used = vec![false; computed.len()];
    let mut worst: Option<(f64, f64)> = None;
    let mut max_rel: f64 = 0.0;
    for &p in &predicted {
        let target = C64::new(0.0, p);
        let best = (0..computed.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| (computed[a] - target).norm().total_cmp(&(computed[b] - target).norm()));
        if let Some(i) = best {
            used[i] = true;
            let rel = (computed[i] - target).norm() / p.abs().max(1e-300);
            if rel > max_rel {
                max_rel = rel;
                worst = Some((p, computed[i].im));
            }
        }
    }
    let pairing_defect = computed
        .iter()
        .map(|z| computed.iter().map(|w| (z + w.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    SpectralComparison {
        matched: predicted.len(),
        max_relative_mismatch: max_rel,
        worst,
        pairing_defect,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub omega: Vec<f64>,
    pub in_set: bool,
    pub s_values: Vec<f64>,
    pub sup_ratios: Vec<f64>,
    pub sup_energy_ratios: Vec<f64>,
    pub conjugacy_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub t_final: f64,
    pub rows: Vec<StabilityRow>,
}

pub fn stability_row(omega: &[f64], in_set: bool, traj: &Trajectory, conjugacy_error: Option<f64>) -> StabilityRow {
    StabilityRow {
        omega: omega.to_vec(),
        in_set,
        s_values: traj.s_values.clone(),
        sup_ratios: traj.sup_ratios(),
        sup_energy_ratios: traj.sup_energy_ratios(),
        conjugacy_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx() -> LatticeBox {
        LatticeBox::new(1, 2, 6).unwrap()
    }

    #[test]
    fn real_complex_round_trip() {
        let cfg = EvolutionConfig::with_default_data(6, 1.0, 0.01);
        let u = to_complex(&cfg.psi0, &cfg.v0, 1.0, 6);
        let (p, v) = to_real(&u, 1.0, 6);
        for (a, b) in p.iter().zip(&cfg.psi0) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(v.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn free_flow_preserves_norms() {
        let c = KGCoefficients::zeros(bx(), 1.0).unwrap();
        let mut cfg = EvolutionConfig::with_default_data(6, 100.0, 1e-2);
        cfg.sample_every = 10.0;
        let tr = evolve_original(&c, &[0.3141592653589793], &cfg).unwrap();
        for r in tr.sup_energy_ratios() {
            assert!((r - 1.0).abs() < 1e-12, "{r}");
        }
        for r in tr.sup_ratios() {
            assert!((1.0..1.5).contains(&r), "{r}");
        }
    }

    fn free_drift(integrator: Integrator, dt: f64, t: f64) -> f64 {
        let c = KGCoefficients::zeros(bx(), 1.0).unwrap();
        let mut cfg = EvolutionConfig::with_default_data(6, t, dt);
        cfg.integrator = integrator;
        cfg.sample_every = t;
        let tr = evolve_original(&c, &[0.3141592653589793], &cfg).unwrap();
        tr.energy.iter().map(|e| (e[0] / tr.energy[0][0] - 1.0).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rk4_energy_drift_and_order() {
        assert!(free_drift(Integrator::Rk4, 1e-3, 100.0) <= 1e-8);
        let coarse = free_drift(Integrator::Rk4, 1e-2, 100.0);
        let fine = free_drift(Integrator::Rk4, 5e-3, 100.0);
        assert!(coarse >= 8.0 * fine, "{coarse} {fine}");
        assert!(free_drift(Integrator::ExpRk4, 1e-2, 100.0) <= 1e-13);
        assert!(free_drift(Integrator::ExpMidpoint, 1e-2, 100.0) <= 1e-13);
    }

    #[test]
    fn rk4_step_bound_is_enforced() {
        let c = KGCoefficients::zeros(bx(), 1.0).unwrap();
        let mut cfg = EvolutionConfig::with_default_data(6, 1.0, 0.05);
        cfg.integrator = Integrator::Rk4;
        assert!(matches!(evolve_original(&c, &[0.3], &cfg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn integrators_agree_on_a_perturbed_run() {
        let c = KGCoefficients::reference(bx(), 1e-2, 1.0).unwrap();
        let run = |i: Integrator, dt: f64| {
            let mut cfg = EvolutionConfig::with_default_data(6, 10.0, dt);
            cfg.integrator = i;
            cfg.sample_every = 10.0;
            evolve_original(&c, &[0.3141592653589793], &cfg).unwrap().states.pop().unwrap()
        };
        let reference = run(Integrator::ExpRk4, 2.5e-3);
        for (i, dt, tol) in [(Integrator::Rk4, 5e-3, 1e-7), (Integrator::ExpMidpoint, 2.5e-3, 1e-4)] {
            let u = run(i, dt);
            let e = u.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(e < tol, "{i:?}: {e}");
        }
    }

    #[test]
    fn single_mode_reduced_flow_is_a_phase() {
        let nf = NormalForm::unperturbed(3, 1.0);
        let mut z0 = vec![ZERO; 14];
        z0[3 + 2] = C64::new(0.5, 0.0);
        let z = reduced_flow(&nf, &z0, 7.0);
        assert!((z[5] - C64::from_polar(0.5, 5f64.sqrt() * 7.0)).norm() < 1e-15);
        assert!(z.iter().enumerate().all(|(i, v)| i == 5 || v.norm() == 0.0));
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let c = KGCoefficients::zeros(bx(), 1.0).unwrap();
        let t0 = system_operator(&c).unwrap();
        assert!(matches!(brute_force_spectrum(&t0, &[0.3], 10), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn free_spectrum_is_exact() {
        let c = KGCoefficients::zeros(bx(), 1.0).unwrap();
        let t0 = system_operator(&c).unwrap();
        let om = [0.3141592653589793];
        let ev = brute_force_spectrum(&t0, &om, DIMENSION_CAP).unwrap();
        let nf = NormalForm::unperturbed(6, 1.0);
        let cmp = compare_spectrum(&ev, &nf, &om, bx(), 2, 6);
        assert!(cmp.max_relative_mismatch < 1e-12, "{cmp:?}");
        assert!(cmp.pairing_defect < 1e-12);
    }

    #[test]
    fn reduced_flow_is_unitary() {
        let mut nf = NormalForm::unperturbed(4, 1.0);
        nf.r_diag[2] = (1e-3, 4e-4);
        let z0: Vec<C64> = (0..18).map(|i| C64::new(i as f64, 1.0)).collect();
        let n0 = sobolev_x(&z0[..9], 2.0);
        let z = reduced_flow(&nf, &z0, 1234.5);
        assert!((sobolev_x(&z[..9], 2.0) - n0).abs() < 1e-12 * n0);
    }
}
