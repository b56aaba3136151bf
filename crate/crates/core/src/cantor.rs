//! Resonant sets in the frequency cube `[−½, ½]^ν` and estimates of
//! their measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::MultiRange;
use crate::toeplitz::{dm, NormalForm};

/// Where the eigenvalues `μ_{j,η}` entering the second Melnikov conditions come from.
#[derive(Clone, Debug, Serialize)]
pub enum EigenSource {
    /// `μ_j = (1+𝔠)D_m(j)`, one branch.
    Unperturbed { c_frak: f64, mass: f64 },
    /// Both branches `λ_{j,±}` of a computed normal form.
    Normal(NormalForm),
}

impl EigenSource {
    /// `(j, η, μ)` for `0 ≤ j ≤ j_max`.
    fn table(&self, j_max: usize) -> Vec<(i64, i8, f64)> {
        match self {
            EigenSource::Unperturbed { c_frak, mass } => (0..=j_max)
                .map(|j| (j as i64, 1, (1.0 + c_frak) * dm(j as f64, *mass)))
                .collect(),
            EigenSource::Normal(nf) => {
                let mut v = Vec::new();
                for ev in nf.eigenvalues() {
                    let j = ev.j as i64;
                    if ev.j > j_max {
                        break;
                    }
                    v.push((j, 1, ev.plus));
                    if let Some(m) = ev.minus {
                        v.push((j, -1, m));
                    }
                }
                if nf.k_x() < j_max {
                    let c = nf.c_frak;
                    for j in nf.k_x() + 1..=j_max {
                        v.push((j as i64, 1, (1.0 + c) * dm(j as f64, nf.mass)));
                    }
                }
                v
            }
        }
    }

    fn c_frak(&self) -> f64 {
        match self {
            EigenSource::Unperturbed { c_frak, .. } => *c_frak,
            EigenSource::Normal(nf) => nf.c_frak,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyWindow {
    pub nu: usize,
    pub gamma: f64,
    pub tau: f64,
    pub l_max: usize,
    pub j_max: usize,
    pub gamma_exp_diff: f64,
    pub eigen: EigenSource,
}

impl FrequencyWindow {
    /// `J_max = max(k_x, ⌈2(1+√ν)·L_max⌉)`.
    pub fn new(nu: usize, gamma: f64, tau: f64, l_max: usize, k_x: usize, eigen: EigenSource) -> Result<Self> {
        if !(gamma >= 0.0 && gamma < 0.5) {
            return Err(Error::InvalidParameter(format!("γ must lie in [0, 1/2), got {gamma}")));
        }
        if nu == 0 || l_max == 0 {
            return Err(Error::InvalidParameter("ν and L_max must be ≥ 1".into()));
        }
        let c = 2.0 * (1.0 + (nu as f64).sqrt());
        Ok(FrequencyWindow {
            nu,
            gamma,
            tau,
            l_max,
            j_max: k_x.max((c * l_max as f64).ceil() as usize),
            gamma_exp_diff: 1.5,
            eigen,
        })
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        FrequencyWindow { gamma, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ResonantSet {
    /// `|ω·ℓ| < 2γ|ℓ|^{−ν}`.
    Q0,
    /// `|ω·ℓ − (1+𝔠)j| < 2γ⟨ℓ⟩^{−τ}`.
    First,
    /// `|ω·ℓ + μ_j + μ_k| < 2γ⟨ℓ⟩^{−τ}`.
    SecondSum,
    /// `|ω·ℓ + μ_j − μ_k| < 2γ^{3/2}⟨ℓ⟩^{−τ}`.
    SecondDiff,
}

impl ResonantSet {
    pub const ALL: [ResonantSet; 4] = [ResonantSet::Q0, ResonantSet::First, ResonantSet::SecondSum, ResonantSet::SecondDiff];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub set: ResonantSet,
    pub l: Vec<i64>,
    pub j: i64,
    pub k: i64,
    pub eta: i8,
    pub divisor: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CantorVerdict {
    pub ok: bool,
    pub witness: Option<Witness>,
}

/// Precomputed tables for repeated membership tests.
struct Tables {
    lr: MultiRange,
    /// Indices of `ℓ` with the first nonzero component positive; `−ℓ` is
    /// covered by symmetry of the conditions.
    half: Vec<usize>,
    mu: Vec<(i64, i8, f64)>,
    sums: Vec<(f64, usize, usize)>,
    diffs: Vec<(f64, usize, usize)>,
}

fn tables(w: &FrequencyWindow) -> Tables {
    let lr = MultiRange::new(w.nu, w.l_max);
    let half = (0..lr.len())
        .filter(|&i| {
            let v = lr.vector(i);
            v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
        })
        .collect();
    let mu = w.eigen.table(w.j_max);
    // Only combinations within reach of |ω·ℓ| ≤ |ℓ|₁/2 plus one can resonate.
    let reach = w.l_max as f64 * w.nu as f64 / 2.0 + 1.0;
    let mut sums = Vec::new();
    let mut diffs = Vec::new();
    for a in 0..mu.len() {
        for b in 0..mu.len() {
            let s = mu[a].2 + mu[b].2;
            if a <= b && s <= reach {
                sums.push((s, a, b));
            }
            let d = mu[a].2 - mu[b].2;
            if a != b && d.abs() <= reach {
                diffs.push((d, a, b));
            }
        }
    }
    Tables { lr, half, mu, sums, diffs }
}

fn check(w: &FrequencyWindow, t: &Tables, omega: &[f64]) -> CantorVerdict {
    let g = w.gamma;
    let c1 = 1.0 + w.eigen.c_frak();
    let gd = g.powf(w.gamma_exp_diff);
    let fail = |set, l: Vec<i64>, j, k, eta, divisor: f64, threshold| CantorVerdict {
        ok: false,
        witness: Some(Witness { set, l, j, k, eta, divisor, threshold }),
    };
    for &li in &t.half {
        let wl = t.lr.dot(li, omega);
        let l1 = t.lr.norm1(li) as f64;
        let thr0 = 2.0 * g * l1.powf(-(w.nu as f64));
        if wl.abs() < thr0 {
            return fail(ResonantSet::Q0, t.lr.vector(li), 0, 0, 1, wl, thr0);
        }
        let thr = 2.0 * g * l1.max(1.0).powf(-w.tau);
        // First Melnikov: j ≠ 0 nearest to ω·ℓ/(1+𝔠), both signs of j.
        let jc = (wl / c1).round() as i64;
        for j in [jc - 1, jc, jc + 1] {
            if j == 0 || j.unsigned_abs() as usize > w.j_max {
                continue;
            }
            let d = wl - c1 * j as f64;
            if d.abs() < thr {
                return fail(ResonantSet::First, t.lr.vector(li), j, 0, 1, d, thr);
            }
        }
        for &(s, a, b) in &t.sums {
            for sign in [1.0, -1.0] {
                let d = sign * wl + s;
                if d.abs() < thr {
                    return fail(ResonantSet::SecondSum, t.lr.vector(li), t.mu[a].0, t.mu[b].0, t.mu[a].1, d, thr);
                }
            }
        }
        let thr_d = 2.0 * gd * l1.max(1.0).powf(-w.tau);
        for &(dd, a, b) in &t.diffs {
            let d = wl + dd;
            if d.abs() < thr_d {
                return fail(ResonantSet::SecondDiff, t.lr.vector(li), t.mu[a].0, t.mu[b].0, t.mu[a].1, d, thr_d);
            }
        }
    }
    // ℓ = 0: only the time-independent second conditions remain.
    let thr = 2.0 * g;
    for &(s, a, b) in &t.sums {
        if s < thr {
            return fail(ResonantSet::SecondSum, vec![0; w.nu], t.mu[a].0, t.mu[b].0, t.mu[a].1, s, thr);
        }
    }
    for &(dd, a, b) in &t.diffs {
        if t.mu[a].0 != t.mu[b].0 && dd.abs() < 2.0 * gd {
            return fail(ResonantSet::SecondDiff, vec![0; w.nu], t.mu[a].0, t.mu[b].0, t.mu[a].1, dd, 2.0 * gd);
        }
    }
    CantorVerdict { ok: true, witness: None }
}

/// Membership of `ω` in the truncated Cantor set.
pub fn in_cantor(omega: &[f64], w: &FrequencyWindow) -> Result<CantorVerdict> {
    if omega.len() != w.nu {
        return Err(Error::InvalidParameter(format!("ω has {} components, ν = {}", omega.len(), w.nu)));
    }
    Ok(check(w, &tables(w), omega))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum Sampler {
    MonteCarlo { n: usize, seed: u64 },
    /// Halton sequence, bases `2, 3, 5, …`.
    Halton { n: usize },
}

impl Sampler {
    pub fn len(&self) -> usize {
        match *self {
            Sampler::MonteCarlo { n, .. } | Sampler::Halton { n } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points of `[−½, ½]^ν` in a fixed order.
    pub fn points(&self, nu: usize) -> Vec<Vec<f64>> {
        match *self {
            Sampler::MonteCarlo { n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| (0..nu).map(|_| rng.random::<f64>() - 0.5).collect()).collect()
            }
            Sampler::Halton { n } => {
                const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
                (1..=n as u64)
                    .map(|i| (0..nu).map(|d| radical_inverse(i, PRIMES[d % PRIMES.len()]) - 0.5).collect())
                    .collect()
            }
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureEstimate {
    pub gamma: f64,
    pub samples: usize,
    pub excluded_fraction: f64,
    /// Binomial standard error.
    pub sigma: f64,
    /// Exclusions attributed to the first failing set, in [`ResonantSet::ALL`] order.
    pub per_set: [usize; 4],
    /// Smallest `|ω·ℓ|·|ℓ|^ν/(2γ)` over accepted samples with `|ℓ|` just
    /// beyond the cutoff; values below one would be missed exclusions.
    pub tail_margin: f64,
}

/// Monte Carlo or quasi-random estimate of `|Λ ∖ 𝒪|`.
pub fn measure_estimate(w: &FrequencyWindow, sampler: Sampler) -> Result<MeasureEstimate> {
    if sampler.is_empty() {
        return Err(Error::InvalidParameter("sampler needs at least one point".into()));
    }
    let t = tables(w);
    let pts = sampler.points(w.nu);
    let tail = MultiRange::new(w.nu, w.l_max + 1);
    let verdicts: Vec<(Option<ResonantSet>, f64)> = pts
        .par_iter()
        .map(|om| {
            let v = check(w, &t, om);
            let set = v.witness.map(|x| x.set);
            let margin = if set.is_none() && w.gamma > 0.0 {
                (0..tail.len())
                    .filter(|&i| tail.norm_inf(i) as usize == w.l_max + 1)
                    .map(|i| tail.dot(i, om).abs() * (tail.norm1(i) as f64).powf(w.nu as f64) / (2.0 * w.gamma))
                    .fold(f64::INFINITY, f64::min)
            } else {
                f64::INFINITY
            };
            (set, margin)
        })
        .collect();
    let mut per_set = [0usize; 4];
    let mut tail_margin = f64::INFINITY;
    for (s, m) in &verdicts {
        if let Some(s) = s {
            per_set[s.index()] += 1;
        }
        tail_margin = tail_margin.min(*m);
    }
    let n = pts.len();
    let ex = per_set.iter().sum::<usize>() as f64 / n as f64;
    Ok(MeasureEstimate {
        gamma: w.gamma,
        samples: n,
        excluded_fraction: ex,
        sigma: (ex * (1.0 - ex) / n as f64).sqrt(),
        per_set,
        tail_margin,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaSweep {
    pub estimates: Vec<MeasureEstimate>,
    /// Slope of `log(excluded)` against `log γ`.
    pub slope: Option<f64>,
    /// `C` in `excluded ≈ Cγ`, least squares through the origin.
    pub fitted_c: f64,
}

pub fn gamma_sweep(w: &FrequencyWindow, gammas: &[f64], sampler: Sampler) -> Result<GammaSweep> {
    let estimates = gammas
        .iter()
        .map(|&g| measure_estimate(&w.with_gamma(g), sampler))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.excluded_fraction > 0.0)
        .map(|e| (e.gamma.ln(), e.excluded_fraction.ln()))
        .collect();
    let num: f64 = estimates.iter().map(|e| e.gamma * e.excluded_fraction).sum();
    let den: f64 = estimates.iter().map(|e| e.gamma * e.gamma).sum();
    Ok(GammaSweep {
        estimates,
        slope: crate::diffeo::fit_slope(&pts),
        fitted_c: if den > 0.0 { num / den } else { 0.0 },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleSetCheck {
    pub l: Vec<i64>,
    pub estimate: f64,
    pub exact: f64,
    pub sigma: f64,
}

/// Fraction of samples in `Q⁽⁰⁾_ℓ = {|ω·ℓ| < 2γ|ℓ|^{−ν}}` for one `ℓ`, with the
/// exact value when `ν = 1`.
pub fn single_set_estimate(l: &[i64], gamma: f64, sampler: Sampler) -> Result<SingleSetCheck> {
    let nu = l.len();
    let l1: i64 = l.iter().map(|c| c.abs()).sum();
    if l1 == 0 {
        return Err(Error::InvalidParameter("ℓ must be nonzero".into()));
    }
    let thr = 2.0 * gamma * (l1 as f64).powf(-(nu as f64));
    let pts = sampler.points(nu);
    let hits = pts
        .par_iter()
        .filter(|om| om.iter().zip(l).map(|(w, &c)| w * c as f64).sum::<f64>().abs() < thr)
        .count();
    let n = pts.len() as f64;
    let p = hits as f64 / n;
    let exact = if nu == 1 {
        (2.0 * thr / l1 as f64).min(1.0)
    } else {
        f64::NAN
    };
    let pe = if exact.is_finite() { exact } else { p };
    Ok(SingleSetCheck {
        l: l.to_vec(),
        estimate: p,
        exact,
        sigma: (pe * (1.0 - pe) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(gamma: f64) -> FrequencyWindow {
        FrequencyWindow::new(1, gamma, 7.0, 8, 12, EigenSource::Unperturbed { c_frak: 0.0, mass: 1.0 }).unwrap()
    }

    #[test]
    fn zero_gamma_accepts_everything() {
        let w = window(0.0);
        for om in [0.0, 0.25, 0.5, -0.41] {
            assert!(in_cantor(&[om], &w).unwrap().ok);
        }
    }

    #[test]
    fn resonant_frequency_rejected_by_q0() {
        let v = in_cantor(&[0.0], &window(0.01)).unwrap();
        assert!(!v.ok);
        assert_eq!(v.witness.unwrap().set, ResonantSet::Q0);
    }

    #[test]
    fn reference_frequency_accepted() {
        let v = in_cantor(&[0.3141592653589793], &window(0.01)).unwrap();
        assert!(v.ok, "{v:?}");
    }

    #[test]
    fn single_set_exact_length() {
        let c = single_set_estimate(&[3], 0.01, Sampler::MonteCarlo { n: 100_000, seed: 7 }).unwrap();
        assert!((c.exact - 4.0 * 0.01 / 9.0).abs() < 1e-15);
        assert!((c.estimate - c.exact).abs() <= 3.0 * c.sigma);
    }

    #[test]
    fn halton_is_deterministic_and_spread() {
        let p = Sampler::Halton { n: 8 }.points(1);
        assert_eq!(p[0][0], 0.0);
        assert_eq!(p[1][0], -0.25);
    }

    #[test]
    fn acceptance_shrinks_with_gamma() {
        let pts = Sampler::Halton { n: 2000 }.points(1);
        let (a, b) = (window(0.01), window(0.03));
        for om in &pts {
            if in_cantor(om, &b).unwrap().ok {
                assert!(in_cantor(om, &a).unwrap().ok);
            }
        }
    }
}
