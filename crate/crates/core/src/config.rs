//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cantor::Sampler;
use crate::error::{Error, Result};
use crate::evolution::Integrator;
use crate::fourier::{LatticeBox, ModeRecord, TorusFunction};
use crate::pipeline::{KGCoefficients, KamConfig, PipelineConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pipeline,
    Measure,
    Evolve,
    Oracle,
    Full,
}

/// Frequencies to run on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSpec {
    List(Vec<Vec<f64>>),
    /// Uniform in `[−½, ½]^ν`.
    Random { n: usize, seed: u64 },
    /// `n` equally spaced points per axis in `[−½, ½]^ν`, cell midpoints.
    Grid { n: usize },
}

/// Sparse coefficients, or the built-in `cos φ cos x / cos φ sin x` family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSpec {
    Reference { eps: f64 },
    Records {
        #[serde(default)]
        a2: Vec<ModeRecord>,
        #[serde(default)]
        a1: Vec<ModeRecord>,
        #[serde(default)]
        a0: Vec<ModeRecord>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    MonteCarlo,
    Halton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSettings {
    pub samples: usize,
    pub gammas: Vec<f64>,
    pub sampler: SamplerKind,
    pub l_max: usize,
    /// `ℓ` of the single-set check.
    pub single_set_l: Vec<i64>,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        MeasureSettings {
            samples: 100_000,
            gammas: vec![0.05, 0.02, 0.01],
            sampler: SamplerKind::MonteCarlo,
            l_max: 12,
            single_set_l: vec![3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSettings {
    pub t_final: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub s_values: Vec<f64>,
    pub sample_every: f64,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        EvolutionSettings {
            t_final: 1000.0,
            dt: 5e-3,
            integrator: Integrator::ExpRk4,
            s_values: vec![2.0, 3.0, 4.0],
            sample_every: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub l_interior: usize,
    pub j_interior: usize,
    pub dimension_cap: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            l_interior: 4,
            j_interior: 6,
            dimension_cap: crate::evolution::DIMENSION_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub nu: usize,
    pub mass: f64,
    pub k_phi: usize,
    pub k_x: usize,
    pub gamma: f64,
    pub tau: f64,
    pub n0: f64,
    pub rho: usize,
    pub kam_max_steps: usize,
    pub kam_tol: f64,
    pub structure_tol: f64,
    pub seed: u64,
    pub omega: OmegaSpec,
    pub coefficients: CoefficientSpec,
    /// JSON file holding a [`CoefficientSpec`]; overrides `coefficients`.
    pub coefficients_file: Option<PathBuf>,
    pub measure: MeasureSettings,
    pub evolution: EvolutionSettings,
    pub oracle: OracleSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        RunConfig {
            schema_version: SCHEMA_VERSION,
            mode: Mode::Pipeline,
            nu: 1,
            mass: 1.0,
            k_phi: 8,
            k_x: 12,
            gamma: p.gamma,
            tau: p.tau,
            n0: p.kam.n0,
            rho: p.rho,
            kam_max_steps: p.kam.max_steps,
            kam_tol: p.kam.tol,
            structure_tol: p.structure_tol,
            seed: 0,
            omega: OmegaSpec::List(vec![vec![std::f64::consts::PI / 10.0]]),
            coefficients: CoefficientSpec::Reference { eps: 1e-3 },
            coefficients_file: None,
            measure: MeasureSettings::default(),
            evolution: EvolutionSettings::default(),
            oracle: OracleSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config line {}: {e}", e.line())))?;
        match v.get("schema_version").and_then(|s| s.as_u64()) {
            Some(s) if s == SCHEMA_VERSION as u64 => {}
            Some(s) => return Err(Error::InvalidParameter(format!("unsupported schema_version {s}"))),
            None => return Err(Error::InvalidParameter("missing schema_version".into())),
        }
        if let Some(Some(c)) = v.get("coefficients").map(|c| c.get("records")) {
            check_records(c)?;
        }
        serde_json::from_value(v).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(rel) = cfg.coefficients_file.clone() {
            let p = if rel.is_relative() { path.parent().unwrap_or(Path::new(".")).join(rel) } else { rel };
            let t = std::fs::read_to_string(&p).map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))?;
            let v: serde_json::Value =
                serde_json::from_str(&t).map_err(|e| Error::InvalidParameter(format!("{} line {}: {e}", p.display(), e.line())))?;
            if let Some(r) = v.get("records") {
                check_records(r)?;
            }
            cfg.coefficients =
                serde_json::from_value(v).map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))?;
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Range checks; returns warnings that do not stop the run.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warn = Vec::new();
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(Error::InvalidParameter(format!("γ must lie in (0, 1/2), got {}", self.gamma)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if self.nu == 0 {
            return Err(Error::InvalidParameter("ν must be ≥ 1".into()));
        }
        if self.tau <= 2.0 * self.nu as f64 + 4.0 {
            warn.push(format!("τ = {} ≤ 2ν+4 = {}", self.tau, 2 * self.nu + 4));
        }
        if self.evolution.dt <= 0.0 || self.evolution.t_final < 0.0 {
            return Err(Error::InvalidParameter("evolution needs dt > 0 and t_final ≥ 0".into()));
        }
        if self.measure.gammas.iter().any(|&g| !(g > 0.0 && g < 0.5)) {
            return Err(Error::InvalidParameter("measure gammas must lie in (0, 1/2)".into()));
        }
        Ok(warn)
    }

    pub fn lattice(&self) -> Result<LatticeBox> {
        LatticeBox::new(self.nu, self.k_phi, self.k_x)
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            gamma: self.gamma,
            tau: self.tau,
            rho: self.rho,
            structure_tol: self.structure_tol,
            kam: KamConfig {
                n0: self.n0,
                max_steps: self.kam_max_steps,
                tol: self.kam_tol,
                ..KamConfig::default()
            },
        }
    }

    pub fn coefficients(&self) -> Result<KGCoefficients> {
        let bx = self.lattice()?;
        match &self.coefficients {
            CoefficientSpec::Reference { eps } => KGCoefficients::reference(bx, *eps, self.mass),
            CoefficientSpec::Records { a2, a1, a0 } => {
                let f = |recs: &[ModeRecord], offset: usize| {
                    TorusFunction::from_records(bx, recs).map_err(|e| match e {
                        Error::MalformedRecord { index, reason } => Error::MalformedRecord { index: index + offset, reason },
                        e => e,
                    })
                };
                // Indices run through a2, then a1, then a0.
                let u2 = f(a2, 0)?;
                let u1 = f(a1, a2.len())?;
                let u0 = f(a0, a2.len() + a1.len())?;
                KGCoefficients::new(u2, u1, u0, self.mass)
            }
        }
    }

    pub fn omegas(&self) -> Result<Vec<Vec<f64>>> {
        let out = match &self.omega {
            OmegaSpec::List(v) => v.clone(),
            OmegaSpec::Random { n, seed } => Sampler::MonteCarlo { n: *n, seed: *seed }.points(self.nu),
            OmegaSpec::Grid { n } => {
                let axis: Vec<f64> = (0..*n).map(|i| (i as f64 + 0.5) / *n as f64 - 0.5).collect();
                let mut pts = vec![Vec::new()];
                for _ in 0..self.nu {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat()))
                        .collect();
                }
                pts
            }
        };
        if let Some(w) = out.iter().find(|w| w.len() != self.nu) {
            return Err(Error::InvalidParameter(format!("ω {w:?} has {} components, ν = {}", w.len(), self.nu)));
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("no frequencies selected".into()));
        }
        Ok(out)
    }

    pub fn sampler(&self) -> Sampler {
        match self.measure.sampler {
            SamplerKind::MonteCarlo => Sampler::MonteCarlo { n: self.measure.samples, seed: self.seed },
            SamplerKind::Halton => Sampler::Halton { n: self.measure.samples },
        }
    }
}

/// Field-level check of raw records so the error can name the index even
/// when the record does not deserialize.
fn check_records(v: &serde_json::Value) -> Result<()> {
    let mut index = 0;
    for key in ["a2", "a1", "a0"] {
        let Some(list) = v.get(key) else { continue };
        let arr = list
            .as_array()
            .ok_or_else(|| Error::InvalidParameter(format!("coefficients.records.{key} must be an array")))?;
        for r in arr {
            if let Err(e) = serde_json::from_value::<ModeRecord>(r.clone()) {
                return Err(Error::MalformedRecord { index, reason: format!("{key}: {e}") });
            }
            index += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn missing_version_is_rejected() {
        assert!(RunConfig::from_json("{}").is_err());
        assert!(RunConfig::from_json(r#"{"schema_version": 99}"#).is_err());
    }

    #[test]
    fn malformed_record_is_located() {
        let text = r#"{"schema_version": 1, "nu": 1, "k_phi": 2, "k_x": 4,
            "coefficients": {"records": {"a2": [{"l": [1], "j": 1, "re": 0.001, "im": 0.0}],
                                         "a1": [{"l": [1], "j": 1, "re": "x", "im": 0.0}]}}}"#;
        match RunConfig::from_json(text) {
            Err(Error::MalformedRecord { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        let text = r#"{"schema_version": 1, "nu": 1, "k_phi": 2, "k_x": 4,
            "coefficients": {"records": {"a0": [{"l": [0], "j": 0, "re": 0.001, "im": 0.0},
                                                {"l": [7], "j": 0, "re": 0.001, "im": 0.0}]}}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        match cfg.coefficients() {
            Err(Error::MalformedRecord { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_omegas() {
        let c = RunConfig {
            nu: 2,
            omega: OmegaSpec::Grid { n: 3 },
            ..RunConfig::default()
        };
        let w = c.omegas().unwrap();
        assert_eq!(w.len(), 9);
        assert!(w[0].iter().all(|&a| (a + 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(w[4], vec![0.0, 0.0]);
    }
}
