//! Mode orchestration and artifact emission for the command-line tool.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::cantor::{gamma_sweep, in_cantor, single_set_estimate, CantorVerdict, EigenSource, FrequencyWindow, GammaSweep, SingleSetCheck};
use crate::config::{Mode, RunConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::evolution::{
    brute_force_spectrum, compare_spectrum, conjugacy_check, evolve_original, EvolutionConfig, SpectralComparison,
    Trajectory,
};
use crate::pipeline::{assemble_conjugator, run_pipeline, KGCoefficients, ReductionState};
use crate::report::{to_json, Cell, Table};
use crate::toeplitz::EigenPair;

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub label: String,
    pub structure_violation: f64,
    pub inverse_residual: f64,
    pub perturbation_max: f64,
    pub offdiag_max: f64,
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KamStepSummary {
    pub n: usize,
    pub n_cut: usize,
    pub eps: f64,
    pub eps_b: f64,
    pub min_divisor: f64,
    pub generator_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineSummary {
    pub c_frak: f64,
    pub converged: bool,
    pub eps_sequence: Vec<f64>,
    pub eps_b_sequence: Vec<f64>,
    pub kam_steps: Vec<KamStepSummary>,
    pub melnikov_violations: usize,
    pub stages: Vec<StageSummary>,
    pub conjugator_residual: f64,
    pub conjugator_inverse_defect: f64,
    pub conjugator_distance_from_identity: f64,
    pub eigenvalues: Vec<EigenPair>,
    /// `r` scaled by `⟨j⟩`, `(r_j^j, r_j^{−j})`.
    pub scaled_r: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionSummary {
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub s_values: Vec<f64>,
    pub sup_ratios: Vec<f64>,
    pub sup_energy_ratios: Vec<f64>,
    /// Present when the pipeline succeeded.
    pub conjugacy_max_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyReport {
    pub index: usize,
    pub omega: Vec<f64>,
    /// Membership with the unperturbed eigenvalues.
    pub cantor_unperturbed: CantorVerdict,
    /// Membership with the final eigenvalues, when available.
    pub cantor_final: Option<CantorVerdict>,
    pub pipeline: Option<PipelineSummary>,
    pub oracle: Option<SpectralComparison>,
    pub evolution: Option<EvolutionSummary>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub sweep: GammaSweep,
    pub single_set: SingleSetCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub mode: Mode,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub coefficients: crate::pipeline::CoefficientSummary,
    pub frequencies: Vec<FrequencyReport>,
    pub measure: Option<MeasureReport>,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.frequencies.iter().any(|f| !f.errors.is_empty())
    }
}

/// Everything one run produces, before it is written.
pub struct RunOutput {
    pub report: Report,
    pub tables: Vec<(&'static str, Table)>,
}

fn wants(mode: Mode, m: Mode) -> bool {
    mode == m || mode == Mode::Full
}

struct FrequencyRun {
    report: FrequencyReport,
    trajectory: Option<(Trajectory, Vec<f64>)>,
}

fn run_frequency(cfg: &RunConfig, c: &KGCoefficients, index: usize, omega: &[f64]) -> Result<FrequencyRun> {
    let mode = cfg.mode;
    let window = FrequencyWindow::new(
        cfg.nu,
        cfg.gamma,
        cfg.tau,
        cfg.measure.l_max,
        cfg.k_x,
        EigenSource::Unperturbed { c_frak: 0.0, mass: cfg.mass },
    )?;
    let mut rep = FrequencyReport {
        index,
        omega: omega.to_vec(),
        cantor_unperturbed: in_cantor(omega, &window)?,
        cantor_final: None,
        pipeline: None,
        oracle: None,
        evolution: None,
        errors: Vec::new(),
    };
    let need_pipeline = mode != Mode::Measure;
    let st: Option<ReductionState> = if need_pipeline {
        match run_pipeline(c, omega, cfg.pipeline_config()) {
            Ok(st) => Some(st),
            Err(e) => {
                rep.errors.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    if let Some(st) = &st {
        rep.cantor_final = Some(in_cantor(
            omega,
            &FrequencyWindow { eigen: EigenSource::Normal(st.normal.clone()), ..window.clone() },
        )?);
        rep.pipeline = Some(summarize(st)?);
    }
    if wants(mode, Mode::Oracle) {
        if let Some(st) = &st {
            match brute_force_spectrum(&st.t0, omega, cfg.oracle.dimension_cap) {
                Ok(ev) => {
                    rep.oracle =
                        Some(compare_spectrum(&ev, &st.normal, omega, st.lattice(), cfg.oracle.l_interior, cfg.oracle.j_interior))
                }
                Err(e) => rep.errors.push(format!("oracle: {e}")),
            }
        }
    }
    let mut trajectory = None;
    if wants(mode, Mode::Evolve) {
        let ev = &cfg.evolution;
        let mut ec = EvolutionConfig::with_default_data(cfg.k_x, ev.t_final, ev.dt);
        ec.integrator = ev.integrator;
        ec.s_report = ev.s_values.clone();
        ec.sample_every = ev.sample_every;
        let res = match &st {
            Some(st) => conjugacy_check(st, &ec).map(|cj| (cj.trajectory, cj.errors, Some(cj.max_error))),
            None => evolve_original(c, omega, &ec).map(|t| {
                let n = t.times.len();
                (t, vec![f64::NAN; n], None)
            }),
        };
        match res {
            Ok((t, errs, maxe)) => {
                rep.evolution = Some(EvolutionSummary {
                    t_final: ev.t_final,
                    dt: ev.dt,
                    steps: t.steps,
                    s_values: t.s_values.clone(),
                    sup_ratios: t.sup_ratios(),
                    sup_energy_ratios: t.sup_energy_ratios(),
                    conjugacy_max_error: maxe,
                });
                trajectory = Some((t, errs));
            }
            Err(e) => rep.errors.push(format!("evolve: {e}")),
        }
    }
    Ok(FrequencyRun { report: rep, trajectory })
}

fn summarize(st: &ReductionState) -> Result<PipelineSummary> {
    let kam = st.kam.as_ref().ok_or_else(|| Error::InvalidParameter("pipeline did not reach KAM".into()))?;
    let cj = assemble_conjugator(st)?;
    let stages = st
        .records
        .iter()
        .map(|r| StageSummary {
            label: r.label.clone(),
            structure_violation: r.structure.max_violation(),
            inverse_residual: r.inverse_residual,
            perturbation_max: r.perturbation_max,
            offdiag_max: r.offdiag_max,
            extra: r.extra.iter().cloned().collect(),
        })
        .collect();
    Ok(PipelineSummary {
        c_frak: st.normal.c_frak,
        converged: kam.converged,
        eps_sequence: kam.eps_sequence.clone(),
        eps_b_sequence: kam.eps_b_sequence.clone(),
        kam_steps: kam
            .steps
            .iter()
            .map(|s| KamStepSummary {
                n: s.n,
                n_cut: s.n_cut,
                eps: s.eps,
                eps_b: s.eps_b,
                min_divisor: s.min_divisor,
                generator_max: s.generator_max,
            })
            .collect(),
        melnikov_violations: kam.violations.len(),
        stages,
        conjugator_residual: cj.residual,
        conjugator_inverse_defect: cj.inverse_defect,
        conjugator_distance_from_identity: cj.distance_from_identity,
        eigenvalues: st.normal.eigenvalues(),
        scaled_r: st.normal.scaled_r(),
    })
}

/// Run the configured mode; numerical failures for one frequency are
/// recorded in the report rather than aborting the run.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let warnings = cfg.validate()?;
    let c = cfg.coefficients()?;
    let omegas = cfg.omegas()?;
    let mode = cfg.mode;

    let runs: Vec<FrequencyRun> = if mode == Mode::Measure {
        Vec::new()
    } else {
        omegas
            .par_iter()
            .enumerate()
            .map(|(i, w)| run_frequency(cfg, &c, i, w))
            .collect::<Result<Vec<_>>>()?
    };

    let measure = if wants(mode, Mode::Measure) {
        let window = FrequencyWindow::new(
            cfg.nu,
            cfg.gamma,
            cfg.tau,
            cfg.measure.l_max,
            cfg.k_x,
            EigenSource::Unperturbed { c_frak: 0.0, mass: cfg.mass },
        )?;
        let sampler = cfg.sampler();
        let sweep = gamma_sweep(&window, &cfg.measure.gammas, sampler)?;
        let mut l = cfg.measure.single_set_l.clone();
        l.resize(cfg.nu, 0);
        let single_set = single_set_estimate(&l, cfg.gamma, sampler)?;
        Some(MeasureReport { sweep, single_set })
    } else {
        None
    };

    let mut tables = Vec::new();
    if mode != Mode::Measure {
        let mut eig = Table::new(&["omega_index", "j", "branch", "lambda", "scaled_r_diag", "scaled_r_offdiag"]);
        let mut eps = Table::new(&["omega_index", "n", "eps", "eps_b"]);
        for r in &runs {
            let Some(p) = &r.report.pipeline else { continue };
            let i = r.report.index;
            for (e, &(rd, ro)) in p.eigenvalues.iter().zip(&p.scaled_r) {
                eig.push(vec![i.into(), e.j.into(), "plus".into(), e.plus.into(), rd.into(), ro.into()]);
                if let Some(m) = e.minus {
                    eig.push(vec![i.into(), e.j.into(), "minus".into(), m.into(), rd.into(), (-ro).into()]);
                }
            }
            for (n, (a, b)) in p.eps_sequence.iter().zip(&p.eps_b_sequence).enumerate() {
                eps.push(vec![i.into(), n.into(), (*a).into(), (*b).into()]);
            }
        }
        tables.push(("eigenvalues.csv", eig));
        tables.push(("eps_sequence.csv", eps));
    }
    if wants(mode, Mode::Evolve) {
        let mut header = vec!["omega_index".to_string(), "t".to_string()];
        header.extend(cfg.evolution.s_values.iter().map(|s| format!("norm_s{s}")));
        header.extend(cfg.evolution.s_values.iter().map(|s| format!("energy_s{s}")));
        header.push("conjugacy_error".into());
        let mut tr = Table::with_header(header);
        for r in &runs {
            let Some((t, errs)) = &r.trajectory else { continue };
            for (k, time) in t.times.iter().enumerate() {
                let mut row: Vec<Cell> = vec![r.report.index.into(), (*time).into()];
                row.extend(t.norms[k].iter().map(|&v| Cell::from(v)));
                row.extend(t.energy[k].iter().map(|&v| Cell::from(v)));
                row.push(errs.get(k).copied().unwrap_or(f64::NAN).into());
                tr.push(row);
            }
        }
        tables.push(("trajectories.csv", tr));
    }
    if let Some(m) = &measure {
        let mut t = Table::new(&[
            "gamma",
            "samples",
            "excluded_fraction",
            "sigma",
            "q0",
            "first",
            "second_sum",
            "second_diff",
        ]);
        for e in &m.sweep.estimates {
            let mut row: Vec<Cell> = vec![e.gamma.into(), e.samples.into(), e.excluded_fraction.into(), e.sigma.into()];
            row.extend(e.per_set.iter().map(|&k| Cell::from(k)));
            t.push(row);
        }
        tables.push(("measure.csv", t));
    }

    let report = Report {
        schema_version: SCHEMA_VERSION,
        mode,
        config: cfg.clone(),
        warnings,
        coefficients: c.summary(),
        frequencies: runs.into_iter().map(|r| r.report).collect(),
        measure,
    };
    Ok(RunOutput { report, tables })
}

/// Write `report.json` and the tables into `dir`; returns the paths written.
pub fn emit(out: &RunOutput, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let p = dir.join("report.json");
    std::fs::write(&p, to_json(&out.report))?;
    written.push(p);
    for (name, t) in &out.tables {
        let p = dir.join(name);
        t.write(&p)?;
        written.push(p);
    }
    Ok(written)
}

/// Machine-readable error record for stderr.
#[derive(Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub index: Option<usize>,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        let (error, index) = match e {
            Error::MalformedRecord { index, .. } => ("malformed_record", Some(*index)),
            Error::InvalidParameter(_) => ("invalid_config", None),
            Error::Stage { .. } => ("stage_failure", None),
            _ => ("numerical_failure", None),
        };
        ErrorRecord {
            error,
            message: e.to_string(),
            index,
        }
    }

    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.error {
            "malformed_record" | "invalid_config" => 2,
            _ => 1,
        }
    }
}
