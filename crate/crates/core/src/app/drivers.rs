//! Experiment drivers. Each writes its reports into an output directory.
//!
//! Files written by `run`:
//! `config.toml` (resolved), `trace.csv`, `monitors.csv`, `ladder.csv`,
//! `summary.csv` and the final fields `phi.snap`, `psi1.snap`, `psi2.snap`,
//! `u1.snap`, `u2.snap`.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;

use super::config::RunConfig;
use super::stability::{stability_experiment, StabilityReport};
use crate::error::{Error, Result};
use crate::fields::{write_snapshot, Grid2D};
use crate::inequality::{commutator_verify, gn_verify, lame_regularity_verify, InequalityReport, LabOptions};
use crate::model::State;
use crate::monitors::{blowup_functionals, c_ladder_report, conservation_checks, farfield_report, write_monitor_csv};
use crate::picard::{delta_continuation, picard_solve_with_retries, ContinuationReport, IterationTrace, Trajectory};

/// Creates `dir` if needed.
pub fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_state(dir: &Path, s: &State) -> Result<()> {
    write_snapshot(&dir.join("phi.snap"), "phi", s.t, &s.phi)?;
    write_snapshot(&dir.join("psi1.snap"), "psi1", s.t, s.psi.comp(0))?;
    write_snapshot(&dir.join("psi2.snap"), "psi2", s.t, s.psi.comp(1))?;
    write_snapshot(&dir.join("u1.snap"), "u1", s.t, s.u.comp(0))?;
    write_snapshot(&dir.join("u2.snap"), "u2", s.t, s.u.comp(1))
}

fn write_summary(path: &Path, rows: &[(&str, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["quantity", "value"])?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Outcome of a single solve.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub converged: bool,
    pub horizon: f64,
    pub sweeps: usize,
    pub last_gamma: f64,
    pub mass_drift_rate: f64,
    pub blowup_max: f64,
    pub flagged_at: Option<f64>,
}

/// Solution, trace and summary of one `run`.
pub struct RunArtifacts {
    pub trajectory: Trajectory,
    pub trace: IterationTrace,
    pub summary: RunSummary,
}

/// Solves the configured scenario and writes every report.
pub fn run_driver(cfg: &RunConfig, out: &Path) -> Result<RunArtifacts> {
    prepare_dir(out)?;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let sc = &cfg.scenario;
    let (initial, reg) = sc.initial_state()?;
    let (traj, trace) = picard_solve_with_retries(&initial, &sc.spec, &reg, &cfg.picard_options(), cfg.max_retries)?;
    trace.write_csv(&out.join("trace.csv"))?;

    let blowup = blowup_functionals(&traj, &sc.spec, cfg.monitors.ceiling)?;
    let cons = conservation_checks(&traj, &sc.spec, &reg)?;
    write_monitor_csv(&out.join("monitors.csv"), &blowup, &cons)?;
    let ladder = c_ladder_report(&traj, &sc.spec, sc.profile.phi_inf(&sc.spec))?;
    ladder.write_csv(&out.join("ladder.csv"))?;
    let last = traj.last();
    let far = farfield_report(
        &last.phi,
        &last.u,
        &sc.spec,
        cfg.monitors.farfield_cells,
        cfg.monitors.farfield_tol,
    )?;
    write_state(out, last)?;

    let summary = RunSummary {
        converged: trace.converged,
        horizon: trace.t_star_used,
        sweeps: trace.sweeps.len(),
        last_gamma: trace.last_gamma().unwrap_or(f64::NAN),
        mass_drift_rate: cons.mass_drift_rate(),
        blowup_max: blowup.max_value(),
        flagged_at: blowup.flagged_at,
    };
    write_summary(
        &out.join("summary.csv"),
        &[
            ("converged", summary.converged.to_string()),
            ("horizon", summary.horizon.to_string()),
            ("sweeps", summary.sweeps.to_string()),
            ("last_gamma", summary.last_gamma.to_string()),
            ("mass_drift", cons.mass_drift.to_string()),
            ("mass_drift_rate", summary.mass_drift_rate.to_string()),
            ("psi_curl_defect", cons.psi_curl_defect.to_string()),
            ("psi_phi_consistency", cons.psi_phi_consistency.to_string()),
            ("positivity_min", cons.positivity_min.to_string()),
            ("blowup_max", summary.blowup_max.to_string()),
            (
                "blowup_flagged_at",
                summary.flagged_at.map(|t| t.to_string()).unwrap_or_default(),
            ),
            ("farfield_rho_seam", far.rho_seam.to_string()),
            ("farfield_u_seam", far.u_seam.to_string()),
            ("farfield_within_tol", far.within_tol.to_string()),
        ],
    )?;
    info!(
        "run: converged = {}, {} sweeps, horizon {}",
        summary.converged, summary.sweeps, summary.horizon
    );
    Ok(RunArtifacts {
        trajectory: traj,
        trace,
        summary,
    })
}

/// Perturbs `phi_0` by the configured epsilon and compares the two runs.
pub fn stability_driver(cfg: &RunConfig, out: &Path) -> Result<StabilityReport> {
    prepare_dir(out)?;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let sc = &cfg.scenario;
    let (a, b, reg) = sc.perturbed_pair(sc.perturbation)?;
    let rep = stability_experiment((&a, &b), &sc.spec, &reg, &cfg.picard_options())?;
    rep.write_csv(&out.join("stability.csv"))?;
    write_summary(
        &out.join("summary.csv"),
        &[
            ("epsilon", sc.perturbation.to_string()),
            ("converged_base", rep.converged[0].to_string()),
            ("converged_perturbed", rep.converged[1].to_string()),
            ("partial", rep.partial.to_string()),
            ("initial_distance", rep.initial_distance().to_string()),
            ("final_distance", rep.final_distance().to_string()),
            ("final_c_meas", rep.final_c_meas().to_string()),
            ("max_c_meas", rep.max_c_meas().to_string()),
        ],
    )?;
    write_state(out, &b)?;
    Ok(rep)
}

/// Solves for each lifted datum and records consecutive distances.
pub fn continuation_driver(cfg: &RunConfig, out: &Path) -> Result<ContinuationReport> {
    prepare_dir(out)?;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let sc = &cfg.scenario;
    let phi0 = sc.phi0()?;
    let reg = sc.regularization(&phi0)?;
    let rep = delta_continuation(&phi0, &sc.u0()?, &sc.spec, &reg, &cfg.deltas, &cfg.picard_options())?;
    rep.write_csv(&out.join("continuation.csv"))?;
    if let Some(last) = rep.members.iter().rev().find_map(|m| m.trajectory.as_ref()) {
        write_state(out, last.last())?;
    }
    Ok(rep)
}

/// One member of a sweep.
#[derive(Debug, Clone)]
pub struct SweepMember {
    pub value: String,
    pub dir: PathBuf,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

fn dir_name(index: usize, key: &str, value: &str) -> String {
    let clean = |s: &str| {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect::<String>()
    };
    format!("{index:03}_{}_{}", clean(key), clean(value))
}

/// Runs one member per value, each in its own subdirectory, and writes
/// `index.csv`. Every value is validated before anything runs.
pub fn sweep_driver(cfg: &RunConfig, out: &Path, key: &str, values: &[String]) -> Result<Vec<SweepMember>> {
    if values.is_empty() {
        return Err(Error::param("values", "a sweep needs at least one value"));
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|v| cfg.with_override(key, v))
        .collect::<Result<_>>()?;
    prepare_dir(out)?;
    let members: Vec<SweepMember> = configs
        .par_iter()
        .zip(values.par_iter())
        .enumerate()
        .map(|(i, (c, v))| {
            let dir = out.join(dir_name(i, key, v));
            let mut c = c.clone();
            c.output = dir.clone();
            match run_driver(&c, &dir) {
                Ok(a) => SweepMember {
                    value: v.clone(),
                    dir,
                    summary: Some(a.summary),
                    error: None,
                },
                Err(e) => SweepMember {
                    value: v.clone(),
                    dir,
                    summary: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let path = out.join("index.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "index",
        "param",
        "value",
        "dir",
        "converged",
        "sweeps",
        "last_gamma",
        "error",
    ])?;
    for (i, m) in members.iter().enumerate() {
        let dir = m
            .dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (conv, sweeps, gamma) = match &m.summary {
            Some(s) => (s.converged.to_string(), s.sweeps.to_string(), s.last_gamma.to_string()),
            None => ("false".into(), String::new(), String::new()),
        };
        w.write_record([
            i.to_string(),
            key.to_string(),
            m.value.clone(),
            dir,
            conv,
            sweeps,
            gamma,
            m.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(members)
}

/// Reports of `verify-inequalities`, in file order.
pub struct LabReports {
    pub gn: InequalityReport,
    pub commutator: InequalityReport,
    pub lame: InequalityReport,
}

pub fn verify_driver(cfg: &RunConfig, out: &Path) -> Result<LabReports> {
    prepare_dir(out)?;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    let lab = &cfg.lab;
    let opts = LabOptions {
        grid: Grid2D::new(lab.n, lab.box_length)?,
        samples: lab.samples,
        seed: cfg.seed,
    };
    let [p, q, r] = lab.gn;
    let spec = &cfg.scenario.spec;
    let reports = LabReports {
        gn: gn_verify(&opts, p, q, r)?,
        commutator: commutator_verify(&opts, lab.commutator_s, lab.commutator_form, lab.holder)?,
        lame: lame_regularity_verify(&opts, lab.lame_k, lab.lame_q, spec.alpha(), spec.beta())?,
    };
    reports.gn.write_csv(&out.join("gn.csv"))?;
    reports.commutator.write_csv(&out.join("commutator.csv"))?;
    reports.lame.write_csv(&out.join("lame.csv"))?;
    Ok(reports)
}
