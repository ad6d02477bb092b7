//! Executes a [`RunConfig`] and writes its CSV outputs.

use std::fs;
use std::path::PathBuf;

use crate::config::{Command, RunConfig};
use crate::error::Result;
use crate::io;
use crate::kernel;
use crate::linear;
use crate::nonlinear;
use crate::par::Execution;
use crate::similarity;

/// Files written by a run plus human-readable notes.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl RunSummary {
    fn write(&mut self, name: String, contents: String) -> Result<()> {
        let path = PathBuf::from(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    run_with(cfg, Execution::default())
}

pub fn run_with(cfg: &RunConfig, exec: Execution) -> Result<RunSummary> {
    fs::create_dir_all(&cfg.output_dir)?;
    match cfg.command {
        Command::Attractor => attractor(cfg, exec),
        Command::Linear => linear_run(cfg, exec),
        Command::Nonlinear => nonlinear_run(cfg),
        Command::Converge => converge(cfg, exec),
    }
}

fn out(cfg: &RunConfig, name: &str) -> String {
    cfg.output_dir.join(name).to_string_lossy().into_owned()
}

fn attractor(cfg: &RunConfig, exec: Execution) -> Result<RunSummary> {
    let steps = (2.0 * cfg.u_max / cfg.du).round() as usize;
    let u: Vec<f64> = (0..=steps)
        .map(|i| -cfg.u_max + i as f64 * cfg.du)
        .collect();
    let mut columns = vec![("f".to_string(), kernel::sample_phi(&u, 0, &cfg.kernel, exec)?)];
    for &n in &cfg.derivs {
        columns.push((format!("d{n}"), kernel::sample_phi(&u, n, &cfg.kernel, exec)?));
    }
    let mut summary = RunSummary::default();
    summary.write(out(cfg, "attractor.csv"), io::attractor_csv(&u, &columns))?;
    summary
        .notes
        .push(format!("phi(0) = {:.12}", kernel::phi(0.0, &cfg.kernel)?));
    Ok(summary)
}

fn linear_run(cfg: &RunConfig, exec: Execution) -> Result<RunSummary> {
    let grid = cfg.resolved_grid()?;
    let initial = cfg.profile.sample(&grid)?;
    let snaps = linear::evolve_many(&initial, &cfg.times, cfg.m, exec)?;
    let mut summary = RunSummary::default();
    for s in &snaps {
        summary.write(
            out(cfg, &io::snapshot_name("linear", "profile", s.time())),
            io::profile_csv(s),
        )?;
    }
    for s in &snaps {
        let r = similarity::rescale(s, cfg.normalisation, cfg.m)?;
        summary.write(
            out(cfg, &io::snapshot_name("linear", "rescaled", s.time())),
            io::rescaled_csv(&r),
        )?;
    }
    summary.notes.push(format!(
        "grid: x_min={} dx={} n={}; volume={:.17e}",
        grid.x_min(),
        grid.dx(),
        grid.len(),
        linear::algebraic_volume(&initial)?
    ));
    Ok(summary)
}

fn nonlinear_run(cfg: &RunConfig) -> Result<RunSummary> {
    let grid = cfg.resolved_grid()?;
    let h0 = cfg.profile.sample(&grid)?.to_height()?;
    let ncfg = cfg.nonlinear.resolve(grid.dx())?;
    let run = nonlinear::evolve_nonlinear(&h0, cfg.t_max(), &cfg.times, &ncfg)?;
    let mut summary = RunSummary::default();
    for s in &run.snapshots {
        summary.write(
            out(cfg, &io::snapshot_name("nonlinear", "profile", s.time())),
            io::profile_csv(s),
        )?;
    }
    for s in &run.snapshots {
        let excess = s.to_excess();
        if excess.max_abs() == 0.0 {
            summary
                .notes
                .push(format!("T={}: flat film, no rescaled profile", s.time()));
            continue;
        }
        let r = similarity::rescale(&excess, cfg.normalisation, cfg.m)?;
        summary.write(
            out(cfg, &io::snapshot_name("nonlinear", "rescaled", s.time())),
            io::rescaled_csv(&r),
        )?;
    }
    summary.write(
        out(cfg, "nonlinear_diagnostics.csv"),
        io::diagnostics_csv(&run.diagnostics),
    )?;
    summary.notes.push(format!(
        "{} accepted steps, {} rejected",
        run.diagnostics.len() - 1,
        run.rejected
    ));
    Ok(summary)
}

fn converge(cfg: &RunConfig, exec: Execution) -> Result<RunSummary> {
    let grid = cfg.resolved_grid()?;
    let initial = cfg.profile.sample(&grid)?;
    let window = cfg
        .rate_window
        .unwrap_or((cfg.times[0], cfg.t_max()));
    let report = similarity::convergence_report(
        &initial,
        &cfg.times,
        cfg.normalisation,
        &cfg.kernel,
        window,
        exec,
    )?;
    let mut summary = RunSummary::default();
    summary.write(out(cfg, "converge_report.csv"), io::report_csv(&report))?;
    if let Some(rate) = report.fitted_rate {
        summary.notes.push(format!("fitted rate {rate:.4}"));
    }
    Ok(summary)
}
