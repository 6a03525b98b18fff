//! Executes a [`RunSpec`]: build, integrate, certify, write artifacts.

use std::fs;
use std::path::Path;

use dissipact::diagnostics::{
    constraint_residual, dissipation_report, gradient_fd_check, structure_report, DissipationReport,
};
use dissipact::integrators::{integrate_with_progress, TimeGrid};
use dissipact::system::ValidationReport;
use dissipact::zoo::build_model;
use dissipact::{Error, InputSignal, StatePartition, StructuredSystem, SystemDims};
use log::info;
use serde::Serialize;

use crate::config::{CheckLevel, ModelSource, RunSpec};
use crate::error::CliError;
use crate::output::{energy_csv, trajectory_csv};
use crate::sysfile::load_system_file;

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Error = 1,
    CheckFailed = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Combines the statuses of a batch: any error wins, then any failed check.
    pub fn worst(statuses: impl IntoIterator<Item = ExitStatus>) -> ExitStatus {
        statuses.into_iter().fold(ExitStatus::Pass, |acc, s| match (acc, s) {
            (ExitStatus::Error, _) | (_, ExitStatus::Error) => ExitStatus::Error,
            (ExitStatus::CheckFailed, _) | (_, ExitStatus::CheckFailed) => ExitStatus::CheckFailed,
            _ => ExitStatus::Pass,
        })
    }
}

/// Points and step of the sampled gradient self-check.
const FD_SAMPLES: usize = 100;
const FD_STEP: f64 = 1e-5;
const FD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, passed: value <= tolerance }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub model: String,
    pub scheme: String,
    pub dims: SystemDims,
    pub grid: TimeGrid,
    pub steps: usize,
    pub newton_iterations: usize,
    pub check: CheckLevel,
    pub structure: ValidationReport,
    pub dissipation: DissipationReport,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl RunReport {
    pub fn status(&self) -> ExitStatus {
        if self.passed {
            ExitStatus::Pass
        } else {
            ExitStatus::CheckFailed
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        format!(
            "{} ({}, {} steps): max violation {:.3e}, tolerance {:.3e}, {}",
            self.model,
            self.scheme,
            self.steps,
            self.dissipation.max_violation,
            self.dissipation.tolerance,
            if failed.is_empty() { "pass".to_string() } else { format!("failed: {}", failed.join(", ")) }
        )
    }
}

struct Prepared {
    label: String,
    system: StructuredSystem,
    z0: StatePartition,
    input: InputSignal,
}

fn prepare(spec: &RunSpec) -> Result<Prepared, CliError> {
    let (label, system, z0, default_input) = match &spec.model {
        ModelSource::Zoo(m) => {
            let model = build_model(m)?;
            (model.name.to_string(), model.system, model.z0, model.default_input)
        }
        ModelSource::SystemFile(path) => {
            let loaded = load_system_file(path)?;
            (path.display().to_string(), loaded.system, loaded.z0, loaded.input)
        }
    };
    let input = spec.input.clone().unwrap_or(default_input);
    Ok(Prepared { label, system, z0, input })
}

/// Runs the spec and writes the requested artifacts.
///
/// Errors cover everything that prevents a verdict; a failed certificate is
/// reported through [`RunReport::passed`].
pub fn run(spec: &RunSpec) -> Result<RunReport, CliError> {
    spec.check_values()?;
    let p = prepare(spec)?;
    let grid = spec.time_grid()?;
    let scheme = spec.scheme();
    let structure = structure_report(&p.system);
    let mut last_decile = 0;
    let label = p.label.clone();
    let mut progress = |n: usize, total: usize| {
        let decile = n * 10 / total;
        if decile > last_decile {
            last_decile = decile;
            info!("{label}: {}% ({n}/{total} steps)", decile * 10);
        }
    };
    let traj = integrate_with_progress(&p.system, &p.z0, &p.input, &grid, scheme, &spec.solver, &mut progress)?;
    let dissipation = dissipation_report(&p.system, &traj, &p.input)?;

    let mut checks = Vec::new();
    if spec.check != CheckLevel::None {
        checks.push(CheckResult::at_most("dissipation", dissipation.max_violation, dissipation.tolerance));
        if dissipation.unforced {
            let rise = dissipation.per_step.iter().map(|s| s.delta_h).fold(f64::NEG_INFINITY, f64::max);
            checks.push(CheckResult::at_most("monotone_energy", rise, dissipation.tolerance));
        }
    }
    if spec.check == CheckLevel::Full {
        checks.push(CheckResult::at_most("power_balance", dissipation.balance_max_residual, dissipation.tolerance));
        let structure_defect = structure.skew_defect.max(structure.sym_defect).max(-structure.min_eig_r);
        checks.push(CheckResult { passed: structure.passed, ..CheckResult::at_most("structure", structure_defect, 0.0) });
        let fd = gradient_fd_check(p.system.energy_model(), FD_SAMPLES, FD_STEP, spec.seed);
        checks.push(CheckResult::at_most("gradient_self_check", fd, FD_TOLERANCE));
        match constraint_residual(&p.system, &traj, &p.input) {
            Ok(res) => {
                let zmax = traj.states.iter().map(|z| z.amax()).fold(0.0, f64::max);
                let tol = 10.0 * spec.solver.abs_tol * (1.0 + zmax) / grid.tau;
                checks.push(CheckResult::at_most("stage_constraints", res.iter().copied().fold(0.0, f64::max), tol));
            }
            Err(Error::NoAlgebraicRows) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = RunReport {
        model: p.label,
        scheme: scheme.to_string(),
        dims: traj.dims,
        grid,
        steps: traj.steps(),
        newton_iterations: traj.newton_iterations.iter().sum(),
        check: spec.check,
        structure,
        dissipation,
        checks,
        passed,
    };
    write_artifacts(spec, &traj, &report)?;
    Ok(report)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_artifacts(spec: &RunSpec, traj: &dissipact::integrators::Trajectory, report: &RunReport) -> Result<(), CliError> {
    let o = &spec.outputs;
    if !(o.trajectory_csv || o.energy_csv || o.report_json) {
        return Ok(());
    }
    fs::create_dir_all(&o.dir).map_err(|e| CliError::io(&o.dir, e))?;
    if o.trajectory_csv {
        write(&o.dir.join("trajectory.csv"), &trajectory_csv(traj))?;
    }
    if o.energy_csv {
        write(&o.dir.join("energy.csv"), &energy_csv(traj, &report.dissipation))?;
    }
    if o.report_json {
        let mut json = serde_json::to_string_pretty(report).expect("reports serialize to JSON");
        json.push('\n');
        write(&o.dir.join("report.json"), &json)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_status_prefers_errors() {
        use ExitStatus::*;
        assert_eq!(ExitStatus::worst([Pass, Pass]), Pass);
        assert_eq!(ExitStatus::worst([Pass, CheckFailed]), CheckFailed);
        assert_eq!(ExitStatus::worst([CheckFailed, Error, Pass]), Error);
        assert_eq!(ExitStatus::worst([]), Pass);
        assert_eq!((Pass.code(), Error.code(), CheckFailed.code()), (0, 1, 2));
    }
}
