//! Bodies of the `gellmann`, `evolve`, `sweep` and `verify` subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use disentangle_core::basin::{classify_basin, Cell};
use disentangle_core::dynamics::{evolve, Trajectory};
use disentangle_core::entanglement::{classify_separability, SubsystemBases};
use disentangle_core::gellmann::GellMannBasis;
use disentangle_core::hilbert::fidelity;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::error::AppError;
use crate::output::{self, Metadata};
use crate::sweep::{basin_counts, run_sweep, BasinCounts};
use crate::verify::{self, Check, VerifyOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes the Gell-Mann dump to `out`, or returns it when `out` is `None`.
pub fn gellmann(d: usize, out: Option<&Path>) -> Result<Option<String>, AppError> {
    let basis = GellMannBasis::generate(d).map_err(|e| ConfigError::new("d", e.to_string()))?;
    let text = output::gellmann_text(&basis);
    match out {
        Some(path) => {
            output::write_file(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetFidelity {
    pub target: String,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSummary {
    pub s_final: f64,
    pub samples: usize,
    pub k: Vec<f64>,
    pub tau: BTreeMap<String, f64>,
    pub bloch: Vec<Vec<f64>>,
    pub basin: String,
    pub separability: String,
    pub fidelities: Vec<TargetFidelity>,
    pub max_norm_drift: f64,
}

pub struct EvolveRun {
    pub trajectory: Trajectory,
    pub summary: EvolveSummary,
    pub csv_path: PathBuf,
}

pub fn evolve_run(config: &RunConfig) -> Result<EvolveRun, AppError> {
    let started = Instant::now();
    let dims = config.subsystem_dims()?;
    let evolution = config.evolution(&dims)?;
    let (_, psi0) = config.initial_state(&dims)?;
    let targets = config.target_states(&dims)?;
    let bases = SubsystemBases::new(&dims);
    log::info!("evolving {} steps of {}", evolution.step_count(), evolution.step);
    let trajectory = evolve(&psi0, &bases, &evolution)?;
    let last = trajectory.final_sample();
    let tol = config.sweep.basin_tol;
    let fidelities = targets
        .iter()
        .map(|(text, target)| {
            Ok(TargetFidelity {
                target: text.clone(),
                fidelity: fidelity(&last.state, target)?,
            })
        })
        .collect::<Result<Vec<_>, disentangle_core::Error>>()?;
    let summary = EvolveSummary {
        s_final: last.s,
        samples: trajectory.samples.len(),
        k: last.report.bloch_lengths.clone(),
        tau: last
            .report
            .taus
            .iter()
            .map(|t| (format!("tau{}{}", t.pair.0, t.pair.1), t.tau))
            .collect(),
        bloch: last.report.bloch.clone(),
        basin: classify_basin(&last.report, evolution.pair, tol).to_string(),
        separability: classify_separability(&last.report, tol).to_string(),
        fidelities,
        max_norm_drift: trajectory.max_norm_drift,
    };
    let csv_path = config.out.clone().unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    output::write_file(&csv_path, &output::trajectory_csv(&trajectory, config.bloch_columns))?;
    let meta = Metadata {
        command: "evolve",
        version: VERSION,
        seed: config.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        config,
        summary: &summary,
    };
    output::write_json(&output::sidecar_path(&csv_path), &meta)?;
    Ok(EvolveRun {
        trajectory,
        summary,
        csv_path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub grid: [usize; 2],
    pub cells: usize,
    pub counts: BasinCounts,
}

pub struct SweepRun {
    pub cells: Vec<Cell>,
    pub summary: SweepSummary,
    pub csv_path: PathBuf,
    pub wall_time_s: f64,
}

pub fn sweep_run(config: &RunConfig) -> Result<SweepRun, AppError> {
    let started = Instant::now();
    let spec = config.sweep_spec()?;
    log::info!(
        "sweeping {} cells on {} workers",
        spec.cell_count(),
        config.workers.map_or_else(|| "all".to_string(), |w| w.to_string())
    );
    let cells = run_sweep(&spec, config.workers);
    let summary = SweepSummary {
        grid: [spec.grid1.count, spec.grid2.count],
        cells: cells.len(),
        counts: basin_counts(&cells),
    };
    let csv_path = config.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    output::write_file(&csv_path, &output::sweep_csv(&cells, spec.dims.count()))?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let meta = Metadata {
        command: "sweep",
        version: VERSION,
        seed: config.seed,
        wall_time_s,
        config,
        summary: &summary,
    };
    output::write_json(&output::sidecar_path(&csv_path), &meta)?;
    Ok(SweepRun {
        cells,
        summary,
        csv_path,
        wall_time_s,
    })
}

/// Runs the invariant suite with the seed, step and duration of `config`.
pub fn verify_run(config: &RunConfig) -> Result<Vec<Check>, AppError> {
    let dims = config.subsystem_dims()?;
    config.evolution(&dims)?;
    Ok(verify::run_all(VerifyOptions {
        seed: config.seed,
        step: config.step,
        smax: config.smax,
    }))
}

/// Error for a finished suite with failures, `None` when all passed.
pub fn verification_error(checks: &[Check]) -> Option<AppError> {
    let failed = checks.iter().filter(|c| !c.passed).count();
    (failed > 0).then_some(AppError::Verification {
        failed,
        total: checks.len(),
    })
}
