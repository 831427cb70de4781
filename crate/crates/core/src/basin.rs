//! Perturbation grids around a base state and basin-of-attraction labels.
//!
//! A grid cell `(ε1, ε2)` starts from `base + iε1·direction1 + iε2·direction2`,
//! normalized. Cells are independent; [`run_cell`] evaluates one and the
//! `disentangle` crate farms them out in parallel.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::dynamics::{evolve_final, EvolutionConfig};
use crate::entanglement::{EntanglementReport, PairSelector, SubsystemBases};
use crate::hilbert::{StateVector, SubsystemDims};
use crate::statelib::{build_state, StateExpr};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basin {
    /// The long-time state has subsystem `n` fully separable.
    Subsystem(usize),
    Unresolved,
}

impl fmt::Display for Basin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basin::Subsystem(n) => write!(f, "B{n}"),
            Basin::Unresolved => f.write_str("unresolved"),
        }
    }
}

/// Label by which member of the driven pair ended up separable: `B_{n′}` if
/// `k_{n′} ≥ 1 − tol` and `k_{n″} < 1 − tol`, symmetrically for `n″`, and
/// unresolved when neither or both pass.
pub fn classify_basin(report: &EntanglementReport, pair: PairSelector, tol: f64) -> Basin {
    let threshold = 1.0 - tol;
    let first = report.k(pair.first()).unwrap_or(0.0) >= threshold;
    let second = report.k(pair.second()).unwrap_or(0.0) >= threshold;
    match (first, second) {
        (true, false) => Basin::Subsystem(pair.first()),
        (false, true) => Basin::Subsystem(pair.second()),
        _ => Basin::Unresolved,
    }
}

/// Inclusive linear grid of `count` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let grid = Self { min, max, count };
        grid.validate("grid")?;
        Ok(grid)
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config {
                field,
                constraint: "count must be at least 2",
            });
        }
        if self.min >= self.max || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config {
                field,
                constraint: "min must be below max",
            });
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * (i as f64) / ((self.count - 1) as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

pub const DEFAULT_BASIN_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub dims: SubsystemDims,
    pub base: StateExpr,
    pub direction1: StateExpr,
    pub direction2: StateExpr,
    pub grid1: Grid,
    pub grid2: Grid,
    pub evolution: EvolutionConfig,
    pub basin_tol: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid1.validate("grid1")?;
        self.grid2.validate("grid2")?;
        if !(self.basin_tol > 0.0 && self.basin_tol < 0.1) {
            return Err(Error::Config {
                field: "basin_tol",
                constraint: "must lie in (0, 0.1)",
            });
        }
        self.evolution.validate()
    }

    pub fn cell_count(&self) -> usize {
        self.grid1.count * self.grid2.count
    }

    /// `(ε1 index, ε2 index)` of row-major position `k`.
    pub fn cell_indices(&self, k: usize) -> (usize, usize) {
        (k / self.grid2.count, k % self.grid2.count)
    }

    /// Expression `base + iε1·direction1 + iε2·direction2`.
    pub fn cell_expr(&self, eps1: f64, eps2: f64) -> StateExpr {
        self.base
            .plus_scaled(C64::new(0.0, eps1), &self.direction1)
            .plus_scaled(C64::new(0.0, eps2), &self.direction2)
    }

    pub fn initial_state(&self, eps1: f64, eps2: f64) -> Result<StateVector> {
        build_state(&self.cell_expr(eps1, eps2), &self.dims)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done {
        report: EntanglementReport,
        basin: Basin,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub eps1: f64,
    pub eps2: f64,
    pub outcome: CellOutcome,
}

impl Cell {
    pub fn report(&self) -> Option<&EntanglementReport> {
        match &self.outcome {
            CellOutcome::Done { report, .. } => Some(report),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn basin(&self) -> Basin {
        match &self.outcome {
            CellOutcome::Done { basin, .. } => *basin,
            CellOutcome::Failed(_) => Basin::Unresolved,
        }
    }
}

/// Evolves one initial state to `duration` and labels it.
pub fn run_state(
    psi0: &StateVector,
    bases: &SubsystemBases,
    evolution: &EvolutionConfig,
    basin_tol: f64,
) -> Result<(EntanglementReport, Basin)> {
    let last = evolve_final(psi0, bases, evolution)?;
    let report = EntanglementReport::compute(&last, bases, evolution.duration, &[evolution.pair])?;
    let basin = classify_basin(&report, evolution.pair, basin_tol);
    Ok((report, basin))
}

/// Evaluates row-major cell `k`. Failures are captured in the cell.
pub fn run_cell(spec: &SweepSpec, bases: &SubsystemBases, k: usize) -> Cell {
    let (i, j) = spec.cell_indices(k);
    let eps1 = spec.grid1.value(i);
    let eps2 = spec.grid2.value(j);
    let outcome = spec
        .initial_state(eps1, eps2)
        .and_then(|psi| run_state(&psi, bases, &spec.evolution, spec.basin_tol))
        .map(|(report, basin)| CellOutcome::Done { report, basin })
        .unwrap_or_else(|e| CellOutcome::Failed(e.to_string()));
    Cell { eps1, eps2, outcome }
}
