//! Parallel sweep execution.

use disentangle_core::basin::{run_cell, Basin, Cell, SweepSpec};
use disentangle_core::entanglement::SubsystemBases;
use rayon::prelude::*;
use serde::Serialize;

/// Evaluates every cell of `spec` on `workers` threads (all cores when
/// `None`). Results are collected by cell position, so the output never
/// depends on scheduling.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Vec<Cell> {
    let bases = SubsystemBases::new(&spec.dims);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| {
        (0..spec.cell_count())
            .into_par_iter()
            .map(|k| run_cell(spec, &bases, k))
            .collect()
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BasinCounts {
    /// Cells per basin label, `B1` … `BN`.
    pub basins: std::collections::BTreeMap<String, usize>,
    pub unresolved: usize,
    pub failed: usize,
}

pub fn basin_counts(cells: &[Cell]) -> BasinCounts {
    let mut counts = BasinCounts::default();
    for cell in cells {
        match (cell.report(), cell.basin()) {
            (None, _) => counts.failed += 1,
            (Some(_), Basin::Unresolved) => counts.unresolved += 1,
            (Some(_), basin) => *counts.basins.entry(basin.to_string()).or_default() += 1,
        }
    }
    counts
}
