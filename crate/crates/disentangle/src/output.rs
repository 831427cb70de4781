//! CSV, text and JSON writers.
//!
//! Every number goes out as `{:.16e}`, 17 significant digits, which parses
//! back to the identical double.

use std::fs;
use std::path::{Path, PathBuf};

use disentangle_core::basin::Cell;
use disentangle_core::dynamics::Trajectory;
use disentangle_core::entanglement::{report_pairs, EntanglementReport};
use disentangle_core::gellmann::GellMannBasis;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::AppError;

pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn tau_columns(count: usize) -> Vec<String> {
    report_pairs(count).iter().map(|(a, b)| format!("tau{a}{b}")).collect()
}

fn report_fields(report: &EntanglementReport, row: &mut Vec<String>) {
    row.extend(report.bloch_lengths.iter().map(|&k| number(k)));
    row.extend(report.taus.iter().map(|t| number(t.tau)));
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory CSV writer does not fail");
    String::from_utf8(bytes).expect("CSV fields are ASCII")
}

/// Trajectory table: `s`, `re{i}`/`im{i}` per basis index, `k1..kN`, the
/// pair τ columns, then optionally `bloch{n}_{a}` (1-based `a`).
pub fn trajectory_csv(trajectory: &Trajectory, bloch_columns: bool) -> String {
    let first = &trajectory.samples[0];
    let total = first.state.dims().total();
    let count = first.state.dims().count();
    let mut header = vec!["s".to_string()];
    for i in 0..total {
        header.push(format!("re{i}"));
        header.push(format!("im{i}"));
    }
    header.extend((1..=count).map(|n| format!("k{n}")));
    header.extend(tau_columns(count));
    if bloch_columns {
        for (n, v) in first.report.bloch.iter().enumerate() {
            header.extend((1..=v.len()).map(|a| format!("bloch{}_{a}", n + 1)));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory");
    for sample in &trajectory.samples {
        let mut row = vec![number(sample.s)];
        for a in sample.state.amplitudes() {
            row.push(number(a.re));
            row.push(number(a.im));
        }
        report_fields(&sample.report, &mut row);
        if bloch_columns {
            row.extend(sample.report.bloch.iter().flatten().map(|&x| number(x)));
        }
        w.write_record(&row).expect("in-memory");
    }
    finish(w)
}

/// Sweep table in row-major cell order: `eps1, eps2, k1..kN`, the pair τ
/// columns, `basin`, `status`. Failed cells leave the numeric columns empty.
pub fn sweep_csv(cells: &[Cell], subsystem_count: usize) -> String {
    let mut header = vec!["eps1".to_string(), "eps2".to_string()];
    header.extend((1..=subsystem_count).map(|n| format!("k{n}")));
    header.extend(tau_columns(subsystem_count));
    header.push("basin".into());
    header.push("status".into());
    let numeric = header.len() - 4;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory");
    for cell in cells {
        let mut row = vec![number(cell.eps1), number(cell.eps2)];
        match cell.report() {
            Some(report) => {
                report_fields(report, &mut row);
                row.push(cell.basin().to_string());
                row.push("ok".into());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), numeric));
                row.push(cell.basin().to_string());
                let disentangle_core::basin::CellOutcome::Failed(message) = &cell.outcome else {
                    unreachable!()
                };
                row.push(format!("failed: {message}"));
            }
        }
        w.write_record(&row).expect("in-memory");
    }
    finish(w)
}

/// Plain-text listing of every generator, one row per line, entries as
/// `re im` pairs.
pub fn gellmann_text(basis: &GellMannBasis) -> String {
    let d = basis.dim();
    let mut out = format!("# generalized Gell-Mann matrices, d = {d}, {} generators\n", basis.len());
    out.push_str("# each entry is written as: re im\n");
    for (a, m) in basis.matrices().iter().enumerate() {
        out.push_str(&format!("lambda {}\n", a + 1));
        for i in 0..d {
            let row: Vec<String> = m
                .row(i)
                .iter()
                .map(|z| format!("{} {}", number(z.re), number(z.im)))
                .collect();
            out.push_str(&row.join("  "));
            out.push('\n');
        }
    }
    out
}

/// JSON sidecar written next to every CSV.
#[derive(Debug, Serialize)]
pub struct Metadata<'a, S: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub wall_time_s: f64,
    pub config: &'a RunConfig,
    pub summary: S,
}

/// `run.csv` → `run.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(AppError::write(parent))?;
    }
    fs::write(path, contents).map_err(AppError::write(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).expect("metadata is always serializable");
    text.push('\n');
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use disentangle_core::basin::{Basin, CellOutcome};
    use disentangle_core::dynamics::{evolve, EvolutionConfig};
    use disentangle_core::entanglement::{PairSelector, SubsystemBases};
    use disentangle_core::hilbert::SubsystemDims;
    use disentangle_core::statelib::ghz;

    #[test]
    fn numbers_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -5.2e-4, 1e-300, f64::MAX, 0.0, -0.0, 123456789.12345679] {
            let text = number(v);
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{text}");
        }
        assert_eq!(number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn trajectory_header_and_rows() {
        let dims = SubsystemDims::qubits(3).unwrap();
        let bases = SubsystemBases::new(&dims);
        let mut config = EvolutionConfig::new(PairSelector::new(1, 2, 1.0 / 3.0).unwrap());
        config.duration = 0.01;
        config.record_stride = 5;
        let traj = evolve(&ghz(), &bases, &config).unwrap();
        let text = trajectory_csv(&traj, true);
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&header[..3], &["s", "re0", "im0"]);
        assert_eq!(&header[17..23], &["k1", "k2", "k3", "tau23", "tau31", "tau12"]);
        assert_eq!(header[23], "bloch1_1");
        assert_eq!(header.len(), 23 + 9);
        assert_eq!(lines.clone().count(), traj.samples.len());
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), header.len());
        let no_bloch = trajectory_csv(&traj, false);
        assert_eq!(no_bloch.lines().next().unwrap().split(',').count(), 23);
    }

    #[test]
    fn failed_cells_keep_their_slot() {
        let cells = vec![Cell {
            eps1: 0.0,
            eps2: 1.0,
            outcome: CellOutcome::Failed("numerical failure at s = 2".into()),
        }];
        let text = sweep_csv(&cells, 3);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), 10);
        assert_eq!(row[8], Basin::Unresolved.to_string());
        assert!(row[9].starts_with("failed"));
    }

    #[test]
    fn pauli_dump() {
        let text = gellmann_text(&GellMannBasis::generate(2).unwrap());
        assert_eq!(text.matches("lambda").count(), 3);
        assert!(text.contains(
            "lambda 2\n0.0000000000000000e0 0.0000000000000000e0  0.0000000000000000e0 -1.0000000000000000e0\n"
        ));
    }
}
