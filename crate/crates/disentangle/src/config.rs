//! Run configuration: a TOML document, optionally overridden by flags.
//!
//! A metadata sidecar written by `evolve` or `sweep` is also accepted as a
//! config file; its `config` member is the fully resolved configuration of
//! that run.

use std::fs;
use std::path::{Path, PathBuf};

use disentangle_core::basin::{Grid, SweepSpec, DEFAULT_BASIN_TOL};
use disentangle_core::dynamics::{EvolutionConfig, DEFAULT_DURATION, DEFAULT_STEP};
use disentangle_core::entanglement::{default_eta, PairSelector};
use disentangle_core::hilbert::{DenseOperator, StateVector, SubsystemDims};
use disentangle_core::matrix::CMatrix;
use disentangle_core::statelib::{build_state, parse_state_expr_for, StateExpr};
use disentangle_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

/// A rejected configuration value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid {field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Local dimensions `d1, …, dN`.
    pub dims: Vec<usize>,
    /// Driven pair, 1-based and ordered.
    pub pair: [usize; 2],
    /// Coupling prefactor; `None` selects 1/3 for two qubits and 1 otherwise.
    pub eta: Option<f64>,
    pub step: f64,
    pub smax: f64,
    /// Trajectory rows are written every this many steps.
    pub record_stride: usize,
    pub renormalize: bool,
    pub early_stop_tau: Option<f64>,
    /// Hamiltonian in units of the coupling rate; absent means `H = 0`.
    pub hamiltonian: Option<MatrixConfig>,
    /// Initial state expression for `evolve`.
    pub state: Option<String>,
    /// States whose final fidelity `evolve` reports.
    pub targets: Vec<String>,
    /// Append Bloch vector components to trajectory rows.
    pub bloch_columns: bool,
    pub seed: u64,
    /// Sweep worker threads; `None` uses every available core.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 2, 2],
            pair: [1, 2],
            eta: None,
            step: DEFAULT_STEP,
            smax: DEFAULT_DURATION,
            record_stride: 100,
            renormalize: true,
            early_stop_tau: None,
            hamiltonian: None,
            state: None,
            targets: Vec::new(),
            bloch_columns: true,
            seed: 1,
            workers: None,
            out: None,
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: String,
    pub direction1: String,
    pub direction2: String,
    pub eps1: GridConfig,
    pub eps2: GridConfig,
    pub basin_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: "ghz".into(),
            direction1: "bell1(pi)".into(),
            direction2: "bell2(pi)".into(),
            eps1: GridConfig::default(),
            eps2: GridConfig::default(),
            basin_tol: DEFAULT_BASIN_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: -1e-3,
            max: 1e-3,
            count: 41,
        }
    }
}

/// Dense matrix as rows of real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

/// Values given on the command line. Every `Some` replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dims: Option<Vec<usize>>,
    pub pair: Option<[usize; 2]>,
    pub eta: Option<f64>,
    pub step: Option<f64>,
    pub smax: Option<f64>,
    pub state: Option<String>,
    pub targets: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub record_stride: Option<usize>,
    pub no_renormalize: bool,
    pub base: Option<String>,
    pub direction1: Option<String>,
    pub direction2: Option<String>,
    pub eps1: Option<GridConfig>,
    pub eps2: Option<GridConfig>,
    pub basin_tol: Option<f64>,
}

impl RunConfig {
    /// Reads a TOML config, or the `config` member of a JSON sidecar.
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path).map_err(|source| AppError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = if is_json {
            let mut value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| ConfigError::new("config", e.to_string()))?;
            let inner = value.get_mut("config").map(serde_json::Value::take).unwrap_or(value);
            serde_json::from_value(inner).map_err(|e| ConfigError::new("config", e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError::new("config", e.to_string()))?
        };
        Ok(config)
    }

    pub fn apply(&mut self, o: Overrides) {
        fn set<T>(slot: &mut T, value: Option<T>) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        set(&mut self.dims, o.dims);
        set(&mut self.pair, o.pair);
        set(&mut self.step, o.step);
        set(&mut self.smax, o.smax);
        set(&mut self.targets, o.targets);
        set(&mut self.seed, o.seed);
        set(&mut self.record_stride, o.record_stride);
        set(&mut self.sweep.base, o.base);
        set(&mut self.sweep.direction1, o.direction1);
        set(&mut self.sweep.direction2, o.direction2);
        set(&mut self.sweep.eps1, o.eps1);
        set(&mut self.sweep.eps2, o.eps2);
        set(&mut self.sweep.basin_tol, o.basin_tol);
        if o.eta.is_some() {
            self.eta = o.eta;
        }
        if o.state.is_some() {
            self.state = o.state;
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        if o.no_renormalize {
            self.renormalize = false;
        }
    }

    pub fn subsystem_dims(&self) -> Result<SubsystemDims, ConfigError> {
        if self.dims.len() < 2 {
            return Err(ConfigError::new("dims", "needs at least two subsystems"));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(ConfigError::new("dims", format!("every dimension must be at least 2, got {d}")));
        }
        let total = self.dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if !total.is_some_and(|t| t <= 1 << 24) {
            return Err(ConfigError::new("dims", "total dimension must not exceed 2^24"));
        }
        SubsystemDims::new(self.dims.clone()).map_err(|e| ConfigError::new("dims", e.to_string()))
    }

    pub fn pair_selector(&self, dims: &SubsystemDims) -> Result<PairSelector, ConfigError> {
        let [a, b] = self.pair;
        let count = dims.count();
        if a == 0 || b == 0 || a > count || b > count {
            return Err(ConfigError::new("pair", format!("members must lie in 1..={count}")));
        }
        if a == b {
            return Err(ConfigError::new("pair", "members must differ"));
        }
        let eta = match self.eta {
            Some(eta) if !(eta > 0.0 && eta.is_finite()) => {
                return Err(ConfigError::new("eta", "must be positive and finite"))
            }
            Some(eta) => eta,
            None => default_eta(dims, a, b).map_err(|e| ConfigError::new("pair", e.to_string()))?,
        };
        PairSelector::new(a, b, eta).map_err(|e| ConfigError::new("pair", e.to_string()))
    }

    pub fn evolution(&self, dims: &SubsystemDims) -> Result<EvolutionConfig, ConfigError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(ConfigError::new("step", "must be positive and finite"));
        }
        if !(self.smax > 0.0 && self.smax.is_finite()) {
            return Err(ConfigError::new("smax", "must be positive and finite"));
        }
        if self.step > self.smax {
            return Err(ConfigError::new("step", "must not exceed smax"));
        }
        if self.record_stride == 0 {
            return Err(ConfigError::new("record_stride", "must be at least 1"));
        }
        if let Some(t) = self.early_stop_tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(ConfigError::new("early_stop_tau", "must be non-negative and finite"));
            }
        }
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(ConfigError::new("workers", "must be at least 1"));
            }
        }
        let mut config = EvolutionConfig::new(self.pair_selector(dims)?);
        config.step = self.step;
        config.duration = self.smax;
        config.record_stride = self.record_stride;
        config.renormalize_each_step = self.renormalize;
        config.early_stop_tau = self.early_stop_tau;
        config.hamiltonian = self.hamiltonian.as_ref().map(|h| h.to_operator(dims)).transpose()?;
        Ok(config)
    }

    pub fn initial_state(&self, dims: &SubsystemDims) -> Result<(StateExpr, StateVector), ConfigError> {
        let text = self
            .state
            .as_deref()
            .ok_or_else(|| ConfigError::new("state", "is required (set --state or `state` in the config)"))?;
        let expr = expression("state", text, dims)?;
        let psi = build_state(&expr, dims).map_err(|e| ConfigError::new("state", e.to_string()))?;
        Ok((expr, psi))
    }

    /// Target states for fidelity reports, each paired with its source text.
    pub fn target_states(&self, dims: &SubsystemDims) -> Result<Vec<(String, StateVector)>, ConfigError> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let field = format!("targets[{i}]");
                let expr = expression(&field, text, dims)?;
                let psi = build_state(&expr, dims).map_err(|e| ConfigError::new(field, e.to_string()))?;
                Ok((text.clone(), psi))
            })
            .collect()
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let dims = self.subsystem_dims()?;
        let evolution = self.evolution(&dims)?;
        let s = &self.sweep;
        let grid = |field: &str, g: &GridConfig| {
            Grid::new(g.min, g.max, g.count).map_err(|_| {
                ConfigError::new(
                    format!("sweep.{field}"),
                    "needs finite min < max and count >= 2",
                )
            })
        };
        if !(s.basin_tol > 0.0 && s.basin_tol < 0.1) {
            return Err(ConfigError::new("sweep.basin_tol", "must lie in (0, 0.1)"));
        }
        let spec = SweepSpec {
            base: expression("sweep.base", &s.base, &dims)?,
            direction1: expression("sweep.direction1", &s.direction1, &dims)?,
            direction2: expression("sweep.direction2", &s.direction2, &dims)?,
            grid1: grid("eps1", &s.eps1)?,
            grid2: grid("eps2", &s.eps2)?,
            evolution,
            basin_tol: s.basin_tol,
            dims,
        };
        spec.validate().map_err(|e| ConfigError::new("sweep", e.to_string()))?;
        Ok(spec)
    }
}

impl MatrixConfig {
    fn to_operator(&self, dims: &SubsystemDims) -> Result<DenseOperator, ConfigError> {
        let n = dims.total();
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !(self.im.is_empty() || shape_ok(&self.im)) {
            return Err(ConfigError::new("hamiltonian", format!("must be {n} x {n}")));
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let im = self.im.get(i).map_or(0.0, |r| r[j]);
                m[(i, j)] = C64::new(self.re[i][j], im);
            }
        }
        let deviation = m.hermiticity_deviation();
        if deviation > disentangle_core::TOL {
            return Err(ConfigError::new(
                "hamiltonian",
                format!("must be Hermitian (deviation {deviation:e})"),
            ));
        }
        DenseOperator::new(dims.clone(), m).map_err(|e| ConfigError::new("hamiltonian", e.to_string()))
    }
}

fn expression(field: &str, text: &str, dims: &SubsystemDims) -> Result<StateExpr, ConfigError> {
    parse_state_expr_for(text, dims).map_err(|e| ConfigError::new(field, format!("{e} in {text:?}")))
}

/// Parses `min,max,count`.
pub fn parse_grid(text: &str) -> Result<GridConfig, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [min, max, count] = parts.as_slice() else {
        return Err("expected min,max,count".into());
    };
    Ok(GridConfig {
        min: min.parse().map_err(|_| format!("bad number {min:?}"))?,
        max: max.parse().map_err(|_| format!("bad number {max:?}"))?,
        count: count.parse().map_err(|_| format!("bad count {count:?}"))?,
    })
}
