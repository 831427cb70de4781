//! The norm-preserving nonlinear flow
//!
//! ```text
//! dψ/ds = [−i H − (Q − ⟨Q⟩)] ψ,     s = γt,  H in units of ħγ
//! ```
//!
//! integrated with fixed-step classical RK4. `Q` depends on the state and is
//! recomputed at every stage.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent when std is linked
use num_traits::Float;

use crate::entanglement::{EntanglementReport, PairKernel, PairSelector, SubsystemBases};
use crate::hilbert::{inner_slices, DenseOperator, StateVector};
use crate::{Error, Result, C64, TOL};

const ZERO: C64 = C64::new(0.0, 0.0);

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_DURATION: f64 = 50.0;

/// Integration parameters in dimensionless time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub pair: PairSelector,
    /// Hamiltonian in units of ħγ.
    pub hamiltonian: Option<DenseOperator>,
    pub step: f64,
    pub duration: f64,
    /// Record a sample every this many steps.
    pub record_stride: usize,
    pub renormalize_each_step: bool,
    /// Stop once τ of the driven pair falls below this value.
    pub early_stop_tau: Option<f64>,
}

impl EvolutionConfig {
    pub fn new(pair: PairSelector) -> Self {
        Self {
            pair,
            hamiltonian: None,
            step: DEFAULT_STEP,
            duration: DEFAULT_DURATION,
            record_stride: 100,
            renormalize_each_step: true,
            early_stop_tau: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step <= 0.0 || !self.step.is_finite() {
            return Err(Error::Config {
                field: "step",
                constraint: "must be positive and finite",
            });
        }
        if self.duration <= 0.0 || !self.duration.is_finite() {
            return Err(Error::Config {
                field: "duration",
                constraint: "must be positive and finite",
            });
        }
        if self.record_stride == 0 {
            return Err(Error::Config {
                field: "record_stride",
                constraint: "must be at least 1",
            });
        }
        if let Some(h) = &self.hamiltonian {
            let deviation = h.matrix().hermiticity_deviation();
            if deviation > TOL {
                return Err(Error::NotHermitian(deviation));
            }
        }
        if let Some(t) = self.early_stop_tau {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Config {
                    field: "early_stop_tau",
                    constraint: "must be non-negative",
                });
            }
        }
        Ok(())
    }

    /// Number of steps to reach `duration`.
    pub fn step_count(&self) -> usize {
        (self.duration / self.step).round().max(1.0) as usize
    }
}

/// Right-hand side evaluator with preallocated buffers.
#[derive(Debug, Clone)]
pub struct Flow {
    kernel: PairKernel,
    hamiltonian: Option<DenseOperator>,
    q_image: Vec<C64>,
}

impl Flow {
    pub fn new(bases: &SubsystemBases, config: &EvolutionConfig) -> Result<Self> {
        config.validate()?;
        if let Some(h) = &config.hamiltonian {
            if h.dims() != bases.dims() {
                return Err(Error::DimensionMismatch {
                    expected: bases.dims().total(),
                    got: h.dims().total(),
                });
            }
        }
        Ok(Self {
            kernel: PairKernel::new(bases, config.pair)?,
            hamiltonian: config.hamiltonian.clone(),
            q_image: vec![ZERO; bases.dims().total()],
        })
    }

    /// Writes `dψ/ds` into `out`.
    pub fn rhs_into(&mut self, psi: &[C64], out: &mut [C64]) {
        self.kernel.apply_q_into(psi, &mut self.q_image);
        let mean_q = inner_slices(psi, &self.q_image);
        for ((o, q), p) in out.iter_mut().zip(&self.q_image).zip(psi) {
            *o = p * mean_q - q;
        }
        if let Some(h) = &self.hamiltonian {
            let m = h.matrix();
            for (i, o) in out.iter_mut().enumerate() {
                let hp: C64 = m.row(i).iter().zip(psi).map(|(a, b)| a * b).sum();
                *o += C64::new(hp.im, -hp.re);
            }
        }
    }

    pub fn tau(&mut self, psi: &[C64]) -> f64 {
        self.kernel.tau(psi)
    }
}

/// `dψ/ds` for a normalized state.
pub fn rhs(psi: &StateVector, bases: &SubsystemBases, config: &EvolutionConfig) -> Result<StateVector> {
    let mut flow = Flow::new(bases, config)?;
    let mut out = StateVector::zeros(psi.dims().clone());
    flow.rhs_into(psi.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// Fixed-step RK4 integrator holding its stage buffers.
#[derive(Debug, Clone)]
pub struct Integrator {
    flow: Flow,
    step: f64,
    renormalize: bool,
    k: [Vec<C64>; 4],
    stage: Vec<C64>,
    last_drift: f64,
}

impl Integrator {
    pub fn new(bases: &SubsystemBases, config: &EvolutionConfig) -> Result<Self> {
        let flow = Flow::new(bases, config)?;
        let total = bases.dims().total();
        Ok(Self {
            flow,
            step: config.step,
            renormalize: config.renormalize_each_step,
            k: [vec![ZERO; total], vec![ZERO; total], vec![ZERO; total], vec![ZERO; total]],
            stage: vec![ZERO; total],
            last_drift: 0.0,
        })
    }

    /// `|‖ψ‖ − 1|` after the last step, before any renormalization.
    pub fn last_norm_drift(&self) -> f64 {
        self.last_drift
    }

    pub fn flow_mut(&mut self) -> &mut Flow {
        &mut self.flow
    }

    /// Advances `psi` in place by one step. `s` is only used for error
    /// reporting.
    pub fn advance(&mut self, psi: &mut [C64], s: f64) -> Result<()> {
        let h = self.step;
        let [k1, k2, k3, k4] = &mut self.k;
        self.flow.rhs_into(psi, k1);
        for ((st, p), k) in self.stage.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *st = p + k * (0.5 * h);
        }
        self.flow.rhs_into(&self.stage, k2);
        for ((st, p), k) in self.stage.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *st = p + k * (0.5 * h);
        }
        self.flow.rhs_into(&self.stage, k3);
        for ((st, p), k) in self.stage.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *st = p + k * h;
        }
        self.flow.rhs_into(&self.stage, k4);
        let sixth = h / 6.0;
        let mut norm_sqr = 0.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
            norm_sqr += p.norm_sqr();
        }
        if !norm_sqr.is_finite() {
            return Err(Error::NumericalFailure { s: s + h });
        }
        let norm = norm_sqr.sqrt();
        self.last_drift = (norm - 1.0).abs();
        if self.renormalize {
            let inv = 1.0 / norm;
            psi.iter_mut().for_each(|p| *p *= inv);
        }
        Ok(())
    }
}

/// One RK4 step from a normalized state.
pub fn step(psi: &StateVector, bases: &SubsystemBases, config: &EvolutionConfig) -> Result<StateVector> {
    let mut integrator = Integrator::new(bases, config)?;
    let mut next = psi.clone();
    integrator.advance(next.amplitudes_mut(), 0.0)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub state: StateVector,
    pub report: EntanglementReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: EvolutionConfig,
    pub samples: Vec<Sample>,
    /// Largest `|‖ψ‖ − 1|` seen after any step, before renormalization.
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("a trajectory always holds its initial sample")
    }

    pub fn final_state(&self) -> &StateVector {
        &self.final_sample().state
    }

    /// τ of the driven pair at every sample.
    pub fn pair_taus(&self) -> Vec<f64> {
        let p = self.config.pair;
        self.samples
            .iter()
            .map(|s| s.report.tau(p.first(), p.second()).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Integrates to `duration`, sampling the initial state, every
/// `record_stride` steps, and the final state.
pub fn evolve(psi0: &StateVector, bases: &SubsystemBases, config: &EvolutionConfig) -> Result<Trajectory> {
    let mut integrator = Integrator::new(bases, config)?;
    if psi0.dims() != bases.dims() {
        return Err(Error::DimensionMismatch {
            expected: bases.dims().total(),
            got: psi0.dims().total(),
        });
    }
    let overrides = [config.pair];
    let report = |psi: &StateVector, s: f64| EntanglementReport::compute(psi, bases, s, &overrides);
    let mut psi = psi0.clone();
    let mut samples = vec![Sample {
        s: 0.0,
        report: report(&psi, 0.0)?,
        state: psi.clone(),
    }];
    let steps = config.step_count();
    let mut max_norm_drift = 0.0_f64;
    for n in 1..=steps {
        let s_prev = (n - 1) as f64 * config.step;
        integrator.advance(psi.amplitudes_mut(), s_prev)?;
        max_norm_drift = max_norm_drift.max(integrator.last_norm_drift());
        let s = n as f64 * config.step;
        let stop = config
            .early_stop_tau
            .is_some_and(|limit| integrator.flow_mut().tau(psi.amplitudes()) < limit);
        if n % config.record_stride == 0 || n == steps || stop {
            samples.push(Sample {
                s,
                report: report(&psi, s)?,
                state: psi.clone(),
            });
        }
        if stop {
            break;
        }
    }
    Ok(Trajectory {
        config: config.clone(),
        samples,
        max_norm_drift,
    })
}

/// Integrates without recording; returns the final state only.
pub fn evolve_final(psi0: &StateVector, bases: &SubsystemBases, config: &EvolutionConfig) -> Result<StateVector> {
    let mut integrator = Integrator::new(bases, config)?;
    let mut psi = psi0.clone();
    for n in 0..config.step_count() {
        integrator.advance(psi.amplitudes_mut(), n as f64 * config.step)?;
        if config
            .early_stop_tau
            .is_some_and(|limit| integrator.flow_mut().tau(psi.amplitudes()) < limit)
        {
            break;
        }
    }
    Ok(psi)
}
