//! Pairwise covariance tensors, the entanglement measure τ, and the nonlinear
//! operator `Q` that drives disentanglement of a subsystem pair.
//!
//! For a pair `(n′, n″)` and observables `A1` on `n′`, `A2` on `n″`:
//!
//! ```text
//! C(A1, A2) = A2 A1 |ψ⟩⟨ψ| − A1 |ψ⟩⟨ψ| A2
//! Q         = η Σ_{a1,a2} C(λ_a1, λ_a2) |ψ⟩⟨ψ| C(λ_a1, λ_a2)
//! τ         = ⟨ψ|Q|ψ⟩ = η Σ c_{a1a2}²,   c_{a1a2} = ⟨ψ|C(λ_a1, λ_a2)|ψ⟩
//! ```
//!
//! `C` is not symmetric in its arguments, so the operator for `(1, 2)` differs
//! from the one for `(2, 1)`; τ does not. Pair order is kept as given.
//!
//! [`apply_q`] never forms a `D × D` matrix. It uses
//! `Q|ψ⟩ = η Σ c_{a1a2} (‖ψ‖² λ_a2 λ_a1|ψ⟩ − ⟨λ_a2⟩ λ_a1|ψ⟩)`, which is exact
//! for any `ψ` and reduces to the familiar form when `ψ` is normalized. The
//! sum collapses to one matrix on the pair's `d1 d2`-dimensional factor.
//! [`dense_q`] is the literal transcription and serves as an oracle.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent when std is linked
use num_traits::Float;

use crate::gellmann::GellMannBasis;
use crate::hilbert::{apply_strided, embed, inner_slices, DenseOperator, LocalOperator, StateVector, SubsystemDims};
use crate::matrix::CMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// η that bounds τ to `[0, 1]` for a pair of qubits.
pub const QUBIT_ETA: f64 = 1.0 / 3.0;

/// Default η: 1/3 when both members are qubits, 1 otherwise.
pub fn default_eta(dims: &SubsystemDims, first: usize, second: usize) -> Result<f64> {
    if dims.dim(first)? == 2 && dims.dim(second)? == 2 {
        Ok(QUBIT_ETA)
    } else {
        Ok(1.0)
    }
}

/// An ordered subsystem pair `(n′, n″)` with its coefficient η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSelector {
    first: usize,
    second: usize,
    eta: f64,
}

impl PairSelector {
    pub fn new(first: usize, second: usize, eta: f64) -> Result<Self> {
        if first == second || first == 0 || second == 0 || eta <= 0.0 || !eta.is_finite() {
            return Err(Error::InvalidPair { first, second, eta });
        }
        Ok(Self { first, second, eta })
    }

    /// Pair with [`default_eta`].
    pub fn with_default_eta(dims: &SubsystemDims, first: usize, second: usize) -> Result<Self> {
        let eta = default_eta(dims, first, second)?;
        Self::new(first, second, eta)
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn second(&self) -> usize {
        self.second
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn reversed(&self) -> Self {
        Self {
            first: self.second,
            second: self.first,
            eta: self.eta,
        }
    }

    /// Same subsystems, ignoring order.
    pub fn same_members(&self, a: usize, b: usize) -> bool {
        (self.first == a && self.second == b) || (self.first == b && self.second == a)
    }

    fn check(&self, dims: &SubsystemDims) -> Result<()> {
        dims.check_subsystem(self.first)?;
        dims.check_subsystem(self.second)
    }
}

/// Gell-Mann bases for every subsystem of a [`SubsystemDims`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemBases {
    dims: SubsystemDims,
    bases: Vec<GellMannBasis>,
}

impl SubsystemBases {
    pub fn new(dims: &SubsystemDims) -> Self {
        let mut bases: Vec<GellMannBasis> = Vec::with_capacity(dims.count());
        for &d in dims.as_slice() {
            let basis = match bases.iter().find(|b| b.dim() == d) {
                Some(existing) => existing.clone(),
                None => GellMannBasis::generate(d).expect("subsystem dims are >= 2"),
            };
            bases.push(basis);
        }
        Self {
            dims: dims.clone(),
            bases,
        }
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    /// Basis of subsystem `n` (1-based).
    pub fn basis(&self, n: usize) -> Result<&GellMannBasis> {
        self.dims.check_subsystem(n)?;
        Ok(&self.bases[n - 1])
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.dims() != &self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                got: psi.dims().total(),
            });
        }
        Ok(())
    }
}

/// Real covariance matrix `c_{a1a2}` for a pair, row `a1` over the first
/// member's generators.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTensor {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CovarianceTensor {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, a1: usize, a2: usize) -> f64 {
        self.values[a1 * self.cols + a2]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Σ c², the squared Frobenius norm.
    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// One term `coefficient · buffer[index]` accumulated into `slot`.
#[derive(Debug, Clone, Copy)]
struct Term {
    slot: usize,
    index: usize,
    coefficient: C64,
}

/// Preallocated evaluator for one pair: covariance tensor and `Q|ψ⟩` without
/// heap traffic. This is the inner loop of every trajectory.
///
/// Everything is computed from the unnormalized two-body matrix
/// `ρ = tr_rest |ψ⟩⟨ψ|`, indexed first-member-major, so the cost per
/// evaluation is linear in `D` with a small `(d1 d2)²` constant. The sparse
/// generator products are flattened into term tables once, up front.
#[derive(Debug, Clone)]
pub struct PairKernel {
    pair: PairSelector,
    rows: usize,
    cols: usize,
    // offsets of the pair's local basis states and of the spectator blocks
    pair_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
    // ⟨λ_a ⊗ 1⟩, ⟨1 ⊗ λ_b⟩ and ⟨λ_a ⊗ λ_b⟩ as contractions with ρ
    first_terms: Vec<Term>,
    second_terms: Vec<Term>,
    joint_terms: Vec<Term>,
    // λ_a ⊗ λ_b and λ_a ⊗ 1 scattered into the pair generator
    product_terms: Vec<Term>,
    shift_terms: Vec<Term>,
    rho: Vec<C64>,
    first_means: Vec<f64>,
    second_means: Vec<f64>,
    covariance: Vec<f64>,
    shifts: Vec<f64>,
    norm_sqr: f64,
    generator: Vec<C64>,
}

impl PairKernel {
    pub fn new(bases: &SubsystemBases, pair: PairSelector) -> Result<Self> {
        let dims = bases.dims();
        pair.check(dims)?;
        let first = bases.basis(pair.first)?;
        let second = bases.basis(pair.second)?;
        let (d1, d2) = (first.dim(), second.dim());
        let (s1, s2) = (dims.stride(pair.first)?, dims.stride(pair.second)?);
        let m = d1 * d2;
        let local = |i1: usize, i2: usize| i1 * d2 + i2;
        let pair_offsets: Vec<usize> = (0..d1)
            .flat_map(|i1| (0..d2).map(move |i2| i1 * s1 + i2 * s2))
            .collect();
        let rest_offsets: Vec<usize> = (0..dims.total())
            .filter(|&x| (x / s1) % d1 == 0 && (x / s2) % d2 == 0)
            .collect();

        // ⟨ψ|A|ψ⟩ = Σ A_xy ρ_yx
        let mut first_terms = Vec::new();
        let mut shift_terms = Vec::new();
        for a in 0..first.len() {
            for &(r, c, v) in first.sparse(a) {
                for i2 in 0..d2 {
                    let (x, y) = (local(r, i2), local(c, i2));
                    first_terms.push(Term { slot: a, index: y * m + x, coefficient: v });
                    shift_terms.push(Term { slot: a, index: x * m + y, coefficient: v });
                }
            }
        }
        let mut second_terms = Vec::new();
        for b in 0..second.len() {
            for &(r, c, v) in second.sparse(b) {
                for i1 in 0..d1 {
                    let (x, y) = (local(i1, r), local(i1, c));
                    second_terms.push(Term { slot: b, index: y * m + x, coefficient: v });
                }
            }
        }
        let mut joint_terms = Vec::new();
        let mut product_terms = Vec::new();
        for a in 0..first.len() {
            for b in 0..second.len() {
                let slot = a * second.len() + b;
                for &(r1, c1, v1) in first.sparse(a) {
                    for &(r2, c2, v2) in second.sparse(b) {
                        let (x, y) = (local(r1, r2), local(c1, c2));
                        joint_terms.push(Term { slot, index: y * m + x, coefficient: v1 * v2 });
                        product_terms.push(Term { slot, index: x * m + y, coefficient: v1 * v2 });
                    }
                }
            }
        }
        Ok(Self {
            pair,
            rows: first.len(),
            cols: second.len(),
            pair_offsets,
            rest_offsets,
            first_terms,
            second_terms,
            joint_terms,
            product_terms,
            shift_terms,
            rho: vec![ZERO; m * m],
            first_means: vec![0.0; first.len()],
            second_means: vec![0.0; second.len()],
            covariance: vec![0.0; first.len() * second.len()],
            shifts: vec![0.0; first.len()],
            norm_sqr: 0.0,
            generator: vec![ZERO; m * m],
        })
    }

    pub fn pair(&self) -> PairSelector {
        self.pair
    }

    /// Fills the covariance buffer for `psi` (not necessarily normalized).
    fn load(&mut self, psi: &[C64]) {
        let m = self.pair_offsets.len();
        let rho = &mut self.rho;
        rho.iter_mut().for_each(|v| *v = ZERO);
        for &rest in &self.rest_offsets {
            for (x, &ox) in self.pair_offsets.iter().enumerate() {
                let px = psi[rest + ox];
                for (y, &oy) in self.pair_offsets.iter().enumerate().skip(x) {
                    rho[x * m + y] += px * psi[rest + oy].conj();
                }
            }
        }
        for x in 0..m {
            for y in 0..x {
                rho[x * m + y] = rho[y * m + x].conj();
            }
        }
        let rho = &self.rho;
        // only real parts survive: every operator here is Hermitian
        let contract = |terms: &[Term], out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = 0.0);
            for t in terms {
                let r = rho[t.index];
                out[t.slot] += t.coefficient.re * r.re - t.coefficient.im * r.im;
            }
        };
        self.norm_sqr = (0..m).map(|x| rho[x * m + x].re).sum();
        contract(&self.first_terms, &mut self.first_means);
        contract(&self.second_terms, &mut self.second_means);
        contract(&self.joint_terms, &mut self.covariance);
        for a in 0..self.rows {
            for b in 0..self.cols {
                let c = &mut self.covariance[a * self.cols + b];
                *c = self.norm_sqr * *c - self.first_means[a] * self.second_means[b];
            }
        }
    }

    pub fn covariance(&mut self, psi: &[C64]) -> CovarianceTensor {
        self.load(psi);
        CovarianceTensor {
            rows: self.rows,
            cols: self.cols,
            values: self.covariance.clone(),
        }
    }

    /// τ = η Σ c².
    pub fn tau(&mut self, psi: &[C64]) -> f64 {
        self.load(psi);
        self.pair.eta * self.covariance.iter().map(|c| c * c).sum::<f64>()
    }

    /// Writes `Q|ψ⟩` into `out` and returns τ for the same state.
    pub fn apply_q_into(&mut self, psi: &[C64], out: &mut [C64]) -> f64 {
        self.load(psi);
        let m = self.pair_offsets.len();
        let eta = self.pair.eta;
        // G = η (‖ψ‖² Σ c_ab λ_a ⊗ λ_b − Σ_a (Σ_b c_ab ⟨λ_b⟩) λ_a ⊗ 1)
        for (a, shift) in self.shifts.iter_mut().enumerate() {
            let row = &self.covariance[a * self.cols..(a + 1) * self.cols];
            *shift = row.iter().zip(&self.second_means).map(|(c, mean)| c * mean).sum();
        }
        self.generator.iter_mut().for_each(|g| *g = ZERO);
        let weight = eta * self.norm_sqr;
        for t in &self.product_terms {
            self.generator[t.index] += t.coefficient * (weight * self.covariance[t.slot]);
        }
        for t in &self.shift_terms {
            self.generator[t.index] -= t.coefficient * (eta * self.shifts[t.slot]);
        }
        for &rest in &self.rest_offsets {
            for (x, &ox) in self.pair_offsets.iter().enumerate() {
                let row = &self.generator[x * m..(x + 1) * m];
                out[rest + ox] = row
                    .iter()
                    .zip(&self.pair_offsets)
                    .map(|(g, &oy)| g * psi[rest + oy])
                    .sum();
            }
        }
        eta * self.covariance.iter().map(|c| c * c).sum::<f64>()
    }
}

/// Covariance tensor `c_{a1a2} = ⟨λ_a2 λ_a1⟩ − ⟨λ_a1⟩⟨λ_a2⟩` for a normalized state.
pub fn covariance_tensor(psi: &StateVector, pair: PairSelector, bases: &SubsystemBases) -> Result<CovarianceTensor> {
    bases.check_state(psi)?;
    Ok(PairKernel::new(bases, pair)?.covariance(psi.amplitudes()))
}

/// τ = ⟨Q⟩ for the pair.
pub fn tau(psi: &StateVector, pair: PairSelector, bases: &SubsystemBases) -> Result<f64> {
    bases.check_state(psi)?;
    Ok(PairKernel::new(bases, pair)?.tau(psi.amplitudes()))
}

/// Matrix-free `Q|ψ⟩` (unnormalized).
pub fn apply_q(psi: &StateVector, pair: PairSelector, bases: &SubsystemBases) -> Result<StateVector> {
    bases.check_state(psi)?;
    let mut out = StateVector::zeros(psi.dims().clone());
    PairKernel::new(bases, pair)?.apply_q_into(psi.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// Dense `Q` built term by term from full `D × D` matrices. Intended only as
/// an oracle for small `D`.
pub fn dense_q(psi: &StateVector, pair: PairSelector, bases: &SubsystemBases) -> Result<DenseOperator> {
    bases.check_state(psi)?;
    pair.check(bases.dims())?;
    let dims = bases.dims();
    let projector = CMatrix::outer(psi.amplitudes(), psi.amplitudes());
    let embedded = |n: usize, m: &CMatrix| -> Result<CMatrix> {
        Ok(embed(&LocalOperator::new(n, m.clone())?, dims)?.matrix().clone())
    };
    let mut q = CMatrix::zeros(dims.total(), dims.total());
    for l1 in bases.basis(pair.first)?.matrices() {
        let a1 = embedded(pair.first, l1)?;
        for l2 in bases.basis(pair.second)?.matrices() {
            let a2 = embedded(pair.second, l2)?;
            let a2a1p = &(&a2 * &a1) * &projector;
            let a1pa2 = &(&a1 * &projector) * &a2;
            let c = &a2a1p - &a1pa2;
            let term = &(&c * &projector) * &c;
            q = &q + &term;
        }
    }
    DenseOperator::new(dims.clone(), q.scale(C64::new(pair.eta, 0.0)))
}

/// Bloch vector of subsystem `n`: `(⟨λ_1⟩, …, ⟨λ_{d²−1}⟩)`.
pub fn bloch_vector(psi: &StateVector, n: usize, bases: &SubsystemBases) -> Result<Vec<f64>> {
    bases.check_state(psi)?;
    let basis = bases.basis(n)?;
    let stride = bases.dims().stride(n)?;
    let mut image = vec![ZERO; psi.dims().total()];
    Ok((0..basis.len())
        .map(|a| {
            apply_strided(basis.matrix(a).as_slice(), basis.dim(), stride, psi.amplitudes(), &mut image);
            inner_slices(psi.amplitudes(), &image).re
        })
        .collect())
}

fn length(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Pair order used in reports: `(2,3), (3,1), (1,2)` for three subsystems,
/// lexicographic `(i, j)`, `i < j` otherwise.
pub fn report_pairs(count: usize) -> Vec<(usize, usize)> {
    if count == 3 {
        vec![(2, 3), (3, 1), (1, 2)]
    } else {
        (1..=count)
            .flat_map(|i| (i + 1..=count).map(move |j| (i, j)))
            .collect()
    }
}

/// τ for one unordered pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTau {
    pub pair: (usize, usize),
    pub tau: f64,
}

/// Entanglement summary of one state at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub time: f64,
    /// Bloch vectors, subsystem 1 first.
    pub bloch: Vec<Vec<f64>>,
    /// Bloch lengths `k_n`, subsystem 1 first.
    pub bloch_lengths: Vec<f64>,
    /// τ in [`report_pairs`] order.
    pub taus: Vec<PairTau>,
}

impl EntanglementReport {
    /// Evaluates every pair with its default η, unless a pair in `overrides`
    /// names the same members.
    pub fn compute(psi: &StateVector, bases: &SubsystemBases, time: f64, overrides: &[PairSelector]) -> Result<Self> {
        bases.check_state(psi)?;
        let dims = bases.dims();
        let bloch: Vec<Vec<f64>> = (1..=dims.count())
            .map(|n| bloch_vector(psi, n, bases))
            .collect::<Result<_>>()?;
        let bloch_lengths = bloch.iter().map(|v| length(v)).collect();
        let taus = report_pairs(dims.count())
            .into_iter()
            .map(|(i, j)| {
                let pair = match overrides.iter().find(|p| p.same_members(i, j)) {
                    Some(p) => *p,
                    None => PairSelector::with_default_eta(dims, i, j)?,
                };
                Ok(PairTau {
                    pair: (i, j),
                    tau: tau(psi, pair, bases)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            time,
            bloch,
            bloch_lengths,
            taus,
        })
    }

    /// τ for the unordered pair `{a, b}`.
    pub fn tau(&self, a: usize, b: usize) -> Option<f64> {
        self.taus
            .iter()
            .find(|t| t.pair == (a, b) || t.pair == (b, a))
            .map(|t| t.tau)
    }

    /// `k_n` (1-based).
    pub fn k(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.bloch_lengths.get(i)).copied()
    }
}

/// Which `V_n` a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separability {
    /// Exactly subsystem `n` is fully separable.
    Subsystem(usize),
    /// Every subsystem is separable (the set `V`).
    FullyProduct,
    None,
}

impl core::fmt::Display for Separability {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Separability::Subsystem(n) => write!(f, "V{n}"),
            Separability::FullyProduct => f.write_str("V"),
            Separability::None => f.write_str("none"),
        }
    }
}

pub fn classify_separability(report: &EntanglementReport, tol: f64) -> Separability {
    let separable: Vec<usize> = report
        .bloch_lengths
        .iter()
        .enumerate()
        .filter(|(_, &k)| k >= 1.0 - tol)
        .map(|(i, _)| i + 1)
        .collect();
    match separable.len() {
        1 => Separability::Subsystem(separable[0]),
        n if n == report.bloch_lengths.len() => Separability::FullyProduct,
        _ => Separability::None,
    }
}
