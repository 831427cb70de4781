//! Multipartite Hilbert space: mixed-radix basis indexing, state vectors and
//! local operators.
//!
//! The basis vector with digits `(σN, …, σ2, σ1)` lives at index
//! `σ1 + d1·(σ2 + d2·(σ3 + …))`; subsystem 1 varies fastest. Digit lists
//! passed to [`basis_index`] and [`basis_ket`] are written in ket order, most
//! significant (subsystem N) first, exactly as `|σ3σ2σ1⟩` is printed.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent when std is linked
use num_traits::Float;

use crate::matrix::CMatrix;
use crate::{Error, Result, C64, TOL};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Ordered subsystem dimensions `(d1, …, dN)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemDims {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl SubsystemDims {
    /// `dims[0]` is `d1`, the fastest-varying subsystem.
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.len() < 2 || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDims(dims));
        }
        let mut strides = Vec::with_capacity(dims.len());
        let mut acc = 1usize;
        for &d in &dims {
            strides.push(acc);
            acc = acc
                .checked_mul(d)
                .ok_or_else(|| Error::InvalidDims(dims.clone()))?;
        }
        Ok(Self {
            dims,
            strides,
            total: acc,
        })
    }

    pub fn qubits(count: usize) -> Result<Self> {
        Self::new(vec![2; count])
    }

    /// Number of subsystems N.
    pub fn count(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension D = ∏ d_n.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Dimension of subsystem `n` (1-based).
    pub fn dim(&self, n: usize) -> Result<usize> {
        self.check_subsystem(n)?;
        Ok(self.dims[n - 1])
    }

    /// Index stride of subsystem `n` (1-based).
    pub fn stride(&self, n: usize) -> Result<usize> {
        self.check_subsystem(n)?;
        Ok(self.strides[n - 1])
    }

    /// Dimensions in subsystem order `(d1, …, dN)`.
    pub fn as_slice(&self) -> &[usize] {
        &self.dims
    }

    pub fn all_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn check_subsystem(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.dims.len() {
            return Err(Error::SubsystemOutOfRange {
                subsystem: n,
                count: self.dims.len(),
            });
        }
        Ok(())
    }

    /// Inverse of [`basis_index`]: digits in ket order `(σN, …, σ1)`.
    pub fn digits_of(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.total {
            return Err(Error::DimensionMismatch {
                expected: self.total,
                got: index,
            });
        }
        let mut rest = index;
        let mut digits: Vec<usize> = self
            .dims
            .iter()
            .map(|&d| {
                let digit = rest % d;
                rest /= d;
                digit
            })
            .collect();
        digits.reverse();
        Ok(digits)
    }
}

/// Linear index of the basis ket with digits `(σN, …, σ1)`.
pub fn basis_index(digits: &[usize], dims: &SubsystemDims) -> Result<usize> {
    let n = dims.count();
    if digits.len() != n {
        return Err(Error::DigitCount {
            expected: n,
            got: digits.len(),
        });
    }
    let mut index = 0;
    // digits[0] belongs to subsystem N.
    for (pos, &level) in digits.iter().enumerate() {
        let subsystem = n - pos;
        let dim = dims.dims[subsystem - 1];
        if level >= dim {
            return Err(Error::DigitOutOfRange {
                subsystem,
                level,
                dim,
            });
        }
        index += level * dims.strides[subsystem - 1];
    }
    Ok(index)
}

/// Complex amplitude vector over a [`SubsystemDims`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    dims: SubsystemDims,
}

impl StateVector {
    /// Wraps amplitudes as given; no normalization is applied.
    pub fn from_amplitudes(dims: SubsystemDims, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Wraps and rescales to unit norm.
    pub fn normalized(dims: SubsystemDims, amplitudes: Vec<C64>) -> Result<Self> {
        let mut state = Self::from_amplitudes(dims, amplitudes)?;
        let norm = state.norm();
        if norm <= 1e-14 || !norm.is_finite() {
            return Err(Error::DegenerateSuperposition(norm));
        }
        state.scale_in_place(C64::new(1.0 / norm, 0.0));
        Ok(state)
    }

    pub fn zeros(dims: SubsystemDims) -> Self {
        let amplitudes = vec![ZERO; dims.total()];
        Self { amplitudes, dims }
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    pub fn scale_in_place(&mut self, factor: C64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// Distance `‖self − other‖`, or infinity when the dimensions differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.amplitudes.len() != other.amplitudes.len() {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Unit basis vector `|σN … σ1⟩`.
pub fn basis_ket(digits: &[usize], dims: &SubsystemDims) -> Result<StateVector> {
    let index = basis_index(digits, dims)?;
    let mut state = StateVector::zeros(dims.clone());
    state.amplitudes[index] = C64::new(1.0, 0.0);
    Ok(state)
}

/// A `d_n × d_n` operator acting on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    subsystem: usize,
    matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(subsystem: usize, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                got: matrix.cols(),
            });
        }
        if subsystem == 0 {
            return Err(Error::SubsystemOutOfRange {
                subsystem,
                count: 0,
            });
        }
        Ok(Self { subsystem, matrix })
    }

    /// Like [`LocalOperator::new`] but rejects non-Hermitian matrices.
    pub fn observable(subsystem: usize, matrix: CMatrix) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > TOL {
            return Err(Error::NotHermitian(deviation));
        }
        Self::new(subsystem, matrix)
    }

    pub fn subsystem(&self) -> usize {
        self.subsystem
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn check(&self, dims: &SubsystemDims) -> Result<()> {
        let d = dims.dim(self.subsystem)?;
        if d != self.matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.matrix.rows(),
            });
        }
        Ok(())
    }
}

/// A `D × D` operator on the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: CMatrix,
    dims: SubsystemDims,
}

impl DenseOperator {
    pub fn new(dims: SubsystemDims, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != dims.total() || matrix.cols() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                got: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }
}

/// Kronecker embedding of a local operator: identity on every other subsystem.
pub fn embed(op: &LocalOperator, dims: &SubsystemDims) -> Result<DenseOperator> {
    op.check(dims)?;
    let total = dims.total();
    let d = dims.dim(op.subsystem)?;
    let stride = dims.stride(op.subsystem)?;
    let mut matrix = CMatrix::zeros(total, total);
    for row in 0..total {
        let j = (row / stride) % d;
        let base = row - j * stride;
        for k in 0..d {
            matrix[(row, base + k * stride)] = op.matrix[(j, k)];
        }
    }
    DenseOperator::new(dims.clone(), matrix)
}

/// Applies a `d × d` row-major matrix to the subsystem with the given stride,
/// writing into `output`. Both slices have length D.
pub(crate) fn apply_strided(
    matrix: &[C64],
    d: usize,
    stride: usize,
    input: &[C64],
    output: &mut [C64],
) {
    let block = stride * d;
    for base in (0..input.len()).step_by(block) {
        for offset in base..base + stride {
            for j in 0..d {
                let row = &matrix[j * d..(j + 1) * d];
                let mut acc = ZERO;
                for (k, m) in row.iter().enumerate() {
                    acc += m * input[offset + k * stride];
                }
                output[offset + j * stride] = acc;
            }
        }
    }
}

/// Matrix-free `embed(op)·ψ`, cost O(D·d_n).
pub fn apply_local(psi: &StateVector, op: &LocalOperator) -> Result<StateVector> {
    op.check(&psi.dims)?;
    let d = op.matrix.rows();
    let stride = psi.dims.stride(op.subsystem)?;
    let mut out = StateVector::zeros(psi.dims.clone());
    apply_strided(
        op.matrix.as_slice(),
        d,
        stride,
        &psi.amplitudes,
        &mut out.amplitudes,
    );
    Ok(out)
}

/// Operators that can act on a [`StateVector`].
pub trait Operator {
    fn apply(&self, psi: &StateVector) -> Result<StateVector>;
}

impl Operator for LocalOperator {
    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        apply_local(psi, self)
    }
}

impl Operator for DenseOperator {
    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.dims != psi.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                got: psi.dims.total(),
            });
        }
        StateVector::from_amplitudes(psi.dims.clone(), self.matrix.mul_vec(&psi.amplitudes))
    }
}

pub(crate) fn inner_slices(phi: &[C64], psi: &[C64]) -> C64 {
    phi.iter().zip(psi).map(|(a, b)| a.conj() * b).sum()
}

/// `⟨φ|ψ⟩`, antilinear in the first argument.
pub fn inner(phi: &StateVector, psi: &StateVector) -> Result<C64> {
    if phi.dims != psi.dims {
        return Err(Error::DimensionMismatch {
            expected: phi.dims.total(),
            got: psi.dims.total(),
        });
    }
    Ok(inner_slices(&phi.amplitudes, &psi.amplitudes))
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation<O: Operator + ?Sized>(psi: &StateVector, op: &O) -> Result<C64> {
    let image = op.apply(psi)?;
    inner(psi, &image)
}

/// Phase-insensitive overlap `|⟨φ|ψ⟩|²`.
pub fn fidelity(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(inner(phi, psi)?.norm_sqr())
}
