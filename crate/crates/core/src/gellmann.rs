//! Generalized Gell-Mann matrices, the `d² − 1` generators of SU(d).
//!
//! Ordering: the symmetric off-diagonal generators for pairs `(j, k)`, `j < k`
//! in lexicographic order, then the antisymmetric ones in the same pair order,
//! then the `d − 1` diagonal generators by increasing rank. Every generator is
//! normalized to `tr(λ_a λ_b) = 2δ_ab`. For `d = 2` the list is exactly
//! `(σx, σy, σz)` with `σz = diag(1, −1)`.
//!
//! Indices into a basis are 0-based: `matrix(0)` is λ1.

use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent when std is linked
use num_traits::Float;

use crate::matrix::CMatrix;
use crate::{Error, Result, C64};

/// One nonzero entry `(row, col, value)` of a generator.
pub type SparseEntry = (usize, usize, C64);

#[derive(Debug, Clone, PartialEq)]
pub struct GellMannBasis {
    d: usize,
    matrices: Vec<CMatrix>,
    sparse: Vec<Vec<SparseEntry>>,
}

impl GellMannBasis {
    pub fn generate(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::GellMannDimension(d));
        }
        let mut sparse: Vec<Vec<SparseEntry>> = Vec::with_capacity(d * d - 1);
        let pairs: Vec<(usize, usize)> = (0..d)
            .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
            .collect();
        for &(j, k) in &pairs {
            sparse.push(alloc::vec![(j, k, C64::new(1.0, 0.0)), (k, j, C64::new(1.0, 0.0))]);
        }
        for &(j, k) in &pairs {
            sparse.push(alloc::vec![(j, k, C64::new(0.0, -1.0)), (k, j, C64::new(0.0, 1.0))]);
        }
        for rank in 1..d {
            let r = rank as f64;
            let scale = (2.0 / (r * (r + 1.0))).sqrt();
            let mut entries: Vec<SparseEntry> =
                (0..rank).map(|j| (j, j, C64::new(scale, 0.0))).collect();
            entries.push((rank, rank, C64::new(-r * scale, 0.0)));
            sparse.push(entries);
        }
        let matrices = sparse
            .iter()
            .map(|entries| {
                let mut m = CMatrix::zeros(d, d);
                for &(i, j, v) in entries {
                    m[(i, j)] = v;
                }
                m
            })
            .collect();
        Ok(Self {
            d,
            matrices,
            sparse,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of generators, `d² − 1`.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrix(&self, a: usize) -> &CMatrix {
        &self.matrices[a]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// Nonzero entries of generator `a`.
    pub fn sparse(&self, a: usize) -> &[SparseEntry] {
        &self.sparse[a]
    }

    /// Real coordinates `tr(λ_a M)/2` of a matrix in this basis.
    pub fn coordinates(&self, m: &CMatrix) -> Vec<f64> {
        self.matrices
            .iter()
            .map(|g| (g * m).trace().re / 2.0)
            .collect()
    }
}
