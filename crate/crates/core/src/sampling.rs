//! Seeded random states and local unitaries for ensembles and property
//! checks.
//!
//! Haar-random pure states are normalized vectors of independent standard
//! complex Gaussians. Random unitaries are the Gram-Schmidt orthonormalization
//! of a complex Gaussian matrix (the QR factor with positive diagonal), which
//! is Haar distributed.

use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{apply_local, LocalOperator, StateVector, SubsystemDims};
use crate::matrix::CMatrix;
use crate::{Result, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn haar_state<R: Rng + ?Sized>(dims: &SubsystemDims, rng: &mut R) -> StateVector {
    let amps: Vec<C64> = (0..dims.total()).map(|_| gaussian(rng)).collect();
    StateVector::normalized(dims.clone(), amps).expect("Gaussian vector is nonzero")
}

/// Haar-random `d × d` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let mut columns: Vec<Vec<C64>> = (0..d).map(|_| (0..d).map(|_| gaussian(rng)).collect()).collect();
    for j in 0..d {
        for i in 0..j {
            let (done, rest) = columns.split_at_mut(j);
            let proj: C64 = done[i].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(&done[i]) {
                *x -= q * proj;
            }
        }
        let norm = columns[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        columns[j].iter_mut().for_each(|x| *x /= norm);
    }
    let mut u = CMatrix::zeros(d, d);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            u[(i, j)] = v;
        }
    }
    u
}

/// Tensor product of independent Haar-random single-subsystem states.
pub fn product_state<R: Rng + ?Sized>(dims: &SubsystemDims, rng: &mut R) -> StateVector {
    let factors: Vec<Vec<C64>> = dims
        .as_slice()
        .iter()
        .map(|&d| {
            let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let amps: Vec<C64> = (0..dims.total())
        .map(|mut index| {
            let mut amp = C64::new(1.0, 0.0);
            for (factor, &d) in factors.iter().zip(dims.as_slice()) {
                amp *= factor[index % d];
                index /= d;
            }
            amp
        })
        .collect();
    StateVector::from_amplitudes(dims.clone(), amps).expect("length matches")
}

/// Applies an independent Haar unitary to every subsystem.
pub fn random_local_unitaries<R: Rng + ?Sized>(psi: &StateVector, rng: &mut R) -> Result<StateVector> {
    let mut out = psi.clone();
    for (n, &d) in psi.dims().as_slice().iter().enumerate() {
        let u = LocalOperator::new(n + 1, haar_unitary(d, rng))?;
        out = apply_local(&out, &u)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{EntanglementReport, SubsystemBases};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..5 {
            let u = haar_unitary(d, &mut rng);
            let prod = &u.adjoint() * &u;
            assert!(prod.max_abs_diff(&CMatrix::identity(d)) < 1e-13);
        }
    }

    #[test]
    fn states_are_normalized_and_seeded() {
        let dims = SubsystemDims::new(alloc::vec![2, 3, 2]).unwrap();
        let a = haar_state(&dims, &mut ChaCha8Rng::seed_from_u64(9));
        let b = haar_state(&dims, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(a.is_normalized());
        let p = product_state(&dims, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(p.is_normalized());
    }

    #[test]
    fn product_states_are_separable() {
        let dims = SubsystemDims::qubits(3).unwrap();
        let bases = SubsystemBases::new(&dims);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let p = product_state(&dims, &mut rng);
            let r = EntanglementReport::compute(&p, &bases, 0.0, &[]).unwrap();
            for k in &r.bloch_lengths {
                assert!((k - 1.0).abs() < 1e-12);
            }
        }
    }
}
