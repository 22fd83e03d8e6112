//! Reproducible random metrics and Jacobians for the verification runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scalar::RealScalar;
use crate::tensor::{Jacobian, SquareMatrix, SymTensor};

/// Smallest Jacobian determinant accepted by [`random_jacobian`] callers by default.
pub const MIN_JACOBIAN_DET: f64 = 0.1;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every independent component drawn uniformly from `[-1, 1]`.
pub fn random_sym_tensor<T: RealScalar, R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<SymTensor<T>> {
    SymTensor::from_canonical_fn(dim, rank, |_| T::from_f64_lossy(rng.gen_range(-1.0..=1.0)))
}

/// Entries uniform in `[-1, 1]`, redrawn until `det > min_det`.
pub fn random_jacobian<T: RealScalar, R: Rng + ?Sized>(rng: &mut R, dim: usize, min_det: f64) -> Result<Jacobian<T>> {
    loop {
        let m = SquareMatrix::from_fn(dim, |_, _| T::from_f64_lossy(rng.gen_range(-1.0..=1.0)))?;
        let det = crate::tensor::determinant(&m);
        if det.to_f64_lossy() > min_det {
            return Jacobian::new(m);
        }
    }
}

/// Entries uniform in `[-1, 1]`, redrawn until `|det| > min_det`; either orientation.
pub fn random_invertible<T: RealScalar, R: Rng + ?Sized>(rng: &mut R, dim: usize, min_det: f64) -> Result<Jacobian<T>> {
    loop {
        let m = SquareMatrix::from_fn(dim, |_, _| T::from_f64_lossy(rng.gen_range(-1.0..=1.0)))?;
        let det = crate::tensor::determinant(&m);
        if det.to_f64_lossy().abs() > min_det {
            return Jacobian::new(m);
        }
    }
}
