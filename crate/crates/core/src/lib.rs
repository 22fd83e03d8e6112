//! Cayley hyperdeterminants of completely symmetric tensors and the natural
//! volume densities of m-th root metrics built from them.
//!
//! The combinatorial core ([`indexing`], [`tensor`], [`hyperdet`]) is generic
//! over [`Scalar`], so the same kernels run on `f32`, `f64` and exact
//! rationals. Volume densities need roots and therefore [`RealScalar`].

pub mod error;
pub mod hyperdet;
pub mod indexing;
pub mod sampling;
pub mod scalar;
pub mod tensor;
pub mod volume;

pub use error::{Error, Result};
pub use hyperdet::{
    closed_form_m3n2, closed_form_m4n2, g_density, hdet_dense_oracle, hdet_even, hdet_odd,
    total_contraction, KernelOptions,
};
pub use indexing::{canonicalize, epsilon_contraction_identity, levi_civita, permutations, CanonicalIndex, MultiIndex};
pub use scalar::{Accumulator, NeumaierSum, RealScalar, Scalar};
pub use tensor::{determinant, pullback, DensityTensor, Jacobian, Parity, SquareMatrix, SymTensor};
pub use volume::{
    integrate_box, is_nondegenerate, scale_density_check, verify_transformation_law, volume_density, Branch,
    LawReport, MetricField, VolumeDensity,
};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type SymTensorF64 = SymTensor<f64>;
pub type SymTensorF32 = SymTensor<f32>;
pub type SymTensorQ = SymTensor<Rational>;

pub type JacobianF64 = Jacobian<f64>;
pub type JacobianF32 = Jacobian<f32>;
pub type JacobianQ = Jacobian<Rational>;

pub type DensityTensorF64 = DensityTensor<f64>;
pub type DensityTensorQ = DensityTensor<Rational>;

pub type VolumeDensityF64 = VolumeDensity<f64>;
pub type MetricFieldF64 = MetricField<f64>;
pub type LawReportF64 = LawReport<f64>;
