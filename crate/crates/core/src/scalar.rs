//! Scalar abstraction shared by every kernel.
//!
//! The combinatorial kernels only need a commutative ring with signs, so they
//! run unchanged over `f32`, `f64` and exact rationals. Root extraction and
//! tolerance logic additionally require [`RealScalar`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Float, FromPrimitive, Signed, ToPrimitive};

/// Running sum of many terms.
///
/// Floats use Neumaier compensation, exact types just add.
pub trait Accumulator<T>: Clone + Send {
    fn new() -> Self;
    fn add(&mut self, value: T);
    /// Folds another partial sum into this one.
    fn merge(&mut self, other: Self);
    fn value(&self) -> T;
}

/// Ring element usable by the tensor and hyperdeterminant kernels.
pub trait Scalar:
    Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    type Acc: Accumulator<Self>;

    /// `false` for NaN and infinities; exact types are always finite.
    fn is_finite_value(&self) -> bool {
        true
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits every scalar type")
    }

    /// Lossy view used for diagnostics and printing.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `self^exp` by repeated squaring.
    fn powu(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// Floating point scalars: roots, tolerances and random sampling.
pub trait RealScalar: Scalar + Float {
    fn from_f64_lossy(v: f64) -> Self;
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy)]
pub struct NeumaierSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Float + Send> Accumulator<T> for NeumaierSum<T> {
    fn new() -> Self {
        NeumaierSum {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    fn merge(&mut self, other: Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    fn value(&self) -> T {
        self.sum + self.compensation
    }
}

/// Plain summation for exact arithmetic.
#[derive(Debug, Clone)]
pub struct ExactSum<T>(T);

impl<T: Scalar> Accumulator<T> for ExactSum<T> {
    fn new() -> Self {
        ExactSum(T::zero())
    }

    fn add(&mut self, value: T) {
        self.0 = self.0.clone() + value;
    }

    fn merge(&mut self, other: Self) {
        self.add(other.0);
    }

    fn value(&self) -> T {
        self.0.clone()
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Acc = NeumaierSum<$t>;

            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }

            fn powu(&self, exp: u32) -> Self {
                self.powi(exp as i32)
            }
        }

        impl RealScalar for $t {
            fn from_f64_lossy(v: f64) -> Self {
                v as $t
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    type Acc = ExactSum<BigRational>;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

// Overflow panics in debug builds; keep inputs small.
impl Scalar for Rational64 {
    type Acc = ExactSum<Rational64>;
}
