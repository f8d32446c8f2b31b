//! Scalar abstraction shared by every module.
//!
//! All arithmetic is carried out on complex matrices whose real part is a
//! `Real`. `f64` is the working precision; `f32` is supported for smoke
//! testing but the default tolerances assume double precision.

use nalgebra::{Complex, DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real field backing the complex scalars.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }

    fn is_infinite(self) -> bool {
        self.as_f64().is_infinite()
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;

/// Dense complex matrix over `T`; the storage type of every block.
pub type CMat<T> = DMatrix<Complex<T>>;

pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

pub(crate) fn creal<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}
