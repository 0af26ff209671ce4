//! Scalar abstraction for the numeric kernels.
//!
//! Matrix algebra, metric computations and attribution math are written
//! against [`Scalar`] so they run at `f32` or `f64`; everything else in the
//! crate uses the [`crate::Real`] alias.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point scalar usable by every numeric kernel in this crate.
///
/// Implemented by `f32` and `f64` through the blanket impl below.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Constant conversion from `f64`, for literals inside generic code.
    fn c(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("finite f64 constant converts to any Scalar")
    }

    /// Lossy widening to `f64` (exact for `f64`, rounded for `f32`).
    fn to_real(self) -> f64 {
        self.to_f64().expect("Scalar widens to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Population mean of a slice; `None` when empty.
pub fn mean<S: Scalar>(xs: &[S]) -> Option<S> {
    if xs.is_empty() {
        return None;
    }
    let n = S::from_usize(xs.len()).unwrap();
    Some(xs.iter().copied().sum::<S>() / n)
}

/// Population standard deviation (divisor `n`); `None` for fewer than one item.
pub fn population_sd<S: Scalar>(xs: &[S]) -> Option<S> {
    let m = mean(xs)?;
    let n = S::from_usize(xs.len()).unwrap();
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<S>();
    Some((ss / n).sqrt())
}
