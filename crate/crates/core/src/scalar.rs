//! Scalar abstraction so the whole pipeline runs in either `f32` or `f64`.
//!
//! All numeric code in this crate is written against [`Real`]; the crate
//! root exports concrete type aliases for the common instantiations.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable throughout the model, the surrogate bounds
/// and the cone solver.
///
/// The supertraits cover everything the numerics need: IEEE arithmetic and
/// elementary functions (`num_traits::Float`), mathematical constants,
/// assignment operators, conversions from primitives, and the bounds the
/// interior-point backend places on its scalars.
pub trait Real:
    clarabel::algebra::FloatT
    + num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + num_traits::FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for literals and tolerances.
    fn of(x: f64) -> Self;

    /// Lossy conversion to `f64`, for reporting.
    fn to_f64(self) -> f64;
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    )*};
}

impl_real!(f32, f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn norm_sq_generic<T: Real>(xs: &[T]) -> T {
        xs.iter().map(|x| *x * *x).sum()
    }

    #[test]
    fn both_widths_instantiate() {
        assert_eq!(norm_sq_generic(&[3.0f32, 4.0f32]), 25.0f32);
        assert_eq!(norm_sq_generic(&[3.0f64, 4.0f64]), 25.0f64);
    }

    #[test]
    fn conversions_round_trip() {
        assert_eq!(<f64 as Real>::of(1.5).to_f64(), 1.5);
        assert_eq!(<f32 as Real>::of(0.25).to_f64(), 0.25);
    }
}
