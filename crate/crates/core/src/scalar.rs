//! Scalar abstraction for the numerical core.
//!
//! All matrix and rate arithmetic is generic over a real scalar so the
//! same code instantiates at `f32` or `f64`. Angular-momentum algebra is
//! the exception: it runs in exact rational arithmetic internally and
//! only converts to the scalar at the very end.

/// Real scalar usable throughout the simulation core.
///
/// `nalgebra::RealField` supplies field operations, elementary functions
/// and constants; `num_traits::FromPrimitive` supplies lossless-enough
/// conversion from the `f64` literals that physical constants are
/// defined in.
pub trait Scalar:
    nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy
{
    /// Converts an `f64` literal or constant into the scalar type.
    /// (Named to avoid colliding with `ComplexField::real`.)
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must be representable")
    }

    /// Widens (or narrows) the scalar to `f64`, e.g. for output
    /// formatting and step counting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }

    /// Larger of two scalars (`RealField` only guarantees `PartialOrd`).
    fn maxv(self, other: Self) -> Self {
        if self < other {
            other
        } else {
            self
        }
    }

    /// Smaller of two scalars.
    fn minv(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
