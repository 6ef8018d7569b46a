//! Scalar abstraction for the numeric routines.

use core::fmt::{Debug, Display};

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Float:
    num_traits::Float + FromPrimitive + ToPrimitive + Debug + Display + Default + 'static
{
    /// Conversion from a primitive literal, e.g. `F::val(0.5)`.
    fn val<T: ToPrimitive>(v: T) -> Self {
        Self::from(v).expect("primitive representable as float")
    }
}

impl Float for f32 {}
impl Float for f64 {}
