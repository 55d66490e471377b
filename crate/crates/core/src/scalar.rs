use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar used by the geometric primitives: `f32` or `f64`.
pub trait Scalar: 'static + Float + FromPrimitive + NumAssign + Default + std::fmt::Debug {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
