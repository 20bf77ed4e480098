//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};

/// Real floating-point scalar the estimators are generic over (`f32` or `f64`).
///
/// Conversions go through `num_traits` (`from_f64` / `to_f64`) so that the
/// nalgebra method set stays unambiguous.
pub trait Real:
    RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive + rustfft::FftNum
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    fn lit(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("literal not representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Reduces a real number into the torus `[0, 1)`.
pub fn wrap_unit<T: Real>(x: T) -> T {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Wrap-around distance `min_n |x - n|` on the unit torus.
pub fn torus_distance<T: Real>(a: T, b: T) -> T {
    let d = wrap_unit(a - b);
    d.min(T::one() - d)
}

/// `e^{-2 pi i t}` evaluated after reducing `t` modulo one.
pub(crate) fn unit_phasor<T: Real>(t: T) -> Complex<T> {
    let angle = -T::two_pi() * wrap_unit(t);
    Complex::new(angle.cos(), angle.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_handles_negative_and_integer_inputs() {
        assert_eq!(wrap_unit(-0.25f64), 0.75);
        assert_eq!(wrap_unit(3.0f64), 0.0);
        assert_eq!(wrap_unit(-1e-20f64), 0.0);
        assert!((wrap_unit(1.3f32) - 0.3).abs() < 1e-6);
    }

    #[test]
    fn torus_distance_wraps() {
        assert!((torus_distance(0.95f64, 0.05) - 0.1).abs() < 1e-15);
        assert!((torus_distance(0.2f64, 0.7) - 0.5).abs() < 1e-15);
        assert_eq!(torus_distance(0.3f64, 0.3), 0.0);
    }
}
