//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All model code is written against [`Real`], which is implemented for
//! `f32`, `f64` and the double-double type [`crate::dd::Dd`]. The complex
//! counterpart is always `num_complex::Complex<T>`.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

/// Real scalar usable by the amplitude, transfer and density code.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    /// Multiplies by `2^e`. Exact as long as the result stays normal.
    fn mul_pow2(self, e: i32) -> Self;

    /// Nearest `f64` (lossy for extended types).
    fn approx_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Binary exponent of `|self|`, i.e. `floor(log2 |self|)`; `None` for
    /// zero and non-finite values.
    fn exponent2(self) -> Option<i32> {
        let x = self.approx_f64().abs();
        if x == 0.0 || !x.is_finite() {
            return None;
        }
        Some(x.log2().floor() as i32)
    }
}

fn pow2_f64(e: i32) -> f64 {
    // split so that neither factor over/underflows on its own
    let half = e / 2;
    2f64.powi(half) * 2f64.powi(e - half)
}

impl Real for f64 {
    fn mul_pow2(self, e: i32) -> Self {
        if (-1000..=1000).contains(&e) {
            self * 2f64.powi(e)
        } else {
            let half = e / 2;
            self * pow2_f64(half) * pow2_f64(e - half)
        }
    }
}

impl Real for f32 {
    fn mul_pow2(self, e: i32) -> Self {
        if (-120..=120).contains(&e) {
            self * 2f32.powi(e)
        } else {
            (self as f64 * pow2_f64(e)) as f32
        }
    }
}

/// `i` as a complex scalar.
pub fn im_unit<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

/// Real scalar lifted to the complex plane.
pub fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// `i·x` for real `x`.
pub fn im<T: Real>(x: T) -> Cx<T> {
    Complex::new(T::zero(), x)
}

/// Squared modulus without the square root.
pub fn abs2<T: Real>(z: Cx<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Max of the component magnitudes, a cheap norm used for residuals.
pub fn max_abs<T: Real>(z: Cx<T>) -> T {
    z.re.abs().max(z.im.abs())
}
