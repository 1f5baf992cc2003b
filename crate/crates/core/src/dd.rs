//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying roughly 106 bits of mantissa.
//!
//! Used where the transfer-matrix vertices need cancellation-free
//! imaginary parts (easy-axis chains with large auxiliary indices).
//! Arithmetic and `sqrt` are correctly rounded to ~2^-104; the
//! transcendental functions are accurate to a few units of 2^-100 on the
//! argument ranges this crate uses.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Real;

/// Double-double floating point number.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
const FRAC_PI_2: Dd = Dd { hi: std::f64::consts::FRAC_PI_2, lo: 6.123_233_995_736_766e-17 };
const LN_2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Builds from two parts, renormalizing.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn non_finite(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        if !p.is_finite() {
            return Dd::non_finite(p);
        }
        let (h, l) = quick_two_sum(p, e + self.lo * b);
        Dd { hi: h, lo: l }
    }

    fn square(self) -> Self {
        self * self
    }

    fn ldexp(self, e: i32) -> Self {
        Dd { hi: self.hi.mul_pow2(e), lo: self.lo.mul_pow2(e) }
    }

    /// `exp(x) - 1` for `|x| <= 1`, by halving and the doubling identity
    /// `expm1(2y) = expm1(y) * (expm1(y) + 2)`.
    fn expm1_small(self) -> Self {
        const HALVINGS: i32 = 8;
        let r = self.ldexp(-HALVINGS);
        // Taylor series of expm1 about 0; |r| <= 2^-8 so 14 terms reach 2^-120
        let mut term = r;
        let mut sum = r;
        for k in 2..=16 {
            term = term * r / Dd::from_f64(k as f64);
            sum += term;
            if term.hi.abs() < 1e-36 * sum.hi.abs() {
                break;
            }
        }
        for _ in 0..HALVINGS {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        sum
    }

    /// sin and cos for `|x| <= pi/4`.
    fn sin_cos_reduced(self) -> (Self, Self) {
        let x2 = self.square();
        let mut s_term = self;
        let mut sin = self;
        let mut c_term = Dd::ONE;
        let mut cos = Dd::ONE;
        for k in 1..30 {
            let kk = (2 * k) as f64;
            s_term = -(s_term * x2) / Dd::from_f64(kk * (kk + 1.0));
            c_term = -(c_term * x2) / Dd::from_f64(kk * (kk - 1.0));
            sin += s_term;
            cos += c_term;
            if c_term.hi.abs() < 1e-36 && s_term.hi.abs() < 1e-36 {
                break;
            }
        }
        (sin, cos)
    }

    fn sin_cos_dd(self) -> (Self, Self) {
        if !self.hi.is_finite() {
            return (Dd::non_finite(f64::NAN), Dd::non_finite(f64::NAN));
        }
        let k = (self / FRAC_PI_2).round();
        let r = self - k * FRAC_PI_2;
        let (s, c) = r.sin_cos_reduced();
        let quadrant = (k.hi as i64).rem_euclid(4);
        match quadrant {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    /// Displays the nearest `f64`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        if !s.is_finite() {
            return Dd::non_finite(s);
        }
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (h, l) = quick_two_sum(s, e + f);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        if !p.is_finite() {
            return Dd::non_finite(p);
        }
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || b.hi == 0.0 {
            return Dd::non_finite(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + Dd::from_f64(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Dd {
            fn $m(&mut self, b: Dd) {
                *self = *self $op b;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    /// Parses through `f64`; the result carries only `f64` precision.
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::from_f64)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        let h = t.hi.to_i64()?;
        let l = t.lo.to_i64()?;
        h.checked_add(l)
    }
    fn to_u64(&self) -> Option<u64> {
        let v = self.to_i64()?;
        u64::try_from(v).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Dd::new(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Dd::new(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Dd::from_f64(x))
    }
    fn from_f32(x: f32) -> Option<Self> {
        Some(Dd::from_f64(x as f64))
    }
}

impl NumCast for Dd {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(Dd::from_f64)
    }
}

impl Float for Dd {
    fn nan() -> Self {
        Dd::non_finite(f64::NAN)
    }
    fn infinity() -> Self {
        Dd::non_finite(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Dd::non_finite(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Dd::from_f64(-0.0)
    }
    fn min_value() -> Self {
        Dd::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Self {
        Dd::from_f64(f64::MIN_POSITIVE)
    }
    fn epsilon() -> Self {
        Dd::from_f64(4.930_380_657_631_324e-32) // 2^-104
    }
    fn max_value() -> Self {
        Dd::from_f64(f64::MAX)
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let h = self.hi.floor();
        if h == self.hi {
            Dd::new(h, self.lo.floor())
        } else {
            Dd::from_f64(h)
        }
    }
    fn ceil(self) -> Self {
        let h = self.hi.ceil();
        if h == self.hi {
            Dd::new(h, self.lo.ceil())
        } else {
            Dd::from_f64(h)
        }
    }
    fn round(self) -> Self {
        let half = Dd::from_f64(0.5);
        if self.hi >= 0.0 {
            (self + half).floor()
        } else {
            (self - half).ceil()
        }
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Dd::from_f64(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Dd::ONE / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
    fn powf(self, n: Self) -> Self {
        if self.is_zero() {
            return if n.is_zero() { Dd::ONE } else { Dd::ZERO };
        }
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::ZERO } else { Dd::nan() };
        }
        if !self.hi.is_finite() {
            return self;
        }
        let q = self.hi.sqrt();
        let (p, e) = two_prod(q, q);
        let r = (self - Dd::new(p, e)).hi;
        Dd::from_f64(q) + Dd::from_f64(r / (2.0 * q))
    }
    fn exp(self) -> Self {
        if self.hi > 709.8 {
            return Dd::infinity();
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2.mul_f64(k);
        (r.expm1_small() + Dd::ONE).ldexp(k as i32)
    }
    fn exp2(self) -> Self {
        (self * LN_2).exp()
    }
    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Dd::neg_infinity() } else { Dd::nan() };
        }
        if !self.hi.is_finite() {
            return self;
        }
        // one Newton step on exp(y) = x doubles the f64 accuracy
        let y = Dd::from_f64(self.hi.ln());
        y + self * (-y).exp() - Dd::ONE
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / LN_2
    }
    fn log10(self) -> Self {
        self.ln() / Dd::from_f64(10.0).ln()
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Dd::ZERO
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero() || !self.is_finite() {
            return self;
        }
        let y = Dd::from_f64(self.hi.cbrt());
        // Newton on y^3 = x
        y - (y * y * y - self) / (Dd::from_f64(3.0) * y * y)
    }
    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let m = a.max(b);
        if m.is_zero() || !m.is_finite() {
            return m;
        }
        let (x, y) = (a / m, b / m);
        m * (x * x + y * y).sqrt()
    }
    fn sin(self) -> Self {
        self.sin_cos_dd().0
    }
    fn cos(self) -> Self {
        self.sin_cos_dd().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos_dd();
        s / c
    }
    fn asin(self) -> Self {
        Float::atan2(self, (Dd::ONE - self * self).sqrt())
    }
    fn acos(self) -> Self {
        Float::atan2((Dd::ONE - self * self).sqrt(), self)
    }
    fn atan(self) -> Self {
        Float::atan2(self, Dd::ONE)
    }
    fn atan2(self, other: Self) -> Self {
        if self.is_zero() && other.is_zero() {
            return Dd::ZERO;
        }
        // Newton correction of the f64 angle: z += sin(theta - z) / cos(theta - z)
        let z = Dd::from_f64(self.hi.atan2(other.hi));
        let (s, c) = z.sin_cos_dd();
        let num = self * c - other * s;
        let den = other * c + self * s;
        z + num / den
    }
    fn sin_cos(self) -> (Self, Self) {
        self.sin_cos_dd()
    }
    fn exp_m1(self) -> Self {
        if self.hi.abs() <= 1.0 {
            self.expm1_small()
        } else {
            self.exp() - Dd::ONE
        }
    }
    fn ln_1p(self) -> Self {
        (Dd::ONE + self).ln()
    }
    fn sinh(self) -> Self {
        if self.hi.abs() <= 1.0 {
            let e = self.expm1_small();
            // (e^x - e^-x)/2 with e^-x - 1 = -e/(1+e)
            (e + e / (Dd::ONE + e)).ldexp(-1)
        } else {
            let e = self.exp();
            (e - e.recip()).ldexp(-1)
        }
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).ldexp(-1)
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = (a + (a * a + Dd::ONE).sqrt()).ln();
        if self.hi < 0.0 {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        (self + (self * self - Dd::ONE).sqrt()).ln()
    }
    fn atanh(self) -> Self {
        ((Dd::ONE + self) / (Dd::ONE - self)).ln().ldexp(-1)
    }
    /// Decodes the leading component only.
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

impl FloatConst for Dd {
    fn E() -> Self {
        Dd::ONE.exp()
    }
    fn FRAC_1_PI() -> Self {
        PI.recip()
    }
    fn FRAC_1_SQRT_2() -> Self {
        Dd::from_f64(2.0).sqrt().recip()
    }
    fn FRAC_2_PI() -> Self {
        Dd::from_f64(2.0) / PI
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Dd::from_f64(2.0) / PI.sqrt()
    }
    fn FRAC_PI_2() -> Self {
        FRAC_PI_2
    }
    fn FRAC_PI_3() -> Self {
        PI / Dd::from_f64(3.0)
    }
    fn FRAC_PI_4() -> Self {
        PI.ldexp(-2)
    }
    fn FRAC_PI_6() -> Self {
        PI / Dd::from_f64(6.0)
    }
    fn FRAC_PI_8() -> Self {
        PI.ldexp(-3)
    }
    fn LN_10() -> Self {
        Dd::from_f64(10.0).ln()
    }
    fn LN_2() -> Self {
        LN_2
    }
    fn LOG10_E() -> Self {
        Dd::from_f64(10.0).ln().recip()
    }
    fn LOG2_E() -> Self {
        LN_2.recip()
    }
    fn PI() -> Self {
        PI
    }
    fn SQRT_2() -> Self {
        Dd::from_f64(2.0).sqrt()
    }
}

impl Real for Dd {
    fn mul_pow2(self, e: i32) -> Self {
        self.ldexp(e)
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}
