//! Scalar abstraction over `f64` and MPFR floats.
//!
//! `Mp` values are created at the thread's current working precision, which
//! is set with [`with_digits`] / [`with_bits`]. Worker threads spawned by
//! rayon start at the default precision, so parallel closures must call
//! `with_bits` themselves.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::Float;

const DEFAULT_BITS: u32 = 160;

thread_local! {
    static BITS: Cell<u32> = const { Cell::new(DEFAULT_BITS) };
}

pub fn working_bits() -> u32 {
    BITS.with(|b| b.get())
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
}

pub fn bits_to_digits(bits: u32) -> u32 {
    ((bits.saturating_sub(8)) as f64 / std::f64::consts::LOG2_10).floor() as u32
}

/// Run `f` with `Mp` values created at `bits` of precision.
pub fn with_bits<T>(bits: u32, f: impl FnOnce() -> T) -> T {
    struct Restore(u32);
    impl Drop for Restore {
        fn drop(&mut self) {
            BITS.with(|b| b.set(self.0));
        }
    }
    let _restore = Restore(BITS.with(|b| b.replace(bits.max(24))));
    f()
}

pub fn with_digits<T>(digits: u32, f: impl FnOnce() -> T) -> T {
    with_bits(digits_to_bits(digits), f)
}

pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + PartialOrd
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn from_f64(v: f64) -> Self;
    /// Exact for any `i64`, including values beyond 2^53 for `Mp`.
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Unit roundoff of the current working precision.
    fn epsilon() -> Self;
    /// Working precision in bits (53 for `f64`).
    fn precision_bits() -> u32;
    fn pi() -> Self;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn erfc(&self) -> Self;
    fn gamma(&self) -> Self;
    fn ln_gamma(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;

    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn infinity() -> Self {
        Self::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self::from_f64(f64::NEG_INFINITY)
    }
    fn signum_i(&self) -> i8 {
        if self.is_zero() {
            0
        } else if *self > Self::zero() {
            1
        } else {
            -1
        }
    }
    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
    fn powf(&self, p: &Self) -> Self {
        (self.ln() * p.clone()).exp()
    }
    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn precision_bits() -> u32 {
        53
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn erfc(&self) -> Self {
        libm::erfc(*self)
    }
    fn gamma(&self) -> Self {
        libm::tgamma(*self)
    }
    fn ln_gamma(&self) -> Self {
        libm::lgamma(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: &Self) -> Self {
        f64::powf(*self, *p)
    }
}

/// MPFR float at the thread's working precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Mp(pub Float);

impl Mp {
    pub fn inner(&self) -> &Float {
        &self.0
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = bits_to_digits(self.0.prec()).max(1) as usize;
        write!(f, "{}", self.0.to_string_radix(10, Some(digits)))
    }
}

// Results are always rounded to the working precision, whatever the
// precision of the operands.
macro_rules! mp_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $m(self, rhs: Mp) -> Mp {
                Mp(Float::with_val(working_bits(), $tr::$m(&self.0, &rhs.0)))
            }
        }
        impl $atr for Mp {
            fn $am(&mut self, rhs: Mp) {
                self.0 = Float::with_val(working_bits(), $tr::$m(&self.0, &rhs.0));
            }
        }
    };
}
mp_binop!(Add, add, AddAssign, add_assign);
mp_binop!(Sub, sub, SubAssign, sub_assign);
mp_binop!(Mul, mul, MulAssign, mul_assign);
mp_binop!(Div, div, DivAssign, div_assign);

impl Mp {
    /// Apply an in-place MPFR function at no less than the input precision,
    /// then round to the working precision.
    fn unary(&self, f: impl FnOnce(&mut Float)) -> Mp {
        let wb = working_bits();
        let mut x = self.0.clone();
        if x.prec() < wb {
            x.set_prec(wb);
        }
        f(&mut x);
        x.set_prec(wb);
        Mp(x)
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        let mut x = -self.0;
        x.set_prec(working_bits());
        Mp(x)
    }
}

impl Real for Mp {
    fn from_f64(v: f64) -> Self {
        Mp(Float::with_val(working_bits(), v))
    }
    fn from_i64(v: i64) -> Self {
        Mp(Float::with_val(working_bits().max(64), v)).rounded()
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn epsilon() -> Self {
        Mp(Float::with_val(working_bits(), Float::i_exp(1, 1 - working_bits() as i32)))
    }
    fn precision_bits() -> u32 {
        working_bits()
    }
    fn pi() -> Self {
        Mp(Float::with_val(working_bits(), Constant::Pi))
    }
    fn abs(&self) -> Self {
        self.unary(|x| {
            x.abs_mut();
        })
    }
    fn sqrt(&self) -> Self {
        self.unary(|x| {
            x.sqrt_mut();
        })
    }
    fn exp(&self) -> Self {
        self.unary(|x| {
            x.exp_mut();
        })
    }
    fn ln(&self) -> Self {
        self.unary(|x| {
            x.ln_mut();
        })
    }
    fn sin(&self) -> Self {
        self.unary(|x| {
            x.sin_mut();
        })
    }
    fn cos(&self) -> Self {
        self.unary(|x| {
            x.cos_mut();
        })
    }
    fn erfc(&self) -> Self {
        self.unary(|x| {
            x.erfc_mut();
        })
    }
    fn gamma(&self) -> Self {
        self.unary(|x| {
            x.gamma_mut();
        })
    }
    fn ln_gamma(&self) -> Self {
        self.unary(|x| {
            x.ln_abs_gamma_mut();
        })
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn square(&self) -> Self {
        self.unary(|x| {
            x.square_mut();
        })
    }
}

impl Mp {
    /// Re-round to the current working precision.
    pub fn rounded(mut self) -> Self {
        self.0.set_prec(working_bits());
        self
    }

    pub fn from_str_radix10(s: &str) -> Option<Mp> {
        Float::parse(s).ok().map(|p| Mp(Float::with_val(working_bits(), p)))
    }
}

/// Convert between scalar types through the current working precision.
/// `f64 -> Mp` is exact; `Mp -> f64` rounds.
pub trait Convert<S> {
    fn convert(&self) -> S;
}

impl<R: Real> Convert<R> for f64 {
    fn convert(&self) -> R {
        R::from_f64(*self)
    }
}

impl Convert<f64> for Mp {
    fn convert(&self) -> f64 {
        self.0.to_f64()
    }
}

impl Convert<Mp> for Mp {
    fn convert(&self) -> Mp {
        self.clone().rounded()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_scope_restores() {
        let before = working_bits();
        with_digits(50, || {
            assert!(working_bits() >= 166);
            let third = Mp::one() / Mp::from_i64(3);
            let back = third * Mp::from_i64(3);
            assert!((back - Mp::one()).abs() < Mp::epsilon() * Mp::from_i64(4));
        });
        assert_eq!(working_bits(), before);
    }

    #[test]
    fn large_integers_are_exact() {
        with_bits(128, || {
            let diff = Mp::from_i64(i64::MAX) - Mp::from_i64(i64::MAX - 1);
            assert_eq!(diff.to_f64(), 1.0);
        });
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = 1.1f64;
        assert!((Real::powi(&x, 7) - x * x * x * x * x * x * x).abs() < 1e-14);
        with_digits(40, || {
            let m = Mp::from_f64(1.1);
            let p = Real::powi(&m, -3);
            assert!((p.to_f64() - 1.1f64.powi(-3)).abs() < 1e-15);
        });
    }
}
