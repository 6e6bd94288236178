//! Exact rational scalars plus the handful of conversions the rest of the
//! crate needs (logs without overflow, decimal rendering, exact float import).

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::f64::consts::{LN_10, LN_2};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn big(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num::pow(base.clone(), exp as usize)
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn powi(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num::pow(base.clone(), exp as usize)
    } else {
        num::pow(base.recip(), (-exp) as usize)
    }
}

/// Exact value of a finite double.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Nearest double; values below the subnormal range come back as zero.
pub fn to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let l = ln_abs(r);
    if l < -745.0 {
        return 0.0;
    }
    match r.to_f64() {
        Some(f) if f.is_finite() => f,
        _ => {
            let s = if r.is_negative() { -1.0 } else { 1.0 };
            s * l.exp()
        }
    }
}

/// Natural log of a positive big integer, accurate to a few ulps at any size.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.sign() == Sign::Plus, "log of a non-positive integer");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64-bit head").ln() + shift as f64 * LN_2
}

/// `ln |r|` for nonzero `r`, immune to under/overflow of the value itself.
pub fn ln_abs(r: &Rational) -> f64 {
    assert!(!r.is_zero(), "log of zero");
    ln_bigint(&r.numer().abs()) - ln_bigint(r.denom())
}

/// Scientific notation with `digits` significant digits, correctly rounded
/// (half away from zero), e.g. `3.85e-4`.
pub fn to_sci(r: &Rational, digits: usize) -> String {
    let digits = digits.max(1);
    if r.is_zero() {
        return format!("{}e0", pad_mantissa("0", digits));
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    // Exponent estimate from the log, then fixed up exactly.
    let mut e = (ln_abs(&a) / LN_10).floor() as i64;
    let ten = int(10);
    loop {
        let lo = powi(&ten, e);
        if a < lo {
            e -= 1;
            continue;
        }
        if a >= &lo * &ten {
            e += 1;
            continue;
        }
        break;
    }
    let scaled = &a * powi(&ten, digits as i64 - 1 - e);
    let mut m = round_half_up(&scaled);
    let limit = num::pow(BigInt::from(10), digits);
    if m >= limit {
        m /= 10;
        e += 1;
    }
    format!("{sign}{}e{e}", pad_mantissa(&m.to_string(), digits))
}

fn pad_mantissa(m: &str, digits: usize) -> String {
    if digits == 1 {
        m.to_string()
    } else {
        format!("{}.{}", &m[..1], &m[1..])
    }
}

fn round_half_up(x: &Rational) -> BigInt {
    let half = rat(1, 2);
    (x + half).floor().to_integer()
}

/// Squared value, a common enough operation to deserve a name.
pub fn sq(x: &Rational) -> Rational {
    x * x
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}
