//! Fixed-precision output matching the tables: six significant digits for
//! rates, six truncated decimals for interval endpoints.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

/// Rounds `x` to `digits` significant digits (half away from zero) and
/// prints it in positional notation, keeping trailing zeros.
pub fn sig_digits_exact(x: &BigRational, digits: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let neg = x.is_negative();
    let a = x.abs();
    // Decimal exponent e with 10^e <= a < 10^(e+1); the float guess is
    // corrected below so huge/tiny values are still handled exactly.
    let mut e = ToPrimitive::to_f64(&a).map_or(0, |f| f.log10().floor() as i64);
    let scale = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(pow10(k as u32))
        } else {
            BigRational::new(1.into(), pow10((-k) as u32))
        }
    };
    while a < scale(e) {
        e -= 1;
    }
    while a >= scale(e + 1) {
        e += 1;
    }
    let shift = digits as i64 - 1 - e;
    let scaled = &a * scale(shift);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut m = q;
    if r * 2 >= *scaled.denom() {
        m += 1;
    }
    let mut shift = shift;
    if m == pow10(digits) {
        m /= 10;
        shift -= 1;
    }
    let body = place_point(&m.to_string(), shift);
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Inserts a decimal point so that the printed value is `digits * 10^-shift`.
fn place_point(digits: &str, shift: i64) -> String {
    if shift <= 0 {
        return format!("{digits}{}", "0".repeat((-shift) as usize));
    }
    let shift = shift as usize;
    if digits.len() > shift {
        let (int, frac) = digits.split_at(digits.len() - shift);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{digits}", "0".repeat(shift - digits.len()))
    }
}

/// Six significant digits, the precision of the printed rate columns.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    sig_digits_exact(&BigRational::from_float(x).expect("finite"), 6)
}

pub fn sig6_exact(x: &BigRational) -> String {
    sig_digits_exact(x, 6)
}

/// `x` truncated (not rounded) to six decimals, as the interval columns are.
pub fn trunc6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r = BigRational::from_float(x).expect("finite") * BigRational::from_integer(pow10(6));
    let t = r.trunc().to_integer();
    let neg = x < 0.0 && !t.is_zero();
    let digits = t.abs().to_string();
    let body = place_point(&format!("{:0>7}", digits), 6);
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
