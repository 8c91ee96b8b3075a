//! Multiprecision value types and the small amount of glue the evaluators
//! share: precision policy, literal parsing and decimal formatting.

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Assign, Complex, Float};

use crate::error::{Error, Result};

/// Binary floating-point real with an explicit precision in bits.
pub type BigReal = Float;
/// Binary floating-point complex number; both parts share one precision.
pub type BigComplex = Complex;

pub const MIN_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 16384;
pub const DEFAULT_PRECISION: u32 = 128;

/// Guard bits added on top of the requested precision by every evaluator.
pub const GUARD_BITS: u32 = 32;

pub fn check_precision(prec: u32) -> Result<()> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&prec) {
        Ok(())
    } else {
        Err(Error::Precision(prec))
    }
}

/// `ceil(log2(n))` for `n ≥ 1`, and 0 for `n = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Precision used while accumulating `terms` summands for a result wanted
/// at `prec` bits.
pub fn summation_precision(prec: u32, terms: u64) -> u32 {
    prec + GUARD_BITS + ceil_log2(terms.max(1))
}

/// Parses a decimal real literal (`1`, `-0.5`, `2.5e-3`) at `prec` bits.
pub fn parse_real(lit: &str, prec: u32) -> Result<Float> {
    let trimmed = lit.trim();
    let parsed = Float::parse(trimmed).map_err(|_| Error::Parse {
        what: "real number",
        input: lit.to_string(),
    })?;
    Ok(Float::with_val(prec, parsed))
}

/// Parses a complex literal in one of the forms `RE`, `RE+IMi`, `RE-IMi`.
///
/// The real part is mandatory; a bare imaginary literal such as `3i` is
/// rejected.
pub fn parse_complex(lit: &str, prec: u32) -> Result<Complex> {
    let text = lit.trim();
    let bad = || Error::Parse {
        what: "complex number",
        input: lit.to_string(),
    };
    let Some(body) = text.strip_suffix('i') else {
        let re = parse_real(text, prec).map_err(|_| bad())?;
        return Ok(Complex::with_val(prec, (re, 0)));
    };
    // The split sign is the last '+' or '-' that is neither leading nor
    // part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&idx| {
            matches!(bytes[idx], b'+' | b'-') && !matches!(bytes[idx - 1], b'e' | b'E')
        })
        .ok_or_else(bad)?;
    let (re_text, im_text) = body.split_at(split);
    if im_text.len() < 2 {
        return Err(bad());
    }
    let re = parse_real(re_text, prec).map_err(|_| bad())?;
    let im = parse_real(im_text, prec).map_err(|_| bad())?;
    Ok(Complex::with_val(prec, (re, im)))
}

/// Number of significant decimal digits carried by a `prec`-bit value.
pub fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

/// Decimal string carrying the full precision of `x`.
pub fn format_real(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(decimal_digits(x.prec())))
}

pub fn complex_abs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// `|a − b| / |b|`, or `|a − b|` when `b = 0`.
pub fn relative_error(a: &Complex, b: &Complex) -> Float {
    let prec = a.prec().0.max(b.prec().0);
    let diff = Complex::with_val(prec, a - b);
    let num = Float::with_val(prec, diff.abs_ref());
    let den = Float::with_val(prec, b.abs_ref());
    if den.is_zero() {
        num
    } else {
        num / den
    }
}

/// `2^exp` at the given precision.
pub fn pow2(prec: u32, exp: i32) -> Float {
    let mut x = Float::with_val(prec, 1);
    x <<= exp;
    x
}

/// Rounds a complex value to `prec` bits (nearest).
pub fn round_complex(z: &Complex, prec: u32) -> Complex {
    let mut out = Complex::new(prec);
    out.assign(z);
    out
}

/// Rounds a real value to `prec` bits (nearest).
pub fn round_real(x: &Float, prec: u32) -> Float {
    let mut out = Float::new(prec);
    out.assign_round(x, Round::Nearest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let z = parse_complex("3+2i", 64).unwrap();
        assert_eq!(z.real().to_f64(), 3.0);
        assert_eq!(z.imag().to_f64(), 2.0);
        let z = parse_complex("-0.5-1.25i", 64).unwrap();
        assert_eq!(z.real().to_f64(), -0.5);
        assert_eq!(z.imag().to_f64(), -1.25);
        let z = parse_complex("1e-3+2E+1i", 64).unwrap();
        assert_eq!(z.real().to_f64(), 1e-3);
        assert_eq!(z.imag().to_f64(), 20.0);
        let z = parse_complex("-2", 64).unwrap();
        assert_eq!(z.real().to_f64(), -2.0);
        assert!(z.imag().is_zero());
    }

    #[test]
    fn malformed_complex_literals() {
        for lit in ["", "i", "3i", "1+i", "1+2j", "abc", "1+2i3", "--1"] {
            assert!(parse_complex(lit, 64).is_err(), "{lit:?} accepted");
        }
    }

    #[test]
    fn precision_window() {
        assert!(check_precision(63).is_err());
        assert!(check_precision(64).is_ok());
        assert!(check_precision(16384).is_ok());
        assert!(check_precision(16385).is_err());
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(10_000), 14);
        assert_eq!(ceil_log2(1 << 20), 20);
    }
}
