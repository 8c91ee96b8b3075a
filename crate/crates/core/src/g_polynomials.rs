//! The term polynomials `g_n(s, p) = Σ_{i=1}^{n} [n, i] (s)_i / p^i`.
//!
//! Besides numeric evaluation this module expands `(1+x)^n g_n(s, 1+x)`
//! exactly as an integer polynomial in `s` and `x` and checks the sign of
//! every coefficient, and predicts those coefficients from the Newton table:
//!
//! ```text
//! [s^{n-m} x^j] = Σ_{k=m+1}^{2m} C(n, k) Σ_{i=0}^{m} (-1)^i C(m-i, j) A_{m,i}^k
//! ```

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Complex, Float, Integer};

use crate::error::{Error, Result};
use crate::exact_core::{binomial, falling_factorial_coeffs, Rational, StirlingTriangle};
use crate::newton_table::ATable;
use crate::numeric::{round_complex, GUARD_BITS, MAX_PRECISION};

/// `g_n` in the basis `(s)_i p^{-i}`; `basis_coeffs[i-1] = [n, i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GPolynomial {
    pub n: usize,
    pub basis_coeffs: Vec<Integer>,
}

impl GPolynomial {
    /// Coefficient of `(s)_i / p^i`, zero outside `1..=n`.
    pub fn basis_coeff(&self, i: usize) -> Integer {
        if i == 0 {
            return Integer::new();
        }
        self.basis_coeffs.get(i - 1).cloned().unwrap_or_default()
    }
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n", "n ≥ 1", n))
    } else {
        Ok(())
    }
}

pub fn g_poly(n: usize) -> Result<GPolynomial> {
    require_n(n)?;
    let row = StirlingTriangle::global().row(n);
    Ok(GPolynomial { n, basis_coeffs: row[1..].to_vec() })
}

/// Bits a-priori lost to cancellation when summing the Stirling basis for
/// `g_n(·, p)`: the absolute terms grow like `(1 - e^{-p})^{-n}`.
fn cancellation_estimate(n: usize, p: f64) -> u32 {
    let ratio = -(1.0 - (-p).exp()).log2();
    if !ratio.is_finite() {
        return MAX_PRECISION;
    }
    (n as f64 * ratio).ceil().min(MAX_PRECISION as f64) as u32
}

/// Returns `(Σ terms, Σ |terms|)` at `wp` bits.
fn stirling_basis_sum(row: &[Integer], s: &Complex, p: &Float, wp: u32) -> (Complex, Float) {
    let s = round_complex(s, wp);
    let inv_p = Float::with_val(wp, 1) / p;
    let mut sum = Complex::with_val(wp, 0);
    let mut magnitude = Float::with_val(64, 0);
    let mut falling = Complex::with_val(wp, 1);
    let mut factor = s.clone();
    let mut inv_p_pow = Float::with_val(wp, 1);
    for c in &row[1..] {
        falling *= &factor;
        factor -= 1u32;
        inv_p_pow *= &inv_p;
        let mut term = Complex::with_val(wp, &falling * &inv_p_pow);
        term *= c;
        magnitude += Float::with_val(64, term.abs_ref());
        sum += &term;
    }
    (sum, magnitude)
}

/// `g_n(s, p)` rounded to `prec` bits.
///
/// The sum runs over `i = 1..=n` in order. Alternating falling factorials
/// make it cancel heavily, so the working precision is raised until the
/// observed cancellation leaves at least `prec` good bits.
pub fn g_eval(n: usize, s: &Complex, p: &Float, prec: u32) -> Result<Complex> {
    require_n(n)?;
    if *p <= 0 {
        return Err(Error::domain("p", "p > 0", p));
    }
    let row = StirlingTriangle::global().row(n);
    let p_f64 = p.to_f64();
    let mut wp = prec + GUARD_BITS + cancellation_estimate(n, p_f64);
    loop {
        let (sum, magnitude) = stirling_basis_sum(&row, s, p, wp);
        if magnitude.is_zero() {
            return Ok(Complex::with_val(prec, 0));
        }
        let lost = if sum.is_zero() {
            wp
        } else {
            let abs = Float::with_val(64, sum.abs_ref());
            (magnitude.log2() - abs.log2()).to_f64().max(0.0).ceil() as u32
        };
        if wp >= prec + lost + GUARD_BITS / 2 || wp >= MAX_PRECISION * 4 {
            return Ok(round_complex(&sum, prec));
        }
        wp = (prec + lost + GUARD_BITS).max(wp * 2).min(MAX_PRECISION * 4);
    }
}

/// Exact `g_n(s, p)` for rational arguments.
pub fn g_eval_rational(n: usize, s: &Rational, p: &Rational) -> Result<Rational> {
    require_n(n)?;
    if *p == 0 {
        return Err(Error::domain("p", "p ≠ 0", p));
    }
    let row = StirlingTriangle::global().row(n);
    let inv_p = Rational::from(p.recip_ref());
    let mut sum = Rational::new();
    let mut falling = Rational::from(1);
    let mut factor = s.clone();
    let mut inv_p_pow = Rational::from(1);
    for c in &row[1..] {
        falling *= &factor;
        factor -= 1u32;
        inv_p_pow *= &inv_p;
        sum += Rational::from(&falling * &inv_p_pow) * c;
    }
    Ok(sum)
}

/// Integer polynomial in `s` and `x`, keyed by `(power of s, power of x)`.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BivariatePoly {
    coeffs: BTreeMap<(u32, u32), Integer>,
}

impl BivariatePoly {
    pub fn coeff(&self, s_power: u32, x_power: u32) -> Integer {
        self.coeffs.get(&(s_power, x_power)).cloned().unwrap_or_default()
    }

    /// Stored `((s_power, x_power), coeff)` entries in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Integer)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, s_power: u32, x_power: u32, coeff: Integer) {
        if coeff == 0 {
            return;
        }
        let slot = self.coeffs.entry((s_power, x_power)).or_default();
        *slot += coeff;
        if *slot == 0 {
            self.coeffs.remove(&(s_power, x_power));
        }
    }

    pub fn eval_rational(&self, s: &Rational, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .map(|(&(a, b), c)| {
                let sp = s.clone().pow(a);
                let xp = x.clone().pow(b);
                sp * xp * c
            })
            .sum()
    }
}

/// Exact expansion of `(1+x)^n g_n(s, 1+x) = Σ_i [n, i] (s)_i (1+x)^{n-i}`.
pub fn g_expand_shifted(n: usize) -> Result<BivariatePoly> {
    require_n(n)?;
    let row = StirlingTriangle::global().row(n);
    let mut out = BivariatePoly::default();
    for (i, stirling) in row.iter().enumerate().skip(1) {
        let falling = falling_factorial_coeffs(i);
        for (s_power, fc) in falling.iter().enumerate().filter(|(_, c)| **c != 0) {
            let base = Integer::from(stirling * fc);
            for x_power in 0..=(n - i) {
                let c = Integer::from(&base * &binomial((n - i) as i64, x_power as i64));
                out.add_term(s_power as u32, x_power as u32, c);
            }
        }
    }
    Ok(out)
}

/// Coefficient of `s^{n-m} x^j` in `(1+x)^n g_n(s, 1+x)` as predicted by
/// the Newton table. `m = 0` gives the leading `s^n` coefficient `δ_{j,0}`.
pub fn coeff_via_atable(n: usize, m: usize, j: usize, table: &ATable) -> Result<Integer> {
    if m > n || j > m || n == 0 {
        return Err(Error::IndexOutOfRange(format!(
            "need 0 ≤ m ≤ n, n ≥ 1, 0 ≤ j ≤ m; got n = {n}, m = {m}, j = {j}"
        )));
    }
    if m > table.m_max() {
        return Err(Error::IndexOutOfRange(format!(
            "m = {m} exceeds table bound {}",
            table.m_max()
        )));
    }
    if m == 0 {
        return Ok(Integer::from(j == 0));
    }
    let mut total = Integer::new();
    for k in m + 1..=2 * m {
        let mut inner = Integer::new();
        for i in 0..=m {
            let term = binomial((m - i) as i64, j as i64) * table.entry(m as i64, i as i64, k as i64)?;
            if i % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
        }
        total += inner * binomial(n as i64, k as i64);
    }
    Ok(total)
}

/// Whether every stored coefficient of `(1+x)^n g_n(s, 1+x)` is positive.
pub fn positivity_check(n: usize) -> Result<bool> {
    Ok(g_expand_shifted(n)?.iter().all(|(_, c)| *c > 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(128, (re, im))
    }

    #[test]
    fn basis_examples() {
        assert_eq!(g_poly(1).unwrap().basis_coeffs, ints(&[1]));
        assert_eq!(g_poly(2).unwrap().basis_coeffs, ints(&[1, 1]));
        assert_eq!(g_poly(3).unwrap().basis_coeffs, ints(&[2, 3, 1]));
        assert_eq!(g_poly(3).unwrap().basis_coeff(0), 0);
        assert!(g_poly(0).is_err());
    }

    #[test]
    fn eval_examples() {
        let one = Float::with_val(128, 1);
        let two = Float::with_val(128, 2);
        assert_eq!(g_eval(2, &c(1.0, 0.0), &one, 128).unwrap(), 1);
        assert_eq!(g_eval(3, &c(0.0, 0.0), &two, 128).unwrap(), 0);
        assert_eq!(g_eval(2, &c(3.0, 0.0), &two, 128).unwrap(), 3);
        assert!(g_eval(2, &c(1.0, 0.0), &Float::with_val(64, 0), 128).is_err());
    }

    #[test]
    fn eval_survives_cancellation() {
        // g_n(1, 1) = (n-1)!, while the Stirling-basis terms are far larger.
        let one = Float::with_val(128, 1);
        let got = g_eval(150, &c(1.0, 0.0), &one, 128).unwrap();
        let want = Integer::from(Integer::factorial(149));
        assert_eq!(got, Complex::with_val(128, (Float::with_val(128, &want), 0)));

        let s = Rational::from((-7, 3));
        let p = Rational::from((5, 4));
        let exact = g_eval_rational(120, &s, &p).unwrap();
        let approx = g_eval(
            120,
            &Complex::with_val(128, (Float::with_val(128, &s), 0)),
            &Float::with_val(128, &p),
            128,
        )
        .unwrap();
        let exact_f = Float::with_val(256, &exact);
        let rel = (Float::with_val(256, approx.real() - &exact_f) / &exact_f).abs();
        assert!(rel < 1e-36, "relative error {rel}");
    }

    #[test]
    fn expansion_examples() {
        let e1 = g_expand_shifted(1).unwrap();
        assert_eq!(e1.len(), 1);
        assert_eq!(e1.coeff(1, 0), 1);

        let e2 = g_expand_shifted(2).unwrap();
        assert_eq!(e2.len(), 2);
        assert_eq!(e2.coeff(2, 0), 1);
        assert_eq!(e2.coeff(1, 1), 1);

        // s^3 + s + (3s^2 + s) x + 2 s x^2
        let e3 = g_expand_shifted(3).unwrap();
        let expected = [((3, 0), 1), ((1, 0), 1), ((2, 1), 3), ((1, 1), 1), ((1, 2), 2)];
        assert_eq!(e3.len(), expected.len());
        for ((a, b), v) in expected {
            assert_eq!(e3.coeff(a, b), v, "s^{a} x^{b}");
        }
    }

    #[test]
    fn atable_coefficients() {
        let table = crate::newton_table::build_a_table(3);
        assert_eq!(coeff_via_atable(2, 1, 1, &table).unwrap(), 1);
        assert_eq!(coeff_via_atable(3, 1, 0, &table).unwrap(), 0);
        assert_eq!(coeff_via_atable(3, 2, 2, &table).unwrap(), 2);
        assert_eq!(coeff_via_atable(3, 0, 0, &table).unwrap(), 1);
        assert!(coeff_via_atable(3, 0, 1, &table).is_err());
        assert!(coeff_via_atable(3, 4, 0, &table).is_err());
        assert!(coeff_via_atable(5, 4, 0, &table).is_err());
    }

    #[test]
    fn small_positivity() {
        for n in 1..=8 {
            assert!(positivity_check(n).unwrap(), "n = {n}");
        }
    }
}
