//! Independent reference values: double-exponential quadrature for
//! `∫₁^∞ e^{-up} u^s du`, the closed form at integer `s`, and a
//! finite-difference check of
//!
//! ```text
//! (d/dt)^n (−log(1−t))^s = (1−t)^{-n} Σ_{i=1}^{n} [n, i] (s)_i (−log(1−t))^{s−i}
//! ```

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};

use crate::error::{Error, Result};
use crate::exact_core::{binomial, falling_factorial, stirling_first};
use crate::numeric::{check_precision, pow2, round_complex, GUARD_BITS};

/// Maximum number of step halvings in `quad_integral`.
pub const QUAD_MAX_LEVELS: u32 = 16;

/// Largest derivative order accepted by `log_derivative_check`.
pub const MAX_DERIVATIVE_ORDER: u32 = 4;

/// `∫₁^∞ e^{-up} u^s du` by trapezoidal sums after the substitutions
/// `u = 1 + τ/p`, `τ = v/(1−v)` and `v = (1 + tanh(π/2·sinh x))/2`.
///
/// The last two collapse to `τ = exp(π sinh x)`, so both ends of the
/// interval are evaluated without forming `1 − v`. The step is halved until
/// two successive sums agree to `2^{-prec+16}` relative.
pub fn quad_integral(s: &Complex, p: &Float, prec: u32) -> Result<Complex> {
    quad_integral_levels(s, p, prec, 0)
}

/// As `quad_integral`, continuing `extra_levels` halvings past convergence.
pub fn quad_integral_levels(s: &Complex, p: &Float, prec: u32, extra_levels: u32) -> Result<Complex> {
    check_precision(prec)?;
    if p.is_nan() || *p <= 0 {
        return Err(Error::domain("p", "p > 0", p));
    }
    let wp = prec + GUARD_BITS;
    let s = round_complex(s, wp);
    let p = Float::with_val(wp, p);
    let real = s.imag().is_zero();
    let pi = Float::with_val(wp, Constant::Pi);

    let (x_min, x_max) = truncation_window(&s, &p, wp);
    // Integrand in x of ∫_0^∞ e^{-τ} (1 + τ/p)^s dτ.
    let f = |x: f64| -> Complex {
        let x = Float::with_val(wp, x);
        let sinh_x = Float::with_val(wp, x.sinh_ref());
        let cosh_x = Float::with_val(wp, x.cosh_ref());
        let tau = Float::with_val(wp, &pi * &sinh_x).exp();
        let log_base = Float::with_val(wp, Float::with_val(wp, &tau / &p).ln_1p_ref());
        let weight = Float::with_val(wp, &tau * &cosh_x) * &pi * Float::with_val(wp, -&tau).exp();
        if real {
            let pow = Float::with_val(wp, s.real() * &log_base).exp();
            Complex::with_val(wp, (pow * weight, 0))
        } else {
            let pow = Complex::with_val(wp, &s * &log_base).exp();
            pow * weight
        }
    };

    let tol = pow2(64, 16 - prec as i32);
    let mut h = 0.5f64;
    let mut sum = Complex::with_val(wp, 0);
    let mut k = (x_min / h).ceil() as i64;
    while (k as f64) * h <= x_max {
        sum += f(k as f64 * h);
        k += 1;
    }
    let mut estimate = Complex::with_val(wp, &sum * h);
    let mut last_change = Float::with_val(64, f64::INFINITY);
    let mut converged_at = None;
    for level in 1..=QUAD_MAX_LEVELS {
        h /= 2.0;
        let mut k = ((x_min / h).ceil() as i64) | 1;
        while (k as f64) * h <= x_max {
            sum += f(k as f64 * h);
            k += 2;
        }
        let next = Complex::with_val(wp, &sum * h);
        let diff = Float::with_val(64, Complex::with_val(wp, &next - &estimate).abs_ref());
        let size = Float::with_val(64, next.abs_ref());
        estimate = next;
        last_change = if size.is_zero() { diff } else { diff / size };
        if converged_at.is_none() && (last_change < tol || estimate.is_zero()) {
            converged_at = Some(level);
        }
        if converged_at.is_some_and(|c| level >= c + extra_levels) {
            break;
        }
    }
    if converged_at.is_none() {
        return Err(Error::QuadratureNotConverged {
            levels: QUAD_MAX_LEVELS,
            last_change: last_change.to_string_radix(10, Some(6)),
        });
    }
    let prefactor = Float::with_val(wp, (-p.clone()).exp()) / &p;
    Ok(round_complex(&(estimate * prefactor), prec))
}

/// Range of `x` outside which the transformed integrand is below
/// `2^{-wp-16}` of the integral's scale.
fn truncation_window(s: &Complex, p: &Float, wp: u32) -> (f64, f64) {
    let bits = (wp + 16) as f64 * std::f64::consts::LN_2;
    let pi = std::f64::consts::PI;
    // Left end: τ = exp(π sinh x) tiny, integrand ≈ τ π cosh x.
    let x_min = -((bits + 8.0) / pi).asinh() - 0.5;
    // Right end: e^{-τ} (1 + τ/p)^{Re s} τ cosh x negligible.
    let re_s = s.real().to_f64();
    let im_s = s.imag().to_f64().abs();
    let p = p.to_f64();
    let log_integrand = |tau: f64| {
        let growth = re_s * (tau / p).ln_1p() + im_s * std::f64::consts::FRAC_PI_2;
        -tau + growth + 2.0 * tau.ln().max(0.0) + 2.0
    };
    let mut tau = 1.0f64;
    while log_integrand(tau) > -bits {
        tau *= 1.25;
    }
    let x_max = (tau.ln() / pi).asinh() + 0.25;
    (x_min, x_max)
}

/// `(k!/p^{k+1}) e^{-p} Σ_{j=0}^{k} p^j/j!`, the value of the integral at `s = k`.
pub fn closed_form_integer_s(k: u32, p: &Float, prec: u32) -> Result<Float> {
    check_precision(prec)?;
    if p.is_nan() || *p <= 0 {
        return Err(Error::domain("p", "p > 0", p));
    }
    let wp = prec + GUARD_BITS;
    let p = Float::with_val(wp, p);
    let mut sum = Float::with_val(wp, 1);
    let mut term = Float::with_val(wp, 1);
    for j in 1..=k {
        term *= &p;
        term /= j;
        sum += &term;
    }
    let fact = Float::with_val(wp, Integer::from(Integer::factorial(k)));
    let pk1 = Float::with_val(wp, (&p).pow(k + 1));
    let e = Float::with_val(wp, (-p).exp());
    Ok(Float::with_val(prec, sum * fact * e / pk1))
}

/// Outcome of `log_derivative_check`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivativeCheck {
    /// `|closed form − finite difference|`.
    pub difference: Float,
    /// Bound on the finite-difference error at this step.
    pub tolerance: Float,
    /// The closed-form right-hand side.
    pub rhs: Complex,
    pub step: Float,
}

impl LogDerivativeCheck {
    pub fn passes(&self) -> bool {
        self.difference <= self.tolerance
    }
}

/// `(−log(1−z))^s` on the principal branch.
fn log_power(s: &Complex, z: &Complex, wp: u32) -> Complex {
    let one_minus = Complex::with_val(wp, 1u32 - z);
    let inner = -Complex::with_val(wp, one_minus.ln_ref());
    Complex::with_val(wp, Complex::with_val(wp, inner.ln_ref()) * s).exp()
}

/// Compares the closed form for the `n`-th derivative of `(−log(1−t))^s`
/// with a central difference of step `h = 2^{-prec/4}`.
///
/// The tolerance bounds the `O(h²)` truncation error through a Cauchy
/// estimate of the `(n+2)`-th derivative on the disc of radius
/// `min(t, 1−t)/2`, plus the rounding error of the difference quotient.
pub fn log_derivative_check(n: u32, s: &Complex, t: &Float, prec: u32) -> Result<LogDerivativeCheck> {
    check_precision(prec)?;
    if n == 0 || n > MAX_DERIVATIVE_ORDER {
        return Err(Error::domain("n", "1 ≤ n ≤ 4", n));
    }
    if t.is_nan() || *t < 0.05 || *t > 0.95 {
        return Err(Error::domain("t", "0.05 ≤ t ≤ 0.95", t));
    }
    let h_exp = -((prec / 4) as i32);
    let wp = prec + n * (prec / 4) + 2 * GUARD_BITS;
    let s = round_complex(s, wp);
    let t = Float::with_val(wp, t);
    let h = pow2(wp, h_exp);

    // Right-hand side.
    let one_minus = Float::with_val(wp, 1u32 - &t);
    let minus_log = -Float::with_val(wp, one_minus.ln_ref());
    let minus_log = Complex::with_val(wp, (minus_log, 0));
    let mut rhs = Complex::with_val(wp, 0);
    for i in 1..=n {
        let exponent = Complex::with_val(wp, &s - i);
        let power = Complex::with_val(wp, Complex::with_val(wp, minus_log.ln_ref()) * &exponent).exp();
        let term = falling_factorial(&s, i) * power * stirling_first(n as i64, i as i64);
        rhs += term;
    }
    rhs /= Float::with_val(wp, (&one_minus).pow(n));

    // Central difference: h^{-n} Σ_r (−1)^r C(n, r) f(t + (n/2 − r) h).
    let mut fd = Complex::with_val(wp, 0);
    for r in 0..=n {
        let offset = Float::with_val(wp, &h * (n as f64 / 2.0 - r as f64));
        let z = Complex::with_val(wp, (Float::with_val(wp, &t + &offset), 0));
        let val = log_power(&s, &z, wp) * binomial(n as i64, r as i64);
        if r % 2 == 0 {
            fd += val;
        } else {
            fd -= val;
        }
    }
    fd /= Float::with_val(wp, (&h).pow(n));

    let difference = Float::with_val(prec, Complex::with_val(wp, &rhs - &fd).abs_ref());

    // max |f| on the circle |z − t| = r, sampled; doubled for safety.
    let r = Float::with_val(64, Float::with_val(wp, &one_minus).min(&t)) / 2u32;
    let mut max_f = Float::with_val(64, 0);
    let samples = 64u32;
    let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
    for j in 0..samples {
        let angle = Float::with_val(wp, &two_pi * j) / samples;
        let (sin, cos) = angle.sin_cos(Float::new(wp));
        let z = Complex::with_val(wp, (Float::with_val(wp, &t + cos * &r), Float::with_val(wp, sin * &r)));
        let v = Float::with_val(64, log_power(&s, &z, wp).abs_ref());
        max_f.max_mut(&v);
    }
    max_f *= 2u32;
    // Derivatives on the inner disc of radius r/2, which covers the stencil.
    let half_r = Float::with_val(64, &r / 2u32);
    let fact = Float::with_val(64, Integer::from(Integer::factorial(n + 2)));
    let deriv_bound = fact * &max_f / Float::with_val(64, (&half_r).pow(n + 2));
    let h64 = Float::with_val(64, &h);
    let truncation = Float::with_val(64, h64.square_ref()) * deriv_bound * (n as f64 / 24.0 + 1.0);
    let rounding = max_f * pow2(64, (2 * n) as i32 - wp as i32) / Float::with_val(64, (&h64).pow(n));
    let tolerance = Float::with_val(prec, (truncation + rounding) * 4u32);

    Ok(LogDerivativeCheck {
        difference,
        tolerance,
        rhs: round_complex(&rhs, prec),
        step: Float::with_val(prec, &h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_error;

    fn real(x: f64) -> Complex {
        Complex::with_val(128, (x, 0))
    }

    fn f(x: f64) -> Float {
        Float::with_val(128, x)
    }

    #[test]
    fn quad_examples() {
        let e1 = Float::with_val(200, -1).exp();
        let got = quad_integral(&real(0.0), &f(1.0), 128).unwrap();
        assert!(relative_error(&got, &Complex::with_val(200, (&e1, 0))) < pow2(64, -108));
        let got = quad_integral(&real(2.0), &f(1.0), 128).unwrap();
        assert!(relative_error(&got, &Complex::with_val(200, (e1 * 5u32, 0))) < pow2(64, -108));
        assert!(got.imag().is_zero());
    }

    #[test]
    fn quad_rejects_bad_p() {
        assert!(quad_integral(&real(1.0), &f(0.0), 128).is_err());
        assert!(quad_integral(&real(1.0), &f(-1.0), 128).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let e1 = Float::with_val(128, -1).exp();
        assert_eq!(closed_form_integer_s(0, &f(1.0), 128).unwrap(), e1);
        let two_e = Float::with_val(160, -1).exp() * 2u32;
        let got = closed_form_integer_s(1, &f(1.0), 128).unwrap();
        assert!((Float::with_val(160, &got - &two_e) / &two_e).abs() < 1e-37);
        let want = Float::with_val(160, -2).exp() * 6u32 / 16u32 * (Float::with_val(160, 19) / 3u32);
        let got = closed_form_integer_s(3, &f(2.0), 128).unwrap();
        assert!((Float::with_val(160, &got - &want) / &want).abs() < 1e-37);
    }

    #[test]
    fn log_derivative_examples() {
        let check = log_derivative_check(1, &real(1.0), &f(0.5), 128).unwrap();
        assert_eq!(check.rhs, 2);
        assert!(check.passes(), "{check:?}");
        assert!(log_derivative_check(2, &real(2.0), &f(0.3), 128).unwrap().passes());
        let s = Complex::with_val(128, (0.5, 1));
        assert!(log_derivative_check(4, &s, &f(0.6), 128).unwrap().passes());
    }

    #[test]
    fn log_derivative_detects_wrong_rhs() {
        // A perturbed exponent must not pass against the unperturbed closed form.
        let check = log_derivative_check(2, &real(2.0), &f(0.3), 128).unwrap();
        let other = log_derivative_check(2, &real(2.001), &f(0.3), 128).unwrap();
        let gap = Float::with_val(128, Complex::with_val(128, &check.rhs - &other.rhs).abs_ref());
        assert!(gap > check.tolerance * 1000u32);
    }

    #[test]
    fn log_derivative_domain() {
        assert!(log_derivative_check(0, &real(1.0), &f(0.5), 128).is_err());
        assert!(log_derivative_check(5, &real(1.0), &f(0.5), 128).is_err());
        assert!(log_derivative_check(1, &real(1.0), &f(0.01), 128).is_err());
        assert!(log_derivative_check(1, &real(1.0), &f(0.99), 128).is_err());
    }
}
