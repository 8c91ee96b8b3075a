//! Series for `∫₁^∞ e^{-up} u^s du` and the upper incomplete gamma function.
//!
//! ```text
//! ∫₁^∞ e^{-up} u^s du = e^{-p}/p · (1 + Σ_{n≥1} g_n(s, p)/(n+1)!)     (p ≥ 1)
//! Γ(s, z) = z^s ∫₁^∞ e^{-uz} u^{s-1} du
//! ```
//!
//! The coefficients `c_n = g_n(s, p)/n!` are the Taylor coefficients of
//! `(1 - log(1-w)/p)^s`, so they are produced by the power recurrence
//!
//! ```text
//! n p c_n = (s+1) Σ_{j<n} c_j − n Σ_{k=1}^{n} c_{n-k}/k
//! ```
//!
//! which costs O(n) per term and does not suffer the cancellation of the
//! Stirling-basis sum. `g_eval` stays the reference for single terms.

use rug::{Assign, Complete, Complex, Float};

use crate::error::{Error, Result};
use crate::g_polynomials::g_eval;
use crate::numeric::{check_precision, pow2, round_complex, summation_precision, DEFAULT_PRECISION};

/// Precision of the majorant sequence; it only steers stopping decisions.
const MAJORANT_PRECISION: u32 = 64;

/// Consecutive sub-threshold majorant terms required before stopping.
const STOP_HYSTERESIS: u32 = 3;

/// Number of partial sums fed to the tail fit.
const FIT_SAMPLES: usize = 7;

/// Smallest term count used as a fit sample.
const MIN_FIT_TERMS: u64 = 8;

#[derive(Debug, Clone)]
pub struct SeriesOptions {
    pub max_terms: u64,
    /// Stopping threshold relative to `|raw_value|`; `None` means `2^{-prec}`.
    pub target_rel_err: Option<Float>,
    pub accelerate: bool,
    pub prec: u32,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            max_terms: 4096,
            target_rel_err: None,
            accelerate: false,
            prec: DEFAULT_PRECISION,
        }
    }
}

impl SeriesOptions {
    pub fn with_terms(max_terms: u64, prec: u32) -> Self {
        SeriesOptions { max_terms, prec, ..Default::default() }
    }

    pub fn accelerated(mut self, on: bool) -> Self {
        self.accelerate = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEvaluation {
    /// Accelerated estimate when requested, otherwise equal to `raw_value`.
    pub value: Complex,
    /// Plain partial sum through `terms_used`.
    pub raw_value: Complex,
    pub terms_used: u64,
    /// Magnitude of the last included term, in the units of `value`.
    /// This and `tail_estimate` are carried at 64 bits.
    pub last_term_mag: Float,
    /// `N` times the majorant of term `N`, in the units of `value`.
    pub tail_estimate: Float,
    pub precision_bits: u32,
    pub working_precision: u32,
    /// Whether the majorant stopping rule fired before `max_terms`.
    pub converged: bool,
}

/// Power-recurrence state for the coefficients of `(1 - log(1-w)/p)^s`.
struct Coefficients {
    prec: u32,
    s1_re: Float,
    s1_im: Option<Float>,
    p: Float,
    re: Vec<Float>,
    im: Vec<Float>,
    sum_re: Float,
    sum_im: Float,
}

impl Coefficients {
    fn new(s: &Complex, p: &Float, prec: u32) -> Self {
        let s1_re = Float::with_val(prec, s.real() + 1u32);
        let s1_im = (!s.imag().is_zero()).then(|| Float::with_val(prec, s.imag()));
        let complex = s1_im.is_some();
        Coefficients {
            prec,
            s1_re,
            s1_im,
            p: Float::with_val(prec, p),
            re: vec![Float::with_val(prec, 1)],
            im: if complex { vec![Float::new(prec)] } else { Vec::new() },
            sum_re: Float::with_val(prec, 1),
            sum_im: Float::new(prec),
        }
    }

    fn is_complex(&self) -> bool {
        self.s1_im.is_some()
    }

    /// Computes `c_n` for the next `n`; `inv[k-1] = 1/k`.
    fn advance(&mut self, inv: &[Float]) -> (Float, Float) {
        let n = self.re.len();
        let prec = self.prec;
        let conv = |c: &[Float]| {
            let mut acc = Float::new(prec);
            for (x, y) in c.iter().rev().zip(&inv[..n]) {
                acc += x * y;
            }
            acc
        };
        let np = Float::with_val(prec, &self.p * n as u32);
        let mut re = Float::with_val(prec, &self.s1_re * &self.sum_re);
        re -= conv(&self.re) * n as u32;
        let im = if let Some(s1_im) = &self.s1_im {
            re -= Float::with_val(prec, s1_im * &self.sum_im);
            let mut im = Float::with_val(prec, &self.s1_re * &self.sum_im);
            im += Float::with_val(prec, s1_im * &self.sum_re);
            im -= conv(&self.im) * n as u32;
            im / &np
        } else {
            Float::new(prec)
        };
        let re = re / &np;
        self.sum_re += &re;
        self.re.push(re.clone());
        if self.is_complex() {
            self.sum_im += &im;
            self.im.push(im.clone());
        }
        (re, im)
    }
}

/// Majorant coefficients for real `σ = |s| ≥ 0`, all nonnegative. Runs in
/// `f64` and falls back to a 64-bit `Float` recurrence on overflow.
enum MajorantSequence {
    Fast { sigma1: f64, p: f64, c: Vec<f64>, sum: f64 },
    Big(Coefficients, Vec<Float>),
}

impl MajorantSequence {
    fn new(sigma: &Float, p: &Float) -> Self {
        MajorantSequence::Fast { sigma1: sigma.to_f64() + 1.0, p: p.to_f64(), c: vec![1.0], sum: 1.0 }
    }

    fn advance(&mut self, sigma: &Float, p: &Float, max_terms: u64) -> Float {
        if let MajorantSequence::Fast { sigma1, p: pf, c, sum } = self {
            let n = c.len();
            let conv: f64 = c.iter().rev().enumerate().map(|(k, x)| x / (k + 1) as f64).sum();
            let next = (*sigma1 * *sum - n as f64 * conv) / (n as f64 * *pf);
            if next.is_finite() && sum.is_finite() {
                c.push(next.max(0.0));
                *sum += next.max(0.0);
                return Float::with_val(MAJORANT_PRECISION, next.max(0.0));
            }
            let s = Complex::with_val(MAJORANT_PRECISION, (sigma, 0));
            let mut big = Coefficients::new(&s, p, MAJORANT_PRECISION);
            let inv = reciprocals(max_terms, MAJORANT_PRECISION);
            for _ in 1..n {
                big.advance(&inv);
            }
            *self = MajorantSequence::Big(big, inv);
        }
        match self {
            MajorantSequence::Big(big, inv) => big.advance(inv).0.abs(),
            MajorantSequence::Fast { .. } => unreachable!(),
        }
    }
}

fn reciprocals(count: u64, prec: u32) -> Vec<Float> {
    (1..=count).map(|k| Float::with_val(prec, 1) / k).collect()
}

fn require_p(p: &Float) -> Result<()> {
    if p.is_nan() || *p < 1 {
        Err(Error::domain("p", "p ≥ 1", p))
    } else {
        Ok(())
    }
}

fn check_options(opts: &SeriesOptions) -> Result<()> {
    check_precision(opts.prec)?;
    if opts.max_terms == 0 {
        return Err(Error::domain("max_terms", "max_terms ≥ 1", 0));
    }
    Ok(())
}

/// `e^{-p}/p · (1 + Σ_{n=1}^{N} g_n(s, p)/(n+1)!)`, summed in ascending `n`.
///
/// Stops once the majorant term `g_n(|s|, p)/(n+1)!` has stayed below
/// `target_rel_err · |raw_value|` for three consecutive `n`, or at
/// `max_terms`. Running out of terms is reported through `converged`.
pub fn integral_series(s: &Complex, p: &Float, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    require_p(p)?;
    check_options(opts)?;
    let prec = opts.prec;
    let wp = summation_precision(prec, opts.max_terms);
    let mp = MAJORANT_PRECISION;

    let inv = reciprocals(opts.max_terms, wp);
    let mut main = Coefficients::new(s, p, wp);

    // The majorant coincides with the series itself for real s ≥ 0.
    let self_majorant = s.imag().is_zero() && *s.real() >= 0;
    let sigma = Float::with_val(wp, s.abs_ref());
    let mut majorant = (!self_majorant).then(|| MajorantSequence::new(&sigma, p));

    let target = match &opts.target_rel_err {
        Some(t) => Float::with_val(mp, t),
        None => pow2(mp, -(prec as i32)),
    };

    let mut bracket = Complex::with_val(wp, 1);
    let mut partials: Vec<Complex> = vec![bracket.clone()];
    let mut last_term = Float::with_val(mp, 1);
    let mut last_majorant = Float::with_val(mp, 1);
    let mut quiet = 0;
    let mut n = 0u64;
    let mut converged = false;
    while n < opts.max_terms {
        n += 1;
        let (re, im) = main.advance(&inv);
        let term = Complex::with_val(wp, (re, im)) / (n + 1);
        bracket += &term;
        partials.push(bracket.clone());
        last_term = Float::with_val(mp, term.abs_ref());
        last_majorant = match &mut majorant {
            None => last_term.clone(),
            Some(m) => m.advance(&sigma, p, opts.max_terms) / (n + 1),
        };
        let scale = Float::with_val(mp, bracket.abs_ref()) * &target;
        if last_majorant < scale {
            quiet += 1;
            if quiet >= STOP_HYSTERESIS {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let prefactor = Float::with_val(wp, (-Float::with_val(wp, p)).exp()) / p;
    let raw = Complex::with_val(wp, &bracket * &prefactor);
    let value = if opts.accelerate && !converged {
        let samples = fit_samples(&partials);
        let limit = fit_log_tail(&samples, s, wp).unwrap_or_else(|| bracket.clone());
        Complex::with_val(wp, &limit * &prefactor)
    } else {
        raw.clone()
    };

    let prefactor_low = Float::with_val(mp, &prefactor);
    Ok(SeriesEvaluation {
        value: round_complex(&value, prec),
        raw_value: round_complex(&raw, prec),
        terms_used: n,
        last_term_mag: Float::with_val(mp, &last_term * &prefactor_low),
        tail_estimate: Float::with_val(mp, &last_majorant * &prefactor_low) * n,
        precision_bits: prec,
        working_precision: wp,
        converged,
    })
}

/// Partial sums at `N·2^{-j/2}` for `j = 0, 1, …`, or fewer than three
/// samples when the series is too short for a fit.
fn fit_samples(partials: &[Complex]) -> Vec<(u64, Complex)> {
    let n = (partials.len() - 1) as u64;
    let mut out: Vec<(u64, Complex)> = Vec::with_capacity(FIT_SAMPLES);
    for j in 0..FIT_SAMPLES {
        let m = (n as f64 * 2f64.powf(-(j as f64) / 2.0)).round() as u64;
        if m < MIN_FIT_TERMS || out.last().is_some_and(|(prev, _)| *prev == m) {
            break;
        }
        out.push((m, partials[m as usize].clone()));
    }
    out
}

/// Fits `S(N) = L + Σ_k a_k (ln N)^{s-1-k}/N` through the samples and
/// returns `L`. `None` when fewer than three samples or a singular system.
fn fit_log_tail(samples: &[(u64, Complex)], s: &Complex, wp: u32) -> Option<Complex> {
    let m = samples.len();
    if m < 3 {
        return None;
    }
    let first = &samples[0].1;
    if samples.iter().all(|(_, v)| v == first) {
        return Some(first.clone());
    }
    let mut rows: Vec<Vec<Complex>> = Vec::with_capacity(m);
    for (count, _) in samples {
        let log_n = Float::with_val(wp, *count).ln();
        let log_log = Complex::with_val(wp, (log_n.ln(), 0));
        let inv_n = Float::with_val(wp, 1) / *count;
        let mut row = vec![Complex::with_val(wp, 1)];
        for k in 0..m - 1 {
            let exponent = Complex::with_val(wp, s - 1u32) - k as u32;
            let power = Complex::with_val(wp, &exponent * &log_log).exp();
            row.push(power * &inv_n);
        }
        rows.push(row);
    }
    let rhs = samples.iter().map(|(_, v)| Complex::with_val(wp, v)).collect();
    solve_linear(rows, rhs).map(|x| x.into_iter().next().unwrap())
}

/// Gaussian elimination with partial pivoting on `|·|`.
fn solve_linear(mut a: Vec<Vec<Complex>>, mut b: Vec<Complex>) -> Option<Vec<Complex>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| {
            let ax = Float::with_val(64, a[x][col].abs_ref());
            let ay = Float::with_val(64, a[y][col].abs_ref());
            ax.partial_cmp(&ay).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].is_zero() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = Complex::with_val(a[row][col].prec(), &a[row][col] / &a[col][col]);
            for k in col..n {
                let delta = Complex::with_val(a[row][k].prec(), &factor * &a[col][k]);
                a[row][k] -= delta;
            }
            let delta = Complex::with_val(b[row].prec(), &factor * &b[col]);
            b[row] -= delta;
        }
    }
    let mut x: Vec<Complex> = b.iter().map(|v| Complex::new(v.prec())).collect();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc -= Complex::with_val(acc.prec(), &a[row][k] * &x[k]);
        }
        x[row].assign(acc / &a[row][row]);
    }
    Some(x)
}

/// Three-point Richardson limit from partial sums at `N`, `2N`, `4N`,
/// removing `c/N` and `d/N²`. Identical inputs come back unchanged.
pub fn tail_extrapolate(partials: &[Complex; 3]) -> Complex {
    let [a, b, c] = partials;
    if a == b && b == c {
        return c.clone();
    }
    let prec = a.prec().0.max(b.prec().0).max(c.prec().0);
    let mut out = Complex::with_val(prec, c * 8u32);
    out -= Complex::with_val(prec, b * 6u32);
    out += a;
    out / 3u32
}

/// `g_n(|s|, p)/(n+1)!`, the majorant of term `n`.
pub fn majorant_term(s: &Complex, p: &Float, n: usize, prec: u32) -> Result<Float> {
    require_p(p)?;
    let wp = prec + 32;
    let abs_s = Complex::with_val(wp, (Float::with_val(wp, s.abs_ref()), 0));
    let g = g_eval(n, &abs_s, p, wp)?;
    let fact = Float::with_val(wp, rug::Integer::factorial(n as u32 + 1).complete());
    Ok(Float::with_val(prec, g.real() / fact))
}

/// `Γ(s, z) = z^s ∫₁^∞ e^{-uz} u^{s-1} du` on the principal branch.
pub fn upper_incomplete_gamma(s: &Complex, z: &Float, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    if z.is_nan() || *z < 1 {
        return Err(Error::domain("z", "z ≥ 1", z));
    }
    let wp = summation_precision(opts.prec, opts.max_terms);
    let shifted = Complex::with_val(wp, s - 1u32);
    let inner = integral_series(&shifted, z, opts)?;
    let log_z = Float::with_val(wp, z.ln_ref());
    let factor = if s.imag().is_zero() {
        Complex::with_val(wp, (Float::with_val(wp, s.real() * &log_z).exp(), 0))
    } else {
        Complex::with_val(wp, s * &log_z).exp()
    };
    let scale = Float::with_val(MAJORANT_PRECISION, factor.abs_ref());
    let prec = opts.prec;
    Ok(SeriesEvaluation {
        value: round_complex(&Complex::with_val(wp, &inner.value * &factor), prec),
        raw_value: round_complex(&Complex::with_val(wp, &inner.raw_value * &factor), prec),
        last_term_mag: Float::with_val(MAJORANT_PRECISION, &inner.last_term_mag * &scale),
        tail_estimate: Float::with_val(MAJORANT_PRECISION, &inner.tail_estimate * &scale),
        ..inner
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_error;

    fn real(x: f64) -> Complex {
        Complex::with_val(128, (x, 0))
    }

    fn e_pow(prec: u32, x: i32) -> Float {
        Float::with_val(prec, x).exp()
    }

    #[test]
    fn zero_exponent_is_exact() {
        let p = Float::with_val(128, 2);
        let eval = integral_series(&real(0.0), &p, &SeriesOptions::with_terms(10, 128)).unwrap();
        let want = e_pow(128, -2) / 2u32;
        assert_eq!(*eval.raw_value.real(), want);
        assert!(eval.raw_value.imag().is_zero());
        assert!(eval.converged);
    }

    #[test]
    fn unit_exponent_partial_sums() {
        let p = Float::with_val(128, 1);
        for n in [1u64, 2, 7, 100] {
            let eval = integral_series(&real(1.0), &p, &SeriesOptions::with_terms(n, 128)).unwrap();
            assert_eq!(eval.terms_used, n);
            let want = e_pow(300, -1) * (Float::with_val(300, 2) - Float::with_val(300, 1) / (n + 1));
            let want = Complex::with_val(300, (want, 0));
            assert!(relative_error(&eval.raw_value, &want) < pow2(64, -112), "N = {n}");
        }
    }

    #[test]
    fn recurrence_matches_stirling_terms() {
        let s = Complex::with_val(128, (2.5, -1.25));
        let p = Float::with_val(128, 1.5);
        let mut coeffs = Coefficients::new(&s, &p, 200);
        let inv = reciprocals(40, 200);
        let mut fact = Float::with_val(200, 1);
        for n in 1..=40u32 {
            let (re, im) = coeffs.advance(&inv);
            fact *= n;
            let got = Complex::with_val(200, (re, im)) * &fact;
            let want = g_eval(n as usize, &s, &p, 200).unwrap();
            assert!(relative_error(&got, &want) < pow2(64, -150), "n = {n}");
        }
    }

    #[test]
    fn majorant_examples() {
        let one = Float::with_val(128, 1);
        let m = majorant_term(&Complex::with_val(128, (0, 3)), &one, 1, 128).unwrap();
        assert_eq!(m, 1.5);
        assert_eq!(majorant_term(&real(0.0), &one, 5, 128).unwrap(), 0);
        let m = majorant_term(&real(1.0), &one, 4, 128).unwrap();
        assert_eq!(m, Float::with_val(128, 1) / 20u32);
    }

    #[test]
    fn extrapolation_examples() {
        let v = real(0.3);
        assert_eq!(tail_extrapolate(&[v.clone(), v.clone(), v.clone()]), v);
        let e = e_pow(128, -1);
        let at = |n: u32| Complex::with_val(128, (Float::with_val(128, 2u32) - Float::with_val(128, 1) / (n + 1), 0)) * &e;
        let n = 1000;
        let limit = tail_extrapolate(&[at(n), at(2 * n), at(4 * n)]);
        let want = Complex::with_val(128, (Float::with_val(128, &e * 2u32), 0));
        assert!(relative_error(&limit, &want) < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let half = Float::with_val(64, 0.5);
        assert!(integral_series(&real(1.0), &half, &SeriesOptions::default()).is_err());
        assert!(upper_incomplete_gamma(&real(1.0), &half, &SeriesOptions::default()).is_err());
        let one = Float::with_val(64, 1);
        assert!(integral_series(&real(1.0), &one, &SeriesOptions::with_terms(0, 128)).is_err());
        assert!(integral_series(&real(1.0), &one, &SeriesOptions::with_terms(10, 32)).is_err());
    }

    #[test]
    fn gamma_unit_values() {
        let one = Float::with_val(128, 1);
        let opts = SeriesOptions::with_terms(2000, 128).accelerated(true);
        let g1 = upper_incomplete_gamma(&real(1.0), &one, &opts).unwrap();
        let want = Complex::with_val(128, (e_pow(128, -1), 0));
        assert!(relative_error(&g1.value, &want) < 1e-30);
        assert!(g1.value.imag().is_zero());
    }
}
