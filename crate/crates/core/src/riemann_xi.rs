//! Series for `Λ(s) = π^{-s/2} Γ(s/2) ζ(s)` and `ξ(s) = −s(1−s)/2 · Λ(s)`
//! built from the theta constants `b_k = Σ_{n≥1} e^{-πn²} (πn²)^{-k}`:
//!
//! ```text
//! Λ(s) = 2 b_1 + Σ_{n≥1} 1/(n+1)! Σ_{i=1}^{n} b_{i+1} [n, i] ((s'/2 − 1)_i + (s/2 − 1)_i)
//!        − 1/(1−s) − 1/s,                                      s' = 1 − s
//! ξ(s) = ½ (1 − 2 Σ_{n≥0} 1/(n+1)! Σ_{i=0}^{n} b_{i+1} [n, i] P_i(s))
//! P_i(s) = s ∏_{j=0}^{i} ((1−s)/2 − j) + (1−s) ∏_{j=0}^{i} (s/2 − j)
//! ```
//!
//! Both truncate at `n = N`. Swapping the order of summation turns the
//! partial sum into `Σ_i w_i K_i` with `K_i = Σ_{n=i}^{N} [n, i]/(n+1)!`,
//! which depends only on `N` and the working precision and is cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numeric::{ceil_log2, check_precision, pow2, round_complex, GUARD_BITS};
use crate::oracle::quad_integral;

/// Theta constants `b_1..=b_{k_max}` at a fixed precision.
#[derive(Debug, Clone, PartialEq)]
pub struct BConstants {
    pub k_max: usize,
    /// `values[k-1] = b_k`.
    pub values: Vec<Float>,
    pub precision_bits: u32,
}

impl BConstants {
    /// `b_k` for `1 ≤ k ≤ k_max`.
    pub fn get(&self, k: usize) -> Option<&Float> {
        k.checked_sub(1).and_then(|i| self.values.get(i))
    }
}

/// Sums each `b_k` in ascending `n` until a term drops below
/// `2^{-prec-8}` of the partial sum.
pub fn b_constants(k_max: usize, prec: u32) -> Result<BConstants> {
    if k_max == 0 {
        return Err(Error::domain("k_max", "k_max ≥ 1", 0));
    }
    let wp = prec + GUARD_BITS;
    let pi = Float::with_val(wp, Constant::Pi);
    // Per n: e^{-πn²}/(πn²)^k, advanced in k by one division.
    let mut terms: Vec<Float> = Vec::new();
    let mut q: Vec<Float> = Vec::new();
    let cutoff = pow2(wp, -(prec as i32) - 8);
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut sum = Float::with_val(wp, 0);
        let mut n = 0usize;
        loop {
            if n == terms.len() {
                let pn2 = Float::with_val(wp, &pi * ((n + 1) * (n + 1)) as u64);
                let mut t = Float::with_val(wp, -&pn2).exp();
                for _ in 1..k {
                    t /= &pn2;
                }
                terms.push(t);
                q.push(pn2);
            }
            terms[n] /= &q[n];
            let term = &terms[n];
            let negligible = n > 0 && *term < Float::with_val(wp, &sum * &cutoff);
            sum += term;
            n += 1;
            if negligible {
                break;
            }
        }
        // Entries past n were not advanced for this k; bring them along.
        for j in n..terms.len() {
            terms[j] /= &q[j];
        }
        values.push(Float::with_val(prec, sum));
    }
    Ok(BConstants { k_max, values, precision_bits: prec })
}

type BCache = Mutex<HashMap<u32, Arc<BConstants>>>;

/// Cached `b_constants`, one table per precision, grown on demand.
pub fn cached_b_constants(k_max: usize, prec: u32) -> Result<Arc<BConstants>> {
    static CACHE: OnceLock<BCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(hit) = map.get(&prec) {
        if hit.k_max >= k_max {
            return Ok(Arc::clone(hit));
        }
    }
    let built = Arc::new(b_constants(k_max.max(16), prec)?);
    map.insert(prec, Arc::clone(&built));
    Ok(built)
}

/// `K_i = Σ_{n=i}^{N} [n, i]/(n+1)!` and the last row `[N, i]/(N+1)!`.
struct StirlingKernel {
    sums: Vec<Float>,
    last_row: Vec<Float>,
}

impl StirlingKernel {
    fn build(terms: usize, wp: u32) -> Self {
        let mut row = vec![Float::with_val(wp, 1)];
        let mut inv_fact = Float::with_val(wp, 1);
        let mut sums = vec![Float::with_val(wp, 1)];
        sums.resize(terms + 1, Float::new(wp));
        for n in 1..=terms {
            let prev = (n - 1) as u32;
            row.push(Float::new(wp));
            for i in (1..=n).rev() {
                let (lo, hi) = row.split_at_mut(i);
                hi[0] *= prev;
                hi[0] += &lo[i - 1];
            }
            row[0] *= prev;
            inv_fact /= (n + 1) as u32;
            for i in 1..=n {
                sums[i] += &row[i] * &inv_fact;
            }
        }
        let last_row = row.into_iter().map(|v| v * &inv_fact).collect();
        StirlingKernel { sums, last_row }
    }

    fn cached(terms: usize, wp: u32) -> Arc<StirlingKernel> {
        type Slot = Arc<OnceLock<Arc<StirlingKernel>>>;
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Slot>>> = OnceLock::new();
        let slot = {
            let map = CACHE.get_or_init(Default::default);
            let mut map = map.lock().unwrap_or_else(|e| e.into_inner());
            Arc::clone(map.entry((terms, wp)).or_default())
        };
        Arc::clone(slot.get_or_init(|| Arc::new(StirlingKernel::build(terms, wp))))
    }
}

/// A truncated xi or Lambda series value.
#[derive(Debug, Clone, PartialEq)]
pub struct XiEvaluation {
    pub value: Complex,
    pub terms_used: u64,
    /// `N` times the magnitude of the last outer term, at 64 bits.
    pub tail_estimate: Float,
    pub precision_bits: u32,
    pub working_precision: u32,
}

/// Working precision for a truncation at `n` terms: the Stirling-weighted
/// inner sums cancel by about `n log2(1/(1 − e^{-π}))` bits plus a
/// polynomial factor from the falling factorials.
pub fn xi_working_precision(s: &Complex, terms: u64, prec: u32) -> u32 {
    let loss_per_term = -(1.0 - (-std::f64::consts::PI).exp()).log2();
    let abs_s = s.real().to_f64().hypot(s.imag().to_f64());
    let spread = abs_s / 2.0 + (1.0 + abs_s) / 2.0 + 2.0;
    let log_n = ((terms + 2) as f64).log2();
    let loss = terms as f64 * loss_per_term + spread * log_n + (2.0 + abs_s * abs_s).log2();
    let raw = prec + GUARD_BITS + ceil_log2(terms + 1) + loss.ceil() as u32;
    raw.div_ceil(64) * 64
}

fn check_terms(max_terms: u64) -> Result<usize> {
    if max_terms == 0 {
        return Err(Error::domain("max_terms", "max_terms ≥ 1", 0));
    }
    usize::try_from(max_terms).map_err(|_| Error::domain("max_terms", "fits in memory", max_terms))
}

/// `Σ_i w_i K_i` and `N |Σ_i w_i [N, i]/(N+1)!|`.
fn weighted_sum(weights: &[Complex], kernel: &StirlingKernel, wp: u32) -> (Complex, Float) {
    let real = weights.iter().all(|w| w.imag().is_zero());
    let dot = |coeffs: &[Float]| {
        let mut re = Float::with_val(wp, 0);
        let mut im = Float::with_val(wp, 0);
        for (w, k) in weights.iter().zip(coeffs) {
            re += w.real() * k;
            if !real {
                im += w.imag() * k;
            }
        }
        Complex::with_val(wp, (re, im))
    };
    let sum = dot(&kernel.sums);
    let last = dot(&kernel.last_row);
    let n = (kernel.last_row.len() - 1) as u64;
    (sum, Float::with_val(64, last.abs_ref()) * n.max(1))
}

/// `∏_{j=lo}^{i} (x − j)` for `i = 0..=n`; entries below `lo` are 1.
fn shifted_products(x: &Complex, lo: u32, n: usize, wp: u32) -> Vec<Complex> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Complex::with_val(wp, 1);
    for i in 0..=n as u32 {
        if i >= lo {
            acc *= Complex::with_val(wp, x - i);
        }
        out.push(acc.clone());
    }
    out
}

/// `ξ(s)` truncated after the `n = max_terms` outer term.
pub fn xi_series(s: &Complex, max_terms: u64, prec: u32) -> Result<XiEvaluation> {
    check_precision(prec)?;
    let n = check_terms(max_terms)?;
    let wp = xi_working_precision(s, max_terms, prec);
    let s = round_complex(s, wp);
    let one_minus_s = Complex::with_val(wp, 1u32 - &s);
    let half_s = Complex::with_val(wp, &s / 2u32);
    let half_t = Complex::with_val(wp, &one_minus_s / 2u32);
    let a = shifted_products(&half_s, 0, n, wp);
    let a_dual = shifted_products(&half_t, 0, n, wp);
    let b = cached_b_constants(n + 1, wp)?;
    let weights: Vec<Complex> = (0..=n)
        .map(|i| {
            let p = Complex::with_val(wp, &s * &a_dual[i]) + Complex::with_val(wp, &one_minus_s * &a[i]);
            p * &b.values[i]
        })
        .collect();

    let (sum, tail) = if weights.iter().all(|w| w.is_zero()) {
        (Complex::with_val(wp, 0), Float::with_val(64, 0))
    } else {
        weighted_sum(&weights, &StirlingKernel::cached(n, wp), wp)
    };
    let value = (1u32 - sum * 2u32) / 2u32;
    Ok(XiEvaluation {
        value: round_complex(&Complex::with_val(wp, value), prec),
        terms_used: max_terms,
        tail_estimate: tail,
        precision_bits: prec,
        working_precision: wp,
    })
}

/// `Λ(s)` truncated after the `n = max_terms` outer term; `s ∈ {0, 1}` are poles.
pub fn lambda_series(s: &Complex, max_terms: u64, prec: u32) -> Result<XiEvaluation> {
    check_precision(prec)?;
    if s.imag().is_zero() && (s.real().is_zero() || *s.real() == 1) {
        return Err(Error::Pole(s.real().to_string_radix(10, Some(6))));
    }
    let n = check_terms(max_terms)?;
    let wp = xi_working_precision(s, max_terms, prec);
    let s = round_complex(s, wp);
    let one_minus_s = Complex::with_val(wp, 1u32 - &s);
    let a = Complex::with_val(wp, &s / 2u32) - 1u32;
    let a_dual = Complex::with_val(wp, &one_minus_s / 2u32) - 1u32;
    let b = cached_b_constants(n + 1, wp)?;
    // (x)_i = ∏_{j=1}^{i} (x + 1 − j)
    let ff = |x: &Complex| shifted_products(&Complex::with_val(wp, x + 1u32), 1, n, wp);
    let fa = ff(&a);
    let fa_dual = ff(&a_dual);
    let mut weights: Vec<Complex> = (0..=n)
        .map(|i| Complex::with_val(wp, &fa[i] + &fa_dual[i]) * &b.values[i])
        .collect();
    weights[0] = Complex::with_val(wp, 0);
    let (sum, tail) = weighted_sum(&weights, &StirlingKernel::cached(n, wp), wp);

    let b1 = Float::with_val(wp, &b.values[0]) * 2u32;
    let poles = Complex::with_val(wp, one_minus_s.recip_ref()) + Complex::with_val(wp, s.recip_ref());
    let value = sum + b1 - poles;
    Ok(XiEvaluation {
        value: round_complex(&value, prec),
        terms_used: max_terms,
        tail_estimate: tail,
        precision_bits: prec,
        working_precision: wp,
    })
}

/// `ξ(s) = ½ (1 − s(1−s) Σ_{n≥1} ∫₁^∞ e^{-πn²u} (u^{s/2−1} + u^{(1−s)/2−1}) du)`
/// by quadrature, stopping the theta sum once `e^{-πn²}/(πn²)` is below
/// `2^{-prec-16}` of the running total.
pub fn xi_oracle(s: &Complex, prec: u32) -> Result<Complex> {
    check_precision(prec)?;
    let wp = prec + GUARD_BITS;
    let s = round_complex(s, wp);
    let one_minus_s = Complex::with_val(wp, 1u32 - &s);
    let e1 = Complex::with_val(wp, &s / 2u32) - 1u32;
    let e2 = Complex::with_val(wp, &one_minus_s / 2u32) - 1u32;
    let pi = Float::with_val(wp, Constant::Pi);
    let cutoff = pow2(64, -(prec as i32) - 16);
    let mut total = Complex::with_val(wp, 0);
    for n in 1u64.. {
        let p = Float::with_val(wp, &pi * (n * n));
        let scale = Float::with_val(64, Float::with_val(wp, -&p).exp() / &p);
        if n > 1 && scale < Float::with_val(64, total.abs_ref()) * &cutoff {
            break;
        }
        total += quad_integral(&e1, &p, wp)?;
        total += quad_integral(&e2, &p, wp)?;
    }
    let value = (1u32 - Complex::with_val(wp, &s * &one_minus_s) * total) / 2u32;
    Ok(round_complex(&Complex::with_val(wp, value), prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_error;
    use rug::ops::Pow;

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(128, (re, im))
    }

    #[test]
    fn b_examples() {
        let b = b_constants(12, 128).unwrap();
        let pi = Float::with_val(128, Constant::Pi);
        let e_pi = Float::with_val(128, -&pi).exp();
        let direct: Float = (1..=8u32)
            .map(|n| {
                let p = Float::with_val(192, &pi * (n * n));
                Float::with_val(192, -&p).exp() / p
            })
            .fold(Float::with_val(192, 0), |acc, t| acc + t);
        let b1 = b.get(1).unwrap();
        assert!((Float::with_val(128, b1 - &direct) / &direct).abs() < 1e-30);
        assert!((b1.to_f64() - 0.01375).abs() < 1e-5);
        assert!(b.get(2).unwrap() < b.get(1).unwrap());
        let lead = Float::with_val(128, &e_pi / Float::with_val(128, (&pi).pow(10u32)));
        let rel = (Float::with_val(128, b.get(10).unwrap() - &lead) / &lead).abs();
        assert!(rel < 1e-6);
        assert!(b.get(0).is_none() && b.get(13).is_none());
        assert!(b_constants(0, 128).is_err());
    }

    #[test]
    fn kernel_matches_direct_rows() {
        let kernel = StirlingKernel::build(12, 256);
        let fact13 = Float::with_val(256, rug::Integer::from(rug::Integer::factorial(13)));
        for i in 0..=12i64 {
            let want = Float::with_val(256, crate::exact_core::stirling_first(12, i)) / &fact13;
            let got = &kernel.last_row[i as usize];
            assert!(Float::with_val(256, got - &want).abs() <= want * 1e-70);
        }
        let mut k3 = Float::with_val(256, 0);
        for n in 3..=12u32 {
            let f = Float::with_val(256, rug::Integer::from(rug::Integer::factorial(n + 1)));
            k3 += Float::with_val(256, crate::exact_core::stirling_first(n as i64, 3)) / f;
        }
        assert!((Float::with_val(256, &kernel.sums[3] - &k3) / &k3).abs() < 1e-70);
    }

    #[test]
    fn xi_at_zero_is_half() {
        let xi = xi_series(&c(0.0, 0.0), 50, 128).unwrap();
        assert_eq!(xi.value, Complex::with_val(128, (0.5, 0)));
    }

    #[test]
    fn lambda_rejects_poles() {
        assert!(matches!(lambda_series(&c(0.0, 0.0), 10, 128), Err(Error::Pole(_))));
        assert!(matches!(lambda_series(&c(1.0, 0.0), 10, 128), Err(Error::Pole(_))));
    }

    #[test]
    fn truncations_are_consistent() {
        for s in [c(0.5, 0.0), c(2.0, 0.0), c(0.5, 3.0)] {
            let xi = xi_series(&s, 60, 128).unwrap();
            let lambda = lambda_series(&s, 60, 128).unwrap();
            let s1 = Complex::with_val(128, 1u32 - &s);
            let from_lambda = -Complex::with_val(128, &s * &s1) * &lambda.value / 2u32;
            assert!(relative_error(&xi.value, &from_lambda) < 1e-30);
        }
    }

    #[test]
    fn oracle_examples() {
        let half = Complex::with_val(96, (0.5, 0));
        assert!(relative_error(&xi_oracle(&c(0.0, 0.0), 96).unwrap(), &half) < 1e-25);
        let at_one = xi_oracle(&c(1.0, 0.0), 96).unwrap();
        assert!(relative_error(&at_one, &half) < 1e-25);
        let pi6 = Complex::with_val(96, (Float::with_val(96, Constant::Pi) / 6u32, 0));
        assert!(relative_error(&xi_oracle(&c(2.0, 0.0), 96).unwrap(), &pi6) < 1e-25);
    }
}
