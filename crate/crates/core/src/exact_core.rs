//! Exact integer substrate: unsigned Stirling numbers of the first kind,
//! falling factorials and binomial coefficients.

use std::sync::{Arc, OnceLock, RwLock};

use rug::{Complex, Integer};

/// Arbitrary-size signed integer. Arithmetic never overflows.
pub type ExactInt = Integer;

/// Exact ratio of two [`ExactInt`]s, always stored reduced with a positive
/// denominator.
pub type Rational = rug::Rational;

/// Cache of the unsigned Stirling triangle `rows[n][i] = [n, i]`.
///
/// Rows are appended on demand under a write lock and never mutated after
/// publication, so readers only ever clone an `Arc` to a finished row.
#[derive(Debug, Default)]
pub struct StirlingTriangle {
    rows: RwLock<Vec<Arc<[Integer]>>>,
}

impl StirlingTriangle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide shared triangle.
    pub fn global() -> &'static StirlingTriangle {
        static GLOBAL: OnceLock<StirlingTriangle> = OnceLock::new();
        GLOBAL.get_or_init(StirlingTriangle::new)
    }

    /// Number of rows built so far.
    pub fn len(&self) -> usize {
        self.rows.read().expect("stirling cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row `n`, i.e. `[n, 0], …, [n, n]`, growing the cache if needed.
    pub fn row(&self, n: usize) -> Arc<[Integer]> {
        if let Some(row) = self.rows.read().expect("stirling cache poisoned").get(n) {
            return Arc::clone(row);
        }
        let mut rows = self.rows.write().expect("stirling cache poisoned");
        if rows.is_empty() {
            rows.push(Arc::from(vec![Integer::from(1)]));
        }
        while rows.len() <= n {
            // [m+1, i] = [m, i-1] + m [m, i]
            let m = rows.len() - 1;
            let prev = &rows[m];
            let mut next = Vec::with_capacity(m + 2);
            next.push(Integer::new());
            for i in 1..=m + 1 {
                let mut v = Integer::from(&prev[i - 1]);
                if i <= m {
                    v += Integer::from(&prev[i] * m as u64);
                }
                next.push(v);
            }
            rows.push(Arc::from(next));
        }
        Arc::clone(&rows[n])
    }

    /// `[n, i]` with the zero extension for `i < 0`, `i > n` or `n < 0`.
    pub fn get(&self, n: i64, i: i64) -> Integer {
        if n < 0 || i < 0 || i > n {
            return Integer::new();
        }
        self.row(n as usize)[i as usize].clone()
    }
}

/// Unsigned Stirling number of the first kind `[n, i]`.
///
/// Any integer arguments are accepted: the value is 0 whenever `n < 0`,
/// `i < 0` or `i > n`.
pub fn stirling_first(n: i64, i: i64) -> Integer {
    StirlingTriangle::global().get(n, i)
}

/// Falling factorial `(s)_i = s (s-1) ⋯ (s-i+1)`, with `(s)_0 = 1`.
///
/// Computed at the precision of `s`.
pub fn falling_factorial(s: &Complex, i: u32) -> Complex {
    let mut acc = Complex::with_val(s.prec(), 1);
    let mut factor = s.clone();
    for _ in 0..i {
        acc *= &factor;
        factor -= 1u32;
    }
    acc
}

/// Coefficients `c_0, …, c_n` of `(s)_n` as a polynomial in `s`:
/// `c_i = (-1)^{n-i} [n, i]`.
pub fn falling_factorial_coeffs(n: usize) -> Vec<Integer> {
    let row = StirlingTriangle::global().row(n);
    row.iter()
        .enumerate()
        .map(|(i, c)| if (n - i) % 2 == 0 { c.clone() } else { Integer::from(-c) })
        .collect()
}

/// Binomial coefficient `C(n, k)`; 0 for `k < 0` and for `k > n ≥ 0`.
/// Negative `n` uses the usual extension `C(n, k) = n (n-1) ⋯ (n-k+1) / k!`.
pub fn binomial(n: i64, k: i64) -> Integer {
    if k < 0 || (n >= 0 && k > n) {
        return Integer::new();
    }
    Integer::from(n).binomial(k as u32)
}
