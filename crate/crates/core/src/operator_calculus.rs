//! Level-indexed operator calculus and positivity certificates.
//!
//! For each level `k` there is an indeterminate `t_k`. Four linear
//! operators move polynomials up one or two levels (the multiplier always
//! uses the *output* level `k`):
//!
//! ```text
//! B1(t_{k-1}^n) = (k-1) t_k^n          C1(t_{k-1}^n) = -n t_k^{n+1}
//! B2(t_{k-2}^n) = (k-1) t_k^{n+1}      C2(t_{k-2}^n) = -(k-1) t_k^{n+2}
//! ```
//!
//! `𝒜_{m,i}^k(t_k)` is the sum of all words `Y_m ⋯ Y_1(1)` with
//! `Y_1 ∈ {B2, C2}`, exactly `i` letters from `{C1, C2}` and exactly
//! `k - m` letters from `{B2, C2}`. Evaluated at `t = 1` it recovers
//! `(-1)^i A_{m,i}^k`.
//!
//! A [`PositivityCertificate`] writes `Σ_i C(m-i, j) 𝒜_{m,i}^k(t)` as a
//! positive integer combination of `f(k, M, N) = t^M (1-t)^N` with
//! `M, N ≥ 0`, `M + N ≤ k`. Each such `f` is 0 or 1 at `t = 1`, so the
//! certificate proves `Σ_i (-1)^i C(m-i, j) A_{m,i}^k ≥ 0`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use rug::Integer;

use crate::error::{Error, Result};
use crate::exact_core::binomial;
use crate::newton_table::ATable;

/// The four elementary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    B1,
    C1,
    B2,
    C2,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::B1, Operator::C1, Operator::B2, Operator::C2];

    /// Levels added by the operator.
    pub fn level_shift(self) -> usize {
        match self {
            Operator::B1 | Operator::C1 => 1,
            Operator::B2 | Operator::C2 => 2,
        }
    }

    pub fn is_c(self) -> bool {
        matches!(self, Operator::C1 | Operator::C2)
    }
}

/// Integer polynomial in the level indeterminate `t_k`.
///
/// Coefficients are indexed by exponent and kept without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPolynomial {
    level: usize,
    coeffs: Vec<Integer>,
}

impl LevelPolynomial {
    pub fn new(level: usize, mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Self { level, coeffs }
    }

    pub fn zero(level: usize) -> Self {
        Self { level, coeffs: Vec::new() }
    }

    /// The constant 1 at level 0, i.e. `t_0^0`.
    pub fn unit() -> Self {
        Self::monomial(0, 0, Integer::from(1))
    }

    pub fn monomial(level: usize, exponent: usize, coeff: Integer) -> Self {
        let mut coeffs = vec![Integer::new(); exponent + 1];
        coeffs[exponent] = coeff;
        Self::new(level, coeffs)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Same coefficients tagged with another level.
    pub fn at_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }

    pub fn eval(&self, t: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn eval_at_one(&self) -> Integer {
        self.coeffs.iter().sum()
    }

    /// `self + factor · t^shift · other`, ignoring the level of `other`.
    pub fn add_shifted(&mut self, other: &LevelPolynomial, shift: usize, factor: &Integer) {
        if other.is_zero() || *factor == 0 {
            return;
        }
        let needed = other.coeffs.len() + shift;
        if self.coeffs.len() < needed {
            self.coeffs.resize(needed, Integer::new());
        }
        for (e, c) in other.coeffs.iter().enumerate() {
            self.coeffs[e + shift] += Integer::from(c * factor);
        }
        *self = LevelPolynomial::new(self.level, std::mem::take(&mut self.coeffs));
    }
}

impl fmt::Display for LevelPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·t")?,
                _ => write!(f, "{c}·t^{e}")?,
            }
        }
        write!(f, " @ level {}", self.level)
    }
}

/// Applies one elementary operator; linear in the coefficients.
pub fn apply_operator(op: Operator, poly: &LevelPolynomial) -> LevelPolynomial {
    let k = poly.level + op.level_shift();
    let km1 = Integer::from(k - 1);
    let mut out = LevelPolynomial::zero(k);
    match op {
        Operator::B1 => out.add_shifted(poly, 0, &km1),
        Operator::B2 => out.add_shifted(poly, 1, &km1),
        Operator::C2 => out.add_shifted(poly, 2, &Integer::from(-&km1)),
        Operator::C1 => {
            let mut coeffs = vec![Integer::new(); poly.coeffs.len() + 1];
            for (n, c) in poly.coeffs.iter().enumerate() {
                coeffs[n + 1] = Integer::from(c * n as u64);
                coeffs[n + 1] = -std::mem::take(&mut coeffs[n + 1]);
            }
            out = LevelPolynomial::new(k, coeffs);
        }
    }
    out
}

fn in_cal_a_range(m: i64, i: i64, k: i64) -> bool {
    (m, i, k) == (0, 0, 0) || (m >= 1 && (0..=m).contains(&i) && (m + 1..=2 * m).contains(&k))
}

/// Memoized `𝒜_{m,i}^k`, computed by the recurrence
///
/// ```text
/// 𝒜_{m,i}^k = (k-1)(𝒜_{m-1,i}^{k-1} - t² 𝒜_{m-1,i-1}^{k-2} + t 𝒜_{m-1,i}^{k-2})
///           - (k-m+i-1) t 𝒜_{m-1,i-1}^{k-1}
/// ```
///
/// Safe to share between threads; concurrent fills of the same key insert
/// identical values.
#[derive(Debug, Default)]
pub struct CalA {
    cache: RwLock<HashMap<(i64, i64, i64), Arc<LevelPolynomial>>>,
}

impl CalA {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static CalA {
        static GLOBAL: OnceLock<CalA> = OnceLock::new();
        GLOBAL.get_or_init(CalA::new)
    }

    pub fn get(&self, m: i64, i: i64, k: i64) -> Arc<LevelPolynomial> {
        let level = k.max(0) as usize;
        if !in_cal_a_range(m, i, k) {
            return Arc::new(LevelPolynomial::zero(level));
        }
        if let Some(hit) = self.cache.read().expect("calA cache poisoned").get(&(m, i, k)) {
            return Arc::clone(hit);
        }
        let value = if m == 0 {
            LevelPolynomial::unit()
        } else {
            let mut acc = LevelPolynomial::zero(level);
            let km1 = Integer::from(k - 1);
            acc.add_shifted(&self.get(m - 1, i, k - 1), 0, &km1);
            acc.add_shifted(&self.get(m - 1, i - 1, k - 2), 2, &Integer::from(-&km1));
            acc.add_shifted(&self.get(m - 1, i, k - 2), 1, &km1);
            acc.add_shifted(&self.get(m - 1, i - 1, k - 1), 1, &Integer::from(-(k - m + i - 1)));
            acc
        };
        let value = Arc::new(value);
        let mut cache = self.cache.write().expect("calA cache poisoned");
        Arc::clone(cache.entry((m, i, k)).or_insert(value))
    }
}

/// `𝒜_{m,i}^k(t_k)` from the shared cache. Zero outside
/// `{0 ≤ i ≤ m, m+1 ≤ k ≤ 2m} ∪ {(0, 0, 0)}`.
pub fn cal_a(m: i64, i: i64, k: i64) -> LevelPolynomial {
    (*CalA::global().get(m, i, k)).clone()
}

/// `𝒜_{m,i}^k` straight from its definition: the sum over all operator
/// words. Exponential in `m`; kept as an independent check of [`cal_a`].
pub fn cal_a_from_words(m: usize, i: usize, k: usize) -> LevelPolynomial {
    let mut total = LevelPolynomial::zero(k);
    if m == 0 {
        return if i == 0 && k == 0 { LevelPolynomial::unit() } else { total };
    }
    let mut word = vec![Operator::B1; m];
    let words = 4usize.pow(m as u32);
    for code in 0..words {
        let mut rest = code;
        for letter in word.iter_mut() {
            *letter = Operator::ALL[rest % 4];
            rest /= 4;
        }
        // word[0] is Y_1, the first operator applied.
        if !matches!(word[0], Operator::B2 | Operator::C2) {
            continue;
        }
        let c_count = word.iter().filter(|op| op.is_c()).count();
        let two_count = word.iter().filter(|op| op.level_shift() == 2).count();
        if c_count != i || two_count + m != k {
            continue;
        }
        let image = word
            .iter()
            .fold(LevelPolynomial::unit(), |poly, &op| apply_operator(op, &poly));
        total.add_shifted(&image, 0, &Integer::from(1));
    }
    total
}

/// Whether `𝒜_{m,i}^k` is an integer multiple of `t^{k-m+i}` (the zero
/// polynomial counts as a multiple).
pub fn monomial_check(m: i64, i: i64, k: i64) -> bool {
    let poly = cal_a(m, i, k);
    let exponent = k - m + i;
    if poly.is_zero() {
        return true;
    }
    exponent >= 0
        && poly.degree() == Some(exponent as usize)
        && poly.coeffs()[..exponent as usize].iter().all(|c| *c == 0)
}

/// Whether `𝒜_{m,i}^k(1) = (-1)^i A_{m,i}^k`.
pub fn corollary_check(m: i64, i: i64, k: i64, table: &ATable) -> Result<bool> {
    let a = table.entry(m, i, k)?;
    let signed = if i.rem_euclid(2) == 0 { a.clone() } else { Integer::from(-a) };
    Ok(cal_a(m, i, k).eval_at_one() == signed)
}

/// Basis element `f(k, M, N) = t_k^M (1 - t_k)^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FTerm {
    pub level: usize,
    pub t_power: usize,
    pub one_minus_t_power: usize,
}

impl FTerm {
    pub const fn new(level: usize, t_power: usize, one_minus_t_power: usize) -> Self {
        Self { level, t_power, one_minus_t_power }
    }

    /// `k - M - N ≥ 0` (nonnegativity of the indices is structural).
    pub fn satisfies_positivity_condition(&self) -> bool {
        self.t_power + self.one_minus_t_power <= self.level
    }

    pub fn expand(&self) -> LevelPolynomial {
        let n = self.one_minus_t_power as i64;
        let mut coeffs = vec![Integer::new(); self.t_power + self.one_minus_t_power + 1];
        for r in 0..=n {
            let c = binomial(n, r);
            coeffs[self.t_power + r as usize] = if r % 2 == 0 { c } else { -c };
        }
        LevelPolynomial::new(self.level, coeffs)
    }

    /// Value at `t = 1`: 1 when `N = 0`, else 0.
    pub fn value_at_one(&self) -> Integer {
        Integer::from(self.one_minus_t_power == 0)
    }
}

impl fmt::Display for FTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t^{} (1−t)^{} @ level {}",
            self.t_power, self.one_minus_t_power, self.level
        )
    }
}

/// Operators known to map a positive combination of admissible `f` terms
/// to another such combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreservingOp {
    B1PlusC1,
    B2PlusC2,
    B1,
    B2,
}

/// `(coefficient, term)` pairs of a positive combination.
pub type Combination = Vec<(Integer, FTerm)>;

/// Images of `f(k, M, N)`:
///
/// ```text
/// (B1+C1) f = (k-M) f(k+1,M,N) + M f(k+1,M,N+1) + N f(k+1,M+2,N-1)
/// (B2+C2) f = (k+1) f(k+2,M+1,N+1)
///      B1 f = k f(k+1,M,N)
///      B2 f = (k+1) f(k+2,M+1,N)
/// ```
///
/// Zero-coefficient images are dropped and equal terms merged; the output
/// is sorted by term. Inputs with a nonpositive coefficient or a term that
/// violates the positivity condition are rejected.
pub fn apply_preserving(op: PreservingOp, terms: &[(Integer, FTerm)]) -> Result<Combination> {
    let mut merged: BTreeMap<FTerm, Integer> = BTreeMap::new();
    let mut push = |coeff: Integer, term: FTerm| {
        if coeff != 0 {
            *merged.entry(term).or_default() += coeff;
        }
    };
    for (coeff, term) in terms {
        if *coeff <= 0 {
            return Err(Error::BrokenCertificate(format!(
                "nonpositive coefficient {coeff} on {term}"
            )));
        }
        if !term.satisfies_positivity_condition() {
            return Err(Error::BrokenCertificate(format!("{term} violates the positivity condition")));
        }
        let FTerm { level: k, t_power: m, one_minus_t_power: n } = *term;
        match op {
            PreservingOp::B1PlusC1 => {
                push(Integer::from(coeff * (k - m) as u64), FTerm::new(k + 1, m, n));
                push(Integer::from(coeff * m as u64), FTerm::new(k + 1, m, n + 1));
                if n > 0 {
                    push(Integer::from(coeff * n as u64), FTerm::new(k + 1, m + 2, n - 1));
                }
            }
            PreservingOp::B2PlusC2 => {
                push(Integer::from(coeff * (k + 1) as u64), FTerm::new(k + 2, m + 1, n + 1));
            }
            PreservingOp::B1 => push(Integer::from(coeff * k as u64), FTerm::new(k + 1, m, n)),
            PreservingOp::B2 => {
                push(Integer::from(coeff * (k + 1) as u64), FTerm::new(k + 2, m + 1, n));
            }
        }
    }
    Ok(merged.into_iter().map(|(t, c)| (c, t)).collect())
}

/// Expansion of a combination as a polynomial at `level`.
pub fn expand_combination(terms: &[(Integer, FTerm)], level: usize) -> LevelPolynomial {
    let mut acc = LevelPolynomial::zero(level);
    for (c, term) in terms {
        acc.add_shifted(&term.expand(), 0, c);
    }
    acc
}

/// `Σ_i C(m-i, j) 𝒜_{m,i}^k(t_k)`.
pub fn certificate_target(m: usize, k: usize, j: usize) -> LevelPolynomial {
    let mut acc = LevelPolynomial::zero(k);
    for i in 0..=m {
        let weight = binomial((m - i) as i64, j as i64);
        acc.add_shifted(&cal_a(m as i64, i as i64, k as i64), 0, &weight);
    }
    acc
}

/// `Σ_i (-1)^i C(m-i, j) A_{m,i}^k`.
pub fn alternating_sum(m: usize, k: usize, j: usize, table: &ATable) -> Result<Integer> {
    let mut acc = Integer::new();
    for i in 0..=m {
        let term = binomial((m - i) as i64, j as i64) * table.entry(m as i64, i as i64, k as i64)?;
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Positive decomposition of `Σ_i C(m-i, j) 𝒜_{m,i}^k` in the `f` basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositivityCertificate {
    pub m: usize,
    pub k: usize,
    pub j: usize,
    pub terms: Combination,
}

impl PositivityCertificate {
    pub fn expand(&self) -> LevelPolynomial {
        expand_combination(&self.terms, self.k)
    }

    /// Value of the certified polynomial at `t = 1`.
    pub fn value_at_one(&self) -> Integer {
        self.terms
            .iter()
            .map(|(c, term)| Integer::from(c * &term.value_at_one()))
            .sum()
    }
}

/// Outcome of [`verify_certificate`]; anything but `Valid` names the first
/// failed clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateVerdict {
    Valid,
    NonPositiveCoefficient { index: usize, coeff: Integer },
    PositivityConditionViolated { index: usize, term: FTerm },
    WrongLevel { index: usize, term: FTerm },
    ExpansionMismatch { expected: LevelPolynomial, found: LevelPolynomial },
}

impl CertificateVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, CertificateVerdict::Valid)
    }
}

impl fmt::Display for CertificateVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertificateVerdict::Valid => write!(f, "valid"),
            CertificateVerdict::NonPositiveCoefficient { index, coeff } => {
                write!(f, "term {index}: coefficient {coeff} is not positive")
            }
            CertificateVerdict::PositivityConditionViolated { index, term } => {
                write!(f, "term {index}: {term} violates the positivity condition")
            }
            CertificateVerdict::WrongLevel { index, term } => {
                write!(f, "term {index}: {term} is not at the certificate level")
            }
            CertificateVerdict::ExpansionMismatch { expected, found } => {
                write!(f, "expansion {found} differs from target {expected}")
            }
        }
    }
}

/// Checks positivity of every coefficient, the positivity condition on
/// every term, and exact equality of the expansion with the target sum.
pub fn verify_certificate(cert: &PositivityCertificate) -> CertificateVerdict {
    for (index, (coeff, term)) in cert.terms.iter().enumerate() {
        if *coeff <= 0 {
            return CertificateVerdict::NonPositiveCoefficient { index, coeff: coeff.clone() };
        }
        if !term.satisfies_positivity_condition() {
            return CertificateVerdict::PositivityConditionViolated { index, term: *term };
        }
        if term.level != cert.k {
            return CertificateVerdict::WrongLevel { index, term: *term };
        }
    }
    let expected = certificate_target(cert.m, cert.k, cert.j);
    let found = cert.expand();
    if expected != found {
        return CertificateVerdict::ExpansionMismatch { expected, found };
    }
    CertificateVerdict::Valid
}

/// Memoizing certificate builder.
///
/// Base case `m = 1`: `j = 0 ↦ f(2,1,1)`, `j = 1 ↦ f(2,1,0)`. Step:
///
/// ```text
/// cert(m+1, k, j) = Σ_{l=1,2} (B_l+C_l)(cert(m, k-l, j)) + B_l(cert(m, k-l, j-1))
/// ```
///
/// where out-of-range sub-certificates contribute nothing.
#[derive(Debug, Default)]
pub struct CertificateBuilder {
    cache: RwLock<HashMap<(usize, usize, usize), Arc<Combination>>>,
}

impl CertificateBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static CertificateBuilder {
        static GLOBAL: OnceLock<CertificateBuilder> = OnceLock::new();
        GLOBAL.get_or_init(CertificateBuilder::new)
    }

    pub fn build(&self, m: usize, k: usize, j: usize) -> Result<PositivityCertificate> {
        if m < 1 || k < m + 1 || k > 2 * m || j > m {
            return Err(Error::IndexOutOfRange(format!(
                "certificate needs m ≥ 1, m+1 ≤ k ≤ 2m, 0 ≤ j ≤ m; got m = {m}, k = {k}, j = {j}"
            )));
        }
        let terms = self.combination(m, k as i64, j as i64)?;
        Ok(PositivityCertificate { m, k, j, terms: (*terms).clone() })
    }

    fn combination(&self, m: usize, k: i64, j: i64) -> Result<Arc<Combination>> {
        if k < m as i64 + 1 || k > 2 * m as i64 || j < 0 || j > m as i64 {
            return Ok(Arc::new(Vec::new()));
        }
        let key = (m, k as usize, j as usize);
        if let Some(hit) = self.cache.read().expect("certificate cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let terms = if m == 1 {
            let n = if j == 0 { 1 } else { 0 };
            vec![(Integer::from(1), FTerm::new(2, 1, n))]
        } else {
            let mut parts = Vec::new();
            for (l, full, b_only) in [
                (1, PreservingOp::B1PlusC1, PreservingOp::B1),
                (2, PreservingOp::B2PlusC2, PreservingOp::B2),
            ] {
                parts.extend(apply_preserving(full, &self.combination(m - 1, k - l, j)?)?);
                parts.extend(apply_preserving(b_only, &self.combination(m - 1, k - l, j - 1)?)?);
            }
            merge(parts)
        };
        let terms = Arc::new(terms);
        let mut cache = self.cache.write().expect("certificate cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(terms)))
    }
}

fn merge(parts: Combination) -> Combination {
    let mut merged: BTreeMap<FTerm, Integer> = BTreeMap::new();
    for (c, t) in parts {
        *merged.entry(t).or_default() += c;
    }
    merged.into_iter().filter(|(_, c)| *c != 0).map(|(t, c)| (c, t)).collect()
}

/// Certificate for `(m, k, j)` from the shared builder.
pub fn build_certificate(m: usize, k: usize, j: usize) -> Result<PositivityCertificate> {
    CertificateBuilder::global().build(m, k, j)
}
