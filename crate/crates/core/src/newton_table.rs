//! Newton-series coefficients `A_{m,i}^k` of the Stirling pair product
//!
//! ```text
//! F_{m,i}(n) = [n, n-m+i] · [n-m+i, n-m] = Σ_k A_{m,i}^k C(n, k)
//! ```
//!
//! The table is built from the three-term recurrence in `(m, i, k)`;
//! [`a_newton_oracle`] recomputes any entry independently as a forward
//! difference of `F_{m,i}` at 0.

use rug::Integer;

use crate::error::{Error, Result};
use crate::exact_core::{binomial, stirling_first};

/// Dense table of `A_{m,i}^k` for `0 ≤ i ≤ m ≤ m_max`, `0 ≤ k ≤ 2m`.
///
/// Reads outside the stored `i`/`k` window return zero, which matches the
/// boundary conventions `A_{m,-1}^k = A_{m,i}^{-1} = A_{m,i}^{-2} = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ATable {
    m_max: usize,
    // entries[m][i][k]
    entries: Vec<Vec<Vec<Integer>>>,
}

/// One stored entry of an [`ATable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ARecord {
    pub m: usize,
    pub i: usize,
    pub k: usize,
    pub value: Integer,
}

static ZERO: Integer = Integer::ZERO;

impl ATable {
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `A_{m,i}^k`, or `None` when `m` exceeds the table.
    pub fn get(&self, m: i64, i: i64, k: i64) -> Option<&Integer> {
        if m < 0 || m as usize > self.m_max {
            return None;
        }
        let row = &self.entries[m as usize];
        if i < 0 || i as usize >= row.len() {
            return Some(&ZERO);
        }
        let cell = &row[i as usize];
        if k < 0 || k as usize >= cell.len() {
            return Some(&ZERO);
        }
        Some(&cell[k as usize])
    }

    /// Like [`ATable::get`] but reports an out-of-table `m` as an error.
    pub fn entry(&self, m: i64, i: i64, k: i64) -> Result<&Integer> {
        self.get(m, i, k).ok_or_else(|| {
            Error::IndexOutOfRange(format!("m = {m} exceeds table bound {}", self.m_max))
        })
    }

    /// All nonzero entries in `(m, i, k)` lexicographic order.
    pub fn nonzero_records(&self) -> Vec<ARecord> {
        let mut out = Vec::new();
        for (m, row) in self.entries.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                for (k, value) in cell.iter().enumerate() {
                    if *value != 0 {
                        out.push(ARecord { m, i, k, value: value.clone() });
                    }
                }
            }
        }
        out
    }

    /// `Σ_k A_{m,i}^k C(n, k)`, which must reproduce `F_{m,i}(n)` for `n ≥ m`.
    pub fn newton_sum(&self, m: usize, i: usize, n: i64) -> Result<Integer> {
        let mut acc = Integer::new();
        for k in 0..=2 * m as i64 {
            acc += self.entry(m as i64, i as i64, k)? * binomial(n, k);
        }
        Ok(acc)
    }
}

/// Builds `A_{m,i}^k` for every `m ≤ m_max` by
///
/// ```text
/// A_{m,i}^k = (k-1)(A_{m-1,i}^{k-1} + A_{m-1,i}^{k-2} + A_{m-1,i-1}^{k-2})
///           + (k+i-m-1) A_{m-1,i-1}^{k-1}
/// ```
///
/// starting from `A_{0,0}^k = δ_{k,0}`.
pub fn build_a_table(m_max: usize) -> ATable {
    let mut table = ATable {
        m_max: 0,
        entries: vec![vec![vec![Integer::from(1)]]],
    };
    for m in 1..=m_max {
        let mut row = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let mut cell = Vec::with_capacity(2 * m + 1);
            let (mi, ii) = (m as i64, i as i64);
            for k in 0..=2 * m as i64 {
                let prev = |di: i64, dk: i64| table.get(mi - 1, ii - di, k - dk).expect("previous row");
                let mut v = Integer::from(prev(0, 1) + prev(0, 2));
                v += prev(1, 2);
                v *= k - 1;
                v += Integer::from(prev(1, 1) * (k + ii - mi - 1));
                cell.push(v);
            }
            row.push(cell);
        }
        table.entries.push(row);
        table.m_max = m;
    }
    table
}

/// `[n, n-m+i] · [n-m+i, n-m]`, zero-extended; in particular 0 for `n < m`.
pub fn stirling_pair_product(n: i64, m: i64, i: i64) -> Integer {
    let upper = stirling_first(n, n - m + i);
    if upper == 0 {
        return upper;
    }
    upper * stirling_first(n - m + i, n - m)
}

/// `k`-th forward difference at 0 of `n ↦ stirling_pair_product(n, m, i)`:
/// `Σ_{r=0}^{k} (-1)^{k-r} C(k, r) F(r)`.
pub fn a_newton_oracle(m: i64, i: i64, k: i64) -> Integer {
    let mut acc = Integer::new();
    for r in 0..=k {
        let term = binomial(k, r) * stirling_pair_product(r, m, i);
        if (k - r) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_examples() {
        let t = build_a_table(3);
        assert_eq!(*t.get(1, 0, 2).unwrap(), 1);
        assert_eq!(*t.get(2, 1, 3).unwrap(), 3);
        assert_eq!(*t.get(2, 2, 4).unwrap(), 3);
        assert_eq!(*t.get(3, 0, 3).unwrap(), 0);
        assert_eq!(*t.get(0, 0, 0).unwrap(), 1);
        assert!(t.get(4, 0, 0).is_none());
        assert!(t.entry(4, 0, 0).is_err());
    }

    #[test]
    fn pair_product_examples() {
        assert_eq!(stirling_pair_product(4, 2, 1), 18);
        assert_eq!(stirling_pair_product(1, 2, 0), 0);
        assert_eq!(stirling_pair_product(3, 0, 0), 1);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(a_newton_oracle(1, 0, 2), 1);
        assert_eq!(a_newton_oracle(1, 1, 2), 1);
        assert_eq!(a_newton_oracle(2, 0, 4), 3);
    }

    #[test]
    fn row_three_frozen() {
        // Forward differences of F_{3,i}, computed once by direct enumeration.
        let t = build_a_table(3);
        let expected: [[i64; 3]; 4] = [[6, 20, 15], [11, 50, 45], [12, 50, 45], [6, 20, 15]];
        for (i, row) in expected.iter().enumerate() {
            for (dk, want) in row.iter().enumerate() {
                assert_eq!(*t.get(3, i as i64, 4 + dk as i64).unwrap(), *want);
            }
        }
    }

    #[test]
    fn unit_row() {
        let t = build_a_table(2);
        for k in 0..=4 {
            assert_eq!(*t.get(0, 0, k).unwrap(), i64::from(k == 0));
        }
    }

    #[test]
    fn records_skip_zeros() {
        let t = build_a_table(2);
        let recs = t.nonzero_records();
        assert!(recs.iter().all(|r| r.value != 0));
        assert_eq!(recs[0], ARecord { m: 0, i: 0, k: 0, value: Integer::from(1) });
        // m = 1: (0,2), (1,2); m = 2: six entries with k in {3, 4}
        assert_eq!(recs.len(), 1 + 2 + 6);
    }
}
