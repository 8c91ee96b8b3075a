use proptest::prelude::*;
use rug::ops::Pow;
use rug::Integer;

use stirling_xi::exact_core::{binomial, falling_factorial_coeffs, stirling_first, Rational, StirlingTriangle};
use stirling_xi::g_polynomials::{coeff_via_atable, g_eval_rational, g_expand_shifted, positivity_check};
use stirling_xi::newton_table::{a_newton_oracle, build_a_table, stirling_pair_product};
use stirling_xi::operator_calculus::{
    alternating_sum, apply_preserving, build_certificate, cal_a, cal_a_from_words, corollary_check,
    expand_combination, monomial_check, verify_certificate, FTerm, PreservingOp,
};

fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

#[test]
fn stirling_rows_sum_to_factorials() {
    for n in 0..=30u32 {
        let row = StirlingTriangle::global().row(n as usize);
        let sum: Integer = row.iter().sum();
        assert_eq!(sum, factorial(n), "n = {n}");
    }
}

#[test]
fn stirling_recurrence_replays() {
    for n in 0..30i64 {
        for i in -1..=n + 2 {
            let lhs = stirling_first(n + 1, i);
            let rhs = stirling_first(n, i - 1) + Integer::from(n) * stirling_first(n, i);
            assert_eq!(lhs, rhs, "n = {n}, i = {i}");
        }
    }
}

#[test]
fn falling_factorial_at_integers() {
    for n in 0..=15usize {
        let coeffs = falling_factorial_coeffs(n);
        for m in n as u32..=20 {
            let value: Integer = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| Integer::from(c * Integer::from(Integer::u_pow_u(m, k as u32))))
                .sum();
            assert_eq!(value, factorial(m) / factorial(m - n as u32), "n = {n}, m = {m}");
        }
    }
}

#[test]
fn newton_table_matches_forward_differences() {
    let table = build_a_table(8);
    for m in 0..=8i64 {
        for i in 0..=m {
            for k in 0..=2 * m {
                assert_eq!(table.entry(m, i, k).unwrap(), &a_newton_oracle(m, i, k), "({m},{i},{k})");
            }
        }
    }
}

#[test]
fn newton_series_reconstructs_pair_product() {
    let table = build_a_table(6);
    for m in 0..=6i64 {
        for i in 0..=m {
            for n in m..=2 * m + 4 {
                let series: Integer =
                    (0..=2 * m).map(|k| Integer::from(table.entry(m, i, k).unwrap() * binomial(n, k))).sum();
                assert_eq!(series, stirling_pair_product(n, m, i), "m = {m}, i = {i}, n = {n}");
            }
        }
    }
}

#[test]
fn newton_table_vanishes_outside_band() {
    let table = build_a_table(8);
    for m in 1..=8i64 {
        for i in 0..=m {
            for k in (0..=m).chain(2 * m + 1..=2 * m + 3) {
                assert_eq!(*table.get(m, i, k).unwrap(), 0, "({m},{i},{k})");
            }
        }
    }
}

#[test]
fn corollary_and_monomial_shape() {
    let table = build_a_table(8);
    for m in 0..=8i64 {
        for i in 0..=m {
            for k in 0..=2 * m {
                assert!(corollary_check(m, i, k, &table).unwrap(), "({m},{i},{k})");
                assert!(monomial_check(m, i, k), "({m},{i},{k})");
            }
        }
    }
}

#[test]
fn recurrence_matches_operator_words() {
    for m in 0..=5usize {
        for i in 0..=m {
            for k in 0..=2 * m {
                let rec = cal_a(m as i64, i as i64, k as i64);
                let words = cal_a_from_words(m, i, k);
                assert_eq!(rec.coeffs(), words.coeffs(), "({m},{i},{k})");
            }
        }
    }
}

#[test]
fn certificates_verify_and_bound_the_sums() {
    let table = build_a_table(7);
    for m in 1..=7 {
        for k in m + 1..=2 * m {
            for j in 0..=m {
                let cert = build_certificate(m, k, j).unwrap();
                assert!(verify_certificate(&cert).is_valid(), "({m},{k},{j})");
                let sum = alternating_sum(m, k, j, &table).unwrap();
                assert_eq!(cert.value_at_one(), sum);
                assert!(sum >= 0);
            }
        }
    }
}

#[test]
fn certificate_indices_outside_range_are_rejected() {
    assert!(build_certificate(0, 1, 0).is_err());
    assert!(build_certificate(2, 2, 0).is_err());
    assert!(build_certificate(2, 5, 0).is_err());
    assert!(build_certificate(2, 3, 3).is_err());
}

#[test]
fn g_coefficients_from_newton_table() {
    let table = build_a_table(12);
    for n in 1..=12 {
        let poly = g_expand_shifted(n).unwrap();
        for m in 0..=n {
            for j in 0..=m {
                let direct = poly.coeff((n - m) as u32, j as u32);
                assert_eq!(coeff_via_atable(n, m, j, &table).unwrap(), direct, "n = {n}, m = {m}, j = {j}");
            }
        }
    }
}

#[test]
fn g_expansion_positive_through_25() {
    for n in 1..=25 {
        assert!(positivity_check(n).unwrap(), "n = {n}");
    }
}

fn fterm() -> impl Strategy<Value = FTerm> {
    (0usize..6, 0usize..6, 0usize..4).prop_map(|(m, n, slack)| FTerm::new(m + n + slack, m, n))
}

fn preserving_op() -> impl Strategy<Value = PreservingOp> {
    prop_oneof![
        Just(PreservingOp::B1PlusC1),
        Just(PreservingOp::B2PlusC2),
        Just(PreservingOp::B1),
        Just(PreservingOp::B2),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn preserving_rules_merge_without_changing_expansion(
        op in preserving_op(),
        level in 2usize..8,
        raw in prop::collection::vec((1i64..5, 0usize..4, 0usize..4), 1..5),
    ) {
        let terms: Vec<(Integer, FTerm)> = raw
            .into_iter()
            .filter(|&(_, m, n)| m + n <= level)
            .map(|(c, m, n)| (Integer::from(c), FTerm::new(level, m, n)))
            .collect();
        prop_assume!(!terms.is_empty());
        let out = apply_preserving(op, &terms).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (c, f) in &out {
            prop_assert!(*c > 0);
            prop_assert!(f.satisfies_positivity_condition());
            prop_assert!(seen.insert(*f));
        }
        // Applying term by term and summing gives the same polynomial.
        let shift = match op {
            PreservingOp::B1PlusC1 | PreservingOp::B1 => 1,
            PreservingOp::B2PlusC2 | PreservingOp::B2 => 2,
        };
        let mut unmerged = Vec::new();
        for t in &terms {
            unmerged.extend(apply_preserving(op, std::slice::from_ref(t)).unwrap());
        }
        prop_assert_eq!(
            expand_combination(&out, level + shift),
            expand_combination(&unmerged, level + shift)
        );
    }

    #[test]
    fn fterm_value_at_one_is_zero_or_one(f in fterm()) {
        let v = f.value_at_one();
        prop_assert!(v == 0 || v == 1);
        prop_assert_eq!(f.expand().eval_at_one(), v);
    }

    #[test]
    fn g_expansion_matches_rational_evaluation(
        n in 1usize..14,
        s_num in -20i64..20,
        s_den in 1i64..7,
        x_num in -5i64..30,
        x_den in 1i64..7,
    ) {
        let s = Rational::from((s_num, s_den));
        let x = Rational::from((x_num, x_den));
        let p = Rational::from(&x + 1u32);
        prop_assume!(p != 0);
        let lhs = g_eval_rational(n, &s, &p).unwrap() * p.clone().pow(n as i32);
        prop_assert_eq!(lhs, g_expand_shifted(n).unwrap().eval_rational(&s, &x));
    }

    #[test]
    fn binomial_pascal_rule(n in 0i64..60, k in -2i64..62) {
        prop_assert_eq!(binomial(n + 1, k + 1), binomial(n, k) + binomial(n, k + 1));
    }
}
