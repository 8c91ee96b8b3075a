//! `verify`: runs the cross-module consistency suites at a chosen scale.

use clap::Args;
use rug::{Complex, Float};
use serde_json::{json, Value};

use stirling_xi::g_polynomials::{coeff_via_atable, g_expand_shifted};
use stirling_xi::gamma_series::{integral_series, SeriesOptions};
use stirling_xi::newton_table::{a_newton_oracle, build_a_table};
use stirling_xi::numeric::{format_real, relative_error};
use stirling_xi::operator_calculus::{build_certificate, verify_certificate};
use stirling_xi::oracle::quad_integral;

use crate::{complex_json, Envelope, Output};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Largest m for the A-table and certificate suites.
    #[arg(long = "max-m", default_value_t = 6)]
    pub max_m: usize,
    /// Largest n for the g-positivity suite.
    #[arg(long = "max-n", default_value_t = 20)]
    pub max_n: usize,
    /// Number of (s, p) pairs in the series-vs-quadrature suite.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    #[arg(long, default_value_t = 4096)]
    pub terms: u64,
    #[arg(long, default_value_t = 128, value_parser = crate::precision)]
    pub prec: u32,
}

/// Relative tolerance for accelerated series values against quadrature.
const SERIES_TOLERANCE: f64 = 1e-6;

/// Series grid, visited in this order.
const SERIES_GRID: [((f64, f64), u32); 12] = [
    ((0.5, 0.0), 1),
    ((2.0, 0.0), 2),
    ((3.0, 2.0), 5),
    ((-0.5, 0.0), 1),
    ((0.5, 0.0), 2),
    ((2.0, 0.0), 5),
    ((3.0, 2.0), 1),
    ((-0.5, 0.0), 2),
    ((0.5, 0.0), 5),
    ((2.0, 0.0), 1),
    ((3.0, 2.0), 2),
    ((-0.5, 0.0), 5),
];

struct Suite {
    name: &'static str,
    checked: usize,
    failures: Vec<String>,
    detail: Vec<Value>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, checked: 0, failures: Vec::new(), detail: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "passed": self.failures.is_empty(),
            "checked": self.checked.to_string(),
            "failures": self.failures,
        });
        if !self.detail.is_empty() {
            v["samples"] = Value::Array(self.detail.clone());
        }
        v
    }
}

fn atable_suite(max_m: usize) -> Suite {
    let mut suite = Suite::new("atable_vs_newton_oracle");
    let table = build_a_table(max_m);
    for m in 0..=max_m as i64 {
        for i in 0..=m {
            for k in 0..=2 * m {
                let got = table.get(m, i, k).cloned().unwrap_or_default();
                let want = a_newton_oracle(m, i, k);
                suite.check(got == want, || format!("A({m},{i},{k}) = {got}, oracle {want}"));
            }
        }
    }
    suite
}

fn certificate_suite(max_m: usize) -> Suite {
    let mut suite = Suite::new("positivity_certificates");
    for m in 1..=max_m {
        for k in m + 1..=2 * m {
            for j in 0..=m {
                match build_certificate(m, k, j) {
                    Ok(cert) => {
                        let verdict = verify_certificate(&cert);
                        suite.check(verdict.is_valid(), || format!("({m},{k},{j}): {verdict}"));
                    }
                    Err(e) => suite.check(false, || format!("({m},{k},{j}): {e}")),
                }
            }
        }
    }
    suite
}

fn g_positivity_suite(max_n: usize, max_m: usize) -> Suite {
    let mut suite = Suite::new("g_positivity");
    let table = build_a_table(max_m);
    for n in 1..=max_n {
        let poly = match g_expand_shifted(n) {
            Ok(p) => p,
            Err(e) => {
                suite.check(false, || format!("n = {n}: {e}"));
                continue;
            }
        };
        for (&(a, b), c) in poly.iter() {
            suite.check(*c > 0, || format!("n = {n}: coefficient of s^{a} x^{b} is {c}"));
        }
        for m in 0..=n.min(max_m) {
            for j in 0..=m {
                let direct = poly.coeff((n - m) as u32, j as u32);
                match coeff_via_atable(n, m, j, &table) {
                    Ok(pred) => suite.check(pred == direct, || {
                        format!("n = {n}, m = {m}, j = {j}: table {pred}, expansion {direct}")
                    }),
                    Err(e) => suite.check(false, || format!("n = {n}, m = {m}, j = {j}: {e}")),
                }
            }
        }
    }
    suite
}

fn series_suite(samples: usize, terms: u64, prec: u32) -> Suite {
    let mut suite = Suite::new("series_vs_quadrature");
    let opts = SeriesOptions::with_terms(terms, prec).accelerated(true);
    for &((re, im), p) in SERIES_GRID.iter().cycle().take(samples) {
        let s = Complex::with_val(prec, (re, im));
        let p = Float::with_val(prec, p);
        let label = format!("s = {re}{im:+}i, p = {p}", p = p.to_f64());
        let outcome = integral_series(&s, &p, &opts).and_then(|e| Ok((e, quad_integral(&s, &p, prec)?)));
        match outcome {
            Ok((eval, reference)) => {
                let err = relative_error(&eval.value, &reference);
                let raw_err = relative_error(&eval.raw_value, &reference);
                suite.check(err <= SERIES_TOLERANCE, || format!("{label}: relative error {}", err.to_f64()));
                suite.detail.push(json!({
                    "s": complex_json(&s),
                    "p": format_real(&p),
                    "relative_error": format_real(&Float::with_val(24, &err)),
                    "raw_relative_error": format_real(&Float::with_val(24, &raw_err)),
                }));
            }
            Err(e) => suite.check(false, || format!("{label}: {e}")),
        }
    }
    suite
}

pub fn run(args: &VerifyArgs) -> Output {
    let inputs = json!({
        "max_m": args.max_m.to_string(),
        "max_n": args.max_n.to_string(),
        "samples": args.samples.to_string(),
        "terms": args.terms.to_string(),
        "prec": args.prec.to_string(),
    });
    let runs: [Box<dyn Fn() -> Suite>; 4] = [
        Box::new(|| atable_suite(args.max_m)),
        Box::new(|| certificate_suite(args.max_m)),
        Box::new(|| g_positivity_suite(args.max_n, args.max_m.max(12))),
        Box::new(|| series_suite(args.samples, args.terms, args.prec)),
    ];
    let mut suites = Vec::new();
    let mut failed = Vec::new();
    for suite in runs {
        let s = suite();
        if !s.failures.is_empty() {
            failed.push(s.name);
        }
        suites.push(s.to_json());
    }
    let all_passed = failed.is_empty();
    Output::Json(Envelope {
        command: "verify".into(),
        inputs,
        result: json!({ "suites": suites, "all_passed": all_passed }),
        diagnostics: None,
        error: (!all_passed).then(|| format!("failing suites: {}", failed.join(", "))),
    })
}
