//! `stirling-xi` command-line front end.
//!
//! Every command writes one JSON envelope
//! `{command, inputs, result, diagnostics, error}` to standard output unless
//! a CSV or text format is selected. Numbers are always encoded as strings.

mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use stirling_xi::exact_core::StirlingTriangle;
use stirling_xi::g_polynomials::{g_expand_shifted, g_poly, positivity_check};
use stirling_xi::gamma_series::{upper_incomplete_gamma, SeriesEvaluation, SeriesOptions};
use stirling_xi::newton_table::build_a_table;
use stirling_xi::numeric::{format_real, parse_complex, parse_real, MAX_PRECISION, MIN_PRECISION};
use stirling_xi::operator_calculus::{build_certificate, verify_certificate};
use stirling_xi::oracle::{closed_form_integer_s, log_derivative_check, quad_integral};
use stirling_xi::riemann_xi::{xi_oracle, xi_series};
use stirling_xi::Error;

#[derive(Parser, Debug)]
#[command(name = "stirling-xi", version, about = "Stirling-number series for incomplete gamma and xi")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rows of the unsigned Stirling triangle of the first kind.
    Stirling {
        #[arg(long)]
        rows: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Nonzero entries of the Newton coefficient table A_{m,i}^k.
    Atable {
        #[arg(long = "max-m")]
        max_m: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Positivity certificate for the (m, k, j) alternating sum.
    Certificate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value_t = CertificateFormat::Json)]
        format: CertificateFormat,
    },
    /// Term polynomial g_n in the Stirling basis or expanded at p = 1 + x.
    Gpoly {
        #[arg(long)]
        n: usize,
        /// Emit the coefficients of (1+x)^n g_n(s, 1+x).
        #[arg(long)]
        expand: bool,
        #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
        format: JsonFormat,
    },
    /// Upper incomplete gamma Γ(s, z) for z ≥ 1.
    Gamma(GammaArgs),
    /// Riemann xi function.
    Xi(XiArgs),
    /// Reference values.
    Oracle {
        #[command(subcommand)]
        kind: OracleCommand,
    },
    /// Cross-module consistency suites.
    Verify(verify::VerifyArgs),
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[arg(long, value_parser = complex_literal, allow_hyphen_values = true)]
    s: String,
    #[arg(long, value_parser = real_literal, allow_hyphen_values = true)]
    z: String,
    #[arg(long, default_value_t = 4096)]
    terms: u64,
    #[arg(long, default_value_t = 128, value_parser = precision)]
    prec: u32,
    #[arg(long = "target-rel-err", value_parser = real_literal)]
    target_rel_err: Option<String>,
    #[arg(long = "no-accel")]
    no_accel: bool,
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    format: JsonFormat,
}

#[derive(Args, Debug)]
struct XiArgs {
    #[arg(long, value_parser = complex_literal, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 4096)]
    terms: u64,
    #[arg(long, default_value_t = 128, value_parser = precision)]
    prec: u32,
    /// Evaluate by quadrature instead of the series.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    format: JsonFormat,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// ∫₁^∞ e^{-up} u^s du by quadrature.
    Quad {
        #[arg(long, value_parser = complex_literal, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_parser = real_literal, allow_hyphen_values = true)]
        p: String,
        #[arg(long, default_value_t = 128, value_parser = precision)]
        prec: u32,
    },
    /// The same integral at integer s = k in closed form.
    ClosedForm {
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = real_literal, allow_hyphen_values = true)]
        p: String,
        #[arg(long, default_value_t = 128, value_parser = precision)]
        prec: u32,
    },
    /// Finite-difference check of the n-th derivative of (−log(1−t))^s.
    LogDerivative {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = complex_literal, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_parser = real_literal)]
        t: String,
        #[arg(long, default_value_t = 128, value_parser = precision)]
        prec: u32,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CertificateFormat {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum JsonFormat {
    Json,
}

fn precision(arg: &str) -> Result<u32, String> {
    let bits: u32 = arg.parse().map_err(|_| format!("not an integer: {arg}"))?;
    if (MIN_PRECISION..=MAX_PRECISION).contains(&bits) {
        Ok(bits)
    } else {
        Err(format!("precision must lie in [{MIN_PRECISION}, {MAX_PRECISION}] bits"))
    }
}

fn complex_literal(arg: &str) -> Result<String, String> {
    parse_complex(arg, 64).map(|_| arg.to_string()).map_err(|e| e.to_string())
}

fn real_literal(arg: &str) -> Result<String, String> {
    parse_real(arg, 64).map(|_| arg.to_string()).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Envelope {
    command: String,
    inputs: Value,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// What a command produced: an envelope or preformatted text.
enum Output {
    Json(Envelope),
    Text(String),
}

pub(crate) fn complex_json(z: &Complex) -> Value {
    json!({ "re": format_real(z.real()), "im": format_real(z.imag()) })
}

fn series_json(eval: &SeriesEvaluation) -> (Value, Value) {
    let result = json!({
        "value": complex_json(&eval.value),
        "raw_value": complex_json(&eval.raw_value),
        "terms_used": eval.terms_used.to_string(),
        "last_term_mag": format_real(&eval.last_term_mag),
        "tail_estimate": format_real(&eval.tail_estimate),
        "precision_bits": eval.precision_bits.to_string(),
        "converged": eval.converged,
    });
    let diagnostics = json!({
        "terms_used": eval.terms_used.to_string(),
        "tail_estimate": format_real(&eval.tail_estimate),
        "precision_bits": eval.precision_bits.to_string(),
        "working_precision": eval.working_precision.to_string(),
    });
    (result, diagnostics)
}

fn envelope(command: &str, inputs: Value, result: Value, diagnostics: Option<Value>) -> Output {
    Output::Json(Envelope { command: command.to_string(), inputs, result, diagnostics, error: None })
}

fn run(command: Command) -> Result<Output, (String, Value, Error)> {
    match command {
        Command::Stirling { rows, format } => {
            let inputs = json!({ "rows": rows.to_string() });
            let triangle = StirlingTriangle::global();
            let table: Vec<Vec<String>> =
                (0..rows).map(|n| triangle.row(n).iter().map(|c| c.to_string()).collect()).collect();
            Ok(match format {
                TableFormat::Csv => Output::Text(table.iter().map(|r| r.join(",") + "\n").collect()),
                TableFormat::Json => envelope("stirling", inputs, json!({ "rows": table }), None),
            })
        }
        Command::Atable { max_m, format } => {
            let records = build_a_table(max_m).nonzero_records();
            Ok(match format {
                TableFormat::Csv => {
                    let mut out = String::from("m,i,k,value\n");
                    for r in &records {
                        out += &format!("{},{},{},{}\n", r.m, r.i, r.k, r.value);
                    }
                    Output::Text(out)
                }
                TableFormat::Json => {
                    let list: Vec<Value> = records
                        .iter()
                        .map(|r| {
                            json!({
                                "m": r.m.to_string(),
                                "i": r.i.to_string(),
                                "k": r.k.to_string(),
                                "value": r.value.to_string(),
                            })
                        })
                        .collect();
                    envelope("atable", json!({ "max_m": max_m.to_string() }), json!({ "records": list }), None)
                }
            })
        }
        Command::Certificate { m, k, j, format } => {
            let inputs = json!({ "m": m.to_string(), "k": k.to_string(), "j": j.to_string() });
            let cert = build_certificate(m, k, j).map_err(|e| ("certificate".into(), inputs.clone(), e))?;
            let verdict = verify_certificate(&cert);
            Ok(match format {
                CertificateFormat::Text => {
                    let mut out = String::new();
                    for (c, f) in &cert.terms {
                        out += &format!("{c} · t^{} (1−t)^{} @ level {}\n", f.t_power, f.one_minus_t_power, f.level);
                    }
                    out += &format!("verdict: {verdict}\n");
                    Output::Text(out)
                }
                CertificateFormat::Json => {
                    let terms: Vec<Value> = cert
                        .terms
                        .iter()
                        .map(|(c, f)| {
                            json!({
                                "coeff": c.to_string(),
                                "k": f.level.to_string(),
                                "M": f.t_power.to_string(),
                                "N": f.one_minus_t_power.to_string(),
                            })
                        })
                        .collect();
                    let result = json!({
                        "terms": terms,
                        "value_at_one": cert.value_at_one().to_string(),
                        "verdict": verdict.is_valid(),
                        "verdict_detail": verdict.to_string(),
                    });
                    envelope("certificate", inputs, result, None)
                }
            })
        }
        Command::Gpoly { n, expand, format: JsonFormat::Json } => {
            let inputs = json!({ "n": n.to_string(), "expand": expand });
            let fail = |e| ("gpoly".to_string(), inputs.clone(), e);
            let result = if expand {
                let poly = g_expand_shifted(n).map_err(fail)?;
                let triples: Vec<Value> = poly
                    .iter()
                    .map(|(&(a, b), c)| {
                        json!({ "s_power": a.to_string(), "x_power": b.to_string(), "coeff": c.to_string() })
                    })
                    .collect();
                json!({ "coefficients": triples, "all_positive": positivity_check(n).map_err(fail)? })
            } else {
                let poly = g_poly(n).map_err(fail)?;
                let basis: Vec<Value> = poly
                    .basis_coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| json!({ "i": (i + 1).to_string(), "coeff": c.to_string() }))
                    .collect();
                json!({ "basis": basis })
            };
            Ok(envelope("gpoly", inputs, result, None))
        }
        Command::Gamma(args) => {
            let inputs = json!({
                "s": args.s,
                "z": args.z,
                "terms": args.terms.to_string(),
                "prec": args.prec.to_string(),
                "target_rel_err": args.target_rel_err,
                "accelerate": !args.no_accel,
            });
            let fail = |e| ("gamma".to_string(), inputs.clone(), e);
            let s = parse_complex(&args.s, args.prec).map_err(fail)?;
            let z = parse_real(&args.z, args.prec).map_err(fail)?;
            let target_rel_err = args.target_rel_err.as_deref().map(|t| parse_real(t, 64)).transpose().map_err(fail)?;
            let opts = SeriesOptions { max_terms: args.terms, target_rel_err, accelerate: !args.no_accel, prec: args.prec };
            let eval = upper_incomplete_gamma(&s, &z, &opts).map_err(fail)?;
            let (result, diagnostics) = series_json(&eval);
            Ok(envelope("gamma", inputs, result, Some(diagnostics)))
        }
        Command::Xi(args) => {
            let inputs = json!({
                "s": args.s,
                "terms": args.terms.to_string(),
                "prec": args.prec.to_string(),
                "oracle": args.oracle,
            });
            let fail = |e| ("xi".to_string(), inputs.clone(), e);
            let s = parse_complex(&args.s, args.prec).map_err(fail)?;
            if args.oracle {
                let value = xi_oracle(&s, args.prec).map_err(fail)?;
                let diagnostics = json!({ "precision_bits": args.prec.to_string() });
                Ok(envelope("xi", inputs, json!({ "value": complex_json(&value) }), Some(diagnostics)))
            } else {
                let eval = xi_series(&s, args.terms, args.prec).map_err(fail)?;
                let diagnostics = json!({
                    "terms_used": eval.terms_used.to_string(),
                    "tail_estimate": format_real(&eval.tail_estimate),
                    "precision_bits": eval.precision_bits.to_string(),
                    "working_precision": eval.working_precision.to_string(),
                });
                Ok(envelope("xi", inputs, json!({ "value": complex_json(&eval.value) }), Some(diagnostics)))
            }
        }
        Command::Oracle { kind } => run_oracle(kind),
        Command::Verify(args) => Ok(verify::run(&args)),
    }
}

fn run_oracle(kind: OracleCommand) -> Result<Output, (String, Value, Error)> {
    match kind {
        OracleCommand::Quad { s, p, prec } => {
            let inputs = json!({ "s": s, "p": p, "prec": prec.to_string() });
            let fail = |e| ("oracle quad".to_string(), inputs.clone(), e);
            let s = parse_complex(&s, prec).map_err(fail)?;
            let p = parse_real(&p, prec).map_err(fail)?;
            let value = quad_integral(&s, &p, prec).map_err(fail)?;
            Ok(envelope("oracle quad", inputs, json!({ "value": complex_json(&value) }), None))
        }
        OracleCommand::ClosedForm { k, p, prec } => {
            let inputs = json!({ "k": k.to_string(), "p": p, "prec": prec.to_string() });
            let fail = |e| ("oracle closed-form".to_string(), inputs.clone(), e);
            let p = parse_real(&p, prec).map_err(fail)?;
            let value = closed_form_integer_s(k, &p, prec).map_err(fail)?;
            Ok(envelope("oracle closed-form", inputs, json!({ "value": format_real(&value) }), None))
        }
        OracleCommand::LogDerivative { n, s, t, prec } => {
            let inputs = json!({ "n": n.to_string(), "s": s, "t": t, "prec": prec.to_string() });
            let fail = |e| ("oracle log-derivative".to_string(), inputs.clone(), e);
            let s = parse_complex(&s, prec).map_err(fail)?;
            let t = parse_real(&t, prec).map_err(fail)?;
            let check = log_derivative_check(n, &s, &t, prec).map_err(fail)?;
            let result = json!({
                "difference": format_real(&check.difference),
                "tolerance": format_real(&check.tolerance),
                "rhs": complex_json(&check.rhs),
                "step": format_real(&check.step),
                "passes": check.passes(),
            });
            Ok(envelope("oracle log-derivative", inputs, result, None))
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Stirling { .. } => "stirling",
        Command::Atable { .. } => "atable",
        Command::Certificate { .. } => "certificate",
        Command::Gpoly { .. } => "gpoly",
        Command::Gamma(_) => "gamma",
        Command::Xi(_) => "xi",
        Command::Oracle { .. } => "oracle",
        Command::Verify(_) => "verify",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let (output, failed) = match run(cli.command) {
        Ok(Output::Json(env)) => {
            let failed = env.error.is_some();
            (serde_json::to_string_pretty(&env).expect("envelope serializes") + "\n", failed)
        }
        Ok(Output::Text(text)) => (text, false),
        Err((command, inputs, err)) => {
            eprintln!("stirling-xi {name}: {err}");
            let env = Envelope {
                command,
                inputs,
                result: Value::Null,
                diagnostics: None,
                error: Some(err.to_string()),
            };
            (serde_json::to_string_pretty(&env).expect("envelope serializes") + "\n", true)
        }
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(output.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(1);
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use rug::Float;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn literal_validators() {
        assert!(complex_literal("1.5-2i").is_ok());
        assert!(complex_literal("2i").is_err());
        assert!(real_literal("1e-3").is_ok());
        assert!(real_literal("x").is_err());
        assert!(precision("63").is_err());
        assert!(precision("16385").is_err());
        assert_eq!(precision("256"), Ok(256));
    }

    #[test]
    fn complex_json_uses_strings() {
        let z = Complex::with_val(64, (Float::with_val(64, 0.5), 0));
        assert_eq!(complex_json(&z)["im"], "0");
        assert!(complex_json(&z)["re"].as_str().unwrap().starts_with("5.000"));
    }
}
