//! `resurgamma`: evaluations, sweeps and verification suites for the
//! large-parameter expansion of `Γ(-a, λa)`.

mod args;
mod output;

use std::process::ExitCode;

use clap::Parser;
use resurgamma::bounds::remainder_bounds;
use resurgamma::coeffs::{b_coeff_polynomial, coefficient_table};
use resurgamma::expansion::{optimal_truncation, partial_sum, true_remainder};
use resurgamma::hyper::hyper_expand;
use resurgamma::latecoeffs::table1;
use resurgamma::numerics::{cabs, pi, rational_to_float};
use resurgamma::oracle::incgamma_oracle;
use resurgamma::terminant::{smoothing_scale, stokes_smoothing, terminant_polar};
use resurgamma::verify::run_suite;
use resurgamma::{Complex, Error, Float, PrecisionContext};
use serde_json::json;

use args::{Cli, Command, Format};
use output::{Printer, Table};

/// Failure classes mapped to exit statuses.
enum Failure {
    Input(String),
    Verification(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let ctx = PrecisionContext::new(cli.precision)?;
    let printer = Printer::new(cli.precision);
    let bits = cli.precision;
    let (table, json) = match &cli.command {
        Command::Expand(p) => {
            let a = p.a.complex(bits)?;
            let lambda = p.lambda.value.clone();
            let lf = rational_to_float(&lambda, bits + 32);
            let n = match p.n {
                Some(n) => n,
                None => optimal_truncation(&a, &lf)?,
            };
            let r = partial_sum(&a, &lambda, n, &ctx)?;
            let mut t = Table::new(&["a_re", "a_im", "lambda", "N", "value_re", "value_im", "partial_sum_re", "partial_sum_im", "remainder_bound_abs", "regime_used"]);
            t.row(vec![
                printer.real(r.a.real()),
                printer.real(r.a.imag()),
                lambda.to_string(),
                n.to_string(),
                printer.real(r.value.real()),
                printer.real(r.value.imag()),
                printer.real(r.partial_sum.real()),
                printer.real(r.partial_sum.imag()),
                r.remainder_bound.as_ref().map(|b| printer.real(b)).unwrap_or_default(),
                r.regime_used.map(|g| g.to_string()).unwrap_or_default(),
            ]);
            (t, serde_json::to_value(&r).expect("serialisable"))
        }
        Command::Bound(p) => {
            let a = p.a.complex(bits)?;
            let lambda = &p.lambda.value;
            let lf = rational_to_float(lambda, bits + 32);
            let ns: Vec<u32> = match (p.n, p.n_max) {
                (Some(n), None) => vec![n],
                (None, Some(m)) => (2..=m).collect(),
                (None, None) => vec![optimal_truncation(&a, &lf)?.max(2)],
                (Some(_), Some(_)) => return Err(Failure::Input("give either --n or --n-max".into())),
            };
            let with_oracle = p.oracle;
            let mut t = Table::new(&["N", "regime", "applicable", "bound_abs", "kernel_factor", "true_remainder_abs"]);
            let mut out = Vec::new();
            for n in ns {
                let set = remainder_bounds(&a, &lf, n, &ctx)?;
                let actual = if with_oracle { Some(cabs(&true_remainder(&a, lambda, n, &ctx)?, bits)) } else { None };
                for rep in &set.reports {
                    t.row(vec![
                        n.to_string(),
                        rep.regime.to_string(),
                        rep.applicable.to_string(),
                        rep.bound_value.as_ref().map(|b| printer.real(b)).unwrap_or_default(),
                        rep.kernel_factor.as_ref().map(|b| printer.real(b)).unwrap_or_default(),
                        actual.as_ref().map(|b| printer.real(b)).unwrap_or_default(),
                    ]);
                }
                out.push(json!({"N": n, "bounds": set, "true_remainder_abs": actual.map(|x| printer.real(&x))}));
            }
            (t, json!(out))
        }
        Command::Coeffs(p) => {
            let (lo, hi) = match (p.n, p.n_max) {
                (Some(n), _) => (n, n),
                (None, Some(m)) => (0, m),
                (None, None) => unreachable!("clap requires one of them"),
            };
            match &p.lambda {
                None => {
                    let polys: Vec<_> = (lo..=hi).map(b_coeff_polynomial).collect();
                    let mut t = Table::new(&["n", "polynomial", "coefficients_ascending"]);
                    for q in &polys {
                        let cs: Vec<String> = q.coeffs.iter().map(|c| c.to_string()).collect();
                        t.row(vec![q.n.to_string(), q.to_string(), cs.join(" ")]);
                    }
                    let j: Vec<_> = polys.iter().map(|q| json!({"n": q.n, "polynomial": q.to_string(), "coefficients": q.to_json()["coeffs"]})).collect();
                    (t, if p.n.is_some() { j[0].clone() } else { json!(j) })
                }
                Some(l) => {
                    let values = coefficient_table(&l.value, hi)?;
                    let mut t = Table::new(&["n", "lambda", "b_n_exact", "b_n_decimal"]);
                    let mut j = Vec::new();
                    for (n, v) in values.iter().enumerate().skip(lo) {
                        let dec = printer.real(&rational_to_float(v, bits));
                        t.row(vec![n.to_string(), l.value.to_string(), v.to_string(), dec.clone()]);
                        j.push(json!({"n": n, "lambda": l.value.to_string(), "exact": v.to_string(), "decimal": dec}));
                    }
                    (t, if p.n.is_some() { j[0].clone() } else { json!(j) })
                }
            }
        }
        Command::Table1 => {
            let rows = table1(&ctx)?;
            let mut t = Table::new(&["lambda", "K", "quantity", "value", "bound_source"]);
            for r in &rows {
                for (q, v) in [("exact", &r.exact), ("approximation", &r.approximation), ("error", &r.error), ("bound", &r.bound)] {
                    let source = if q == "bound" { serde_json::to_value(r.bound_kind).expect("enum").as_str().unwrap_or_default().to_string() } else { String::new() };
                    t.row(vec![r.lambda.to_string(), r.k.to_string(), q.into(), v.clone(), source]);
                }
            }
            (t, serde_json::to_value(&rows).expect("serialisable"))
        }
        Command::Terminant(p) => {
            let pv = args::parse_float(&p.p, bits)?;
            let r = args::parse_float(&p.w_abs, bits)?;
            let phi = args::parse_float(&p.w_arg, bits)?;
            let t = terminant_polar(&pv, &r, &phi, &ctx)?;
            let mut tab = Table::new(&["p", "w_abs", "w_arg", "value_re", "value_im", "sector"]);
            tab.row(vec![
                printer.real(&t.p),
                printer.real(&r),
                printer.real(&t.phi),
                printer.real(t.value.real()),
                printer.real(t.value.imag()),
                format!("{:?}", t.sector).to_uppercase(),
            ]);
            (tab, serde_json::to_value(&t).expect("serialisable"))
        }
        Command::StokesSweep(p) => {
            let r = args::parse_float(&p.w_abs, bits)?;
            let pv = match &p.p {
                Some(s) => args::parse_float(s, bits)?,
                None => Float::with_val(bits, &r + 0.5f64),
            };
            if p.steps < 2 {
                return Err(Failure::Input("--steps must be at least 2".into()));
            }
            let mut tab = Table::new(&["phi_minus_pi", "terminant_re", "terminant_im", "smoothing_re", "smoothing_im", "abs_difference", "envelope"]);
            let mut j = Vec::new();
            for i in 0..p.steps {
                let off = -p.half_width + 2.0 * p.half_width * i as f64 / (p.steps - 1) as f64;
                let phi = Float::with_val(bits, pi(bits) + off);
                let t = terminant_polar(&pv, &r, &phi, &ctx)?;
                let s = stokes_smoothing(&r, &phi, &ctx)?;
                let d = cabs(&Complex::with_val(bits, &t.value - &s.value), bits);
                let env = smoothing_scale(&r, &phi, &ctx)?;
                let row = vec![
                    format!("{off:.6}"),
                    printer.real(t.value.real()),
                    printer.real(t.value.imag()),
                    printer.real(s.value.real()),
                    printer.real(s.value.imag()),
                    printer.short(&d),
                    printer.short(&env),
                ];
                j.push(json!({"phi_minus_pi": row[0], "terminant": [row[1], row[2]], "smoothing": [row[3], row[4]], "abs_difference": row[5], "envelope": row[6]}));
                tab.row(row);
            }
            (tab, json!(j))
        }
        Command::Hyper(p) => {
            let a = p.a.complex(bits)?;
            let lambda = &p.lambda.value;
            let n = match p.n {
                Some(n) => n,
                None => optimal_truncation(&a, &rational_to_float(lambda, bits + 32))?,
            };
            let h = hyper_expand(&a, lambda, n, p.k_terms, &ctx)?;
            let mut tab = Table::new(&["N", "K", "sum_minus_re", "sum_minus_im", "sum_plus_re", "sum_plus_im", "r_nk_bound", "r_n_true_abs", "r_nk_true_abs"]);
            tab.row(vec![
                n.to_string(),
                p.k_terms.to_string(),
                printer.real(h.terminant_sum_minus.real()),
                printer.real(h.terminant_sum_minus.imag()),
                printer.real(h.terminant_sum_plus.real()),
                printer.real(h.terminant_sum_plus.imag()),
                h.r_nk_bound.as_ref().map(|b| printer.short(b)).unwrap_or_default(),
                h.r_n_true.as_ref().map(|v| printer.short(&cabs(v, bits))).unwrap_or_default(),
                h.r_nk_true.as_ref().map(|v| printer.short(&cabs(v, bits))).unwrap_or_default(),
            ]);
            (tab, serde_json::to_value(&h).expect("serialisable"))
        }
        Command::Oracle(p) => {
            let a = p.a.complex(bits)?;
            let lf = rational_to_float(&p.lambda.value, bits + 32);
            let v = incgamma_oracle(&a, &lf, &ctx)?;
            let mut tab = Table::new(&["a_re", "a_im", "lambda", "incgamma_re", "incgamma_im", "est_rel_err", "levels"]);
            let row = vec![
                printer.real(a.real()),
                printer.real(a.imag()),
                p.lambda.value.to_string(),
                printer.real(v.value.real()),
                printer.real(v.value.imag()),
                printer.short(&v.integral.est_rel_err),
                v.integral.levels_used.to_string(),
            ];
            let j = json!({"a": [row[0], row[1]], "lambda": row[2], "value": [row[3], row[4]], "est_rel_err": row[5], "levels_used": v.integral.levels_used});
            tab.row(row);
            (tab, j)
        }
        Command::Verify(p) => {
            let reports = run_suite(p.suite, p.quick, &ctx)?;
            let mut tab = Table::new(&["suite", "checks", "violations", "min_margin", "status"]);
            for r in &reports {
                tab.row(vec![
                    r.suite.to_string(),
                    r.checks.to_string(),
                    r.violations.len().to_string(),
                    r.min_margin.map(|m| format!("{m:.6e}")).unwrap_or_default(),
                    if r.passed() { "PASS" } else { "FAIL" }.into(),
                ]);
            }
            let j = serde_json::to_value(&reports).expect("serialisable");
            emit(cli, &tab, &j)?;
            let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).flat_map(|r| r.violations.clone()).collect();
            if !failed.is_empty() {
                return Err(Failure::Verification(failed.join("; ")));
            }
            return Ok(());
        }
    };
    emit(cli, &table, &json)
}

fn emit(cli: &Cli, table: &Table, json: &serde_json::Value) -> Result<(), Failure> {
    let format = cli.format.unwrap_or(cli.command.default_format());
    let body = match format {
        Format::Csv => table.to_csv().map_err(|e| Failure::Io(e.to_string()))?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json).expect("serialisable");
            s.push('\n');
            s
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}
