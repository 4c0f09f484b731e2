//! Acceptance checks: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use resurgamma::bounds::{bound_m, remainder_bounds};
use resurgamma::coeffs::{b_coeff_polynomial, stirling_gammas};
use resurgamma::expansion::{optimal_truncation, remainder_integral, remainder_sequence, theorem4_truncated};
use resurgamma::hyper::{hyper_expand, remainder_nk_integral, theorem2_order_check};
use resurgamma::latecoeffs::{late_coeff_approx, optimal_k, LateBoundKind};
use resurgamma::numerics::{cabs, format_sci_truncated, from_polar, pi, rational_to_float};
use resurgamma::oracle::gammastar_oracle;
use resurgamma::phase::phase_data;
use resurgamma::terminant::{smoothing_scale, stokes_smoothing, terminant_polar};
use resurgamma::{Complex, Float, PrecisionContext, Rational, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

fn exact_coefficients() -> Result<Outcome> {
    let start = Instant::now();
    let expected: [&[i64]; 4] = [&[1], &[0, -1], &[0, -1, 2], &[0, -1, 8, -6]];
    let mut ok = true;
    for (n, want) in expected.iter().enumerate() {
        let p = b_coeff_polynomial(n);
        let want: Vec<Rational> = want.iter().map(|&c| Rational::from(c)).collect();
        ok &= p.coeffs == want;
    }
    let (fast, t) = within(Duration::from_secs(1), start);
    Ok(Outcome::new(ok && fast, format!("b_0..b_3 polynomials exact; {t}")))
}

/// Leading significant digits of `x`, up to `digits`, without the exponent.
fn digits_of(s: &str) -> (String, i64) {
    let (mant, exp) = s.split_once('e').unwrap();
    let neg = mant.starts_with('-');
    let d = mant.trim_start_matches('-').trim_start_matches("0.");
    (format!("{}{}", if neg { "-" } else { "" }, d), exp.parse().unwrap())
}

fn relative_gap(ours: &Float, printed: &str) -> f64 {
    let p = Float::with_val(ours.prec(), Float::parse(printed).unwrap());
    Float::with_val(64, Float::with_val(ours.prec(), ours - &p) / &p).abs().to_f64()
}

fn table1() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = PrecisionContext::new(512)?;
    // (λ, K, exact, approximation, error, bound, bound source)
    let printed = [
        (
            q(1, 100),
            57,
            "-0.320681358577665454823220737555930836965007363e90",
            "-0.320681358577665454823220737555930624925282126e90",
            "-0.212039725237e57",
            "0.23677013448560065229e65",
            LateBoundKind::Meijer,
        ),
        (
            q(2, 1),
            57,
            "0.732252465623483776580694573188048575042344276e184",
            "0.732252465623483776580694573188048575045373691e184",
            "-0.3029415e146",
            "0.63782498e147",
            LateBoundKind::TwoTerm,
        ),
        (
            q(5, 1),
            43,
            "0.186478888380183206402841100236655575383457561e222",
            "0.186478888380183206402841097953515994081833820e222",
            "0.2283139581301623741e196",
            "0.5373934537697861855e196",
            LateBoundKind::TwoTerm,
        ),
    ];
    let mut ok = true;
    let mut worst_err: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    for (lambda, k, exact, approx, err, bound, kind) in printed {
        let r = late_coeff_approx(100, &lambda, k, &ctx)?;
        let ex = r.exact.clone().unwrap();
        ok &= digits_of(&format_sci_truncated(&ex, 45)) == digits_of(exact);
        ok &= digits_of(&format_sci_truncated(&r.approx_value, 45)) == digits_of(approx);
        let e = r.error().unwrap();
        let ge = relative_gap(&e, err);
        worst_err = worst_err.max(ge);
        let b = match kind {
            LateBoundKind::Meijer => r.bound_13.clone().unwrap(),
            LateBoundKind::TwoTerm => r.bound_17.clone().unwrap(),
        };
        let gb = relative_gap(&r.absolute(&b), bound);
        worst_bound = worst_bound.max(gb);
    }
    ok &= worst_err <= 1e-6 && worst_bound <= 1e-8;
    let (fast, t) = within(Duration::from_secs(30), start);
    Ok(Outcome::new(
        ok && fast,
        format!("45-digit values match; error rel gap {worst_err:.2e} (≤1e-6); bound rel gap {worst_bound:.2e} (≤1e-8); {t}"),
    ))
}

struct Grid {
    violations: usize,
    checks: usize,
    min_ratio: f64,
    worst_realism: f64,
    realism_cases: usize,
}

fn bound_grid() -> Result<Grid> {
    let ctx = PrecisionContext::new(256)?;
    let mut g = Grid { violations: 0, checks: 0, min_ratio: f64::MAX, worst_realism: 0.0, realism_cases: 0 };
    for a in [5u32, 10, 20, 40] {
        let ac = Complex::with_val(256, (a, 0));
        for lambda in [q(1, 20), q(3, 10), q(1, 1), q(2, 1), q(5, 1)] {
            let lf = rational_to_float(&lambda, 256);
            let n_opt = optimal_truncation(&ac, &lf)?;
            let n_max = (3 * n_opt).div_ceil(2);
            let seq = remainder_sequence(&ac, &lambda, n_max, &ctx)?;
            let omega = phase_data(&lf, &ctx)?.omega.to_f64();
            for n in 2..=n_max {
                let set = remainder_bounds(&ac, &lf, n, &ctx)?;
                let actual = cabs(seq.get(n).unwrap(), seq.working_bits);
                for rep in set.reports.iter().filter(|r| r.applicable) {
                    let b = rep.bound_value.as_ref().unwrap();
                    g.checks += 1;
                    if *b < actual {
                        g.violations += 1;
                    }
                    g.min_ratio = g.min_ratio.min(Float::with_val(64, b / &actual).to_f64());
                }
                let realism_lambda = lambda == 1 || lambda == 2 || lambda == 5;
                if n == n_opt && realism_lambda && ((n as f64 + 0.5) * omega).sin().abs() >= 0.3 {
                    if let Some(best) = &set.best {
                        g.realism_cases += 1;
                        g.worst_realism = g.worst_realism.max(Float::with_val(64, best / &actual).to_f64());
                    }
                }
            }
        }
    }
    Ok(g)
}

fn remainder_soundness(g: &Grid, elapsed: Duration) -> Outcome {
    let fast = elapsed < Duration::from_secs(300);
    Outcome::new(
        g.violations == 0 && fast,
        format!(
            "{} checks, {} violations, min bound/|R_N| = {:.4}; {:.1}s (limit 300s)",
            g.checks,
            g.violations,
            g.min_ratio,
            elapsed.as_secs_f64()
        ),
    )
}

fn realism(g: &Grid) -> Outcome {
    Outcome::new(
        g.realism_cases > 0 && g.worst_realism <= 10.0,
        format!("{} cases with |sin((N+1/2)ω)| ≥ 0.3; worst bound/|R_N| = {:.3} (≤10)", g.realism_cases, g.worst_realism),
    )
}

fn appendix() -> Result<Outcome> {
    let ctx = PrecisionContext::new(128)?;
    let wp = 160;
    let gammas = stirling_gammas(6);
    let (mut checks, mut violations, mut min_ratio) = (0, 0, f64::MAX);
    for t in [2u32, 5, 20] {
        for (num, den) in [(1u32, 6u32), (1, 4), (1, 2), (3, 4)] {
            let theta = Float::with_val(wp, pi(wp) * num) / den;
            let z = from_polar(&Float::with_val(wp, t), &theta, wp);
            let g = gammastar_oracle(&z, &PrecisionContext::new(wp)?)?;
            for n in [2u32, 3, 5] {
                let mut m = g.clone();
                let mut pow = Complex::with_val(wp, (1, 0));
                let inv = Complex::with_val(wp, z.recip_ref());
                for (j, c) in gammas.iter().take(n as usize).enumerate() {
                    let term = Complex::with_val(wp, &pow * rational_to_float(c, wp));
                    if j % 2 == 0 {
                        m -= term;
                    } else {
                        m += term;
                    }
                    pow *= &inv;
                }
                let actual = cabs(&m, wp);
                let b = bound_m(&z, n, &ctx)?;
                checks += 1;
                if b < actual {
                    violations += 1;
                }
                min_ratio = min_ratio.min(Float::with_val(64, &b / &actual).to_f64());
            }
        }
    }
    Ok(Outcome::new(violations == 0, format!("{checks} checks, {violations} violations, min bound/|M_N| = {min_ratio:.4}")))
}

fn late_bounds() -> Result<Outcome> {
    let ctx = PrecisionContext::new(256)?;
    let (mut checks, mut violations, mut min_ratio) = (0, 0, f64::MAX);
    for n in [20u32, 50, 100] {
        for lambda in [q(1, 100), q(1, 1), q(2, 1), q(5, 1)] {
            let mut ks = vec![2, 5, optimal_k(n, &lambda)?];
            ks.sort_unstable();
            ks.dedup();
            for k in ks {
                let r = late_coeff_approx(n, &lambda, k, &ctx)?;
                let err = Float::with_val(256, r.error().unwrap().abs_ref());
                let b = r.absolute(&r.best_bound().unwrap());
                checks += 1;
                if b < err {
                    violations += 1;
                }
                if !err.is_zero() {
                    min_ratio = min_ratio.min(Float::with_val(64, &b / &err).to_f64());
                }
            }
        }
    }
    Ok(Outcome::new(violations == 0, format!("{checks} checks, {violations} violations, min bound/error = {min_ratio:.4}")))
}

fn hyperasymptotic() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = PrecisionContext::new(128)?;
    let (mut identity_fail, mut bound_fail, mut gain_fail, mut checks) = (0, 0, 0, 0);
    let mut worst_identity: f64 = 0.0;
    for a in [10u32, 30] {
        let ac = Complex::with_val(128, (a, 0));
        for lambda in [q(1, 1), q(2, 1)] {
            let n = optimal_truncation(&ac, &rational_to_float(&lambda, 64))?;
            let mut best: Option<Float> = None;
            let mut r_n = Float::new(128);
            for k in [2u32, 3, 5] {
                let h = hyper_expand(&ac, &lambda, n, k, &ctx)?;
                let wp = h.working_bits;
                let direct = remainder_nk_integral(&ac, &lambda, n, k, &ctx.at_bits(wp))?;
                let recon = Complex::with_val(wp, &h.terminant_sum_minus + &h.terminant_sum_plus) + &direct;
                let rn = h.r_n_true.clone().unwrap();
                let diff = cabs(&Complex::with_val(wp, &rn - &recon), wp);
                let tol = Float::with_val(wp, h.oracle_tolerance.as_ref().unwrap() * 10u32);
                worst_identity = worst_identity.max(Float::with_val(64, &diff / &tol).to_f64());
                if diff > tol {
                    identity_fail += 1;
                }
                let rnk = cabs(h.r_nk_true.as_ref().unwrap(), wp);
                if *h.r_nk_bound.as_ref().unwrap() < rnk {
                    bound_fail += 1;
                }
                checks += 1;
                best = Some(match best {
                    Some(b) if b <= rnk => b,
                    _ => rnk,
                });
                r_n = cabs(&rn, wp);
            }
            if best.unwrap() > Float::with_val(128, &r_n / a) {
                gain_fail += 1;
            }
        }
    }
    let (fast, t) = within(Duration::from_secs(300), start);
    Ok(Outcome::new(
        identity_fail + bound_fail + gain_fail == 0 && fast,
        format!(
            "{checks} (a, λ, K) cases: identity failures {identity_fail} (worst diff/(10·tol) = {worst_identity:.2e}), bound failures {bound_fail}, gain failures {gain_fail}; {t}"
        ),
    ))
}

fn order_regression() -> Result<Outcome> {
    let ctx = PrecisionContext::new(128)?;
    let ladders = [(q(1, 1), 2u32, 0i32), (q(2, 1), 3, 1)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (lambda, k, rho) in ladders {
        let r = theorem2_order_check(&[10.0, 20.0, 40.0], &lambda, k, rho, &ctx)?;
        ok &= r.drift <= 0.5;
        parts.push(format!("λ={lambda} K={k} ρ={rho}: drift {:+.3}", r.drift));
    }
    Ok(Outcome::new(ok, format!("{} (≤ 0.5)", parts.join("; "))))
}

fn stokes() -> Result<Outcome> {
    let ctx = PrecisionContext::new(128)?;
    let wp = 128;
    let mags = [25u32, 100, 400];
    let mut scaled = vec![vec![0f64; 21]; mags.len()];
    let mut worst: f64 = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        let r = Float::with_val(wp, m);
        let p = Float::with_val(wp, &r + 0.5f64);
        for (j, cell) in scaled[i].iter_mut().enumerate() {
            let phi = Float::with_val(wp, pi(wp) - 0.5f64) + 0.05f64 * j as f64;
            let t = terminant_polar(&p, &r, &phi, &ctx)?;
            let s = stokes_smoothing(&r, &phi, &ctx)?;
            let err = cabs(&Complex::with_val(wp, &t.value - &s.value), wp);
            let env = smoothing_scale(&r, &phi, &ctx)?;
            *cell = Float::with_val(64, &err / &env).to_f64();
            worst = worst.max(*cell);
        }
    }
    let mut ratio_lo = f64::MAX;
    let mut ratio_hi: f64 = 0.0;
    for i in 1..mags.len() {
        for j in 0..21 {
            let ratio = scaled[i][j] / scaled[i - 1][j];
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
    }
    let ok = worst <= 1.0 && ratio_lo >= 0.5 && ratio_hi <= 2.0;
    Ok(Outcome::new(ok, format!("max error/envelope = {worst:.4} (≤1.0); rung ratios of scaled error in [{ratio_lo:.3}, {ratio_hi:.3}] (within [0.5, 2])")))
}

fn small_lambda_series() -> Result<Outcome> {
    let ctx = PrecisionContext::new(128)?;
    let a = Complex::with_val(128, (15, 0));
    let lambda = q(1, 10);
    let reference = remainder_integral(&a, &lambda, 3, &ctx)?;
    let (sum, _) = theorem4_truncated(&a, &lambda, 3, 3, &ctx)?;
    let rel = Float::with_val(64, cabs(&Complex::with_val(128, &sum - &reference), 128) / cabs(&reference, 128)).to_f64();
    Ok(Outcome::new(rel <= 1e-6, format!("k ≤ 3 truncation relative deviation {rel:.3e} (≤1e-6)")))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: u32, name: &str, r: Result<Outcome>| {
        let (passed, detail) = match r {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!("criterion {id:>2} [{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    };
    report(1, "exact coefficients", exact_coefficients());
    report(2, "late-coefficient reference table", table1());
    let start = Instant::now();
    let grid = bound_grid();
    let elapsed = start.elapsed();
    match grid {
        Ok(g) => {
            report(3, "remainder-bound soundness", Ok(remainder_soundness(&g, elapsed)));
            report(4, "remainder-bound realism", Ok(realism(&g)));
        }
        Err(e) => {
            report(3, "remainder-bound soundness", Err(e.clone()));
            report(4, "remainder-bound realism", Err(e));
        }
    }
    report(5, "scaled-gamma remainder bound", appendix());
    report(6, "late-coefficient bound soundness", late_bounds());
    report(7, "terminant re-expansion identity and bound", hyperasymptotic());
    report(8, "re-expanded remainder order regression", order_regression());
    report(9, "Stokes smoothing", stokes());
    report(10, "small-λ series representation (truncated)", small_lambda_series());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
