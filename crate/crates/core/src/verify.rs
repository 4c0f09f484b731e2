//! Soundness suites: every certified inequality checked against the
//! quadrature oracles over a parameter grid. `quick` grids are subsets of the
//! full ones.

use std::fmt;
use std::str::FromStr;

use rug::{Complex, Float, Rational};
use serde::Serialize;

use crate::bounds::{bound_m, remainder_bounds};
use crate::coeffs::{b_coeff_polynomial, coefficient_table, stirling_gammas};
use crate::error::{Error, Result};
use crate::expansion::{optimal_truncation, remainder_sequence};
use crate::hyper::{hyper_expand, remainder_nk_integral};
use crate::latecoeffs::{late_coeff_approx, optimal_k};
use crate::numerics::{cabs, from_polar, pi, rational_to_float, PrecisionContext};
use crate::oracle::{b_coeff_oracle, gammastar_oracle};
use crate::terminant::{smoothing_scale, stokes_smoothing, terminant_polar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Coeffs,
    Bounds,
    Appendix,
    Late,
    Hyper,
    Stokes,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Coeffs, Suite::Bounds, Suite::Appendix, Suite::Late, Suite::Hyper, Suite::Stokes];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Coeffs => "coeffs",
            Suite::Bounds => "bounds",
            Suite::Appendix => "appendix",
            Suite::Late => "late",
            Suite::Hyper => "hyper",
            Suite::Stokes => "stokes",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite '{s}'")))
    }
}

/// Outcome of one suite: how many inequalities were checked, which failed,
/// and the tightest margin seen (`bound / actual`, or `tolerance / error`).
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub violations: Vec<String>,
    pub min_margin: Option<f64>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self { suite, checks: 0, violations: Vec::new(), min_margin: None }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records `bound >= actual`.
    fn check(&mut self, label: impl FnOnce() -> String, bound: &Float, actual: &Float) {
        self.checks += 1;
        if !actual.is_zero() {
            let m = Float::with_val(64, bound / actual).to_f64();
            self.min_margin = Some(self.min_margin.map_or(m, |x| x.min(m)));
        }
        if bound < actual {
            self.violations.push(format!("{}: bound {} < {}", label(), bound.to_f64(), actual.to_f64()));
        }
    }

    fn fail(&mut self, label: String) {
        self.checks += 1;
        self.violations.push(label);
    }
}

pub fn run_suite(suite: Suite, quick: bool, ctx: &PrecisionContext) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::All => Suite::ALL.into_iter().map(|s| run_one(s, quick, ctx)).collect(),
        s => Ok(vec![run_one(s, quick, ctx)?]),
    }
}

fn run_one(suite: Suite, quick: bool, ctx: &PrecisionContext) -> Result<SuiteReport> {
    match suite {
        Suite::Coeffs => coeffs_suite(quick, ctx),
        Suite::Bounds => bounds_suite(quick, ctx),
        Suite::Appendix => appendix_suite(ctx),
        Suite::Late => late_suite(quick, ctx),
        Suite::Hyper => hyper_suite(quick, ctx),
        Suite::Stokes => stokes_suite(quick, ctx),
        Suite::All => unreachable!("expanded by run_suite"),
    }
}

/// Exact coefficients against the contour-integral oracle.
fn coeffs_suite(quick: bool, ctx: &PrecisionContext) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Coeffs);
    let n_max = if quick { 8 } else { 16 };
    for lambda in [Rational::from((1, 2)), Rational::from(1), Rational::from(3)] {
        let table = coefficient_table(&lambda, n_max)?;
        let lf = rational_to_float(&lambda, ctx.bits());
        for (n, exact) in table.iter().enumerate() {
            let poly = b_coeff_polynomial(n).eval(&lambda);
            if poly != *exact {
                r.fail(format!("n = {n}, λ = {lambda}: polynomial and recurrence disagree"));
            }
            let oracle = b_coeff_oracle(n as u32, &lf, None, ctx)?;
            let e = rational_to_float(exact, ctx.bits());
            let err = cabs(&Complex::with_val(ctx.bits(), &oracle.value - &e), ctx.bits());
            let tol = Float::with_val(ctx.bits(), e.abs_ref()).max(&Float::with_val(ctx.bits(), 1)) * ctx.quad_rel_tol() * 1024u32;
            r.check(|| format!("n = {n}, λ = {lambda} oracle agreement"), &tol, &err);
        }
    }
    Ok(r)
}

/// Remainder bounds against oracle remainders, `N = 2..⌈1.5 N_opt⌉`.
fn bounds_suite(quick: bool, ctx: &PrecisionContext) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Bounds);
    let a_grid: &[u32] = if quick { &[5, 10] } else { &[5, 10, 20, 40] };
    let l_grid: Vec<Rational> = if quick {
        vec![Rational::from((3, 10)), Rational::from(2)]
    } else {
        vec![Rational::from((1, 20)), Rational::from((3, 10)), Rational::from(1), Rational::from(2), Rational::from(5)]
    };
    for &a in a_grid {
        let ac = Complex::with_val(ctx.bits(), (a, 0));
        for lambda in &l_grid {
            let lf = rational_to_float(lambda, ctx.bits());
            let n_opt = optimal_truncation(&ac, &lf)?;
            let n_max = (3 * n_opt).div_ceil(2).max(2);
            let seq = remainder_sequence(&ac, lambda, n_max, ctx)?;
            for n in 2..=n_max {
                let set = remainder_bounds(&ac, &lf, n, ctx)?;
                let actual = cabs(seq.get(n).expect("in range"), seq.working_bits);
                for rep in set.reports.iter().filter(|x| x.applicable) {
                    let b = rep.bound_value.as_ref().expect("applicable bound has a value");
                    r.check(|| format!("a = {a}, λ = {lambda}, N = {n}, {}", rep.regime), b, &actual);
                }
            }
        }
    }
    Ok(r)
}

/// The scaled-gamma remainder bound against `Γ*` from its definition.
fn appendix_suite(ctx: &PrecisionContext) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Appendix);
    let wp = ctx.bits();
    let gammas = stirling_gammas(8);
    for t in [2u32, 5, 20] {
        for frac in [(1, 6), (1, 4), (1, 2), (3, 4)] {
            let theta = pi(wp) * frac.0 / frac.1;
            let z = from_polar(&Float::with_val(wp, t), &theta, wp);
            let g = gammastar_oracle(&z, &ctx.widened(32))?;
            for n in [2u32, 3, 5] {
                let mut m = Complex::with_val(wp + 32, &g);
                let z_inv = Complex::with_val(wp + 32, z.recip_ref());
                let mut pow = Complex::with_val(wp + 32, (1, 0));
                for (j, c) in gammas.iter().take(n as usize).enumerate() {
                    let term = Complex::with_val(wp + 32, &pow * rational_to_float(c, wp + 32));
                    if j % 2 == 0 {
                        m -= term;
                    } else {
                        m += term;
                    }
                    pow *= &z_inv;
                }
                let actual = cabs(&m, wp);
                let b = bound_m(&z, n, ctx)?;
                r.check(|| format!("t = {t}, θ = {}π/{}, N = {n}", frac.0, frac.1), &b, &actual);
            }
        }
    }
    Ok(r)
}

/// Late-coefficient error against the smaller applicable bound.
fn late_suite(quick: bool, ctx: &PrecisionContext) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Late);
    let n_grid: &[u32] = if quick { &[20, 50] } else { &[20, 50, 100] };
    for &n in n_grid {
        for lambda in [Rational::from((1, 100)), Rational::from(1), Rational::from(2), Rational::from(5)] {
            let mut ks = vec![2u32, 5, optimal_k(n, &lambda)?];
            ks.dedup();
            for k in ks {
                let approx = late_coeff_approx(n, &lambda, k, ctx)?;
                let err = Float::with_val(ctx.bits(), approx.error().expect("exact value computed").abs_ref());
                match approx.best_bound() {
                    Some(b) => {
                        let b = approx.absolute(&b);
                        r.check(|| format!("n = {n}, λ = {lambda}, K = {k}"), &b, &err);
                    }
                    None => r.fail(format!("n = {n}, λ = {lambda}, K = {k}: no bound available")),
                }
            }
        }
    }
    Ok(r)
}

/// Terminant re-expansion: the identity against an independent integral for
/// the re-expanded remainder, the bound, and the gain over the plain remainder.
fn hyper_suite(quick: bool, ctx: &PrecisionContext) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Hyper);
    let a_grid: &[u32] = if quick { &[10] } else { &[10, 30] };
    let k_grid: &[u32] = if quick { &[2, 3] } else { &[2, 3, 5] };
    for &a in a_grid {
        let ac = Complex::with_val(ctx.bits(), (a, 0));
        for lambda in [Rational::from(1), Rational::from(2)] {
            let n = optimal_truncation(&ac, &rational_to_float(&lambda, 64))?;
            let mut best: Option<Float> = None;
            let mut r_n = Float::new(ctx.bits());
            for &k in k_grid {
                let h = hyper_expand(&ac, &lambda, n, k, ctx)?;
                let wp = h.working_bits;
                let direct = remainder_nk_integral(&ac, &lambda, n, k, &ctx.at_bits(wp))?;
                let recon = Complex::with_val(wp, &h.terminant_sum_minus + &h.terminant_sum_plus) + &direct;
                let rn = h.r_n_true.as_ref().expect("real a has an oracle");
                let diff = cabs(&Complex::with_val(wp, rn - &recon), wp);
                let tol = Float::with_val(wp, h.oracle_tolerance.as_ref().expect("oracle tolerance") * 10u32);
                r.check(|| format!("a = {a}, λ = {lambda}, K = {k} identity"), &tol, &diff);
                let rnk = cabs(h.r_nk_true.as_ref().expect("oracle"), wp);
                r.check(|| format!("a = {a}, λ = {lambda}, K = {k} bound"), h.r_nk_bound.as_ref().expect("bound"), &rnk);
                best = Some(match best {
                    Some(b) if b <= rnk => b,
                    _ => rnk,
                });
                r_n = cabs(rn, wp);
            }
            let target = Float::with_val(ctx.bits(), &r_n / a);
            r.check(|| format!("a = {a}, λ = {lambda} gain"), &target, &best.expect("non-empty K grid"));
        }
    }
    Ok(r)
}

/// Terminant against its error-function smoothing across the Stokes line.
fn stokes_suite(quick: bool, ctx: &PrecisionContext) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Stokes);
    let w_grid: &[u32] = if quick { &[25, 100] } else { &[25, 100, 400] };
    let steps = if quick { 5 } else { 21 };
    let wp = ctx.bits();
    for &w in w_grid {
        let rad = Float::with_val(wp, w);
        let p = Float::with_val(wp, &rad + 0.5f64);
        for j in 0..steps {
            let offset = -0.5 + j as f64 / (steps - 1) as f64;
            let phi = Float::with_val(wp, pi(wp) + offset);
            let t = terminant_polar(&p, &rad, &phi, ctx)?;
            let s = stokes_smoothing(&rad, &phi, ctx)?;
            let err = cabs(&Complex::with_val(wp, &t.value - &s.value), wp);
            let envelope = smoothing_scale(&rad, &phi, ctx)?;
            r.check(|| format!("|w| = {w}, φ = π{offset:+.3}"), &envelope, &err);
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn appendix_suite_passes() {
        let r = run_suite(Suite::Appendix, true, &PrecisionContext::new(128).unwrap()).unwrap();
        assert!(r[0].passed(), "{:?}", r[0].violations);
        assert_eq!(r[0].checks, 36);
    }

    #[test]
    fn margin_tracks_tightest_check() {
        let mut r = SuiteReport::new(Suite::Bounds);
        r.check(String::new, &Float::with_val(64, 4), &Float::with_val(64, 2));
        r.check(String::new, &Float::with_val(64, 3), &Float::with_val(64, 2));
        assert_eq!(r.min_margin, Some(1.5));
        r.check(|| "x".into(), &Float::with_val(64, 1), &Float::with_val(64, 2));
        assert!(!r.passed());
    }
}
