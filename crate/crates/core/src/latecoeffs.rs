//! Large-`n` approximation of the coefficients `b_n(-λ)` by a `K`-term sum
//! over Stirling coefficients, its two remainder bounds, the choice of `K`,
//! and the `n = 100` reference table.

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::coeffs::{coefficient_table, stirling_gammas};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numerics::{float_serde, half_integer_rising_ratio, pi, rational_to_float, PrecisionContext};
use crate::phase::{meijer_phi_star, phase_data, phase_enclosure};

/// Which remainder estimate a bound value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LateBoundKind {
    /// Valid for every `λ > 0`, `K ≥ 2`, through the Meijer-type bound on `M_K`.
    Meijer,
    /// Valid for `λ ≥ W(e^{π-1})`, through `|γ_K|/t^K + |γ_{K+1}|/t^{K+1}`.
    TwoTerm,
}

#[derive(Debug, Clone, Serialize)]
pub struct LateCoeffApprox {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: u32,
    /// `(-1)^n Γ(n+1/2)(λ+1)^{2n+1} / ((π sm/2)^{1/2} sm^n)`.
    #[serde(with = "float_serde")]
    pub prefactor: Float,
    /// The bracketed `K`-term sum, in normalised units.
    #[serde(with = "float_serde")]
    pub sum: Float,
    #[serde(with = "float_serde")]
    pub approx_value: Float,
    /// Bounds on `|A_K|` in normalised units.
    #[serde(with = "float_serde::option")]
    pub bound_13: Option<Float>,
    #[serde(with = "float_serde::option")]
    pub bound_17: Option<Float>,
    /// `b_n/prefactor - sum`, when the exact coefficient was computed.
    #[serde(with = "float_serde::option")]
    pub a_k_true: Option<Float>,
    #[serde(with = "float_serde::option")]
    pub exact: Option<Float>,
}

impl LateCoeffApprox {
    /// Bound in absolute units (multiplied by `|prefactor|`).
    pub fn absolute(&self, normalised: &Float) -> Float {
        let p = normalised.prec().max(self.prefactor.prec());
        Float::with_val_round(p, Float::with_val(p, self.prefactor.abs_ref()) * normalised, Round::Up).0
    }

    /// Smallest available bound in normalised units.
    pub fn best_bound(&self) -> Option<Float> {
        match (&self.bound_13, &self.bound_17) {
            (Some(a), Some(b)) => Some(if a <= b { a.clone() } else { b.clone() }),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    /// `b_n - approx` in absolute units.
    pub fn error(&self) -> Option<Float> {
        self.exact.as_ref().map(|e| Float::with_val(e.prec(), e - &self.approx_value))
    }
}

fn check_nk(n: u32, k: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Range(format!("need n >= 2, got {n}")));
    }
    if k < 1 || k > n - 1 {
        return Err(Error::Range(format!("need 1 <= K <= n-1, got K = {k}, n = {n}")));
    }
    Ok(())
}

fn lambda_float(lambda: &Rational, prec: u32) -> Result<Float> {
    if *lambda <= 0 {
        return Err(Error::Domain("λ must be positive".into()));
    }
    Ok(rational_to_float(lambda, prec))
}

/// `Γ(n-k+1/2)/Γ(n+1/2)` exactly.
fn gamma_ratio(n: u32, k: u32) -> Rational {
    half_integer_rising_ratio(n, k).recip()
}

fn rational_interval(q: &Rational, prec: u32) -> Interval {
    Interval::from_rational(prec, q)
}

/// `(-1)^n Γ(n+1/2)(λ+1)^{2n+1} / ((π sm/2)^{1/2} sm^n)` at precision `wp`.
pub fn late_prefactor(n: u32, lambda: &Rational, wp: u32) -> Result<Float> {
    let lf = lambda_float(lambda, wp + 16)?;
    let ctx = PrecisionContext::new(wp + 16)?;
    let sm = phase_data(&lf, &ctx)?.singulant_mod;
    let gamma = Float::with_val(wp + 16, Float::with_val(wp + 16, n) + 0.5f64).gamma();
    let lp1 = Float::with_val(wp + 16, &lf + 1u32);
    let num = gamma * Float::with_val(wp + 16, rug::ops::Pow::pow(&lp1, 2 * n + 1));
    let den = Float::with_val(wp + 16, Float::with_val(wp + 16, &sm * pi(wp + 16)) / 2u32).sqrt()
        * Float::with_val(wp + 16, rug::ops::Pow::pow(&sm, n));
    let v = Float::with_val(wp, num / den);
    Ok(if n % 2 == 1 { -v } else { v })
}

/// The `K`-term approximation with both bounds where they apply, and the
/// true remainder from the exact coefficient.
pub fn late_coeff_approx(n: u32, lambda: &Rational, k: u32, ctx: &PrecisionContext) -> Result<LateCoeffApprox> {
    check_nk(n, k)?;
    let prec = ctx.bits();
    let wp = prec + 32;
    let lf = lambda_float(lambda, wp)?;
    let pd = phase_data(&lf, &ctx.widened(32))?;
    let (sm, omega) = (&pd.singulant_mod, &pd.omega);
    let gammas = stirling_gammas(k as usize + 1);
    let mut sum = Float::new(wp);
    let mut sm_pow = Float::with_val(wp, 1);
    for j in 0..k {
        let coeff = Rational::from(&gammas[j as usize] * gamma_ratio(n, j));
        let angle = Float::with_val(wp, omega * (Float::with_val(wp, n - j) + 0.5f64));
        let mut term = Float::with_val(wp, &sm_pow * rational_to_float(&coeff, wp)) * angle.sin();
        if j % 2 == 1 {
            term = -term;
        }
        sum += term;
        sm_pow *= sm;
    }
    let prefactor = late_prefactor(n, lambda, wp)?;
    let approx_value = Float::with_val(prec, &prefactor * &sum);
    let bound_13 = if k >= 2 { Some(a_k_bound_13(n, lambda, k, ctx)?) } else { None };
    let bound_17 = match a_k_bound_17(n, lambda, k, ctx) {
        Ok(v) => Some(v),
        Err(Error::Regime(_)) | Err(Error::Range(_)) => None,
        Err(e) => return Err(e),
    };
    let exact_q = coefficient_table(lambda, n as usize)?.pop().expect("table has n+1 entries");
    let exact = rational_to_float(&exact_q, wp);
    let a_k_true = Float::with_val(prec, Float::with_val(wp, &exact / &prefactor) - &sum);
    Ok(LateCoeffApprox {
        n,
        k,
        prefactor: Float::with_val(prec, &prefactor),
        sum: Float::with_val(prec, &sum),
        approx_value,
        bound_13,
        bound_17,
        a_k_true: Some(a_k_true),
        exact: Some(Float::with_val(prec, &exact)),
    })
}

/// Bound on `|A_K|` for `λ ≥ W(e^{π-1})`:
/// `sm^K |γ_K| Γ(n-K+1/2)/Γ(n+1/2) + sm^{K+1} |γ_{K+1}| Γ(n-K-1/2)/Γ(n+1/2)`.
pub fn a_k_bound_17(n: u32, lambda: &Rational, k: u32, ctx: &PrecisionContext) -> Result<Float> {
    check_nk(n, k)?;
    if k + 2 > n {
        return Err(Error::Range("the two-term bound needs K <= n-2".into()));
    }
    let prec = ctx.bits() + 32;
    let lf = lambda_float(lambda, prec)?;
    let (x, _, sm) = phase_enclosure(&lf, prec)?;
    if !(x.lo() > Interval::pi(prec).hi()) {
        return Err(Error::Regime("the two-term bound needs λ > W(e^{π-1})".into()));
    }
    let gammas = stirling_gammas(k as usize + 1);
    let term = |j: u32| -> Result<Interval> {
        let c = Rational::from(gammas[j as usize].clone().abs() * gamma_ratio(n, j));
        Ok(sm.powi(j as i32)?.mul(&rational_interval(&c, prec)))
    };
    let v = term(k)?.add(&term(k + 1)?);
    Ok(Float::with_val_round(ctx.bits(), v.upper(), Round::Up).0)
}

/// Bound on `|A_K|` valid for all `λ > 0` and `K ≥ 2`:
/// `(1/2)(sec(ω-φ*)/cos^K φ* + 1) sm^K ζ(K)Γ(K) / (π (2π)^K) · Γ(n-K+1/2)/Γ(n+1/2)`.
pub fn a_k_bound_13(n: u32, lambda: &Rational, k: u32, ctx: &PrecisionContext) -> Result<Float> {
    check_nk(n, k)?;
    if k < 2 {
        return Err(Error::Range("the Meijer-type bound needs K >= 2".into()));
    }
    let prec = ctx.bits() + 32;
    let lf = lambda_float(lambda, prec)?;
    let (_, omega, sm) = phase_enclosure(&lf, prec)?;
    let phi = Interval::point(&meijer_phi_star(&omega.mid(), k, &ctx.widened(32))?);
    let sec_den = omega.sub(&phi).cos();
    let cosk = phi.cos().powi(k as i32)?;
    if !sec_den.is_positive() || !cosk.is_positive() {
        return Err(Error::Domain("φ* outside the admissible range".into()));
    }
    let one = Interval::from_int(prec, 1);
    let meijer = sec_den.mul(&cosk).recip()?.add(&one);
    let zeta = Interval::new(
        Float::with_val_round(prec, Float::zeta_u(k), Round::Down).0,
        Float::with_val_round(prec, Float::zeta_u(k), Round::Up).0,
    )?;
    let fact = Integer::from(Integer::factorial(k - 1));
    let gamma_k = rational_interval(&Rational::from(fact), prec);
    let p = Interval::pi(prec);
    let two_pi_k = p.mul_int(2).powi(k as i32)?;
    let ratio = rational_interval(&gamma_ratio(n, k), prec);
    let v = meijer
        .mul(&sm.powi(k as i32)?)
        .mul(&zeta)
        .mul(&gamma_k)
        .div(&p.mul(&two_pi_k))?
        .mul(&ratio)
        .div_int(2)?;
    Ok(Float::with_val_round(ctx.bits(), v.upper(), Round::Up).0)
}

/// `K ≈ (n+1/2)·2π/(sm + 2π)`, clamped to `[2, n-1]`. When the two-term
/// bound applies, the neighbouring integer giving the smaller two-term bound
/// is chosen; otherwise the value is rounded.
pub fn optimal_k(n: u32, lambda: &Rational) -> Result<u32> {
    if n < 4 {
        return Err(Error::Range(format!("optimal K needs n >= 4, got {n}")));
    }
    let ctx = PrecisionContext::new(128)?;
    let lf = lambda_float(lambda, 128)?;
    let pd = phase_data(&lf, &ctx)?;
    let two_pi = Float::with_val(128, pi(128) * 2u32);
    let target = Float::with_val(128, Float::with_val(128, n) + 0.5f64) * &two_pi / (Float::with_val(128, &pd.singulant_mod + &two_pi));
    let clamp = |v: i64| v.clamp(2, n as i64 - 1) as u32;
    let lo = clamp(target.clone().floor().to_f64() as i64);
    let hi = clamp(target.clone().ceil().to_f64() as i64);
    let rounded = clamp(target.round().to_f64() as i64);
    if lo == hi {
        return Ok(lo);
    }
    match (a_k_bound_17(n, lambda, lo, &ctx), a_k_bound_17(n, lambda, hi, &ctx)) {
        (Ok(a), Ok(b)) => Ok(if a <= b { lo } else { hi }),
        _ => Ok(rounded),
    }
}

/// One block of the `n = 100` reference table.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    #[serde(serialize_with = "rational_str")]
    pub lambda: Rational,
    #[serde(rename = "K")]
    pub k: u32,
    pub exact: String,
    pub approximation: String,
    pub error: String,
    pub bound: String,
    pub bound_kind: LateBoundKind,
}

fn rational_str<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// The three `(λ, K)` pairs of the reference table at `n = 100`.
pub fn table1_parameters() -> [(Rational, u32); 3] {
    [(Rational::from((1, 100)), 57), (Rational::from(2), 57), (Rational::from(5), 43)]
}

/// Reproduce the reference table: long values truncated to 45 significant
/// digits, errors and bounds (in absolute units) to 20.
pub fn table1(ctx: &PrecisionContext) -> Result<Vec<Table1Row>> {
    use crate::numerics::format_sci_truncated;
    let mut rows = Vec::new();
    for (lambda, k) in table1_parameters() {
        let r = late_coeff_approx(100, &lambda, k, ctx)?;
        let (bound, kind) = match &r.bound_17 {
            Some(b) => (b.clone(), LateBoundKind::TwoTerm),
            None => (r.bound_13.clone().expect("K >= 2"), LateBoundKind::Meijer),
        };
        let exact = r.exact.clone().expect("exact coefficient computed");
        rows.push(Table1Row {
            lambda,
            k,
            exact: format_sci_truncated(&exact, 45),
            approximation: format_sci_truncated(&r.approx_value, 45),
            error: format_sci_truncated(&r.error().expect("exact present"), 20),
            bound: format_sci_truncated(&r.absolute(&bound), 20),
            bound_kind: kind,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::format_sci_truncated;

    const B: u32 = 512;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(B).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(100, &q(2, 1)).unwrap(), 57);
        assert_eq!(optimal_k(100, &q(5, 1)).unwrap(), 43);
        assert_eq!(optimal_k(100, &q(1, 100)).unwrap(), 57);
        assert!(optimal_k(3, &q(1, 1)).is_err());
        let k = optimal_k(4, &q(1, 1)).unwrap();
        assert!((2..=3).contains(&k));
    }

    #[test]
    fn single_term_sum() {
        let c = ctx();
        let r = late_coeff_approx(2, &q(1, 1), 1, &c).unwrap();
        let omega = phase_data(&Float::with_val(B, 1), &c).unwrap().omega;
        let expect = Float::with_val(B, omega * 2.5f64).sin() * &r.prefactor;
        let d = Float::with_val(B, &r.approx_value - &expect).abs();
        assert!(d < Float::with_val(B, expect.abs_ref()) >> 400);
        assert!(r.bound_13.is_none());
    }

    #[test]
    fn table_long_values() {
        let c = ctx();
        let r = late_coeff_approx(100, &q(2, 1), 57, &c).unwrap();
        assert_eq!(format_sci_truncated(&r.approx_value, 45), "0.732252465623483776580694573188048575045373691e184");
        let r = late_coeff_approx(100, &q(1, 100), 57, &c).unwrap();
        assert_eq!(format_sci_truncated(&r.approx_value, 45), "-0.320681358577665454823220737555930624925282126e90");
    }

    #[test]
    fn bounds_contain_true_remainder() {
        let c = PrecisionContext::new(256).unwrap();
        for (lam, n, k) in [(q(2, 1), 10u32, 8u32), (q(1, 1), 20, 10), (q(5, 1), 30, 12)] {
            let r = late_coeff_approx(n, &lam, k, &c).unwrap();
            let t = r.a_k_true.clone().unwrap().abs();
            assert!(r.best_bound().unwrap() >= t);
            if let Some(b) = &r.bound_17 {
                assert!(*b >= t);
            }
            assert!(r.bound_13.clone().unwrap() >= t);
        }
    }

    #[test]
    fn bound_17_regime() {
        let c = ctx();
        assert!(matches!(a_k_bound_17(50, &q(1, 1), 10, &c), Err(Error::Regime(_))));
        assert!(a_k_bound_17(50, &q(2, 1), 10, &c).is_ok());
        assert!(matches!(a_k_bound_13(50, &q(2, 1), 1, &c), Err(Error::Range(_))));
    }

    #[test]
    fn bound_13_blows_up_as_lambda_vanishes() {
        let c = PrecisionContext::new(128).unwrap();
        let mut prev = Float::new(128);
        for d in [10i64, 1000, 100000, 10000000] {
            let v = a_k_bound_13(30, &q(1, d), 5, &c).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn dingle_factors() {
        let c = PrecisionContext::new(256).unwrap();
        let n = 60u32;
        let lam = q(2, 1);
        let lf = Float::with_val(256, 2);
        let sm = phase_data(&lf, &c).unwrap().singulant_mod;
        let gammas = stirling_gammas(4);
        let expected = [q(1, 1), q(1, 12), q(1, 288), q(-139, 51840)];
        for (j, e) in expected.iter().enumerate() {
            // (-1)^j γ_j sm^j Γ(n-j+1/2)/Γ(n+1/2) against e · sm^j/((n-1/2)…(n-j+1/2))
            let mut ours = Rational::from(&gammas[j] * gamma_ratio(n, j as u32));
            if j % 2 == 1 {
                ours = -ours;
            }
            let theirs = Rational::from(e * gamma_ratio(n, j as u32));
            let a = rational_to_float(&ours, 256) * Float::with_val(256, rug::ops::Pow::pow(&sm, j as u32));
            let b = rational_to_float(&theirs, 256) * Float::with_val(256, rug::ops::Pow::pow(&sm, j as u32));
            let rel = Float::with_val(256, (Float::with_val(256, &a - &b)) / &b).abs().to_f64();
            assert!(rel < 1e-25, "j = {j}");
        }
        let _ = lam;
    }
}
