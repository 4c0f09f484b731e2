//! The truncated large-`a` expansion
//! `Γ(-a, z) = z^{-a} e^{-z} (Σ_{n<N} a^n b_n(-λ)/(z+a)^{2n+1} + R_N(a, λ))`
//! on the ray `z = λa`, the optimal truncation index, the true remainder
//! from the quadrature oracle, and the two integral representations of
//! `R_N` used for cross-checks.

use rug::{Complex, Float, Rational};
use serde::Serialize;

use crate::bounds::remainder_bounds;
use crate::coeffs::coefficient_table;
use crate::error::{Error, Result};
use crate::numerics::{cabs, carg, ensure_finite, float_serde, pi, rational_to_float, PrecisionContext};
use crate::oracle::{gammastar_oracle, incgamma_integral};
use crate::phase::{omega_k, phase_data, Regime};
use crate::quad::{half_line, QuadratureResult};

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionResult {
    #[serde(with = "float_serde::complex")]
    pub a: Complex,
    #[serde(serialize_with = "rational_str")]
    pub lambda: Rational,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(with = "float_serde::complex")]
    pub partial_sum: Complex,
    /// `z^{-a} e^{-z}`.
    #[serde(with = "float_serde::complex")]
    pub prefactor: Complex,
    #[serde(with = "float_serde::complex")]
    pub value: Complex,
    #[serde(with = "float_serde::option")]
    pub remainder_bound: Option<Float>,
    pub regime_used: Option<Regime>,
}

fn rational_str<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn check_lambda(lambda: &Rational) -> Result<()> {
    if *lambda <= 0 {
        return Err(Error::Domain("λ must be positive".into()));
    }
    Ok(())
}

/// `π - ω(λ)`, the half-opening of the sector of validity.
fn sector_half_width(lambda: &Rational, prec: u32) -> Result<Float> {
    let ctx = PrecisionContext::new(prec.max(64))?;
    let pd = phase_data(&rational_to_float(lambda, prec + 16), &ctx)?;
    Ok(Float::with_val(prec, pi(prec) - pd.omega))
}

pub(crate) fn check_sector(a: &Complex, lambda: &Rational, prec: u32) -> Result<()> {
    if a.is_zero() {
        return Err(Error::Domain("a must be non-zero".into()));
    }
    let theta = carg(a, prec).abs();
    if theta >= sector_half_width(lambda, prec)? {
        return Err(Error::Sector("|arg a| must be below π - ω".into()));
    }
    Ok(())
}

/// `Σ_{n<N} b_n(-λ)/(a^{n+1}(λ+1)^{2n+1})` at working precision `wp`, using
/// `a^n/(z+a)^{2n+1} = 1/(a^{n+1}(λ+1)^{2n+1})`.
fn series_sum(a: &Complex, coeffs: &[Rational], lambda: &Rational, n: u32, wp: u32) -> Complex {
    let lp1 = rational_to_float(&Rational::from(lambda + 1u32), wp);
    let first = Complex::with_val(wp, Complex::with_val(wp, a * &lp1).recip_ref());
    let ratio = Complex::with_val(wp, Complex::with_val(wp, a * Float::with_val(wp, lp1.square_ref())).recip_ref());
    let mut power = first;
    let mut sum = Complex::new(wp);
    for b in coeffs.iter().take(n as usize) {
        sum += Complex::with_val(wp, &power * rational_to_float(b, wp));
        power *= &ratio;
    }
    sum
}

/// `z^{-a} e^{-z} = exp(-a Log z - z)` with the principal logarithm.
pub fn prefactor(a: &Complex, lambda: &Rational, prec: u32) -> Result<Complex> {
    let wp = prec + 32;
    let z = Complex::with_val(wp, a * rational_to_float(lambda, wp));
    let log = Complex::with_val(wp, -Complex::with_val(wp, a * Complex::with_val(wp, z.ln_ref())) - &z);
    ensure_finite(Complex::with_val(prec, log.exp()), "z^{-a} e^{-z}")
}

/// The truncated expansion with `N` terms, plus the smallest applicable
/// remainder bound when `N ≥ 2`.
pub fn partial_sum(a: &Complex, lambda: &Rational, n: u32, ctx: &PrecisionContext) -> Result<ExpansionResult> {
    check_lambda(lambda)?;
    if n < 1 {
        return Err(Error::Range("N must be at least 1".into()));
    }
    let prec = ctx.bits();
    check_sector(a, lambda, prec)?;
    let coeffs = coefficient_table(lambda, n as usize)?;
    let wp = prec + 16;
    let sum = ensure_finite(Complex::with_val(prec, series_sum(a, &coeffs, lambda, n, wp)), "partial sum")?;
    let pref = prefactor(a, lambda, prec)?;
    let value = ensure_finite(Complex::with_val(prec, &pref * &sum), "expansion value")?;
    let (remainder_bound, regime_used) = if n >= 2 {
        let set = remainder_bounds(a, &rational_to_float(lambda, prec + 32), n, ctx)?;
        (set.best, set.best_regime)
    } else {
        (None, None)
    };
    Ok(ExpansionResult {
        a: Complex::with_val(prec, a),
        lambda: lambda.clone(),
        n,
        partial_sum: sum,
        prefactor: pref,
        value,
        remainder_bound,
        regime_used,
    })
}

/// `|a λ + log λ + 1 + πi|` style singulant modulus times `|a|`, in `f64`.
fn scaled_singulant(a: &Complex, lambda: &Float) -> Result<f64> {
    let ctx = PrecisionContext::new(64)?;
    let sm = phase_data(lambda, &ctx)?.singulant_mod.to_f64();
    Ok(cabs(a, 64).to_f64() * sm)
}

/// `round(|a| · |λ + log λ + 1 + πi|)`, at least 1.
pub fn optimal_truncation(a: &Complex, lambda: &Float) -> Result<u32> {
    if a.is_zero() {
        return Err(Error::Domain("a must be non-zero".into()));
    }
    Ok((scaled_singulant(a, lambda)?.round() as u32).max(1))
}

/// Working precision for the oracle subtraction: the remainder can be as
/// small as `e^{-|a| sm}` relative to the sum, so that many bits are added.
pub fn remainder_context(a: &Complex, lambda: &Rational, ctx: &PrecisionContext) -> Result<PrecisionContext> {
    let lf = rational_to_float(lambda, 64);
    let extra = (scaled_singulant(a, &lf)? * std::f64::consts::LOG2_E).ceil() as u32 + 32;
    Ok(ctx.widened(extra))
}

/// The oracle integral and the remainders `R_0, …, R_{n_max}` it implies,
/// where `R_0` is the integral itself.
#[derive(Debug, Clone)]
pub struct RemainderSequence {
    pub integral: QuadratureResult,
    pub remainders: Vec<Complex>,
    pub working_bits: u32,
}

impl RemainderSequence {
    pub fn get(&self, n: u32) -> Option<&Complex> {
        self.remainders.get(n as usize)
    }
}

pub fn remainder_sequence(a: &Complex, lambda: &Rational, n_max: u32, ctx: &PrecisionContext) -> Result<RemainderSequence> {
    check_lambda(lambda)?;
    let rctx = remainder_context(a, lambda, ctx)?;
    let wp = rctx.bits() + 16;
    let integral = incgamma_integral(a, &rational_to_float(lambda, wp), &rctx)?;
    let coeffs = coefficient_table(lambda, n_max as usize)?;
    let lp1 = rational_to_float(&Rational::from(lambda + 1u32), wp);
    let mut power = Complex::with_val(wp, Complex::with_val(wp, a * &lp1).recip_ref());
    let ratio = Complex::with_val(wp, Complex::with_val(wp, a * Float::with_val(wp, lp1.square_ref())).recip_ref());
    let mut current = Complex::with_val(wp, &integral.value);
    let mut remainders = Vec::with_capacity(n_max as usize + 1);
    remainders.push(Complex::with_val(rctx.bits(), &current));
    for b in coeffs.iter().take(n_max as usize) {
        current -= Complex::with_val(wp, &power * rational_to_float(b, wp));
        power *= &ratio;
        remainders.push(Complex::with_val(rctx.bits(), &current));
    }
    Ok(RemainderSequence { integral, remainders, working_bits: rctx.bits() })
}

/// `R_N(a, λ)` as the oracle integral minus the partial sum.
pub fn true_remainder(a: &Complex, lambda: &Rational, n: u32, ctx: &PrecisionContext) -> Result<Complex> {
    if n < 1 {
        return Err(Error::Range("N must be at least 1".into()));
    }
    let seq = remainder_sequence(a, lambda, n, ctx)?;
    Ok(seq.remainders[n as usize].clone())
}

/// `(-1)^N a^N (λ+1)^{2N+1}/(z+a)^{2N+1} = (-1)^N a^{-N-1}`.
fn remainder_constant(a: &Complex, n: u32, wp: u32) -> Complex {
    let mut c = Complex::with_val(wp, rug::ops::Pow::pow(Complex::with_val(wp, a), n + 1)).recip();
    if n % 2 == 1 {
        c = -c;
    }
    c
}

/// `∫_0^∞ t^{N-1/2} e^{-t·μ} g(t) / (1 + t e^{iψ}/a) dt` with `g` supplied.
fn ray_integral<G>(a: &Complex, n: u32, mu: &Float, psi: &Float, mut g: G, ctx: &PrecisionContext) -> Result<Complex>
where
    G: FnMut(&Float) -> Result<Complex>,
{
    let wp = ctx.bits() + 32;
    let rot = Complex::with_val(wp, (psi.cos_ref(), psi.sin_ref()));
    let rot_over_a = Complex::with_val(wp, &rot / a);
    let exponent = Float::with_val(wp, n) - 0.5f64;
    // Skip points whose weight is negligible against the peak at
    // t = (N - 1/2)/μ; this keeps Γ* away from needlessly huge arguments.
    let peak = Float::with_val(wp, &exponent / mu);
    let log_peak = if exponent.is_zero() { Float::new(wp) } else { Float::with_val(wp, &exponent * (Float::with_val(wp, peak.ln_ref()) - 1u32)) };
    let floor = Float::with_val(wp, rug::float::Constant::Log2) * (wp + 64);
    let integrand = |t: &Float| -> Result<Complex> {
        if !t.is_zero() {
            let log_w = Float::with_val(wp, &exponent * Float::with_val(wp, t.ln_ref())) - Float::with_val(wp, t * mu);
            if Float::with_val(wp, &log_peak - &log_w) > floor {
                return Ok(Complex::new(wp));
            }
        }
        let w = Float::with_val(wp, real_pow(t, &exponent)) * Float::with_val(wp, -Float::with_val(wp, t * mu)).exp();
        let den = Complex::with_val(wp, &rot_over_a * t) + 1u32;
        Ok(Complex::with_val(wp, g(t)? * w) / den)
    };
    let split = Float::with_val(wp, (Float::with_val(wp, n) + 1u32) / mu);
    Ok(half_line(integrand, &split, ctx)?.value)
}

fn real_pow(t: &Float, e: &Float) -> Float {
    if t.is_zero() {
        return Float::new(t.prec());
    }
    Float::with_val(t.prec(), rug::ops::Pow::pow(t, e))
}

fn lambda_checks(a: &Complex, lambda: &Rational, n: u32, prec: u32) -> Result<()> {
    check_lambda(lambda)?;
    if n < 1 {
        return Err(Error::Range("N must be at least 1".into()));
    }
    check_sector(a, lambda, prec)
}

/// `R_N` from its two-ray integral representation over `Γ*(t e^{±iω})`.
pub fn remainder_integral(a: &Complex, lambda: &Rational, n: u32, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    lambda_checks(a, lambda, n, prec)?;
    let wp = prec + 32;
    let lf = rational_to_float(lambda, wp);
    let pd = phase_data(&lf, &ctx.widened(32))?;
    two_ray_term(a, n, &pd.omega, &pd.singulant_mod, &pd.singulant_mod, ctx, |z, c| gammastar_oracle(z, c))
}

/// The two-ray representation with `Γ*` replaced by an arbitrary kernel `h`,
/// evaluated at `t e^{±iω}`.
pub(crate) fn two_ray_with_kernel<H>(a: &Complex, lambda: &Rational, n: u32, ctx: &PrecisionContext, mut h: H) -> Result<Complex>
where
    H: FnMut(&Complex, &PrecisionContext) -> Result<Complex>,
{
    let prec = ctx.bits();
    lambda_checks(a, lambda, n, prec)?;
    let lf = rational_to_float(lambda, prec + 32);
    let pd = phase_data(&lf, &ctx.widened(32))?;
    two_ray_term(a, n, &pd.omega, &pd.singulant_mod, &pd.singulant_mod, ctx, &mut h)
}

/// Shared shape of both representations:
/// `C/(√(2π) i) · (e^{(N+1/2)ψi} I(ψ, μ₊) - e^{-(N+1/2)ψi} I(-ψ, μ₋))`,
/// with `I(ψ, μ) = ∫ t^{N-1/2} e^{-tμ} h(t e^{iψ'}) / (1 + t e^{iψ}/a) dt`.
fn two_ray_term<H>(
    a: &Complex,
    n: u32,
    psi: &Float,
    mu_plus: &Float,
    mu_minus: &Float,
    ctx: &PrecisionContext,
    mut h: H,
) -> Result<Complex>
where
    H: FnMut(&Complex, &PrecisionContext) -> Result<Complex>,
{
    two_ray_term_shifted(a, n, psi, psi, mu_plus, mu_minus, ctx, &mut h)
}

#[allow(clippy::too_many_arguments)]
fn two_ray_term_shifted<H>(
    a: &Complex,
    n: u32,
    psi: &Float,
    eval_angle: &Float,
    mu_plus: &Float,
    mu_minus: &Float,
    ctx: &PrecisionContext,
    h: &mut H,
) -> Result<Complex>
where
    H: FnMut(&Complex, &PrecisionContext) -> Result<Complex>,
{
    let wp = ctx.bits() + 32;
    let inner = ctx.widened(16);
    let mut side = |sign: i32, mu: &Float| -> Result<Complex> {
        let ang = Float::with_val(wp, psi * sign);
        let eval = Float::with_val(wp, eval_angle * sign);
        let rot = Complex::with_val(wp, (eval.cos_ref(), eval.sin_ref()));
        let integral = ray_integral(a, n, mu, &ang, |t| h(&Complex::with_val(wp, &rot * t), &inner), ctx)?;
        let phase = Float::with_val(wp, &ang * (Float::with_val(wp, n) + 0.5f64));
        Ok(Complex::with_val(wp, (phase.cos_ref(), phase.sin_ref())) * integral)
    };
    let plus = side(1, mu_plus)?;
    let minus = side(-1, mu_minus)?;
    let sqrt_2pi = Float::with_val(wp, pi(wp) * 2u32).sqrt();
    let denom = Complex::with_val(wp, (Float::new(wp), sqrt_2pi));
    let c = remainder_constant(a, n, wp);
    let diff = Complex::with_val(wp, &plus - &minus);
    ensure_finite(Complex::with_val(ctx.bits(), c * diff / denom), "remainder representation")
}

/// One `k` term of the small-`λ` series representation of `R_N`, with
/// `1/Γ*(t e^{±i(ω_k - π)})` on rays in the right half-plane.
pub fn theorem4_term(a: &Complex, lambda: &Rational, n: u32, k: u32, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    lambda_checks(a, lambda, n, prec)?;
    let wp = prec + 32;
    let lf = rational_to_float(lambda, wp);
    let x = crate::phase::real_part(&lf, wp);
    if x >= 0 {
        return Err(Error::Regime("the series representation needs λ < W(1/e)".into()));
    }
    let wctx = ctx.widened(32);
    let omega = omega_k(&lf, k, &wctx)?;
    let y = Float::with_val(wp, pi(wp) * (2 * k + 1));
    let mu = Float::with_val(wp, x.hypot_ref(&y));
    let shifted = Float::with_val(wp, &omega - pi(wp));
    two_ray_term_shifted(a, n, &omega, &shifted, &mu, &mu, ctx, &mut |z, c| Ok(gammastar_oracle(z, c)?.recip()))
}

/// Truncation `Σ_{k ≤ k_max}` of the small-`λ` series representation,
/// returning the individual terms as well.
pub fn theorem4_truncated(a: &Complex, lambda: &Rational, n: u32, k_max: u32, ctx: &PrecisionContext) -> Result<(Complex, Vec<Complex>)> {
    let mut terms = Vec::with_capacity(k_max as usize + 1);
    let mut total = Complex::new(ctx.bits());
    for k in 0..=k_max {
        let t = theorem4_term(a, lambda, n, k, ctx)?;
        total += &t;
        terms.push(t);
    }
    Ok((total, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    const B: u32 = 128;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(B).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn real(v: f64) -> Complex {
        Complex::with_val(B, (v, 0))
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        let d = cabs(&Complex::with_val(B, a - b), B);
        (d / cabs(b, B)).to_f64()
    }

    #[test]
    fn single_term_is_leading_factor() {
        let c = ctx();
        let a = Complex::with_val(B, (7.5, 1.25));
        let lam = q(3, 2);
        let r = partial_sum(&a, &lam, 1, &c).unwrap();
        let z = Complex::with_val(B, &a * rational_to_float(&lam, B));
        let expect = Complex::with_val(B, &r.prefactor / Complex::with_val(B, &z + &a));
        assert!(rel(&r.value, &expect) < 1e-35);
        assert!(r.remainder_bound.is_none());
    }

    #[test]
    fn optimal_truncation_examples() {
        assert_eq!(optimal_truncation(&real(10.0), &Float::with_val(B, 1)).unwrap(), 37);
        let c = ctx();
        let w = crate::numerics::lambert_w0(&Float::with_val(B, -1i32).exp(), &c).unwrap();
        assert_eq!(optimal_truncation(&real(1.0), &w).unwrap(), 3);
        let sm = phase_data(&Float::with_val(B, 2), &c).unwrap().singulant_mod.to_f64();
        assert_eq!(optimal_truncation(&real(30.0), &Float::with_val(B, 2)).unwrap(), (30.0 * sm).round() as u32);
    }

    #[test]
    fn sector_enforced() {
        let c = ctx();
        let omega = phase_data(&Float::with_val(B, 1), &c).unwrap().omega;
        let edge = Float::with_val(B, pi(B) - omega);
        let a = crate::numerics::from_polar(&Float::with_val(B, 10), &(edge + 0.01f64), B);
        assert!(matches!(partial_sum(&a, &q(1, 1), 3, &c), Err(Error::Sector(_))));
        assert!(matches!(partial_sum(&real(10.0), &q(1, 1), 0, &c), Err(Error::Range(_))));
    }

    #[test]
    fn conjugate_symmetry() {
        let c = ctx();
        let a = Complex::with_val(B, (12, 3));
        let ac = Complex::with_val(B, a.conj_ref());
        let v = partial_sum(&a, &q(2, 1), 8, &c).unwrap().value;
        let vc = partial_sum(&ac, &q(2, 1), 8, &c).unwrap().value;
        assert!(rel(&Complex::with_val(B, vc.conj_ref()), &v) < 1e-35);
    }

    #[test]
    fn matches_oracle_at_small_n() {
        let c = ctx();
        let seq = remainder_sequence(&real(10.0), &q(1, 1), 6, &c).unwrap();
        let r5 = seq.get(5).unwrap();
        let s = partial_sum(&real(10.0), &q(1, 1), 5, &c).unwrap();
        let full = Complex::with_val(B, &s.partial_sum + r5);
        // relative error of the truncated sum below the first omitted term ratio
        let b5 = coefficient_table(&q(1, 1), 5).unwrap()[5].clone();
        let term5 = rational_to_float(&b5, B).abs() / (Float::with_val(B, 10).pow(6u32) * Float::with_val(B, 2).pow(11u32));
        let err = cabs(r5, B) / cabs(&full, B);
        assert!(err.to_f64() < 2.0 * term5.to_f64() / cabs(&full, B).to_f64());
    }

    #[test]
    fn remainder_sign_follows_first_omitted_term() {
        // Well below the optimal index the remainder is dominated by the first
        // omitted term, whose sign is that of b_N(-λ); with ω ≈ 0.70 this is
        // not a plain (-1)^N alternation.
        let c = ctx();
        let lam = q(2, 1);
        let seq = remainder_sequence(&real(10.0), &lam, 12, &c).unwrap();
        let b = coefficient_table(&lam, 12).unwrap();
        let mut flips = 0;
        for n in 8..=12u32 {
            let r = seq.get(n).unwrap().real().to_f64();
            assert_eq!(r > 0.0, b[n as usize] > 0, "n = {n}");
            if n > 8 && (r > 0.0) != (seq.get(n - 1).unwrap().real().to_f64() > 0.0) {
                flips += 1;
            }
        }
        assert!(flips < 4);
    }

}
