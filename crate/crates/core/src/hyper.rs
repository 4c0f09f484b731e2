//! Re-expansion of the optimally truncated remainder in terminant functions:
//! `R_N = -i e^{w₋} √(2π/a) Σ_{k<K} γ_k a^{-k} T̂_{N-k+1/2}(w₋)
//!      + i e^{w₊} √(2π/a) Σ_{k<K} γ_k a^{-k} T̂_{N-k+1/2}(w₊) + R_{N,K}`
//! with `w∓ = a(λ + log λ + 1 ∓ πi)`, an explicit bound for `R_{N,K}`, and a
//! regression of its decay rate against `|a|`.

use rug::{Complex, Float, Rational};
use serde::Serialize;

use crate::coeffs::stirling_gammas;
use crate::error::{Error, Result};
use crate::expansion::{check_sector, remainder_context, remainder_sequence, two_ray_with_kernel};
use crate::numerics::{cabs, carg, float_serde, gamma_real, pi, rational_to_float, zeta_int, PrecisionContext};
use crate::oracle::gammastar_oracle;
use crate::phase::{meijer_objective, meijer_phi_star, phase_data, real_part};
use crate::terminant::{terminant, Sector};

#[derive(Debug, Clone, Serialize)]
pub struct HyperExpansion {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "K")]
    pub k: u32,
    /// Precision of the sums and oracle values.
    pub working_bits: u32,
    /// The sum over the `-πi` singulant, prefactor included.
    #[serde(with = "float_serde::complex")]
    pub terminant_sum_minus: Complex,
    #[serde(with = "float_serde::complex")]
    pub terminant_sum_plus: Complex,
    #[serde(with = "float_serde::option")]
    pub r_nk_bound: Option<Float>,
    #[serde(with = "float_serde::complex::option")]
    pub r_n_true: Option<Complex>,
    #[serde(with = "float_serde::complex::option")]
    pub r_nk_true: Option<Complex>,
    /// Absolute accuracy of the oracle value of `R_N`.
    #[serde(with = "float_serde::option")]
    pub oracle_tolerance: Option<Float>,
}

/// Both singulant arguments `a(λ + log λ + 1 ∓ πi)`.
fn singulant_arguments(a: &Complex, lambda: &Float, wp: u32) -> (Complex, Complex) {
    let x = real_part(lambda, wp);
    let p = pi(wp);
    let minus = Complex::with_val(wp, (x.clone(), Float::with_val(wp, -&p)));
    let plus = Complex::with_val(wp, (x, p));
    (Complex::with_val(wp, a * minus), Complex::with_val(wp, a * plus))
}

/// `e^{w} √(2π/a) T̂_p(w)`, refusing non-principal `w`.
fn scaled_terminant(a: &Complex, w: &Complex, p: &Float, ctx: &PrecisionContext) -> Result<Complex> {
    let wp = ctx.bits() + 32;
    let t = terminant(p, w, ctx)?;
    if t.sector != Sector::Principal {
        return Err(Error::Sector("terminant argument outside the principal sector".into()));
    }
    let root = Complex::with_val(wp, Complex::with_val(wp, pi(wp) * 2u32) / a).sqrt();
    let e = Complex::with_val(wp, w.exp_ref());
    Ok(Complex::with_val(ctx.bits(), e * root * t.value))
}

/// The `k`-th terms `γ_k a^{-k} e^{w} √(2π/a) T̂_{N-k+1/2}(w)` for both
/// singulants, signs `-i` and `+i` applied.
fn terminant_terms(a: &Complex, lambda: &Float, n: u32, k_range: std::ops::Range<u32>, ctx: &PrecisionContext) -> Result<Vec<(Complex, Complex)>> {
    let wp = ctx.bits() + 32;
    let (w_minus, w_plus) = singulant_arguments(a, lambda, wp);
    let gammas = stirling_gammas(k_range.end as usize);
    let mut out = Vec::new();
    let mut a_pow = Complex::with_val(wp, rug::ops::Pow::pow(Complex::with_val(wp, a), k_range.start)).recip();
    let a_inv = Complex::with_val(wp, a.recip_ref());
    for k in k_range {
        let p = Float::with_val(wp, n - k) + 0.5f64;
        let g = Complex::with_val(wp, &a_pow * rational_to_float(&gammas[k as usize], wp));
        let m = scaled_terminant(a, &w_minus, &p, ctx)?;
        let pl = scaled_terminant(a, &w_plus, &p, ctx)?;
        let i = Complex::with_val(wp, (0, 1));
        let m = Complex::with_val(wp, -Complex::with_val(wp, &i * &g) * m);
        let pl = Complex::with_val(wp, &i * &g) * pl;
        out.push((Complex::with_val(ctx.bits(), m), Complex::with_val(ctx.bits(), pl)));
        a_pow *= &a_inv;
    }
    Ok(out)
}

fn check_nk(n: u32, k: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Range("N must be at least 2".into()));
    }
    if k > n {
        return Err(Error::Range("K must not exceed N".into()));
    }
    Ok(())
}

/// The two `K`-term terminant sums, the `R_{N,K}` bound, and the oracle
/// value of `R_{N,K}` when the oracle applies (real part of `a` positive). `K < 2` uses the `K = 2` bound
/// plus the explicit terms for `k = K, …, 1`.
pub fn hyper_expand(a: &Complex, lambda: &Rational, n: u32, k: u32, ctx: &PrecisionContext) -> Result<HyperExpansion> {
    check_nk(n, k)?;
    check_sector(a, lambda, ctx.bits() + 16)?;
    let has_oracle = a.real().is_sign_positive() && !a.real().is_zero();
    // With an oracle, everything runs at its working precision so that the
    // decomposition can be compared at the oracle's tolerance.
    let wctx = if has_oracle { remainder_context(a, lambda, ctx)? } else { ctx.clone() };
    let prec = wctx.bits();
    let lf = rational_to_float(lambda, prec + 32);
    let terms = terminant_terms(a, &lf, n, 0..k.max(2), &wctx)?;
    let mut minus = Complex::new(prec);
    let mut plus = Complex::new(prec);
    for (m, p) in terms.iter().take(k as usize) {
        minus += m;
        plus += p;
    }
    let bound = if k >= 2 {
        theorem3_bound(a, &lf, n, k, ctx)?
    } else {
        let mut b = theorem3_bound(a, &lf, n, 2, ctx)?;
        for (m, p) in &terms[k as usize..2] {
            b += cabs(m, prec + 16) + cabs(p, prec + 16);
        }
        b
    };
    let (r_n_true, r_nk_true, oracle_tolerance) = if has_oracle {
        let seq = remainder_sequence(a, lambda, n, ctx)?;
        let r_n = seq.remainders[n as usize].clone();
        let wp = seq.working_bits + 16;
        let r_nk = Complex::with_val(wp, &r_n - &minus) - &plus;
        let rel = Float::with_val(wp, &seq.integral.est_rel_err).max(&wctx.quad_rel_tol());
        let tol = rel * cabs(&seq.integral.value, wp);
        (Some(r_n), Some(Complex::with_val(prec, r_nk)), Some(Float::with_val(prec, tol)))
    } else {
        (None, None, None)
    };
    Ok(HyperExpansion {
        n,
        k,
        working_bits: prec,
        terminant_sum_minus: minus,
        terminant_sum_plus: plus,
        r_nk_bound: Some(Float::with_val(ctx.bits(), bound)),
        r_n_true,
        r_nk_true,
        oracle_tolerance,
    })
}

/// `R_{N,K}` from its own two-ray integral over
/// `M_K(z) = Γ*(z) - Σ_{k<K} (-1)^k γ_k z^{-k}`, independent of the
/// terminant evaluations.
pub fn remainder_nk_integral(a: &Complex, lambda: &Rational, n: u32, k: u32, ctx: &PrecisionContext) -> Result<Complex> {
    check_nk(n, k)?;
    let gammas = stirling_gammas(k as usize);
    // Γ* ≈ 1 cancels against the sum for large arguments.
    let extra = 24 + 6 * k;
    h_integral(a, lambda, n, ctx, move |z, c| {
        let c = c.widened(extra);
        let wp = c.bits() + 16;
        let mut m = Complex::with_val(wp, gammastar_oracle(z, &c)?);
        let z_inv = Complex::with_val(wp, z.recip_ref());
        let mut pow = Complex::with_val(wp, (1, 0));
        for (j, g) in gammas.iter().take(k as usize).enumerate() {
            let term = Complex::with_val(wp, &pow * rational_to_float(g, wp));
            if j % 2 == 0 {
                m -= term;
            } else {
                m += term;
            }
            pow *= &z_inv;
        }
        Ok(m)
    })
}

fn h_integral<H>(a: &Complex, lambda: &Rational, n: u32, ctx: &PrecisionContext, h: H) -> Result<Complex>
where
    H: FnMut(&Complex, &PrecisionContext) -> Result<Complex>,
{
    two_ray_with_kernel(a, lambda, n, ctx, h)
}

/// `sec(ω-φ*)/cos^K φ* + 1` and `sec²(ω-φ*)/cos^K φ* + 1`.
pub fn kernel_factors(omega: &Float, k: u32, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let wp = ctx.bits();
    let phi = meijer_phi_star(omega, k, ctx)?;
    let objective = meijer_objective(omega, &phi, k);
    let sec = Float::with_val(wp, Float::with_val(wp, omega - &phi).cos_ref()).recip();
    let f1 = Float::with_val(wp, &objective + 1u32);
    let f2 = Float::with_val(wp, &objective * &sec) + 1u32;
    Ok((f1, f2))
}

/// The three-term bound for `|R_{N,K}|`, `2 ≤ K ≤ N`, `|arg a| ≤ π - ω`.
pub fn theorem3_bound(a: &Complex, lambda: &Float, n: u32, k: u32, ctx: &PrecisionContext) -> Result<Float> {
    if k < 2 || k > n {
        return Err(Error::Range("the bound needs 2 ≤ K ≤ N".into()));
    }
    if a.is_zero() {
        return Err(Error::Domain("a must be non-zero".into()));
    }
    let prec = ctx.bits();
    let wp = prec + 32;
    let wctx = ctx.widened(32);
    let pd = phase_data(lambda, &wctx)?;
    let theta = carg(a, wp).abs();
    if theta > Float::with_val(wp, pi(wp) - &pd.omega) {
        return Err(Error::Sector("the bound needs |arg a| ≤ π - ω".into()));
    }
    let (f1, f2) = kernel_factors(&pd.omega, k, &wctx)?;
    let abs_a = cabs(a, wp);
    let two_pi = Float::with_val(wp, pi(wp) * 2u32);
    let zeta = zeta_int(k, &wctx)?;
    let gamma_k = Float::with_val(wp, rug::Integer::from(rug::Integer::factorial(k - 1)));
    let zg = Float::with_val(wp, &zeta * &gamma_k);

    let (w_minus, w_plus) = singulant_arguments(a, lambda, wp);
    let p = Float::with_val(wp, n - k) + 0.5f64;
    let tm = cabs(&scaled_terminant(a, &w_minus, &p, ctx)?, wp);
    let tp = cabs(&scaled_terminant(a, &w_plus, &p, ctx)?, wp);
    let denom1 = Float::with_val(wp, rug::ops::Pow::pow(&two_pi, k + 1)) * Float::with_val(wp, rug::ops::Pow::pow(&abs_a, k));
    let first = Float::with_val(wp, &f1 * (tm + tp)) * &zg / denom1;

    let gnk = gamma_real(&p, &wctx)?;
    let exp_2pi = Float::with_val(wp, k) + 1.5f64;
    let denom2 = Float::with_val(wp, rug::ops::Pow::pow(&two_pi, &exp_2pi))
        * Float::with_val(wp, rug::ops::Pow::pow(&pd.singulant_mod, &p))
        * Float::with_val(wp, rug::ops::Pow::pow(&abs_a, n + 1));
    let second = Float::with_val(wp, &f2 * &zg) * 2u32 * gnk / denom2;
    // Quadrature-based terminant magnitudes: inflate by a margin far above
    // their tolerance.
    let margin = Float::with_val(wp, 1) + (Float::with_val(wp, 1) >> (prec / 2) as i32);
    Ok(Float::with_val(prec, (first + second) * margin))
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderPoint {
    #[serde(with = "float_serde")]
    pub a_abs: Float,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(with = "float_serde")]
    pub r_nk_abs: Float,
    /// `log|R_{N,K}| + |a|·|λ+log λ+1+πi| + (K+1/2) log|a|`.
    pub scaled_log: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    #[serde(rename = "K")]
    pub k: u32,
    pub rho: i32,
    pub points: Vec<OrderPoint>,
    /// Least-squares slope of `scaled_log` against `log|a|`: zero for the
    /// predicted rate, negative for faster decay.
    pub drift: f64,
}

/// Fits the decay of `|R_{N,K}|` at `N = round(|a|·|λ+log λ+1+πi|) + ρ` over
/// real `a` with the given magnitudes.
pub fn theorem2_order_check(magnitudes: &[f64], lambda: &Rational, k: u32, rho: i32, ctx: &PrecisionContext) -> Result<OrderReport> {
    if magnitudes.len() < 3 {
        return Err(Error::Range("the ladder needs at least 3 magnitudes".into()));
    }
    let prec = ctx.bits();
    let lf = rational_to_float(lambda, prec + 32);
    let sm = phase_data(&lf, &ctx.widened(32))?.singulant_mod;
    let mut points = Vec::with_capacity(magnitudes.len());
    for &m in magnitudes {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain("magnitudes must be positive".into()));
        }
        let a = Complex::with_val(prec, (m, 0));
        let scaled = Float::with_val(prec + 32, &sm * m);
        let n = scaled.to_f64().round() as i64 + rho as i64;
        if n < 2 || n < k as i64 {
            return Err(Error::Range(format!("N = {n} too small for K = {k}")));
        }
        let n = n as u32;
        let h = hyper_expand(&a, lambda, n, k, ctx)?;
        let r = cabs(h.r_nk_true.as_ref().expect("real a has an oracle value"), prec);
        let log_r = Float::with_val(prec, r.ln_ref());
        let scaled_log = (log_r + &scaled).to_f64() + (k as f64 + 0.5) * m.ln();
        points.push(OrderPoint { a_abs: Float::with_val(prec, m), n, r_nk_abs: r, scaled_log });
    }
    let xs: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.scaled_log).collect();
    Ok(OrderReport { k, rho, points, drift: slope(&xs, &ys) })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
