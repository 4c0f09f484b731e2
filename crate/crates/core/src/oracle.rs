//! Independent reference values.
//!
//! Nothing here touches the coefficient or expansion code: `Γ(-a, λa)` comes
//! from quadrature of its Laplace-type integral, `Γ*(z)` from a shifted
//! Stirling sum whose Bernoulli numbers are produced from `ζ(2j)`, and
//! `b_n(-λ)` from the trapezoid rule on a Cauchy loop.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{carg, cabs, ensure_finite, pi, PrecisionContext};
use crate::quad::{half_line, tanh_sinh, QuadratureResult};

/// `Γ(-a, λa)` together with the bracketed integral
/// `∫_0^∞ exp(-a(λe^t + t - λ)) dt = Γ(-a, λa)/(z^{-a}e^{-z})`.
#[derive(Debug, Clone)]
pub struct IncGammaValue {
    pub value: Complex,
    pub integral: QuadratureResult,
}

fn check_oracle_sector(a: &Complex, prec: u32) -> Result<()> {
    if a.real().is_zero() && a.imag().is_zero() {
        return Err(Error::Domain("a must be non-zero".into()));
    }
    let limit = pi(prec) / 2u32 - 0.01f64;
    if Float::with_val(prec, carg(a, prec).abs()) > limit {
        return Err(Error::Sector("quadrature oracle needs |arg a| <= π/2 - 0.01".into()));
    }
    Ok(())
}

/// Cut-off `T` with `Re(a)·(λ(e^T - 1) + T) = target`, by Newton from above.
fn cutoff(re_a: &Float, lambda: &Float, target: &Float, wp: u32) -> Float {
    let lp1 = Float::with_val(wp, lambda + 1u32);
    let mut t = Float::with_val(wp, target / Float::with_val(wp, re_a * &lp1));
    for _ in 0..200 {
        let et = Float::with_val(wp, t.exp_ref());
        let phi = Float::with_val(wp, &et - 1u32) * lambda + &t;
        let g = Float::with_val(wp, &phi * re_a) - target;
        let dg = (Float::with_val(wp, &et * lambda) + 1u32) * re_a;
        let step = g / dg;
        t -= &step;
        if Float::with_val(wp, step.abs_ref()) < 1e-6 {
            break;
        }
    }
    t + 0.5f64
}

/// The bracketed integral alone, at the working precision of `ctx`.
pub fn incgamma_integral(a: &Complex, lambda: &Float, ctx: &PrecisionContext) -> Result<QuadratureResult> {
    let wp = ctx.bits() + 32;
    check_oracle_sector(a, wp)?;
    if *lambda <= 0 {
        return Err(Error::Domain("λ must be positive".into()));
    }
    let a = Complex::with_val(wp, a);
    let lambda = Float::with_val(wp, lambda);
    let ln2 = Float::with_val(wp, rug::float::Constant::Log2);
    let target = Float::with_val(wp, &ln2 * (wp + 32));
    let t_max = cutoff(a.real(), &lambda, &target, wp);
    let neg_a = Complex::with_val(wp, -&a);
    let integrand = |t: &Float| -> Result<Complex> {
        let phase = Float::with_val(wp, t.exp_ref()) - 1u32;
        let phase = phase * &lambda + t;
        Ok(Complex::with_val(wp, &neg_a * &phase).exp())
    };
    tanh_sinh(integrand, &Float::new(wp), &t_max, ctx)
}

/// `Γ(-a, λa)` for `Re a > 0`.
pub fn incgamma_oracle(a: &Complex, lambda: &Float, ctx: &PrecisionContext) -> Result<IncGammaValue> {
    let integral = incgamma_integral(a, lambda, ctx)?;
    let wp = ctx.bits() + 32;
    let z = Complex::with_val(wp, a * Float::with_val(wp, lambda));
    let log_pref = Complex::with_val(wp, -Complex::with_val(wp, a * Complex::with_val(wp, z.ln_ref())) - &z);
    let value = Complex::with_val(ctx.bits(), log_pref.exp() * &integral.value);
    Ok(IncGammaValue { value: ensure_finite(value, "Γ(-a, λa)")?, integral })
}

fn bernoulli_cache() -> &'static Mutex<HashMap<u32, Vec<Float>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<Float>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `B_2, B_4, …, B_{2J}` from `B_{2j} = (-1)^{j+1} 2(2j)! ζ(2j)/(2π)^{2j}`.
fn bernoulli_even(count: usize, wp: u32) -> Vec<Float> {
    let mut cache = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    let entry = cache.entry(wp).or_default();
    let two_pi = pi(wp) * 2u32;
    while entry.len() < count {
        let j = entry.len() as u32 + 1;
        let fact = Float::with_val(wp, Float::factorial(2 * j));
        let zeta = Float::with_val(wp, Float::zeta_u(2 * j));
        let denom = Float::with_val(wp, (&two_pi).pow(2 * j));
        let mut b = fact * zeta * 2u32 / denom;
        if j % 2 == 0 {
            b = -b;
        }
        entry.push(b);
    }
    entry[..count].to_vec()
}

/// `Γ*(z) = Γ(z)/(√(2π) z^{z-1/2} e^{-z})` for `|arg z| < π`.
///
/// `log Γ(z+m)` comes from the Stirling sum truncated once terms drop below
/// the working precision, with `m` large enough that the sum reaches it; the
/// shift is undone with the logarithms of `z, …, z+m-1`.
pub fn gammastar_oracle(z: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    if !(z.real().is_finite() && z.imag().is_finite()) || (z.real().is_zero() && z.imag().is_zero()) {
        return Err(Error::Domain("Γ* needs a finite non-zero argument".into()));
    }
    if z.imag().is_zero() && *z.real() < 0 {
        return Err(Error::Domain("Γ* is not defined on the negative axis".into()));
    }
    let size = cabs(z, 64).to_f64().max(1.0);
    let wp = prec + 48 + (size.ln().max(1.0) * size).log2().max(0.0).ceil() as u32;
    let z = Complex::with_val(wp, z);
    let min_re = 0.12 * wp as f64 + 8.0;
    let re = z.real().to_f64();
    let m = if re >= min_re { 0 } else { (min_re - re).ceil() as u32 };
    let w = Complex::with_val(wp, &z + m);

    let ln_w = Complex::with_val(wp, w.ln_ref());
    let half_ln_2pi = Float::with_val(wp, pi(wp) * 2u32).ln() / 2u32;
    // log Γ(w) = (w - 1/2) log w - w + log(2π)/2 + Σ B_{2j}/(2j(2j-1) w^{2j-1})
    let mut log_gamma = Complex::with_val(wp, Complex::with_val(wp, &w - 0.5f64) * &ln_w) - &w + &half_ln_2pi;
    let w_inv = Complex::with_val(wp, w.recip_ref());
    let w_inv2 = Complex::with_val(wp, w_inv.square_ref());
    let eps = Float::with_val(wp, 1) >> (wp as i32);
    let mut power = w_inv.clone();
    let mut j = 1usize;
    loop {
        let b = bernoulli_even(j, wp).pop().expect("non-empty");
        let coeff = b / ((2 * j * (2 * j - 1)) as u32);
        let term = Complex::with_val(wp, &power * &coeff);
        let mag = cabs(&term, wp);
        log_gamma += &term;
        if mag < eps {
            break;
        }
        if j > 4 * wp as usize {
            return Err(Error::NoConvergence("Stirling sum for Γ*".into()));
        }
        power *= &w_inv2;
        j += 1;
    }
    for i in 0..m {
        let zi = Complex::with_val(wp, &z + i);
        log_gamma -= zi.ln();
    }
    // log Γ*(z) = log Γ(z) - log(2π)/2 - (z - 1/2) log z + z
    let ln_z = Complex::with_val(wp, z.ln_ref());
    let log_star = log_gamma - &half_ln_2pi - Complex::with_val(wp, Complex::with_val(wp, &z - 0.5f64) * &ln_z) + &z;
    ensure_finite(Complex::with_val(prec, log_star.exp()), "Γ*")
}

/// Default loop radius `|−log λ + πi|/2`.
pub fn default_loop_radius(lambda: &Float, prec: u32) -> Float {
    let l = Float::with_val(prec, lambda.ln_ref());
    Float::with_val(prec, l.hypot(&pi(prec))) / 2u32
}

/// `b_n(-λ) = (λ+1)^{2n+1} n!/(2πi) ∮ du/f(u)^{n+1}` with
/// `f(u) = λe^u + u - λ`, by the trapezoid rule on `|u| = radius`.
pub fn b_coeff_oracle(n: u32, lambda: &Float, radius: Option<&Float>, ctx: &PrecisionContext) -> Result<QuadratureResult> {
    if *lambda <= 0 {
        return Err(Error::Domain("λ must be positive".into()));
    }
    let mut guard = 32u32;
    loop {
        let wp = ctx.bits() + guard;
        let r = match radius {
            Some(r) => Float::with_val(wp, r),
            None => default_loop_radius(lambda, wp),
        };
        let limit = Float::with_val(wp, default_loop_radius(lambda, wp) * 2u32);
        if r <= 0 || r >= limit {
            return Err(Error::Domain("loop radius must lie inside the nearest saddle".into()));
        }
        let res = trapezoid_loop(n, &Float::with_val(wp, lambda), &r, ctx, wp)?;
        // Cancellation between nodes costs bits; redo with more guard if needed.
        let size = cabs(&res.value, wp);
        let lost = if size.is_zero() { 0 } else { Float::with_val(wp, &res.abs_sum / &size).log2().to_f64().max(0.0) as u32 };
        if lost + 16 <= guard {
            let mut out = res;
            out.value = Complex::with_val(ctx.bits(), &out.value);
            return Ok(out);
        }
        guard = lost + 48;
    }
}

fn trapezoid_loop(n: u32, lambda: &Float, r: &Float, ctx: &PrecisionContext, wp: u32) -> Result<QuadratureResult> {
    let two_pi = pi(wp) * 2u32;
    let scale = Float::with_val(wp, Float::with_val(wp, lambda + 1u32).pow(2 * n + 1)) * Float::with_val(wp, Float::factorial(n));
    let tol = ctx.quad_rel_tol();
    let eval = |m: u32, offset_half: bool| -> Result<(Complex, Float)> {
        let mut sum = Complex::new(wp);
        let mut abs_sum = Float::new(wp);
        for j in 0..m {
            let k = if offset_half { 2 * j + 1 } else { 2 * j };
            let phi = Float::with_val(wp, &two_pi * k) / (2 * m);
            let (s, c) = phi.sin_cos(Float::new(wp));
            let u = Complex::with_val(wp, (Float::with_val(wp, r * &c), Float::with_val(wp, r * &s)));
            let f = Complex::with_val(wp, u.exp_ref()) - 1u32;
            let f = Complex::with_val(wp, &f * lambda) + &u;
            let term = u / f.pow(n + 1);
            abs_sum += cabs(&term, wp);
            sum += term;
        }
        Ok((sum, abs_sum))
    };
    let mut m = 16u32;
    let (mut sum, mut abs_sum) = eval(m, false)?;
    let mut prev = Complex::with_val(wp, &sum * &scale) / m;
    for level in 1..=ctx.quad_max_levels() + 8 {
        // doubling: the new nodes interleave the old ones
        let (s2, a2) = eval(m, true)?;
        sum += s2;
        abs_sum += a2;
        m *= 2;
        let cur = Complex::with_val(wp, &sum * &scale) / m;
        let diff = cabs(&Complex::with_val(wp, &cur - &prev), wp);
        let size = cabs(&cur, wp);
        let rel = if size.is_zero() { diff.clone() } else { Float::with_val(wp, &diff / &size) };
        if rel <= tol && level >= 2 {
            let abs_total = Float::with_val(wp, &abs_sum * &scale) / m;
            return Ok(QuadratureResult { value: cur, est_rel_err: rel, levels_used: level, abs_sum: abs_total });
        }
        prev = cur;
    }
    Err(Error::NoConvergence("loop trapezoid rule".into()))
}

/// `b_n(-λ)` from the real-axis representation
/// `(-1)^n (λ+1)^{2n+1} √(2/π) ∫ t^{n-1/2} e^{-t|F|} Im(e^{(n+1/2)ωi} Γ*(te^{iω})) dt`
/// with `F = λ + log λ + 1 + πi` and `ω = arg F`; valid for `n >= 1`.
pub fn b_coeff_real_axis(n: u32, lambda: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if n == 0 {
        return Err(Error::Domain("the real-axis form holds for n >= 1".into()));
    }
    let wp = ctx.bits() + 32;
    let lam = Float::with_val(wp, lambda);
    let x = Float::with_val(wp, lam.ln_ref()) + &lam + 1u32;
    let p = pi(wp);
    let omega = Float::with_val(wp, p.atan2_ref(&x));
    let sm = Float::with_val(wp, p.hypot_ref(&x));
    let rot = Complex::with_val(wp, (Float::new(wp), omega.clone())).exp();
    let phase = Complex::with_val(wp, (Float::new(wp), Float::with_val(wp, &omega * (n as f64 + 0.5)))).exp();
    let inner = ctx.widened(16);
    let integrand = |t: &Float| -> Result<Complex> {
        let z = Complex::with_val(wp, &rot * t);
        let g = gammastar_oracle(&z, &inner)?;
        let weight = Float::with_val(wp, t.ln_ref()) * (n as f64 - 0.5) - Float::with_val(wp, t * &sm);
        let v = Complex::with_val(wp, &phase * &g) * weight.exp();
        Ok(Complex::with_val(wp, (v.imag(), 0)))
    };
    let split = Float::with_val(wp, (n as f64 - 0.5) / sm.to_f64());
    let q = half_line(integrand, &split, ctx)?;
    let pref = Float::with_val(wp, &lam + 1u32).pow(2 * n + 1) * (Float::with_val(wp, 2) / &p).sqrt();
    let v = Float::with_val(ctx.bits(), q.value.real() * pref);
    Ok(if n % 2 == 1 { -v } else { v })
}
