//! The scaled terminant function
//! `T̂_p(w) = e^{iπp} w^{1-p} e^{-w}/(2πi) ∫_0^∞ t^{p-1} e^{-t}/(w+t) dt`
//! and the error-function smoothing of its Stokes jump.
//!
//! The integral is taken along a ray `t = s e^{iα}` chosen away from the pole
//! `t = -w`; this continues the principal branch analytically to
//! `|arg w| ≤ π + 0.6`. Further out the connection formula
//! `T̂_p(v e^{2πi}) = e^{-2πip} T̂_p(v) + 1` is used.

use rug::float::Constant;
use rug::{Complex, Float};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{cabs, carg, ensure_finite, erf_complex, float_serde, pi, PrecisionContext};
use crate::quad::half_line;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sector {
    /// `|arg w| < π`.
    Principal,
    /// Analytic continuation beyond `|arg w| = π`.
    Continued,
}

#[derive(Debug, Clone, Serialize)]
pub struct TerminantValue {
    #[serde(with = "float_serde")]
    pub p: Float,
    #[serde(with = "float_serde::complex")]
    pub w: Complex,
    /// `arg w` on the Riemann surface of the logarithm.
    #[serde(with = "float_serde")]
    pub phi: Float,
    #[serde(with = "float_serde::complex")]
    pub value: Complex,
    pub sector: Sector,
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesSmoothing {
    #[serde(with = "float_serde")]
    pub phi: Float,
    #[serde(with = "float_serde::complex")]
    pub c_phi: Complex,
    #[serde(with = "float_serde::complex")]
    pub erf_term: Complex,
    /// The smoothing approximation to `T̂_p(w)`.
    #[serde(with = "float_serde::complex")]
    pub value: Complex,
}

/// Rays further than this from the real axis cost too much cancellation.
const MAX_ROTATION: f64 = 1.0;
/// Preferred angular distance between the integration ray and the pole.
const POLE_CLEARANCE: f64 = 0.4;

fn check_p(p: &Float) -> Result<()> {
    if !p.is_finite() || *p <= 0 {
        return Err(Error::Domain("terminant order p must be positive".into()));
    }
    Ok(())
}

/// `T̂_p(w)` with `w = |w| e^{iφ}` given by modulus and argument, so that
/// arguments beyond `±π` can be addressed.
pub fn terminant_polar(p: &Float, r: &Float, phi: &Float, ctx: &PrecisionContext) -> Result<TerminantValue> {
    check_p(p)?;
    if !r.is_finite() || *r <= 0 {
        return Err(Error::Domain("|w| must be positive".into()));
    }
    let prec = ctx.bits();
    let wp = prec + 32;
    let pi_w = pi(wp);
    let three_pi = Float::with_val(wp, &pi_w * 3u32);
    let phi_abs = Float::with_val(wp, phi.abs_ref());
    if phi_abs >= three_pi {
        return Err(Error::Sector("terminant evaluation needs |arg w| < 3π".into()));
    }
    let sector = if phi_abs < pi_w { Sector::Principal } else { Sector::Continued };
    let reach = Float::with_val(wp, &pi_w + (MAX_ROTATION - POLE_CLEARANCE));
    let value = if phi_abs <= reach {
        rotated_ray(p, r, phi, ctx)?
    } else {
        let two_pi = Float::with_val(wp, &pi_w * 2u32);
        // e^{∓2πip}
        let twist = |sign: i32| -> Complex {
            let ang = Float::with_val(wp, Float::with_val(wp, &two_pi * p) * sign);
            Complex::with_val(wp, (ang.cos_ref(), ang.sin_ref()))
        };
        if phi.is_sign_positive() {
            let inner = rotated_ray(p, r, &Float::with_val(wp, phi - &two_pi), ctx)?;
            Complex::with_val(wp, twist(-1) * inner) + 1u32
        } else {
            let inner = rotated_ray(p, r, &Float::with_val(wp, phi + &two_pi), ctx)?;
            twist(1) * Complex::with_val(wp, inner - 1u32)
        }
    };
    let w = crate::numerics::from_polar(r, phi, prec);
    Ok(TerminantValue {
        p: Float::with_val(prec, p),
        w,
        phi: Float::with_val(prec, phi),
        value: ensure_finite(Complex::with_val(prec, value), "terminant")?,
        sector,
    })
}

/// `T̂_p(w)` for `w` given as a complex number, on the principal branch.
pub fn terminant(p: &Float, w: &Complex, ctx: &PrecisionContext) -> Result<TerminantValue> {
    if w.is_zero() {
        return Err(Error::Domain("terminant needs w != 0".into()));
    }
    let prec = ctx.bits() + 32;
    let phi = carg(w, prec);
    if phi == pi(prec) || Float::with_val(prec, phi.abs_ref()) >= pi(prec) {
        return Err(Error::Sector("w on the negative axis: give the argument explicitly".into()));
    }
    terminant_polar(p, &cabs(w, prec), &phi, ctx)
}

/// Direct evaluation along `t = s e^{iα}`, valid for `|φ| < π + 1`.
fn rotated_ray(p: &Float, r: &Float, phi: &Float, ctx: &PrecisionContext) -> Result<Complex> {
    let base = ctx.bits() + 32;
    let pf = p.to_f64();
    let beta = phi.to_f64() - std::f64::consts::PI;
    // Admissible α lie in (β, β + 2π); keep α near zero but clear of both ends.
    let alpha = if beta + POLE_CLEARANCE <= 0.0 && beta + 2.0 * std::f64::consts::PI - POLE_CLEARANCE >= 0.0 {
        0.0
    } else if beta + POLE_CLEARANCE > 0.0 {
        (beta + POLE_CLEARANCE).min(MAX_ROTATION)
    } else {
        (beta + 2.0 * std::f64::consts::PI - POLE_CLEARANCE).max(-MAX_ROTATION)
    };
    if alpha <= beta || alpha >= beta + 2.0 * std::f64::consts::PI {
        return Err(Error::Sector("argument too close to the continuation limit".into()));
    }
    // Along a rotated ray the integrand oscillates with modulus up to
    // cos(α)^{-p} times the result; add guard bits for that cancellation.
    let guard = if alpha == 0.0 { 0 } else { (pf.max(1.0) * -alpha.cos().ln() * std::f64::consts::LOG2_E).ceil() as u32 + 16 };
    let wctx = ctx.widened(guard);
    let wp = base + guard + 32;

    let alpha_f = Float::with_val(wp, alpha);
    let rot = Complex::with_val(wp, (alpha_f.cos_ref(), alpha_f.sin_ref()));
    let cos_a = Float::with_val(wp, alpha_f.cos_ref());
    let sin_a = Float::with_val(wp, alpha_f.sin_ref());
    let p = Float::with_val(wp, p);
    let pm1 = Float::with_val(wp, &p - 1u32);
    let w = crate::numerics::from_polar(r, phi, wp);
    // Peak of |s^{p-1} e^{-s cos α}| and its logarithm, factored out.
    let peak = if pm1 > 0 { Float::with_val(wp, &pm1 / &cos_a) } else { Float::with_val(wp, 1) };
    let log_peak = if pm1 > 0 {
        Float::with_val(wp, &pm1 * (Float::with_val(wp, peak.ln_ref()) - 1u32))
    } else {
        Float::new(wp)
    };
    let ln2 = Float::with_val(wp, Constant::Log2);
    let floor = Float::with_val(wp, &ln2 * (wp + 64));
    let integrand = |s: &Float| -> Result<Complex> {
        if s.is_zero() {
            return Ok(Complex::new(wp));
        }
        let ln_s = Float::with_val(wp, s.ln_ref());
        let log_mod = Float::with_val(wp, &pm1 * &ln_s) - Float::with_val(wp, s * &cos_a) - &log_peak;
        if -Float::with_val(wp, &log_mod) > floor {
            return Ok(Complex::new(wp));
        }
        let t = Complex::with_val(wp, &rot * s);
        let osc = Float::with_val(wp, -Float::with_val(wp, s * &sin_a));
        let kernel = Complex::with_val(wp, (log_mod, osc)).exp();
        Ok(kernel / Complex::with_val(wp, &w + &t))
    };
    let integral = half_line(integrand, &peak, &wctx)?.value;
    // e^{iα p} from dt · t^{p-1} = e^{iαp} s^{p-1} ds, then the prefactor
    // e^{iπp} w^{1-p} e^{-w} e^{log_peak}/(2πi), with log w continuous in φ.
    let log_w = Complex::with_val(wp, (Float::with_val(wp, r.ln_ref()), Float::with_val(wp, phi)));
    let one_minus_p = Float::with_val(wp, 1u32 - &p);
    let phase = Float::with_val(wp, Float::with_val(wp, pi(wp) + &alpha_f) * &p);
    let log_pref = Complex::with_val(wp, &log_w * &one_minus_p) - &w + Complex::with_val(wp, (log_peak, phase));
    let two_pi_i = Complex::with_val(wp, (0, Float::with_val(wp, pi(wp) * 2u32)));
    Ok(log_pref.exp() * integral / two_pi_i)
}

/// `c(φ)` with `c²/2 = 1 + i(φ-π) - e^{i(φ-π)}` on the branch
/// `c ≈ (φ-π) + i(φ-π)²/6 - …`. Written as `ψ √g(ψ)` with
/// `g = 2(1 + iψ - e^{iψ})/ψ²`, whose real part is positive for
/// `0 < |ψ| < 2π`, so the principal root is the continuous branch; one
/// Newton step on the defining equation polishes it.
pub fn c_of_phi(phi: &Float, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    let psi = Float::with_val(prec + 16, phi - pi(prec + 16));
    if psi.is_zero() {
        return Ok(Complex::new(prec));
    }
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    if Float::with_val(prec, psi.abs_ref()) >= two_pi {
        return Err(Error::Range("c(φ) needs |φ - π| < 2π".into()));
    }
    let lost = (-psi.to_f64().abs().log2()).max(0.0).ceil() as u32;
    let wp = prec + 32 + 2 * lost;
    let psi = Float::with_val(wp, psi);
    let rhs = rhs_half_c2(&psi, wp);
    let g = Complex::with_val(wp, &rhs * 2u32) / Float::with_val(wp, psi.square_ref());
    let mut c = Complex::with_val(wp, g.sqrt() * &psi);
    // Newton on F(c) = c²/2 - rhs.
    let f = Complex::with_val(wp, Complex::with_val(wp, c.square_ref()) / 2u32) - &rhs;
    c -= f / Complex::with_val(wp, &c);
    Ok(Complex::with_val(prec, c))
}

fn rhs_half_c2(psi: &Float, wp: u32) -> Complex {
    let e = Complex::with_val(wp, (psi.cos_ref(), psi.sin_ref()));
    Complex::with_val(wp, (Float::with_val(wp, 1), Float::with_val(wp, psi))) - e
}

/// Residual `|c²/2 - (1 + iψ - e^{iψ})|` of a computed `c(φ)`.
pub fn c_residual(phi: &Float, c: &Complex) -> Float {
    let wp = c.prec().0.max(phi.prec()) + 16;
    let psi = Float::with_val(wp, phi - pi(wp));
    let lhs = Complex::with_val(wp, c.square_ref()) / 2u32;
    cabs(&(lhs - rhs_half_c2(&psi, wp)), wp)
}

/// `1/2 + erf(c(φ) √(|w|/2))/2`, the smoothing of the Stokes jump across
/// `arg w = π`, valid for `-π < φ < 3π`.
pub fn stokes_smoothing(r: &Float, phi: &Float, ctx: &PrecisionContext) -> Result<StokesSmoothing> {
    let prec = ctx.bits();
    let wp = prec + 16;
    let pi_w = pi(wp);
    if *phi <= -pi_w.clone() || *phi >= Float::with_val(wp, &pi_w * 3u32) {
        return Err(Error::Range("smoothing needs -π < arg w < 3π".into()));
    }
    let c = c_of_phi(phi, &ctx.widened(16))?;
    let scale = Float::with_val(wp, r / 2u32).sqrt();
    let erf = erf_complex(&Complex::with_val(wp, &c * &scale), &ctx.widened(16))?;
    let value = Complex::with_val(wp, &erf / 2u32) + 0.5f64;
    Ok(StokesSmoothing {
        phi: Float::with_val(prec, phi),
        c_phi: Complex::with_val(prec, c),
        erf_term: Complex::with_val(prec, erf),
        value: Complex::with_val(prec, value),
    })
}

/// Mirror form `e^{2πip}(-1/2 + erf(-conj(c(-φ)) √(|w|/2))/2)` for
/// `-3π < φ < π`.
pub fn stokes_smoothing_mirror(p: &Float, r: &Float, phi: &Float, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    let wp = prec + 16;
    let pi_w = pi(wp);
    if *phi >= pi_w || *phi <= Float::with_val(wp, &pi_w * -3i32) {
        return Err(Error::Range("mirror smoothing needs -3π < arg w < π".into()));
    }
    let neg = Float::with_val(wp, -phi);
    let c = c_of_phi(&neg, &ctx.widened(16))?;
    let arg = Complex::with_val(wp, -Complex::with_val(wp, c.conj_ref())) * Float::with_val(wp, r / 2u32).sqrt();
    let erf = erf_complex(&arg, &ctx.widened(16))?;
    let inner = Complex::with_val(wp, &erf / 2u32) - 0.5f64;
    let ang = Float::with_val(wp, Float::with_val(wp, &pi_w * 2u32) * p);
    let twist = Complex::with_val(wp, (ang.cos_ref(), ang.sin_ref()));
    Ok(Complex::with_val(prec, twist * inner))
}

/// `e^{-|w| Re(c²(φ))/2} |w|^{-1/2}`, the size of the smoothing error.
pub fn smoothing_scale(r: &Float, phi: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let wp = ctx.bits() + 16;
    let c = c_of_phi(phi, &ctx.widened(16))?;
    let half_c2 = Complex::with_val(wp, c.square_ref()) / 2u32;
    let e = Float::with_val(wp, -Float::with_val(wp, half_c2.real() * r)).exp();
    Ok(Float::with_val(ctx.bits(), e / Float::with_val(wp, r.sqrt_ref())))
}

/// Envelope `e^{-Re w - |w|}` of the terminant in the principal sector.
pub fn principal_envelope(w: &Complex, prec: u32) -> Float {
    let r = cabs(w, prec);
    Float::with_val(prec, -Float::with_val(prec, w.real() + &r)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: u32 = 128;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(B).unwrap()
    }

    fn f(v: f64) -> Float {
        Float::with_val(B, v)
    }

    #[test]
    fn c_near_line_matches_quartic() {
        let c = ctx();
        let phi = Float::with_val(B, pi(B) + 0.1f64);
        let v = c_of_phi(&phi, &c).unwrap();
        let d = 0.1f64;
        let re = d - d * d * d / 36.0;
        let im = d * d / 6.0 - d.powi(4) / 270.0;
        assert!((v.real().to_f64() - re).abs() < 1e-6);
        assert!((v.imag().to_f64() - im).abs() < 1e-6);
        assert!(cabs(&c_of_phi(&pi(B), &c).unwrap(), B) < 1e-36);
    }

    #[test]
    fn c_residual_small() {
        let c = ctx();
        for d in [-1.0f64, 1.0, -3.0, 2.5, 1e-9, 6.0] {
            let phi = Float::with_val(B, pi(B) + d);
            let v = c_of_phi(&phi, &c).unwrap();
            assert!(c_residual(&phi, &v).to_f64() <= 1e-30, "ψ = {d}");
        }
        assert!(c_of_phi(&Float::with_val(B, pi(B) * 3.5f64), &c).is_err());
    }

    #[test]
    fn smoothing_midpoint_and_antisymmetry() {
        let c = ctx();
        let s = stokes_smoothing(&f(100.0), &pi(B), &c).unwrap();
        assert_eq!(s.value.real().to_f64(), 0.5);
        let up = stokes_smoothing(&f(100.0), &Float::with_val(B, pi(B) + 0.2f64), &c).unwrap();
        let down = stokes_smoothing(&f(100.0), &Float::with_val(B, pi(B) - 0.2f64), &c).unwrap();
        assert!((up.value.real().to_f64() - 0.5) * (down.value.real().to_f64() - 0.5) < 0.0);
    }

    #[test]
    fn p_one_against_exponential_integral() {
        // T̂_1(w) = -e^{w}... with Γ(0, w) = E_1(w): T̂_1(w) = -Γ(1)/(2πi) E_1(w).
        let c = ctx();
        let t = terminant(&f(1.0), &Complex::with_val(B, (10, 0)), &c).unwrap();
        // E_1(10) = 4.156968929685324277402859810e-6
        let e1 = 4.156968929685324277402859810e-6f64;
        let expect_im = e1 / (2.0 * std::f64::consts::PI);
        assert!(t.value.real().to_f64().abs() < 1e-30);
        assert!((t.value.imag().to_f64() - expect_im).abs() < 1e-14 * expect_im);
        assert_eq!(t.sector, Sector::Principal);
    }

    #[test]
    fn envelope_on_positive_axis() {
        let c = ctx();
        let w = Complex::with_val(B, (30, 0));
        let t = terminant(&f(30.0), &w, &c).unwrap();
        assert!(cabs(&t.value, B) <= principal_envelope(&w, B) * 10u32);
    }

    #[test]
    fn rotation_agrees_with_real_axis() {
        // At φ = π - 0.3 both the real-axis ray and a rotated one are valid.
        let c = ctx();
        let r = f(40.0);
        let phi = Float::with_val(B, pi(B) - 0.3f64);
        let direct = rotated_ray(&f(40.5), &r, &phi, &c).unwrap();
        let phi2 = Float::with_val(B, pi(B) - 0.5f64);
        let other = rotated_ray(&f(40.5), &r, &phi2, &c).unwrap();
        assert!(cabs(&direct, B) > 0 && cabs(&other, B) > 0);
        let t = terminant_polar(&f(40.5), &r, &phi, &c).unwrap();
        let d = cabs(&Complex::with_val(B, &t.value - &direct), B);
        assert!(d < cabs(&direct, B) >> 90);
    }

    #[test]
    fn continuity_across_continuation_switch() {
        let c = ctx();
        let p = f(10.5);
        let r = f(10.0);
        let edge = pi(B).to_f64() + MAX_ROTATION - POLE_CLEARANCE;
        let a = terminant_polar(&p, &r, &f(edge - 1e-12), &c).unwrap().value;
        let b = terminant_polar(&p, &r, &f(edge + 1e-12), &c).unwrap().value;
        let d = cabs(&Complex::with_val(B, &a - &b), B).to_f64();
        assert!(d < 1e-9 * cabs(&a, B).to_f64().max(1.0), "{d}");
        let a = terminant_polar(&p, &r, &f(-edge + 1e-12), &c).unwrap().value;
        let b = terminant_polar(&p, &r, &f(-edge - 1e-12), &c).unwrap().value;
        let d = cabs(&Complex::with_val(B, &a - &b), B).to_f64();
        assert!(d < 1e-9 * cabs(&a, B).to_f64().max(1.0), "{d}");
    }

    #[test]
    fn near_stokes_line_close_to_smoothing() {
        let c = ctx();
        let r = f(20.0);
        let phi = Float::with_val(B, pi(B) * 0.999f64);
        let t = terminant_polar(&f(20.5), &r, &phi, &c).unwrap();
        let s = stokes_smoothing(&r, &phi, &c).unwrap();
        let d = cabs(&Complex::with_val(B, &t.value - &s.value), B).to_f64();
        assert!(d <= 0.5 / 20f64.sqrt());
    }

    #[test]
    fn errors() {
        let c = ctx();
        assert!(terminant(&f(0.0), &Complex::with_val(B, (1, 0)), &c).is_err());
        assert!(terminant(&f(1.0), &Complex::with_val(B, (-1, 0)), &c).is_err());
        assert!(terminant_polar(&f(1.0), &f(1.0), &Float::with_val(B, pi(B) * 3u32), &c).is_err());
    }
}
