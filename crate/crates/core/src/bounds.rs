//! Computable bounds for the remainder `R_N(a, λ)` of the large-`a` expansion,
//! the csc-or-one kernel estimate, and the bound for the remainder `M_N(z)` of
//! the scaled gamma series.
//!
//! Every bound is assembled in [`Interval`] arithmetic and the upper endpoint
//! is reported. All `t`-integrals are taken in closed form through
//! `∫ t^{s-1} e^{-μt} dt = Γ(s)/μ^s`.

use rug::float::Round;
use rug::{Complex, Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numerics::{float_serde, pi, PrecisionContext};
use crate::phase::{classify, meijer_phi_star, phase_enclosure, real_part, Regime};

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub regime: Regime,
    pub applicable: bool,
    #[serde(with = "float_serde::option")]
    pub bound_value: Option<Float>,
    /// The csc-or-one bracket (its half-sum where two brackets occur).
    #[serde(with = "float_serde::option")]
    pub kernel_factor: Option<Float>,
    /// Everything except the kernel bracket.
    #[serde(with = "float_serde::option")]
    pub integral_factor: Option<Float>,
    /// Why the case does not apply, when it does not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl BoundReport {
    fn applicable(regime: Regime, kernel: &Interval, integral: &Interval) -> Self {
        let value = kernel.mul(integral);
        BoundReport {
            regime,
            applicable: true,
            bound_value: Some(value.upper()),
            kernel_factor: Some(kernel.upper()),
            integral_factor: Some(integral.upper()),
            reason: None,
        }
    }

    fn not_applicable(regime: Regime, reason: String) -> Self {
        BoundReport {
            regime,
            applicable: false,
            bound_value: None,
            kernel_factor: None,
            integral_factor: None,
            reason: Some(reason),
        }
    }
}

/// All four cases evaluated at one point, with the smallest applicable value.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSet {
    pub reports: Vec<BoundReport>,
    #[serde(with = "float_serde::option")]
    pub best: Option<Float>,
    pub best_regime: Option<Regime>,
}

/// Geometry shared by the four cases.
struct Setup {
    prec: u32,
    abs_a: Interval,
    theta: Interval,
    theta_point: Float,
    omega: Interval,
    omega_point: Float,
    sm: Interval,
    regimes: Vec<Regime>,
}

fn setup(a: &Complex, lambda: &Float, n: u32, ctx: &PrecisionContext) -> Result<Setup> {
    if n < 2 {
        return Err(Error::Range(format!("remainder bounds need N >= 2, got {n}")));
    }
    if a.is_zero() || !a.real().is_finite() || !a.imag().is_finite() {
        return Err(Error::Domain("a must be finite and non-zero".into()));
    }
    let prec = ctx.bits() + 32;
    let (re, im) = (a.real(), a.imag());
    let abs_a = Interval::new(
        Float::with_val_round(prec, re.hypot_ref(im), Round::Down).0,
        Float::with_val_round(prec, re.hypot_ref(im), Round::Up).0,
    )?;
    let theta = Interval::new(
        Float::with_val_round(prec, im.atan2_ref(re), Round::Down).0,
        Float::with_val_round(prec, im.atan2_ref(re), Round::Up).0,
    )?;
    let theta_point = theta.mid();
    let (_, omega, sm) = phase_enclosure(lambda, prec)?;
    let omega_point = omega.mid();
    let regimes = classify(&real_part(lambda, prec), prec);
    Ok(Setup { prec, abs_a, theta, theta_point, omega, omega_point, sm, regimes })
}

impl Setup {
    fn require(&self, r: Regime) -> Result<()> {
        if self.regimes.contains(&r) {
            Ok(())
        } else {
            Err(Error::Regime(format!("λ lies outside the {r} range")))
        }
    }

    /// Open sector `|arg a| < π - ω`.
    fn require_sector(&self) -> Result<()> {
        let edge = Float::with_val(self.prec, pi(self.prec) - &self.omega_point);
        if Float::with_val(self.prec, self.theta_point.abs_ref()) < edge {
            Ok(())
        } else {
            Err(Error::Sector("|arg a| must be below π - ω".into()))
        }
    }

    fn half(&self, s: i64) -> Interval {
        Interval::from_int(self.prec, s).div_int(2).expect("2 is non-zero")
    }

    /// `Γ(s/2) / sm^{s/2}` for an odd or even positive integer `s`.
    fn gamma_over_sm(&self, twice_s: i64) -> Result<Interval> {
        let s = self.half(twice_s);
        let g = s.gamma()?;
        let p = self.sm.powi((twice_s / 2) as i32)?;
        let p = if twice_s % 2 == 1 { p.mul(&self.sm.sqrt()?) } else { p };
        g.div(&p)
    }

    fn abs_a_pow(&self, e: i32) -> Result<Interval> {
        self.abs_a.powi(e)
    }

    /// `|a|^{-N-1} Γ(N+1/2) / ((π sm/2)^{1/2} sm^N)`.
    fn leading(&self, n: u32) -> Result<Interval> {
        let two_over_pi = Interval::from_int(self.prec, 2).div(&Interval::pi(self.prec))?;
        let g = self.gamma_over_sm(2 * n as i64 + 1)?;
        Ok(self.abs_a_pow(-(n as i32) - 1)?.mul(&two_over_pi.sqrt()?).mul(&g))
    }

    /// Kernel average for the two rays `t e^{±iω}`, each bracket being the
    /// csc-or-one estimate of `1/|1 + t e^{±iω}/a|`.
    fn kernel_average(&self) -> Result<Interval> {
        let p = Interval::pi(self.prec);
        let k1 = kernel_csc_interval(&self.omega.sub(&self.theta).add(&p))?;
        let k2 = kernel_csc_interval(&p.sub(&self.omega).sub(&self.theta))?;
        k1.add(&k2).div_int(2)
    }

    /// `sec(ω - φ*)/cos² φ* + 1) ζ(2) / (2π)³`, the constant in the `M_2`
    /// bound on the ray `arg z = ω`.
    fn m2_constant(&self, ctx: &PrecisionContext) -> Result<Interval> {
        bound_m_factor(&self.omega, &self.omega_point, 2, ctx, self.prec)
    }
}

/// Reduce an angle interval to a representative with midpoint in `(-π, π]`.
fn reduce_angle(phi: &Interval) -> Interval {
    let prec = phi.prec();
    let two_pi = Interval::pi(prec).mul_int(2);
    let turns = Float::with_val(prec, phi.mid() / two_pi.mid()).round();
    let k = turns.to_integer().unwrap_or_default();
    match k.to_i64() {
        Some(0) | None => phi.clone(),
        Some(k) => phi.sub(&two_pi.mul_int(k)),
    }
}

fn kernel_csc_interval(phi: &Interval) -> Result<Interval> {
    let r = reduce_angle(phi).abs();
    let prec = r.prec();
    if r.lo().is_zero() {
        return Err(Error::Singular("csc kernel at a multiple of 2π".into()));
    }
    let half_pi = Interval::pi(prec).div_int(2)?;
    let one = Interval::from_int(prec, 1);
    if r.lo() >= half_pi.hi() {
        return Ok(one);
    }
    // csc decreases on (0, π/2], so the lower end of |φ| gives the maximum.
    let low = Interval::point(r.lo());
    let csc = low.sin().recip()?;
    if r.hi() <= half_pi.lo() {
        Ok(csc)
    } else {
        Ok(csc.max(&one))
    }
}

/// Right side of `1/|1 - r e^{iφ}| ≤ |csc φ|` (for `0 < |φ mod 2π| < π/2`)
/// or `1` (for `π/2 ≤ |φ mod 2π| ≤ π`).
pub fn kernel_csc_bound(phi: &Float) -> Result<Float> {
    if !phi.is_finite() {
        return Err(Error::Domain("angle must be finite".into()));
    }
    let prec = phi.prec().max(64) + 16;
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let mut r = Float::with_val(prec, phi % &two_pi);
    if r > pi(prec) {
        r -= &two_pi;
    } else if r <= -pi(prec) {
        r += &two_pi;
    }
    r.abs_mut();
    if r.is_zero() {
        return Err(Error::Singular("csc kernel at a multiple of 2π".into()));
    }
    let half_pi = Float::with_val(prec, pi(prec) / 2u32);
    // Snap to the boundary value when within rounding of π/2.
    let near_edge = Float::with_val(prec, &r - &half_pi).abs() < Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32 - 8));
    if r >= half_pi || near_edge {
        return Ok(Float::with_val(phi.prec(), 1));
    }
    Ok(Float::with_val(phi.prec().max(64), r.sin().recip()))
}

/// Case (i): `λ > W(e^{π-1})`, `|arg a| < π - ω`.
pub fn bound_case_i(a: &Complex, lambda: &Float, n: u32, ctx: &PrecisionContext) -> Result<BoundReport> {
    let s = setup(a, lambda, n, ctx)?;
    s.require(Regime::CaseI)?;
    s.require_sector()?;
    let nm = s.half(2 * n as i64 - 1);
    let nm2 = s.half(2 * n as i64 - 3);
    let c1 = s.sm.div(&nm.mul_int(12))?;
    let c2 = s.sm.square().div(&nm.mul(&nm2).mul_int(288))?;
    let corr = Interval::from_int(s.prec, 1).add(&c1).add(&c2);
    let integral = s.leading(n)?.mul(&corr);
    Ok(BoundReport::applicable(Regime::CaseI, &s.kernel_average()?, &integral))
}

/// Case (ii): `λ ≥ W(e^{-1})`, `|arg a| ≤ π/4`. Four terms with the
/// printed `sin/cos((N ± 1/2)ω)` prefactors and kernels bounded by one.
pub fn bound_case_ii(a: &Complex, lambda: &Float, n: u32, ctx: &PrecisionContext) -> Result<BoundReport> {
    let s = setup(a, lambda, n, ctx)?;
    s.require(Regime::CaseII)?;
    let quarter = Float::with_val(s.prec, pi(s.prec) / 4u32);
    let slack = Float::with_val(s.prec, Float::with_val(s.prec, 1) >> (ctx.bits() as i32 - 8));
    if Float::with_val(s.prec, s.theta_point.abs_ref()) > Float::with_val(s.prec, &quarter + &slack) {
        return Err(Error::Sector("case (ii) needs |arg a| <= π/4".into()));
    }
    let n2 = 2 * n as i64;
    let cos_w = s.omega.cos().abs();
    let sin_w = s.omega.sin().abs();
    let twelve = Interval::from_int(s.prec, 12);
    let fortyeight = Interval::from_int(s.prec, 48);

    // `Re` and `Im` integrals against `t^{s-1} e^{-t sm}` with `s = m/2`.
    let re_part = |m: i64| -> Result<Interval> {
        Ok(s.gamma_over_sm(m)?
            .add(&cos_w.div(&twelve)?.mul(&s.gamma_over_sm(m - 2)?))
            .add(&s.gamma_over_sm(m - 4)?.div(&fortyeight)?))
    };
    let im_part = |m: i64| -> Result<Interval> {
        Ok(sin_w.div(&twelve)?.mul(&s.gamma_over_sm(m - 2)?).add(&s.gamma_over_sm(m - 4)?.div(&fortyeight)?))
    };
    let plus = s.omega.mul(&s.half(n2 + 1));
    let minus = s.omega.mul(&s.half(n2 - 1));
    let a1 = s.abs_a_pow(-(n as i32) - 1)?;
    let a2 = s.abs_a_pow(-(n as i32) - 2)?;
    let t1 = plus.sin().abs().mul(&a1).mul(&re_part(n2 + 1)?);
    let t2 = plus.cos().abs().mul(&a1).mul(&im_part(n2 + 1)?);
    let t3 = minus.sin().abs().mul(&a2).mul(&re_part(n2 + 3)?);
    let t4 = minus.cos().abs().mul(&a2).mul(&im_part(n2 + 3)?);
    let two_over_pi = Interval::from_int(s.prec, 2).div(&Interval::pi(s.prec))?;
    let total = t1.add(&t2).add(&t3).add(&t4).mul(&two_over_pi.sqrt()?);
    Ok(BoundReport::applicable(Regime::CaseII, &Interval::from_int(s.prec, 1), &total))
}

/// `|Γ*(t e^{iω})| ≤ 1 + 1/(12t) + C_M/t²` integrated against the leading
/// weight, relative to the leading factor.
fn appendix_correction(s: &Setup, n: u32, ctx: &PrecisionContext) -> Result<Interval> {
    let nm = s.half(2 * n as i64 - 1);
    let nm2 = s.half(2 * n as i64 - 3);
    let c1 = s.sm.div(&nm.mul_int(12))?;
    let c2 = s.m2_constant(ctx)?.mul(&s.sm.square()).div(&nm.mul(&nm2))?;
    Ok(Interval::from_int(s.prec, 1).add(&c1).add(&c2))
}

/// Case (iii): `W(e^{-π-1}) ≤ λ ≤ W(e^{π-1})`, `|arg a| < π - ω`.
pub fn bound_case_iii(a: &Complex, lambda: &Float, n: u32, ctx: &PrecisionContext) -> Result<BoundReport> {
    let s = setup(a, lambda, n, ctx)?;
    s.require(Regime::CaseIII)?;
    s.require_sector()?;
    let integral = s.leading(n)?.mul(&appendix_correction(&s, n, ctx)?);
    Ok(BoundReport::applicable(Regime::CaseIII, &s.kernel_average()?, &integral))
}

/// Case (iv): `0 < λ < W(e^{-π-1})`, `|arg a| < π - ω`, with the kernel
/// `(|csc(θ-ω)| + |csc(θ+ω)|)/2`.
pub fn bound_case_iv(a: &Complex, lambda: &Float, n: u32, ctx: &PrecisionContext) -> Result<BoundReport> {
    let s = setup(a, lambda, n, ctx)?;
    s.require(Regime::CaseIV)?;
    s.require_sector()?;
    let csc = |phi: Interval| -> Result<Interval> { phi.sin().abs().recip() };
    let kernel = csc(s.theta.sub(&s.omega))?.add(&csc(s.theta.add(&s.omega))?).div_int(2)?;
    let integral = s.leading(n)?.mul(&appendix_correction(&s, n, ctx)?);
    Ok(BoundReport::applicable(Regime::CaseIV, &kernel, &integral))
}

/// Evaluate all four cases; inapplicable ones are kept with `applicable = false`.
pub fn remainder_bounds(a: &Complex, lambda: &Float, n: u32, ctx: &PrecisionContext) -> Result<BoundSet> {
    type CaseFn = fn(&Complex, &Float, u32, &PrecisionContext) -> Result<BoundReport>;
    let cases: [(Regime, CaseFn); 4] = [
        (Regime::CaseI, bound_case_i),
        (Regime::CaseII, bound_case_ii),
        (Regime::CaseIII, bound_case_iii),
        (Regime::CaseIV, bound_case_iv),
    ];
    let mut reports = Vec::with_capacity(4);
    for (regime, f) in cases {
        match f(a, lambda, n, ctx) {
            Ok(r) => reports.push(r),
            Err(e @ (Error::Regime(_) | Error::Sector(_) | Error::Singular(_))) => {
                reports.push(BoundReport::not_applicable(regime, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    let best = reports
        .iter()
        .filter_map(|r| r.bound_value.as_ref().map(|v| (r.regime, v)))
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(BoundSet {
        best: best.map(|(_, v)| v.clone()),
        best_regime: best.map(|(r, _)| r),
        reports,
    })
}

/// `(sec(θ - φ*)/cos^N φ* + 1) ζ(N)Γ(N) / (2π)^{N+1}`, i.e. the bound for
/// `|M_N(z)|` times `|z|^N`.
fn bound_m_factor(theta: &Interval, theta_point: &Float, n: u32, ctx: &PrecisionContext, prec: u32) -> Result<Interval> {
    let phi = Interval::point(&meijer_phi_star(theta_point, n, ctx)?);
    let sec = theta.sub(&phi).cos();
    let cosn = phi.cos().powi(n as i32)?;
    if !sec.is_positive() || !cosn.is_positive() {
        return Err(Error::Domain("φ* outside the admissible range".into()));
    }
    let meijer = sec.mul(&cosn).recip()?.add(&Interval::from_int(prec, 1));
    let zeta = Interval::new(
        Float::with_val_round(prec, Float::zeta_u(n), Round::Down).0,
        Float::with_val_round(prec, Float::zeta_u(n), Round::Up).0,
    )?;
    let fact = Integer::from(Integer::factorial(n - 1));
    let gamma_n = Interval::new(
        Float::with_val_round(prec, &fact, Round::Down).0,
        Float::with_val_round(prec, &fact, Round::Up).0,
    )?;
    let two_pi_pow = Interval::pi(prec).mul_int(2).powi(n as i32 + 1)?;
    meijer.mul(&zeta).mul(&gamma_n).div(&two_pi_pow)
}

/// Bound for the remainder `M_N(z)` of the scaled gamma series, valid for
/// `0 < |arg z| < π` (negative arguments by conjugate symmetry).
pub fn bound_m(z: &Complex, n: u32, ctx: &PrecisionContext) -> Result<Float> {
    if n < 2 {
        return Err(Error::Domain(format!("bound_M needs N >= 2, got {n}")));
    }
    if z.is_zero() || !z.real().is_finite() || !z.imag().is_finite() {
        return Err(Error::Domain("z must be finite and non-zero".into()));
    }
    if z.imag().is_zero() {
        return Err(Error::Domain("bound_M needs 0 < |arg z| < π".into()));
    }
    let prec = ctx.bits() + 32;
    let (re, im) = (z.real(), Float::with_val(prec, z.imag().abs_ref()));
    let theta = Interval::new(
        Float::with_val_round(prec, im.atan2_ref(re), Round::Down).0,
        Float::with_val_round(prec, im.atan2_ref(re), Round::Up).0,
    )?;
    let r = Interval::new(
        Float::with_val_round(prec, re.hypot_ref(&im), Round::Down).0,
        Float::with_val_round(prec, re.hypot_ref(&im), Round::Up).0,
    )?;
    let factor = bound_m_factor(&theta, &theta.mid(), n, ctx, prec)?;
    Ok(Float::with_val_round(ctx.bits(), factor.div(&r.powi(n as i32)?)?.upper(), Round::Up).0)
}

fn check_t(t: &Float) -> Result<()> {
    if !t.is_finite() || *t <= 0 {
        return Err(Error::Domain("t must be positive".into()));
    }
    Ok(())
}

/// `1/(12t) + 1/(288t²)`, the bound for `|M_1(t e^{iω})|` when `0 < ω < π/4`.
pub fn m1_bound(t: &Float) -> Result<Float> {
    check_t(t)?;
    let p = t.prec();
    let a = Float::with_val_round(p, Float::with_val_round(p, t * 12u32, Round::Down).0.recip_ref(), Round::Up).0;
    let t2 = Float::with_val_round(p, t.square_ref(), Round::Down).0;
    let b = Float::with_val_round(p, Float::with_val_round(p, t2 * 288u32, Round::Down).0.recip_ref(), Round::Up).0;
    Ok(Float::with_val_round(p, a + b, Round::Up).0)
}

/// `1/(48t²)`, the bound for `|M_2(t e^{iω})|` when `0 < ω ≤ π/2`.
pub fn m2_bound(t: &Float) -> Result<Float> {
    check_t(t)?;
    let p = t.prec();
    let t2 = Float::with_val_round(p, t.square_ref(), Round::Down).0;
    Ok(Float::with_val_round(p, Float::with_val_round(p, t2 * 48u32, Round::Down).0.recip_ref(), Round::Up).0)
}
