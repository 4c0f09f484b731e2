//! Constants derived from `λ`: the phase angle `ω = arg(λ + log λ + 1 + πi)`,
//! its relatives `ω_k`, the singulant modulus `|λ + log λ + 1 + πi|`, the
//! bound regimes, and the minimiser `φ*` of `sec(ω - φ)/cos^K φ`.

use std::fmt;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numerics::{pi, PrecisionContext};

/// Bound regimes. Membership is decided by `x = λ + log λ + 1`, which is
/// increasing in `λ`; the thresholds `x = ±π, 0` correspond to
/// `λ = W(e^{±π-1}), W(e^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    CaseI,
    CaseII,
    CaseIII,
    CaseIV,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::CaseI, Regime::CaseII, Regime::CaseIII, Regime::CaseIV];

    pub fn tag(self) -> &'static str {
        match self {
            Regime::CaseI => "CASE_I",
            Regime::CaseII => "CASE_II",
            Regime::CaseIII => "CASE_III",
            Regime::CaseIV => "CASE_IV",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseData {
    pub lambda: Float,
    /// `λ + log λ + 1`.
    pub real_part: Float,
    pub omega: Float,
    pub singulant_mod: Float,
    pub regimes: Vec<Regime>,
}

impl PhaseData {
    pub fn has(&self, r: Regime) -> bool {
        self.regimes.contains(&r)
    }
}

fn check_lambda(lambda: &Float) -> Result<()> {
    if !lambda.is_finite() || *lambda <= 0 {
        return Err(Error::Domain("λ must be a positive finite real".into()));
    }
    Ok(())
}

/// `λ + log λ + 1` at precision `prec`.
pub fn real_part(lambda: &Float, prec: u32) -> Float {
    let l = Float::with_val(prec, lambda);
    Float::with_val(prec, l.ln_ref()) + l + 1u32
}

pub fn classify(x: &Float, prec: u32) -> Vec<Regime> {
    let p = pi(prec);
    let mut out = Vec::new();
    if *x > p {
        out.push(Regime::CaseI);
    }
    if *x >= 0 {
        out.push(Regime::CaseII);
    }
    if Float::with_val(prec, x.abs_ref()) <= p {
        out.push(Regime::CaseIII);
    }
    if *x < -p {
        out.push(Regime::CaseIV);
    }
    out
}

pub fn phase_data(lambda: &Float, ctx: &PrecisionContext) -> Result<PhaseData> {
    check_lambda(lambda)?;
    let prec = ctx.bits();
    let wp = prec + 16;
    let x = real_part(lambda, wp);
    let p = pi(wp);
    let omega = Float::with_val(prec, p.atan2_ref(&x));
    let singulant_mod = Float::with_val(prec, p.hypot_ref(&x));
    let regimes = classify(&x, wp);
    Ok(PhaseData {
        lambda: Float::with_val(prec, lambda),
        real_part: Float::with_val(prec, &x),
        omega,
        singulant_mod,
        regimes,
    })
}

/// `ω_k = arg(λ + log λ + 1 + (2k+1)πi)`.
pub fn omega_k(lambda: &Float, k: u32, ctx: &PrecisionContext) -> Result<Float> {
    check_lambda(lambda)?;
    let wp = ctx.bits() + 16;
    let x = real_part(lambda, wp);
    let y = pi(wp) * (2 * k + 1);
    Ok(Float::with_val(ctx.bits(), y.atan2_ref(&x)))
}

/// Enclosures of `λ + log λ + 1`, `ω` and the singulant modulus, for the
/// certified bounds. `λ` is taken as exact.
pub fn phase_enclosure(lambda: &Float, prec: u32) -> Result<(Interval, Interval, Interval)> {
    check_lambda(lambda)?;
    let l = Interval::point(&Float::with_val(prec.max(lambda.prec()), lambda));
    let x = l.ln()?.add(&l).add(&Interval::from_int(prec, 1));
    let p = Interval::pi(prec);
    let omega = Interval::atan2(&p, &x)?;
    let sm = x.square().add(&p.square()).sqrt()?;
    Ok((x, omega, sm))
}

/// `sec(ω - φ)/cos^K φ`, the quantity minimised by `φ*`.
pub fn meijer_objective(omega: &Float, phi: &Float, k: u32) -> Float {
    let prec = omega.prec().max(phi.prec());
    let c = Float::with_val(prec, omega - phi).cos();
    let d = Float::with_val(prec, phi.cos_ref());
    let dk = Float::with_val(prec, rug::ops::Pow::pow(&d, k));
    (c * dk).recip()
}

/// Open interval of admissible `φ` for a given `ω ∈ (0, π)`.
pub fn meijer_interval(omega: &Float) -> (Float, Float) {
    let prec = omega.prec();
    let half_pi = pi(prec) / 2u32;
    if *omega < half_pi {
        (Float::new(prec), omega.clone())
    } else {
        (Float::with_val(prec, omega - &half_pi), half_pi)
    }
}

/// Root `φ*` of `(K+1) sin(ω - 2φ) = (K-1) sin ω` in the admissible interval.
pub fn meijer_phi_star(omega: &Float, k: u32, ctx: &PrecisionContext) -> Result<Float> {
    let wp = ctx.bits() + 16;
    let omega = Float::with_val(wp, omega);
    if !(omega > 0 && omega < pi(wp)) {
        return Err(Error::Domain("φ* requires 0 < ω < π".into()));
    }
    if k < 2 {
        return Err(Error::Domain("φ* requires K >= 2".into()));
    }
    let sin_w = Float::with_val(wp, omega.sin_ref());
    let rhs = Float::with_val(wp, &sin_w * (k - 1));
    let f = |phi: &Float| -> Float {
        let arg = Float::with_val(wp, &omega - Float::with_val(wp, phi * 2u32));
        Float::with_val(wp, arg.sin() * (k + 1)) - &rhs
    };
    let (mut lo, mut hi) = meijer_interval(&omega);
    if !(f(&lo) > 0 && f(&hi) < 0) {
        return Err(Error::NoConvergence("φ* bracket does not straddle a root".into()));
    }
    for _ in 0..wp + 8 {
        let mid = Float::with_val(wp, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        if f(&mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Float::with_val(ctx.bits(), (lo + hi) / 2u32))
}
