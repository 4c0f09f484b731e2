//! Closed real intervals with outward-rounded endpoints.
//!
//! Every certified bound is assembled in this type; its upper endpoint is what
//! the bound routines report, so no rounding step can undercut the true value.

use std::cmp::Ordering;

use rug::float::{Constant, Round};
use rug::{Float, Rational};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

macro_rules! rnd {
    ($prec:expr, $e:expr, $r:expr) => {
        Float::with_val_round($prec, $e, $r).0
    };
}

impl Interval {
    pub fn new(lo: Float, hi: Float) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Domain("interval endpoints out of order".into()));
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval holding an exactly representable value.
    pub fn point(x: &Float) -> Self {
        Self { lo: x.clone(), hi: x.clone() }
    }

    pub fn from_int(prec: u32, v: i64) -> Self {
        let lo = rnd!(prec, v, Round::Down);
        let hi = rnd!(prec, v, Round::Up);
        Self { lo, hi }
    }

    pub fn from_rational(prec: u32, q: &Rational) -> Self {
        Self { lo: rnd!(prec, q, Round::Down), hi: rnd!(prec, q, Round::Up) }
    }

    /// Interval around a value whose true counterpart lies within `ulps`
    /// units in the last place.
    pub fn around(x: &Float, ulps: u32) -> Self {
        let prec = x.prec();
        if x.is_zero() {
            let tiny = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32 * 4));
            return Self { lo: -tiny.clone(), hi: tiny };
        }
        let rad = Float::with_val(prec, x.abs_ref()) >> (prec as i32 - 1);
        let rad = rad * ulps.max(1);
        Self { lo: rnd!(prec, x - &rad, Round::Down), hi: rnd!(prec, x + &rad, Round::Up) }
    }

    pub fn pi(prec: u32) -> Self {
        Self { lo: rnd!(prec, Constant::Pi, Round::Down), hi: rnd!(prec, Constant::Pi, Round::Up) }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 2;
        Float::with_val(p, &self.lo + &self.hi) / 2u32
    }

    pub fn radius(&self) -> Float {
        let p = self.prec() + 2;
        rnd!(p, &self.hi - &self.lo, Round::Up) / 2u32
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        Self { lo: rnd!(p, &self.lo + &o.lo, Round::Down), hi: rnd!(p, &self.hi + &o.hi, Round::Up) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        Self { lo: rnd!(p, &self.lo - &o.hi, Round::Down), hi: rnd!(p, &self.hi - &o.lo, Round::Up) }
    }

    pub fn neg(&self) -> Self {
        Self { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        let corners = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let lo = corners.iter().map(|(a, b)| rnd!(p, *a * *b, Round::Down)).reduce(fmin).unwrap();
        let hi = corners.iter().map(|(a, b)| rnd!(p, *a * *b, Round::Up)).reduce(fmax).unwrap();
        Self { lo, hi }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.lo <= 0 && o.hi >= 0 {
            return Err(Error::Singular("interval division by a range containing zero".into()));
        }
        let p = self.prec().max(o.prec());
        let corners = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let lo = corners.iter().map(|(a, b)| rnd!(p, *a / *b, Round::Down)).reduce(fmin).unwrap();
        let hi = corners.iter().map(|(a, b)| rnd!(p, *a / *b, Round::Up)).reduce(fmax).unwrap();
        Ok(Self { lo, hi })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::from_int(self.prec(), 1).div(self)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_int(self.prec(), k))
    }

    pub fn div_int(&self, k: i64) -> Result<Self> {
        self.div(&Self::from_int(self.prec(), k))
    }

    pub fn abs(&self) -> Self {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            self.neg()
        } else {
            let hi = fmax(-self.lo.clone(), self.hi.clone());
            Self { lo: Float::new(self.prec()), hi }
        }
    }

    pub fn max(&self, o: &Self) -> Self {
        Self { lo: fmax(self.lo.clone(), o.lo.clone()), hi: fmax(self.hi.clone(), o.hi.clone()) }
    }

    pub fn min(&self, o: &Self) -> Self {
        Self { lo: fmin(self.lo.clone(), o.lo.clone()), hi: fmin(self.hi.clone(), o.hi.clone()) }
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < 0 {
            return Err(Error::Domain("square root of a negative interval".into()));
        }
        let p = self.prec();
        Ok(Self { lo: rnd!(p, self.lo.sqrt_ref(), Round::Down), hi: rnd!(p, self.hi.sqrt_ref(), Round::Up) })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        Self { lo: rnd!(p, self.lo.exp_ref(), Round::Down), hi: rnd!(p, self.hi.exp_ref(), Round::Up) }
    }

    pub fn ln(&self) -> Result<Self> {
        if self.lo <= 0 {
            return Err(Error::Domain("logarithm of a non-positive interval".into()));
        }
        let p = self.prec();
        Ok(Self { lo: rnd!(p, self.lo.ln_ref(), Round::Down), hi: rnd!(p, self.hi.ln_ref(), Round::Up) })
    }

    /// Integer power of a non-negative interval.
    pub fn powi(&self, n: i32) -> Result<Self> {
        if self.lo < 0 {
            return Err(Error::Domain("integer power of an interval with negative part".into()));
        }
        if n < 0 && self.lo.is_zero() {
            return Err(Error::Singular("negative power of an interval touching zero".into()));
        }
        let p = self.prec();
        use rug::ops::Pow;
        let a = rnd!(p, (&self.lo).pow(n), Round::Down);
        let b = rnd!(p, (&self.hi).pow(n), Round::Up);
        let a2 = rnd!(p, (&self.lo).pow(n), Round::Up);
        let b2 = rnd!(p, (&self.hi).pow(n), Round::Down);
        if n >= 0 {
            Ok(Self { lo: a, hi: b })
        } else {
            Ok(Self { lo: b2, hi: a2 })
        }
    }

    pub fn square(&self) -> Self {
        self.abs().powi(2).expect("abs is non-negative")
    }

    /// Gamma function on an interval lying in `[1.5, ∞)`, where it increases,
    /// or at a single point.
    pub fn gamma(&self) -> Result<Self> {
        let p = self.prec();
        if self.lo == self.hi {
            if self.lo <= 0 {
                return Err(Error::Domain("gamma at a non-positive point".into()));
            }
            return Ok(Self {
                lo: rnd!(p, self.lo.gamma_ref(), Round::Down),
                hi: rnd!(p, self.hi.gamma_ref(), Round::Up),
            });
        }
        if self.lo < 1.5 {
            return Err(Error::Domain("interval gamma needs arguments >= 1.5".into()));
        }
        Ok(Self { lo: rnd!(p, self.lo.gamma_ref(), Round::Down), hi: rnd!(p, self.hi.gamma_ref(), Round::Up) })
    }

    fn slack(&self) -> Float {
        Float::with_val(self.prec(), 1) >> (self.prec() as i32 - 2)
    }

    /// Sine enclosure from the midpoint value and the Lipschitz constant 1.
    pub fn sin(&self) -> Self {
        let p = self.prec();
        let s = Float::with_val(p + 16, self.mid().sin_ref());
        self.lipschitz_unit(s, p)
    }

    pub fn cos(&self) -> Self {
        let p = self.prec();
        let c = Float::with_val(p + 16, self.mid().cos_ref());
        self.lipschitz_unit(c, p)
    }

    fn lipschitz_unit(&self, v: Float, p: u32) -> Self {
        let r = rnd!(p, self.radius() + self.slack(), Round::Up);
        let lo = fmax(rnd!(p, &v - &r, Round::Down), Float::with_val(p, -1));
        let hi = fmin(rnd!(p, &v + &r, Round::Up), Float::with_val(p, 1));
        Self { lo, hi }
    }

    pub fn asin(&self) -> Result<Self> {
        if self.lo < -1 || self.hi > 1 {
            return Err(Error::Domain("arcsine outside [-1, 1]".into()));
        }
        let p = self.prec();
        Ok(Self { lo: rnd!(p, self.lo.asin_ref(), Round::Down), hi: rnd!(p, self.hi.asin_ref(), Round::Up) })
    }

    /// `atan2(y, x)` for `y > 0`, where the function is monotone in each
    /// argument so the corners bracket the range.
    pub fn atan2(y: &Self, x: &Self) -> Result<Self> {
        if y.lo <= 0 {
            return Err(Error::Domain("atan2 enclosure needs y > 0".into()));
        }
        let p = y.prec().max(x.prec());
        let corners = [(&y.lo, &x.lo), (&y.lo, &x.hi), (&y.hi, &x.lo), (&y.hi, &x.hi)];
        let lo = corners.iter().map(|(a, b)| rnd!(p, a.atan2_ref(b), Round::Down)).reduce(fmin).unwrap();
        let hi = corners.iter().map(|(a, b)| rnd!(p, a.atan2_ref(b), Round::Up)).reduce(fmax).unwrap();
        Ok(Self { lo, hi })
    }

    /// Upper endpoint, the value reported by certified bounds.
    pub fn upper(&self) -> Float {
        self.hi.clone()
    }

    pub fn cmp_upper(&self, o: &Self) -> Ordering {
        self.hi.partial_cmp(&o.hi).unwrap_or(Ordering::Equal)
    }
}

fn fmin(a: Float, b: Float) -> Float {
    if a <= b {
        a
    } else {
        b
    }
}

fn fmax(a: Float, b: Float) -> Float {
    if a >= b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 96;

    fn third() -> Interval {
        Interval::from_rational(P, &Rational::from((1, 3)))
    }

    #[test]
    fn rational_enclosure_is_tight() {
        let t = third();
        assert!(t.lo() < t.hi());
        let back = Interval::from_int(P, 3).mul(&t);
        assert!(back.contains(&Float::with_val(P, 1)));
        let w = Float::with_val(P, back.hi() - back.lo());
        assert!(w < Float::with_val(P, 1) >> 90i32);
    }

    #[test]
    fn pi_and_trig() {
        let pi = Interval::pi(P);
        let exact = Float::with_val(200, Constant::Pi);
        assert!(*pi.lo() <= exact && exact <= *pi.hi());
        let s = pi.div_int(6).unwrap().sin();
        assert!(s.contains(&Float::with_val(P, 0.5)));
        let c = pi.cos();
        assert!(c.contains(&Float::with_val(P, -1)));
        assert!(*c.lo() >= -1);
    }

    #[test]
    fn division_by_zero_range() {
        let z = Interval::new(Float::with_val(P, -1), Float::with_val(P, 1)).unwrap();
        assert!(matches!(Interval::from_int(P, 1).div(&z), Err(Error::Singular(_))));
    }

    #[test]
    fn gamma_and_atan2() {
        let g = Interval::point(&Float::with_val(P, 0.5)).gamma().unwrap();
        let sqrt_pi = Float::with_val(200, Constant::Pi).sqrt();
        assert!(*g.lo() <= sqrt_pi && sqrt_pi <= *g.hi());
        let a = Interval::atan2(&Interval::pi(P), &Interval::pi(P)).unwrap();
        let quarter = Float::with_val(200, Constant::Pi) / 4u32;
        assert!(*a.lo() <= quarter && quarter <= *a.hi());
    }

    proptest! {
        #[test]
        fn arithmetic_contains_exact_rational_result(
            a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000
        ) {
            let x = Rational::from((a, b));
            let y = Rational::from((c, d));
            let ix = Interval::from_rational(P, &x);
            let iy = Interval::from_rational(P, &y);
            let check = |iv: &Interval, q: Rational| {
                let lo = Rational::from(iv.lo().to_rational().unwrap());
                let hi = Rational::from(iv.hi().to_rational().unwrap());
                lo <= q && q <= hi
            };
            prop_assert!(check(&ix.add(&iy), Rational::from(&x + &y)));
            prop_assert!(check(&ix.sub(&iy), Rational::from(&x - &y)));
            prop_assert!(check(&ix.mul(&iy), Rational::from(&x * &y)));
            if c != 0 {
                prop_assert!(check(&ix.div(&iy).unwrap(), Rational::from(&x / &y)));
            }
        }

        #[test]
        fn monotone_functions_bracket_high_precision_value(x in 0.01f64..50.0) {
            let iv = Interval::point(&Float::with_val(P, x));
            let reference = Float::with_val(400, x);
            let e = Float::with_val(400, reference.exp_ref());
            let ie = iv.exp();
            prop_assert!(*ie.lo() <= e && e <= *ie.hi());
            let l = Float::with_val(400, reference.ln_ref());
            let il = iv.ln().unwrap();
            prop_assert!(*il.lo() <= l && l <= *il.hi());
            let s = Float::with_val(400, reference.sqrt_ref());
            let is = iv.sqrt().unwrap();
            prop_assert!(*is.lo() <= s && s <= *is.hi());
            let sn = Float::with_val(400, reference.sin_ref());
            let isn = iv.sin();
            prop_assert!(*isn.lo() <= sn && sn <= *isn.hi());
        }
    }
}
