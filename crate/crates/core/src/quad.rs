//! Double-exponential quadrature for complex-valued integrands of a real
//! variable: tanh-sinh on finite intervals and exp-sinh on half-lines, both
//! refined by halving the step until successive estimates agree.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{pi, PrecisionContext};

/// Outcome of a quadrature: value plus the last relative change between
/// refinement levels, and the sum of absolute contributions (a cancellation
/// indicator).
#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: Complex,
    pub est_rel_err: Float,
    pub levels_used: u32,
    pub abs_sum: Float,
}

const GUARD_BITS: u32 = 32;

struct Accumulator {
    sum: Complex,
    abs_sum: Float,
}

impl Accumulator {
    fn new(wp: u32) -> Self {
        Self { sum: Complex::new(wp), abs_sum: Float::new(wp) }
    }

    fn push(&mut self, term: &Complex) -> Float {
        let wp = self.abs_sum.prec();
        let m = Float::with_val(wp, term.abs_ref());
        self.sum += term;
        self.abs_sum += &m;
        m
    }
}

fn converged(prev: &Complex, cur: &Complex, abs_sum: &Float, tol: &Float, wp: u32) -> (bool, Float) {
    let diff = Float::with_val(wp, Complex::with_val(wp, cur - prev).abs_ref());
    let size = Float::with_val(wp, cur.abs_ref());
    let rel = if size.is_zero() { diff.clone() } else { Float::with_val(wp, &diff / &size) };
    let floor = Float::with_val(wp, abs_sum >> (wp as i32 - 8));
    let ok = rel <= *tol || diff <= floor;
    (ok, rel)
}

/// Tanh-sinh rule on `[a, b]`. Endpoint singularities of integrable type are
/// handled by the double-exponential clustering; the integrand is never
/// evaluated at the endpoints themselves.
pub fn tanh_sinh<F>(mut f: F, a: &Float, b: &Float, ctx: &PrecisionContext) -> Result<QuadratureResult>
where
    F: FnMut(&Float) -> Result<Complex>,
{
    let wp = ctx.bits() + GUARD_BITS;
    if a >= b {
        return Err(Error::Domain("tanh-sinh needs a < b".into()));
    }
    let a = Float::with_val(wp, a);
    let b = Float::with_val(wp, b);
    let width = Float::with_val(wp, &b - &a);
    let pi = pi(wp);
    let ln2 = Float::with_val(wp, rug::float::Constant::Log2);
    let t_max = (Float::with_val(wp, (wp + 20) * 2) * &ln2 / &pi).asinh();
    let tol = ctx.quad_rel_tol();

    // Contribution of the node pair at ±t.
    let mut pair = |t: &Float, acc: &mut Accumulator| -> Result<()> {
        let u = Float::with_val(wp, t.sinh_ref()) * &pi;
        let u = u.exp();
        let u1 = Float::with_val(wp, &u + 1u32);
        let off = Float::with_val(wp, &width / &u1);
        let w = Float::with_val(wp, t.cosh_ref()) * &pi * &u / Float::with_val(wp, u1.square_ref()) * &width;
        if w.is_zero() || off.is_zero() {
            return Ok(());
        }
        let xl = Float::with_val(wp, &a + &off);
        let xr = Float::with_val(wp, &b - &off);
        if xl > a {
            let v = f(&xl)?;
            acc.push(&Complex::with_val(wp, &v * &w));
        }
        if t.is_zero() {
            return Ok(());
        }
        if xr < b {
            let v = f(&xr)?;
            acc.push(&Complex::with_val(wp, &v * &w));
        }
        Ok(())
    };

    let mut acc = Accumulator::new(wp);
    let mut h = Float::with_val(wp, 1);
    let mut j: u32 = 0;
    loop {
        let t = Float::with_val(wp, &h * j);
        if t > t_max {
            break;
        }
        pair(&t, &mut acc)?;
        j += 1;
    }
    let mut prev = Complex::with_val(wp, &acc.sum * &h);
    for level in 1..=ctx.quad_max_levels() {
        h >>= 1;
        let mut j: u32 = 1;
        loop {
            let t = Float::with_val(wp, &h * j);
            if t > t_max {
                break;
            }
            pair(&t, &mut acc)?;
            j += 2;
        }
        let cur = Complex::with_val(wp, &acc.sum * &h);
        let abs_total = Float::with_val(wp, &acc.abs_sum * &h);
        let (ok, rel) = converged(&prev, &cur, &abs_total, &tol, wp);
        if ok && level >= 3 {
            return Ok(QuadratureResult { value: cur, est_rel_err: rel, levels_used: level, abs_sum: abs_total });
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!("tanh-sinh did not reach 2^{} in {} levels", ctx.quad_tol_log2(), ctx.quad_max_levels())))
}

/// Exp-sinh rule on `[a, ∞)` for integrands decaying at least exponentially.
pub fn exp_sinh<F>(mut f: F, a: &Float, ctx: &PrecisionContext) -> Result<QuadratureResult>
where
    F: FnMut(&Float) -> Result<Complex>,
{
    let wp = ctx.bits() + GUARD_BITS;
    let a = Float::with_val(wp, a);
    let pi = pi(wp);
    let half_pi = Float::with_val(wp, &pi / 2u32);
    let ln2 = Float::with_val(wp, rug::float::Constant::Log2);
    let t_min = -(Float::with_val(wp, (wp + 20) * 4) * &ln2 / &pi).asinh();
    let tol = ctx.quad_rel_tol();

    let mut term = |t: &Float| -> Result<Complex> {
        let e = (Float::with_val(wp, t.sinh_ref()) * &half_pi).exp();
        let w = Float::with_val(wp, t.cosh_ref()) * &half_pi * &e;
        let x = Float::with_val(wp, &a + &e);
        if w.is_zero() || x == a {
            return Ok(Complex::new(wp));
        }
        let v = f(&x)?;
        Ok(Complex::with_val(wp, &v * &w))
    };

    // Level 0 fixes the truncation window by scanning outward from t = 0.
    let mut acc = Accumulator::new(wp);
    let mut h = Float::with_val(wp, 1);
    let negligible = |m: &Float, acc: &Accumulator| -> bool {
        !acc.abs_sum.is_zero() && *m < Float::with_val(wp, &acc.abs_sum >> (wp as i32 + 4))
    };
    let v = term(&Float::new(wp))?;
    acc.push(&v);
    let mut t_hi = Float::new(wp);
    let mut quiet = 0;
    for j in 1..64u32 {
        let t = Float::with_val(wp, j);
        let v = term(&t)?;
        let m = acc.push(&v);
        t_hi = t;
        quiet = if negligible(&m, &acc) { quiet + 1 } else { 0 };
        if quiet >= 2 {
            break;
        }
    }
    if quiet < 2 {
        return Err(Error::NoConvergence("exp-sinh integrand does not decay".into()));
    }
    let mut t_lo = Float::new(wp);
    let mut j: i32 = -1;
    loop {
        let t = Float::with_val(wp, j);
        if t < t_min {
            break;
        }
        let v = term(&t)?;
        acc.push(&v);
        t_lo = t;
        j -= 1;
    }
    let mut prev = Complex::with_val(wp, &acc.sum * &h);
    for level in 1..=ctx.quad_max_levels() {
        h >>= 1;
        let mut t = Float::with_val(wp, &t_lo + &h);
        while t < t_hi {
            let v = term(&t)?;
            acc.push(&v);
            t += Float::with_val(wp, &h * 2u32);
        }
        let cur = Complex::with_val(wp, &acc.sum * &h);
        let abs_total = Float::with_val(wp, &acc.abs_sum * &h);
        let (ok, rel) = converged(&prev, &cur, &abs_total, &tol, wp);
        if ok && level >= 3 {
            return Ok(QuadratureResult { value: cur, est_rel_err: rel, levels_used: level, abs_sum: abs_total });
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!("exp-sinh did not reach 2^{} in {} levels", ctx.quad_tol_log2(), ctx.quad_max_levels())))
}

/// `∫_0^∞ f` split at `split > 0`: tanh-sinh on `[0, split]` and exp-sinh on
/// the tail. Used for integrands with an interior peak.
pub fn half_line<F>(mut f: F, split: &Float, ctx: &PrecisionContext) -> Result<QuadratureResult>
where
    F: FnMut(&Float) -> Result<Complex>,
{
    let wp = ctx.bits() + GUARD_BITS;
    let zero = Float::new(wp);
    let head = tanh_sinh(&mut f, &zero, split, ctx)?;
    let tail = exp_sinh(&mut f, split, ctx)?;
    let value = Complex::with_val(wp, &head.value + &tail.value);
    let abs_sum = Float::with_val(wp, &head.abs_sum + &tail.abs_sum);
    let size = Float::with_val(wp, value.abs_ref());
    let err_abs = Float::with_val(wp, &head.est_rel_err * Float::with_val(wp, head.value.abs_ref()))
        + Float::with_val(wp, &tail.est_rel_err * Float::with_val(wp, tail.value.abs_ref()));
    let est_rel_err = if size.is_zero() { err_abs } else { err_abs / size };
    Ok(QuadratureResult { value, est_rel_err, levels_used: head.levels_used.max(tail.levels_used), abs_sum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(192).unwrap()
    }

    fn close(a: &Complex, b: &Float, tol: f64) -> bool {
        let d = Float::with_val(256, Complex::with_val(256, a - b).abs_ref());
        (d / Float::with_val(256, b.abs_ref())).to_f64() < tol
    }

    #[test]
    fn polynomial_and_endpoint_singularity() {
        let c = ctx();
        let zero = Float::new(192);
        let one = Float::with_val(192, 1);
        let r = tanh_sinh(|x| Ok(Complex::with_val(192, x.square_ref())), &zero, &one, &c).unwrap();
        assert!(close(&r.value, &(Float::with_val(192, 1) / 3u32), 1e-50));
        // ∫_0^1 x^{-1/2} dx = 2
        let r = tanh_sinh(|x| Ok(Complex::with_val(192, x.clone().sqrt().recip())), &zero, &one, &c).unwrap();
        assert!(close(&r.value, &Float::with_val(192, 2), 1e-50));
        assert!(r.est_rel_err.to_f64() < 1e-50);
    }

    #[test]
    fn half_line_rules() {
        let c = ctx();
        let zero = Float::new(192);
        // ∫_0^∞ e^{-x} = 1
        let r = exp_sinh(|x| Ok(Complex::with_val(192, (-x.clone()).exp())), &zero, &c).unwrap();
        assert!(close(&r.value, &Float::with_val(192, 1), 1e-50));
        // ∫_0^∞ x^{29} e^{-x} = 29!, peaked at 29
        let split = Float::with_val(192, 29);
        let r = half_line(
            |x| Ok(Complex::with_val(192, Float::with_val(192, x.clone().ln() * 29u32 - x).exp())),
            &split,
            &c,
        )
        .unwrap();
        let fact = Float::with_val(192, Float::factorial(29));
        assert!(close(&r.value, &fact, 1e-50));
    }

    #[test]
    fn complex_oscillatory_integrand() {
        // ∫_0^∞ e^{-(1-2i)x} dx = 1/(1-2i)
        let c = ctx();
        let zero = Float::new(192);
        let k = Complex::with_val(192, (-1, 2));
        let r = exp_sinh(|x| Ok(Complex::with_val(192, &k * x).exp()), &zero, &c).unwrap();
        let exact = Complex::with_val(192, (1, 0)) / Complex::with_val(192, (1, -2));
        let d = Float::with_val(192, Complex::with_val(192, &r.value - &exact).abs_ref());
        assert!(d.to_f64() < 1e-50);
    }

    #[test]
    fn errors_propagate() {
        let c = ctx();
        let zero = Float::new(192);
        let one = Float::with_val(192, 1);
        let r = tanh_sinh(|_| Err(Error::Overflow("x".into())), &zero, &one, &c);
        assert!(matches!(r, Err(Error::Overflow(_))));
        assert!(tanh_sinh(|_| Ok(Complex::new(192)), &one, &zero, &c).is_err());
    }
}
