//! Precision handling and the elementary special functions shared by every
//! other module: principal Lambert W, complex error function, `ζ(k)` at
//! integers and the real gamma function.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::error::{Error, Result};

/// Working precision plus quadrature settings, passed explicitly to every
/// floating evaluation.
///
/// The quadrature tolerance is stored as a base-2 exponent, so a context with
/// `quad_tol_log2 = -240` asks for relative error `2^-240`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionContext {
    bits: u32,
    quad_tol_log2: i32,
    quad_max_levels: u32,
}

impl PrecisionContext {
    pub const MIN_BITS: u32 = 64;
    /// Default gap between working precision and quadrature tolerance.
    pub const DEFAULT_TOL_GAP: i32 = 16;
    pub const DEFAULT_MAX_LEVELS: u32 = 16;

    pub fn new(bits: u32) -> Result<Self> {
        Self::with_quadrature(bits, -(bits as i32) + Self::DEFAULT_TOL_GAP, Self::DEFAULT_MAX_LEVELS)
    }

    pub fn with_quadrature(bits: u32, quad_tol_log2: i32, quad_max_levels: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::Precision(format!("precision {bits} below {} bits", Self::MIN_BITS)));
        }
        if quad_tol_log2 < -(bits as i32) + 8 {
            return Err(Error::Precision(format!(
                "quadrature tolerance 2^{quad_tol_log2} is below 2^{} for {bits}-bit arithmetic",
                -(bits as i32) + 8
            )));
        }
        if quad_tol_log2 >= 0 {
            return Err(Error::Precision("quadrature tolerance must be below 1".into()));
        }
        if quad_max_levels == 0 {
            return Err(Error::Precision("at least one refinement level is required".into()));
        }
        Ok(Self { bits, quad_tol_log2, quad_max_levels })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn quad_tol_log2(&self) -> i32 {
        self.quad_tol_log2
    }

    pub fn quad_max_levels(&self) -> u32 {
        self.quad_max_levels
    }

    /// Relative quadrature tolerance `2^quad_tol_log2`.
    pub fn quad_rel_tol(&self) -> Float {
        Float::with_val(self.bits, 1) << self.quad_tol_log2
    }

    /// Same settings at a different precision; the tolerance keeps its
    /// distance from the working precision.
    pub fn at_bits(&self, bits: u32) -> Self {
        let bits = bits.max(Self::MIN_BITS);
        let gap = self.quad_tol_log2 + self.bits as i32;
        Self { bits, quad_tol_log2: -(bits as i32) + gap.max(8), quad_max_levels: self.quad_max_levels }
    }

    /// Context with `extra` additional bits.
    pub fn widened(&self, extra: u32) -> Self {
        self.at_bits(self.bits + extra)
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn rational_to_float(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

pub fn complex_is_finite(z: &Complex) -> bool {
    z.real().is_finite() && z.imag().is_finite()
}

pub(crate) fn ensure_finite(z: Complex, what: &str) -> Result<Complex> {
    if complex_is_finite(&z) {
        Ok(z)
    } else {
        Err(Error::Overflow(format!("{what} is not finite")))
    }
}

pub(crate) fn ensure_finite_real(x: Float, what: &str) -> Result<Float> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Overflow(format!("{what} is not finite")))
    }
}

/// `|z|` at precision `prec`.
pub fn cabs(z: &Complex, prec: u32) -> Float {
    Float::with_val(prec, z.abs_ref())
}

/// Principal argument of `z` at precision `prec`.
pub fn carg(z: &Complex, prec: u32) -> Float {
    Float::with_val(prec, z.arg_ref())
}

/// `r·e^{iφ}`.
pub fn from_polar(r: &Float, phi: &Float, prec: u32) -> Complex {
    let (s, c) = Float::with_val(prec, phi).sin_cos(Float::new(prec));
    Complex::with_val(prec, (Float::with_val(prec, r * &c), Float::with_val(prec, r * &s)))
}

/// Decimal scientific form `±0.d₁d₂…dₖeE` with `digits` significant digits,
/// the normalisation used in printed tables.
pub fn format_sci(x: &Float, digits: usize) -> String {
    sci_string(decimal_parts(x, digits, rug::float::Round::Nearest))
}

/// As [`format_sci`] but cutting off surplus digits instead of rounding,
/// which is how printed tables commonly shorten long values.
pub fn format_sci_truncated(x: &Float, digits: usize) -> String {
    sci_string(decimal_parts(x, digits, rug::float::Round::Zero))
}

fn sci_string((neg, mantissa, exp): (bool, String, i64)) -> String {
    if mantissa.is_empty() {
        return "0".into();
    }
    format!("{}0.{}e{}", if neg { "-" } else { "" }, mantissa, exp)
}

/// Sign, significant digits and exponent `E` with `x ≈ ±0.digits × 10^E`.
/// Zero and non-finite values yield an empty digit string.
pub fn decimal_parts(x: &Float, digits: usize, round: rug::float::Round) -> (bool, String, i64) {
    if x.is_zero() || !x.is_finite() {
        return (false, String::new(), 0);
    }
    let s = x.to_string_radix_round(10, Some(digits.max(1)), round);
    let neg = s.starts_with('-');
    let body = s.trim_start_matches('-');
    let (mant, e) = match body.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let point = mant.find('.').unwrap_or(mant.len()) as i64;
    let digits_only: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let lead = digits_only.len() - digits_only.trim_start_matches('0').len();
    let trimmed = digits_only[lead..].to_string();
    (neg, trimmed, e + point - lead as i64)
}

/// Principal branch of the Lambert W function.
///
/// Halley iteration from a branch-point series seed near `-1/e`, a
/// logarithmic seed for large arguments and `log(1+x)` in between.
pub fn lambert_w0(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let wp = ctx.bits() + 32;
    let x = Float::with_val(wp, x);
    if !x.is_finite() {
        return Err(Error::Domain("Lambert W of a non-finite value".into()));
    }
    if x.is_zero() {
        return Ok(Float::new(ctx.bits()));
    }
    let one = Float::with_val(wp, 1);
    let e = one.clone().exp();
    let branch = -Float::with_val(wp, e.recip_ref());
    // Values rounded from -1/e at the caller's precision may sit a hair below it.
    let slack = Float::with_val(wp, 1) >> (ctx.bits() as i32 - 2);
    if x < Float::with_val(wp, &branch - &slack) {
        return Err(Error::Domain("Lambert W0 requires x >= -1/e".into()));
    }
    if x <= branch {
        return Ok(Float::with_val(ctx.bits(), -1));
    }

    let mut w = if x < -0.25 {
        // w ≈ -1 + p - p²/3 + 11p³/72 with p = sqrt(2(ex + 1))
        let p = Float::with_val(wp, &e * &x) + 1u32;
        let p = Float::with_val(wp, p * 2u32).sqrt();
        let p2 = Float::with_val(wp, p.square_ref());
        let p3 = Float::with_val(wp, &p2 * &p);
        Float::with_val(wp, &p - 1u32) - p2 / 3u32 + p3 * 11u32 / 72u32
    } else if x < 3 {
        Float::with_val(wp, &x + 1u32).ln()
    } else {
        let l1 = x.clone().ln();
        let l2 = l1.clone().ln();
        Float::with_val(wp, &l1 - &l2) + Float::with_val(wp, &l2 / &l1)
    };

    let tol = Float::with_val(wp, 1) >> (ctx.bits() as i32 + 8);
    for _ in 0..200 {
        let ew = w.clone().exp();
        let f = Float::with_val(wp, &w * &ew) - &x;
        let wp1 = Float::with_val(wp, &w + 1u32);
        if wp1.is_zero() {
            break;
        }
        let num = f.clone();
        let corr = Float::with_val(wp, &w + 2u32) * &f / Float::with_val(wp, &wp1 * 2u32);
        let den = Float::with_val(wp, &ew * &wp1) - corr;
        let step = num / den;
        w -= &step;
        let scale = Float::with_val(wp, w.abs_ref()).max(&(Float::with_val(wp, 1) >> ctx.bits()));
        if Float::with_val(wp, step.abs_ref()) <= Float::with_val(wp, &tol * &scale) {
            return Ok(Float::with_val(ctx.bits(), &w));
        }
    }
    Err(Error::NoConvergence("Lambert W Halley iteration".into()))
}

/// Error function of a complex argument.
///
/// Maclaurin series (with guard bits covering the `e^{|z|²}` cancellation)
/// when `|z| <= 6` or the argument is close to the imaginary axis, otherwise
/// `1 - erfc(z)` with the Laplace continued fraction. Results satisfy
/// `erf(-z) = -erf(z)` bit for bit.
pub fn erf_complex(z: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    if !complex_is_finite(z) {
        return Err(Error::Domain("erf of a non-finite value".into()));
    }
    if z.real().is_zero() && z.imag().is_zero() {
        return Ok(Complex::new(prec));
    }
    let flip = z.real().is_sign_negative() && !z.real().is_zero()
        || (z.real().is_zero() && z.imag().is_sign_negative());
    let zz = if flip { Complex::with_val(prec + 32, -z) } else { Complex::with_val(prec + 32, z) };
    let re = zz.real().to_f64();
    let im = zz.imag().to_f64();
    let modulus = re.hypot(im);

    let value = if modulus <= 6.0 || re < 2.0 {
        let guard = (modulus * modulus * std::f64::consts::LOG2_E).ceil();
        if guard > (1u64 << 20) as f64 {
            return Err(Error::Overflow("erf argument too far from the real axis".into()));
        }
        erf_maclaurin(&zz, prec + 32 + guard as u32)
    } else {
        let wp = prec + 32;
        let erfc = erfc_continued_fraction(&zz, wp)?;
        Complex::with_val(wp, 1) - erfc
    };
    let value = Complex::with_val(prec, value);
    let value = ensure_finite(value, "erf")?;
    Ok(if flip { -value } else { value })
}

fn erf_maclaurin(z: &Complex, wp: u32) -> Complex {
    let z = Complex::with_val(wp, z);
    let neg_z2 = -Complex::with_val(wp, z.square_ref());
    let mut term = z.clone();
    let mut sum = z.clone();
    let mut k: u32 = 0;
    loop {
        k += 1;
        term *= &neg_z2;
        term /= k;
        let contrib = Complex::with_val(wp, &term / (2 * k + 1));
        sum += &contrib;
        let c = Float::with_val(wp, contrib.abs_ref());
        let s = Float::with_val(wp, sum.abs_ref());
        if c.is_zero() || (Float::with_val(wp, &c << wp as i32) < s && k > 2) {
            break;
        }
    }
    let two_over_sqrt_pi = Float::with_val(wp, 2) / pi(wp).sqrt();
    sum * two_over_sqrt_pi
}

fn erfc_continued_fraction(z: &Complex, wp: u32) -> Result<Complex> {
    // erfc z = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))), modified Lentz.
    let tiny = Float::with_val(wp, 1) >> (wp as i32 * 2);
    let tiny_c = Complex::with_val(wp, (&tiny, 0));
    let mut f = Complex::with_val(wp, z);
    let mut c = f.clone();
    let mut d = Complex::new(wp);
    let eps = Float::with_val(wp, 1) >> (wp as i32 - 4);
    for k in 1..200_000u32 {
        let a = Float::with_val(wp, k) / 2u32;
        d = Complex::with_val(wp, &d * &a) + z;
        if d.real().is_zero() && d.imag().is_zero() {
            d = tiny_c.clone();
        }
        d = d.recip();
        c = Complex::with_val(wp, &a / &c) + z;
        if c.real().is_zero() && c.imag().is_zero() {
            c = tiny_c.clone();
        }
        let delta = Complex::with_val(wp, &c * &d);
        f *= &delta;
        let dev = Float::with_val(wp, (delta - 1u32).abs_ref());
        if dev < eps {
            let z2 = Complex::with_val(wp, z.square_ref());
            let pref = (-z2).exp() / pi(wp).sqrt();
            return Ok(pref / f);
        }
    }
    Err(Error::NoConvergence("erfc continued fraction".into()))
}

/// Riemann zeta at an integer `k >= 2`.
pub fn zeta_int(k: u32, ctx: &PrecisionContext) -> Result<Float> {
    if k < 2 {
        return Err(Error::Domain(format!("zeta({k}) requested; need k >= 2")));
    }
    Ok(Float::with_val(ctx.bits(), Float::zeta_u(k)))
}

/// Gamma function of a positive real argument.
pub fn gamma_real(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::Domain("gamma_real requires x > 0".into()));
    }
    ensure_finite_real(Float::with_val(ctx.bits(), x.gamma_ref()), "gamma")
}

/// `Γ(n + 1/2)/Γ(n - k + 1/2)` as an exact rational `(n-1/2)(n-3/2)…(n-k+1/2)`.
pub fn half_integer_rising_ratio(n: u32, k: u32) -> Rational {
    let mut r = Rational::from(1);
    for j in 1..=k {
        r *= Rational::from((2 * n as i64 - 2 * j as i64 + 1, 2));
    }
    r
}

/// `x^n` for a real `x` and integer `n`.
pub fn powi(x: &Float, n: i32, prec: u32) -> Float {
    Float::with_val(prec, x.pow(n))
}

/// Serde helpers writing floats as decimal strings with 25 significant digits.
pub mod float_serde {
    use rug::Float;
    use serde::Serializer;

    pub fn to_decimal(x: &Float) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.to_string_radix(10, Some(25))
    }

    pub fn serialize<S: Serializer>(x: &Float, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_decimal(x))
    }

    /// Complex values as `{"re": "...", "im": "..."}`.
    pub mod complex {
        use rug::Complex;
        use serde::ser::SerializeStruct;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(z: &Complex, s: S) -> Result<S::Ok, S::Error> {
            let mut st = s.serialize_struct("Complex", 2)?;
            st.serialize_field("re", &super::to_decimal(z.real()))?;
            st.serialize_field("im", &super::to_decimal(z.imag()))?;
            st.end()
        }

        pub mod option {
            use rug::Complex;
            use serde::Serializer;

            pub fn serialize<S: Serializer>(z: &Option<Complex>, s: S) -> Result<S::Ok, S::Error> {
                match z {
                    Some(v) => super::serialize(v, s),
                    None => s.serialize_none(),
                }
            }
        }
    }

    pub mod option {
        use rug::Float;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(x: &Option<Float>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_str(&super::to_decimal(v)),
                None => s.serialize_none(),
            }
        }
    }
}
