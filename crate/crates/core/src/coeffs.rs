//! Exact expansion coefficients `b_n(-λ)` and Stirling coefficients `γ_k`.
//!
//! Everything here is exact rational arithmetic. Three independent routes
//! produce `b_n(-λ)`:
//!
//! * the power route `(λ+1)^n n! [t^n] g(t)^{n+1}` with
//!   `g(t) = (λ+1)t/(λe^t + t - λ)`, run either over rationals or over
//!   polynomials in `μ = λ/(λ+1)`;
//! * series reversion of `τ = (1-μ)t + μ(e^t - 1)`, which yields all
//!   polynomials up to a given degree in one pass;
//! * an integer recurrence for a fixed rational `λ = p/q`, used for tables.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Commutative ring of series coefficients.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Multiplicative inverse when it exists in the ring.
    fn try_inv(&self) -> Option<Self>;
    fn scale(&self, q: &Rational) -> Self;
}

impl Ring for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn one() -> Self {
        Rational::from(1)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn try_inv(&self) -> Option<Self> {
        (*self != 0).then(|| Rational::from(self.recip_ref()))
    }
    fn scale(&self, q: &Rational) -> Self {
        Rational::from(self * q)
    }
}

/// Polynomial with rational coefficients, lowest degree first, no trailing
/// zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// The indeterminate itself.
    pub fn x() -> Self {
        Self::new(vec![Rational::new(), Rational::from(1)])
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Rational {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }
}

impl Ring for Poly {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(Rational::from(1))
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|j| self.coeff(j) + o.coeff(j)).collect())
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|j| self.coeff(j) - o.coeff(j)).collect())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Self::new(out)
    }
    fn try_inv(&self) -> Option<Self> {
        match self.coeffs.as_slice() {
            [c] if *c != 0 => Some(Self::constant(Rational::from(c.recip_ref()))),
            _ => None,
        }
    }
    fn scale(&self, q: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| Rational::from(c * q)).collect())
    }
}

/// Truncated power series `Σ_{j≤M} c_j t^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<C: Ring> {
    coeffs: Vec<C>,
}

pub type RationalSeries = Series<Rational>;

impl<C: Ring> Series<C> {
    /// Series from explicit coefficients; an empty list means the order-0 zero
    /// series.
    pub fn new(mut coeffs: Vec<C>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(C::zero());
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> C {
        self.coeffs.get(j).cloned().unwrap_or_else(C::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new((0..=order).map(|j| self.coeff(j)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.order().min(o.order());
        Self::new((0..=m).map(|j| self.coeffs[j].add(&o.coeffs[j])).collect())
    }

    /// Product truncated at the smaller of the two orders.
    pub fn mul(&self, o: &Self) -> Self {
        let m = self.order().min(o.order());
        let mut out = vec![C::zero(); m + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(m + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(m + 1 - i) {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0]
            .try_inv()
            .ok_or_else(|| Error::Singular("series reciprocal needs an invertible constant term".into()))?;
        let m = self.order();
        let mut out: Vec<C> = Vec::with_capacity(m + 1);
        out.push(inv0.clone());
        for k in 1..=m {
            let mut acc = C::zero();
            for i in 1..=k {
                acc = acc.add(&self.coeffs[i].mul(&out[k - i]));
            }
            out.push(C::zero().sub(&acc).mul(&inv0));
        }
        Ok(Self::new(out))
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::new(
            std::iter::once(C::one()).chain(std::iter::repeat(C::zero()).take(self.order())).collect(),
        );
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `exp(self)` for a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Domain("series exponential needs a zero constant term".into()));
        }
        let m = self.order();
        let mut out = vec![C::one()];
        for k in 1..=m {
            let mut acc = C::zero();
            for j in 1..=k {
                acc = acc.add(&self.coeffs[j].mul(&out[k - j]).scale(&Rational::from(j as u64)));
            }
            out.push(acc.scale(&Rational::from((1, k as u64))));
        }
        Ok(Self::new(out))
    }
}

/// `Σ_{j=1}^{M} t^j/(j+1)!`, the tail of `(e^t - 1 - t)/t` that drives `g`.
fn exp_tail(order: usize) -> RationalSeries {
    let mut coeffs = vec![Rational::new()];
    let mut fact = Integer::from(1);
    for j in 1..=order {
        fact *= (j + 1) as u64;
        coeffs.push(Rational::from((Integer::from(1), fact.clone())));
    }
    Series::new(coeffs)
}

/// Taylor coefficients of `g(t) = (λ+1)t/(λe^t + t - λ)` about `t = 0` through
/// order `M`.
pub fn series_exp_kernel(lambda: &Rational, order: usize) -> Result<RationalSeries> {
    if *lambda <= 0 {
        return Err(Error::Domain("λ must be positive".into()));
    }
    let mu = Rational::from(lambda / Rational::from(lambda + 1u32));
    let tail = exp_tail(order);
    let denom = Series::new(
        tail.coeffs().iter().enumerate().map(|(j, c)| if j == 0 { Rational::from(1) } else { c.mul(&mu) }).collect(),
    );
    denom.reciprocal()
}

/// `b_n(-λ)` exactly, by the power route over rationals.
pub fn b_coeff(n: usize, lambda: &Rational) -> Result<Rational> {
    let g = series_exp_kernel(lambda, n)?;
    let c = g.pow(n as u32 + 1).coeff(n);
    let scale = Rational::from(lambda + 1u32).pow_int(n as i32) * Integer::from(Integer::factorial(n as u32));
    Ok(c * scale)
}

trait PowInt {
    fn pow_int(self, n: i32) -> Rational;
}

impl PowInt for Rational {
    fn pow_int(self, n: i32) -> Rational {
        use rug::ops::Pow;
        Rational::from(Pow::pow(&self, n))
    }
}

/// `b_n(-λ)` as a polynomial in `λ` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffPolynomial {
    pub n: usize,
    #[serde(with = "rational_strings")]
    pub coeffs: Vec<Rational>,
}

mod rational_strings {
    use rug::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|q| q.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| Rational::from_str_radix(s, 10).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl CoeffPolynomial {
    fn from_mu_poly(n: usize, q: &Poly) -> Self {
        // n! Σ_j q_j λ^j (λ+1)^{n-j}, since (λ+1)^n μ^j = λ^j (λ+1)^{n-j}.
        let one_plus = Poly::new(vec![Rational::from(1), Rational::from(1)]);
        let lam = Poly::x();
        let mut acc = Poly::zero();
        for (j, qj) in q.coeffs().iter().enumerate() {
            if *qj == 0 {
                continue;
            }
            let term = lam.pow(j as u32).mul(&one_plus.pow((n - j) as u32)).scale(qj);
            acc = acc.add(&term);
        }
        let fact = Rational::from(Integer::from(Integer::factorial(n as u32)));
        let p = acc.scale(&fact);
        Self { n, coeffs: p.coeffs().to_vec() }
    }

    pub fn poly(&self) -> Poly {
        Poly::new(self.coeffs.clone())
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly().degree()
    }

    pub fn eval(&self, lambda: &Rational) -> Rational {
        self.poly().eval(lambda)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("string fields serialise")
    }
}

impl fmt::Display for CoeffPolynomial {
    /// Conventional notation such as `-6λ³ + 8λ² - λ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let mag = Rational::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag == 1;
            if !unit || j == 0 {
                write!(f, "{mag}")?;
            }
            if j > 0 {
                write!(f, "λ")?;
                if j > 1 {
                    let exp: String = j.to_string().chars().map(|d| SUP[d.to_digit(10).unwrap() as usize]).collect();
                    write!(f, "{exp}")?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `b_n(-λ)` as a polynomial, by the power route over `Q[μ]`.
pub fn b_coeff_polynomial(n: usize) -> CoeffPolynomial {
    let mu = Poly::x();
    let tail = exp_tail(n);
    let denom = Series::new(
        tail.coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { Poly::one() } else { mu.scale(c) })
            .collect(),
    );
    let g = denom.reciprocal().expect("constant term is one");
    let q = g.pow(n as u32 + 1).coeff(n);
    CoeffPolynomial::from_mu_poly(n, &q)
}

/// All polynomials `b_0(-λ), …, b_{n_max}(-λ)` by reverting
/// `τ = (1-μ)t + μ(e^t - 1)`.
///
/// With `t(τ) = Σ c_m τ^m` one has `b_n(-λ) = (λ+1)^n n! (n+1) c_{n+1}`. The
/// reversion runs online: `Q_m = (m+1)c_{m+1}` and `E` holds the series of
/// `e^{t(τ)}`, so `Q_m = -μ Σ_{i=1}^m E_i Q_{m-i}` and
/// `E_{m+1} = Σ_{i=0}^m E_i Q_{m-i}/(m+1)`.
pub fn b_coeff_polynomials(n_max: usize) -> Vec<CoeffPolynomial> {
    let mu = Poly::x();
    let neg_mu = Poly::zero().sub(&mu);
    let mut q: Vec<Poly> = vec![Poly::one()];
    let mut e: Vec<Poly> = vec![Poly::one(), Poly::one()];
    for m in 1..=n_max {
        let mut acc = Poly::zero();
        for i in 1..=m {
            acc = acc.add(&e[i].mul(&q[m - i]));
        }
        q.push(neg_mu.mul(&acc));
        let mut next = Poly::zero();
        for i in 0..=m {
            next = next.add(&e[i].mul(&q[m - i]));
        }
        e.push(next.scale(&Rational::from((1, m as u64 + 1))));
    }
    q.iter().enumerate().map(|(n, qn)| CoeffPolynomial::from_mu_poly(n, qn)).collect()
}

fn table_cache() -> &'static Mutex<HashMap<Rational, Vec<Rational>>> {
    static CACHE: OnceLock<Mutex<HashMap<Rational, Vec<Rational>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `b_0(-λ), …, b_{n_max}(-λ)` for a fixed rational `λ = p/q`.
///
/// Uses the integer recurrence
/// `B_m = -m p B_{m-1} + q Σ_{j=0}^{m-2} C(m,j) B_j B_{m-1-j}` with
/// `b_m = B_m / q^m`. Results are cached per `λ`.
pub fn coefficient_table(lambda: &Rational, n_max: usize) -> Result<Vec<Rational>> {
    if *lambda <= 0 {
        return Err(Error::Domain("λ must be positive".into()));
    }
    {
        let cache = table_cache().lock().expect("coefficient cache poisoned");
        if let Some(t) = cache.get(lambda) {
            if t.len() > n_max {
                return Ok(t[..=n_max].to_vec());
            }
        }
    }
    let p = Integer::from(lambda.numer());
    let qd = Integer::from(lambda.denom());
    let mut big: Vec<Integer> = vec![Integer::from(1)];
    // binomial row C(m, ·), updated in place
    let mut binom: Vec<Integer> = vec![Integer::from(1)];
    for m in 1..=n_max {
        let mut next = vec![Integer::from(1); m + 1];
        for j in 1..m {
            next[j] = Integer::from(&binom[j - 1] + &binom[j]);
        }
        binom = next;
        let mut conv = Integer::new();
        for j in 0..m.saturating_sub(1) {
            let t = Integer::from(&big[j] * &big[m - 1 - j]);
            conv += t * &binom[j];
        }
        let lead = Integer::from(&p * &big[m - 1]) * (m as u64);
        big.push(conv * &qd - lead);
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut qpow = Integer::from(1);
    for b in big {
        out.push(Rational::from((b, qpow.clone())));
        qpow *= &qd;
    }
    table_cache().lock().expect("coefficient cache poisoned").insert(lambda.clone(), out.clone());
    Ok(out)
}

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]))
}

/// Bernoulli numbers `B_0 … B_m` (with `B_1 = -1/2`).
pub fn bernoulli_numbers(m: usize) -> Vec<Rational> {
    let mut b = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    while b.len() <= m {
        let k = b.len();
        // Σ_{j=0}^{k} C(k+1, j) B_j = 0
        let mut acc = Rational::new();
        let mut c = Integer::from(1);
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from(bj * &c);
            c *= (k + 1 - j) as u64;
            c /= (j + 1) as u64;
        }
        b.push(-acc / Rational::from(k as u64 + 1));
    }
    b[..=m].to_vec()
}

fn stirling_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// Stirling coefficients `γ_0 … γ_m` in the convention
/// `Γ*(z) ~ Σ (-1)^k γ_k z^{-k}`.
pub fn stirling_gammas(m: usize) -> Vec<Rational> {
    {
        let c = stirling_cache().lock().expect("stirling cache poisoned");
        if c.len() > m {
            return c[..=m].to_vec();
        }
    }
    // log Γ*(z) = Σ_j B_{2j}/(2j(2j-1)) z^{1-2j}, exponentiated in w = 1/z.
    let bern = bernoulli_numbers(m + 1);
    let mut log_series = vec![Rational::new(); m + 1];
    for j in 1.. {
        let k = 2 * j - 1;
        if k > m {
            break;
        }
        log_series[k] = Rational::from(&bern[2 * j] / Rational::from((2 * j * (2 * j - 1)) as u64));
    }
    let e = Series::new(log_series).exp().expect("zero constant term");
    let out: Vec<Rational> = e
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 1 { Rational::from(-c) } else { c.clone() })
        .collect();
    let mut cache = stirling_cache().lock().expect("stirling cache poisoned");
    if cache.len() < out.len() {
        *cache = out.clone();
    }
    out
}

pub fn stirling_gamma(k: usize) -> Rational {
    stirling_gammas(k)[k].clone()
}
