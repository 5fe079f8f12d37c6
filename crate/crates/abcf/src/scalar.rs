//! Scalars on the extended real line: exact rationals, quadratic surds
//! `(p + q*sqrt(d))/r` and floats compared up to a tolerance.

use crate::error::ArithError;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Default comparison tolerance for floating scalars.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Square factors are stripped from radicands by trial division up to this
/// bound, which makes every radicand below `BOUND^3` square-free. Larger
/// radicands may keep a square factor; field identity is then decided by
/// testing whether the product of two radicands is a perfect square.
const SQUARE_FREE_BOUND: u64 = 2000;

/// A float together with the tolerance used when comparing it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approx {
    pub value: f64,
    pub eps: f64,
}

/// `(p + q*sqrt(d))/r` with `q != 0`, `r > 0`, `gcd(p,q,r) = 1`, `d > 1` not a square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    r: BigInt,
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(BigRational),
    Surd(Surd),
    Float(Approx),
}

/// Hashable identity of an exact scalar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactKey {
    Rational(BigRational),
    Surd(Surd),
    Infinity,
}

// The rational hash of num-rational walks the continued fraction of the value
// recursively; reduced numerator and denominator identify it just as well.
impl std::hash::Hash for ExactKey {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            ExactKey::Rational(r) => {
                r.numer().hash(state);
                r.denom().hash(state);
            }
            ExactKey::Surd(s) => s.hash(state),
            ExactKey::Infinity => {}
        }
    }
}

fn is_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    if &s * &s == *n {
        Some(s)
    } else {
        None
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SQUARE_FREE_BOUND as usize;
        let mut sieve = vec![true; n + 1];
        let mut out = Vec::new();
        for i in 2..=n {
            if sieve[i] {
                out.push(i as u64);
                (i * i..=n).step_by(i).for_each(|j| sieve[j] = false);
            }
        }
        out
    })
}

/// Splits `d = s^2 * d'` as far as trial division (plus a final square test) allows.
fn square_part(d: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut rest = d.clone();
    for &p in small_primes() {
        let sq = p * p;
        if BigInt::from(sq) > rest {
            break;
        }
        while (&rest % sq).is_zero() {
            rest /= sq;
            s *= p;
        }
    }
    if let Some(root) = is_square(&rest) {
        s *= &root;
        rest = BigInt::one();
    }
    (s, rest)
}

/// Sign of `a + b*sqrt(d)` for a non-square `d > 0`.
pub(crate) fn sign_lin(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    match (sa, sb) {
        (Sign::NoSign, _) => sb_to_ord(sb),
        (_, Sign::NoSign) => sb_to_ord(sa),
        _ if sa == sb => sb_to_ord(sa),
        _ => {
            // opposite signs: compare a^2 with b^2 d
            let lhs = a * a;
            let rhs = b * b * d;
            match lhs.cmp(&rhs) {
                Ordering::Greater => sb_to_ord(sa),
                Ordering::Less => sb_to_ord(sb),
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

fn sb_to_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// Sign of `a + b*sqrt(d1) + c*sqrt(d2)` where `d1*d2` is not a square.
fn sign_two_fields(a: &BigInt, b: &BigInt, d1: &BigInt, c: &BigInt, d2: &BigInt) -> Ordering {
    // sign of w = b sqrt(d1) + c sqrt(d2)
    let sw = {
        let (sb, sc) = (b.sign(), c.sign());
        if sb == Sign::NoSign {
            sb_to_ord(sc)
        } else if sc == Sign::NoSign || sb == sc {
            sb_to_ord(sb)
        } else {
            match (b * b * d1).cmp(&(c * c * d2)) {
                Ordering::Greater => sb_to_ord(sb),
                Ordering::Less => sb_to_ord(sc),
                Ordering::Equal => Ordering::Equal,
            }
        }
    };
    let sa = sb_to_ord(a.sign());
    if sw == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sw {
        return sw;
    }
    // opposite signs: compare a^2 with w^2 = b^2 d1 + c^2 d2 + 2bc sqrt(d1 d2)
    let lhs = a * a - b * b * d1 - c * c * d2;
    let coef = -(BigInt::from(2) * b * c);
    match sign_lin(&lhs, &coef, &(d1 * d2)) {
        Ordering::Greater => sa,
        Ordering::Less => sw,
        Ordering::Equal => Ordering::Equal,
    }
}

impl Surd {
    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }
    pub fn r(&self) -> &BigInt {
        &self.r
    }

    /// Normalizes `(p + q sqrt(d))/r` for an already reduced radicand `d`.
    fn normalized(mut p: BigInt, mut q: BigInt, d: BigInt, mut r: BigInt) -> Result<Scalar, ArithError> {
        if r.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if q.is_zero() {
            return Ok(Scalar::Rational(BigRational::new(p, r)));
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        Ok(Scalar::Surd(Surd { p, q, d, r }))
    }

    fn from_rational(x: &BigRational, d: &BigInt) -> Surd {
        Surd {
            p: x.numer().clone(),
            q: BigInt::zero(),
            d: d.clone(),
            r: x.denom().clone(),
        }
    }

    /// Rewrites `self` over the radicand `target` when both describe one field.
    fn over(&self, target: &BigInt) -> Option<Surd> {
        if &self.d == target {
            return Some(self.clone());
        }
        let k = is_square(&(&self.d * target))?;
        // sqrt(d) = k / target * sqrt(target)
        Some(Surd {
            p: &self.p * target,
            q: &self.q * &k,
            d: target.clone(),
            r: &self.r * target,
        })
    }

    fn align(x: &Surd, y: &Surd) -> Result<(Surd, Surd), ArithError> {
        if x.d == y.d {
            return Ok((x.clone(), y.clone()));
        }
        let target = if x.d < y.d { &x.d } else { &y.d };
        match (x.over(target), y.over(target)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(ArithError::MixedFields(x.d.clone(), y.d.clone())),
        }
    }

    /// Sign of the value.
    pub fn signum(&self) -> Ordering {
        sign_lin(&self.p, &self.q, &self.d)
    }

    fn cmp_surd(x: &Surd, y: &Surd) -> Ordering {
        if let Ok((a, b)) = Surd::align(x, y) {
            let p = &a.p * &b.r - &b.p * &a.r;
            let q = &a.q * &b.r - &b.q * &a.r;
            return sign_lin(&p, &q, &a.d);
        }
        let a = &x.p * &y.r - &y.p * &x.r;
        let b = &x.q * &y.r;
        let c = -(&y.q * &x.r);
        sign_two_fields(&a, &b, &x.d, &c, &y.d)
    }

    fn floor(&self) -> BigInt {
        let s = (&self.q * &self.q * &self.d).sqrt();
        let num = if self.q.is_positive() {
            &self.p + s
        } else {
            &self.p - s - BigInt::one()
        };
        num.div_floor(&self.r)
    }

    /// `floor(value * 2^k)` computed with integer square roots.
    pub fn scaled_floor(&self, k: u64) -> BigInt {
        let shifted = Surd {
            p: &self.p << k,
            q: &self.q << k,
            d: self.d.clone(),
            r: self.r.clone(),
        };
        shifted.floor()
    }

    fn to_f64(&self) -> f64 {
        let mut k: u64 = 80 + self.r.bits();
        loop {
            let n = self.scaled_floor(k);
            if n.bits() >= 64 || k > 4000 + self.r.bits() + self.q.bits() + self.d.bits() {
                let (m, e) = big_split(&n);
                return ldexp(m, e - k as i64);
            }
            k += 64;
        }
    }
}

/// `n = m * 2^e` with `m` holding the top 64 bits.
fn big_split(n: &BigInt) -> (f64, i64) {
    let shift = n.bits().saturating_sub(64);
    let top: BigInt = n >> shift;
    (top.to_f64().unwrap_or(f64::NAN), shift as i64)
}

fn big_to_f64(n: &BigInt) -> f64 {
    let (m, e) = big_split(n);
    ldexp(m, e)
}

fn ldexp(x: f64, e: i64) -> f64 {
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

fn rational_to_f64(x: &BigRational) -> f64 {
    let (n, d) = (x.numer(), x.denom());
    if n.bits() < 1000 && d.bits() < 1000 {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let k = (d.bits() as i64 - n.bits() as i64 + 80).max(0) as u64;
    let scaled = (n << k).div_floor(d);
    ldexp(big_to_f64(&scaled), -(k as i64))
}

enum Pair {
    Rat(BigRational, BigRational),
    Surd(Surd, Surd),
    Float(Approx, Approx),
}

fn coerce(x: &Scalar, y: &Scalar) -> Result<Pair, ArithError> {
    use Scalar::*;
    Ok(match (x, y) {
        (Rational(a), Rational(b)) => Pair::Rat(a.clone(), b.clone()),
        (Surd(a), Surd(b)) => {
            let (a, b) = crate::scalar::Surd::align(a, b)?;
            Pair::Surd(a, b)
        }
        (Rational(a), Surd(b)) => Pair::Surd(crate::scalar::Surd::from_rational(a, &b.d), b.clone()),
        (Surd(a), Rational(b)) => Pair::Surd(a.clone(), crate::scalar::Surd::from_rational(b, &a.d)),
        (Float(a), Float(b)) => Pair::Float(*a, *b),
        (Float(a), Rational(b)) => Pair::Float(*a, Approx { value: rational_to_f64(b), eps: a.eps }),
        (Rational(a), Float(b)) => Pair::Float(Approx { value: rational_to_f64(a), eps: b.eps }, *b),
        _ => return Err(ArithError::MixedBacking),
    })
}

impl Scalar {
    pub fn int(n: i64) -> Scalar {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn big_int(n: BigInt) -> Scalar {
        Scalar::Rational(BigRational::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn big_ratio(n: BigInt, d: BigInt) -> Result<Scalar, ArithError> {
        if d.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Scalar::Rational(BigRational::new(n, d)))
    }

    pub fn float(v: f64) -> Scalar {
        Scalar::Float(Approx { value: v, eps: DEFAULT_EPS })
    }

    pub fn float_eps(v: f64, eps: f64) -> Scalar {
        Scalar::Float(Approx { value: v, eps })
    }

    /// `(p + q*sqrt(d))/r`, reduced to canonical form (collapsing to a rational when possible).
    pub fn surd(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> Result<Scalar, ArithError> {
        if d.is_negative() {
            return Err(ArithError::Parse(format!("negative radicand {d}")));
        }
        if d.is_zero() {
            return Scalar::big_ratio(p, r);
        }
        let (s, rest) = square_part(&d);
        let q = q * s;
        if rest.is_one() {
            return Scalar::big_ratio(p + q, r);
        }
        Surd::normalized(p, q, rest, r)
    }

    pub fn zero() -> Scalar {
        Scalar::int(0)
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Float(_))
    }

    pub fn is_float(&self) -> bool {
        matches!(self, Scalar::Float(_))
    }

    /// Radicand of the field this scalar lives in, if irrational.
    pub fn radicand(&self) -> Option<&BigInt> {
        match self {
            Scalar::Surd(s) => Some(&s.d),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            Scalar::Float(a) => Some(a.eps),
            _ => None,
        }
    }

    /// Same float backing (tolerance) as `self`, used to lift exact constants.
    pub fn like(&self, v: f64) -> Scalar {
        match self {
            Scalar::Float(a) => Scalar::float_eps(v, a.eps),
            _ => Scalar::float(v),
        }
    }

    /// The integer `n` in the backing of `self`.
    pub fn like_int(&self, n: i64) -> Scalar {
        match self {
            Scalar::Float(a) => Scalar::float_eps(n as f64, a.eps),
            _ => Scalar::int(n),
        }
    }

    pub fn key(&self) -> Option<ExactKey> {
        match self {
            Scalar::Rational(r) => Some(ExactKey::Rational(r.clone())),
            Scalar::Surd(s) => Some(ExactKey::Surd(s.clone())),
            Scalar::Float(_) => None,
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            Scalar::Rational(r) => sb_to_ord(r.numer().sign()),
            Scalar::Surd(s) => s.signum(),
            Scalar::Float(a) => {
                if a.value.abs() <= a.eps {
                    Ordering::Equal
                } else if a.value > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Surd(s) => Scalar::Surd(Surd {
                p: -&s.p,
                q: -&s.q,
                d: s.d.clone(),
                r: s.r.clone(),
            }),
            Scalar::Float(a) => Scalar::Float(Approx { value: -a.value, eps: a.eps }),
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        match coerce(self, other)? {
            Pair::Rat(a, b) => Ok(Scalar::Rational(a + b)),
            Pair::Surd(x, y) => Surd::normalized(
                &x.p * &y.r + &y.p * &x.r,
                &x.q * &y.r + &y.q * &x.r,
                x.d,
                &x.r * &y.r,
            ),
            Pair::Float(a, b) => Ok(Scalar::Float(Approx { value: a.value + b.value, eps: a.eps.max(b.eps) })),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        match coerce(self, other)? {
            Pair::Rat(a, b) => Ok(Scalar::Rational(a * b)),
            Pair::Surd(x, y) => Surd::normalized(
                &x.p * &y.p + &x.q * &y.q * &x.d,
                &x.p * &y.q + &y.p * &x.q,
                x.d,
                &x.r * &y.r,
            ),
            Pair::Float(a, b) => Ok(Scalar::Float(Approx { value: a.value * b.value, eps: a.eps.max(b.eps) })),
        }
    }

    pub fn recip(&self) -> Result<Scalar, ArithError> {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    Err(ArithError::DivisionByZero)
                } else {
                    Ok(Scalar::Rational(r.recip()))
                }
            }
            Scalar::Surd(s) => {
                // r / (p + q sqrt d) = r (p - q sqrt d) / (p^2 - q^2 d)
                let den = &s.p * &s.p - &s.q * &s.q * &s.d;
                Surd::normalized(&s.r * &s.p, -(&s.r * &s.q), s.d.clone(), den)
            }
            Scalar::Float(a) => {
                if a.value == 0.0 {
                    Err(ArithError::DivisionByZero)
                } else {
                    Ok(Scalar::Float(Approx { value: 1.0 / a.value, eps: a.eps }))
                }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        self.mul(&other.recip()?)
    }

    /// Exact comparison for exact scalars (across quadratic fields too);
    /// tolerance comparison when a float is involved.
    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering, ArithError> {
        use Scalar::*;
        match (self, other) {
            (Rational(a), Rational(b)) => Ok(a.cmp(b)),
            (Surd(a), Surd(b)) => Ok(crate::scalar::Surd::cmp_surd(a, b)),
            (Surd(a), Rational(b)) => Ok(crate::scalar::Surd::cmp_surd(a, &crate::scalar::Surd::from_rational(b, &a.d))),
            (Rational(a), Surd(b)) => Ok(crate::scalar::Surd::cmp_surd(&crate::scalar::Surd::from_rational(a, &b.d), b)),
            _ => match coerce(self, other)? {
                Pair::Float(a, b) => {
                    let eps = a.eps.max(b.eps);
                    if (a.value - b.value).abs() <= eps {
                        Ok(Ordering::Equal)
                    } else {
                        Ok(a.value.partial_cmp(&b.value).unwrap_or(Ordering::Equal))
                    }
                }
                _ => Err(ArithError::MixedBacking),
            },
        }
    }

    /// Total order on exact scalars. Panics on float/surd mixtures, which
    /// callers rule out when they fix the backing of a computation.
    pub fn cmp_exact(&self, other: &Scalar) -> Ordering {
        self.try_cmp(other).expect("scalars of compatible backing")
    }

    pub fn lt(&self, other: &Scalar) -> bool {
        self.cmp_exact(other) == Ordering::Less
    }

    pub fn le(&self, other: &Scalar) -> bool {
        self.cmp_exact(other) != Ordering::Greater
    }

    pub fn eq_val(&self, other: &Scalar) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }

    pub fn floor(&self) -> BigInt {
        match self {
            Scalar::Rational(r) => r.floor().to_integer(),
            Scalar::Surd(s) => s.floor(),
            Scalar::Float(a) => BigInt::from(a.value.floor() as i64),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => rational_to_f64(r),
            Scalar::Surd(s) => s.to_f64(),
            Scalar::Float(a) => a.value,
        }
    }

    /// Parses `p`, `p/q`, a decimal such as `-0.25` (exactly), or `(p+q*sqrt(d))/r`.
    pub fn parse_exact(s: &str) -> Result<Scalar, ArithError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || ArithError::Parse(s.to_string());
        if t.contains("sqrt") {
            return parse_surd(&t).ok_or_else(bad);
        }
        if let Some((n, d)) = t.split_once('/') {
            let n = BigInt::from_str(n).map_err(|_| bad())?;
            let d = BigInt::from_str(d).map_err(|_| bad())?;
            return Scalar::big_ratio(n, d);
        }
        if let Some((ip, fp)) = t.split_once('.') {
            let neg = ip.starts_with('-');
            let ip_digits = ip.trim_start_matches(['-', '+']);
            if !fp.chars().all(|c| c.is_ascii_digit()) || !ip_digits.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let digits = format!("{}{}", if ip_digits.is_empty() { "0" } else { ip_digits }, fp);
            let mut n = BigInt::from_str(&digits).map_err(|_| bad())?;
            if neg {
                n = -n;
            }
            let d = num_traits::pow(BigInt::from(10), fp.len());
            return Scalar::big_ratio(n, d);
        }
        let n = BigInt::from_str(&t).map_err(|_| bad())?;
        Ok(Scalar::big_int(n))
    }
}

fn parse_surd(t: &str) -> Option<Scalar> {
    // (p+q*sqrt(d))/r ; the "/r" part and "q*" are optional
    let (body, r) = match t.rsplit_once(")/") {
        Some((b, r)) => (b.strip_prefix('(')?, BigInt::from_str(r).ok()?),
        None => (t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(t), BigInt::one()),
    };
    let idx = body.find("sqrt(")?;
    let inner_end = body[idx..].find(')')? + idx;
    let d = BigInt::from_str(&body[idx + 5..inner_end]).ok()?;
    let head = &body[..idx];
    // head is like "p+q*" or "p-" or "" or "q*"
    let (p_str, q_str) = match head.rfind(['+', '-']) {
        Some(pos) if pos > 0 => (&head[..pos], &head[pos..]),
        _ => ("0", head),
    };
    let q_str = q_str.trim_end_matches('*');
    let q = match q_str {
        "" | "+" => BigInt::one(),
        "-" => -BigInt::one(),
        other => BigInt::from_str(other.trim_start_matches('+')).ok()?,
    };
    let p = BigInt::from_str(p_str).ok()?;
    Scalar::surd(p, q, d, r).ok()
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Surd(s) => {
                let sign = if s.q.is_negative() { '-' } else { '+' };
                write!(f, "({}{}{}*sqrt({}))/{}", s.p, sign, s.q.abs(), s.d, s.r)
            }
            Scalar::Float(a) => write!(f, "{}", a.value),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

/// A point of the projective line: a scalar or the unsigned infinity.
#[derive(Clone, Debug)]
pub enum ExtReal {
    Fin(Scalar),
    Inf,
}

impl ExtReal {
    pub fn int(n: i64) -> ExtReal {
        ExtReal::Fin(Scalar::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> ExtReal {
        ExtReal::Fin(Scalar::ratio(n, d))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtReal::Inf)
    }

    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtReal::Fin(s) => Some(s),
            ExtReal::Inf => None,
        }
    }

    pub fn neg(&self) -> ExtReal {
        match self {
            ExtReal::Fin(s) => ExtReal::Fin(s.neg()),
            ExtReal::Inf => ExtReal::Inf,
        }
    }

    pub fn key(&self) -> Option<ExactKey> {
        match self {
            ExtReal::Fin(s) => s.key(),
            ExtReal::Inf => Some(ExactKey::Infinity),
        }
    }

    /// Equality on the projective line (tolerant for floats).
    pub fn same(&self, other: &ExtReal) -> bool {
        match (self, other) {
            (ExtReal::Inf, ExtReal::Inf) => true,
            (ExtReal::Fin(a), ExtReal::Fin(b)) => a.try_cmp(b).map(|o| o == Ordering::Equal).unwrap_or(false),
            _ => false,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Fin(s) => s.to_f64(),
            ExtReal::Inf => f64::INFINITY,
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            ExtReal::Fin(s) => s.is_exact(),
            ExtReal::Inf => true,
        }
    }
}

impl From<Scalar> for ExtReal {
    fn from(s: Scalar) -> ExtReal {
        ExtReal::Fin(s)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Fin(s) => write!(f, "{s}"),
            ExtReal::Inf => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl serde::Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
