//! The map `f_{a,b}`, its generalized integer part and (a,b)-continued
//! fraction expansions.

use crate::error::ArithError;
use crate::mobius::{Gen, Mobius};
use crate::scalar::{ExactKey, ExtReal, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("a = {0} violates a <= 0")]
    APositive(String),
    #[error("b = {0} violates b >= 0")]
    BNegative(String),
    #[error("b - a = {0} violates b - a >= 1")]
    GapTooSmall(String),
    #[error("-ab = {0} violates -ab <= 1")]
    ProductTooLarge(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfError {
    #[error("digit requested at infinity; the expansion has terminated")]
    AtInfinity,
    #[error("{0} lies outside [a, b)")]
    OutsideInterval(String),
    #[error("digit {0} does not fit in 64 bits")]
    DigitOverflow(String),
    #[error("invalid digit data: {0}")]
    BadDigits(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Parameter pairs sitting on the boundary of the parameter set, where the
/// attractor is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Degenerate {
    AZero,
    BZero,
    MinusOneOne,
}

/// A validated pair `a <= 0 <= b`, `b - a >= 1`, `-ab <= 1`.
#[derive(Debug, Clone)]
pub struct Params {
    a: Scalar,
    b: Scalar,
}

impl Params {
    pub fn new(a: Scalar, b: Scalar) -> Result<Params, ParamError> {
        if a.is_float() != b.is_float() {
            return Err(ArithError::MixedBacking.into());
        }
        let zero = a.like(0.0);
        let zero = if a.is_float() { zero } else { Scalar::zero() };
        if a.try_cmp(&zero)? == Ordering::Greater {
            return Err(ParamError::APositive(a.to_string()));
        }
        if b.try_cmp(&zero)? == Ordering::Less {
            return Err(ParamError::BNegative(b.to_string()));
        }
        let one = if a.is_float() { a.like(1.0) } else { Scalar::one() };
        let gap = b.sub(&a)?;
        if gap.try_cmp(&one)? == Ordering::Less {
            return Err(ParamError::GapTooSmall(gap.to_string()));
        }
        let prod = a.mul(&b)?.neg();
        if prod.try_cmp(&one)? == Ordering::Greater {
            return Err(ParamError::ProductTooLarge(prod.to_string()));
        }
        Ok(Params { a, b })
    }

    /// Parses both values with [`Scalar::parse_exact`].
    pub fn exact(a: &str, b: &str) -> Result<Params, ParamError> {
        Params::new(Scalar::parse_exact(a)?, Scalar::parse_exact(b)?)
    }

    pub fn ratio(an: i64, ad: i64, bn: i64, bd: i64) -> Params {
        Params::new(Scalar::ratio(an, ad), Scalar::ratio(bn, bd)).expect("parameters in the admissible set")
    }

    pub fn float(a: f64, b: f64) -> Result<Params, ParamError> {
        Params::new(Scalar::float(a), Scalar::float(b))
    }

    pub fn a(&self) -> &Scalar {
        &self.a
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn af(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn bf(&self) -> f64 {
        self.b.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.a.is_exact()
    }

    /// Integer constant in the backing of these parameters.
    pub fn int(&self, n: i64) -> Scalar {
        if self.a.is_float() {
            self.a.like(n as f64)
        } else {
            Scalar::int(n)
        }
    }

    pub fn degenerate(&self) -> Option<Degenerate> {
        if self.a.is_zero() {
            Some(Degenerate::AZero)
        } else if self.b.is_zero() {
            Some(Degenerate::BZero)
        } else if self.a.eq_val(&self.int(-1)) && self.b.eq_val(&self.int(1)) {
            Some(Degenerate::MinusOneOne)
        } else {
            None
        }
    }

    /// The mirrored pair `(-b, -a)`.
    pub fn mirror(&self) -> Params {
        Params {
            a: self.b.neg(),
            b: self.a.neg(),
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

fn to_i64(n: BigInt) -> Result<i64, CfError> {
    n.to_i64().ok_or_else(|| CfError::DigitOverflow(n.to_string()))
}

/// Branch of `f_{a,b}` taken at `x`: `T` below `a`, `S` on `[a, b)`, `T^-1`
/// from `b` on (and at infinity).
pub fn branch(x: &ExtReal, params: &Params) -> Result<Gen, ArithError> {
    match x {
        ExtReal::Inf => Ok(Gen::Tinv),
        ExtReal::Fin(v) => {
            if v.try_cmp(&params.a)? == Ordering::Less {
                Ok(Gen::T)
            } else if v.try_cmp(&params.b)? == Ordering::Less {
                Ok(Gen::S)
            } else {
                Ok(Gen::Tinv)
            }
        }
    }
}

/// Generalized integer part: `floor(x-a)` below `a`, `0` on `[a,b)`,
/// `floor(x-b)+1` from `b` on.
pub fn digit_ab(x: &ExtReal, params: &Params) -> Result<i64, CfError> {
    let v = x.finite().ok_or(CfError::AtInfinity)?;
    match branch(x, params)? {
        Gen::T => to_i64(v.sub(&params.a)?.floor()),
        Gen::S => Ok(0),
        Gen::Tinv => to_i64(v.sub(&params.b)?.floor() + 1),
    }
}

pub fn f_step(x: &ExtReal, params: &Params) -> Result<ExtReal, ArithError> {
    Mobius::gen(branch(x, params)?).apply(x)
}

fn in_window(x: &ExtReal, params: &Params) -> Result<bool, ArithError> {
    Ok(matches!(x, ExtReal::Fin(_)) && branch(x, params)? == Gen::S)
}

/// First return map of `f_{a,b}` to `[a, b)`: `T^{-n} S x` with `n` the digit
/// of `-1/x`. Returns the image and the matrix applied; `0` is fixed.
pub fn f_hat_step(x: &ExtReal, params: &Params) -> Result<(ExtReal, Mobius), CfError> {
    if !in_window(x, params)? {
        return Err(CfError::OutsideInterval(x.to_string()));
    }
    if x.finite().is_some_and(|v| v.is_zero()) {
        return Ok((x.clone(), Mobius::identity()));
    }
    let y = Mobius::s().apply(x)?;
    let n = digit_ab(&y, params)?;
    let m = Mobius::t_pow(-n).compose(&Mobius::s());
    let image = m.apply(x)?;
    Ok((image, m))
}

/// Eventually periodic tail: digits from index `preperiod` repeat with the given period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicTail {
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFExpansion {
    pub digits: Vec<i64>,
    /// The remainder became infinite (rational input).
    pub terminated: bool,
    pub tail: Option<PeriodicTail>,
    /// Periodicity was declared from float states within tolerance.
    pub approximate: bool,
}

impl CFExpansion {
    pub fn preperiod(&self) -> &[i64] {
        match self.tail {
            Some(t) => &self.digits[..t.preperiod],
            None => &self.digits,
        }
    }

    pub fn period(&self) -> &[i64] {
        match self.tail {
            Some(t) => &self.digits[t.preperiod..t.preperiod + t.period],
            None => &[],
        }
    }

    pub fn convergents(&self, k: usize) -> Vec<Convergent> {
        convergents(&self.digits, k)
    }

    /// Exact value: finite expansions by evaluation, periodic ones through
    /// the fixed point of the period word.
    pub fn value(&self) -> Result<ExtReal, CfError> {
        match self.tail {
            Some(_) => evaluate_formal_cf(self.preperiod(), self.period()),
            None => Ok(evaluate(&self.digits)),
        }
    }
}

impl Serialize for CFExpansion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.tail {
            None => self.digits.serialize(serializer),
            Some(_) => {
                let mut st = serializer.serialize_struct("CFExpansion", 2)?;
                st.serialize_field("preperiod", self.preperiod())?;
                st.serialize_field("period", self.period())?;
                st.end()
            }
        }
    }
}

/// Relative tolerance used to declare float states equal in [`expand`].
fn float_close(u: f64, v: f64, eps: f64) -> bool {
    (u - v).abs() <= eps * u.abs().max(1.0)
}

/// Digits `n_i = digit_ab(x_i)` with `x_{i+1} = -1/(x_i - n_i)`.
pub fn expand(x: &ExtReal, params: &Params, max_digits: usize) -> Result<CFExpansion, CfError> {
    if max_digits == 0 {
        return Err(CfError::BadDigits("max_digits must be at least 1".into()));
    }
    let mut digits = Vec::new();
    let mut seen: HashMap<ExactKey, usize> = HashMap::new();
    let mut float_states: Vec<f64> = Vec::new();
    let mut cur = x.clone();
    let mut out = CFExpansion {
        digits: Vec::new(),
        terminated: false,
        tail: None,
        approximate: false,
    };
    for i in 0..max_digits {
        let v = match &cur {
            ExtReal::Inf => {
                out.terminated = true;
                break;
            }
            ExtReal::Fin(v) => v.clone(),
        };
        if let Some(key) = v.key() {
            if let Some(&j) = seen.get(&key) {
                out.tail = Some(PeriodicTail { preperiod: j, period: i - j });
                break;
            }
            seen.insert(key, i);
        } else {
            let f = v.to_f64();
            let eps = v.eps().unwrap_or(crate::scalar::DEFAULT_EPS);
            if let Some(j) = float_states.iter().position(|&u| float_close(u, f, eps)) {
                out.tail = Some(PeriodicTail { preperiod: j, period: i - j });
                out.approximate = true;
                break;
            }
            float_states.push(f);
        }
        let n = digit_ab(&cur, params)?;
        digits.push(n);
        let rem = v.sub(&params.int(n))?;
        cur = if rem.is_zero() {
            ExtReal::Inf
        } else {
            ExtReal::Fin(rem.recip()?.neg())
        };
    }
    if !out.terminated && out.tail.is_none() && cur.is_inf() {
        out.terminated = true;
    }
    out.digits = digits;
    Ok(out)
}

/// `p_k / q_k` of an expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn value(&self) -> ExtReal {
        if self.q.is_zero() {
            ExtReal::Inf
        } else {
            ExtReal::Fin(Scalar::Rational(BigRational::new(self.p.clone(), self.q.clone())))
        }
    }
}

/// The first `k` convergents `r_0, ..., r_{k-1}` (fewer if there are fewer digits).
pub fn convergents(digits: &[i64], k: usize) -> Vec<Convergent> {
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (-BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(k.min(digits.len()));
    for &n in digits.iter().take(k) {
        let n = BigInt::from(n);
        let p = &n * &p1 - &p2;
        let q = &n * &q1 - &q2;
        p2 = std::mem::replace(&mut p1, p.clone());
        q2 = std::mem::replace(&mut q1, q.clone());
        out.push(Convergent { p, q });
    }
    out
}

/// `T^{n_0} S T^{n_1} S ... T^{n_k} S`.
pub fn digits_matrix(digits: &[i64]) -> Mobius {
    digits
        .iter()
        .fold(Mobius::identity(), |acc, &n| acc.compose(&Mobius::t_pow(n)).compose(&Mobius::s()))
}

/// Value of the finite expansion `n_0 - 1/(n_1 - 1/(... - 1/n_k))`.
pub fn evaluate(digits: &[i64]) -> ExtReal {
    match convergents(digits, digits.len()).pop() {
        Some(c) => c.value(),
        None => ExtReal::Inf,
    }
}

/// Value of `(m_0, m_1, ..., overline(period))`: the attracting fixed point of
/// the period matrix pushed through the preperiod. Non-hyperbolic period
/// matrices are rejected.
pub fn evaluate_minus_cf(preperiod: &[i64], period: &[i64]) -> Result<ExtReal, CfError> {
    let head = digits_matrix(preperiod);
    if period.is_empty() {
        return Ok(head.apply(&ExtReal::Inf)?);
    }
    let (attracting, _) = digits_matrix(period).fixed_points()?;
    Ok(head.apply(&attracting)?)
}

/// Like [`evaluate_minus_cf`], but a parabolic period contributes its unique
/// fixed point, which is the limit of the truncations (e.g. `(overline(2)) = 1`).
pub fn evaluate_formal_cf(preperiod: &[i64], period: &[i64]) -> Result<ExtReal, CfError> {
    let head = digits_matrix(preperiod);
    if period.is_empty() {
        return Ok(head.apply(&ExtReal::Inf)?);
    }
    let m = digits_matrix(period);
    let fixed = match m.kind() {
        Some(crate::error::MatrixKind::Parabolic) => {
            let (p, _, r, s) = m.entries();
            if r.is_zero() {
                ExtReal::Inf
            } else {
                ExtReal::Fin(Scalar::big_ratio(p - s, BigInt::from(2) * r)?)
            }
        }
        _ => m.fixed_points()?.0,
    };
    Ok(head.apply(&fixed)?)
}

/// The cylinder of numbers whose expansion starts `(0, n_1, ..., n_k)`.
#[derive(Debug, Clone)]
pub struct DigitInterval {
    pub low: ExtReal,
    pub high: ExtReal,
    /// `1/(q_k (q_k - q_{k-1}))`.
    pub length: ExtReal,
    pub q_k: BigInt,
    pub q_prev: BigInt,
}

fn check_bounded(m: i64, digits: &[i64]) -> Result<(), CfError> {
    if m < 2 {
        return Err(CfError::BadDigits(format!("m = {m} must be at least 2")));
    }
    if digits.is_empty() {
        return Err(CfError::BadDigits("empty digit list".into()));
    }
    if let Some(d) = digits.iter().find(|&&d| d != m && d != m + 1) {
        return Err(CfError::BadDigits(format!("digit {d} not in {{{m}, {}}}", m + 1)));
    }
    Ok(())
}

fn with_zero(digits: &[i64]) -> Vec<i64> {
    let mut v = Vec::with_capacity(digits.len() + 1);
    v.push(0);
    v.extend_from_slice(digits);
    v
}

/// Interval `[(0, n_1, ..., n_k - 1), (0, n_1, ..., n_k))` for digits in `{m, m+1}`.
pub fn bounded_digit_interval(m: i64, digits: &[i64]) -> Result<DigitInterval, CfError> {
    check_bounded(m, digits)?;
    let full = with_zero(digits);
    let mut lowered = full.clone();
    *lowered.last_mut().expect("nonempty") -= 1;
    let conv = convergents(&full, full.len());
    let q_k = conv[conv.len() - 1].q.clone();
    let q_prev = conv[conv.len() - 2].q.clone();
    let den = &q_k * (&q_k - &q_prev);
    Ok(DigitInterval {
        low: evaluate(&lowered),
        high: evaluate(&full),
        length: ExtReal::Fin(Scalar::big_ratio(BigInt::one(), den)?),
        q_k,
        q_prev,
    })
}

/// Ratio `l(I_{..,m} u I_{..,m+1}) / l(I_{..})` computed from the closed
/// form `2 q_k (q_k - q_{k-1}) / (((m+1) q_k - q_{k-1}) ((m-1) q_k - q_{k-1}))`.
pub fn bounded_digit_union_ratio(m: i64, digits: &[i64]) -> Result<BigRational, CfError> {
    let iv = bounded_digit_interval(m, digits)?;
    let (q, qp) = (&iv.q_k, &iv.q_prev);
    let num = BigInt::from(2) * q * (q - qp);
    let den = (BigInt::from(m + 1) * q - qp) * (BigInt::from(m - 1) * q - qp);
    if den.is_zero() {
        return Err(CfError::BadDigits("degenerate union".into()));
    }
    Ok(BigRational::new(num, den.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExtReal {
        ExtReal::ratio(n, d)
    }

    fn same(x: &ExtReal, y: &ExtReal) -> bool {
        x.same(y)
    }

    #[test]
    fn params_validation_names_the_inequality() {
        assert!(matches!(Params::exact("1/2", "1"), Err(ParamError::APositive(_))));
        assert!(matches!(Params::exact("-1/2", "-1"), Err(ParamError::BNegative(_))));
        assert!(matches!(Params::exact("-1/4", "1/2"), Err(ParamError::GapTooSmall(_))));
        assert!(matches!(Params::exact("-2", "1"), Err(ParamError::ProductTooLarge(_))));
        assert_eq!(Params::exact("-1", "1").unwrap().degenerate(), Some(Degenerate::MinusOneOne));
        assert_eq!(Params::exact("0", "3/2").unwrap().degenerate(), Some(Degenerate::AZero));
        assert_eq!(Params::exact("-4/5", "2/5").unwrap().degenerate(), None);
    }

    #[test]
    fn digits_and_steps() {
        let p = Params::ratio(-1, 2, 1, 2);
        assert_eq!(digit_ab(&ExtReal::Fin(Scalar::float(0.7)), &p).unwrap(), 1);
        assert_eq!(digit_ab(&q(-5, 2), &p).unwrap(), -2);
        assert_eq!(digit_ab(&q(0, 1), &p).unwrap(), 0);
        assert_eq!(digit_ab(&q(1, 2), &p).unwrap(), 1);
        assert_eq!(digit_ab(&ExtReal::Inf, &p), Err(CfError::AtInfinity));

        let z = Params::ratio(-4, 5, 2, 5);
        assert!(same(&f_step(&q(-1, 1), &z).unwrap(), &q(0, 1)));
        assert!(f_step(&q(0, 1), &z).unwrap().is_inf());
        assert!(same(&f_step(&q(2, 5), &z).unwrap(), &q(-3, 5)));
        assert!(f_step(&ExtReal::Inf, &z).unwrap().is_inf());
    }

    #[test]
    fn first_return_map() {
        let p = Params::ratio(-1, 2, 1, 2);
        let (x, m) = f_hat_step(&q(2, 5), &p).unwrap();
        assert!(same(&x, &q(-1, 2)));
        assert!(same(&m.apply(&q(2, 5)).unwrap(), &x));
        let (z, m0) = f_hat_step(&q(0, 1), &p).unwrap();
        assert!(same(&z, &q(0, 1)) && m0.is_pm_identity());
        let mc = Params::ratio(-1, 1, 0, 1);
        // -1/x = 2 sits on b = 0, so its digit is floor(2) + 1 = 3 and the
        // first return lands on a = -1 (0 is outside [a, b) here).
        assert!(same(&f_hat_step(&q(-1, 2), &mc).unwrap().0, &q(-1, 1)));
        assert!(matches!(f_hat_step(&q(1, 2), &p), Err(CfError::OutsideInterval(_))));
    }

    #[test]
    fn expansions() {
        let p = Params::ratio(-1, 2, 1, 2);
        let e = expand(&q(2, 5), &p, 50).unwrap();
        assert_eq!(e.digits, vec![0, -2, 2]);
        assert!(e.terminated);
        assert!(same(&evaluate(&e.digits), &q(2, 5)));

        let mc = Params::ratio(-1, 1, 0, 1);
        let e = expand(&q(0, 1), &mc, 50).unwrap();
        assert_eq!(e.preperiod(), &[1]);
        assert_eq!(e.period(), &[2]);
        assert!(same(&e.value().unwrap(), &q(0, 1)));

        let e = expand(&q(-1, 2), &p, 50).unwrap();
        assert_eq!(e.digits[0], 0);
        assert_eq!(e.digits[1], digit_ab(&q(2, 1), &p).unwrap());
    }

    #[test]
    fn golden_ratio_is_periodic() {
        let p = Params::ratio(-1, 2, 1, 2);
        let phi = ExtReal::Fin(Scalar::parse_exact("(1+sqrt(5))/2").unwrap());
        let e = expand(&phi, &p, 50).unwrap();
        assert!(e.tail.is_some() && !e.approximate);
        assert!(same(&e.value().unwrap(), &phi));
    }

    #[test]
    fn convergent_recursion() {
        let c = convergents(&[2, 2], 2);
        assert!(same(&c[0].value(), &q(2, 1)));
        assert!(same(&c[1].value(), &q(3, 2)));
        let twos = vec![2; 120];
        let c = convergents(&twos, 120);
        assert!((c[30].value().to_f64() - 32.0 / 31.0).abs() < 1e-12);
        assert!((c[119].value().to_f64() - 1.0).abs() < 1e-2);
        for w in c.windows(2) {
            assert_eq!(&w[0].p * &w[1].q - &w[1].p * &w[0].q, BigInt::one());
        }
        for k in 1..10 {
            assert!(same(&evaluate(&vec![2; k]), &q(k as i64 + 1, k as i64)));
        }
    }

    #[test]
    fn periodic_evaluation() {
        let v = evaluate_minus_cf(&[0], &[-3]).unwrap();
        assert!(same(&v, &ExtReal::Fin(Scalar::parse_exact("(3-sqrt(5))/2").unwrap())));
        let w = evaluate_minus_cf(&[0, -3], &[-4]).unwrap();
        let wf = w.to_f64();
        assert!((2.0 * wf * wf + 2.0 * wf - 1.0).abs() < 1e-12);
        assert!(matches!(
            evaluate_minus_cf(&[], &[2]),
            Err(CfError::Arith(ArithError::NotHyperbolic(crate::error::MatrixKind::Parabolic)))
        ));
        assert!(same(&evaluate_formal_cf(&[1], &[2]).unwrap(), &q(0, 1)));
        assert!(same(&evaluate_formal_cf(&[], &[2]).unwrap(), &q(1, 1)));
    }

    #[test]
    fn bounded_digit_lengths() {
        let iv = bounded_digit_interval(2, &[2]).unwrap();
        assert!(same(&iv.low, &q(-1, 1)));
        assert!(same(&iv.high, &q(-1, 2)));
        assert!(same(&iv.length, &q(1, 2)));
        let iv = bounded_digit_interval(2, &[2, 2]).unwrap();
        assert!(same(&iv.length, &q(1, 3)));
        assert!(bounded_digit_interval(2, &[4]).is_err());
        assert!(bounded_digit_interval(1, &[1]).is_err());
    }
}
