//! Unimodular integer matrices acting on the projective line, with optional
//! generator words over `T`, `T^-1` and `S`.

use crate::error::{ArithError, MatrixKind};
use crate::scalar::{ExtReal, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Gen {
    T,
    Tinv,
    S,
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::T => write!(f, "T"),
            Gen::Tinv => write!(f, "T^-1"),
            Gen::S => write!(f, "S"),
        }
    }
}

/// The matrix `(p, q; r, s)` with `ps - qr = 1`.
#[derive(Clone, Debug)]
pub struct Mobius {
    p: BigInt,
    q: BigInt,
    r: BigInt,
    s: BigInt,
    word: Option<Vec<Gen>>,
}

impl Mobius {
    pub fn new(p: BigInt, q: BigInt, r: BigInt, s: BigInt) -> Result<Mobius, ArithError> {
        if &p * &s - &q * &r != BigInt::one() {
            return Err(ArithError::BadDeterminant);
        }
        Ok(Mobius { p, q, r, s, word: None })
    }

    pub fn from_i64(p: i64, q: i64, r: i64, s: i64) -> Result<Mobius, ArithError> {
        Mobius::new(p.into(), q.into(), r.into(), s.into())
    }

    pub fn identity() -> Mobius {
        Mobius {
            p: BigInt::one(),
            q: BigInt::zero(),
            r: BigInt::zero(),
            s: BigInt::one(),
            word: Some(Vec::new()),
        }
    }

    pub fn gen(g: Gen) -> Mobius {
        let (p, q, r, s) = match g {
            Gen::T => (1, 1, 0, 1),
            Gen::Tinv => (1, -1, 0, 1),
            Gen::S => (0, -1, 1, 0),
        };
        Mobius {
            p: p.into(),
            q: q.into(),
            r: r.into(),
            s: s.into(),
            word: Some(vec![g]),
        }
    }

    pub fn t() -> Mobius {
        Mobius::gen(Gen::T)
    }

    pub fn t_inv() -> Mobius {
        Mobius::gen(Gen::Tinv)
    }

    pub fn s() -> Mobius {
        Mobius::gen(Gen::S)
    }

    /// `T^n` for any integer `n`, written as a word of `|n|` letters.
    pub fn t_pow(n: i64) -> Mobius {
        let g = if n >= 0 { Gen::T } else { Gen::Tinv };
        Mobius {
            p: BigInt::one(),
            q: BigInt::from(n),
            r: BigInt::zero(),
            s: BigInt::one(),
            word: Some(vec![g; n.unsigned_abs() as usize]),
        }
    }

    /// `T^n` for a big exponent; the word is dropped when it would be huge.
    pub fn t_pow_big(n: &BigInt) -> Mobius {
        match i64::try_from(n) {
            Ok(k) if k.unsigned_abs() <= 1 << 20 => Mobius::t_pow(k),
            _ => Mobius {
                p: BigInt::one(),
                q: n.clone(),
                r: BigInt::zero(),
                s: BigInt::one(),
                word: None,
            },
        }
    }

    /// Product of a word, left to right.
    pub fn from_word(word: &[Gen]) -> Mobius {
        word.iter().fold(Mobius::identity(), |acc, g| acc.compose(&Mobius::gen(*g)))
    }

    pub fn entries(&self) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
        (&self.p, &self.q, &self.r, &self.s)
    }

    pub fn word(&self) -> Option<&[Gen]> {
        self.word.as_deref()
    }

    pub fn without_word(mut self) -> Mobius {
        self.word = None;
        self
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Mobius) -> Mobius {
        let word = match (&self.word, &other.word) {
            (Some(a), Some(b)) => {
                let mut w = a.clone();
                w.extend_from_slice(b);
                Some(w)
            }
            _ => None,
        };
        Mobius {
            p: &self.p * &other.p + &self.q * &other.r,
            q: &self.p * &other.q + &self.q * &other.s,
            r: &self.r * &other.p + &self.s * &other.r,
            s: &self.r * &other.q + &self.s * &other.s,
            word,
        }
    }

    pub fn inverse(&self) -> Mobius {
        let word = self.word.as_ref().map(|w| {
            w.iter()
                .rev()
                .map(|g| match g {
                    Gen::T => Gen::Tinv,
                    Gen::Tinv => Gen::T,
                    // S^-1 = -S acts like S
                    Gen::S => Gen::S,
                })
                .collect()
        });
        let m = Mobius {
            p: self.s.clone(),
            q: -&self.q,
            r: -&self.r,
            s: self.p.clone(),
            word,
        };
        // S^-1 = -S, so the word product differs from the matrix inverse by
        // (-1)^(number of S letters); keep the stored word authoritative.
        match &m.word {
            Some(w) if w.iter().filter(|g| **g == Gen::S).count() % 2 == 1 => Mobius {
                p: -m.p,
                q: -m.q,
                r: -m.r,
                s: -m.s,
                word: m.word,
            },
            _ => m,
        }
    }

    pub fn trace(&self) -> BigInt {
        &self.p + &self.s
    }

    /// True when the matrix is `Id` or `-Id`, i.e. the identity transformation.
    pub fn is_pm_identity(&self) -> bool {
        self.q.is_zero() && self.r.is_zero() && self.p == self.s && self.p.abs().is_one()
    }

    /// Equality as transformations of the projective line.
    pub fn same_transform(&self, other: &Mobius) -> bool {
        let eq = self.p == other.p && self.q == other.q && self.r == other.r && self.s == other.s;
        let neg = self.p == -&other.p && self.q == -&other.q && self.r == -&other.r && self.s == -&other.s;
        eq || neg
    }

    pub fn kind(&self) -> Option<MatrixKind> {
        let t = self.trace().abs();
        let two = BigInt::from(2);
        if t > two {
            None
        } else if t == two {
            Some(MatrixKind::Parabolic)
        } else {
            Some(MatrixKind::Elliptic)
        }
    }

    pub fn apply(&self, x: &ExtReal) -> Result<ExtReal, ArithError> {
        match x {
            ExtReal::Inf => {
                if self.r.is_zero() {
                    Ok(ExtReal::Inf)
                } else {
                    Ok(ExtReal::Fin(Scalar::big_ratio(self.p.clone(), self.r.clone())?))
                }
            }
            ExtReal::Fin(v) => {
                let lift = |n: &BigInt| -> Scalar {
                    match v {
                        Scalar::Float(_) => v.like(n.to_f64().unwrap_or(f64::NAN)),
                        _ => Scalar::big_int(n.clone()),
                    }
                };
                let den = v.mul(&lift(&self.r))?.add(&lift(&self.s))?;
                if den.is_zero() {
                    return Ok(ExtReal::Inf);
                }
                let num = v.mul(&lift(&self.p))?.add(&lift(&self.q))?;
                Ok(ExtReal::Fin(num.div(&den)?))
            }
        }
    }

    /// Fixed points `(attracting, repelling)` of a hyperbolic matrix, as exact surds.
    pub fn fixed_points(&self) -> Result<(ExtReal, ExtReal), ArithError> {
        if let Some(k) = self.kind() {
            return Err(ArithError::NotHyperbolic(k));
        }
        // r x^2 + (s - p) x - q = 0, disc = tr^2 - 4 (never a square here)
        let t = self.trace();
        let disc = &t * &t - BigInt::from(4);
        let two_r = BigInt::from(2) * &self.r;
        let base = &self.p - &self.s;
        let sign = if t.is_positive() { BigInt::one() } else { -BigInt::one() };
        // derivative 1/(r x + s)^2; at x = (p - s + e sqrt(disc))/(2r), r x + s = (t + e sqrt(disc))/2,
        // which exceeds 1 in modulus exactly when e has the sign of t.
        let attracting = Scalar::surd(base.clone(), sign.clone(), disc.clone(), two_r.clone())?;
        let repelling = Scalar::surd(base, -sign, disc, two_r)?;
        Ok((ExtReal::Fin(attracting), ExtReal::Fin(repelling)))
    }
}

impl fmt::Display for Mobius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}; {}, {})", self.p, self.q, self.r, self.s)
    }
}

/// Compact text form of a word such as `T^3 S T^-2 S`.
pub fn word_string(word: &[Gen]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < word.len() {
        let g = word[i];
        let mut j = i;
        while j < word.len() && word[j] == g {
            j += 1;
        }
        let n = j - i;
        let tok = match (g, n) {
            (Gen::S, _) => vec!["S".to_string(); n].join(" "),
            (Gen::T, 1) => "T".to_string(),
            (Gen::T, _) => format!("T^{n}"),
            (Gen::Tinv, _) => format!("T^-{n}"),
        };
        out.push(tok);
        i = j;
    }
    out.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExtReal {
        ExtReal::ratio(n, d)
    }

    #[test]
    fn generator_actions() {
        let y = Mobius::s().apply(&ExtReal::int(2)).unwrap();
        assert!(y.same(&q(-1, 2)));
        assert!(Mobius::t().apply(&ExtReal::Inf).unwrap().is_inf());
        let t3s = Mobius::t_pow(3).compose(&Mobius::s());
        assert_eq!(t3s.to_string(), "(3, -1; 1, 0)");
        assert!(t3s.apply(&ExtReal::Inf).unwrap().same(&ExtReal::int(3)));
        assert!(Mobius::s().apply(&ExtReal::int(0)).unwrap().is_inf());
    }

    #[test]
    fn s_squared_is_minus_identity() {
        let ss = Mobius::s().compose(&Mobius::s());
        assert!(ss.is_pm_identity());
        assert_eq!(ss.p, BigInt::from(-1));
        let x = q(7, 3);
        assert!(ss.apply(&x).unwrap().same(&x));
    }

    #[test]
    fn fixed_points_of_hyperbolic_words() {
        let t3s = Mobius::t_pow(3).compose(&Mobius::s());
        let (att, rep) = t3s.fixed_points().unwrap();
        assert_eq!(att.to_string(), "(3+1*sqrt(5))/2");
        assert_eq!(rep.to_string(), "(3-1*sqrt(5))/2");
        let t4s = Mobius::t_pow(4).compose(&Mobius::s());
        assert_eq!(t4s.fixed_points().unwrap().0.to_string(), "(2+1*sqrt(3))/1");
        let t2s = Mobius::t_pow(2).compose(&Mobius::s());
        assert_eq!(t2s.fixed_points().unwrap_err(), ArithError::NotHyperbolic(MatrixKind::Parabolic));
        assert_eq!(Mobius::s().fixed_points().unwrap_err(), ArithError::NotHyperbolic(MatrixKind::Elliptic));
    }

    #[test]
    fn float_iteration_reaches_attracting_point() {
        let m = Mobius::t_pow(3).compose(&Mobius::s());
        let mut x = ExtReal::Fin(Scalar::float(0.0));
        for _ in 0..60 {
            x = m.apply(&x).unwrap();
        }
        let target = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((x.to_f64() - target).abs() < 1e-12);
    }

    #[test]
    fn inverse_and_words() {
        let w = [Gen::T, Gen::T, Gen::S, Gen::Tinv, Gen::S];
        let m = Mobius::from_word(&w);
        let inv = m.inverse();
        assert!(m.compose(&inv).is_pm_identity());
        let expect = Mobius::from_word(inv.word().unwrap());
        assert!(expect.same_transform(&inv));
        assert_eq!(word_string(&w), "T^2 S T^-1 S");
    }
}
