//! Boxes in the plane with possibly infinite sides.

use crate::error::ArithError;
use crate::scalar::{ExtReal, Scalar};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

/// A coordinate bound: a scalar or one of the two signed infinities.
#[derive(Clone, Debug)]
pub enum Bound {
    NegInf,
    Fin(Scalar),
    PosInf,
}

impl Bound {
    pub fn int(n: i64) -> Bound {
        Bound::Fin(Scalar::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Bound {
        Bound::Fin(Scalar::ratio(n, d))
    }

    /// Reads a projective point as a lower (`upper = false`) or upper bound,
    /// so that infinity becomes `-inf` or `+inf` respectively.
    pub fn from_ext(x: &ExtReal, upper: bool) -> Bound {
        match x {
            ExtReal::Fin(s) => Bound::Fin(s.clone()),
            ExtReal::Inf if upper => Bound::PosInf,
            ExtReal::Inf => Bound::NegInf,
        }
    }

    pub fn to_ext(&self) -> ExtReal {
        match self {
            Bound::Fin(s) => ExtReal::Fin(s.clone()),
            _ => ExtReal::Inf,
        }
    }

    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            Bound::Fin(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, Bound::Fin(_))
    }

    pub fn try_cmp(&self, other: &Bound) -> Result<Ordering, ArithError> {
        use Bound::*;
        Ok(match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.try_cmp(b)?,
        })
    }

    pub fn cmp_exact(&self, other: &Bound) -> Ordering {
        self.try_cmp(other).expect("bounds of compatible backing")
    }

    pub fn same(&self, other: &Bound) -> bool {
        self.try_cmp(other).map(|o| o == Ordering::Equal).unwrap_or(false)
    }

    pub fn neg(&self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Fin(s) => Bound::Fin(s.neg()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Fin(s) => s.to_f64(),
        }
    }

    pub fn min(self, other: Bound) -> Bound {
        if other.cmp_exact(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Bound) -> Bound {
        if other.cmp_exact(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

impl From<Scalar> for Bound {
    fn from(s: Scalar) -> Bound {
        Bound::Fin(s)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-inf"),
            Bound::PosInf => write!(f, "inf"),
            Bound::Fin(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

fn contains_coord(lo: &Bound, hi: &Bound, v: &ExtReal) -> Result<bool, ArithError> {
    match v {
        ExtReal::Inf => Ok(lo.is_infinite() || hi.is_infinite()),
        ExtReal::Fin(s) => {
            let b = Bound::Fin(s.clone());
            Ok(lo.try_cmp(&b)? != Ordering::Greater && b.try_cmp(hi)? != Ordering::Greater)
        }
    }
}

/// The closed box `[x0, x1] x [y0, y1]`.
#[derive(Clone, Debug, Serialize)]
pub struct Rect {
    pub x0: Bound,
    pub x1: Bound,
    pub y0: Bound,
    pub y1: Bound,
}

impl Rect {
    pub fn new(x0: Bound, x1: Bound, y0: Bound, y1: Bound) -> Rect {
        Rect { x0, x1, y0, y1 }
    }

    /// Closed membership; the unsigned infinity belongs to any side that reaches it.
    pub fn contains(&self, x: &ExtReal, y: &ExtReal) -> Result<bool, ArithError> {
        Ok(contains_coord(&self.x0, &self.x1, x)? && contains_coord(&self.y0, &self.y1, y)?)
    }

    pub fn is_empty(&self) -> bool {
        self.x0.cmp_exact(&self.x1) != Ordering::Less || self.y0.cmp_exact(&self.y1) != Ordering::Less
    }

    pub fn to_f64(&self) -> RectF {
        RectF {
            x0: self.x0.to_f64(),
            x1: self.x1.to_f64(),
            y0: self.y0.to_f64(),
            y1: self.y1.to_f64(),
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Float shadow of a [`Rect`]; infinite sides are `+-inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RectF {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

fn contains_f(lo: f64, hi: f64, v: f64, tol: f64) -> bool {
    if v.is_infinite() {
        lo.is_infinite() || hi.is_infinite()
    } else {
        v >= lo - tol && v <= hi + tol
    }
}

impl RectF {
    /// Closed membership up to `tol`; infinite coordinates are projective.
    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        contains_f(self.x0, self.x1, x, tol) && contains_f(self.y0, self.y1, y, tol)
    }
}

/// `du dw / (w - u)^2` mass of `[x0, x1] x [y0, y1]`, a box off the diagonal.
/// It is the log of the cross ratio of the four sides. One infinite side
/// cancels from the cross ratio; two infinite sides are the same projective
/// point, so the box reaches the diagonal at infinity and has infinite mass.
pub fn box_measure(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    // cross ratio ((y1-x1)(y0-x0)) / ((y0-x1)(y1-x0))
    let sides = [x0, x1, y0, y1];
    let infinite: Vec<f64> = sides.iter().copied().filter(|v| v.is_infinite()).collect();
    let mut num = vec![(y1, x1), (y0, x0)];
    let mut den = vec![(y0, x1), (y1, x0)];
    match infinite.len() {
        0 => {}
        1 => {
            let v = infinite[0];
            num.retain(|f| f.0 != v && f.1 != v);
            den.retain(|f| f.0 != v && f.1 != v);
        }
        _ => return f64::INFINITY,
    }
    let prod = |fs: &[(f64, f64)]| fs.iter().map(|(w, u)| (w - u).abs()).product::<f64>();
    let (n, d) = (prod(&num), prod(&den));
    if n == 0.0 || d == 0.0 {
        return f64::INFINITY;
    }
    (n / d).ln().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_order_with_infinities() {
        assert_eq!(Bound::NegInf.cmp_exact(&Bound::int(-5)), Ordering::Less);
        assert_eq!(Bound::PosInf.cmp_exact(&Bound::int(5)), Ordering::Greater);
        assert_eq!(Bound::ratio(1, 2).cmp_exact(&Bound::ratio(2, 4)), Ordering::Equal);
    }

    #[test]
    fn projective_membership() {
        let r = Rect::new(Bound::int(0), Bound::int(1), Bound::NegInf, Bound::int(-1));
        assert!(r.contains(&ExtReal::ratio(1, 2), &ExtReal::Inf).unwrap());
        assert!(!r.contains(&ExtReal::Inf, &ExtReal::int(-2)).unwrap());
        assert!(r.contains(&ExtReal::int(1), &ExtReal::int(-1)).unwrap());
    }

    #[test]
    fn box_measure_matches_quadrature() {
        let (x0, x1, y0, y1) = (0.0, 1.0, 2.0, 5.0);
        let n = 2000;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = x0 + (i as f64 + 0.5) * (x1 - x0) / n as f64;
                let y = y0 + (j as f64 + 0.5) * (y1 - y0) / n as f64;
                s += 1.0 / ((y - x) * (y - x));
            }
        }
        s *= (x1 - x0) * (y1 - y0) / (n * n) as f64;
        assert!((box_measure(x0, x1, y0, y1) - s).abs() < 1e-5);
        // one infinite side: closed form 1/(y0-x) integrated over x in [0,1]
        let m = box_measure(0.0, 1.0, 2.0, f64::INFINITY);
        assert!((m - (2.0f64).ln()).abs() < 1e-12);
        assert!(box_measure(f64::NEG_INFINITY, 0.0, 1.0, f64::INFINITY).is_infinite());
    }
}
