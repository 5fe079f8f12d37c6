//! The reduction map `F(x, y) = (rho(y) x, rho(y) y)`, its trapping region
//! and a seeded Monte Carlo picture of the attractor.

use crate::cf::{self, Degenerate, Params};
use crate::error::ArithError;
use crate::geom::{Bound, Rect, RectF};
use crate::mobius::{Gen, Mobius};
use crate::scalar::{ExtReal, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NatError {
    #[error("point lies on the diagonal x = y")]
    Diagonal,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Generator applied by the reduction map at height `y`: `T` below `a`,
/// `S` on `[a, b)`, `T^-1` from `b` on and at infinity.
pub fn rho(y: &ExtReal, params: &Params) -> Result<Gen, ArithError> {
    cf::branch(y, params)
}

#[derive(Clone, Debug)]
pub struct Point2 {
    pub x: ExtReal,
    pub y: ExtReal,
}

impl Point2 {
    pub fn new(x: ExtReal, y: ExtReal) -> Point2 {
        Point2 { x, y }
    }

    pub fn ratio(xn: i64, xd: i64, yn: i64, yd: i64) -> Point2 {
        Point2::new(ExtReal::ratio(xn, xd), ExtReal::ratio(yn, yd))
    }

    pub fn on_diagonal(&self) -> bool {
        self.x.same(&self.y)
    }
}

/// One step of the reduction map.
pub fn reduction_step(p: &Point2, params: &Params) -> Result<Point2, NatError> {
    if p.on_diagonal() {
        return Err(NatError::Diagonal);
    }
    let g = Mobius::gen(rho(&p.y, params)?);
    Ok(Point2::new(g.apply(&p.x)?, g.apply(&p.y)?))
}

/// Float reduction step; infinite `y` is the projective point and takes `T^-1`.
#[inline]
pub fn reduction_step_f64(x: f64, y: f64, a: f64, b: f64) -> (f64, f64) {
    if y.is_infinite() || y >= b {
        (x - 1.0, y - 1.0)
    } else if y < a {
        (x + 1.0, y + 1.0)
    } else {
        (-1.0 / x, -1.0 / y)
    }
}

/// A finite union of closed boxes split into an upper and a lower component.
#[derive(Clone, Debug, Serialize)]
pub struct TrapRegion {
    pub upper: Vec<Rect>,
    pub lower: Vec<Rect>,
}

impl TrapRegion {
    pub fn boxes(&self) -> impl Iterator<Item = &Rect> {
        self.upper.iter().chain(self.lower.iter())
    }

    pub fn contains(&self, p: &Point2) -> Result<bool, ArithError> {
        for r in self.boxes() {
            if r.contains(&p.x, &p.y)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn to_f64(&self) -> Vec<RectF> {
        self.boxes().map(Rect::to_f64).collect()
    }
}

fn fin(s: Scalar) -> Bound {
    Bound::Fin(s)
}

/// Closed-form regions for the degenerate pairs `a = 0`, `b = 0` and `(-1, 1)`.
pub fn degenerate_region(kind: Degenerate) -> TrapRegion {
    use Bound::{NegInf, PosInf};
    let i = Bound::int;
    let r = Rect::new;
    match kind {
        Degenerate::AZero => TrapRegion {
            upper: vec![],
            lower: vec![
                r(i(-1), i(0), NegInf, i(-1)),
                r(i(0), i(1), NegInf, i(0)),
                r(i(1), PosInf, NegInf, i(1)),
            ],
        },
        Degenerate::BZero => TrapRegion {
            upper: vec![
                r(NegInf, i(-1), i(-1), PosInf),
                r(i(-1), i(0), i(0), PosInf),
                r(i(0), i(1), i(1), PosInf),
            ],
            lower: vec![],
        },
        Degenerate::MinusOneOne => TrapRegion {
            upper: vec![r(NegInf, i(-1), i(0), PosInf), r(i(-1), i(0), i(1), PosInf)],
            lower: vec![r(i(0), i(1), NegInf, i(-1)), r(i(1), PosInf, NegInf, i(0))],
        },
    }
}

/// The trapping region: every off-diagonal orbit enters it and it is forward invariant.
pub fn trapping_region(params: &Params) -> Result<TrapRegion, ArithError> {
    use Bound::{NegInf, PosInf};
    if let Some(kind) = params.degenerate() {
        return Ok(degenerate_region(kind));
    }
    let (a, b) = (params.a(), params.b());
    let one = params.int(1);
    let i = |n| fin(params.int(n));
    let b_minus_1 = b.sub(&one)?;
    let a_plus_1 = a.add(&one)?;
    let neg_inv_a = a.recip()?.neg();
    let neg_inv_b = b.recip()?.neg();

    let upper = if b.try_cmp(&one)? != Ordering::Less {
        vec![
            Rect::new(NegInf, i(-1), fin(b_minus_1.clone()), PosInf),
            Rect::new(i(-1), i(0), fin(neg_inv_a.clone()), PosInf),
        ]
    } else {
        let c = b.div(&b_minus_1)?.neg();
        let corner = if c.try_cmp(&neg_inv_a)? == Ordering::Less { c } else { neg_inv_a.clone() };
        vec![
            Rect::new(NegInf, i(-1), fin(b_minus_1.clone()), PosInf),
            Rect::new(i(-1), i(0), fin(corner), PosInf),
            Rect::new(i(0), i(1), fin(b_minus_1.recip()?.neg()), PosInf),
        ]
    };
    let lower = if a.try_cmp(&params.int(-1))? != Ordering::Greater {
        vec![
            Rect::new(i(0), i(1), NegInf, fin(neg_inv_b.clone())),
            Rect::new(i(1), PosInf, NegInf, fin(a_plus_1.clone())),
        ]
    } else {
        let c = a.div(&a_plus_1)?;
        let corner = if c.try_cmp(&neg_inv_b)? == Ordering::Greater { c } else { neg_inv_b.clone() };
        vec![
            Rect::new(i(-1), i(0), NegInf, fin(a_plus_1.recip()?.neg())),
            Rect::new(i(0), i(1), NegInf, fin(corner)),
            Rect::new(i(1), PosInf, NegInf, fin(a_plus_1.clone())),
        ]
    };
    Ok(TrapRegion { upper, lower })
}

#[derive(Clone, Debug)]
pub enum TrapOutcome {
    /// Number of steps needed to enter the region.
    Trapped(usize),
    /// The cap was reached; carries the last iterate.
    Cap(Point2),
}

pub fn time_to_trap(p: &Point2, params: &Params, cap: usize) -> Result<TrapOutcome, NatError> {
    if p.on_diagonal() {
        return Err(NatError::Diagonal);
    }
    let region = trapping_region(params)?;
    let mut cur = p.clone();
    for n in 0..=cap {
        if region.contains(&cur)? {
            return Ok(TrapOutcome::Trapped(n));
        }
        if n < cap {
            cur = reduction_step(&cur, params)?;
        }
    }
    Ok(TrapOutcome::Cap(cur))
}

/// Image of a closed interval under a generator, split where it passes
/// through infinity.
pub fn gen_interval(g: Gen, lo: &Bound, hi: &Bound) -> Result<Vec<(Bound, Bound)>, ArithError> {
    let shift = |b: &Bound, k: i64| -> Result<Bound, ArithError> {
        Ok(match b {
            Bound::Fin(s) => Bound::Fin(s.add(&s.like_int(k))?),
            other => other.clone(),
        })
    };
    match g {
        Gen::T => Ok(vec![(shift(lo, 1)?, shift(hi, 1)?)]),
        Gen::Tinv => Ok(vec![(shift(lo, -1)?, shift(hi, -1)?)]),
        Gen::S => {
            let s_of = |b: &Bound, is_hi: bool| -> Result<Bound, ArithError> {
                Ok(match b {
                    Bound::Fin(s) if s.is_zero() => {
                        if is_hi {
                            Bound::PosInf
                        } else {
                            Bound::NegInf
                        }
                    }
                    Bound::Fin(s) => Bound::Fin(s.recip()?.neg()),
                    _ => Bound::Fin(lo.finite().or(hi.finite()).map(|s| s.like_int(0)).unwrap_or_else(Scalar::zero)),
                })
            };
            let zero = Bound::Fin(lo.finite().or(hi.finite()).map(|s| s.like_int(0)).unwrap_or_else(Scalar::zero));
            let lo_neg = lo.try_cmp(&zero)? == Ordering::Less;
            let hi_pos = hi.try_cmp(&zero)? == Ordering::Greater;
            if lo_neg && hi_pos {
                Ok(vec![(s_of(lo, false)?, Bound::PosInf), (Bound::NegInf, s_of(hi, true)?)])
            } else {
                Ok(vec![(s_of(lo, false)?, s_of(hi, true)?)])
            }
        }
    }
}

/// Image of a box under a generator acting on both coordinates.
pub fn gen_rect(g: Gen, r: &Rect) -> Result<Vec<Rect>, ArithError> {
    let xs = gen_interval(g, &r.x0, &r.x1)?;
    let ys = gen_interval(g, &r.y0, &r.y1)?;
    let mut out = Vec::new();
    for (x0, x1) in &xs {
        for (y0, y1) in &ys {
            out.push(Rect::new(x0.clone(), x1.clone(), y0.clone(), y1.clone()));
        }
    }
    Ok(out)
}

/// Cuts a box along `y = a` and `y = b` into pieces on which `rho` is constant.
/// Pieces of zero height are dropped.
pub fn split_by_rho(r: &Rect, params: &Params) -> Result<Vec<(Rect, Gen)>, ArithError> {
    let a = Bound::Fin(params.a().clone());
    let b = Bound::Fin(params.b().clone());
    let bands = [
        (Bound::NegInf, a.clone(), Gen::T),
        (a, b.clone(), Gen::S),
        (b, Bound::PosInf, Gen::Tinv),
    ];
    let mut out = Vec::new();
    for (lo, hi, g) in bands {
        let y0 = r.y0.clone().max(lo);
        let y1 = r.y1.clone().min(hi);
        if y0.try_cmp(&y1)? == Ordering::Less {
            out.push((Rect::new(r.x0.clone(), r.x1.clone(), y0, y1), g));
        }
    }
    Ok(out)
}

/// Exact image of a box under the reduction map, as a list of boxes.
pub fn map_rect(r: &Rect, params: &Params) -> Result<Vec<Rect>, ArithError> {
    let mut out = Vec::new();
    for (piece, g) in split_by_rho(r, params)? {
        out.extend(gen_rect(g, &piece)?);
    }
    Ok(out)
}

/// Result of [`sample_attractor`]. Points with an infinite coordinate are
/// kept (as `+-inf`) and counted; plots skip them.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Cloud {
    pub points: Vec<[f64; 2]>,
    pub at_infinity: usize,
}

impl Cloud {
    pub fn finite_points(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.points.iter().filter(|p| p[0].is_finite() && p[1].is_finite())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s.push_str(&format!("{} {}\n", p[0], p[1]));
        }
        s
    }
}

/// Half-width of the window random starts are drawn from.
pub const SAMPLE_RADIUS: f64 = 20.0;
/// Points per independent random stream.
pub const CHUNK: usize = 1024;

/// Random generator for chunk `chunk` of a run seeded with `seed`: the same
/// key with one stream per chunk.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Uniform off-diagonal start in `[-radius, radius]^2` with `|x - y| > 1e-3`.
pub fn random_start<R: Rng>(rng: &mut R, radius: f64) -> (f64, f64) {
    loop {
        let x = rng.random_range(-radius..radius);
        let y = rng.random_range(-radius..radius);
        if (x - y).abs() > 1e-3 {
            return (x, y);
        }
    }
}

pub fn sample_attractor(params: &Params, burn_in: usize, n_points: usize, seed: u64) -> Cloud {
    sample_attractor_in(params, burn_in, n_points, seed, SAMPLE_RADIUS)
}

/// Iterates `burn_in` float steps from `n_points` random starts. The output
/// order depends only on the seed, not on the thread count.
pub fn sample_attractor_in(params: &Params, burn_in: usize, n_points: usize, seed: u64, radius: f64) -> Cloud {
    let (a, b) = (params.af(), params.bf());
    let chunks = n_points.div_ceil(CHUNK);
    let parts: Vec<Vec<[f64; 2]>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n_points - c * CHUNK);
            (0..len)
                .map(|_| {
                    let (mut x, mut y) = random_start(&mut rng, radius);
                    for _ in 0..burn_in {
                        (x, y) = reduction_step_f64(x, y, a, b);
                    }
                    [x, y]
                })
                .collect()
        })
        .collect();
    let points: Vec<[f64; 2]> = parts.into_iter().flatten().collect();
    let at_infinity = points.iter().filter(|p| !p[0].is_finite() || !p[1].is_finite()).count();
    Cloud { points, at_infinity }
}
