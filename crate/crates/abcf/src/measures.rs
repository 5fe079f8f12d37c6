//! Invariant measures of the first-return map to `[a, b)` in the parameter
//! range `1 <= -1/a <= b+1`, `a-1 <= -1/b <= -1`, where the compactified
//! domain is a union of four boxes.
//!
//! The map is `F(x, y) = (-1/x - n, -1/(y - n))` with `n` the digit of
//! `-1/x`; it preserves `dx dy / (1+xy)^2`, normalized by
//! `C = log[(1+b)(1-a)]`.

use crate::cf::{digit_ab, CfError, Params};
use crate::error::ArithError;
use crate::geom::RectF;
use crate::natext::{chunk_rng, reduction_step_f64};
use crate::quad::{integrate, integrate_log_weighted, QuadError};
use crate::scalar::{ExtReal, Scalar};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("parameters {0} are outside the four-box range")]
    NotSimple(String),
    #[error("({x}, {y}) is outside the compactified domain")]
    Outside { x: f64, y: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

fn exact_simple(params: &Params) -> std::result::Result<bool, ArithError> {
    let (a, b) = (params.a(), params.b());
    if a.is_zero() || b.is_zero() {
        return Ok(false);
    }
    let one = Scalar::one();
    let ia = a.recip()?.neg();
    let ib = b.recip()?.neg();
    let le = |x: &Scalar, y: &Scalar| -> std::result::Result<bool, ArithError> { Ok(x.try_cmp(y)? != Ordering::Greater) };
    Ok(le(&one, &ia)?
        && le(&ia, &b.add(&one)?)?
        && le(&a.sub(&one)?, &ib)?
        && le(&ib, &one.neg())?)
}

/// `1 <= -1/a <= b+1` and `a-1 <= -1/b <= -1`; false when `a` or `b` is 0.
pub fn simple_case_applies(params: &Params) -> bool {
    if params.is_exact() {
        return exact_simple(params).unwrap_or(false);
    }
    let (a, b) = (params.af(), params.bf());
    if a == 0.0 || b == 0.0 {
        return false;
    }
    let (ia, ib) = (-1.0 / a, -1.0 / b);
    1.0 <= ia && ia <= b + 1.0 && a - 1.0 <= ib && ib <= -1.0
}

/// `int int dx dy / (1+xy)^2` over `[x0,x1] x [y0,y1]`, for boxes where
/// `1 + xy > 0`.
pub fn box_mass(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    ((1.0 + x1 * y1) * (1.0 + x0 * y0) / ((1.0 + x1 * y0) * (1.0 + x0 * y1))).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HatBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    /// `int_{y0}^{y1} dy/(1+xy)^2 = 1/(w - x)` with this `w` (or `1/(x + w)` below).
    pub weight: MarginalTerm,
}

/// One term of the marginal density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MarginalTerm {
    OneMinusX,
    TwoMinusX,
    XPlusTwo,
    XPlusOne,
}

impl MarginalTerm {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            MarginalTerm::OneMinusX => 1.0 / (1.0 - x),
            MarginalTerm::TwoMinusX => 1.0 / (2.0 - x),
            MarginalTerm::XPlusTwo => 1.0 / (x + 2.0),
            MarginalTerm::XPlusOne => 1.0 / (x + 1.0),
        }
    }
}

impl HatBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    pub fn mass(&self) -> f64 {
        box_mass(self.x0, self.x1, self.y0, self.y1)
    }
}

/// The four boxes; boxes of zero width (boundary parameters such as
/// `(-1, 1)`) are dropped.
#[derive(Debug, Clone, Serialize)]
pub struct HatDomain {
    pub a: f64,
    pub b: f64,
    pub boxes: Vec<HatBox>,
    /// `log[(1+b)(1-a)]`.
    pub c: f64,
}

impl HatDomain {
    pub fn new(params: &Params) -> Result<HatDomain> {
        if !simple_case_applies(params) {
            return Err(MeasureError::NotSimple(params.to_string()));
        }
        let (a, b) = (params.af(), params.bf());
        let (pb, pa) = (-1.0 / b + 1.0, -1.0 / a - 1.0);
        let all = [
            HatBox { x0: a, x1: pb, y0: -1.0, y1: 0.0, weight: MarginalTerm::OneMinusX },
            HatBox { x0: pb, x1: a + 1.0, y0: -0.5, y1: 0.0, weight: MarginalTerm::TwoMinusX },
            HatBox { x0: b - 1.0, x1: pa, y0: 0.0, y1: 0.5, weight: MarginalTerm::XPlusTwo },
            HatBox { x0: pa, x1: b, y0: 0.0, y1: 1.0, weight: MarginalTerm::XPlusOne },
        ];
        let boxes = all.into_iter().filter(|r| r.x0 < r.x1).collect();
        Ok(HatDomain { a, b, boxes, c: ((1.0 + b) * (1.0 - a)).ln() })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.boxes.iter().any(|r| r.contains(x, y))
    }

    /// `1/(C (1+xy)^2)` inside the domain, `None` outside.
    pub fn nu_density(&self, x: f64, y: f64) -> Option<f64> {
        self.contains(x, y).then(|| 1.0 / (self.c * (1.0 + x * y).powi(2)))
    }

    /// Density of the `x`-marginal; 0 outside `[a, b]`. Overlapping boxes add.
    pub fn mu_density(&self, x: f64) -> f64 {
        self.boxes
            .iter()
            .filter(|r| r.x0 < x && x < r.x1)
            .map(|r| r.weight.eval(x))
            .sum::<f64>()
            / self.c
    }

    /// `nu(x' <= t)`.
    pub fn x_cdf(&self, t: f64) -> f64 {
        self.boxes
            .iter()
            .filter(|r| t > r.x0)
            .map(|r| box_mass(r.x0, t.min(r.x1), r.y0, r.y1))
            .sum::<f64>()
            / self.c
    }

    /// `nu(y' <= t)`.
    pub fn y_cdf(&self, t: f64) -> f64 {
        self.boxes
            .iter()
            .filter(|r| t > r.y0)
            .map(|r| box_mass(r.x0, r.x1, r.y0, t.min(r.y1)))
            .sum::<f64>()
            / self.c
    }

    pub fn bounding_box(&self) -> [f64; 4] {
        let x0 = self.boxes.iter().map(|r| r.x0).fold(f64::INFINITY, f64::min);
        let x1 = self.boxes.iter().map(|r| r.x1).fold(f64::NEG_INFINITY, f64::max);
        let y0 = self.boxes.iter().map(|r| r.y0).fold(f64::INFINITY, f64::min);
        let y1 = self.boxes.iter().map(|r| r.y1).fold(f64::NEG_INFINITY, f64::max);
        [x0, x1, y0, y1]
    }

    /// Largest density value; `1 + xy` is bilinear, so it is attained at a corner.
    pub fn max_density(&self) -> f64 {
        self.boxes
            .iter()
            .flat_map(|r| [(r.x0, r.y0), (r.x0, r.y1), (r.x1, r.y0), (r.x1, r.y1)])
            .map(|(x, y)| 1.0 / (self.c * (1.0 + x * y).powi(2)))
            .fold(0.0, f64::max)
    }
}

/// Float digit of `v` for the parameters `(a, b)`.
pub fn digit_f64(v: f64, a: f64, b: f64) -> f64 {
    if v < a {
        (v - a).floor()
    } else if v < b {
        0.0
    } else {
        (v - b).floor() + 1.0
    }
}

/// One step of the map on the compactified domain. At `x = 0` the map fixes
/// `x` and the digit is infinite, so `y` goes to 0; the digit is `None` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatStep {
    pub x: f64,
    pub y: f64,
    pub digit: Option<f64>,
}

pub fn f_hat_step(x: f64, y: f64, a: f64, b: f64) -> Result<HatStep> {
    if !(a <= x && x < b) {
        return Err(MeasureError::Outside { x, y });
    }
    if x == 0.0 {
        return Ok(HatStep { x: 0.0, y: 0.0, digit: None });
    }
    let v = -1.0 / x;
    let n = digit_f64(v, a, b);
    Ok(HatStep { x: v - n, y: -1.0 / (y - n), digit: Some(n) })
}

/// Exact version of [`f_hat_step`] for `x != 0`.
pub fn f_hat_step_exact(x: &Scalar, y: &Scalar, params: &Params) -> Result<(Scalar, Scalar, i64)> {
    let v = x.recip()?.neg();
    let n = digit_ab(&ExtReal::Fin(v.clone()), params)?;
    let nn = Scalar::int(n);
    let nx = v.sub(&nn)?;
    let ny = y.sub(&nn)?.recip()?.neg();
    if params.a().try_cmp(x)? == Ordering::Greater || x.try_cmp(params.b())? != Ordering::Less {
        return Err(MeasureError::Outside { x: x.to_f64(), y: y.to_f64() });
    }
    Ok((nx, ny, n))
}

pub const QUAD_TOL: f64 = 1e-12;

/// `nu(domain)` by nested numerical quadrature, without the closed-form marginal.
pub fn nu_mass(dom: &HatDomain, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for r in &dom.boxes {
        let inner = |x: f64| {
            integrate(|y| 1.0 / (1.0 + x * y).powi(2), r.y0, r.y1, tol * 1e-2)
                .map(|q| q.value)
                .unwrap_or(f64::NAN)
        };
        total += integrate(inner, r.x0, r.x1, tol)?.value;
    }
    Ok(total / dom.c)
}

/// Numerical `y`-integral of the 2D density over the fibre at `x`.
pub fn fibre_integral(dom: &HatDomain, x: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for r in dom.boxes.iter().filter(|r| r.x0 < x && x < r.x1) {
        total += integrate(|y| 1.0 / (1.0 + x * y).powi(2), r.y0, r.y1, tol)?.value;
    }
    Ok(total / dom.c)
}

/// `mu([a, b])` by quadrature of the closed-form marginal.
pub fn mu_mass(dom: &HatDomain, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for r in &dom.boxes {
        total += integrate(|x| r.weight.eval(x), r.x0, r.x1, tol)?.value;
    }
    Ok(total / dom.c)
}

/// Sum of the four integrals `int log|x| w(x) dx` of the entropy formula.
pub fn log_integral(dom: &HatDomain, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for r in &dom.boxes {
        total += integrate_log_weighted(|x| r.weight.eval(x), r.x0, r.x1, tol)?.value;
    }
    Ok(total)
}

/// Rokhlin's formula `-2 int log|x| dmu` by quadrature.
pub fn entropy_rokhlin(params: &Params, tol: f64) -> Result<f64> {
    let dom = HatDomain::new(params)?;
    Ok(-2.0 * log_integral(&dom, tol)? / dom.c)
}

/// `pi^2 / (3 log[(1-a)(1+b)])`.
pub fn entropy_closed(params: &Params) -> Result<f64> {
    let dom = HatDomain::new(params)?;
    Ok(PI * PI / (3.0 * dom.c))
}

/// Draws `n` points from `nu` by rejection from the bounding box. Chunk `k`
/// uses stream `k` of the seed, so the output does not depend on threads.
pub fn sample_nu(dom: &HatDomain, n: usize, seed: u64) -> Vec<[f64; 2]> {
    const CHUNK: usize = 4096;
    let [x0, x1, y0, y1] = dom.bounding_box();
    let top = dom.max_density();
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let want = CHUNK.min(n - c * CHUNK);
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                let x = rng.random_range(x0..x1);
                let y = rng.random_range(y0..y1);
                if let Some(d) = dom.nu_density(x, y) {
                    if rng.random::<f64>() * top < d {
                        out.push([x, y]);
                    }
                }
            }
            out
        })
        .flatten()
        .collect()
}

fn ks(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub n_points: usize,
    /// Largest gap between the pushed-forward marginal CDFs and the `nu` marginals.
    pub ks_x: Option<f64>,
    pub ks_y: Option<f64>,
    /// Pushed-forward points that left the domain.
    pub escaped: usize,
}

impl InvarianceReport {
    pub fn statistic(&self) -> Option<f64> {
        Some(self.ks_x?.max(self.ks_y?))
    }
}

/// Samples `nu`, applies one step of the map and compares both marginals of
/// the image with those of `nu` (Kolmogorov-Smirnov distance).
pub fn invariance_check(params: &Params, n_points: usize, seed: u64) -> Result<InvarianceReport> {
    let dom = HatDomain::new(params)?;
    if n_points == 0 {
        return Ok(InvarianceReport { n_points, ks_x: None, ks_y: None, escaped: 0 });
    }
    let pts = sample_nu(&dom, n_points, seed);
    let (a, b) = (dom.a, dom.b);
    let mut xs = Vec::with_capacity(n_points);
    let mut ys = Vec::with_capacity(n_points);
    let mut escaped = 0;
    for p in &pts {
        // the box edge x = b belongs to no half-open interval; it has measure 0
        let Ok(s) = f_hat_step(p[0], p[1], a, b) else { continue };
        if !dom.contains(s.x, s.y) {
            escaped += 1;
        }
        xs.push(s.x);
        ys.push(s.y);
    }
    xs.par_sort_unstable_by(f64::total_cmp);
    ys.par_sort_unstable_by(f64::total_cmp);
    Ok(InvarianceReport {
        n_points,
        ks_x: Some(ks(&xs, |t| dom.x_cdf(t))),
        ks_y: Some(ks(&ys, |t| dom.y_cdf(t))),
        escaped,
    })
}

/// Time averages of `x` and `x^2` along one float orbit of the 1D map,
/// against their `mu`-integrals. A statistical sanity check only.
#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffReport {
    pub steps: usize,
    pub time_avg: [f64; 2],
    pub space_avg: [f64; 2],
}

impl BirkhoffReport {
    pub fn max_gap(&self) -> f64 {
        (self.time_avg[0] - self.space_avg[0]).abs().max((self.time_avg[1] - self.space_avg[1]).abs())
    }
}

pub fn birkhoff_check(params: &Params, steps: usize, seed: u64) -> Result<BirkhoffReport> {
    let dom = HatDomain::new(params)?;
    let (a, b) = (dom.a, dom.b);
    let mut rng = chunk_rng(seed, 0);
    let mut x: f64 = rng.random_range(a..b);
    let mut sums = [0.0, 0.0];
    for _ in 0..steps {
        sums[0] += x;
        sums[1] += x * x;
        x = f_hat_step(x, 0.0, a, b)?.x;
        // a float orbit can land on the fixed point 0 or slip to b; restart it
        if x == 0.0 || x >= b {
            x = rng.random_range(a..b);
        }
    }
    let n = steps.max(1) as f64;
    let mut space = [0.0, 0.0];
    for r in &dom.boxes {
        space[0] += integrate(|t| t * r.weight.eval(t), r.x0, r.x1, QUAD_TOL)?.value;
        space[1] += integrate(|t| t * t * r.weight.eval(t), r.x0, r.x1, QUAD_TOL)?.value;
    }
    Ok(BirkhoffReport {
        steps,
        time_avg: [sums[0] / n, sums[1] / n],
        space_avg: [space[0] / dom.c, space[1] / dom.c],
    })
}

/// Largest gap between the `x`-marginal density and a numerical `y`-integral
/// of the 2D density, over `n` evenly spaced interior fibres.
pub fn fibre_check(params: &Params, n: usize) -> Result<f64> {
    let dom = HatDomain::new(params)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        let x = dom.a + (dom.b - dom.a) * (i as f64 + 0.5) / n as f64;
        worst = worst.max((fibre_integral(&dom, x, 1e-13)? - dom.mu_density(x)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyReport {
    pub samples: usize,
    /// Samples whose preimage `(-1/y, x)` lies in the attractor boxes.
    pub in_attractor: usize,
    /// Samples with `|1/x| > 10^4`, skipped because the return takes too many translations.
    pub skipped: usize,
    /// Samples where the return used a different number of translations than the digit.
    pub digit_mismatches: usize,
    /// Largest relative distance between the map and the first return of the reduction map.
    pub max_gap: f64,
}

/// Compares the map with the first return of the reduction map to the strip
/// `a <= y < b`, through the change of coordinates `(x, y) -> (y, -1/x)`.
pub fn conjugacy_check(params: &Params, rects: &[RectF], n: usize, seed: u64) -> Result<ConjugacyReport> {
    let dom = HatDomain::new(params)?;
    let (a, b) = (dom.a, dom.b);
    let inside = |x: f64, y: f64| {
        rects.iter().any(|r| {
            let tol = 1e-9;
            (x >= r.x0 - tol || r.x0 == f64::NEG_INFINITY)
                && (x <= r.x1 + tol || r.x1 == f64::INFINITY)
                && y >= r.y0 - tol
                && y <= r.y1 + tol
        })
    };
    let mut in_attractor = 0;
    let mut max_gap = 0.0f64;
    let (mut count, mut skipped, mut digit_mismatches) = (0, 0, 0);
    for p in sample_nu(&dom, n, seed) {
        let (hx, hy) = (p[0], p[1]);
        if hy == 0.0 || hx >= b {
            continue;
        }
        if hx.abs() < 1e-4 {
            skipped += 1;
            continue;
        }
        count += 1;
        let (mut x, mut y) = (-1.0 / hy, hx);
        if inside(x, y) {
            in_attractor += 1;
        }
        (x, y) = reduction_step_f64(x, y, a, b);
        let mut shift = 0.0;
        while !(a <= y && y < b) {
            let before = y;
            (x, y) = reduction_step_f64(x, y, a, b);
            shift += before - y;
        }
        let s = f_hat_step(hx, hy, a, b)?;
        if s.digit != Some(shift) {
            digit_mismatches += 1;
        }
        let rel = |u: f64, v: f64| (u - v).abs() / v.abs().max(1.0);
        max_gap = max_gap.max(rel(s.x, y)).max(rel(s.y, -1.0 / x));
    }
    Ok(ConjugacyReport { samples: count, in_attractor, skipped, digit_mismatches, max_gap })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub h_closed: f64,
    pub h_rokhlin: f64,
    pub log_integral: f64,
    pub nu_mass: f64,
    pub mu_mass: f64,
    pub ks_stat: Option<f64>,
}

pub fn measure_report(params: &Params, n_points: usize, seed: u64) -> Result<MeasureReport> {
    let dom = HatDomain::new(params)?;
    let inv = invariance_check(params, n_points, seed)?;
    Ok(MeasureReport {
        c: dom.c,
        h_closed: entropy_closed(params)?,
        h_rokhlin: entropy_rokhlin(params, QUAD_TOL)?,
        log_integral: log_integral(&dom, QUAD_TOL)?,
        nu_mass: nu_mass(&dom, 1e-11)?,
        mu_mass: mu_mass(&dom, QUAD_TOL)?,
        ks_stat: inv.statistic(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(an: i64, ad: i64, bn: i64, bd: i64) -> Params {
        Params::ratio(an, ad, bn, bd)
    }

    #[test]
    fn simple_case_examples() {
        assert!(simple_case_applies(&p(-7, 10, 4, 5)));
        assert!(simple_case_applies(&p(-1, 1, 1, 1)));
        assert!(!simple_case_applies(&p(-4, 5, 2, 5)));
        assert!(!simple_case_applies(&p(-1, 1, 0, 1)));
        assert!(simple_case_applies(&Params::float(-0.7, 0.8).unwrap()));
        assert!(!simple_case_applies(&Params::float(-0.8, 0.4).unwrap()));
    }

    #[test]
    fn hat_step_example() {
        let s = f_hat_step(0.5, 0.0, -0.7, 0.8).unwrap();
        assert_eq!(s.digit, Some(-2.0));
        assert_eq!((s.x, s.y), (0.0, -0.5));
        let (x, y, n) = f_hat_step_exact(&Scalar::ratio(1, 2), &Scalar::zero(), &p(-7, 10, 4, 5)).unwrap();
        assert!(x.is_zero() && y.eq_val(&Scalar::ratio(-1, 2)) && n == -2);
        let z = f_hat_step(0.0, 0.3, -0.7, 0.8).unwrap();
        assert_eq!((z.x, z.digit), (0.0, None));
        assert!(f_hat_step(0.8, 0.0, -0.7, 0.8).is_err());
    }

    #[test]
    fn classical_domain_drops_empty_boxes() {
        let d = HatDomain::new(&p(-1, 1, 1, 1)).unwrap();
        assert_eq!(d.boxes.len(), 2);
        assert!((d.c - 4f64.ln()).abs() < 1e-15);
        assert!((d.x_cdf(1.0) - 1.0).abs() < 1e-15 && (d.y_cdf(1.0) - 1.0).abs() < 1e-15);
        assert!(HatDomain::new(&p(-4, 5, 2, 5)).is_err());
    }

    #[test]
    fn box_mass_matches_quadrature() {
        let q = integrate(
            |x| integrate(|y| 1.0 / (1.0 + x * y).powi(2), -0.5, 0.0, 1e-14).unwrap().value,
            -0.25,
            0.3,
            1e-13,
        )
        .unwrap();
        assert!((q.value - box_mass(-0.25, 0.3, -0.5, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn masses_and_entropy() {
        for params in [p(-7, 10, 4, 5), p(-1, 1, 1, 1)] {
            let d = HatDomain::new(&params).unwrap();
            assert!((nu_mass(&d, 1e-11).unwrap() - 1.0).abs() < 1e-8);
            assert!((mu_mass(&d, 1e-12).unwrap() - 1.0).abs() < 1e-8);
            let h = entropy_rokhlin(&params, 1e-12).unwrap();
            assert!((h - entropy_closed(&params).unwrap()).abs() < 1e-6);
            assert!((log_integral(&d, 1e-12).unwrap() + PI * PI / 6.0).abs() < 1e-9);
        }
        assert!((entropy_closed(&p(-1, 1, 1, 1)).unwrap() - 2.37314).abs() < 1e-5);
        assert!((entropy_closed(&p(-7, 10, 4, 5)).unwrap() - 2.9415).abs() < 1e-3);
    }

    #[test]
    fn fibres_and_conjugacy() {
        let params = p(-7, 10, 4, 5);
        assert!(fibre_check(&params, 50).unwrap() < 1e-10);
        let dom = crate::attractor::build_attractor(&params).unwrap();
        let r = conjugacy_check(&params, &dom.float_rects(), 10_000, 5).unwrap();
        assert_eq!(r.in_attractor, r.samples);
        assert!(r.max_gap < 1e-9 && r.digit_mismatches == 0, "{r:?}");
    }

    #[test]
    fn birkhoff_averages() {
        let r = birkhoff_check(&p(-1, 1, 1, 1), 200_000, 1).unwrap();
        assert!(r.max_gap() < 2e-2, "{r:?}");
    }

    #[test]
    fn small_invariance_run() {
        let r = invariance_check(&p(-7, 10, 4, 5), 20_000, 3).unwrap();
        assert!(r.statistic().unwrap() < 0.02);
        assert_eq!(r.escaped, 0);
        let e = invariance_check(&p(-7, 10, 4, 5), 0, 3).unwrap();
        assert!(e.statistic().is_none());
    }
}
