//! The attractor of the reduction map as an explicit two-component domain
//! bounded by step functions, together with its checks: connectivity of the
//! steps, exact tiling by the images of its pieces, and comparison with
//! sampled and scanned orbits.

use crate::cf::{Degenerate, Params};
use crate::cycles::{self, Classification, CycleError, Endpoint, Side, TruncatedOrbits};
use crate::error::ArithError;
use crate::geom::{Bound, Rect, RectF};
use crate::mobius::{Gen, Mobius};
use crate::natext::{self, gen_interval, gen_rect, reduction_step_f64, Cloud, Point2};
use crate::scalar::{ExtReal, Scalar};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttractorError {
    #[error("an orbit of a or b does not close up within the cap (exceptional or float parameters)")]
    NotFinite,
    #[error("level {0} has no neighbour on the {1} boundary")]
    MissingNeighbour(String, Component),
    #[error("corner word {0} is not hyperbolic")]
    NonHyperbolic(String),
    #[error("corner values out of range: x_a = {x_a}, x_b = {x_b}")]
    CornerRange { x_a: String, x_b: String },
    #[error("{component} levels {below} and {above} are not connected")]
    Connectivity { component: Component, below: String, above: String },
    #[error("a level is at infinity")]
    InfiniteLevel,
    #[error("empty point cloud")]
    EmptyCloud,
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Upper,
    Lower,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Upper => write!(f, "upper"),
            Component::Lower => write!(f, "lower"),
        }
    }
}

/// Which truncated orbit a level comes from. `Trap` marks the closed-form
/// regions of the degenerate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Origin {
    #[serde(rename = "L_a")]
    La,
    #[serde(rename = "U_a")]
    Ua,
    #[serde(rename = "L_b")]
    Lb,
    #[serde(rename = "U_b")]
    Ub,
    #[serde(rename = "trap")]
    Trap,
}

impl Origin {
    fn is_a(self) -> bool {
        matches!(self, Origin::La | Origin::Ua)
    }
}

/// One horizontal step `[x_lo, x_hi] x {y}` of a boundary.
#[derive(Debug, Clone)]
pub struct Step {
    pub x_lo: Bound,
    pub x_hi: Bound,
    pub y: Scalar,
    pub origin: Origin,
    /// Position of the level along its truncated orbit.
    pub index: usize,
}

impl Step {
    /// The box this step bounds: above it in the upper component, below it in
    /// the lower one.
    pub fn rect(&self, component: Component) -> Rect {
        let y = Bound::Fin(self.y.clone());
        match component {
            Component::Upper => Rect::new(self.x_lo.clone(), self.x_hi.clone(), y, Bound::PosInf),
            Component::Lower => Rect::new(self.x_lo.clone(), self.x_hi.clone(), Bound::NegInf, y),
        }
    }
}

/// The segment where the images of the last levels of the two sides of a
/// strong cycle meet, at the level of the cycle end.
#[derive(Debug, Clone)]
pub struct LockingSegment {
    pub endpoint: Endpoint,
    pub level: Scalar,
    pub from_lower: Vec<(Bound, Bound)>,
    pub from_upper: Vec<(Bound, Bound)>,
}

impl LockingSegment {
    /// Both sides land on the same segment.
    pub fn coincide(&self) -> bool {
        self.from_lower.len() == self.from_upper.len()
            && self
                .from_lower
                .iter()
                .zip(&self.from_upper)
                .all(|(l, u)| l.0.same(&u.0) && l.1.same(&u.1))
    }
}

/// The domain: an upper component above a non-decreasing step function and a
/// lower component below one. Steps are sorted by level, ties left to right.
#[derive(Debug, Clone)]
pub struct RectDomain {
    pub a: Scalar,
    pub b: Scalar,
    pub x_a: Option<ExtReal>,
    pub x_b: Option<ExtReal>,
    pub upper: Vec<Step>,
    pub lower: Vec<Step>,
    pub locking: Vec<LockingSegment>,
}

impl RectDomain {
    pub fn upper_rects(&self) -> Vec<Rect> {
        self.upper.iter().map(|s| s.rect(Component::Upper)).collect()
    }

    pub fn lower_rects(&self) -> Vec<Rect> {
        self.lower.iter().map(|s| s.rect(Component::Lower)).collect()
    }

    pub fn rects(&self) -> Vec<Rect> {
        let mut r = self.upper_rects();
        r.extend(self.lower_rects());
        r
    }

    pub fn float_rects(&self) -> Vec<RectF> {
        self.rects().iter().map(Rect::to_f64).collect()
    }

    pub fn steps(&self, component: Component) -> &[Step] {
        match component {
            Component::Upper => &self.upper,
            Component::Lower => &self.lower,
        }
    }

    /// Closed exact membership.
    pub fn contains(&self, p: &Point2) -> Result<bool, ArithError> {
        for r in self.rects() {
            if r.contains(&p.x, &p.y)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// JSON view with exact strings and float shadows.
    pub fn to_json(&self) -> DomainJson {
        let step = |s: &Step| StepJson {
            x_lo: s.x_lo.to_string(),
            x_hi: s.x_hi.to_string(),
            y: s.y.to_string(),
            origin: s.origin,
            x_lo_f: s.x_lo.to_f64(),
            x_hi_f: s.x_hi.to_f64(),
            y_f: s.y.to_f64(),
        };
        DomainJson {
            a: self.a.to_string(),
            b: self.b.to_string(),
            x_a: self.x_a.as_ref().map(|v| v.to_string()),
            x_b: self.x_b.as_ref().map(|v| v.to_string()),
            x_a_f: self.x_a.as_ref().map(|v| v.to_f64()),
            x_b_f: self.x_b.as_ref().map(|v| v.to_f64()),
            upper: self.upper.iter().map(step).collect(),
            lower: self.lower.iter().map(step).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepJson {
    pub x_lo: String,
    pub x_hi: String,
    pub y: String,
    pub origin: Origin,
    pub x_lo_f: f64,
    pub x_hi_f: f64,
    pub y_f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainJson {
    pub a: String,
    pub b: String,
    pub x_a: Option<String>,
    pub x_b: Option<String>,
    pub x_a_f: Option<f64>,
    pub x_b_f: Option<f64>,
    pub upper: Vec<StepJson>,
    pub lower: Vec<StepJson>,
}

// ---------------------------------------------------------------------------
// construction

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unknown {
    XA,
    XB,
}

/// A segment end: a constant, or a Mobius image of one of the corner values.
#[derive(Debug, Clone)]
enum End {
    Const(ExtReal),
    Var(Unknown, Mobius),
}

impl End {
    fn map(&self, g: Gen) -> Result<End, ArithError> {
        Ok(match self {
            End::Const(v) => End::Const(Mobius::gen(g).apply(v)?),
            End::Var(u, m) => End::Var(*u, Mobius::gen(g).compose(m).without_word()),
        })
    }

    fn eval(&self, xa: &ExtReal, xb: &ExtReal, is_hi: bool) -> Result<Bound, ArithError> {
        let v = match self {
            End::Const(v) => v.clone(),
            End::Var(Unknown::XA, m) => m.apply(xa)?,
            End::Var(Unknown::XB, m) => m.apply(xb)?,
        };
        Ok(Bound::from_ext(&v, is_hi))
    }
}

#[derive(Debug, Clone)]
struct Seg {
    lo: End,
    hi: End,
}

impl Seg {
    fn map(&self, g: Gen) -> Result<Seg, ArithError> {
        Ok(Seg { lo: self.lo.map(g)?, hi: self.hi.map(g)? })
    }
}

struct Chain<'o> {
    origin: Origin,
    side: &'o Side,
    segs: Vec<Seg>,
}

fn chain<'o>(origin: Origin, side: &'o Side, seed: Seg) -> Result<Chain<'o>, ArithError> {
    let mut segs = vec![seed];
    for k in 1..side.values.len() {
        let next = segs[k - 1].map(side.gens[k - 1])?;
        segs.push(next);
    }
    Ok(Chain { origin, side, segs })
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    chain: usize,
    index: usize,
}

struct Skeleton<'o> {
    chains: Vec<Chain<'o>>,
    upper: Vec<Entry>,
    lower: Vec<Entry>,
}

impl<'o> Skeleton<'o> {
    fn seg(&self, e: Entry) -> &Seg {
        &self.chains[e.chain].segs[e.index]
    }

    fn level(&self, e: Entry) -> &ExtReal {
        &self.chains[e.chain].side.values[e.index]
    }

    fn origin(&self, e: Entry) -> Origin {
        self.chains[e.chain].origin
    }
}

fn const_same(x: &End, y: &End) -> bool {
    matches!((x, y), (End::Const(u), End::Const(v)) if u.same(v))
}

fn build_skeleton<'o>(params: &Params, orbits: &'o TruncatedOrbits) -> Result<Skeleton<'o>, AttractorError> {
    let zero = ExtReal::Fin(params.int(0));
    let var = |u, g: Gen| End::Var(u, Mobius::gen(g).without_word());
    let chains = vec![
        chain(Origin::La, &orbits.la, Seg { lo: var(Unknown::XA, Gen::T), hi: End::Const(ExtReal::Inf) })?,
        chain(Origin::Ua, &orbits.ua, Seg { lo: var(Unknown::XA, Gen::S), hi: End::Const(zero.clone()) })?,
        chain(Origin::Lb, &orbits.lb, Seg { lo: End::Const(zero), hi: var(Unknown::XB, Gen::S) })?,
        chain(Origin::Ub, &orbits.ub, Seg { lo: End::Const(ExtReal::Inf), hi: var(Unknown::XB, Gen::Tinv) })?,
    ];
    for c in &chains {
        if c.side.values.iter().any(ExtReal::is_inf) {
            return Err(AttractorError::InfiniteLevel);
        }
    }
    let mut sk = Skeleton { chains, upper: vec![], lower: vec![] };
    for (ci, c) in sk.chains.iter().enumerate() {
        let target = if matches!(c.origin, Origin::La | Origin::Lb) { &mut sk.lower } else { &mut sk.upper };
        target.extend((0..c.segs.len()).map(|index| Entry { chain: ci, index }));
    }
    let order = |sk: &Skeleton, x: &Entry, y: &Entry| -> Ordering {
        let (vx, vy) = (sk.level(*x).finite().unwrap(), sk.level(*y).finite().unwrap());
        match vx.cmp_exact(vy) {
            Ordering::Equal => {
                // two copies of one level: the a-copy sits to the left exactly
                // when its constant right end is the b-copy's constant left end
                let (ox, oy) = (sk.origin(*x), sk.origin(*y));
                if ox == oy {
                    return x.index.cmp(&y.index);
                }
                let (ea, eb) = if ox.is_a() { (x, y) } else { (y, x) };
                let a_first = const_same(&sk.seg(*ea).hi, &sk.seg(*eb).lo);
                match (ox.is_a(), a_first) {
                    (true, true) | (false, false) => Ordering::Less,
                    _ => Ordering::Greater,
                }
            }
            o => o,
        }
    };
    let mut upper = std::mem::take(&mut sk.upper);
    let mut lower = std::mem::take(&mut sk.lower);
    upper.sort_by(|x, y| order(&sk, x, y));
    lower.sort_by(|x, y| order(&sk, x, y));
    sk.upper = upper;
    sk.lower = lower;
    Ok(sk)
}

/// `x = S(e)` with `e` a segment end: a constant or a Mobius image of an unknown.
enum Rel {
    Known(ExtReal),
    Of(Unknown, Mobius),
}

fn rel_of(e: &End) -> Result<Rel, ArithError> {
    Ok(match e {
        End::Const(v) => Rel::Known(Mobius::s().apply(v)?),
        End::Var(u, m) => Rel::Of(*u, Mobius::s().compose(m).without_word()),
    })
}

fn fixed_point(m: &Mobius) -> Result<ExtReal, AttractorError> {
    match m.fixed_points() {
        Ok((attracting, _)) => Ok(attracting),
        Err(ArithError::NotHyperbolic(_)) => Err(AttractorError::NonHyperbolic(m.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn solve(sk: &Skeleton) -> Result<(ExtReal, ExtReal), AttractorError> {
    let find = |list: &[Entry], origin: Origin| list.iter().position(|e| sk.origin(*e) == origin && e.index == 0);
    let sb = find(&sk.lower, Origin::Lb).expect("Sb is a lower level");
    let sa = find(&sk.upper, Origin::Ua).expect("Sa is an upper level");
    let y_l = *sk
        .lower
        .get(sb + 1)
        .ok_or_else(|| AttractorError::MissingNeighbour(sk.level(sk.lower[sb]).to_string(), Component::Lower))?;
    if sa == 0 {
        return Err(AttractorError::MissingNeighbour(sk.level(sk.upper[sa]).to_string(), Component::Upper));
    }
    let y_u = sk.upper[sa - 1];
    // S x_b = left end at y_l, S x_a = right end at y_u
    let rb = rel_of(&sk.seg(y_l).lo)?;
    let ra = rel_of(&sk.seg(y_u).hi)?;
    let (xa, xb) = match (ra, rb) {
        (Rel::Known(xa), Rel::Known(xb)) => (xa, xb),
        (Rel::Known(xa), Rel::Of(Unknown::XA, m)) => {
            let xb = m.apply(&xa)?;
            (xa, xb)
        }
        (Rel::Known(xa), Rel::Of(Unknown::XB, m)) => (xa, fixed_point(&m)?),
        (Rel::Of(Unknown::XB, m), Rel::Known(xb)) => {
            let xa = m.apply(&xb)?;
            (xa, xb)
        }
        (Rel::Of(Unknown::XA, m), Rel::Known(xb)) => (fixed_point(&m)?, xb),
        (Rel::Of(Unknown::XB, mu), Rel::Of(Unknown::XA, ml)) => {
            let xa = fixed_point(&mu.compose(&ml))?;
            let xb = ml.apply(&xa)?;
            (xa, xb)
        }
        (Rel::Of(Unknown::XA, ma), Rel::Of(Unknown::XA, mb)) => {
            let xa = fixed_point(&ma)?;
            let xb = mb.apply(&xa)?;
            (xa, xb)
        }
        (Rel::Of(Unknown::XB, ma), Rel::Of(Unknown::XB, mb)) => {
            let xb = fixed_point(&mb)?;
            let xa = ma.apply(&xb)?;
            (xa, xb)
        }
        (Rel::Of(Unknown::XA, ma), Rel::Of(Unknown::XB, mb)) => (fixed_point(&ma)?, fixed_point(&mb)?),
    };
    Ok((xa, xb))
}

fn require_finite(orbits: &TruncatedOrbits) -> Result<(), AttractorError> {
    if orbits.finite {
        Ok(())
    } else {
        Err(AttractorError::NotFinite)
    }
}

/// Corner values `x_a`, `x_b`: the left end of the ray at level `a` and the
/// right end of the ray at level `b` that generate the boundary.
pub fn solve_corners(params: &Params, orbits: &TruncatedOrbits) -> Result<(ExtReal, ExtReal), AttractorError> {
    require_finite(orbits)?;
    let sk = build_skeleton(params, orbits)?;
    solve(&sk)
}

fn check_corners(params: &Params, xa: &ExtReal, xb: &ExtReal) -> Result<(), AttractorError> {
    let ok = match (xa, xb) {
        (ExtReal::Fin(u), ExtReal::Fin(v)) => u.try_cmp(&params.int(1))? != Ordering::Less
            && v.try_cmp(&params.int(-1))? != Ordering::Greater,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(AttractorError::CornerRange { x_a: xa.to_string(), x_b: xb.to_string() })
    }
}

/// First adjacent pair of steps whose ends do not meet, and open outer ends.
fn first_gap(steps: &[Step], component: Component) -> Option<(String, String)> {
    for w in steps.windows(2) {
        if !w[0].x_hi.same(&w[1].x_lo) {
            return Some((w[0].y.to_string(), w[1].y.to_string()));
        }
    }
    match component {
        Component::Upper => match steps.first() {
            Some(s) if !matches!(s.x_lo, Bound::NegInf) => Some(("-inf".into(), s.y.to_string())),
            _ => None,
        },
        Component::Lower => match steps.last() {
            Some(s) if !matches!(s.x_hi, Bound::PosInf) => Some((s.y.to_string(), "inf".into())),
            _ => None,
        },
    }
}

fn domain_from_trap(params: &Params, kind: Degenerate) -> RectDomain {
    let region = natext::degenerate_region(kind);
    let step = |r: &Rect, y: &Bound| Step {
        x_lo: r.x0.clone(),
        x_hi: r.x1.clone(),
        y: y.finite().expect("finite level").clone(),
        origin: Origin::Trap,
        index: 0,
    };
    let (x_a, x_b) = match kind {
        Degenerate::MinusOneOne => (Some(ExtReal::int(1)), Some(ExtReal::int(-1))),
        _ => (None, None),
    };
    RectDomain {
        a: params.a().clone(),
        b: params.b().clone(),
        x_a,
        x_b,
        upper: region.upper.iter().map(|r| step(r, &r.y0)).collect(),
        lower: region.lower.iter().map(|r| step(r, &r.y1)).collect(),
        locking: vec![],
    }
}

fn locking_segments(
    sk: &Skeleton,
    orbits: &TruncatedOrbits,
    xa: &ExtReal,
    xb: &ExtReal,
) -> Result<Vec<LockingSegment>, AttractorError> {
    let mut out = vec![];
    for (res, lower, upper) in [(&orbits.a, 0usize, 1usize), (&orbits.b, 2, 3)] {
        if res.classification != Classification::Strong {
            continue;
        }
        let image = |ci: usize| -> Result<Vec<(Bound, Bound)>, AttractorError> {
            let c = &sk.chains[ci];
            let k = c.segs.len() - 1;
            let s = &c.segs[k];
            Ok(gen_interval(c.side.gens[k], &s.lo.eval(xa, xb, false)?, &s.hi.eval(xa, xb, true)?)?)
        };
        let level = res.end.as_ref().and_then(|e| e.finite().cloned()).ok_or(AttractorError::InfiniteLevel)?;
        out.push(LockingSegment { endpoint: res.which, level, from_lower: image(lower)?, from_upper: image(upper)? });
    }
    Ok(out)
}

/// Builds the domain from the truncated orbits of `a` and `b`, checking that
/// the steps connect and that the corners satisfy `x_a >= 1`, `x_b <= -1`.
pub fn build_attractor(params: &Params) -> Result<RectDomain, AttractorError> {
    build_attractor_capped(params, cycles::DEFAULT_CAP)
}

pub fn build_attractor_capped(params: &Params, cap: usize) -> Result<RectDomain, AttractorError> {
    if let Some(kind) = params.degenerate() {
        return Ok(domain_from_trap(params, kind));
    }
    let orbits = cycles::truncated_orbits(params, cap)?;
    require_finite(&orbits)?;
    let sk = build_skeleton(params, &orbits)?;
    let (xa, xb) = solve(&sk)?;
    check_corners(params, &xa, &xb)?;
    let steps = |list: &[Entry]| -> Result<Vec<Step>, AttractorError> {
        list.iter()
            .map(|e| {
                let seg = sk.seg(*e);
                Ok(Step {
                    x_lo: seg.lo.eval(&xa, &xb, false)?,
                    x_hi: seg.hi.eval(&xa, &xb, true)?,
                    y: sk.level(*e).finite().expect("finite level").clone(),
                    origin: sk.origin(*e),
                    index: e.index,
                })
            })
            .collect()
    };
    let upper = steps(&sk.upper)?;
    let lower = steps(&sk.lower)?;
    for (component, list) in [(Component::Upper, &upper), (Component::Lower, &lower)] {
        if let Some((below, above)) = first_gap(list, component) {
            return Err(AttractorError::Connectivity { component, below, above });
        }
    }
    let locking = locking_segments(&sk, &orbits, &xa, &xb)?;
    Ok(RectDomain {
        a: params.a().clone(),
        b: params.b().clone(),
        x_a: Some(xa),
        x_b: Some(xb),
        upper,
        lower,
        locking,
    })
}

// ---------------------------------------------------------------------------
// connectivity

#[derive(Debug, Clone, Serialize)]
pub struct JoinFailure {
    pub component: Component,
    pub check: String,
    pub level: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConnectivityReport {
    pub checked: usize,
    pub failures: Vec<JoinFailure>,
}

impl ConnectivityReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, pass: bool, component: Component, check: &str, level: &Scalar) {
        self.checked += 1;
        if !pass {
            self.failures.push(JoinFailure { component, check: check.into(), level: level.to_string() });
        }
    }
}

fn at(steps: &[Step], origin: Origin, index: usize) -> Option<&Step> {
    steps.iter().find(|s| s.origin == origin && s.index == index)
}

/// Checks that adjacent steps meet, that the outer ends reach infinity, that
/// the steps at `Sb`, `STa` and at `Sa`, `ST^-1 b` meet at `x = 0`, and that
/// the steps straddling `a` (lower) and `b` (upper) meet at `x_a`, `x_b`.
pub fn verify_connectivity(domain: &RectDomain) -> ConnectivityReport {
    let mut rep = ConnectivityReport::default();
    for component in [Component::Upper, Component::Lower] {
        let steps = domain.steps(component);
        for w in steps.windows(2) {
            rep.check(w[0].x_hi.same(&w[1].x_lo), component, "adjacent", &w[0].y);
        }
        match component {
            Component::Upper => {
                if let Some(s) = steps.first() {
                    rep.check(matches!(s.x_lo, Bound::NegInf), component, "left end at -inf", &s.y);
                }
            }
            Component::Lower => {
                if let Some(s) = steps.last() {
                    rep.check(matches!(s.x_hi, Bound::PosInf), component, "right end at +inf", &s.y);
                }
            }
        }
    }
    let zero = Bound::Fin(domain.a.like_int(0));
    let pairs = [
        (Component::Lower, Origin::Lb, 0, true, "Sb starts at 0"),
        (Component::Lower, Origin::La, 1, false, "STa ends at 0"),
        (Component::Upper, Origin::Ua, 0, false, "Sa ends at 0"),
        (Component::Upper, Origin::Ub, 1, true, "ST^-1 b starts at 0"),
    ];
    for (component, origin, index, left, name) in pairs {
        if let Some(s) = at(domain.steps(component), origin, index) {
            let end = if left { &s.x_lo } else { &s.x_hi };
            rep.check(end.same(&zero), component, name, &s.y);
        }
    }
    let straddle = |steps: &[Step], cut: &Scalar, strict_below: bool| -> Option<usize> {
        steps.windows(2).position(|w| {
            let below = if strict_below { w[0].y.lt(cut) } else { w[0].y.le(cut) };
            let above = if strict_below { cut.le(&w[1].y) } else { cut.lt(&w[1].y) };
            below && above
        })
    };
    // a level sitting exactly on `a` (or `b`) carries part of the ray itself,
    // and the join moves off the corner; the check applies otherwise
    let on_cut = |steps: &[Step], cut: &Scalar| steps.iter().any(|s| s.y.eq_val(cut));
    if let (Some(ExtReal::Fin(xa)), false) = (&domain.x_a, on_cut(&domain.lower, &domain.a)) {
        if let Some(i) = straddle(&domain.lower, &domain.a, true) {
            let x = Bound::Fin(xa.clone());
            let s = &domain.lower[i];
            rep.check(s.x_hi.same(&x), Component::Lower, "levels around a meet at x_a", &s.y);
        }
    }
    if let (Some(ExtReal::Fin(xb)), false) = (&domain.x_b, on_cut(&domain.upper, &domain.b)) {
        if let Some(i) = straddle(&domain.upper, &domain.b, false) {
            let x = Bound::Fin(xb.clone());
            let s = &domain.upper[i];
            rep.check(s.x_hi.same(&x), Component::Upper, "levels around b meet at x_b", &s.y);
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// tiling

/// One of the pieces the components are cut into, with its image.
#[derive(Debug, Clone)]
pub struct Piece {
    pub label: String,
    pub gen: Gen,
    pub parts: Vec<Rect>,
    pub images: Vec<Rect>,
}

#[derive(Debug, Clone)]
pub struct BijectivityReport {
    pub pieces: Vec<Piece>,
    /// Area covered more than once, counted with multiplicity.
    pub overlap: f64,
    /// Area of the domain left uncovered by the images.
    pub uncovered: f64,
    /// Area covered by images outside the domain.
    pub outside: f64,
    pub bad_cells: usize,
    pub locking: Vec<LockingSegment>,
}

impl BijectivityReport {
    pub fn tiles(&self) -> bool {
        self.bad_cells == 0
    }
}

fn piece_label(component: Component, band: usize) -> &'static str {
    // bands: y <= a, a..0, 0..b, y >= b
    match (component, band) {
        (Component::Upper, 3) => "U1",
        (Component::Upper, 1) => "U2",
        (Component::Upper, 2) => "U3",
        (Component::Upper, _) => "U*",
        (Component::Lower, 0) => "L1",
        (Component::Lower, 2) => "L2",
        (Component::Lower, 1) => "L3",
        (Component::Lower, _) => "L*",
    }
}

/// Grid coordinate list: sorted, without repeats.
fn coords(mut v: Vec<Bound>) -> Vec<Bound> {
    v.sort_by(|x, y| x.cmp_exact(y));
    v.dedup_by(|x, y| x.same(y));
    v
}

fn index_of(list: &[Bound], b: &Bound) -> usize {
    list.binary_search_by(|x| x.cmp_exact(b)).expect("coordinate on the grid")
}

/// Width of a grid interval after compactifying the line with `atan`.
fn compact_width(lo: &Bound, hi: &Bound) -> f64 {
    hi.to_f64().atan() - lo.to_f64().atan()
}

/// Cuts the two components at `y = a, 0, b`, maps each piece by its
/// generator and compares the images with the domain cell by cell on the
/// grid of all exact coordinates involved.
pub fn verify_bijectivity(domain: &RectDomain, params: &Params) -> Result<BijectivityReport, AttractorError> {
    let zero = Bound::Fin(params.int(0));
    let cuts = [
        (Bound::NegInf, Bound::Fin(params.a().clone()), Gen::T),
        (Bound::Fin(params.a().clone()), zero.clone(), Gen::S),
        (zero, Bound::Fin(params.b().clone()), Gen::S),
        (Bound::Fin(params.b().clone()), Bound::PosInf, Gen::Tinv),
    ];
    let mut pieces: Vec<Piece> = vec![];
    for (component, rects) in [(Component::Upper, domain.upper_rects()), (Component::Lower, domain.lower_rects())] {
        for (band, (lo, hi, g)) in cuts.iter().enumerate() {
            let label = piece_label(component, band);
            let mut parts = vec![];
            let mut images = vec![];
            for r in &rects {
                let y0 = r.y0.clone().max(lo.clone());
                let y1 = r.y1.clone().min(hi.clone());
                if y0.try_cmp(&y1)? != Ordering::Less || r.x0.try_cmp(&r.x1)? != Ordering::Less {
                    continue;
                }
                let part = Rect::new(r.x0.clone(), r.x1.clone(), y0, y1);
                images.extend(gen_rect(*g, &part)?);
                parts.push(part);
            }
            if !parts.is_empty() {
                pieces.push(Piece { label: label.into(), gen: *g, parts, images });
            }
        }
    }
    let domain_rects = domain.rects();
    let images: Vec<&Rect> = pieces.iter().flat_map(|p| p.images.iter()).collect();
    let all = || domain_rects.iter().chain(images.iter().copied());
    let xs = coords(all().flat_map(|r| [r.x0.clone(), r.x1.clone()]).collect());
    let ys = coords(all().flat_map(|r| [r.y0.clone(), r.y1.clone()]).collect());
    let (nx, ny) = (xs.len().saturating_sub(1), ys.len().saturating_sub(1));
    let mut inside = vec![0i32; nx * ny];
    let mut cover = vec![0i32; nx * ny];
    let paint = |grid: &mut Vec<i32>, r: &Rect| {
        let (i0, i1) = (index_of(&xs, &r.x0), index_of(&xs, &r.x1));
        let (j0, j1) = (index_of(&ys, &r.y0), index_of(&ys, &r.y1));
        for i in i0..i1 {
            for j in j0..j1 {
                grid[i * ny + j] += 1;
            }
        }
    };
    for r in &domain_rects {
        paint(&mut inside, r);
    }
    for r in &images {
        paint(&mut cover, r);
    }
    let (mut overlap, mut uncovered, mut outside, mut bad_cells) = (0.0, 0.0, 0.0, 0);
    for i in 0..nx {
        for j in 0..ny {
            let (d, c) = (inside[i * ny + j], cover[i * ny + j]);
            let want = d.min(1);
            if c == want && d <= 1 {
                continue;
            }
            bad_cells += 1;
            let area = compact_width(&xs[i], &xs[i + 1]) * compact_width(&ys[j], &ys[j + 1]);
            if want == 1 && c == 0 {
                uncovered += area;
            } else if want == 0 {
                outside += area * c as f64;
            } else {
                overlap += area * (c - 1).max(d - 1) as f64;
            }
        }
    }
    Ok(BijectivityReport { pieces, overlap, uncovered, outside, bad_cells, locking: domain.locking.clone() })
}

// ---------------------------------------------------------------------------
// oracles

/// Half-width of the window in which the boundary is compared with a cloud.
pub const ORACLE_WINDOW: f64 = 3.0;
/// Spacing of the sample points along the boundary.
const GAP_SPACING: f64 = 0.01;
const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub points: usize,
    pub inside_fraction: f64,
    /// Largest distance from a boundary step to its nearest cloud point.
    pub boundary_gap: f64,
    /// Largest distance from a point of the boundary inside the window to the
    /// cloud: a stricter, resolution-limited coverage figure.
    pub max_hole: f64,
}

fn segment_distance(seg: &[f64; 4], p: &[f64; 2]) -> f64 {
    let [x0, y0, x1, y1] = *seg;
    let (lo_x, hi_x) = (x0.min(x1), x0.max(x1));
    let (lo_y, hi_y) = (y0.min(y1), y0.max(y1));
    let dx = (lo_x - p[0]).max(p[0] - hi_x).max(0.0);
    let dy = (lo_y - p[1]).max(p[1] - hi_y).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

/// Boundary of the domain as float segments `(x0, y0, x1, y1)`: the steps,
/// the vertical joins, and the outer vertical edges.
pub fn boundary_segments(domain: &RectDomain) -> Vec<[f64; 4]> {
    let mut out = vec![];
    for component in [Component::Upper, Component::Lower] {
        let steps = domain.steps(component);
        for s in steps {
            let y = s.y.to_f64();
            out.push([s.x_lo.to_f64(), y, s.x_hi.to_f64(), y]);
        }
        for w in steps.windows(2) {
            let x = w[0].x_hi.to_f64();
            out.push([x, w[0].y.to_f64(), x, w[1].y.to_f64()]);
        }
        match component {
            Component::Upper => {
                if let Some(s) = steps.last() {
                    let x = s.x_hi.to_f64();
                    out.push([x, s.y.to_f64(), x, f64::INFINITY]);
                }
            }
            Component::Lower => {
                if let Some(s) = steps.first() {
                    let x = s.x_lo.to_f64();
                    out.push([x, f64::NEG_INFINITY, x, s.y.to_f64()]);
                }
            }
        }
    }
    out
}

/// Uniform bucket grid for nearest-neighbour queries.
struct Buckets {
    lo: f64,
    cell: f64,
    n: usize,
    cells: Vec<Vec<[f64; 2]>>,
}

impl Buckets {
    fn new(points: &[[f64; 2]], lo: f64, hi: f64, cell: f64) -> Buckets {
        let n = ((hi - lo) / cell).ceil() as usize;
        let mut cells = vec![vec![]; n * n];
        for p in points {
            if let (Some(i), Some(j)) = (Self::slot(lo, cell, n, p[0]), Self::slot(lo, cell, n, p[1])) {
                cells[i * n + j].push(*p);
            }
        }
        Buckets { lo, cell, n, cells }
    }

    fn slot(lo: f64, cell: f64, n: usize, v: f64) -> Option<usize> {
        let k = ((v - lo) / cell).floor();
        (k >= 0.0 && (k as usize) < n).then_some(k as usize)
    }

    fn nearest(&self, x: f64, y: f64) -> f64 {
        let ci = ((x - self.lo) / self.cell).floor() as i64;
        let cj = ((y - self.lo) / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        for ring in 0..self.n as i64 {
            if best <= (ring - 1).max(0) as f64 * self.cell {
                break;
            }
            for i in ci - ring..=ci + ring {
                for j in cj - ring..=cj + ring {
                    if (i - ci).abs() != ring && (j - cj).abs() != ring {
                        continue;
                    }
                    if i < 0 || j < 0 || i >= self.n as i64 || j >= self.n as i64 {
                        continue;
                    }
                    for p in &self.cells[i as usize * self.n + j as usize] {
                        best = best.min(((p[0] - x).powi(2) + (p[1] - y).powi(2)).sqrt());
                    }
                }
            }
        }
        best
    }
}

fn clip(seg: &[f64; 4], w: f64) -> Option<[f64; 4]> {
    let c = |v: f64| v.clamp(-w, w);
    let [x0, y0, x1, y1] = *seg;
    let horizontal = y0 == y1;
    if horizontal && !(-w..=w).contains(&y0) {
        return None;
    }
    if !horizontal && !(-w..=w).contains(&x0) {
        return None;
    }
    let out = [c(x0), c(y0), c(x1), c(y1)];
    let len = (out[2] - out[0]).abs() + (out[3] - out[1]).abs();
    (len > 0.0).then_some(out)
}

/// Fraction of cloud points in the closed domain, the largest distance from
/// a boundary step to the cloud, and the largest distance from a boundary
/// point inside the window `[-3, 3]^2` to the cloud.
pub fn compare_with_oracle(domain: &RectDomain, cloud: &Cloud) -> Result<OracleReport, AttractorError> {
    compare_with_oracle_in(domain, cloud, ORACLE_WINDOW)
}

pub fn compare_with_oracle_in(domain: &RectDomain, cloud: &Cloud, window: f64) -> Result<OracleReport, AttractorError> {
    if cloud.points.is_empty() {
        return Err(AttractorError::EmptyCloud);
    }
    let rects = domain.float_rects();
    let inside = cloud
        .points
        .par_iter()
        .filter(|p| rects.iter().any(|r| r.contains(p[0], p[1], MEMBERSHIP_TOL)))
        .count();
    let finite: Vec<[f64; 2]> = cloud.finite_points().copied().collect();
    let margin = 1.0;
    let buckets = Buckets::new(&finite, -window - margin, window + margin, 0.05);
    let samples: Vec<[f64; 2]> = boundary_segments(domain)
        .iter()
        .filter_map(|s| clip(s, window))
        .flat_map(|[x0, y0, x1, y1]| {
            let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
            let n = (len / GAP_SPACING).ceil().max(1.0) as usize;
            (0..=n).map(move |k| {
                let t = k as f64 / n as f64;
                [x0 + t * (x1 - x0), y0 + t * (y1 - y0)]
            })
        })
        .collect();
    let hole = samples.par_iter().map(|p| buckets.nearest(p[0], p[1])).reduce(|| 0.0, f64::max);
    let steps: Vec<[f64; 4]> = [Component::Upper, Component::Lower]
        .iter()
        .flat_map(|c| domain.steps(*c))
        .map(|s| {
            let y = s.y.to_f64();
            [s.x_lo.to_f64(), y, s.x_hi.to_f64(), y]
        })
        .collect();
    let gap = steps
        .par_iter()
        .map(|seg| finite.iter().map(|p| segment_distance(seg, p)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    Ok(OracleReport {
        points: cloud.points.len(),
        inside_fraction: inside as f64 / cloud.points.len() as f64,
        boundary_gap: gap,
        max_hole: hole,
    })
}

/// Half-width of the lattice used by [`reduction_scan`].
pub const SCAN_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub points: usize,
    pub reached: usize,
    /// `None` for an empty lattice.
    pub coverage: Option<f64>,
    pub max_time: usize,
}

/// Iterates the float reduction map from the centres of a `grid x grid`
/// lattice on `[-10, 10]^2` (diagonal centres skipped) until the orbit enters
/// the domain, for at most `cap` steps.
pub fn reduction_scan(domain: &RectDomain, params: &Params, grid: usize, cap: usize) -> ScanReport {
    let rects = domain.float_rects();
    let (a, b) = (params.af(), params.bf());
    let h = 2.0 * SCAN_RADIUS / grid.max(1) as f64;
    let coord = |i: usize| -SCAN_RADIUS + (i as f64 + 0.5) * h;
    let times: Vec<Option<usize>> = (0..grid * grid)
        .into_par_iter()
        .filter(|k| k / grid.max(1) != k % grid.max(1))
        .map(|k| {
            let (mut x, mut y) = (coord(k / grid), coord(k % grid));
            for t in 0..=cap {
                if rects.iter().any(|r| r.contains(x, y, 1e-12)) {
                    return Some(t);
                }
                (x, y) = reduction_step_f64(x, y, a, b);
            }
            None
        })
        .collect();
    let reached = times.iter().flatten().count();
    ScanReport {
        points: times.len(),
        reached,
        coverage: (!times.is_empty()).then(|| reached as f64 / times.len() as f64),
        max_time: times.iter().flatten().copied().max().unwrap_or(0),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorptionReport {
    pub segments: usize,
    pub absorbed: usize,
    /// Largest number of steps any representative point needed.
    pub max_steps: usize,
    pub stuck: Vec<String>,
}

fn interior(rects: &[Rect], p: &Point2, delta: &Scalar) -> Result<bool, ArithError> {
    let (ExtReal::Fin(x), ExtReal::Fin(y)) = (&p.x, &p.y) else {
        return Ok(false);
    };
    for (dx, dy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let shift = |v: &Scalar, s: i32| if s > 0 { v.add(delta) } else { v.sub(delta) };
        let q = (ExtReal::Fin(shift(x, dx)?), ExtReal::Fin(shift(y, dy)?));
        let mut hit = false;
        for r in rects {
            if r.contains(&q.0, &q.1)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An irrational fraction in `(0, 1)`, `sqrt(d) - floor(sqrt(d))`, in the
/// quadratic field the domain already lives in (`d = 2` for rational
/// domains), so that orbits started from it never reach infinity.
fn generic_fraction(domain: &RectDomain) -> Result<Scalar, ArithError> {
    use num_bigint::BigInt;
    let corners = [&domain.x_a, &domain.x_b];
    let d = [Some(&domain.a), Some(&domain.b)]
        .into_iter()
        .chain(corners.iter().map(|c| c.as_ref().and_then(ExtReal::finite)))
        .flatten()
        .find_map(|s| s.radicand().cloned())
        .unwrap_or_else(|| BigInt::from(2));
    let root = Scalar::surd(BigInt::from(0), BigInt::from(1), d.clone(), BigInt::from(1))?;
    Scalar::surd(-root.floor(), BigInt::from(1), d, BigInt::from(1))
}

/// A point strictly inside `[lo, hi]`, a fraction `theta` of the way along
/// (one plus `theta` past a finite end of a half-line).
fn inner_point(lo: &Bound, hi: &Bound, theta: &Scalar) -> Result<Scalar, ArithError> {
    let one = theta.like_int(1);
    Ok(match (lo, hi) {
        (Bound::Fin(u), Bound::Fin(v)) => u.add(&v.sub(u)?.mul(theta)?)?,
        (Bound::Fin(u), _) => u.add(&one)?.add(theta)?,
        (_, Bound::Fin(v)) => v.sub(&one)?.sub(theta)?,
        _ => theta.clone(),
    })
}

/// Iterates one generic point of every boundary segment (steps and vertical
/// joins) until it lies in the interior of the domain, for at most
/// `max_steps` steps.
pub fn boundary_absorption(domain: &RectDomain, params: &Params, max_steps: usize) -> Result<AbsorptionReport, AttractorError> {
    let rects = domain.rects();
    let theta = generic_fraction(domain)?;
    let delta = Scalar::big_ratio(1.into(), num_bigint::BigInt::from(10).pow(30))?;
    let mut points = vec![];
    for component in [Component::Upper, Component::Lower] {
        let steps = domain.steps(component);
        for s in steps {
            points.push(Point2::new(ExtReal::Fin(inner_point(&s.x_lo, &s.x_hi, &theta)?), ExtReal::Fin(s.y.clone())));
        }
        for w in steps.windows(2) {
            if let Bound::Fin(x) = &w[0].x_hi {
                let y = inner_point(&Bound::Fin(w[0].y.clone()), &Bound::Fin(w[1].y.clone()), &theta)?;
                points.push(Point2::new(ExtReal::Fin(x.clone()), ExtReal::Fin(y)));
            }
        }
    }
    let mut rep = AbsorptionReport { segments: points.len(), absorbed: 0, max_steps: 0, stuck: vec![] };
    for p0 in points {
        let mut p = p0.clone();
        let mut done = None;
        for t in 0..=max_steps {
            if interior(&rects, &p, &delta)? {
                done = Some(t);
                break;
            }
            p = match natext::reduction_step(&p, params) {
                Ok(q) => q,
                Err(_) => break,
            };
        }
        match done {
            Some(t) => {
                rep.absorbed += 1;
                rep.max_steps = rep.max_steps.max(t);
            }
            None => rep.stuck.push(format!("({}, {})", p0.x, p0.y)),
        }
    }
    Ok(rep)
}
