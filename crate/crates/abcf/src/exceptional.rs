//! Parameters on the edge `b = a + 1` whose endpoint orbits never close up.
//!
//! A digit word `(n_1, ..., n_k)` over `{m, m+1}` cuts out a triangle of the
//! parameter set next to the edge; the `b`-coordinates it covers form an
//! interval `[lower, upper]`. Admissible words are generated by a block
//! substitution, and along an infinite admissible word the intervals shrink
//! to a single exceptional parameter. Positive-digit expansions are written
//! `[n_1, n_2, ...] = 1/(n_1 - 1/(n_2 - ...))`, so a word `w` has
//! `upper = [overline(w)]` and `lower = [n_1, overline(n_2, ..., n_k, m+1)]`.

use crate::cf::CfError;
use crate::error::ArithError;
use crate::mobius::Mobius;
use crate::scalar::{ExtReal, Scalar};
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum ExceptionalError {
    #[error("m must be at least 3, got {0}")]
    SmallM(i64),
    #[error("digit {digit} at position {pos} is not in {{{m}, {m}+1}}")]
    Alphabet { m: i64, digit: i64, pos: usize },
    #[error("a digit word must start with m = {0}")]
    BadStart(i64),
    #[error("multiplicity {multiplicity} is not allowed for {case} (needs at least {min})")]
    Multiplicity { case: Case, multiplicity: usize, min: usize },
    #[error("plan has {len} steps, depth {depth} requested")]
    PlanExhausted { depth: usize, len: usize },
    #[error("triangle of generation {0} is empty")]
    EmptyTriangle(usize),
    #[error("target width not reached within the plan (last width about {0:e})")]
    WidthNotReached(f64),
    #[error("cannot parse plan: {0}")]
    Parse(String),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, ExceptionalError>;

/// Which of the two substitution rules built a generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// `A' = (A x l, B)`, `B' = (A x (l-1), B)`, `l >= 2`.
    Case1,
    /// `A' = (A, B x l)`, `B' = (A, B x (l+1))`, `l >= 1`.
    Case2,
}

impl Case {
    pub fn min_multiplicity(self) -> usize {
        match self {
            Case::Case1 => 2,
            Case::Case2 => 1,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::Case1 => write!(f, "case1"),
            Case::Case2 => write!(f, "case2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub digits: Vec<i64>,
    pub role: Role,
    pub generation: usize,
}

/// `true` when `x` strictly precedes `y`; a proper prefix precedes its extensions.
pub fn lex_less(x: &[i64], y: &[i64]) -> bool {
    for (p, q) in x.iter().zip(y) {
        if p != q {
            return p < q;
        }
    }
    x.len() < y.len()
}

/// `T^n S`, without word bookkeeping.
fn ts(n: i64) -> Mobius {
    Mobius::t_pow(n).compose(&Mobius::s()).without_word()
}

/// `T^{d_1} S ... T^{d_k} S`.
fn word_matrix(digits: &[i64]) -> Mobius {
    digits.iter().fold(Mobius::identity().without_word(), |acc, &n| acc.compose(&ts(n)))
}

/// The map `f^w = T^{n_k} S ... T^{n_1} S` (apply `S` first).
pub fn f_word(digits: &[i64]) -> Mobius {
    let rev: Vec<i64> = digits.iter().rev().copied().collect();
    word_matrix(&rev)
}

fn finite(x: ExtReal) -> Result<Scalar> {
    match x {
        ExtReal::Fin(s) => Ok(s),
        ExtReal::Inf => Err(ArithError::Infinite.into()),
    }
}

/// `[head, overline(period)]` for a period matrix already multiplied out.
fn value_with(head: &Mobius, period: &Mobius) -> Result<Scalar> {
    let (tail, _) = period.fixed_points()?;
    // [head..., x] = -(0, head..., x) = -(S head)(x)
    let v = Mobius::s().compose(head).apply(&tail)?;
    Ok(finite(v)?.neg())
}

/// `[pre, overline(period)]` with positive digits.
pub fn positive_periodic(pre: &[i64], period: &[i64]) -> Result<Scalar> {
    value_with(&word_matrix(pre), &word_matrix(period))
}

fn check_word(m: i64, seq: &[i64]) -> Result<()> {
    if m < 3 {
        return Err(ExceptionalError::SmallM(m));
    }
    if seq.first() != Some(&m) {
        return Err(ExceptionalError::BadStart(m));
    }
    if let Some((pos, &digit)) = seq.iter().enumerate().find(|(_, &d)| d != m && d != m + 1) {
        return Err(ExceptionalError::Alphabet { m, digit, pos });
    }
    Ok(())
}

/// The `b`-range of the triangle of a digit word.
#[derive(Debug, Clone, Serialize)]
pub struct TriangleRegion {
    pub m: i64,
    pub digits: Vec<i64>,
    /// Largest lower bound over all prefixes of the word.
    pub lower: Scalar,
    /// Smallest upper bound over all prefixes of the word.
    pub upper: Scalar,
    /// Solution of `f^w(b) = b/(b+1)` for the whole word.
    pub word_lower: Scalar,
    /// Solution of `f^w(b) = b` for the whole word.
    pub word_upper: Scalar,
    pub empty: bool,
}

impl TriangleRegion {
    /// `[lower, upper]` contains `[other.lower, other.upper]`.
    pub fn contains(&self, other: &TriangleRegion) -> bool {
        self.lower.le(&other.lower) && other.upper.le(&self.upper)
    }
}

/// Regions of every prefix of `seq`, shortest first. Each prefix costs one
/// matrix step per bound, so long words stay linear in length.
pub fn prefix_regions(m: i64, seq: &[i64]) -> Result<Vec<TriangleRegion>> {
    check_word(m, seq)?;
    let close = ts(m + 1);
    let head = word_matrix(&seq[..1]);
    let mut full = Mobius::identity().without_word();
    let mut inner = Mobius::identity().without_word();
    let mut lower: Option<Scalar> = None;
    let mut upper: Option<Scalar> = None;
    let mut out = Vec::with_capacity(seq.len());
    for (j, &n) in seq.iter().enumerate() {
        full = full.compose(&ts(n));
        if j > 0 {
            inner = inner.compose(&ts(n));
        }
        let word_upper = value_with(&Mobius::identity(), &full)?;
        let word_lower = value_with(&head, &inner.compose(&close))?;
        let lo = match lower {
            Some(l) if !l.lt(&word_lower) => l,
            _ => word_lower.clone(),
        };
        let hi = match upper {
            Some(u) if u.le(&word_upper) => u,
            _ => word_upper.clone(),
        };
        let empty = !lo.lt(&hi);
        out.push(TriangleRegion {
            m,
            digits: seq[..=j].to_vec(),
            lower: lo.clone(),
            upper: hi.clone(),
            word_lower,
            word_upper,
            empty,
        });
        lower = Some(lo);
        upper = Some(hi);
    }
    Ok(out)
}

pub fn triangle_region(m: i64, seq: &[i64]) -> Result<TriangleRegion> {
    Ok(prefix_regions(m, seq)?.pop().expect("word is nonempty"))
}

/// Generation `n` of the block substitution.
#[derive(Debug, Clone, Serialize)]
pub struct SubstitutionScheme {
    pub m: i64,
    pub generation: usize,
    pub a: Block,
    pub b: Block,
    /// Rule that produced this generation; generation 0 has none and is
    /// treated like a case2 generation by the starting-block recursion.
    pub case: Option<Case>,
    pub multiplicity: usize,
    /// Starting block of `A`: `f^sigma(b) = b/(b+1)` at the lower bound.
    pub sigma: Vec<i64>,
    /// Blocks of the previous generation.
    pub prev: Option<(Vec<i64>, Vec<i64>)>,
}

impl SubstitutionScheme {
    pub fn initial(m: i64) -> Result<SubstitutionScheme> {
        if m < 3 {
            return Err(ExceptionalError::SmallM(m));
        }
        Ok(SubstitutionScheme {
            m,
            generation: 0,
            a: Block { digits: vec![m], role: Role::A, generation: 0 },
            b: Block { digits: vec![m + 1], role: Role::B, generation: 0 },
            case: None,
            multiplicity: 0,
            sigma: Vec::new(),
            prev: None,
        })
    }

    /// Blocks `(A', B')` entering the closed forms of this generation:
    /// the current ones after case1, the previous ones after case2.
    pub fn base_blocks(&self) -> (&[i64], &[i64]) {
        match (&self.case, &self.prev) {
            (Some(Case::Case2), Some((a, b))) => (a, b),
            _ => (&self.a.digits, &self.b.digits),
        }
    }

    /// Lower end of the `b`-range of the triangle of `A`.
    pub fn lower_bound(&self) -> Result<Scalar> {
        if self.generation == 0 {
            return positive_periodic(&[self.m], &[self.m + 1]);
        }
        let (a, b) = self.base_blocks();
        positive_periodic(a, b)
    }

    /// Upper end of the `b`-range of the triangle of `A`.
    pub fn upper_bound(&self) -> Result<Scalar> {
        positive_periodic(&[], &self.a.digits)
    }
}

fn repeat(block: &[i64], times: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(block.len() * times);
    for _ in 0..times {
        out.extend_from_slice(block);
    }
    out
}

pub fn substitution_step(scheme: &SubstitutionScheme, case: Case, multiplicity: usize) -> Result<SubstitutionScheme> {
    if multiplicity < case.min_multiplicity() {
        return Err(ExceptionalError::Multiplicity { case, multiplicity, min: case.min_multiplicity() });
    }
    let (a, b) = (&scheme.a.digits, &scheme.b.digits);
    let (na, nb) = match case {
        Case::Case1 => {
            let mut na = repeat(a, multiplicity);
            na.extend_from_slice(b);
            let mut nb = repeat(a, multiplicity - 1);
            nb.extend_from_slice(b);
            (na, nb)
        }
        Case::Case2 => {
            let mut na = a.clone();
            na.extend(repeat(b, multiplicity));
            let mut nb = a.clone();
            nb.extend(repeat(b, multiplicity + 1));
            (na, nb)
        }
    };
    let sigma = match (scheme.case, case) {
        (Some(Case::Case1), Case::Case1) => [repeat(a, multiplicity - 1), scheme.sigma.clone()].concat(),
        (Some(Case::Case1), Case::Case2) => scheme.sigma.clone(),
        (_, Case::Case1) => [repeat(a, multiplicity), scheme.sigma.clone()].concat(),
        (_, Case::Case2) => [a.clone(), scheme.sigma.clone()].concat(),
    };
    let generation = scheme.generation + 1;
    Ok(SubstitutionScheme {
        m: scheme.m,
        generation,
        a: Block { digits: na, role: Role::A, generation },
        b: Block { digits: nb, role: Role::B, generation },
        case: Some(case),
        multiplicity,
        sigma,
        prev: Some((a.clone(), b.clone())),
    })
}

/// Generations `0..=depth` of a plan.
pub fn unroll(m: i64, plan: &[(Case, usize)], depth: usize) -> Result<Vec<SubstitutionScheme>> {
    if depth > plan.len() {
        return Err(ExceptionalError::PlanExhausted { depth, len: plan.len() });
    }
    let mut out = vec![SubstitutionScheme::initial(m)?];
    for &(case, mult) in &plan[..depth] {
        let next = substitution_step(out.last().expect("nonempty"), case, mult)?;
        out.push(next);
    }
    Ok(out)
}

/// The block `A` after `depth` substitutions; every prefix of it is checked
/// to cut out a nonempty triangle.
pub fn admissible_prefix(m: i64, plan: &[(Case, usize)], depth: usize) -> Result<Vec<i64>> {
    let scheme = unroll(m, plan, depth)?.pop().expect("nonempty");
    let digits = scheme.a.digits;
    if let Some(r) = prefix_regions(m, &digits)?.iter().find(|r| r.empty) {
        return Err(ExceptionalError::EmptyTriangle(r.digits.len()));
    }
    Ok(digits)
}

/// Length of the lower base of the triangle of `A`:
/// `[A', overline(B')] - [overline(B')]` with `(A', B')` from [`SubstitutionScheme::base_blocks`].
/// Generation 0 uses `(m)` and `(m+1)`.
pub fn base_length(scheme: &SubstitutionScheme) -> Result<Scalar> {
    let (a, b) = scheme.base_blocks();
    let long = positive_periodic(a, b)?;
    let short = positive_periodic(&[], b)?;
    let len = long.sub(&short)?;
    if len.signum() != Ordering::Greater {
        return Err(ExceptionalError::EmptyTriangle(scheme.generation));
    }
    Ok(len)
}

/// Upper bound on `hi - lo` as a dyadic rational, for values in different fields.
fn dyadic_gap(lo: &Scalar, hi: &Scalar) -> Result<(Scalar, u64)> {
    let mut k: u64 = 64;
    loop {
        let l = floor_scaled(lo, k);
        let h = floor_scaled(hi, k);
        let diff: BigInt = h - l + BigInt::one();
        if diff.bits() >= 8 || k > 1 << 20 {
            return Ok((Scalar::big_ratio(diff, BigInt::one() << k)?, k));
        }
        k *= 2;
    }
}

fn floor_scaled(x: &Scalar, k: u64) -> BigInt {
    match x {
        Scalar::Surd(s) => s.scaled_floor(k),
        other => {
            let shifted = other.mul(&Scalar::big_int(BigInt::one() << k)).expect("exact scalar");
            shifted.floor()
        }
    }
}

/// A dyadic rational strictly inside `(lo, hi)`.
fn dyadic_inside(lo: &Scalar, hi: &Scalar) -> Result<Scalar> {
    let mut k: u64 = 64;
    loop {
        let l = floor_scaled(lo, k);
        let h = floor_scaled(hi, k);
        let diff: BigInt = &h - &l;
        if diff > BigInt::from(4) {
            let mid: BigInt = (l + h) >> 1;
            return Ok(Scalar::big_ratio(mid, BigInt::one() << k)?);
        }
        if k > 1 << 22 {
            return Err(ArithError::Infinite.into());
        }
        k *= 2;
    }
}

/// One generation of the construction.
#[derive(Debug, Clone, Serialize)]
pub struct Generation {
    pub generation: usize,
    pub case: Option<Case>,
    pub multiplicity: usize,
    pub block_len: usize,
    pub lower: Scalar,
    pub upper: Scalar,
    pub base_length: Scalar,
    /// Dyadic upper bound on `upper - lower`.
    pub width: Scalar,
}

/// Enclosures narrower than `2^-REPRESENTATIVE_BITS` fix enough digits for the
/// orbits of a rational point inside to run for thousands of steps
/// without closing up.
pub const REPRESENTATIVE_BITS: u64 = 1000;

/// An exceptional parameter pinned down to a nested enclosure.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalPoint {
    pub m: i64,
    /// A dyadic rational inside the enclosure of `representative_generation`.
    pub b: Scalar,
    pub a: Scalar,
    /// First generation narrower than `2^-REPRESENTATIVE_BITS`, or the last one.
    pub representative_generation: usize,
    pub b_lo: Scalar,
    pub b_hi: Scalar,
    /// First generation whose base length and width are below the target.
    pub reached_at: usize,
    pub generations: Vec<Generation>,
    pub digits_prefix: Vec<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnclosureJson {
    pub m: i64,
    pub b_lo: String,
    pub b_hi: String,
    pub b_lo_f: f64,
    pub b_hi_f: f64,
    pub b: String,
    pub width_f: f64,
    pub base_lengths_f: Vec<f64>,
    pub reached_at: usize,
    pub digits_prefix: Vec<i64>,
}

impl ExceptionalPoint {
    pub fn width(&self) -> &Scalar {
        &self.generations.last().expect("generation 0 always present").width
    }

    /// The matching point of the `a`-side exceptional set, by `(a,b) -> (-b,-a)`.
    pub fn mirrored(&self) -> (Scalar, Scalar) {
        (self.b.neg(), self.a.neg())
    }

    /// `digits_prefix` is cut to its first `max_digits` entries.
    pub fn to_json(&self, max_digits: usize) -> EnclosureJson {
        EnclosureJson {
            m: self.m,
            b_lo: self.b_lo.to_string(),
            b_hi: self.b_hi.to_string(),
            b_lo_f: self.b_lo.to_f64(),
            b_hi_f: self.b_hi.to_f64(),
            b: self.b.to_string(),
            width_f: self.width().to_f64(),
            base_lengths_f: self.generations.iter().map(|g| g.base_length.to_f64()).collect(),
            reached_at: self.reached_at,
            digits_prefix: self.digits_prefix.iter().take(max_digits).copied().collect(),
        }
    }
}

/// Runs the whole plan and records each generation's enclosure; `b_lo`, `b_hi`
/// come from the deepest one and `b` is a short dyadic rational inside a
/// sufficiently narrow one (see [`REPRESENTATIVE_BITS`]). Fails if no generation gets both its
/// base length and its enclosure width below `target_width`.
pub fn exceptional_b(m: i64, plan: &[(Case, usize)], target_width: &Scalar) -> Result<ExceptionalPoint> {
    let schemes = unroll(m, plan, plan.len())?;
    let mut generations = Vec::with_capacity(schemes.len());
    let mut reached_at = None;
    for s in &schemes {
        let lower = s.lower_bound()?;
        let upper = s.upper_bound()?;
        if !lower.lt(&upper) {
            return Err(ExceptionalError::EmptyTriangle(s.generation));
        }
        let base = base_length(s)?;
        let (width, _) = dyadic_gap(&lower, &upper)?;
        if reached_at.is_none() && base.lt(target_width) && width.lt(target_width) {
            reached_at = Some(s.generation);
        }
        generations.push(Generation {
            generation: s.generation,
            case: s.case,
            multiplicity: s.multiplicity,
            block_len: s.a.digits.len(),
            lower,
            upper,
            base_length: base,
            width,
        });
    }
    let last = generations.last().expect("generation 0");
    let reached_at = reached_at.ok_or_else(|| ExceptionalError::WidthNotReached(last.width.to_f64()))?;
    let fine = Scalar::big_ratio(BigInt::one(), BigInt::one() << REPRESENTATIVE_BITS)?;
    let rep = generations.iter().find(|g| g.width.lt(&fine)).unwrap_or(last);
    let b = dyadic_inside(&rep.lower, &rep.upper)?;
    let a = b.sub(&Scalar::one())?;
    Ok(ExceptionalPoint {
        m,
        a,
        b,
        b_lo: last.lower.clone(),
        b_hi: last.upper.clone(),
        reached_at,
        representative_generation: rep.generation,
        digits_prefix: schemes.last().expect("nonempty").a.digits.clone(),
        generations,
    })
}

/// Parses `m=3;1x2,1x2,2x1` (case x multiplicity).
pub fn parse_plan(text: &str) -> Result<(i64, Vec<(Case, usize)>)> {
    let bad = |msg: &str| ExceptionalError::Parse(format!("{msg} in {text:?}"));
    let (head, steps) = text.split_once(';').unwrap_or((text, ""));
    let m: i64 = head
        .trim()
        .strip_prefix("m=")
        .ok_or_else(|| bad("missing m="))?
        .trim()
        .parse()
        .map_err(|_| bad("bad m"))?;
    let mut plan = Vec::new();
    for step in steps.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (c, l) = step.split_once('x').ok_or_else(|| bad("step without x"))?;
        let case = match c.trim() {
            "1" => Case::Case1,
            "2" => Case::Case2,
            _ => return Err(bad("case must be 1 or 2")),
        };
        let mult: usize = l.trim().parse().map_err(|_| bad("bad multiplicity"))?;
        if mult < case.min_multiplicity() {
            return Err(ExceptionalError::Multiplicity { case, multiplicity: mult, min: case.min_multiplicity() });
        }
        plan.push((case, mult));
    }
    Ok((m, plan))
}

pub fn format_plan(m: i64, plan: &[(Case, usize)]) -> String {
    let steps: Vec<String> = plan
        .iter()
        .map(|(c, l)| format!("{}x{l}", if *c == Case::Case1 { 1 } else { 2 }))
        .collect();
    format!("m={m};{}", steps.join(","))
}
