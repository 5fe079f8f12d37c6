//! Orbits of the discontinuity points `a` and `b`, cycle detection with the
//! strong/weak classification, truncated orbits and the finiteness check.

use crate::cf::{self, Params};
use crate::error::ArithError;
use crate::mobius::{word_string, Gen, Mobius};
use crate::scalar::{ExactKey, ExtReal, Scalar};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// Default step cap for orbit tracking.
pub const DEFAULT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CycleError {
    #[error("the two orbits have not met")]
    NotMet,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Endpoint {
    A,
    B,
}

/// Starting point of one of the four orbits: `Ta`, `Sa`, `Sb`, `T^-1 b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SeedKind {
    ALower,
    AUpper,
    BLower,
    BUpper,
}

impl SeedKind {
    pub fn is_lower(self) -> bool {
        matches!(self, SeedKind::ALower | SeedKind::BLower)
    }

    pub fn endpoint(self) -> Endpoint {
        match self {
            SeedKind::ALower | SeedKind::AUpper => Endpoint::A,
            SeedKind::BLower | SeedKind::BUpper => Endpoint::B,
        }
    }

    /// The generator taking the endpoint to the seed value.
    pub fn first_gen(self) -> Gen {
        match self {
            SeedKind::ALower => Gen::T,
            SeedKind::AUpper | SeedKind::BLower => Gen::S,
            SeedKind::BUpper => Gen::Tinv,
        }
    }

    pub fn start(self, params: &Params) -> Result<ExtReal, ArithError> {
        let base = match self.endpoint() {
            Endpoint::A => params.a(),
            Endpoint::B => params.b(),
        };
        Mobius::gen(self.first_gen()).apply(&ExtReal::Fin(base.clone()))
    }
}

/// Total order on floats used to index float orbit values.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FKey(f64);

impl Eq for FKey {}

impl PartialOrd for FKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Value index of an orbit: exact hashing, or tolerance lookup for floats.
#[derive(Debug, Clone)]
enum ValueIndex {
    Exact(HashMap<ExactKey, usize>),
    Float(BTreeMap<FKey, usize>, f64),
}

impl ValueIndex {
    fn new(sample: &ExtReal) -> ValueIndex {
        match sample {
            ExtReal::Fin(Scalar::Float(a)) => ValueIndex::Float(BTreeMap::new(), a.eps),
            _ => ValueIndex::Exact(HashMap::new()),
        }
    }

    fn find(&self, v: &ExtReal) -> Option<usize> {
        match self {
            ValueIndex::Exact(map) => v.key().and_then(|k| map.get(&k).copied()),
            ValueIndex::Float(map, eps) => {
                let f = v.to_f64();
                if f.is_infinite() {
                    return map.get(&FKey(f64::INFINITY)).copied();
                }
                let tol = eps * f.abs().max(1.0);
                map.range(FKey(f - tol)..=FKey(f + tol)).next().map(|(_, &i)| i)
            }
        }
    }

    fn insert(&mut self, v: &ExtReal, i: usize) {
        match self {
            ValueIndex::Exact(map) => {
                if let Some(k) = v.key() {
                    map.insert(k, i);
                }
            }
            ValueIndex::Float(map, _) => {
                let f = v.to_f64();
                let f = if f.is_infinite() { f64::INFINITY } else { f };
                map.insert(FKey(f), i);
            }
        }
    }
}

/// One forward orbit. `gens[k]` maps `values[k]` to `values[k + 1]`; when the
/// orbit closed up, the last generator maps the last value to `values[repeat_to]`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub seed: SeedKind,
    #[serde(serialize_with = "ser_values")]
    pub values: Vec<ExtReal>,
    pub gens: Vec<Gen>,
    /// Indices where the orbit sat exactly on `a` or `b` and was rerouted.
    pub hits: Vec<(usize, Endpoint)>,
    pub repeat_to: Option<usize>,
}

fn ser_values<S: serde::Serializer>(v: &[ExtReal], s: S) -> Result<S::Ok, S::Error> {
    let strs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    strs.serialize(s)
}

impl OrbitRecord {
    /// Product `g_{n-1} ... g_0` of the first `n` generators.
    pub fn word(&self, n: usize) -> Mobius {
        self.gens[..n].iter().fold(Mobius::identity(), |acc, g| Mobius::gen(*g).compose(&acc))
    }

    /// Run-length digits of the generator sequence between consecutive `S` letters.
    pub fn digits(&self) -> Vec<i64> {
        let mut out = Vec::new();
        let mut cur: Option<i64> = None;
        for g in &self.gens {
            match g {
                Gen::S => {
                    if let Some(d) = cur {
                        out.push(d);
                    }
                    cur = Some(0);
                }
                Gen::T => cur = cur.map(|d| d - 1),
                Gen::Tinv => cur = cur.map(|d| d + 1),
            }
        }
        out
    }
}

struct Walker<'p> {
    params: &'p Params,
    rec: OrbitRecord,
    index: ValueIndex,
    done: bool,
}

impl<'p> Walker<'p> {
    fn new(params: &'p Params, seed: SeedKind) -> Result<Walker<'p>, ArithError> {
        let start = seed.start(params)?;
        let mut index = ValueIndex::new(&ExtReal::Fin(params.a().clone()));
        index.insert(&start, 0);
        Ok(Walker {
            params,
            rec: OrbitRecord {
                seed,
                values: vec![start],
                gens: Vec::new(),
                hits: Vec::new(),
                repeat_to: None,
            },
            index,
            done: false,
        })
    }

    /// Generator at `v` with the orbit-side rule on the discontinuities.
    fn next_gen(&mut self, i: usize) -> Result<Gen, ArithError> {
        let v = &self.rec.values[i];
        let a = ExtReal::Fin(self.params.a().clone());
        let b = ExtReal::Fin(self.params.b().clone());
        let lower = self.rec.seed.is_lower();
        if v.same(&a) {
            self.rec.hits.push((i, Endpoint::A));
            return Ok(if lower { Gen::T } else { Gen::S });
        }
        if v.same(&b) {
            self.rec.hits.push((i, Endpoint::B));
            return Ok(if lower { Gen::S } else { Gen::Tinv });
        }
        cf::branch(v, self.params)
    }

    /// Advances one step. Returns the index of a new value, or `None` once the
    /// orbit has closed up (or was already closed).
    fn step(&mut self) -> Result<Option<usize>, ArithError> {
        if self.done {
            return Ok(None);
        }
        let i = self.rec.values.len() - 1;
        let g = self.next_gen(i)?;
        let next = Mobius::gen(g).apply(&self.rec.values[i])?;
        self.rec.gens.push(g);
        if let Some(j) = self.index.find(&next) {
            self.rec.repeat_to = Some(j);
            self.done = true;
            return Ok(None);
        }
        self.index.insert(&next, i + 1);
        self.rec.values.push(next);
        Ok(Some(i + 1))
    }
}

/// Forward orbit from a seed, stopped at the first repeated value or after `cap` steps.
pub fn orbit(params: &Params, seed: SeedKind, cap: usize) -> Result<OrbitRecord, ArithError> {
    let mut w = Walker::new(params, seed)?;
    for _ in 0..cap {
        if w.step()?.is_none() {
            break;
        }
    }
    Ok(w.rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Strong,
    Weak,
    PeriodicNoCycle,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strength {
    Strong,
    Weak,
}

#[derive(Debug, Clone)]
pub struct CycleResult {
    pub which: Endpoint,
    pub classification: Classification,
    /// End of the cycle (also set for a float meeting, which stays `Undetermined`).
    pub end: Option<ExtReal>,
    /// Length of the upper side.
    pub upper_len: Option<usize>,
    /// Length of the lower side.
    pub lower_len: Option<usize>,
    /// Product over the cycle: `T^-1 W_l^-1 W_u S` for `a`, `T W_u^-1 W_l S` for `b`.
    pub word: Option<Mobius>,
    pub lower: OrbitRecord,
    pub upper: OrbitRecord,
    /// The orbits met only within float tolerance.
    pub approximate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleSummary {
    pub which: Endpoint,
    pub classification: Classification,
    pub end: Option<String>,
    pub end_f64: Option<f64>,
    /// `[upper, lower]` side lengths.
    pub side_lengths: Option<[usize; 2]>,
    pub word: Option<String>,
    pub approximate: bool,
}

impl CycleResult {
    pub fn is_cycle(&self) -> bool {
        matches!(self.classification, Classification::Strong | Classification::Weak)
    }

    pub fn resolved(&self) -> bool {
        self.classification != Classification::Undetermined
    }

    pub fn summary(&self) -> CycleSummary {
        CycleSummary {
            which: self.which,
            classification: self.classification,
            end: self.end.as_ref().map(|e| e.to_string()),
            end_f64: self.end.as_ref().map(|e| e.to_f64()),
            side_lengths: self.upper_len.zip(self.lower_len).map(|(u, l)| [u, l]),
            word: self.word.as_ref().map(|m| match m.word() {
                Some(w) => word_string(w),
                None => m.to_string(),
            }),
            approximate: self.approximate,
        }
    }
}

/// Product over the cycle and its classification: strong iff it is `+-Id`.
pub fn cycle_strength(
    which: Endpoint,
    lower: &OrbitRecord,
    upper: &OrbitRecord,
    lower_len: usize,
    upper_len: usize,
) -> Result<(Strength, Mobius), CycleError> {
    if lower_len >= lower.values.len() || upper_len >= upper.values.len() {
        return Err(CycleError::NotMet);
    }
    if !lower.values[lower_len].same(&upper.values[upper_len]) {
        return Err(CycleError::NotMet);
    }
    let wl = lower.word(lower_len);
    let wu = upper.word(upper_len);
    let prod = match which {
        Endpoint::A => Mobius::t_inv().compose(&wl.inverse()).compose(&wu).compose(&Mobius::s()),
        Endpoint::B => Mobius::t().compose(&wu.inverse()).compose(&wl).compose(&Mobius::s()),
    };
    let strength = if prod.is_pm_identity() { Strength::Strong } else { Strength::Weak };
    Ok((strength, prod))
}

fn seeds(which: Endpoint) -> (SeedKind, SeedKind) {
    match which {
        Endpoint::A => (SeedKind::ALower, SeedKind::AUpper),
        Endpoint::B => (SeedKind::BLower, SeedKind::BUpper),
    }
}

/// Once the orbits have met they run together, so later meetings exist when
/// the merged orbit is periodic. A weak first meeting is replaced by the
/// earliest strong one among them, if there is one. Meetings at infinity are
/// not cycle ends.
fn prefer_strong(
    which: Endpoint,
    lo: &mut Walker,
    up: &mut Walker,
    first: (usize, usize),
    cap: usize,
) -> Result<(usize, usize), CycleError> {
    let (s, _) = cycle_strength(which, &lo.rec, &up.rec, first.0, first.1)?;
    if s == Strength::Strong {
        return Ok(first);
    }
    for _ in 0..cap {
        let a = lo.step()?;
        let b = up.step()?;
        if a.is_none() && b.is_none() {
            break;
        }
    }
    let mut best: Option<(usize, usize)> = None;
    for (i, v) in lo.rec.values.iter().enumerate() {
        if v.is_inf() {
            continue;
        }
        let Some(j) = up.index.find(v) else { continue };
        if best.is_some_and(|(bi, bj)| bi + bj <= i + j) {
            continue;
        }
        if cycle_strength(which, &lo.rec, &up.rec, i, j)?.0 == Strength::Strong {
            best = Some((i, j));
        }
    }
    Ok(best.unwrap_or(first))
}

/// Runs the lower and upper orbits of an endpoint side by side until their
/// value sets meet, both close up without meeting, or `cap` steps pass.
pub fn detect_cycle(params: &Params, which: Endpoint, cap: usize) -> Result<CycleResult, CycleError> {
    let (ls, us) = seeds(which);
    let mut lo = Walker::new(params, ls)?;
    let mut up = Walker::new(params, us)?;
    let mut meeting: Option<(usize, usize)> = lo.index.find(&up.rec.values[0]).map(|i| (i, 0));
    let mut steps = 0;
    while meeting.is_none() && steps < cap {
        if lo.done && up.done {
            break;
        }
        steps += 1;
        let mut found: Vec<(usize, usize)> = Vec::new();
        if let Some(j) = up.step()? {
            if let Some(i) = lo.index.find(&up.rec.values[j]) {
                found.push((i, j));
            }
        }
        if let Some(i) = lo.step()? {
            if let Some(j) = up.index.find(&lo.rec.values[i]) {
                found.push((i, j));
            }
        }
        meeting = found.into_iter().min_by_key(|(i, j)| i + j);
    }
    let exact = params.is_exact();
    if let (Some(first), true) = (meeting, exact) {
        meeting = Some(prefer_strong(which, &mut lo, &mut up, first, cap)?);
    }
    let mut result = CycleResult {
        which,
        classification: Classification::Undetermined,
        end: None,
        upper_len: None,
        lower_len: None,
        word: None,
        lower: lo.rec,
        upper: up.rec,
        approximate: false,
    };
    match meeting {
        Some((i, j)) => {
            result.lower.values.truncate(i + 1);
            result.lower.gens.truncate(i);
            result.lower.hits.retain(|h| h.0 < i);
            result.lower.repeat_to = None;
            result.upper.values.truncate(j + 1);
            result.upper.gens.truncate(j);
            result.upper.hits.retain(|h| h.0 < j);
            result.upper.repeat_to = None;
            result.end = Some(result.lower.values[i].clone());
            result.lower_len = Some(i);
            result.upper_len = Some(j);
            if exact {
                let (s, w) = cycle_strength(which, &result.lower, &result.upper, i, j)?;
                result.classification = match s {
                    Strength::Strong => Classification::Strong,
                    Strength::Weak => Classification::Weak,
                };
                result.word = Some(w);
            } else {
                result.approximate = true;
            }
        }
        None if lo.done && up.done => {
            result.classification = if exact { Classification::PeriodicNoCycle } else { Classification::Undetermined };
            result.approximate = !exact;
        }
        None => {}
    }
    Ok(result)
}

/// A truncated orbit: its values and, for each, the generator applied to it
/// along the orbit.
#[derive(Debug, Clone, Serialize)]
pub struct Side {
    pub seed: SeedKind,
    #[serde(serialize_with = "ser_values")]
    pub values: Vec<ExtReal>,
    pub gens: Vec<Gen>,
}

#[derive(Debug, Clone)]
pub struct TruncatedOrbits {
    pub la: Side,
    pub ua: Side,
    pub lb: Side,
    pub ub: Side,
    pub finite: bool,
    pub a: CycleResult,
    pub b: CycleResult,
}

fn side_of(rec: &OrbitRecord, len: usize, params: &Params, weak: bool) -> Result<Side, ArithError> {
    let mut values = rec.values[..len].to_vec();
    let mut gens = rec.gens[..len].to_vec();
    if weak {
        let zero = ExtReal::Fin(params.int(0));
        gens.push(cf::branch(&zero, params)?);
        values.push(zero);
    }
    Ok(Side { seed: rec.seed, values, gens })
}

fn sides_of(res: &CycleResult, params: &Params) -> Result<(Side, Side), ArithError> {
    match res.classification {
        Classification::Strong | Classification::Weak => {
            let weak = res.classification == Classification::Weak;
            let l = res.lower_len.expect("cycle has sides");
            let u = res.upper_len.expect("cycle has sides");
            Ok((side_of(&res.lower, l, params, weak)?, side_of(&res.upper, u, params, weak)?))
        }
        _ => {
            let full = |r: &OrbitRecord| Side {
                seed: r.seed,
                values: r.values.clone(),
                gens: {
                    let mut g = r.gens.clone();
                    g.truncate(r.values.len());
                    g
                },
            };
            Ok((full(&res.lower), full(&res.upper)))
        }
    }
}

pub fn truncated_orbits(params: &Params, cap: usize) -> Result<TruncatedOrbits, CycleError> {
    let a = detect_cycle(params, Endpoint::A, cap)?;
    let b = detect_cycle(params, Endpoint::B, cap)?;
    let (la, ua) = sides_of(&a, params)?;
    let (lb, ub) = sides_of(&b, params)?;
    let finite = a.resolved() && b.resolved() && !a.approximate && !b.approximate;
    Ok(TruncatedOrbits { la, ua, lb, ub, finite, a, b })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Finiteness {
    Finite,
    ExceptionalSuspect {
        endpoint: Endpoint,
        /// Trailing digits of the unresolved lower orbit.
        digits: Vec<i64>,
        /// Distinct values among `digits`, sorted.
        distinct: Vec<i64>,
    },
}

/// Digits kept in an exceptional-suspect report.
const REPORT_DIGITS: usize = 32;

pub fn finiteness_check(params: &Params, cap: usize) -> Result<Finiteness, CycleError> {
    for which in [Endpoint::A, Endpoint::B] {
        let res = detect_cycle(params, which, cap)?;
        if !res.resolved() || res.approximate {
            let all = res.lower.digits();
            let digits = all[all.len().saturating_sub(REPORT_DIGITS)..].to_vec();
            let mut distinct = digits.clone();
            distinct.sort_unstable();
            distinct.dedup();
            return Ok(Finiteness::ExceptionalSuspect { endpoint: which, digits, distinct });
        }
    }
    Ok(Finiteness::Finite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(s: &str) -> ExtReal {
        ExtReal::Fin(Scalar::parse_exact(s).unwrap())
    }

    #[test]
    fn a_below_minus_one_is_strong() {
        let p = Params::ratio(-6, 5, 1, 2);
        let up = orbit(&p, SeedKind::AUpper, 3).unwrap();
        assert!(up.values[0].same(&ext("5/6")));
        assert!(up.values[1].same(&ext("-1/6")));
        assert!(up.values[2].same(&ext("6")));
        let r = detect_cycle(&p, Endpoint::A, 1000).unwrap();
        assert_eq!(r.classification, Classification::Strong);
        assert!(r.end.unwrap().same(&ext("5")));
        assert!(r.word.unwrap().is_pm_identity());
    }

    #[test]
    fn a_minus_one_is_weak() {
        let p = Params::ratio(-1, 1, 1, 2);
        let up = orbit(&p, SeedKind::AUpper, 2).unwrap();
        assert!(up.values[0].same(&ext("1")) && up.values[1].same(&ext("0")));
        let r = detect_cycle(&p, Endpoint::A, 1000).unwrap();
        assert_eq!(r.classification, Classification::Weak);
        assert!(r.end.unwrap().same(&ext("0")));
    }

    #[test]
    fn four_fifths_cycles() {
        let p = Params::ratio(-4, 5, 2, 5);
        let b = detect_cycle(&p, Endpoint::B, 1000).unwrap();
        assert_eq!(b.classification, Classification::Strong);
        assert!(b.end.as_ref().unwrap().same(&ext("2")));
        let a = detect_cycle(&p, Endpoint::A, 1000).unwrap();
        assert_eq!(a.classification, Classification::Strong);
        assert!(a.end.as_ref().unwrap().same(&ext("-4")));
    }

    #[test]
    fn weak_b_cycle_and_periodic_case() {
        let p = Params::ratio(-3, 5, 1, 2);
        let b = detect_cycle(&p, Endpoint::B, 1000).unwrap();
        assert_eq!(b.classification, Classification::Weak);
        assert!(b.end.unwrap().same(&ext("0")));

        for a in ["(1-sqrt(5))/2", "(-3+sqrt(5))/2"] {
            let g = Params::exact(a, "(-1+sqrt(5))/2").unwrap();
            let r = detect_cycle(&g, Endpoint::B, 1000).unwrap();
            assert_eq!(r.classification, Classification::PeriodicNoCycle, "a = {a}");
        }
    }

    #[test]
    fn rerouting_at_a() {
        // Sb = -2 = a: the lower orbit of b continues with T a = -1.
        let p = Params::ratio(-2, 1, 1, 2);
        let lo = orbit(&p, SeedKind::BLower, 2).unwrap();
        assert!(lo.values[0].same(&ext("-2")));
        assert_eq!(lo.gens[0], Gen::T);
        assert_eq!(lo.hits, vec![(0, Endpoint::A)]);
    }

    #[test]
    fn truncated_orbits_of_the_simple_case() {
        let p = Params::ratio(-7, 10, 4, 5);
        let t = truncated_orbits(&p, 1000).unwrap();
        assert!(t.finite);
        let vals = |s: &Side| s.values.iter().map(|v| v.to_string()).collect::<Vec<_>>();
        assert_eq!(vals(&t.la), ["3/10", "-10/3"]);
        assert_eq!(vals(&t.ua), ["10/7", "3/7"]);
        assert_eq!(vals(&t.lb), ["-5/4", "-1/4"]);
        assert_eq!(vals(&t.ub), ["-1/5", "5"]);
    }

    #[test]
    fn weak_cycles_append_zero() {
        let p = Params::ratio(-3, 5, 1, 2);
        let t = truncated_orbits(&p, 1000).unwrap();
        assert!(t.lb.values.last().unwrap().same(&ext("0")));
        assert!(t.ub.values.last().unwrap().same(&ext("0")));
    }

    #[test]
    fn digits_from_generators() {
        let rec = OrbitRecord {
            seed: SeedKind::BLower,
            values: vec![],
            gens: vec![Gen::S, Gen::Tinv, Gen::Tinv, Gen::S, Gen::T, Gen::S],
            hits: vec![],
            repeat_to: None,
        };
        assert_eq!(rec.digits(), vec![2, -1]);
    }

    #[test]
    fn later_strong_meeting_is_preferred() {
        // T^2 Ta = Sa, but the cycle closes strongly at Ta's image -1/(a+1)
        let p = Params::exact("(-1-sqrt(5))/2", "(-1+sqrt(5))/4").unwrap();
        let r = detect_cycle(&p, Endpoint::A, 1000).unwrap();
        assert_eq!(r.classification, Classification::Strong);
        assert_eq!((r.lower_len, r.upper_len), (Some(1), Some(3)));
        assert!(r.end.unwrap().same(&ext("(1+sqrt(5))/2")));
    }
}