//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime.
//! `ACCEPT_ONLY=3,9` runs a subset.

use abcf::attractor::{
    build_attractor, compare_with_oracle, reduction_scan, solve_corners, verify_bijectivity, verify_connectivity,
};
use abcf::cf::{bounded_digit_interval, bounded_digit_union_ratio, convergents, expand};
use abcf::cycles::{detect_cycle, finiteness_check, truncated_orbits, Classification, Endpoint, Finiteness};
use abcf::exceptional::{exceptional_b, parse_plan, prefix_regions, triangle_region, unroll};
use abcf::measures::{entropy_closed, entropy_rokhlin, invariance_check, log_integral, mu_mass, nu_mass, HatDomain};
use abcf::natext::sample_attractor;
use abcf::{ExtReal, Params, Scalar};
use abcf_cli::{render_svg, Window};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

struct Verdict {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

type Criterion = (usize, &'static str, Duration, fn() -> Verdict);

fn ext(s: &str) -> ExtReal {
    ExtReal::Fin(Scalar::parse_exact(s).unwrap())
}

fn c1_classical_domain() -> Verdict {
    let p = Params::ratio(-1, 1, 1, 1);
    let d = build_attractor(&p).unwrap();
    let got: Vec<[String; 4]> = d
        .rects()
        .iter()
        .map(|r| [r.x0.to_string(), r.x1.to_string(), r.y0.to_string(), r.y1.to_string()])
        .collect();
    let want = [
        ["-inf", "-1", "0", "inf"],
        ["-1", "0", "1", "inf"],
        ["0", "1", "-inf", "-1"],
        ["1", "inf", "-inf", "0"],
    ];
    let same = got.len() == 4 && want.iter().all(|w| got.iter().any(|g| g == w));
    let tiles = verify_bijectivity(&d, &p).unwrap();
    check(
        same && tiles.tiles() && tiles.overlap == 0.0 && tiles.uncovered == 0.0,
        format!("boxes {got:?}, exact tiling {}", tiles.tiles()),
    )
}

fn c2_four_fifths() -> Verdict {
    let p = Params::ratio(-4, 5, 2, 5);
    let Ok(d) = build_attractor(&p) else { return check(false, "build_attractor failed") };
    let b = detect_cycle(&p, Endpoint::B, 1000).unwrap();
    let a = detect_cycle(&p, Endpoint::A, 1000).unwrap();
    let b_ok = b.classification == Classification::Strong && b.end.as_ref().is_some_and(|e| e.same(&ext("2")));
    let a_ok = a.classification == Classification::Strong && a.end.as_ref().is_some_and(|e| e.same(&ext("-4")));
    let cloud = sample_attractor(&p, 300, 100_000, 1);
    let r = compare_with_oracle(&d, &cloud).unwrap();
    check(
        b_ok && a_ok && r.inside_fraction >= 0.999 && r.boundary_gap <= 0.05,
        format!(
            "b-cycle {:?} end {}, a-cycle {:?} end {}, inside {:.5}, gap {:.4}",
            b.classification,
            b.summary().end.unwrap_or_default(),
            a.classification,
            a.summary().end.unwrap_or_default(),
            r.inside_fraction,
            r.boundary_gap
        ),
    )
}

fn c3_cycle_oracles() -> Verdict {
    let mut ok = true;
    let mut notes = vec![];
    let mut run = |a: &str, b: &str, which: Endpoint, class: Classification, end: Option<&str>| {
        let t = Instant::now();
        let p = Params::exact(a, b).unwrap();
        let r = detect_cycle(&p, which, 10_000).unwrap();
        let end_ok = match end {
            Some(e) => r.end.as_ref().is_some_and(|x| x.same(&ext(e))),
            None => true,
        };
        let fast = t.elapsed() < Duration::from_secs(1);
        ok &= r.classification == class && end_ok && fast;
        notes.push(format!("({a}, {b}) {which:?}: {:?} {:?}", r.classification, r.summary().end));
    };
    run("-6/5", "1/2", Endpoint::A, Classification::Strong, Some("5"));
    run("-3/5", "1/2", Endpoint::B, Classification::Weak, Some("0"));
    run("(1-sqrt(5))/2", "(-1+sqrt(5))/2", Endpoint::B, Classification::PeriodicNoCycle, None);
    run("(-3+sqrt(5))/2", "(-1+sqrt(5))/2", Endpoint::B, Classification::PeriodicNoCycle, None);
    check(ok, notes.join("; "))
}

/// `m_b` with `T^{m_b} S b` in `[a, a+1)`, `m_a` with `T^{-m_a} S a` in `[b-1, b)`.
fn corner_digits(p: &Params) -> (i64, i64) {
    let sa = p.a().recip().unwrap().neg();
    let sb = p.b().recip().unwrap().neg();
    let m_a: BigInt = sa.sub(p.b()).unwrap().floor() + 1;
    let m_b: BigInt = -(sb.sub(p.a()).unwrap().floor());
    (m_a.to_i64().unwrap(), m_b.to_i64().unwrap())
}

fn corners(p: &Params) -> Option<(ExtReal, ExtReal)> {
    let o = truncated_orbits(p, 10_000).ok()?;
    solve_corners(p, &o).ok()
}

fn c4_corner_system() -> Verdict {
    let mut ok = true;
    let mut notes = vec![];
    for (a, b, want) in [("-7/10", "4/5", (1, 1)), ("-4/5", "2/5", (1, 2))] {
        let p = Params::exact(a, b).unwrap();
        let m = corner_digits(&p);
        let c = corners(&p);
        let hit = c.as_ref().is_some_and(|(xa, xb)| xa.same(&ExtReal::int(want.1)) && xb.same(&ExtReal::int(-1)));
        ok &= m == want && hit;
        notes.push(format!("({a},{b}) m = {m:?} -> {:?}", c.map(|(x, y)| (x.to_string(), y.to_string()))));
    }
    let mut low = 0;
    for (a, b) in [("-6/5", "1/2"), ("-3/2", "3/10"), ("-5/4", "2/5"), ("-11/10", "1/3"), ("-3/2", "1/2")] {
        let p = Params::exact(a, b).unwrap();
        let (_, m_b) = corner_digits(&p);
        let Some((xa, xb)) = corners(&p) else { continue };
        low += 1;
        let hit = xa.same(&ExtReal::int(m_b)) && xb.same(&ExtReal::int(-1));
        ok &= hit;
        notes.push(format!("({a},{b}) Sb-digit {m_b} -> ({xa}, {xb})"));
    }
    check(ok && low >= 3, notes.join("; "))
}

fn random_interior(rng: &mut ChaCha8Rng) -> Params {
    loop {
        let (da, db) = (rng.random_range(2..13i64), rng.random_range(2..13i64));
        let a = BigRational::new(-BigInt::from(rng.random_range(1..2 * da)), BigInt::from(da));
        let b = BigRational::new(BigInt::from(rng.random_range(1..2 * db)), BigInt::from(db));
        let one = BigRational::one();
        let interior = &b - &a > one && -(&a * &b) < one && a < BigRational::zero() && b > BigRational::zero();
        if interior && !(a == -&one && b == one) {
            return Params::new(Scalar::Rational(a), Scalar::Rational(b)).unwrap();
        }
    }
}

fn c5_tiling() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    let mut notes = vec![];
    let mut ok = true;
    while done < 10 {
        let p = random_interior(&mut rng);
        if finiteness_check(&p, 1000).unwrap() != Finiteness::Finite {
            continue;
        }
        let t = Instant::now();
        let d = match build_attractor(&p) {
            Ok(d) => d,
            Err(e) => {
                ok = false;
                notes.push(format!("{p}: {e}"));
                done += 1;
                continue;
            }
        };
        let r = verify_bijectivity(&d, &p).unwrap();
        let conn = verify_connectivity(&d).ok();
        let pass = r.tiles() && r.overlap == 0.0 && r.uncovered == 0.0 && conn && t.elapsed() < Duration::from_secs(10);
        ok &= pass;
        notes.push(format!("{p}{}", if pass { "" } else { " FAILED" }));
        done += 1;
    }
    check(ok, notes.join(" "))
}

fn c6_reduction_scan() -> Verdict {
    let candidates = [
        ("-4/5", "2/5"),
        ("-7/10", "4/5"),
        ("-6/5", "1/2"),
        ("-11/10", "1/3"),
        ("-2/3", "3/5"),
        ("-3/4", "1/2"),
        ("-5/4", "2/5"),
        ("-3/5", "3/4"),
    ];
    let mut ok = true;
    let mut notes = vec![];
    let mut used = 0;
    for (a, b) in candidates {
        if used == 5 {
            break;
        }
        let p = Params::exact(a, b).unwrap();
        let strong = [Endpoint::A, Endpoint::B]
            .iter()
            .all(|&w| detect_cycle(&p, w, 1000).is_ok_and(|r| r.classification == Classification::Strong));
        if !strong {
            continue;
        }
        used += 1;
        let t = Instant::now();
        let d = build_attractor(&p).unwrap();
        let s = reduction_scan(&d, &p, 100, 10_000);
        let pass = s.coverage == Some(1.0) && t.elapsed() < Duration::from_secs(60);
        ok &= pass;
        notes.push(format!("({a},{b}) coverage {:?} max time {}", s.coverage, s.max_time));
    }
    check(ok && used == 5, notes.join("; "))
}

fn c7_convergence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0usize;
    let mut ok = true;
    for _ in 0..100 {
        let a: f64 = rng.random_range(-1.0..0.0);
        let lo = (1.0 + a).max(0.0);
        let hi = if a < 0.0 { (-1.0 / a).min(2.0) } else { 2.0 };
        let b = rng.random_range(lo..=hi.max(lo));
        let Ok(p) = Params::float(a, b) else { continue };
        let x: f64 = rng.random_range(-10.0..10.0);
        let e = expand(&ExtReal::Fin(Scalar::float(x)), &p, 40).unwrap();
        let mut digits = e.digits.clone();
        digits.truncate(30);
        let xr = BigRational::from_float(x).unwrap();
        let conv = convergents(&digits, digits.len());
        for k in 1..conv.len() {
            let (c0, c1) = (&conv[k - 1], &conv[k]);
            ok &= &c0.p * &c1.q - &c1.p * &c0.q == BigInt::one();
        }
        for k in 1..conv.len() {
            let (prev, cur) = (&conv[k - 1], &conv[k]);
            let den = &xr * BigRational::from_integer(cur.q.clone()) - BigRational::from_integer(cur.p.clone());
            if den.is_zero() {
                break;
            }
            // complete quotient x_{k+1} from x = (p_k x_{k+1} - p_{k-1}) / (q_k x_{k+1} - q_{k-1})
            let xk1 = (&xr * BigRational::from_integer(prev.q.clone()) - BigRational::from_integer(prev.p.clone())) / den;
            if xk1.abs() < BigRational::one() {
                continue;
            }
            let r = BigRational::new(cur.p.clone(), cur.q.clone());
            let err = (r - &xr).abs();
            ok &= err <= BigRational::new(BigInt::one(), cur.q.abs());
            checked += 1;
        }
    }
    check(ok && checked > 1000, format!("{checked} convergents checked"))
}

fn c8_bounded_digits() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    let mut count = 0;
    for m in 2..=4i64 {
        for k in 1..=20usize {
            let words: Vec<Vec<i64>> = if k <= 10 {
                (0..1u32 << k).map(|bits| (0..k).map(|i| m + ((bits >> i) & 1) as i64).collect()).collect()
            } else {
                (0..200).map(|_| (0..k).map(|_| m + rng.random_range(0..2)).collect()).collect()
            };
            let bound = BigRational::new(BigInt::from(2 * (k + 1)), BigInt::from(2 * (k + 1) + 1));
            for w in words {
                let iv = bounded_digit_interval(m, &w).unwrap();
                let width = match (&iv.high, &iv.low) {
                    (ExtReal::Fin(h), ExtReal::Fin(l)) => h.sub(l).unwrap(),
                    _ => {
                        ok = false;
                        continue;
                    }
                };
                let formula = BigRational::new(BigInt::one(), &iv.q_k * (&iv.q_k - &iv.q_prev));
                let ExtReal::Fin(len) = &iv.length else { unreachable!() };
                ok &= width.eq_val(len) && len.eq_val(&Scalar::Rational(formula));
                ok &= bounded_digit_union_ratio(m, &w).unwrap() <= bound;
                count += 1;
            }
        }
    }
    check(ok, format!("{count} digit strings, m in 2..=4, k <= 20"))
}

/// `k` with `x < 2^-k`, for a positive rational `x`.
fn binary_exponent(x: &Scalar) -> u64 {
    match x {
        Scalar::Rational(r) => (r.denom().bits() - r.numer().bits()).saturating_sub(1),
        _ => 0,
    }
}

/// Generations whose block words are checked prefix by prefix.
const SCAN_DEPTH: usize = 7;

const PLAN: &str = "m=3;1x2,1x3,1x2,1x2,1x2,1x2,1x2,1x2";

fn c9_exceptional() -> Verdict {
    let (m, plan) = parse_plan(PLAN).unwrap();
    let target = Scalar::ratio(1, 1_000_000);
    let point = match exceptional_b(m, &plan, &target) {
        Ok(p) => p,
        Err(e) => return check(false, format!("{PLAN}: {e}")),
    };
    let mut ok = true;
    let g = &point.generations;
    for w in g.windows(2) {
        ok &= w[0].lower.le(&w[1].lower) && w[1].upper.le(&w[0].upper) && w[1].lower.lt(&w[1].upper);
        ok &= w[1].base_length.lt(&w[0].base_length);
    }
    let narrow = point.width().lt(&target);
    // independent route: nested prefix scan of the block words for the first generations
    let schemes = unroll(m, &plan, SCAN_DEPTH).unwrap();
    let mut scanned = 0;
    for (s, gen) in schemes.iter().zip(g) {
        let r = triangle_region(m, &s.a.digits).unwrap();
        ok &= !r.empty && r.lower.le(&gen.lower) && gen.upper.le(&r.upper);
        scanned += 1;
    }
    let deepest = &schemes.last().unwrap().a.digits;
    let regions = prefix_regions(m, deepest).unwrap();
    ok &= regions.iter().all(|r| !r.empty) && regions.windows(2).all(|w| w[0].contains(&w[1]));
    let forbidden = [vec![3, 3, 4, 4], vec![3, 4, 3, 3], vec![3, 3, 4, 3, 3, 3], vec![3, 4, 4, 3, 4, 3]];
    let empties = forbidden.iter().all(|w| triangle_region(m, w).unwrap().empty);
    let p = Params::new(point.a.clone(), point.b.clone()).unwrap();
    let fin = finiteness_check(&p, 1000).unwrap();
    let suspect = matches!(fin, Finiteness::ExceptionalSuspect { .. });
    check(
        ok && narrow && empties && suspect,
        format!(
            "{} generations nested with decreasing bases, width below 2^-{} (1e-6 reached at generation {}), {scanned} block triangles and {} prefixes scanned, forbidden empty {empties}, finiteness {}",
            g.len(),
            binary_exponent(point.width()),
            point.reached_at,
            regions.len(),
            if suspect { "fails (exceptional suspect)" } else { "Finite" }
        ),
    )
}

fn c10_measures() -> Verdict {
    let mut ok = true;
    let mut notes = vec![];
    for p in [Params::ratio(-7, 10, 4, 5), Params::ratio(-1, 1, 1, 1)] {
        let d = HatDomain::new(&p).unwrap();
        let nu = nu_mass(&d, 1e-11).unwrap();
        let mu = mu_mass(&d, 1e-12).unwrap();
        let hr = entropy_rokhlin(&p, 1e-12).unwrap();
        let hc = entropy_closed(&p).unwrap();
        let cf = PI * PI / (3.0 * ((1.0 - p.af()) * (1.0 + p.bf())).ln());
        let i = log_integral(&d, 1e-12).unwrap();
        let ks = invariance_check(&p, 1_000_000, 10).unwrap().statistic().unwrap();
        let pass = (nu - 1.0).abs() <= 1e-8
            && (mu - 1.0).abs() <= 1e-8
            && (hr - cf).abs() <= 1e-5
            && (hc - cf).abs() <= 1e-12
            && (i + PI * PI / 6.0).abs() <= 1e-6
            && ks <= 3e-3;
        ok &= pass;
        notes.push(format!(
            "{p}: nu {nu:.10}, mu {mu:.10}, h {hr:.8} vs {cf:.8}, I {i:.8}, KS {ks:.5}"
        ));
    }
    check(ok, notes.join("; "))
}

fn c11_figures() -> Verdict {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let w = Window::square(3.0).unwrap();
    let mut ok = true;
    let mut notes = vec![];
    for (name, p, points) in [
        ("cloud_m4_5_2_5.svg", Params::ratio(-4, 5, 2, 5), 10_000),
        ("classical_minus1_0.svg", Params::ratio(-1, 1, 0, 1), 0),
        ("classical_minus1_1.svg", Params::ratio(-1, 1, 1, 1), 0),
        ("classical_half.svg", Params::ratio(-1, 2, 1, 2), 0),
    ] {
        let d = build_attractor(&p).unwrap();
        let render = || {
            let cloud = (points > 0).then(|| sample_attractor(&p, 300, points, 1));
            render_svg(&d, cloud.as_ref(), w).unwrap()
        };
        let (s1, s2) = (render(), render());
        let stored = std::fs::read_to_string(dir.join(name)).unwrap_or_default();
        let pass = s1 == s2 && s1 == stored;
        ok &= pass;
        notes.push(format!("{name} {}", if pass { "stable" } else { "differs" }));
    }
    check(ok, notes.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "classical domain exactness", Duration::from_secs(1), c1_classical_domain),
        (2, "(-4/5, 2/5) example", Duration::from_secs(30), c2_four_fifths),
        (3, "cycle oracles", Duration::from_secs(4), c3_cycle_oracles),
        (4, "corner system", Duration::from_secs(10), c4_corner_system),
        (5, "bijectivity tiling", Duration::from_secs(100), c5_tiling),
        (6, "reduction scan", Duration::from_secs(300), c6_reduction_scan),
        (7, "convergence", Duration::from_secs(60), c7_convergence),
        (8, "bounded-digit recursion", Duration::from_secs(60), c8_bounded_digits),
        (9, "exceptional construction", Duration::from_secs(30), c9_exceptional),
        (10, "measures", Duration::from_secs(120), c10_measures),
        (11, "figure reproduction", Duration::from_secs(30), c11_figures),
    ];
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPT_ONLY").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let v = run();
        let dt = t.elapsed();
        let pass = v.ok && dt <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {id:>2} {name} ({:.2} s, limit {} s): {}",
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
