//! Command implementations. Each returns its artifact and whether the
//! checks it runs passed.

use crate::config::{parse_scalar, Command, Format, RunConfig, Which};
use crate::svg::{render_svg, Window};
use abcf::attractor::{
    build_attractor_capped, compare_with_oracle, reduction_scan, verify_bijectivity, verify_connectivity, RectDomain,
};
use abcf::cf::expand;
use abcf::cycles::{detect_cycle, finiteness_check, Endpoint, Finiteness};
use abcf::exceptional::{admissible_prefix, exceptional_b, parse_plan};
use abcf::measures::{measure_report, simple_case_applies};
use abcf::natext::sample_attractor;
use abcf::{ExtReal, Params, Scalar};
use anyhow::{bail, Context, Result};
use num_bigint::BigInt;
use serde_json::json;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    /// False when a check run by the command failed.
    pub verified: bool,
}

impl Outcome {
    fn ok(artifact: String) -> Outcome {
        Outcome { artifact, verified: true }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn window(cfg: &RunConfig) -> Result<Window> {
    let [x0, x1, y0, y1] = cfg.window;
    Ok(Window::new(x0, x1, y0, y1)?)
}

fn domain_text(d: &RectDomain) -> String {
    let mut s = format!("a = {}\nb = {}\n", d.a, d.b);
    for (name, steps) in [("upper", &d.upper), ("lower", &d.lower)] {
        for st in steps {
            s.push_str(&format!("{name} [{}, {}] at y = {}\n", st.x_lo, st.x_hi, st.y));
        }
    }
    s
}

/// Parses `1e-6`, `0.001` or `p/q` as an exact rational.
fn exact_target(text: &str) -> Result<Scalar> {
    let (mant, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().with_context(|| format!("bad exponent in {text:?}"))?),
        None => (text, 0),
    };
    let m = Scalar::parse_exact(mant)?;
    let p = num_traits::pow(BigInt::from(10), exp.unsigned_abs() as usize);
    let scale = if exp >= 0 { Scalar::big_ratio(p, BigInt::from(1))? } else { Scalar::big_ratio(BigInt::from(1), p)? };
    Ok(m.mul(&scale)?)
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match &cfg.command {
        Command::Expand { x, max_digits } => {
            let params = cfg.params()?;
            let x = parse_scalar(x, cfg.mode)?;
            let e = expand(&ExtReal::Fin(x.clone()), &params, *max_digits)?;
            match cfg.format {
                Format::Text => Ok(Outcome::ok(
                    e.digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ") + "\n",
                )),
                _ => Ok(Outcome::ok(pretty(&json!({
                    "params": params.to_string(),
                    "x": x.to_string(),
                    "digits": e,
                    "terminated": e.terminated,
                    "approximate": e.approximate,
                })))),
            }
        }
        Command::Cycle { which, cap } => {
            let params = cfg.params()?;
            let end = match which {
                Which::A => Endpoint::A,
                Which::B => Endpoint::B,
            };
            let r = detect_cycle(&params, end, *cap)?;
            Ok(Outcome::ok(pretty(&serde_json::to_value(r.summary())?)))
        }
        Command::Attractor { cap } => {
            let params = cfg.params()?;
            let d = build_attractor_capped(&params, *cap)?;
            let artifact = match cfg.format {
                Format::Json => pretty(&serde_json::to_value(d.to_json())?),
                Format::Svg => render_svg(&d, None, window(cfg)?)?,
                Format::Text => domain_text(&d),
            };
            Ok(Outcome::ok(artifact))
        }
        Command::Oracle { burn_in, points, min_inside, max_gap } => {
            let params = cfg.params()?;
            let d = build_attractor_capped(&params, 10_000)?;
            let cloud = sample_attractor(&params, *burn_in, *points, cfg.seed);
            let r = compare_with_oracle(&d, &cloud)?;
            let verified = r.inside_fraction >= *min_inside && r.boundary_gap <= *max_gap;
            let artifact = match cfg.format {
                Format::Svg => render_svg(&d, Some(&cloud), window(cfg)?)?,
                Format::Text => cloud.to_text(),
                Format::Json => pretty(&json!({ "report": r, "passed": verified })),
            };
            Ok(Outcome { artifact, verified })
        }
        Command::Verify { cap, scan_grid, scan_cap } => {
            let params = cfg.params()?;
            let d = match build_attractor_capped(&params, *cap) {
                Ok(d) => d,
                Err(e) => {
                    let v = json!({ "passed": false, "error": e.to_string() });
                    return Ok(Outcome { artifact: pretty(&v), verified: false });
                }
            };
            let bij = verify_bijectivity(&d, &params)?;
            let conn = verify_connectivity(&d);
            let scan = (*scan_grid > 0).then(|| reduction_scan(&d, &params, *scan_grid, *scan_cap));
            let scan_ok = scan.as_ref().is_none_or(|s| s.coverage == Some(1.0));
            let verified = bij.tiles() && conn.ok() && scan_ok;
            Ok(Outcome {
                artifact: pretty(&json!({
                    "passed": verified,
                    "tiles": bij.tiles(),
                    "overlap": bij.overlap,
                    "uncovered": bij.uncovered,
                    "outside": bij.outside,
                    "bad_cells": bij.bad_cells,
                    "connectivity": conn,
                    "scan": scan,
                })),
                verified,
            })
        }
        Command::Exceptional { plan, target, finiteness_cap, check_triangles } => {
            let (m, steps) = parse_plan(plan)?;
            let target_s = exact_target(&format!("{target:e}"))?;
            let point = exceptional_b(m, &steps, &target_s)?;
            let triangles = if *check_triangles {
                admissible_prefix(m, &steps, steps.len())?;
                Some(true)
            } else {
                None
            };
            let params = Params::new(point.a.clone(), point.b.clone())?;
            let fin = finiteness_check(&params, *finiteness_cap)?;
            let suspect = matches!(fin, Finiteness::ExceptionalSuspect { .. });
            let narrow = point.width().to_f64() < *target;
            let verified = suspect && narrow;
            Ok(Outcome {
                artifact: pretty(&json!({
                    "passed": verified,
                    "enclosure": point.to_json(64),
                    "a": point.a.to_string(),
                    "finiteness": fin,
                    "triangles_nonempty": triangles,
                })),
                verified,
            })
        }
        Command::Measures { points, tol, ks_max } => {
            let params = cfg.params()?;
            if !simple_case_applies(&params) {
                bail!("{params} is outside the four-box range: needs 1 <= -1/a <= b+1 and a-1 <= -1/b <= -1");
            }
            let r = measure_report(&params, *points, cfg.seed)?;
            let ks_ok = r.ks_stat.is_none_or(|k| k <= *ks_max);
            let verified = (r.nu_mass - 1.0).abs() <= *tol
                && (r.mu_mass - 1.0).abs() <= *tol
                && (r.h_rokhlin - r.h_closed).abs() <= 1e-5
                && ks_ok;
            Ok(Outcome { artifact: pretty(&json!({ "report": r, "passed": verified })), verified })
        }
        Command::Plot { cap, burn_in, points } => {
            let params = cfg.params()?;
            let d = build_attractor_capped(&params, *cap)?;
            let cloud = (*points > 0).then(|| sample_attractor(&params, *burn_in, *points, cfg.seed));
            Ok(Outcome::ok(render_svg(&d, cloud.as_ref(), window(cfg)?)?))
        }
    }
}
