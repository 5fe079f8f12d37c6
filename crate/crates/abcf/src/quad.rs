//! Adaptive 7/15-point Gauss-Kronrod quadrature on finite intervals.

/// Kronrod abscissae on `[-1, 1]`, outermost first; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("no convergence on [{lo}, {hi}]: error estimate {estimate:e} after {intervals} intervals")]
    NoConvergence { lo: f64, hi: f64, estimate: f64, intervals: usize },
    #[error("integrand is not finite on [{0}, {1}]")]
    NotFinite(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Bisects the interval with the largest error estimate until the total
/// estimate drops below `tol` (absolute) or `max_intervals` is hit.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Quad, QuadError> {
    integrate_with(f, lo, hi, tol, 2000)
}

pub fn integrate_with<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_intervals: usize) -> Result<Quad, QuadError> {
    if lo == hi {
        return Ok(Quad { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (v, e) = gk15(&f, lo, hi);
    let mut parts = vec![(lo, hi, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(QuadError::NotFinite(lo, hi));
        }
        if error <= tol {
            return Ok(Quad { value, error, intervals: parts.len() });
        }
        if parts.len() >= max_intervals {
            return Err(QuadError::NoConvergence { lo, hi, estimate: error, intervals: parts.len() });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (a, b, _, _) = parts.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        parts.push((a, m, v1, e1));
        parts.push((m, b, v2, e2));
    }
}

/// `int log|t| dt` from 0 to `c`, for either sign of `c`.
fn log_tip(c: f64) -> f64 {
    let r = c.abs();
    let v = if r == 0.0 { 0.0 } else { r * r.ln() - r };
    if c < 0.0 { -v } else { v }
}

/// `int_lo^hi log|x| g(x) dx` for smooth `g`. The interval is split at 0 and
/// on the pieces touching 0 the value `g(0) log|x|` is integrated exactly,
/// leaving a bounded remainder for the quadrature.
pub fn integrate_log_weighted<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> Result<Quad, QuadError> {
    if lo >= hi {
        return Ok(Quad { value: 0.0, error: 0.0, intervals: 0 });
    }
    if lo >= 0.0 || hi <= 0.0 {
        return log_one_side(&g, lo, hi, tol);
    }
    let left = log_one_side(&g, lo, 0.0, tol / 2.0)?;
    let right = log_one_side(&g, 0.0, hi, tol / 2.0)?;
    Ok(Quad {
        value: left.value + right.value,
        error: left.error + right.error,
        intervals: left.intervals + right.intervals,
    })
}

fn log_one_side<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, tol: f64) -> Result<Quad, QuadError> {
    if lo != 0.0 && hi != 0.0 {
        return integrate(|x| x.abs().ln() * g(x), lo, hi, tol);
    }
    let g0 = g(0.0);
    let rest = integrate(|x| if x == 0.0 { 0.0 } else { x.abs().ln() * (g(x) - g0) }, lo, hi, tol)?;
    let exact = g0 * (log_tip(hi) - log_tip(lo));
    Ok(Quad { value: rest.value + exact, ..rest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_smooth_functions() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-12).unwrap();
        assert!((q.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
        let q = integrate(|x| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
        let q = integrate(|x| 1.0 / (1.0 + x * x), -50.0, 50.0, 1e-12).unwrap();
        assert!((q.value - 2.0 * 50f64.atan()).abs() < 1e-11);
    }

    #[test]
    fn log_singularity() {
        // int_0^1 log(x)/(1+x) dx = -pi^2/12
        let q = integrate_log_weighted(|x| 1.0 / (1.0 + x), 0.0, 1.0, 1e-12).unwrap();
        assert!((q.value + PI * PI / 12.0).abs() < 1e-11);
        // int_{-1}^{2} log|x| dx = 2 log 2 - 3
        let q = integrate_log_weighted(|_| 1.0, -1.0, 2.0, 1e-12).unwrap();
        assert!((q.value - (2.0 * 2f64.ln() - 3.0)).abs() < 1e-12);
        // int_{-1}^0 log|x|/(1-x) dx = -pi^2/12 by x -> -x
        let q = integrate_log_weighted(|x| 1.0 / (1.0 - x), -1.0, 0.0, 1e-12).unwrap();
        assert!((q.value + PI * PI / 12.0).abs() < 1e-11);
    }

    #[test]
    fn failures_are_reported() {
        assert!(matches!(
            integrate_with(|x| (1.0 / x).sin(), 1e-9, 1.0, 1e-14, 20),
            Err(QuadError::NoConvergence { .. })
        ));
        assert!(matches!(integrate(|_| f64::NAN, 0.0, 1.0, 1e-8), Err(QuadError::NotFinite(..))));
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-8).unwrap().value, 0.0);
    }
}
