//! One-dimensional quadrature: adaptive Simpson on finite intervals and
//! dyadic-window integration toward infinity with a divergence heuristic.

use thiserror::Error;

/// Stopping rule for [`simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_depth: 40,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive Simpson did not meet tolerance on [{a}, {b}]")]
    NotConverged { a: f64, b: f64 },
    #[error("integrand is not finite at t = {0}")]
    NonFinite(f64),
}

/// Log-slope threshold used to call a sequence of dyadic window sums
/// non-decaying.
pub const EPS_SLOPE: f64 = 0.1;

/// Integrates `f` over `[a, b]` by adaptive Simpson.
///
/// The local acceptance test is `|S_left + S_right - S| <= 15 eps`, with
/// `eps = max(abs, rel * |S_coarse|)` halved at every bisection.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return simpson(f, b, a, tol).map(|v| -v);
    }
    let fa = eval(&f, a)?;
    let fb = eval(&f, b)?;
    let m = 0.5 * (a + b);
    let fm = eval(&f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = tol.abs.max(tol.rel * whole.abs());
    recurse(&f, a, b, fa, fm, fb, whole, eps, tol.max_depth)
}

fn eval<F: Fn(f64) -> f64>(f: &F, t: f64) -> Result<f64, QuadError> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite(t))
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(QuadError::NotConverged { a, b });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
    Ok(l + r)
}

/// Outcome of an integral toward `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum Improper {
    Converged(f64),
    Divergent,
}

/// Integrates `f` over `[a, inf)` by summing dyadic windows
/// `[a 2^k, a 2^(k+1)]`.
///
/// Stops early once three consecutive windows fall below `1e-14` of the
/// running total. After 64 windows the tail is judged by the least-squares
/// slope of `ln W_k` against `ln t_k`: a slope of at least `-EPS_SLOPE` is
/// reported as divergence, otherwise a geometric tail is added. Overflowing
/// windows count as divergence.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Improper, QuadError> {
    assert!(a > 0.0, "dyadic windows need a positive lower limit");
    let mut total = 0.0;
    let mut windows = Vec::new();
    let mut small = 0;
    for k in 0..64 {
        let lo = a * 2f64.powi(k);
        let hi = 2.0 * lo;
        let w = match simpson(&f, lo, hi, tol) {
            Ok(w) => w,
            Err(QuadError::NonFinite(_)) => return Ok(Improper::Divergent),
            Err(e) => return Err(e),
        };
        if !w.is_finite() || w.abs() > 1e300 {
            return Ok(Improper::Divergent);
        }
        total += w;
        windows.push((lo, w));
        if w.abs() <= 1e-14 * total.abs() {
            small += 1;
            if small >= 3 {
                return Ok(Improper::Converged(total));
            }
        } else {
            small = 0;
        }
    }
    let tail = &windows[windows.len() - 8..];
    let slope = log_slope(tail);
    if slope >= -EPS_SLOPE {
        return Ok(Improper::Divergent);
    }
    let ratio = 2f64.powf(slope);
    let last = tail[tail.len() - 1].1;
    Ok(Improper::Converged(total + last * ratio / (1.0 - ratio)))
}

/// Least-squares slope of `ln y` against `ln x` over positive samples.
///
/// Non-positive `y` values are treated as complete decay and make the slope
/// `-inf`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    if points.iter().any(|&(_, y)| y <= 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return 0.0;
    }
    sxy / sxx
}
