//! Gauss-Legendre quadrature: fixed-order rules plus an adaptive
//! bisection driver for integrands whose scale varies over the interval.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::EvalError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum QuadError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("adaptive quadrature did not converge on [{a}, {b}] (tol {tol})")]
    NoConvergence { a: f64, b: f64, tol: f64 },
    #[error("integrand returned a non-finite value near {x}")]
    NonFinite { x: f64 },
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
/// Computed once per order by Newton iteration on the Legendre polynomial
/// and cached for reuse.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

/// Legendre P_n and P_n' at t by the three-term recurrence.
fn legendre_with_deriv(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (p0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess, then Newton.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, t);
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_deriv(n, t);
        let w = 2.0 / ((1.0 - t * t) * d * d);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Single-panel Gauss-Legendre integration of `f` over `[a, b]`.
pub fn integrate_fixed(
    f: &mut dyn FnMut(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64, QuadError> {
    Ok(panel_with_mass(f, a, b, n)?.0)
}

/// Panel integral together with its L1 mass `int |f|`, the scale against
/// which floating-point noise in the result must be judged.
fn panel_with_mass(
    f: &mut dyn FnMut(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    n: usize,
) -> Result<(f64, f64), QuadError> {
    let rule = gauss_legendre(n);
    let (nodes, weights) = (&rule.0, &rule.1);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    let mut mass = 0.0;
    for (t, w) in nodes.iter().zip(weights) {
        let x = mid + half * t;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(QuadError::NonFinite { x });
        }
        acc += w * v;
        mass += w * v.abs();
    }
    Ok((acc * half, mass * half.abs()))
}

/// Quadrature order that drives the single-panel Gauss-Legendre error of an
/// analytic integrand comfortably below `tol`.
pub fn order_for_tol(tol: f64) -> usize {
    if tol >= 1e-6 {
        12
    } else if tol >= 1e-9 {
        16
    } else if tol >= 1e-12 {
        24
    } else {
        32
    }
}

const ADAPTIVE_ORDER: usize = 16;
const MAX_DEPTH: usize = 48;
/// Refinement disagreements below this multiple of the panel's L1 mass are
/// floating-point noise; splitting further cannot reduce them, so panels at
/// that level are accepted as converged.
const PRECISION_FLOOR: f64 = 4e-16;

/// Adaptive Gauss-Legendre integration to absolute tolerance `tol`:
/// panels are bisected until the two-half refinement of each agrees with the
/// single-panel value to its share of the budget (or to the limit of f64
/// precision, whichever is coarser).
pub fn integrate_adaptive(
    f: &mut dyn FnMut(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, _) = panel_with_mass(f, a, b, ADAPTIVE_ORDER)?;
    adaptive_panel(f, a, b, tol.abs().max(f64::MIN_POSITIVE), whole, 0)
}

fn adaptive_panel(
    f: &mut dyn FnMut(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    tol: f64,
    whole: f64,
    depth: usize,
) -> Result<f64, QuadError> {
    let mid = 0.5 * (a + b);
    let (left, lmass) = panel_with_mass(f, a, mid, ADAPTIVE_ORDER)?;
    let (right, rmass) = panel_with_mass(f, mid, b, ADAPTIVE_ORDER)?;
    let refined = left + right;
    let converged = (refined - whole).abs() <= tol.max(PRECISION_FLOOR * (lmass + rmass))
        || (b - a).abs() < 1e-15 * (a.abs() + b.abs() + 1.0);
    if converged {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadError::NoConvergence { a, b, tol });
    }
    let l = adaptive_panel(f, a, mid, 0.5 * tol, left, depth + 1)?;
    let r = adaptive_panel(f, mid, b, 0.5 * tol, right, depth + 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_and_weights_integrate_polynomials_exactly() {
        // A rule with n points is exact through degree 2n - 1.
        let mut f = |x: f64| Ok(x.powi(9) + 3.0 * x.powi(4) + 1.0);
        let got = integrate_fixed(&mut f, -1.0, 1.0, 5).unwrap();
        assert_relative_eq!(got, 3.0 * 2.0 / 5.0 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 3, 8, 17, 32, 64] {
            let rule = gauss_legendre(n);
            let total: f64 = rule.1.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn fixed_rule_hits_a_transcendental_integral() {
        let mut f = |x: f64| Ok(x.cos());
        let got = integrate_fixed(&mut f, 0.0, 1.0, 16).unwrap();
        assert_relative_eq!(got, 1.0f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn adaptive_handles_scale_variation() {
        // Steep but smooth: int_0^1 1/(x + 1e-3) dx = ln(1001).
        let mut f = |x: f64| Ok(1.0 / (x + 1e-3));
        let got = integrate_adaptive(&mut f, 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(got, 1001.0f64.ln(), epsilon = 1e-11);
    }

    #[test]
    fn adaptive_respects_orientation() {
        let mut f = |x: f64| Ok(x * x);
        let forward = integrate_adaptive(&mut f, 0.0, 2.0, 1e-12).unwrap();
        let backward = integrate_adaptive(&mut f, 2.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(forward, 8.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(backward, -8.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn eval_errors_propagate() {
        let mut f = |x: f64| {
            if x > 0.5 {
                Err(crate::EvalError::Domain { op: "test", arg: x })
            } else {
                Ok(x)
            }
        };
        assert!(matches!(
            integrate_fixed(&mut f, 0.0, 1.0, 8),
            Err(QuadError::Eval(_))
        ));
    }
}
