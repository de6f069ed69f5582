//! Safeguarded scalar root finding: Newton steps inside a maintained
//! bracket, falling back to bisection whenever Newton stalls or escapes.

use crate::EvalError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum RootError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no sign change on [{lo}, {hi}] (f = {f_lo} and {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root iteration did not converge after {max_iter} steps")]
    NoConvergence { max_iter: usize },
}

/// Find the root of `f` on `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign.  `f_and_df` returns the value and derivative; a zero derivative
/// simply forces a bisection step.  Stops when `|f| <= ftol`, when the
/// Newton step shrinks below `xtol * max(1, |x|)` (in the quadratic regime
/// the step bounds the distance to the root), or when the bracket itself
/// drops below that width.
pub fn newton_bisect(
    f_and_df: &mut dyn FnMut(f64) -> Result<(f64, f64), EvalError>,
    lo: f64,
    hi: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64, RootError> {
    const MAX_ITER: usize = 120;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (fa, _) = f_and_df(a)?;
    let (fb, _) = f_and_df(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    let mut fa = fa;
    // Current iterate: start in the middle.
    let mut x = 0.5 * (a + b);
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f_and_df(x)?;
        if fx.abs() <= ftol {
            return Ok(x);
        }
        // Shrink the bracket around the sign change.
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if (b - a).abs() <= xtol * x.abs().max(1.0) {
            return Ok(0.5 * (a + b));
        }
        // A Newton step already below the x-tolerance means the iterate has
        // converged even if the bracket is still wide (one-sided approach);
        // take the final polish and stop.
        if dfx != 0.0 {
            let step = fx / dfx;
            if step.abs() <= xtol * x.abs().max(1.0) {
                let polished = x - step;
                return Ok(if polished > a && polished < b { polished } else { x });
            }
        }
        // Newton candidate; keep it only if it stays strictly inside.
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    Err(RootError::NoConvergence { max_iter: MAX_ITER })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_a_simple_root() {
        let mut f = |x: f64| Ok((x * x - 2.0, 2.0 * x));
        let r = newton_bisect(&mut f, 0.0, 2.0, 1e-14, 1e-15).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn survives_a_flat_derivative() {
        // f(x) = x^3 has f'(0) = 0; bisection safeguards the iteration.
        let mut f = |x: f64| Ok((x * x * x - 1e-6, 3.0 * x * x));
        let r = newton_bisect(&mut f, -1.0, 2.0, 1e-14, 0.0).unwrap();
        assert_relative_eq!(r, 0.01, epsilon = 1e-10);
    }

    #[test]
    fn rejects_a_bracket_without_sign_change() {
        let mut f = |x: f64| Ok((x * x + 1.0, 2.0 * x));
        assert!(matches!(
            newton_bisect(&mut f, -1.0, 1.0, 1e-12, 1e-12),
            Err(RootError::NoSignChange { .. })
        ));
    }

    #[test]
    fn accepts_reversed_bracket_order() {
        let mut f = |x: f64| Ok((x - 0.25, 1.0));
        let r = newton_bisect(&mut f, 1.0, 0.0, 1e-14, 0.0).unwrap();
        assert_relative_eq!(r, 0.25, epsilon = 1e-13);
    }

    #[test]
    fn endpoint_root_is_returned_immediately() {
        let mut f = |x: f64| Ok((x, 1.0));
        assert_eq!(newton_bisect(&mut f, 0.0, 1.0, 1e-14, 0.0).unwrap(), 0.0);
    }
}
