//! The common interface to a potential well, however it was obtained.
//!
//! Everything downstream (the Urabe-criterion checks, turning points,
//! period measurements) only needs the frequency `lambda`, the solved
//! x-range, the potential `G`, the restoring force `g = G'` and its slope.
//! Three kinds of objects provide these: constructed solutions
//! ([`crate::forge::PotentialSolution`]), closed-form catalog entries, and
//! user expressions for `g` wrapped by [`ExprPotential`].

use crate::quad;
use crate::scalar_fn::{Interval, ScalarFn};
use crate::{Error, EvalError};

/// A potential well centred at the origin with `G(0) = 0`, `g(0) = 0`,
/// `g'(0) = lambda^2 > 0`.
pub trait Potential {
    /// Angular frequency of the linearization, `sqrt(g'(0))`.
    fn lambda(&self) -> f64;

    /// x-interval on which the well can be evaluated.
    fn span(&self) -> Interval;

    /// Potential `G(x) = int_0^x g`.
    fn potential(&self, x: f64) -> Result<f64, EvalError>;

    /// Restoring force `g(x)`.
    fn force(&self, x: f64) -> Result<f64, EvalError>;

    /// Slope `g'(x)`.
    fn force_deriv(&self, x: f64) -> Result<f64, EvalError>;

    /// The canonical coordinate `X(x) = sign(x) * sqrt(2 G(x))`.
    ///
    /// Implementations with a cancellation-free form near the origin should
    /// override this.
    fn big_x(&self, x: f64) -> Result<f64, EvalError> {
        let g = self.potential(x)?;
        // Tiny negative values can round out of G near the origin.
        if g < 0.0 && g > -1e-14 * (1.0 + x.abs()) {
            return Ok(0.0);
        }
        if g < 0.0 {
            return Err(EvalError::Domain { op: "sqrt of negative potential", arg: g });
        }
        Ok(x.signum() * (2.0 * g).sqrt())
    }

    /// The ratio `X(x) / g(x)`, extended by its limit `1/lambda` at `x = 0`.
    ///
    /// Override when a cancellation-free form exists; the default divides
    /// the two quantities directly.
    fn x_over_g(&self, x: f64) -> Result<f64, EvalError> {
        if x == 0.0 {
            return Ok(1.0 / self.lambda());
        }
        let g = self.force(x)?;
        if g == 0.0 {
            return Err(EvalError::Domain { op: "X/g with vanishing force", arg: x });
        }
        Ok(self.big_x(x)? / g)
    }
}

/// A potential defined by a user expression for the restoring force `g`.
/// The potential is integrated from `g` on demand by adaptive quadrature;
/// close to the origin it switches to the Taylor expansion of `g` at 0
/// (computed once through jets), because expressions like
/// `(sqrt(1+x)-1)/...` lose all relative accuracy to cancellation there and
/// no quadrature of the noisy values can win it back.
#[derive(Debug, Clone)]
pub struct ExprPotential {
    g: ScalarFn,
    lambda: f64,
    g_prime0: f64,
    span: Interval,
    /// Taylor coefficients of `g` at 0 (`g^(k)(0)/k!`), when the
    /// representation can produce them.
    g_taylor: Option<Vec<f64>>,
    /// `|x|` below which the Taylor sum is tried first.
    series_cutoff: f64,
}

impl ExprPotential {
    /// Wrap `g` on `[-half_width, half_width]`.  When `lambda` is not given
    /// it defaults to `sqrt(g'(0))`.  Rejects inputs violating the center
    /// hypotheses: `g(0)` must vanish and `g'(0)` must be positive.
    pub fn new(g: ScalarFn, lambda: Option<f64>, half_width: f64) -> Result<Self, Error> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidInput(format!("half width must be positive, got {half_width}")));
        }
        let jet = g.eval_jet(0.0, 1)?;
        let g0 = jet.value();
        let g_prime0 = jet.derivative(1);
        if g0.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("g(0) = {g0}, expected 0")));
        }
        if !(g_prime0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "g'(0) = {g_prime0}, expected positive (no center at the origin)"
            )));
        }
        let lambda = match lambda {
            Some(l) if l > 0.0 => l,
            Some(l) => {
                return Err(Error::InvalidInput(format!("lambda must be positive, got {l}")))
            }
            None => g_prime0.sqrt(),
        };
        let span = Interval::symmetric(half_width).clamp_to(g.domain());
        let g_taylor = g.eval_jet(0.0, 20).ok().map(|jet| jet.coeffs().to_vec());
        let scale = span.hi.max(-span.lo);
        let series_cutoff = 1e-3 * scale.min(1.0);
        Ok(ExprPotential { g, lambda, g_prime0, span, g_taylor, series_cutoff })
    }

    pub fn force_fn(&self) -> &ScalarFn {
        &self.g
    }

    /// `g'(0)` as measured from the expression.
    pub fn measured_g_prime0(&self) -> f64 {
        self.g_prime0
    }

    /// Term-by-term Taylor sum of `G(x) = int_0^x g`; `None` when the tail
    /// has not shrunk below roundoff by the last stored coefficient.
    fn series_potential(&self, x: f64) -> Option<f64> {
        let coeffs = self.g_taylor.as_deref()?;
        let mut acc = 0.0f64;
        let mut xpow = x;
        let mut last = 0.0f64;
        for (k, c) in coeffs.iter().enumerate() {
            let term = c * xpow / (k as f64 + 1.0);
            acc += term;
            last = term.abs();
            xpow *= x;
        }
        if acc.is_finite() && last <= 1e-16 * acc.abs().max(f64::MIN_POSITIVE) {
            Some(acc)
        } else {
            None
        }
    }
}

impl Potential for ExprPotential {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn span(&self) -> Interval {
        self.span
    }

    fn potential(&self, x: f64) -> Result<f64, EvalError> {
        if !self.span.contains(x) {
            return Err(EvalError::OutsideDomain { x, lo: self.span.lo, hi: self.span.hi });
        }
        if x.abs() <= self.series_cutoff {
            if let Some(v) = self.series_potential(x) {
                return Ok(v);
            }
        }
        let mut f = |t: f64| self.g.eval(t);
        // Absolute tolerance scaled to the expected size of G ~ g'(0) x^2 / 2
        // so that small-x values keep their relative accuracy, floored at the
        // absolute noise a cancellation-prone expression can leave on g.
        let tol = (1e-14 * self.g_prime0 * x * x)
            .max(1e-15 * x.abs() * self.g_prime0.max(1.0))
            .max(1e-300);
        quad::integrate_adaptive(&mut f, 0.0, x, tol).map_err(|e| match e {
            quad::QuadError::Eval(e) => e,
            _ => EvalError::Domain { op: "quadrature of g", arg: x },
        })
    }

    fn force(&self, x: f64) -> Result<f64, EvalError> {
        if !self.span.contains(x) {
            return Err(EvalError::OutsideDomain { x, lo: self.span.lo, hi: self.span.hi });
        }
        self.g.eval(x)
    }

    fn force_deriv(&self, x: f64) -> Result<f64, EvalError> {
        if !self.span.contains(x) {
            return Err(EvalError::OutsideDomain { x, lo: self.span.lo, hi: self.span.hi });
        }
        self.g.deriv(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wraps_a_linear_force() {
        let g = ScalarFn::from_expr_str("4*x").unwrap();
        let p = ExprPotential::new(g, None, 1.0).unwrap();
        assert_relative_eq!(p.lambda(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(p.potential(0.5).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(p.force(0.5).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(p.force_deriv(0.3).unwrap(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(p.big_x(0.5).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.x_over_g(0.25).unwrap(), 0.5, max_relative = 1e-10);
        assert_relative_eq!(p.x_over_g(0.0).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn potential_keeps_relative_accuracy_at_tiny_x() {
        let g = ScalarFn::from_expr_str("x + x^3").unwrap();
        let p = ExprPotential::new(g, None, 1.0).unwrap();
        for &x in &[1e-6, -1e-5, 1e-3] {
            let truth = 0.5 * x * x + 0.25 * x * x * x * x;
            assert_relative_eq!(p.potential(x).unwrap(), truth, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_broken_hypotheses() {
        let not_centered = ScalarFn::from_expr_str("x + 1").unwrap();
        assert!(ExprPotential::new(not_centered, None, 1.0).is_err());
        let repelling = ScalarFn::from_expr_str("-x").unwrap();
        assert!(ExprPotential::new(repelling, None, 1.0).is_err());
    }

    #[test]
    fn negative_potential_region_is_reported() {
        // g = x - x^2 is a center, but G goes negative beyond x = 1.5;
        // requesting X there must fail rather than produce NaN.
        let g = ScalarFn::from_expr_str("x - x^2").unwrap();
        let p = ExprPotential::new(g, None, 2.0).unwrap();
        assert!(p.big_x(1.9).is_err());
    }
}
