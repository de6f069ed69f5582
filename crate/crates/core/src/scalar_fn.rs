//! A uniform handle for scalar functions of one variable, whichever way they
//! are represented: a parsed expression, a sampled curve with node
//! derivatives, or a truncated power series.  Expressions and series answer
//! derivative queries of any order through jets; sampled curves carry one
//! derivative per node and interpolate in between.

use std::fmt;

use crate::expr::{parse_expr, Bindings, ExprAst};
use crate::jet::Jet;
use crate::series::SeriesPoly;
use crate::EvalError;

/// Closed interval, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        assert!(r >= 0.0);
        Interval { lo: -r, hi: r }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Intersection; panics if the result would be empty.
    pub fn clamp_to(&self, other: Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Uniformly sampled curve with a value and first derivative per node.
/// Evaluation is cubic Hermite on each cell; derivative queries interpolate
/// the node derivatives with a 4-point cubic.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
    /// Recorded estimate of the worst interpolation error (from midpoint
    /// checks against the generating function, when available).
    err_bound: f64,
}

impl SampledCurve {
    /// Build from per-node data.  `values` and `derivs` must have equal
    /// length >= 2; nodes are uniform on `[lo, hi]`.
    pub fn from_data(lo: f64, hi: f64, values: Vec<f64>, derivs: Vec<f64>, err_bound: f64) -> Self {
        assert!(values.len() >= 2 && values.len() == derivs.len());
        assert!(hi > lo);
        SampledCurve { lo, hi, values, derivs, err_bound }
    }

    /// Sample `f` (returning value and derivative) on `n` uniform cells and
    /// record the worst midpoint disagreement as the error estimate.
    pub fn from_fn(
        lo: f64,
        hi: f64,
        n: usize,
        f: &mut dyn FnMut(f64) -> Result<(f64, f64), EvalError>,
    ) -> Result<Self, EvalError> {
        assert!(n >= 1);
        let step = (hi - lo) / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut derivs = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = if i == n { hi } else { lo + i as f64 * step };
            let (v, d) = f(x)?;
            values.push(v);
            derivs.push(d);
        }
        let mut curve = SampledCurve { lo, hi, values, derivs, err_bound: 0.0 };
        let mut worst = 0.0f64;
        for i in 0..n {
            let xm = lo + (i as f64 + 0.5) * step;
            let (truth, _) = f(xm)?;
            worst = worst.max((curve.value(xm) - truth).abs());
        }
        // Midpoint disagreement underestimates the sup slightly; keep a margin.
        curve.err_bound = 2.0 * worst;
        Ok(curve)
    }

    pub fn range(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    pub fn err_bound(&self) -> f64 {
        self.err_bound
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> Result<(usize, f64), EvalError> {
        // Tolerate rounding just past the ends.
        let slack = 1e-12 * (self.hi - self.lo);
        if x < self.lo - slack || x > self.hi + slack {
            return Err(EvalError::OutsideDomain { x, lo: self.lo, hi: self.hi });
        }
        let step = self.step();
        let t = ((x - self.lo) / step).floor();
        let i = (t as usize).min(self.values.len() - 2);
        Ok((i, (x - (self.lo + i as f64 * step)) / step))
    }

    /// Cubic Hermite interpolation.
    pub fn value(&self, x: f64) -> f64 {
        let (i, t) = match self.locate(x) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        let h = self.step();
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i] * h, self.derivs[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * d1
    }

    /// Derivative by cubic interpolation of the node derivatives (4-point
    /// Lagrange stencil, one-sided near the ends).
    pub fn derivative(&self, x: f64) -> f64 {
        let (i, _) = match self.locate(x) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        let n = self.values.len();
        let first = (i.saturating_sub(1)).min(n.saturating_sub(4));
        let h = self.step();
        // Lagrange through the four nodes starting at `first`.
        let mut acc = 0.0;
        for j in 0..4.min(n) {
            let xj = self.lo + (first + j) as f64 * h;
            let mut basis = 1.0;
            for k in 0..4.min(n) {
                if k != j {
                    let xk = self.lo + (first + k) as f64 * h;
                    basis *= (x - xk) / (xj - xk);
                }
            }
            acc += basis * self.derivs[first + j];
        }
        acc
    }

    pub fn checked_value(&self, x: f64) -> Result<f64, EvalError> {
        self.locate(x)?;
        Ok(self.value(x))
    }

    pub fn checked_derivative(&self, x: f64) -> Result<f64, EvalError> {
        self.locate(x)?;
        Ok(self.derivative(x))
    }
}

#[derive(Debug, Clone)]
enum Source {
    Expr { ast: ExprAst, params: Bindings },
    Sampled(SampledCurve),
    Series(SeriesPoly),
}

/// A scalar function together with its domain of validity.
#[derive(Debug, Clone)]
pub struct ScalarFn {
    source: Source,
    domain: Interval,
}

impl ScalarFn {
    /// Parse an expression with no free parameters; its domain is whatever
    /// evaluation succeeds on (declared unbounded).
    pub fn from_expr_str(text: &str) -> Result<Self, crate::Error> {
        let ast = parse_expr(text)?;
        Self::from_expr(ast, Bindings::new())
    }

    /// Wrap a parsed expression with parameter bindings; every parameter in
    /// the tree must be bound.
    pub fn from_expr(ast: ExprAst, params: Bindings) -> Result<Self, crate::Error> {
        for name in ast.params() {
            if !params.contains_key(name) {
                return Err(crate::Error::Eval(EvalError::UnboundParam(name.to_owned())));
            }
        }
        Ok(ScalarFn { source: Source::Expr { ast, params }, domain: Interval::UNBOUNDED })
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn { source: Source::Expr { ast: ExprAst::Number(c), params: Bindings::new() },
                   domain: Interval::UNBOUNDED }
    }

    pub fn from_series(series: SeriesPoly, domain: Interval) -> Self {
        ScalarFn { source: Source::Series(series), domain }
    }

    pub fn from_samples(curve: SampledCurve) -> Self {
        let domain = curve.range();
        ScalarFn { source: Source::Sampled(curve), domain }
    }

    /// Same function restricted (or re-declared) to a domain.
    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Highest derivative order answerable exactly: unlimited for
    /// expressions and series, one for sampled curves.
    pub fn smoothness(&self) -> usize {
        match &self.source {
            Source::Expr { .. } | Source::Series(_) => usize::MAX,
            Source::Sampled(_) => 1,
        }
    }

    /// The generating polynomial, if this function is one.
    pub fn as_polynomial(&self) -> Option<SeriesPoly> {
        match &self.source {
            Source::Series(s) => Some(s.clone()),
            Source::Expr { ast, params } => ast.to_polynomial(params).map(SeriesPoly::new),
            Source::Sampled(_) => None,
        }
    }

    /// The recorded interpolation-error bound (zero for exact sources).
    pub fn err_bound(&self) -> f64 {
        match &self.source {
            Source::Sampled(c) => c.err_bound(),
            _ => 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(x) {
            // Allow harmless rounding past finite ends.
            let slack = 1e-12 * (1.0 + x.abs());
            if x < self.domain.lo - slack || x > self.domain.hi + slack {
                return Err(EvalError::OutsideDomain { x, lo: self.domain.lo, hi: self.domain.hi });
            }
        }
        match &self.source {
            Source::Expr { ast, params } => ast.eval(x, params),
            Source::Sampled(c) => c.checked_value(x),
            Source::Series(s) => Ok(s.eval(x)),
        }
    }

    /// First derivative.
    pub fn deriv(&self, x: f64) -> Result<f64, EvalError> {
        match &self.source {
            Source::Sampled(c) => c.checked_derivative(x),
            _ => Ok(self.eval_jet(x, 1)?.derivative(1)),
        }
    }

    /// Jet of the requested order; sampled curves can answer order <= 1.
    pub fn eval_jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        match &self.source {
            Source::Expr { ast, params } => ast.eval_jet(&Jet::variable(x, order), params),
            Source::Series(s) => Ok(s.eval_jet(&Jet::variable(x, order))),
            Source::Sampled(c) => {
                if order > 1 {
                    return Err(EvalError::DerivOrder { requested: order, available: 1 });
                }
                let v = c.checked_value(x)?;
                if order == 0 {
                    Ok(Jet::from_coeffs(vec![v]))
                } else {
                    Ok(Jet::from_coeffs(vec![v, c.derivative(x)]))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_reproduces_a_cubic_exactly() {
        let mut f = |x: f64| Ok((x * x * x - 2.0 * x, 3.0 * x * x - 2.0));
        let curve = SampledCurve::from_fn(-1.0, 1.0, 8, &mut f).unwrap();
        for &x in &[-0.95, -0.3, 0.0, 0.512, 0.999] {
            assert_relative_eq!(curve.value(x), x * x * x - 2.0 * x, epsilon = 1e-14);
            assert_relative_eq!(curve.derivative(x), 3.0 * x * x - 2.0, epsilon = 1e-12);
        }
        assert!(curve.err_bound() < 1e-14);
    }

    #[test]
    fn interpolation_error_scales_like_h4() {
        let mut f = |x: f64| Ok((x.sin(), x.cos()));
        let coarse = SampledCurve::from_fn(0.0, 3.0, 16, &mut f).unwrap();
        let fine = SampledCurve::from_fn(0.0, 3.0, 32, &mut f).unwrap();
        assert!(coarse.err_bound() > 0.0);
        let ratio = coarse.err_bound() / fine.err_bound();
        assert!((8.0..32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn out_of_range_queries_error() {
        let mut f = |x: f64| Ok((x, 1.0));
        let curve = SampledCurve::from_fn(0.0, 1.0, 4, &mut f).unwrap();
        assert!(curve.checked_value(1.5).is_err());
        assert!(ScalarFn::from_samples(curve).eval(-0.2).is_err());
    }

    #[test]
    fn expression_function_evaluates_and_differentiates() {
        let f = ScalarFn::from_expr_str("cos(x)").unwrap();
        assert_eq!(f.smoothness(), usize::MAX);
        assert_relative_eq!(f.eval(0.5).unwrap(), 0.5f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(f.deriv(0.5).unwrap(), -(0.5f64.sin()), epsilon = 1e-15);
    }

    #[test]
    fn series_function_answers_jets() {
        let s = SeriesPoly::new(vec![0.0, 0.0, 0.5]); // x^2/2
        let f = ScalarFn::from_series(s, Interval::symmetric(2.0));
        let jet = f.eval_jet(0.75, 2).unwrap();
        assert_relative_eq!(jet.value(), 0.28125, epsilon = 1e-15);
        assert_relative_eq!(jet.derivative(1), 0.75, epsilon = 1e-15);
        assert_relative_eq!(jet.derivative(2), 1.0, epsilon = 1e-15);
        assert!(f.eval(3.0).is_err());
    }

    #[test]
    fn domain_restriction_applies() {
        let f = ScalarFn::from_expr_str("x^2").unwrap().with_domain(Interval::new(0.0, 1.0));
        assert!(f.eval(0.5).is_ok());
        assert!(f.eval(2.0).is_err());
    }

    #[test]
    fn polynomial_detection_through_the_handle() {
        let f = ScalarFn::from_expr_str("0.5 + 2*x^2").unwrap();
        let p = f.as_polynomial().unwrap();
        assert_eq!(p.coeffs(), &[0.5, 0.0, 2.0]);
        assert!(ScalarFn::from_expr_str("exp(x)").unwrap().as_polynomial().is_none());
    }
}
