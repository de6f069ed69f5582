//! Closed-form reference wells for cross-checking every other part of the
//! crate: the harmonic oscillator, the rational isochronous family with
//! constant characteristic, and the (non-isochronous for `beta != 0`)
//! Duffing oscillator.

use crate::potential::Potential;
use crate::scalar_fn::{Interval, ScalarFn};
use crate::{expr, EvalError};

/// A reference well with closed forms for everything a [`Potential`]
/// provides, plus the Urabe function `h` and the characteristic `f` where
/// the family has them in closed form.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    lambda: f64,
    span: Interval,
    pub isochronous: bool,
    g: ScalarFn,
    big_g: ScalarFn,
    big_x_fn: ScalarFn,
    /// Closed-form `h(X)`, when the family has one.
    pub h: Option<ScalarFn>,
    /// Closed-form characteristic `f(s)`, when the family has one.
    pub f: Option<ScalarFn>,
}

impl CatalogEntry {
    pub fn force_fn(&self) -> &ScalarFn {
        &self.g
    }

    pub fn potential_fn(&self) -> &ScalarFn {
        &self.big_g
    }
}

impl Potential for CatalogEntry {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn span(&self) -> Interval {
        self.span
    }

    fn potential(&self, x: f64) -> Result<f64, EvalError> {
        self.check(x)?;
        self.big_g.eval(x)
    }

    fn force(&self, x: f64) -> Result<f64, EvalError> {
        self.check(x)?;
        self.g.eval(x)
    }

    fn force_deriv(&self, x: f64) -> Result<f64, EvalError> {
        self.check(x)?;
        self.g.deriv(x)
    }

    fn big_x(&self, x: f64) -> Result<f64, EvalError> {
        self.check(x)?;
        self.big_x_fn.eval(x)
    }
}

impl CatalogEntry {
    fn check(&self, x: f64) -> Result<(), EvalError> {
        if self.span.contains(x) {
            Ok(())
        } else {
            Err(EvalError::OutsideDomain { x, lo: self.span.lo, hi: self.span.hi })
        }
    }
}

fn expr_with(src: &str, params: &[(&str, f64)]) -> ScalarFn {
    let ast = expr::parse_expr(src).expect("catalog expression parses");
    let bindings = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    ScalarFn::from_expr(ast, bindings).expect("catalog expression binds")
}

/// The linear well `g = lambda^2 x`: isochronous with `h = 0`, `f = 0`.
pub fn harmonic(lambda: f64) -> CatalogEntry {
    assert!(lambda > 0.0, "harmonic frequency must be positive");
    let l2 = lambda * lambda;
    CatalogEntry {
        name: format!("harmonic-{lambda}"),
        lambda,
        span: Interval::symmetric(1.0),
        isochronous: true,
        g: expr_with("l2*x", &[("l2", l2)]),
        big_g: expr_with("l2*x^2/2", &[("l2", l2)]),
        big_x_fn: expr_with("l*x", &[("l", lambda)]),
        h: Some(ScalarFn::constant(0.0)),
        f: Some(ScalarFn::constant(0.0)),
    }
}

/// The rational family with constant characteristic `f = a` at `lambda = 1`:
/// `g = X/(1 + aX)` with `x = X + a X^2/2`, hence `h(X) = aX`.  Isochronous
/// on the symmetric range up to 90% of the singular point `x = -1/(2a)`.
pub fn urabe_family(a: f64) -> CatalogEntry {
    assert!(a > 0.0, "family parameter must be positive");
    let reach = 0.9 / (2.0 * a);
    CatalogEntry {
        name: format!("urabe-{a}"),
        lambda: 1.0,
        span: Interval::symmetric(reach),
        isochronous: true,
        g: expr_with("(sqrt(1+2*a*x)-1)/(a*sqrt(1+2*a*x))", &[("a", a)]),
        big_g: expr_with("((sqrt(1+2*a*x)-1)/a)^2/2", &[("a", a)]),
        big_x_fn: expr_with("(sqrt(1+2*a*x)-1)/a", &[("a", a)]),
        h: Some(expr_with("a*x", &[("a", a)])),
        f: Some(ScalarFn::constant(a)),
    }
}

/// The Duffing well `g = x + beta x^3`: a center for every `beta >= 0`, but
/// isochronous only at `beta = 0` (where it reduces to the harmonic well).
pub fn duffing(beta: f64) -> CatalogEntry {
    let iso = beta == 0.0;
    CatalogEntry {
        name: format!("duffing-{beta}"),
        lambda: 1.0,
        span: Interval::symmetric(1.0),
        isochronous: iso,
        g: expr_with("x + b*x^3", &[("b", beta)]),
        big_g: expr_with("x^2/2 + b*x^4/4", &[("b", beta)]),
        big_x_fn: expr_with("x*sqrt(1+b*x^2/2)", &[("b", beta)]),
        h: iso.then(|| ScalarFn::constant(0.0)),
        f: iso.then(|| ScalarFn::constant(0.0)),
    }
}

/// The fixed reference set used by tests and the command-line `catalog`
/// subcommand.
pub fn standard_catalog() -> Vec<CatalogEntry> {
    vec![harmonic(1.0), harmonic(2.0), urabe_family(0.5), urabe_family(1.0), duffing(1.0)]
}
