//! Construction and verification of isochronous potentials.
//!
//! A center of `x'' + g(x) = 0` at the origin is isochronous when every orbit
//! in a neighbourhood has the same period `2*pi/lambda`.  This crate builds
//! such potentials from their scalar characteristic `f` (the right-hand side
//! of `(G/g^2)' = f(G)`), converts between the three equivalent descriptions
//! (`g` itself, the odd function `h` of the Urabe criterion, and `f`), and
//! independently checks isochronicity by measuring orbital periods.
//!
//! The main entry points are:
//!
//! * [`forge::solve_chouikha`] — build a potential from `(f, lambda)`,
//! * [`urabe`] — the `g <-> h <-> f` conversions and residuals,
//! * [`period`] — turning points, period quadrature/integration and scans,
//! * [`series`] — exact truncated-series counterparts of the above,
//! * [`catalog`] — closed-form reference potentials used for cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::needless_range_loop)] // index loops read better in convolution code
#![allow(clippy::type_complexity)] // the ODE right-hand-side signature is spelled out on purpose

pub mod catalog;
pub mod expr;
pub mod forge;
pub mod jet;
pub mod ode;
pub mod period;
pub mod potential;
pub mod quad;
pub mod rootfind;
pub mod scalar_fn;
pub mod series;
pub mod urabe;

pub use expr::{ExprAst, ParseError};
pub use forge::{solve_chouikha, IsoProblem, PotentialSolution};
pub use jet::Jet;
pub use potential::Potential;
pub use scalar_fn::{Interval, ScalarFn};
pub use urabe::{h_from_f, h_from_g, f_from_h, urabe_residual, UrabeData};

/// Failure to evaluate a scalar function (or a jet of one) at a point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    /// An elementary operation left its real domain, e.g. `sqrt(-1)`.
    #[error("{op} undefined for argument {arg}")]
    Domain { op: &'static str, arg: f64 },
    /// The expression references a parameter that was never bound.
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    /// The evaluation point lies outside the function's declared domain.
    #[error("point {x} outside domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    /// A derivative of higher order than the representation carries.
    #[error("derivative order {requested} exceeds the {available} available from this representation")]
    DerivOrder { requested: usize, available: usize },
}

/// Umbrella error for the higher-level operations of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] series::SeriesError),
    #[error(transparent)]
    Quad(#[from] quad::QuadError),
    #[error(transparent)]
    Root(#[from] rootfind::RootError),
    #[error(transparent)]
    Ode(#[from] ode::OdeError),
    /// The Cauchy-problem denominator `1 + x*H*K` became non-positive at a
    /// point where an evaluation was requested.
    #[error("potential construction singular at x = {x} (denominator {den})")]
    Singular { x: f64, den: f64 },
    /// `f` could not be evaluated even at the origin, so no step was taken.
    #[error("no progress from x = 0: {0}")]
    NoProgress(String),
    /// An energy outside the band that the solved range of the potential
    /// supports (both walls must rise to the requested level).
    #[error("energy {e} outside admissible band (0, {e_max})")]
    EnergyOutOfBand { e: f64, e_max: f64 },
    /// The restoring force vanished or had the wrong sign away from the
    /// origin, so the point is not surrounded by closed orbits.
    #[error("not a center: x*g(x) <= 0 at x = {x}")]
    NotACenter { x: f64 },
    /// A requested value of `X` is not attained on the solved range.
    #[error("X = {big_x} not attained (range covers |X| <= {max})")]
    BigXOutOfRange { big_x: f64, max: f64 },
    /// An orbit did not return to its section within the allotted time.
    #[error("orbit did not close within {t_max} time units")]
    NoReturn { t_max: f64 },
    /// Hypotheses violated by the input (`g(0) != 0`, `g'(0) <= 0`, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
