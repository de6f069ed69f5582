//! Construction of a potential from its characteristic `f` and frequency
//! `lambda`.
//!
//! With the factorizations `G(x) = x^2 H(x)` and `F(x) = x K(x)`,
//! `K(x) = int_0^1 f(x t) dt`, the integrated characteristic equation
//! `2G = (x + F(G)) G'` becomes a scalar Cauchy problem for `H`:
//!
//! ```text
//! H' = Phi(x, H) = -2 H^2 K(x^2 H) / (1 + x H K(x^2 H)),   H(0) = lambda^2 / 2
//! ```
//!
//! which has no singularity at the origin (the denominator is 1 there).
//! Integrating `H` instead of `G` preserves full relative accuracy of
//! `G = x^2 H` near the center, where everything else is later measured
//! against it.  The force is reconstructed without any numerical
//! differentiation as `g = 2 x H + x^2 Phi(x, H)`.

use crate::ode::{DenseOutput, Dopri5, RhsFailure, Status, Step, StepControl};
use crate::potential::Potential;
use crate::quad;
use crate::scalar_fn::{Interval, ScalarFn};
use crate::{Error, EvalError};

/// Input to the construction: the characteristic, the frequency, how far to
/// integrate, and the ODE tolerance.
#[derive(Debug, Clone)]
pub struct IsoProblem {
    pub f: ScalarFn,
    pub lambda: f64,
    pub half_width: f64,
    pub tol: f64,
}

/// Default ODE tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Accepted solutions never proceed past the point where the denominator of
/// `Phi` falls to this threshold: the construction is within sight of its
/// natural singularity there and stops.
pub const DEN_FLOOR: f64 = 0.1;

impl IsoProblem {
    /// Validates positivity of `lambda`, `half_width` and `tol`, and that
    /// `f` is evaluable at 0 (the seed of the whole construction).
    pub fn new(f: ScalarFn, lambda: f64, half_width: f64) -> Result<Self, Error> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        if !(half_width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if !f.domain().contains(0.0) {
            return Err(Error::InvalidInput(format!(
                "domain {} of f does not contain 0",
                f.domain()
            )));
        }
        f.eval(0.0).map_err(|e| Error::NoProgress(format!("f(0) not evaluable: {e}")))?;
        Ok(IsoProblem { f, lambda, half_width, tol: DEFAULT_TOL })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        self.tol = tol;
        self
    }
}

/// Antiderivative `F(s) = int_0^s f`, by adaptive quadrature.
pub fn big_f(f: &ScalarFn, s: f64, tol: f64) -> Result<f64, Error> {
    let mut g = |t: f64| f.eval(t);
    Ok(quad::integrate_adaptive(&mut g, 0.0, s, tol)?)
}

/// The averaged characteristic `K(u) = int_0^1 f(u t) dt`, so that
/// `F(u) = u K(u)` with `K` regular at 0 (`K(0) = f(0)`).
pub fn hadamard_k(f: &ScalarFn, u: f64, tol: f64) -> Result<f64, Error> {
    let n = quad::order_for_tol(tol);
    let mut g = |t: f64| f.eval(u * t);
    Ok(quad::integrate_fixed(&mut g, 0.0, 1.0, n)?)
}

/// Derivative `K'(u) = int_0^1 f'(u t) t dt`, used for the analytic partial
/// derivatives of `Phi`.
pub fn hadamard_k_deriv(f: &ScalarFn, u: f64, tol: f64) -> Result<f64, Error> {
    let n = quad::order_for_tol(tol);
    let mut g = |t: f64| Ok(f.deriv(u * t)? * t);
    Ok(quad::integrate_fixed(&mut g, 0.0, 1.0, n)?)
}

/// Right-hand side `Phi(x, H)` of the Cauchy problem.  Errors with
/// [`Error::Singular`] when the denominator `1 + x H K(x^2 H)` is not
/// positive.
pub fn phi(f: &ScalarFn, x: f64, h: f64, tol: f64) -> Result<f64, Error> {
    let k = hadamard_k(f, x * x * h, tol)?;
    let den = 1.0 + x * h * k;
    if den <= 0.0 {
        return Err(Error::Singular { x, den });
    }
    Ok(-2.0 * h * h * k / den)
}

/// `Phi` together with its partial derivatives `(Phi, Phi_x, Phi_H)`.
/// Along a solution these give the exact second derivative
/// `H'' = Phi_x + Phi_H * Phi` with no differencing.
pub fn phi_with_grad(f: &ScalarFn, x: f64, h: f64, tol: f64) -> Result<(f64, f64, f64), Error> {
    let u = x * x * h;
    let k = hadamard_k(f, u, tol)?;
    let kp = hadamard_k_deriv(f, u, tol)?;
    let den = 1.0 + x * h * k;
    if den <= 0.0 {
        return Err(Error::Singular { x, den });
    }
    let num = -2.0 * h * h * k;
    // u_x = 2 x H, u_H = x^2; chain everything through K and K'.
    let num_x = -4.0 * x * h * h * h * kp;
    let num_h = -4.0 * h * k - 2.0 * x * x * h * h * kp;
    let den_x = h * k + 2.0 * x * x * h * h * kp;
    let den_h = x * k + x * x * x * h * kp;
    let phi = num / den;
    let phi_x = (num_x * den - num * den_x) / (den * den);
    let phi_h = (num_h * den - num * den_h) / (den * den);
    Ok((phi, phi_x, phi_h))
}

/// A constructed potential: dense Taylor-interpolable output for `H` on both
/// sides of the origin, plus everything needed to evaluate `Phi` again.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    lambda: f64,
    tol: f64,
    f: ScalarFn,
    pos: DenseOutput<1>,
    neg: DenseOutput<1>,
}

/// Build the potential for the given problem.
///
/// Integrates from `x = 0` outwards to `+half_width` and `-half_width`.
/// Each side stops early — truncated precisely by bisection — where the
/// `Phi` denominator falls to [`DEN_FLOOR`] or where `x^2 H` leaves the
/// domain of `f`, so the achieved range can be asymmetric.
pub fn solve_chouikha(problem: &IsoProblem) -> Result<PotentialSolution, Error> {
    let f = &problem.f;
    let tol = problem.tol;
    let h0 = problem.lambda * problem.lambda / 2.0;

    // Seed check: the denominator at the origin is identically 1, so a
    // failure here means the input itself is broken.
    phi(f, 0.0, h0, tol).map_err(|e| Error::NoProgress(format!("Phi(0, H0) failed: {e}")))?;

    let solver = Dopri5::new(tol);
    let pos = integrate_side(&solver, f, tol, h0, problem.half_width)?;
    let neg = integrate_side(&solver, f, tol, h0, -problem.half_width)?;

    Ok(PotentialSolution { lambda: problem.lambda, tol, f: f.clone(), pos, neg })
}

// The step-underflow arm matches with a guard, not a `t: 0.0` pattern,
// because float literal patterns are deprecated.
#[allow(clippy::redundant_guards)]
fn integrate_side(
    solver: &Dopri5,
    f: &ScalarFn,
    tol: f64,
    h0: f64,
    x_end: f64,
) -> Result<DenseOutput<1>, Error> {
    let mut rhs = |x: f64, y: &[f64; 1]| -> Result<[f64; 1], RhsFailure> {
        let h = y[0];
        if !(h > 0.0) {
            return Err(RhsFailure);
        }
        let u = x * x * h;
        let k = match hadamard_k(f, u, tol) {
            Ok(k) => k,
            Err(_) => return Err(RhsFailure),
        };
        let den = 1.0 + x * h * k;
        // Hard floor well below the monitor threshold: trial stages past it
        // are meaningless and poison the step.
        if den <= 1e-3 * DEN_FLOOR {
            return Err(RhsFailure);
        }
        Ok([-2.0 * h * h * k / den])
    };

    let guard_ok = |x: f64, h: f64| -> bool {
        if !(h > 0.0) {
            return false;
        }
        match hadamard_k(f, x * x * h, tol) {
            Ok(k) => 1.0 + x * h * k > DEN_FLOOR,
            Err(_) => false,
        }
    };

    let mut monitor = |step: &Step<1>| -> StepControl {
        // Scan the accepted step for the first point where the denominator
        // dips to the floor or f's domain runs out, then bisect to it.
        let mut good = step.t0;
        let mut bad = None;
        for i in 1..=8 {
            let x = step.t0 + (step.t1 - step.t0) * i as f64 / 8.0;
            if guard_ok(x, step.eval(x)[0]) {
                good = x;
            } else {
                bad = Some(x);
                break;
            }
        }
        match bad {
            None => StepControl::Continue,
            Some(mut bad) => {
                for _ in 0..60 {
                    let mid = 0.5 * (good + bad);
                    if guard_ok(mid, step.eval(mid)[0]) {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                StepControl::Truncate(good)
            }
        }
    };

    match solver.integrate(&mut rhs, 0.0, x_end, [h0], &mut monitor) {
        Ok(dense) => Ok(dense),
        Err(crate::ode::OdeError::StepSizeUnderflow { t }) if t == 0.0 => {
            Err(Error::NoProgress("no integration step possible from x = 0".into()))
        }
        Err(e) => Err(e.into()),
    }
}

impl PotentialSolution {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The characteristic the solution was built from.
    pub fn f(&self) -> &ScalarFn {
        &self.f
    }

    /// Leftmost solved abscissa (negative).
    pub fn x_min(&self) -> f64 {
        self.neg.t_end()
    }

    /// Rightmost solved abscissa (positive).
    pub fn x_max(&self) -> f64 {
        self.pos.t_end()
    }

    /// Largest `r` with `[-r, r]` inside the solved range.
    pub fn achieved_half_width(&self) -> f64 {
        (-self.x_min()).min(self.x_max())
    }

    /// Whether either side stopped short of the request.
    pub fn stopped_early(&self) -> bool {
        !matches!(self.pos.status(), Status::ReachedEnd)
            || !matches!(self.neg.status(), Status::ReachedEnd)
    }

    fn side(&self, x: f64) -> &DenseOutput<1> {
        if x >= 0.0 {
            &self.pos
        } else {
            &self.neg
        }
    }

    /// The Hadamard factor `H(x) = G(x) / x^2` (dense-output interpolation).
    pub fn h_at(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.side(x).eval(x)?[0])
    }

    /// `H'(x)`, re-evaluated through `Phi` rather than interpolated.
    pub fn h_deriv_at(&self, x: f64) -> Result<f64, EvalError> {
        let h = self.h_at(x)?;
        phi(&self.f, x, h, self.tol).map_err(|_| singular_eval(x))
    }

    /// `H''(x)` along the solution, from the analytic partials of `Phi`.
    pub fn h_second_at(&self, x: f64) -> Result<f64, EvalError> {
        let h = self.h_at(x)?;
        let (p, px, ph) = phi_with_grad(&self.f, x, h, self.tol).map_err(|_| singular_eval(x))?;
        Ok(px + ph * p)
    }

    /// The natural (adaptive) output grid: every accepted-step endpoint on
    /// both sides, strictly increasing, containing 0.
    pub fn grid(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.neg.steps().iter().map(|s| s.t1).collect();
        xs.reverse();
        xs.push(0.0);
        xs.extend(self.pos.steps().iter().map(|s| s.t1));
        xs
    }

    /// Largest absolute residual of the integrated characteristic equation
    /// over the output grid.
    pub fn max_residual(&self) -> Result<f64, Error> {
        let mut worst = 0.0f64;
        for x in self.grid() {
            worst = worst.max(chouikha_residual(self, &self.f, x)?.abs());
        }
        Ok(worst)
    }
}

fn singular_eval(x: f64) -> EvalError {
    EvalError::Domain { op: "singular Phi denominator", arg: x }
}

impl Potential for PotentialSolution {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn span(&self) -> Interval {
        Interval::new(self.x_min(), self.x_max())
    }

    fn potential(&self, x: f64) -> Result<f64, EvalError> {
        Ok(x * x * self.h_at(x)?)
    }

    fn force(&self, x: f64) -> Result<f64, EvalError> {
        let h = self.h_at(x)?;
        let p = phi(&self.f, x, h, self.tol).map_err(|_| singular_eval(x))?;
        Ok(2.0 * x * h + x * x * p)
    }

    fn force_deriv(&self, x: f64) -> Result<f64, EvalError> {
        let h = self.h_at(x)?;
        let (p, px, ph) = phi_with_grad(&self.f, x, h, self.tol).map_err(|_| singular_eval(x))?;
        let w = px + ph * p;
        Ok(2.0 * h + 4.0 * x * p + x * x * w)
    }

    fn big_x(&self, x: f64) -> Result<f64, EvalError> {
        let h = self.h_at(x)?;
        if h < 0.0 {
            return Err(EvalError::Domain { op: "sqrt of negative H", arg: h });
        }
        Ok(x * (2.0 * h).sqrt())
    }

    fn x_over_g(&self, x: f64) -> Result<f64, EvalError> {
        // X/g = sqrt(2H) / (2H + x Phi): exact cancellation-free form, valid
        // down to and including x = 0 where it reduces to 1/lambda.
        let h = self.h_at(x)?;
        let p = phi(&self.f, x, h, self.tol).map_err(|_| singular_eval(x))?;
        if h <= 0.0 {
            return Err(EvalError::Domain { op: "X/g with non-positive H", arg: h });
        }
        Ok((2.0 * h).sqrt() / (2.0 * h + x * p))
    }
}

/// Residual of the integrated characteristic equation,
/// `r(x) = 2 G(x) - (x + F(G(x))) g(x)`, for any potential and candidate
/// characteristic.  Identically zero exactly when the pair matches.
pub fn chouikha_residual(p: &impl Potential, f: &ScalarFn, x: f64) -> Result<f64, Error> {
    const QUAD_TOL: f64 = 1e-13;
    let big_g = p.potential(x)?;
    let g = p.force(x)?;
    let big_f_at_g = big_f(f, big_g, QUAD_TOL)?;
    Ok(2.0 * big_g - (x + big_f_at_g) * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn problem(f: &str, lambda: f64, half_width: f64) -> IsoProblem {
        IsoProblem::new(ScalarFn::from_expr_str(f).unwrap(), lambda, half_width).unwrap()
    }

    #[test]
    fn big_f_of_cosine_is_sine() {
        // Independent series oracle: sin(0.3) = sum (-1)^k 0.3^(2k+1)/(2k+1)!
        let mut truth = 0.0;
        let mut term = 0.3;
        for k in 0..12 {
            truth += term;
            term *= -0.09 / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
        }
        let f = ScalarFn::from_expr_str("cos(x)").unwrap();
        let got = big_f(&f, 0.3, 1e-13).unwrap();
        assert_relative_eq!(got, truth, epsilon = 1e-13);
    }

    #[test]
    fn hadamard_k_at_origin_is_f_of_zero() {
        let f = ScalarFn::from_expr_str("cos(x)").unwrap();
        assert_relative_eq!(hadamard_k(&f, 0.0, 1e-10).unwrap(), 1.0, epsilon = 1e-14);
        // K(u) = sin(u)/u for f = cos
        let u = 0.7;
        assert_relative_eq!(
            hadamard_k(&f, u, 1e-12).unwrap(),
            u.sin() / u,
            epsilon = 1e-13
        );
    }

    #[test]
    fn phi_at_origin_for_constant_characteristic() {
        // f = 0.5, H = 0.5: Phi = -2 * 0.25 * 0.5 / 1 = -0.25.
        let f = ScalarFn::constant(0.5);
        assert_relative_eq!(phi(&f, 0.0, 0.5, 1e-10).unwrap(), -0.25, epsilon = 1e-14);
    }

    #[test]
    fn phi_gradient_matches_closed_form_for_constant_f() {
        // For f = a: Phi_x = 2 a^2 H^3 / D^2 and
        // Phi_H = (-4 a H - 2 a^2 x H^2) / D^2 with D = 1 + a x H.
        let a = 0.5;
        let f = ScalarFn::constant(a);
        for &(x, h) in &[(0.0, 0.5), (0.3, 0.42), (-0.2, 0.61)] {
            let (p, px, ph) = phi_with_grad(&f, x, h, 1e-12).unwrap();
            let d = 1.0 + a * x * h;
            assert_relative_eq!(p, -2.0 * a * h * h / d, max_relative = 1e-12);
            assert_relative_eq!(px, 2.0 * a * a * h * h * h / (d * d), max_relative = 1e-12);
            assert_relative_eq!(
                ph,
                (-4.0 * a * h - 2.0 * a * a * x * h * h) / (d * d),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn zero_characteristic_gives_the_harmonic_potential() {
        // f = 0: H stays at lambda^2/2, G = lambda^2 x^2 / 2, g = lambda^2 x.
        let sol = solve_chouikha(&problem("0", 2.0, 1.0)).unwrap();
        assert_eq!(sol.achieved_half_width(), 1.0);
        for &x in &[-1.0, -0.4, 0.0, 0.7, 1.0] {
            assert_relative_eq!(sol.h_at(x).unwrap(), 2.0, max_relative = 1e-12);
            assert_relative_eq!(sol.potential(x).unwrap(), 2.0 * x * x, max_relative = 1e-12);
            assert_relative_eq!(sol.force(x).unwrap(), 4.0 * x, max_relative = 1e-11);
            assert_relative_eq!(sol.force_deriv(x).unwrap(), 4.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn constant_characteristic_reproduces_the_closed_form() {
        // f = a = 0.5, lambda = 1: G = ((sqrt(1+x) - 1) / 0.5)^2 / 2... i.e.
        // X = 2 (sqrt(1+x) - 1), G = X^2 / 2.
        let sol = solve_chouikha(&problem("0.5", 1.0, 0.8)).unwrap();
        assert_eq!(sol.achieved_half_width(), 0.8);
        let mut worst: f64 = 0.0;
        for i in -40..=40 {
            let x = 0.02 * i as f64;
            let xcap = 2.0 * ((1.0 + x).sqrt() - 1.0);
            let truth = 0.5 * xcap * xcap;
            let got = sol.potential(x).unwrap();
            if truth != 0.0 {
                worst = worst.max(((got - truth) / truth).abs());
            }
        }
        // Global + dense-interpolation error sits about an order above the
        // per-step tolerance of 1e-10.
        assert!(worst < 5e-9, "worst relative error {worst}");
        // And the force: g = X / (1 + 0.5 X) evaluated through the same X.
        let x = 0.37f64;
        let xcap = 2.0 * ((1.0 + x).sqrt() - 1.0);
        assert_relative_eq!(
            sol.force(x).unwrap(),
            xcap / (1.0 + 0.5 * xcap),
            max_relative = 1e-9
        );
    }

    #[test]
    fn solution_taylor_seed_values() {
        // H(0) = 1/2, H'(0) = -1/4, H''(0) = 5/16 for f = 0.5, lambda = 1.
        let sol = solve_chouikha(&problem("0.5", 1.0, 0.5)).unwrap();
        assert_relative_eq!(sol.h_at(0.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(sol.h_deriv_at(0.0).unwrap(), -0.25, epsilon = 1e-13);
        assert_relative_eq!(sol.h_second_at(0.0).unwrap(), 0.3125, epsilon = 1e-12);
    }

    #[test]
    fn left_side_stops_at_the_denominator_floor() {
        // f = 1, lambda = 1 is singular on the left: 1 + X = 0 at x = -1/2.
        // Requesting the full unit interval must truncate the left side near
        // where the denominator reaches the floor, and keep the right side.
        let sol = solve_chouikha(&problem("1", 1.0, 1.0)).unwrap();
        assert!(sol.stopped_early());
        assert_eq!(sol.x_max(), 1.0);
        assert!(sol.x_min() > -0.5 && sol.x_min() < -0.4, "x_min = {}", sol.x_min());
        // At the truncation point the denominator sits at the floor.
        let x = sol.x_min();
        let h = sol.h_at(x).unwrap();
        let k = hadamard_k(sol.f(), x * x * h, 1e-10).unwrap();
        assert_relative_eq!(1.0 + x * h * k, DEN_FLOOR, epsilon = 1e-9);
    }

    #[test]
    fn residual_closes_on_a_solution_and_flags_a_mismatch() {
        let sol = solve_chouikha(&problem("0.5", 1.0, 0.6)).unwrap();
        assert!(sol.max_residual().unwrap() < 100.0 * sol.tol());
        // Same potential against the wrong characteristic: visibly nonzero.
        let wrong = ScalarFn::constant(0.0);
        let r = chouikha_residual(&sol, &wrong, 0.5).unwrap();
        assert!(r.abs() > 1e-3, "residual {r}");
    }

    #[test]
    fn duffing_against_zero_characteristic_has_the_known_residual() {
        // g = x + x^3 with f = 0: r = 2G - x g = -x^4/2, so r(0.5) = -0.03125.
        let g = ScalarFn::from_expr_str("x + x^3").unwrap();
        let p = crate::potential::ExprPotential::new(g, None, 1.0).unwrap();
        let zero = ScalarFn::constant(0.0);
        let r = chouikha_residual(&p, &zero, 0.5).unwrap();
        assert_relative_eq!(r, -0.03125, epsilon = 1e-10);
    }

    #[test]
    fn x_over_g_is_exact_at_origin_and_smooth_nearby() {
        let sol = solve_chouikha(&problem("0.5", 1.0, 0.5)).unwrap();
        assert_relative_eq!(sol.x_over_g(0.0).unwrap(), 1.0, epsilon = 1e-14);
        // X/g = (1 + 0.5 X) at finite x for this family.
        let x = 0.2;
        let xcap = 2.0 * ((1.0f64 + x).sqrt() - 1.0);
        assert_relative_eq!(sol.x_over_g(x).unwrap(), 1.0 + 0.5 * xcap, max_relative = 1e-9);
        // And near zero it converges to 1/lambda rather than blowing up.
        assert_relative_eq!(sol.x_over_g(1e-8).unwrap(), 1.0, max_relative = 1e-7);
    }

    #[test]
    fn rejects_an_f_whose_domain_misses_zero() {
        let f = ScalarFn::from_expr_str("x").unwrap().with_domain(Interval::new(1.0, 2.0));
        assert!(IsoProblem::new(f, 1.0, 0.5).is_err());
    }

    #[test]
    fn stops_when_f_domain_is_exhausted() {
        // f defined only on [0, 0.05]: u = G(x) grows past it near
        // x = sqrt(2*0.05)/lambda ~ 0.32, so the solve must truncate there.
        let f = ScalarFn::constant(0.5).with_domain(Interval::new(-0.01, 0.05));
        let sol = solve_chouikha(&IsoProblem::new(f, 1.0, 0.8).unwrap()).unwrap();
        assert!(sol.stopped_early());
        assert!(sol.x_max() < 0.35, "x_max = {}", sol.x_max());
        // The quadrature inside K probes f slightly inside u, so the edge
        // sits within a small slack of the domain bound.
        let u_edge = sol.potential(sol.x_max()).unwrap();
        assert!((0.0497..0.0503).contains(&u_edge), "u at edge = {u_edge}");
    }
}
