//! The Urabe-criterion view of an isochronous center.
//!
//! In the canonical coordinate `X(x) = sign(x) sqrt(2 G(x))` the criterion
//! reads `g(x) (1 + h(X(x))) = lambda X(x)` for an odd continuous `h` with
//! `sup |h| < 1`.  This module maps between the three descriptions:
//!
//! * `h_from_f` / `f_from_h` — the exact integral/differential pair
//!   `h(s) = lambda int_0^s f(q^2/2) dq`, `f(s) = h'(sqrt(2s)) / lambda`;
//! * `h_from_g` — measures `h` from a potential by solving `X(x) = X` and
//!   taking the odd part of `lambda X / g - 1` (for a true isochronous
//!   center the raw samples are already odd; for anything else the even
//!   remainder shows up in `urabe_residual` instead of being hidden in `h`);
//! * `urabe_residual` and the small-`x` limit check `X/g -> 1/lambda`.

use crate::potential::Potential;
use crate::rootfind::newton_bisect;
use crate::scalar_fn::{SampledCurve, ScalarFn};
use crate::{quad, Error, EvalError};

/// Samples per side for measured curves (`h_from_g`, `urabe_data`).
pub const SAMPLES_PER_SIDE: usize = 512;

/// `X(x) = sign(x) sqrt(2 G(x))`.
pub fn x_capital(p: &impl Potential, x: f64) -> Result<f64, Error> {
    Ok(p.big_x(x)?)
}

/// Inverse of [`x_capital`] on the solved range, by bracketed Newton on
/// `G(x) - X^2/2` (the bracket pins the correct side automatically).
pub fn x_of_big_x(p: &impl Potential, big_x: f64) -> Result<f64, Error> {
    if big_x == 0.0 {
        return Ok(0.0);
    }
    let span = p.span();
    let edge = if big_x > 0.0 { span.hi } else { span.lo };
    let x_edge = p.big_x(edge)?;
    if big_x.abs() > x_edge.abs() {
        return Err(Error::BigXOutOfRange { big_x, max: x_edge.abs() });
    }
    let target = big_x * big_x / 2.0;
    let mut fdf = |x: f64| Ok((p.potential(x)? - target, p.force(x)?));
    // Relative f-tolerance; the step criterion inside the root finder
    // guarantees termination even when this sits below evaluation noise.
    let ftol = 1e-15 * target;
    Ok(newton_bisect(&mut fdf, 0.0, edge, 1e-13, ftol)?)
}

/// `h(s) = lambda int_0^s f(q^2/2) dq` on `[-s_max, s_max]`, sampled with
/// exact node derivatives `h'(s) = lambda f(s^2/2)` and odd by construction.
pub fn h_from_f(f: &ScalarFn, lambda: f64, s_max: f64) -> Result<ScalarFn, Error> {
    if !(s_max > 0.0) {
        return Err(Error::InvalidInput(format!("s_max must be positive, got {s_max}")));
    }
    let needed = s_max * s_max / 2.0;
    if f.domain().hi < needed || f.domain().lo > 0.0 {
        return Err(Error::InvalidInput(format!(
            "domain {} of f too small for h on [-{s_max}, {s_max}] (needs [0, {needed}])",
            f.domain()
        )));
    }
    let n = SAMPLES_PER_SIDE;
    let step = s_max / n as f64;
    let mid = n; // index of s = 0 in the full grid of 2n+1 nodes
    let mut values = vec![0.0; 2 * n + 1];
    let mut derivs = vec![0.0; 2 * n + 1];
    let mut integrand = |q: f64| Ok(lambda * f.eval(q * q / 2.0)?);
    derivs[mid] = lambda * f.eval(0.0)?;
    for j in 1..=n {
        let s0 = (j - 1) as f64 * step;
        let s1 = j as f64 * step;
        let inc = quad::integrate_fixed(&mut integrand, s0, s1, 16)?;
        values[mid + j] = values[mid + j - 1] + inc;
        derivs[mid + j] = lambda * f.eval(s1 * s1 / 2.0)?;
        values[mid - j] = -values[mid + j];
        derivs[mid - j] = derivs[mid + j];
    }
    let probe = SampledCurve::from_data(-s_max, s_max, values.clone(), derivs.clone(), 0.0);
    // Midpoint error audit against freshly integrated truth.
    let mut worst = 0.0f64;
    for j in 1..=n {
        let s0 = (j - 1) as f64 * step;
        let sm = s0 + 0.5 * step;
        let truth = values[mid + j - 1] + quad::integrate_fixed(&mut integrand, s0, sm, 16)?;
        worst = worst.max((probe.value(sm) - truth).abs());
    }
    let curve = SampledCurve::from_data(-s_max, s_max, values, derivs, 2.0 * worst);
    Ok(ScalarFn::from_samples(curve))
}

/// `f(s) = h'(sqrt(2 s)) / lambda` on `[0, s_sym^2 / 2]`, where `s_sym` is
/// the symmetric part of the domain of `h`.  The input must be odd with
/// `h(0) = 0`; this is spot-checked, not assumed.
pub fn f_from_h(h: &ScalarFn, lambda: f64) -> Result<ScalarFn, Error> {
    let dom = h.domain();
    let s_sym = (-dom.lo).min(dom.hi);
    if !(s_sym > 0.0) || !s_sym.is_finite() {
        // Unbounded expression domains: fall back to a unit range.
        if dom.hi.is_infinite() && dom.lo.is_infinite() {
            return f_from_h_on(h, lambda, 1.0);
        }
        return Err(Error::InvalidInput(format!(
            "domain {dom} of h has no symmetric part around 0"
        )));
    }
    f_from_h_on(h, lambda, s_sym)
}

/// Same as [`f_from_h`] with an explicit `X`-range for the input.
pub fn f_from_h_on(h: &ScalarFn, lambda: f64, s_sym: f64) -> Result<ScalarFn, Error> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let h0 = h.eval(0.0)?;
    if h0.abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("h(0) = {h0}, expected 0")));
    }
    // Spot-check oddness where we can evaluate both signs.
    for i in 1..=7 {
        let s = s_sym * i as f64 / 7.0;
        let odd_defect = h.eval(s)? + h.eval(-s)?;
        if odd_defect.abs() > 1e-8 * (1.0 + h.eval(s)?.abs()) {
            return Err(Error::InvalidInput(format!(
                "h is not odd: h({s}) + h(-{s}) = {odd_defect}"
            )));
        }
    }
    let cap = s_sym * s_sym / 2.0;
    let n = SAMPLES_PER_SIDE;
    if h.smoothness() >= 2 {
        // Exact node data through jets of h.
        let mut node = |u: f64| -> Result<(f64, f64), EvalError> {
            let w = (2.0 * u).sqrt();
            if w < 1e-9 * s_sym {
                // f(u) -> h'(0)/lambda and f'(u) -> h'''(0)/lambda as u -> 0.
                let jet = h.eval_jet(0.0, 3)?;
                Ok((jet.derivative(1) / lambda, jet.derivative(3) / lambda))
            } else {
                let jet = h.eval_jet(w, 2)?;
                Ok((jet.derivative(1) / lambda, jet.derivative(2) / (lambda * w)))
            }
        };
        let curve = SampledCurve::from_fn(0.0, cap, n, &mut node)?;
        return Ok(ScalarFn::from_samples(curve));
    }
    // Sampled h: values from the derivative interpolation, node slopes by
    // high-order differences of the values themselves.
    let step = cap / n as f64;
    let value_at = |u: f64| -> Result<f64, EvalError> { Ok(h.deriv((2.0 * u).sqrt())? / lambda) };
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        values.push(value_at(j as f64 * step)?);
    }
    let derivs = fd_derivs(&values, step);
    let probe = SampledCurve::from_data(0.0, cap, values.clone(), derivs.clone(), 0.0);
    let mut worst = 0.0f64;
    for j in 0..n {
        let um = (j as f64 + 0.5) * step;
        worst = worst.max((probe.value(um) - value_at(um)?).abs());
    }
    let err = 2.0 * worst + h.err_bound();
    let curve = SampledCurve::from_data(0.0, cap, values, derivs, err);
    Ok(ScalarFn::from_samples(curve))
}

/// Five-point finite-difference slopes of uniformly spaced values
/// (O(step^4), one-sided at the ends).
fn fd_derivs(v: &[f64], step: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5, "need at least 5 samples for the difference stencils");
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = if i >= 2 && i + 2 < n {
            (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * step)
        } else if i < 2 {
            // forward stencil at offset i
            let o = i;
            let c = fd_onesided(o);
            (0..5).map(|j| c[j] * v[j]).sum::<f64>() / step
        } else {
            // backward stencil mirrored
            let o = n - 1 - i;
            let c = fd_onesided(o);
            -(0..5).map(|j| c[j] * v[n - 1 - j]).sum::<f64>() / step
        };
    }
    out
}

/// Coefficients of the 5-point one-sided first-derivative stencil evaluated
/// at node `offset` (0 or 1) of the stencil.
fn fd_onesided(offset: usize) -> [f64; 5] {
    match offset {
        0 => [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25],
        1 => [-0.25, -5.0 / 6.0, 1.5, -0.5, 1.0 / 12.0],
        _ => unreachable!("one-sided stencils are only used at the two edge nodes"),
    }
}

/// Measure `h` from a potential: on a uniform `X` grid covering the largest
/// symmetric range the potential supports, solve `X(x) = X` and return the
/// odd part of `lambda X / g(x(X)) - 1` as a sampled function.
///
/// For an isochronous center the raw samples are already odd, so the odd
/// part changes nothing; for a non-isochronous `g` (e.g. any odd force,
/// whose raw samples are even) the discrepancy deliberately stays out of
/// `h` and surfaces through [`urabe_residual`].
pub fn h_from_g(p: &impl Potential) -> Result<ScalarFn, Error> {
    let span = p.span();
    let x_sym = (-p.big_x(span.lo)?).min(p.big_x(span.hi)?);
    if !(x_sym > 0.0) {
        return Err(Error::InvalidInput(format!(
            "potential range {span} gives no symmetric X interval"
        )));
    }
    let n = SAMPLES_PER_SIDE;
    let dx = x_sym / n as f64;
    let mut values = vec![0.0; 2 * n + 1];
    let mut derivs = vec![0.0; 2 * n + 1];
    let lambda = p.lambda();

    // raw h and raw h' at one signed X.
    let raw = |big_x: f64| -> Result<(f64, f64), Error> {
        let x = x_of_big_x(p, big_x)?;
        let g = p.force(x)?;
        if x * g <= 0.0 {
            return Err(Error::NotACenter { x });
        }
        let gp = p.force_deriv(x)?;
        let value = lambda * big_x / g - 1.0;
        let slope = lambda * (g * g - big_x * big_x * gp) / (g * g * g);
        Ok((value, slope))
    };

    for j in 1..=n {
        let big_x = j as f64 * dx;
        let (vp, dp) = raw(big_x)?;
        let (vm, dm) = raw(-big_x)?;
        values[n + j] = 0.5 * (vp - vm);
        values[n - j] = -values[n + j];
        derivs[n + j] = 0.5 * (dp + dm);
        derivs[n - j] = derivs[n + j];
    }
    // h'(0) by even extrapolation from the first two interior nodes.
    derivs[n] = (4.0 * derivs[n + 1] - derivs[n + 2]) / 3.0;

    let curve = SampledCurve::from_data(-x_sym, x_sym, values.clone(), derivs.clone(), 0.0);
    let mut worst = 0.0f64;
    for j in 1..=n {
        let xm = (j as f64 - 0.5) * dx;
        let (vp, _) = raw(xm)?;
        let (vm, _) = raw(-xm)?;
        let truth = 0.5 * (vp - vm);
        worst = worst.max((curve.value(xm) - truth).abs());
    }
    let curve = SampledCurve::from_data(-x_sym, x_sym, values, derivs, 2.0 * worst);
    Ok(ScalarFn::from_samples(curve))
}

/// Residual of the Urabe criterion at one point:
/// `r(x) = g(x) (1 + h(X(x))) - lambda X(x)`.
pub fn urabe_residual(p: &impl Potential, h: &ScalarFn, x: f64) -> Result<f64, Error> {
    let big_x = p.big_x(x)?;
    let g = p.force(x)?;
    Ok(g * (1.0 + h.eval(big_x)?) - p.lambda() * big_x)
}

/// Deviations `|X/g - 1/lambda|` at `x = +-10^-k delta` for `k = 1..6`,
/// where `delta` is the symmetric half-width of the solved range.  For any
/// center (isochronous or not) these must shrink to 0.
#[derive(Debug, Clone)]
pub struct LimitCheck {
    /// Per-scale worst deviation over the two signs, `k = 1..6`.
    pub deviations: [f64; 6],
    pub max_deviation: f64,
}

pub fn check_limit_2_2(p: &impl Potential) -> Result<LimitCheck, Error> {
    let span = p.span();
    let delta = (-span.lo).min(span.hi);
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("span {span} has no symmetric part")));
    }
    let inv_lambda = 1.0 / p.lambda();
    let mut deviations = [0.0; 6];
    for (k, slot) in deviations.iter_mut().enumerate() {
        let x = delta * 10f64.powi(-(k as i32 + 1));
        let dev_p = (p.x_over_g(x)? - inv_lambda).abs();
        let dev_m = (p.x_over_g(-x)? - inv_lambda).abs();
        *slot = dev_p.max(dev_m);
    }
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(LimitCheck { deviations, max_deviation })
}

/// The full Urabe description of a potential: `h` plus both directions of
/// the coordinate change, each as a sampled curve.
#[derive(Debug, Clone)]
pub struct UrabeData {
    pub lambda: f64,
    /// `h(X)` on the symmetric `X` range.
    pub h: ScalarFn,
    /// `X(x)` on the symmetric `x` range.
    pub x_map: ScalarFn,
    /// `x(X)`, inverse of `x_map`.
    pub x_inverse: ScalarFn,
}

pub fn urabe_data(p: &impl Potential) -> Result<UrabeData, Error> {
    let h = h_from_g(p)?;
    let span = p.span();
    let lambda = p.lambda();
    let x_sym = (-span.lo).min(span.hi);
    let n = SAMPLES_PER_SIDE;

    // X(x): derivative X' = g/X away from 0, lambda at 0.
    let mut x_map_node = |x: f64| -> Result<(f64, f64), EvalError> {
        let big_x = p.big_x(x)?;
        if x == 0.0 {
            return Ok((0.0, lambda));
        }
        Ok((big_x, p.force(x)? / big_x))
    };
    let x_map = SampledCurve::from_fn(-x_sym, x_sym, 2 * n, &mut x_map_node)?;

    // x(X): derivative dx/dX = X/g, with the limit 1/lambda at 0.
    let big_x_sym = (-p.big_x(span.lo)?).min(p.big_x(span.hi)?);
    let mut inv_node = |big_x: f64| -> Result<(f64, f64), EvalError> {
        let x = x_of_big_x(p, big_x).map_err(|e| match e {
            Error::Eval(err) => err,
            _ => EvalError::Domain { op: "x(X) inversion", arg: big_x },
        })?;
        Ok((x, p.x_over_g(x)?))
    };
    let x_inverse = SampledCurve::from_fn(-big_x_sym, big_x_sym, 2 * n, &mut inv_node)?;

    Ok(UrabeData {
        lambda,
        h,
        x_map: ScalarFn::from_samples(x_map),
        x_inverse: ScalarFn::from_samples(x_inverse),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{solve_chouikha, IsoProblem};
    use crate::potential::ExprPotential;
    use crate::scalar_fn::Interval;
    use approx::assert_relative_eq;

    fn urabe_potential(a: f64, half_width: f64) -> ExprPotential {
        let ast = crate::expr::parse_expr("(sqrt(1+2*a*x)-1)/(a*sqrt(1+2*a*x))").unwrap();
        let params = [("a".to_string(), a)].into_iter().collect();
        let g = ScalarFn::from_expr(ast, params).unwrap();
        ExprPotential::new(g, Some(1.0), half_width).unwrap()
    }

    fn duffing_potential() -> ExprPotential {
        let g = ScalarFn::from_expr_str("x + x^3").unwrap();
        ExprPotential::new(g, None, 0.8).unwrap()
    }

    #[test]
    fn x_capital_of_the_urabe_family() {
        let p = urabe_potential(0.5, 0.9);
        // X(0.3) = (sqrt(1.3) - 1)/0.5
        let truth = (1.3f64.sqrt() - 1.0) / 0.5;
        assert_relative_eq!(x_capital(&p, 0.3).unwrap(), truth, max_relative = 1e-10);
        assert_eq!(x_capital(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn x_of_big_x_inverts_on_both_sides() {
        let p = urabe_potential(0.5, 0.9);
        for &x in &[-0.7, -0.2, 1e-4, 0.45, 0.88] {
            let big_x = x_capital(&p, x).unwrap();
            let back = x_of_big_x(&p, big_x).unwrap();
            assert_relative_eq!(back, x, max_relative = 1e-10, epsilon = 1e-12);
        }
        // Closed-form inverse: x = X + a X^2 / 2.
        let big_x = 0.28035085019827577;
        let x = x_of_big_x(&p, big_x).unwrap();
        assert_relative_eq!(x, big_x + 0.25 * big_x * big_x, max_relative = 1e-10);
        assert_relative_eq!(x, 0.3, max_relative = 1e-9);
    }

    #[test]
    fn x_of_big_x_rejects_unreachable_targets() {
        let p = urabe_potential(0.5, 0.9);
        let reach = x_capital(&p, 0.9).unwrap();
        assert!(matches!(
            x_of_big_x(&p, reach * 1.5),
            Err(Error::BigXOutOfRange { .. })
        ));
    }

    #[test]
    fn h_from_f_for_the_linear_characteristic() {
        // f(s) = s, lambda = 1: h(s) = s^3/6.
        let f = ScalarFn::from_expr_str("x").unwrap();
        let h = h_from_f(&f, 1.0, 1.0).unwrap();
        for &s in &[-1.0, -0.37, 0.0, 0.2, 0.85] {
            assert_relative_eq!(h.eval(s).unwrap(), s * s * s / 6.0, epsilon = 1e-11);
        }
        assert!(h.err_bound() < 1e-10);
    }

    #[test]
    fn h_from_f_requires_enough_f_domain() {
        let f = ScalarFn::constant(1.0).with_domain(Interval::new(0.0, 0.3));
        // s_max = 1 needs f on [0, 0.5]
        assert!(h_from_f(&f, 1.0, 1.0).is_err());
        assert!(h_from_f(&f, 1.0, 0.7).is_ok());
    }

    #[test]
    fn f_from_h_for_the_cubic_h() {
        // h = s^3/6 as an expression: f(s) = h'(sqrt(2s)) = (2s)/2 = s.
        let h = ScalarFn::from_expr_str("x^3/6")
            .unwrap()
            .with_domain(Interval::symmetric(1.0));
        let f = f_from_h(&h, 1.0).unwrap();
        assert_relative_eq!(f.domain().hi, 0.5, epsilon = 1e-15);
        for &s in &[0.0, 0.1, 0.33, 0.5] {
            assert_relative_eq!(f.eval(s).unwrap(), s, epsilon = 1e-10);
        }
    }

    #[test]
    fn f_from_h_rejects_a_non_odd_h() {
        let h = ScalarFn::from_expr_str("0.1*x + 0.05*x^2")
            .unwrap()
            .with_domain(Interval::symmetric(1.0));
        assert!(f_from_h(&h, 1.0).is_err());
    }

    #[test]
    fn f_h_round_trip_for_a_transcendental_f() {
        let f = ScalarFn::from_expr_str("cos(x)").unwrap();
        for lambda in [1.0, 2.0] {
            let h = h_from_f(&f, lambda, 1.0).unwrap();
            let back = f_from_h(&h, lambda).unwrap();
            let mut worst = 0.0f64;
            for i in 0..=100 {
                let s = 0.5 * i as f64 / 100.0;
                worst = worst.max((back.eval(s).unwrap() - s.cos()).abs());
            }
            assert!(worst < 1e-8, "lambda {lambda}: worst {worst}");
        }
    }

    #[test]
    fn h_from_g_recovers_the_linear_h() {
        let p = urabe_potential(0.5, 0.9);
        let h = h_from_g(&p).unwrap();
        let mut worst = 0.0f64;
        for i in -100..=100 {
            let big_x = 0.28 * i as f64 / 100.0;
            worst = worst.max((h.eval(big_x).unwrap() - 0.5 * big_x).abs());
        }
        assert!(worst < 1e-8, "worst |h - X/2| = {worst}");
    }

    #[test]
    fn h_from_g_of_an_odd_force_is_zero() {
        // For odd g the raw samples lambda X/g - 1 are even, so the odd part
        // vanishes identically and the residual carries the whole defect.
        let p = duffing_potential();
        let h = h_from_g(&p).unwrap();
        for i in 0..=20 {
            let big_x = h.domain().hi * i as f64 / 20.0;
            assert!(h.eval(big_x).unwrap().abs() < 1e-9);
        }
        // Residual at x = 0.5: g - X = 0.625 - 0.5 sqrt(1 + 0.125).
        let r = urabe_residual(&p, &h, 0.5).unwrap();
        let truth = 0.625 - 0.5 * (1.125f64).sqrt();
        assert_relative_eq!(r, truth, max_relative = 1e-8);
        assert!(r > 1e-3);
    }

    #[test]
    fn urabe_residual_flags_a_wrong_h_on_the_harmonic_well() {
        // lambda = 2, g = 4x, fake h = 0.1 X: r(0.25) = 1*(1.05) - 2*0.5.
        let g = ScalarFn::from_expr_str("4*x").unwrap();
        let p = ExprPotential::new(g, None, 1.0).unwrap();
        let h = ScalarFn::from_expr_str("0.1*x").unwrap();
        let r = urabe_residual(&p, &h, 0.25).unwrap();
        assert_relative_eq!(r, 0.05, max_relative = 1e-9);
    }

    #[test]
    fn residual_vanishes_when_h_matches() {
        let p = urabe_potential(0.5, 0.9);
        let h = h_from_g(&p).unwrap();
        for &x in &[-0.6, -0.1, 0.2, 0.55] {
            let r = urabe_residual(&p, &h, x).unwrap();
            assert!(r.abs() < 1e-8, "r({x}) = {r}");
        }
    }

    #[test]
    fn limit_check_shrinks_for_solutions_and_expressions() {
        let f = ScalarFn::constant(0.5);
        let sol = solve_chouikha(&IsoProblem::new(f, 1.0, 0.6).unwrap()).unwrap();
        let check = check_limit_2_2(&sol).unwrap();
        for k in 1..6 {
            assert!(
                check.deviations[k] <= check.deviations[k - 1] * 1.01 + 1e-15,
                "deviations not shrinking: {:?}",
                check.deviations
            );
        }
        assert!(check.deviations[5] < 1e-4);

        // The limit holds for a non-isochronous center too.
        let check = check_limit_2_2(&duffing_potential()).unwrap();
        assert!(check.deviations[5] < 1e-4);
    }

    #[test]
    fn urabe_data_curves_are_mutually_inverse() {
        let p = urabe_potential(0.5, 0.9);
        let data = urabe_data(&p).unwrap();
        for &x in &[-0.6, -0.15, 0.0, 0.3, 0.72] {
            let big_x = data.x_map.eval(x).unwrap();
            assert_relative_eq!(
                data.x_inverse.eval(big_x).unwrap(),
                x,
                max_relative = 1e-8,
                epsilon = 1e-9
            );
        }
        // h agrees with the direct measurement.
        assert_relative_eq!(
            data.h.eval(0.25).unwrap(),
            0.125,
            max_relative = 1e-7,
            epsilon = 1e-8
        );
    }

    #[test]
    fn h_oddness_holds_on_sampled_output() {
        let p = urabe_potential(0.5, 0.9);
        let h = h_from_g(&p).unwrap();
        let hi = h.domain().hi;
        for i in 1..=50 {
            let s = hi * i as f64 / 50.0;
            let defect = h.eval(s).unwrap() + h.eval(-s).unwrap();
            assert!(defect.abs() <= 1e-10, "h({s}) + h(-{s}) = {defect}");
        }
    }
}
