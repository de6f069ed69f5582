//! Orbital period measurement — the independent check that a well really
//! is isochronous.
//!
//! Two deliberately different instruments measure the period of the orbit
//! with energy `E`:
//!
//! * [`period_quadrature`]: the angular substitution `X = sqrt(2E) sin
//!   theta` turns the period integral into `2 int_{-pi/2}^{pi/2} (X/g)(
//!   x(theta)) d theta`, a smooth integral with no endpoint singularity,
//!   evaluated by Gauss-Legendre;
//! * [`period_ode`]: direct integration of `x' = y`, `y' = -g(x)` around
//!   one revolution, landing exactly on the return section by switching the
//!   independent variable to `y` for the final approach (Henon's trick).
//!
//! Agreement of both with `2 pi / lambda` across an energy band is the
//! verification verdict reported by [`period_scan`].

use crate::ode::{Dopri5, RhsFailure, Status, Step, StepControl};
use crate::potential::Potential;
use crate::quad;
use crate::rootfind::newton_bisect;
use crate::urabe::x_of_big_x;
use crate::Error;

/// Gauss-Legendre node count used by [`period_scan`].
pub const SCAN_QUAD_NODES: usize = 64;
/// Integrator tolerance used by [`period_scan`].
pub const SCAN_ODE_TOL: f64 = 1e-12;

/// The two solutions of `G(x) = E` bracketing the orbit.
#[derive(Debug, Clone, Copy)]
pub struct TurningPoints {
    pub x_minus: f64,
    pub x_plus: f64,
}

/// Largest energy whose orbit stays inside the solved x-range:
/// `min(G(span.lo), G(span.hi))`.
pub fn energy_ceiling(p: &impl Potential) -> Result<f64, Error> {
    let span = p.span();
    Ok(p.potential(span.lo)?.min(p.potential(span.hi)?))
}

/// Turning points of the orbit with energy `e`, by bracketed Newton on
/// `G(x) - e` over each half of the span.
pub fn turning_points(p: &impl Potential, e: f64) -> Result<TurningPoints, Error> {
    let e_max = energy_ceiling(p)?;
    if !(e > 0.0) || e > e_max {
        return Err(Error::EnergyOutOfBand { e, e_max });
    }
    let span = p.span();
    let mut fdf = |x: f64| Ok((p.potential(x)? - e, p.force(x)?));
    let x_plus = newton_bisect(&mut fdf, 0.0, span.hi, 1e-13, 1e-15 * e)?;
    let x_minus = newton_bisect(&mut fdf, 0.0, span.lo, 1e-13, 1e-15 * e)?;
    Ok(TurningPoints { x_minus, x_plus })
}

/// Orbital period by the angular substitution, with an `n`-point
/// Gauss-Legendre rule.  The integrand `theta -> (X/g)(x(sqrt(2e) sin
/// theta))` is smooth up to the turning points, so moderate `n` already
/// gives near machine accuracy for analytic wells.
pub fn period_quadrature(p: &impl Potential, e: f64, n: usize) -> Result<f64, Error> {
    let e_max = energy_ceiling(p)?;
    if !(e > 0.0) || e > e_max {
        return Err(Error::EnergyOutOfBand { e, e_max });
    }
    let amp = (2.0 * e).sqrt();
    let rule = quad::gauss_legendre(n);
    let half = std::f64::consts::FRAC_PI_2;
    let mut acc = 0.0;
    for (t, w) in rule.0.iter().zip(&rule.1) {
        let theta = half * t;
        let x = x_of_big_x(p, amp * theta.sin())?;
        acc += w * p.x_over_g(x)?;
    }
    // The factor pi/2 maps [-1, 1] to [-pi/2, pi/2]; the outer 2 closes the
    // orbit (upper and lower arc take the same time).
    Ok(std::f64::consts::PI * acc)
}

/// Orbital period by direct integration of the flow, starting at the right
/// turning point `(x_plus, 0)`.  The revolution is complete at the next
/// crossing of `y = 0` with decreasing `y` at positive `x`; the crossing is
/// resolved exactly by integrating the swapped system `dt/dy = -1/g`,
/// `dx/dy = -y/g` over the final step.
pub fn period_ode(p: &impl Potential, e: f64, tol: f64) -> Result<f64, Error> {
    let tp = turning_points(p, e)?;
    let t_ref = 2.0 * std::f64::consts::PI / p.lambda();
    let t_cap = 10.0 * t_ref;

    let mut rhs = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2], RhsFailure> {
        let g = p.force(y[0]).map_err(|_| RhsFailure)?;
        Ok([y[1], -g])
    };
    // Step start state of the step containing the return crossing.
    let mut event: Option<(f64, [f64; 2])> = None;
    let mut monitor = |step: &Step<2>| -> StepControl {
        if step.y0[1] > 0.0 && step.y1[1] <= 0.0 && step.y1[0] > 0.0 {
            event = Some((step.t0, step.y0));
            StepControl::Stop
        } else {
            StepControl::Continue
        }
    };
    let solver = Dopri5::new(tol).with_h_max(t_ref / 8.0);
    let run = solver.integrate(&mut rhs, 0.0, t_cap, [tp.x_plus, 0.0], &mut monitor)?;
    let Some((t0, y0)) = event else {
        debug_assert!(!matches!(run.status(), Status::Stopped { .. }));
        return Err(Error::NoReturn { t_max: t_cap });
    };

    // Final approach with y as the independent variable, from y0 down to 0.
    let mut swap_rhs = |v: f64, z: &[f64; 2]| -> Result<[f64; 2], RhsFailure> {
        let g = p.force(z[1]).map_err(|_| RhsFailure)?;
        if g <= 0.0 {
            return Err(RhsFailure);
        }
        Ok([-1.0 / g, -v / g])
    };
    let mut pass = |_: &Step<2>| StepControl::Continue;
    let leg = Dopri5::new(tol).integrate(&mut swap_rhs, y0[1], 0.0, [t0, y0[0]], &mut pass)?;
    let (_, z_end) = leg.final_state();
    Ok(z_end[0])
}

/// One energy's period as measured by both instruments.
#[derive(Debug, Clone, Copy)]
pub struct PeriodSample {
    pub energy: f64,
    pub t_quadrature: f64,
    pub t_ode: f64,
}

/// Verdict of a period scan over an energy band.
#[derive(Debug, Clone)]
pub struct PeriodReport {
    pub lambda: f64,
    /// `2 pi / lambda`, the period an isochronous well must have.
    pub expected_period: f64,
    /// Deviation bound defining the verdict.
    pub tol: f64,
    pub samples: Vec<PeriodSample>,
    /// Worst `|T - expected_period|` over all samples and both methods.
    pub max_deviation: f64,
    pub isochronous: bool,
}

/// Measure the period at each energy with both instruments and compare
/// against `2 pi / lambda`.
pub fn period_scan(p: &impl Potential, energies: &[f64], tol: f64) -> Result<PeriodReport, Error> {
    if energies.is_empty() {
        return Err(Error::InvalidInput("empty energy grid".into()));
    }
    let lambda = p.lambda();
    let expected_period = 2.0 * std::f64::consts::PI / lambda;
    let mut samples = Vec::with_capacity(energies.len());
    let mut max_deviation = 0.0f64;
    for &energy in energies {
        let t_quadrature = period_quadrature(p, energy, SCAN_QUAD_NODES)?;
        let t_ode = period_ode(p, energy, SCAN_ODE_TOL)?;
        max_deviation = max_deviation
            .max((t_quadrature - expected_period).abs())
            .max((t_ode - expected_period).abs());
        samples.push(PeriodSample { energy, t_quadrature, t_ode });
    }
    Ok(PeriodReport {
        lambda,
        expected_period,
        tol,
        samples,
        max_deviation,
        isochronous: max_deviation <= tol,
    })
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let ratio = hi / lo;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * ratio.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// `n` uniformly spaced points from `lo` to `hi` inclusive.
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(hi > lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * step }).collect()
}
