//! Adaptive explicit Runge-Kutta integration: the Dormand-Prince 4(5)
//! embedded pair with FSAL, a PI step-size controller, and a stored quartic
//! dense-output interpolant per accepted step.
//!
//! The right-hand side may refuse to evaluate (domain edges, approaching
//! singularities); the driver then treats the trial step as rejected and
//! shrinks it, and gives up cleanly once the step size underflows.  A
//! per-step monitor callback lets callers stop or truncate the integration
//! when a quantity of interest crosses a threshold inside a step.

use crate::EvalError;

/// Marker returned by a right-hand side that cannot be evaluated at the
/// requested point.  The driver reacts by shrinking the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RhsFailure;

#[derive(Debug, Clone, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} before any progress")]
    StepSizeUnderflow { t: f64 },
    #[error("exceeded {max} steps at t = {t}")]
    MaxSteps { t: f64, max: usize },
}

/// Monitor verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Continue,
    /// Keep this step but end the integration after it.
    Stop,
    /// Cut this step at the given interior time and end the integration.
    Truncate(f64),
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    /// Reached the requested end time.
    ReachedEnd,
    /// A monitor requested the stop at the recorded time.
    Stopped { t: f64 },
    /// The right-hand side kept failing and the step size underflowed after
    /// progress had been made; the recorded time is the last reachable one.
    Halted { t: f64 },
}

// Dormand-Prince 4(5) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Error coefficients (difference of the embedded orders).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

// PI controller constants.
const SAFE: f64 = 0.9;
const FAC1: f64 = 0.2;
const FAC2: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

/// One accepted step with its dense-output polynomial (power basis in the
/// normalized variable `s = (t - t0) / h_poly`).
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    /// Original step length the interpolant was built with; `t1` may have
    /// been pulled in by truncation.
    h_poly: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    coeffs: [[f64; 5]; N],
}

impl<const N: usize> Step<N> {
    /// Interpolated state at `t` within the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h_poly;
        let mut out = [0.0; N];
        for i in 0..N {
            let c = &self.coeffs[i];
            out[i] = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * c[4])));
        }
        out
    }

    /// Interpolated time derivative at `t`.
    pub fn eval_deriv(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h_poly;
        let mut out = [0.0; N];
        for i in 0..N {
            let c = &self.coeffs[i];
            out[i] = (c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * 4.0 * c[4]))) / self.h_poly;
        }
        out
    }

    fn truncated(&self, t_cut: f64) -> Step<N> {
        let mut s = self.clone();
        s.y1 = self.eval(t_cut);
        s.t1 = t_cut;
        s
    }

    fn contains(&self, t: f64, dir: f64) -> bool {
        (t - self.t0) * dir >= 0.0 && (t - self.t1) * dir <= 0.0
    }
}

/// Dense integration result: the chain of accepted steps plus how it ended.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    t0: f64,
    y0: [f64; N],
    steps: Vec<Step<N>>,
    status: Status,
}

impl<const N: usize> DenseOutput<N> {
    pub fn status(&self) -> Status {
        self.status
    }

    pub fn steps(&self) -> &[Step<N>] {
        &self.steps
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    /// Last time the output is valid at.
    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(self.t0, |s| s.t1)
    }

    pub fn final_state(&self) -> (f64, [f64; N]) {
        match self.steps.last() {
            Some(s) => (s.t1, s.y1),
            None => (self.t0, self.y0),
        }
    }

    fn direction(&self) -> f64 {
        (self.t_end() - self.t0).signum()
    }

    fn step_for(&self, t: f64) -> Result<&Step<N>, EvalError> {
        let (lo, hi) = if self.t0 <= self.t_end() {
            (self.t0, self.t_end())
        } else {
            (self.t_end(), self.t0)
        };
        let slack = 1e-12 * (hi - lo).max(1e-300);
        if t < lo - slack || t > hi + slack {
            return Err(EvalError::OutsideDomain { x: t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        let dir = self.direction();
        let idx = self.steps.partition_point(|s| (t - s.t1) * dir > 0.0);
        let idx = idx.min(self.steps.len() - 1);
        debug_assert!(self.steps[idx].contains(t, dir) || t == self.steps[idx].t1);
        Ok(&self.steps[idx])
    }

    /// Interpolated state anywhere on the covered range.
    pub fn eval(&self, t: f64) -> Result<[f64; N], EvalError> {
        if self.steps.is_empty() {
            if t == self.t0 {
                return Ok(self.y0);
            }
            return Err(EvalError::OutsideDomain { x: t, lo: self.t0, hi: self.t0 });
        }
        Ok(self.step_for(t)?.eval(t))
    }

    /// Interpolated time derivative anywhere on the covered range.
    pub fn eval_deriv(&self, t: f64) -> Result<[f64; N], EvalError> {
        if self.steps.is_empty() {
            return Err(EvalError::OutsideDomain { x: t, lo: self.t0, hi: self.t0 });
        }
        Ok(self.step_for(t)?.eval_deriv(t))
    }
}

/// Integrator configuration.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Dopri5 { rtol: tol, atol: tol, h_max: None, max_steps: 500_000 }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = Some(h_max);
        self
    }

    /// Integrate `y' = rhs(t, y)` from `t0` to `t_end`, storing dense output.
    /// The monitor runs after every accepted step and may stop or truncate.
    pub fn integrate<const N: usize>(
        &self,
        rhs: &mut dyn FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
        t0: f64,
        t_end: f64,
        y0: [f64; N],
        monitor: &mut dyn FnMut(&Step<N>) -> StepControl,
    ) -> Result<DenseOutput<N>, OdeError> {
        let mut out = DenseOutput { t0, y0, steps: Vec::new(), status: Status::ReachedEnd };
        if t_end == t0 {
            return Ok(out);
        }
        let dir = (t_end - t0).signum();
        let span = (t_end - t0).abs();
        let h_cap = self.h_max.unwrap_or(span).min(span);

        let mut t = t0;
        let mut y = y0;
        let mut k0 = match rhs(t, &y) {
            Ok(v) => v,
            Err(RhsFailure) => return Err(OdeError::StepSizeUnderflow { t }),
        };
        let mut h = dir * self.initial_step(rhs, t, &y, &k0, dir, h_cap);
        let mut facold: f64 = 1e-4;
        let mut rejected = false;
        let mut steps_taken = 0usize;

        loop {
            if steps_taken >= self.max_steps {
                return Err(OdeError::MaxSteps { t, max: self.max_steps });
            }
            let h_floor = 1e-14 * t.abs().max(1.0);
            if h.abs() < h_floor {
                if out.steps.is_empty() {
                    return Err(OdeError::StepSizeUnderflow { t });
                }
                out.status = Status::Halted { t };
                return Ok(out);
            }
            let mut last = false;
            if (t + h - t_end) * dir >= 0.0 {
                h = t_end - t;
                last = true;
            }

            match self.try_step(rhs, t, &y, &k0, h) {
                TrialStep::Rejected { err } => {
                    steps_taken += 1;
                    rejected = true;
                    let fac11 = err.powf(EXPO1);
                    h /= (fac11 / SAFE).min(1.0 / FAC1);
                    continue;
                }
                TrialStep::Failed => {
                    steps_taken += 1;
                    rejected = true;
                    h *= 0.5;
                    continue;
                }
                TrialStep::Accepted { mut step, k_last, err } => {
                    steps_taken += 1;
                    if last {
                        // Pin the endpoint against accumulated rounding.
                        step.t1 = t_end;
                    }
                    let fac11 = err.powf(EXPO1);
                    // Step grows by at most FAC2 and shrinks by at most FAC1.
                    let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC2, 1.0 / FAC1);
                    let mut h_next = h / fac;
                    if rejected {
                        // Do not grow immediately after a rejection.
                        h_next = dir * h_next.abs().min(h.abs());
                    }
                    if h_next.abs() > h_cap {
                        h_next = dir * h_cap;
                    }
                    facold = err.max(1e-4);
                    rejected = false;

                    t = step.t1;
                    y = step.y1;
                    k0 = k_last;
                    out.steps.push(step);

                    match monitor(out.steps.last().unwrap()) {
                        StepControl::Continue => {}
                        StepControl::Stop => {
                            out.status = Status::Stopped { t };
                            return Ok(out);
                        }
                        StepControl::Truncate(t_cut) => {
                            let cut = out.steps.last().unwrap().truncated(t_cut);
                            *out.steps.last_mut().unwrap() = cut;
                            out.status = Status::Stopped { t: t_cut };
                            return Ok(out);
                        }
                    }
                    if last {
                        out.status = Status::ReachedEnd;
                        return Ok(out);
                    }
                    h = h_next;
                }
            }
        }
    }

    /// Convenience wrapper when only the final state matters.
    pub fn final_state<const N: usize>(
        &self,
        rhs: &mut dyn FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
        t0: f64,
        t_end: f64,
        y0: [f64; N],
    ) -> Result<(Status, f64, [f64; N]), OdeError> {
        let dense = self.integrate(rhs, t0, t_end, y0, &mut |_| StepControl::Continue)?;
        let (t, y) = dense.final_state();
        Ok((dense.status(), t, y))
    }

    /// Standard starting-step heuristic based on the first derivative and a
    /// cheap second-derivative probe.
    fn initial_step<const N: usize>(
        &self,
        rhs: &mut dyn FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
        t: f64,
        y: &[f64; N],
        k0: &[f64; N],
        dir: f64,
        h_cap: f64,
    ) -> f64 {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sk = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sk) * (y[i] / sk);
            d1 += (k0[i] / sk) * (k0[i] / sk);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(h_cap);

        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + dir * h0 * k0[i];
        }
        let h1 = match rhs(t + dir * h0, &y1) {
            Ok(k1) => {
                let mut d2: f64 = 0.0;
                for i in 0..N {
                    let sk = self.atol + self.rtol * y[i].abs();
                    let diff = (k1[i] - k0[i]) / sk;
                    d2 += diff * diff;
                }
                let d2 = (d2 / N as f64).sqrt() / h0;
                let dm = d1.max(d2);
                if dm <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    (0.01 / dm).powf(0.2)
                }
            }
            Err(RhsFailure) => h0 * 0.1,
        };
        (100.0 * h0).min(h1).min(h_cap)
    }

    fn try_step<const N: usize>(
        &self,
        rhs: &mut dyn FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
        t: f64,
        y: &[f64; N],
        k0: &[f64; N],
        h: f64,
    ) -> TrialStep<N> {
        let mut k = [[0.0; N]; 7];
        k[0] = *k0;
        let mut y1 = [0.0; N];
        for stage in 1..7 {
            let mut ys = [0.0; N];
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    acc += A[stage][j] * kj[i];
                }
                ys[i] = y[i] + h * acc;
            }
            if stage == 6 {
                // FSAL: row 6 of A is the solution weight vector, so this
                // abscissa is the 5th-order result itself.
                y1 = ys;
            }
            match rhs(t + C[stage] * h, &ys) {
                Ok(v) if v.iter().all(|c| c.is_finite()) => k[stage] = v,
                _ => return TrialStep::Failed,
            }
        }
        if y1.iter().any(|c| !c.is_finite()) {
            return TrialStep::Failed;
        }

        let mut err: f64 = 0.0;
        for i in 0..N {
            let sk = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let scaled = h * e / sk;
            err += scaled * scaled;
        }
        err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return TrialStep::Failed;
        }
        if err > 1.0 {
            return TrialStep::Rejected { err };
        }

        // Dense output: convert the contribution form to the power basis.
        let mut coeffs = [[0.0; 5]; N];
        for i in 0..N {
            let ydiff = y1[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            let c0 = y[i];
            let c1 = ydiff;
            let c2 = bspl;
            let c3 = ydiff - h * k[6][i] - bspl;
            let mut c4 = 0.0;
            for (j, kj) in k.iter().enumerate() {
                c4 += D[j] * kj[i];
            }
            c4 *= h;
            coeffs[i] = [c0, c1 + c2, c3 + c4 - c2, -c3 - 2.0 * c4, c4];
        }
        let step =
            Step { t0: t, t1: t + h, h_poly: h, y0: *y, y1, coeffs };
        TrialStep::Accepted { step, k_last: k[6], err }
    }
}

enum TrialStep<const N: usize> {
    Accepted { step: Step<N>, k_last: [f64; N], err: f64 },
    Rejected { err: f64 },
    Failed,
}
