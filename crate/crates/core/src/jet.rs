//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the scaled derivatives `[v, v', v''/2!, v'''/3!, ...]` of a
//! function at a point and pushes them through arithmetic and elementary
//! functions, so exact derivatives fall out of the same sweep that computes
//! values.  All domain failures (square root of a negative, log of a
//! non-positive, division by zero, fractional powers of non-positive bases)
//! are reported as [`EvalError::Domain`] rather than producing NaNs.

use crate::EvalError;

/// Taylor coefficients of a scalar function at a point, truncated at a fixed
/// order.  `coeffs[k]` is the k-th derivative divided by `k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// The constant `v`, carried to the given truncation order.
    pub fn constant(v: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = v;
        Jet { coeffs }
    }

    /// The identity `x` expanded at `x0`: value `x0`, first derivative 1.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x0;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet { coeffs }
    }

    /// Build directly from scaled-derivative coefficients.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least a value");
        Jet { coeffs }
    }

    /// Truncation order (highest derivative carried).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Function value (coefficient 0).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Scaled coefficient `v^(k)/k!`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// All scaled coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Unscaled derivative `v^(k)` (multiplies the coefficient back by `k!`).
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.coeff(k) * fact
    }

    fn zip_len(&self, other: &Jet) -> usize {
        self.coeffs.len().min(other.coeffs.len())
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.zip_len(other);
        Jet::from_coeffs((0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect())
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.zip_len(other);
        Jet::from_coeffs((0..n).map(|k| self.coeffs[k] - other.coeffs[k]).collect())
    }

    pub fn neg(&self) -> Jet {
        Jet::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet::from_coeffs(self.coeffs.iter().map(|c| a * c).collect())
    }

    /// Cauchy product truncated at the shorter order.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.zip_len(other);
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[j] * other.coeffs[k - j];
            }
            out[k] = acc;
        }
        Jet::from_coeffs(out)
    }

    /// Division; the divisor's value must be nonzero.
    pub fn div(&self, other: &Jet) -> Result<Jet, EvalError> {
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(EvalError::Domain { op: "division by zero", arg: 0.0 });
        }
        let n = self.zip_len(other);
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * out[k - j];
            }
            out[k] = acc / b0;
        }
        Ok(Jet::from_coeffs(out))
    }

    pub fn recip(&self) -> Result<Jet, EvalError> {
        Jet::constant(1.0, self.order()).div(self)
    }

    pub fn exp(&self) -> Jet {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * out[k - j];
            }
            out[k] = acc / k as f64;
        }
        Jet::from_coeffs(out)
    }

    pub fn ln(&self) -> Result<Jet, EvalError> {
        let u0 = self.coeffs[0];
        if u0 <= 0.0 {
            return Err(EvalError::Domain { op: "log", arg: u0 });
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = u0.ln();
        for k in 1..n {
            let mut acc = k as f64 * self.coeffs[k];
            for j in 1..k {
                acc -= j as f64 * out[j] * self.coeffs[k - j];
            }
            out[k] = acc / (k as f64 * u0);
        }
        Ok(Jet::from_coeffs(out))
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    /// Joint recurrence: `s' = u' c`, `c' = -u' s`.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..n {
            let mut sa = 0.0;
            let mut ca = 0.0;
            for j in 1..=k {
                let ju = j as f64 * self.coeffs[j];
                sa += ju * c[k - j];
                ca += ju * s[k - j];
            }
            s[k] = sa / k as f64;
            c[k] = -ca / k as f64;
        }
        (Jet::from_coeffs(s), Jet::from_coeffs(c))
    }

    /// Recurrence from `t' = (1 - t^2) u'`.
    pub fn tanh(&self) -> Jet {
        let n = self.coeffs.len();
        let mut t = vec![0.0; n];
        t[0] = self.coeffs[0].tanh();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                // (1 - t^2) coefficient at index k - j, built from t_0..t_{k-1}.
                let m = k - j;
                let mut w = if m == 0 { 1.0 } else { 0.0 };
                for i in 0..=m {
                    w -= t[i] * t[m - i];
                }
                acc += j as f64 * self.coeffs[j] * w;
            }
            t[k] = acc / k as f64;
        }
        Jet::from_coeffs(t)
    }

    pub fn sqrt(&self) -> Result<Jet, EvalError> {
        if self.coeffs[0] < 0.0 {
            return Err(EvalError::Domain { op: "sqrt", arg: self.coeffs[0] });
        }
        if self.coeffs[0] == 0.0 {
            // Only the plain value is defined; derivatives blow up.
            if self.order() == 0 {
                return Ok(Jet::constant(0.0, 0));
            }
            return Err(EvalError::Domain { op: "sqrt derivative", arg: 0.0 });
        }
        self.powf(0.5)
    }

    /// `u^alpha` for real `alpha`; requires `u > 0`.
    /// Recurrence from `u p' = alpha u' p`.
    pub fn powf(&self, alpha: f64) -> Result<Jet, EvalError> {
        let u0 = self.coeffs[0];
        if u0 <= 0.0 {
            return Err(EvalError::Domain { op: "non-integer power", arg: u0 });
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = u0.powf(alpha);
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (alpha * j as f64 - (k - j) as f64) * self.coeffs[j] * out[k - j];
            }
            out[k] = acc / (k as f64 * u0);
        }
        Ok(Jet::from_coeffs(out))
    }

    /// Integer power by binary exponentiation; valid for any base, but a
    /// negative exponent needs a nonzero base.
    pub fn powi(&self, mut n: i64) -> Result<Jet, EvalError> {
        let order = self.order();
        if n == 0 {
            return Ok(Jet::constant(1.0, order));
        }
        let invert = n < 0;
        if invert {
            n = -n;
        }
        let mut base = self.clone();
        let mut acc: Option<Jet> = None;
        while n > 0 {
            if n & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul(&base),
                    None => base.clone(),
                });
            }
            base = base.mul(&base);
            n >>= 1;
        }
        let result = acc.expect("n > 0");
        if invert {
            result.recip()
        } else {
            Ok(result)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_at_zero_gives_reciprocal_factorials() {
        let x = Jet::variable(0.0, 3);
        let e = x.exp();
        assert_eq!(e.coeffs(), &[1.0, 1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn square_at_three() {
        let x = Jet::variable(3.0, 2);
        let sq = x.mul(&x);
        assert_eq!(sq.coeffs(), &[9.0, 6.0, 1.0]);
    }

    #[test]
    fn sqrt_of_one_plus_x_at_zero() {
        let x = Jet::variable(0.0, 3);
        let s = Jet::constant(1.0, 3).add(&x).sqrt().unwrap();
        // (1+x)^(1/2) = 1 + x/2 - x^2/8 + x^3/16
        assert_relative_eq!(s.coeff(0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.coeff(1), 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.coeff(2), -0.125, epsilon = 1e-15);
        assert_relative_eq!(s.coeff(3), 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn trig_identity_through_order() {
        let x = Jet::variable(0.7, 6);
        let (s, c) = x.sin_cos();
        let one = s.mul(&s).add(&c.mul(&c));
        assert_relative_eq!(one.coeff(0), 1.0, epsilon = 1e-14);
        for k in 1..=6 {
            assert!(one.coeff(k).abs() < 1e-13, "coeff {k} = {}", one.coeff(k));
        }
    }

    #[test]
    fn tanh_derivative_matches_identity() {
        let x = Jet::variable(0.3, 4);
        let t = x.tanh();
        // t' = 1 - t^2
        let expect = 1.0 - t.value() * t.value();
        assert_relative_eq!(t.derivative(1), expect, epsilon = 1e-14);
    }

    #[test]
    fn powf_agrees_with_exp_log() {
        let x = Jet::variable(1.7, 5);
        let direct = x.powf(2.5).unwrap();
        let via_log = x.ln().unwrap().scale(2.5).exp();
        for k in 0..=5 {
            assert_relative_eq!(direct.coeff(k), via_log.coeff(k), max_relative = 1e-13);
        }
    }

    #[test]
    fn powi_handles_negative_base_and_exponent() {
        let x = Jet::variable(-2.0, 3);
        let cube = x.powi(3).unwrap();
        assert_eq!(cube.value(), -8.0);
        assert_eq!(cube.derivative(1), 12.0); // 3x^2
        let inv = x.powi(-2).unwrap();
        assert_relative_eq!(inv.value(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(inv.derivative(1), 0.25, epsilon = 1e-15); // -2 x^-3
    }

    #[test]
    fn division_by_zero_value_is_an_error() {
        let zero = Jet::constant(0.0, 2);
        let one = Jet::constant(1.0, 2);
        assert!(one.div(&zero).is_err());
    }

    #[test]
    fn chain_rule_through_composition() {
        // d/dx sin(x^2) at x0 = 0.9 is 2 x0 cos(x0^2).
        let x = Jet::variable(0.9, 2);
        let inner = x.mul(&x);
        let s = inner.sin();
        assert_relative_eq!(s.derivative(1), 2.0 * 0.9 * (0.81f64).cos(), epsilon = 1e-14);
        // second derivative: 2 cos(x^2) - 4 x^2 sin(x^2)
        let expect = 2.0 * (0.81f64).cos() - 4.0 * 0.81 * (0.81f64).sin();
        assert_relative_eq!(s.derivative(2), expect, epsilon = 1e-13);
    }
}
