//! Truncated power series with exact coefficient arithmetic, and the
//! coefficient-level maps between the three descriptions of an isochronous
//! center: the characteristic `f`, the odd function `h`, and the potential
//! series `G`.
//!
//! Conventions: a [`SeriesPoly`] stores coefficients lowest power first;
//! binary operations truncate at the shorter operand's order, so results are
//! exact through every coefficient they carry.

use crate::jet::Jet;
use crate::{Error, EvalError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("division by a series with zero constant term")]
    DivByZeroConstant,
    #[error("composition requires the inner series to vanish at 0 (got {0})")]
    ComposeNonzeroConstant(f64),
    #[error("coefficient at even index {index} is nonzero ({value}); an odd series was required")]
    NotOdd { index: usize, value: f64 },
    #[error("series for g requires order >= 2")]
    OrderTooSmall,
}

/// Polynomial / truncated power series, coefficients lowest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoly {
    coeffs: Vec<f64>,
}

impl SeriesPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        SeriesPoly { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        SeriesPoly { coeffs: vec![0.0; order + 1] }
    }

    /// The monomial `x`, carried to the given order.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    /// Highest power carried.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Same series re-truncated (or zero-extended) to the given order.
    pub fn resized(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        SeriesPoly { coeffs }
    }

    fn zip_order(&self, other: &Self) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.zip_order(other);
        SeriesPoly::new((0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.zip_order(other);
        SeriesPoly::new((0..=n).map(|k| self.coeffs[k] - other.coeffs[k]).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        SeriesPoly::new(self.coeffs.iter().map(|c| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.zip_order(other);
        let mut out = vec![0.0; n + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[j] * other.coeffs[k - j];
            }
            *slot = acc;
        }
        SeriesPoly::new(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(SeriesError::DivByZeroConstant);
        }
        let n = self.zip_order(other);
        let mut out = vec![0.0; n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * out[k - j];
            }
            out[k] = acc / b0;
        }
        Ok(SeriesPoly::new(out))
    }

    /// Composition `self(inner(x))`; the inner series must have no constant
    /// term.  Exact through the shorter of the two orders.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        if inner.coeffs[0] != 0.0 {
            return Err(SeriesError::ComposeNonzeroConstant(inner.coeffs[0]));
        }
        let n = self.zip_order(inner);
        let a = self.resized(n);
        let b = inner.resized(n);
        // Horner over the outer coefficients with truncated products.
        let mut out = SeriesPoly::zero(n);
        for k in (0..=n).rev() {
            out = out.mul(&b);
            out.coeffs[0] += a.coeffs[k];
        }
        Ok(out)
    }

    /// Antiderivative with zero constant term; raises the order by one.
    pub fn integrate(&self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k + 1] = c / (k + 1) as f64;
        }
        SeriesPoly::new(out)
    }

    /// Term-by-term derivative; lowers the order by one.
    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() == 1 {
            return SeriesPoly::new(vec![0.0]);
        }
        let mut out = vec![0.0; self.coeffs.len() - 1];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (k + 1) as f64 * self.coeffs[k + 1];
        }
        SeriesPoly::new(out)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluation at a jet (for derivative queries of polynomial data).
    pub fn eval_jet(&self, x: &Jet) -> Jet {
        let mut acc = Jet::constant(0.0, x.order());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&Jet::constant(*c, x.order()));
        }
        acc
    }

    /// Error if any even-index coefficient is (exactly) nonzero.
    pub fn require_odd(&self) -> Result<(), SeriesError> {
        for (index, &value) in self.coeffs.iter().enumerate().step_by(2) {
            if value != 0.0 {
                return Err(SeriesError::NotOdd { index, value });
            }
        }
        Ok(())
    }
}

/// Coefficients of `h(s) = sum h_k s^k` from those of `f(s) = sum f_k s^k`
/// via `h'(s) = lambda * f(s^2 / 2)`: only odd powers appear, with
/// `h_{2k+1} = lambda * f_k / ((2k+1) 2^k)`.
pub fn h_coeffs_from_f(f: &SeriesPoly, lambda: f64) -> SeriesPoly {
    let mut out = vec![0.0; 2 * f.order() + 2];
    let mut pow2 = 1.0;
    for k in 0..=f.order() {
        out[2 * k + 1] = lambda * f.coeff(k) / ((2 * k + 1) as f64 * pow2);
        pow2 *= 2.0;
    }
    SeriesPoly::new(out)
}

/// Inverse of [`h_coeffs_from_f`]: `f_k = (2k+1) 2^k h_{2k+1} * lambda^{-1}`
/// with `lambda = sqrt(g'(0))`.  The input must be odd.
pub fn f_coeffs_from_h(h: &SeriesPoly, g_prime0: f64) -> Result<SeriesPoly, SeriesError> {
    h.require_odd()?;
    let lambda = g_prime0.sqrt();
    let n = h.order() / 2;
    let mut out = vec![0.0; n + 1];
    let mut pow2 = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = (2 * k + 1) as f64 * pow2 * h.coeff(2 * k + 1) / lambda;
        pow2 *= 2.0;
    }
    Ok(SeriesPoly::new(out))
}

/// Taylor coefficients of the potential `G` through `x^order`, from the
/// integrated characteristic equation `2G = (x + F(G)) G'` with
/// `F(s) = int_0^s f`.  The quadratic coefficient is `lambda^2 / 2`; each
/// higher one follows from the previous ones because the `x * G'` term
/// contributes `n * g_n` while the left side contributes `2 g_n`.
pub fn g_series_from_f(f: &SeriesPoly, lambda: f64, order: usize) -> Result<SeriesPoly, SeriesError> {
    if order < 2 {
        return Err(SeriesError::OrderTooSmall);
    }
    let big_f = f.integrate().resized(order);
    let mut g = SeriesPoly::zero(order);
    g.coeffs[2] = lambda * lambda / 2.0;
    for n in 3..=order {
        // The x^n coefficient of the equation reads
        //   2 g_n = n g_n + [x^n](F(G) G'),
        // where the bracket involves only g_2..g_{n-1}: F(G) has no terms
        // below x^2 and G' none below x^1, so index-n coefficients of G
        // (still zero here) never enter it.
        let c_n = rhs_coeff_at(&big_f, &g, n);
        g.coeffs[n] = c_n / (2.0 - n as f64);
    }
    Ok(g)
}

/// `[x^n] (F(G) * G')` using only coefficients of `G` below index `n`.
fn rhs_coeff_at(big_f: &SeriesPoly, g: &SeriesPoly, n: usize) -> f64 {
    let fg = big_f.compose(g).expect("G has no constant term").resized(n);
    let gp = g.differentiate().resized(n);
    let mut acc = 0.0;
    for j in 0..=n {
        acc += fg.coeff(j) * gp.coeff(n - j);
    }
    acc
}

/// Residual series `2G - (x + F(G)) G'` of a candidate `(g_series, f)` pair,
/// truncated at the order of `g_series`.  Identically zero coefficients
/// certify the pair satisfies the characteristic equation through that order.
pub fn chouikha_series_residual(g: &SeriesPoly, f: &SeriesPoly) -> Result<SeriesPoly, SeriesError> {
    let order = g.order();
    let big_f = f.integrate().resized(order);
    let x = SeriesPoly::identity(order);
    let rhs = x.add(&big_f.compose(g)?).mul(&g.differentiate().resized(order));
    Ok(g.scale(2.0).sub(&rhs))
}

/// Taylor coefficients of `G` measured from a solved potential without
/// touching the coefficient recursion, so the two can certify each other.
///
/// With `G = x^2 H`, the solution already evaluates `H`, `H' `, and
/// `H'' = W` analytically; the first three coefficients come from those
/// directly, and only the bridge from `W` to higher derivatives uses
/// central differences at shrinking radii `2^-k`, `k = 4..10`, cleaned up
/// by a Richardson table with best-entry selection.  Supports `order <= 8`
/// (differences up to `W''''`), which is all the cross-checks need.
pub fn g_series_from_solution(
    sol: &crate::forge::PotentialSolution,
    order: usize,
) -> Result<SeriesPoly, Error> {
    if !(2..=8).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "extraction supports orders 2..=8, got {order}"
        )));
    }
    let needed = 2.0 * 2f64.powi(-4);
    if sol.x_min() > -needed || sol.x_max() < needed {
        return Err(Error::InvalidInput(format!(
            "solved range [{}, {}] too narrow for the difference stencils (need +-{needed})",
            sol.x_min(),
            sol.x_max()
        )));
    }
    let k_top = order - 2;
    let mut h = vec![0.0; k_top + 1];
    h[0] = sol.h_at(0.0)?;
    if k_top >= 1 {
        h[1] = sol.h_deriv_at(0.0)?;
    }
    if k_top >= 2 {
        h[2] = sol.h_second_at(0.0)? / 2.0;
    }
    let mut w = |x: f64| sol.h_second_at(x);
    for m in 1..=k_top.saturating_sub(2) {
        // H^(m+2)(0) = W^(m)(0); divide by (m+2)! for the coefficient.
        let fact: f64 = (1..=(m + 2) as u64).map(|v| v as f64).product();
        h[m + 2] = richardson_derivative(&mut w, m)? / fact;
    }
    let mut g = vec![0.0; order + 1];
    g[2..(k_top + 3)].copy_from_slice(&h);
    Ok(SeriesPoly::new(g))
}

/// `m`-th derivative of `w` at 0 by second-order central differences on
/// radii `2^-k`, `k = 4..10`, with ratio-4 Richardson extrapolation and
/// selection of the tableau entry with the smallest neighbour disagreement.
fn richardson_derivative(
    w: &mut dyn FnMut(f64) -> Result<f64, EvalError>,
    m: usize,
) -> Result<f64, Error> {
    let stencil = |w: &mut dyn FnMut(f64) -> Result<f64, EvalError>,
                   r: f64|
     -> Result<f64, EvalError> {
        Ok(match m {
            1 => (w(r)? - w(-r)?) / (2.0 * r),
            2 => (w(r)? - 2.0 * w(0.0)? + w(-r)?) / (r * r),
            3 => (w(2.0 * r)? - 2.0 * w(r)? + 2.0 * w(-r)? - w(-2.0 * r)?) / (2.0 * r * r * r),
            4 => {
                (w(2.0 * r)? - 4.0 * w(r)? + 6.0 * w(0.0)? - 4.0 * w(-r)? + w(-2.0 * r)?)
                    / (r * r * r * r)
            }
            _ => unreachable!("stencils cover derivative orders 1..=4"),
        })
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::NAN;
    let mut best_err = f64::INFINITY;
    for (i, k) in (4..=10).enumerate() {
        let r = 2f64.powi(-k);
        let mut row = vec![stencil(w, r)?];
        for j in 1..=i {
            let pow = 4f64.powi(j as i32);
            let val = (pow * row[j - 1] - rows[i - 1][j - 1]) / (pow - 1.0);
            row.push(val);
        }
        if i == 0 {
            best = row[0];
        }
        for j in 1..row.len() {
            let err = (row[j] - row[j - 1]).abs().max((row[j] - rows[i - 1][j - 1]).abs());
            if err < best_err {
                best_err = err;
                best = row[j];
            }
        }
        rows.push(row);
    }
    Ok(best)
}
