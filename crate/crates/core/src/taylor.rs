//! Minimal Taylor approximations of the activations under an error budget.
//!
//! The number of expansion terms needed to stay within a 1% budget is the
//! hardware-cost proxy for every activation: each extra term costs pipeline
//! stages and multipliers (see [`crate::pipeline`]).
//!
//! Error is measured as the normalized max error: the largest absolute
//! deviation over a uniform grid divided by the largest magnitude of the
//! exact function over the same grid.

use serde::{Deserialize, Serialize};

use crate::activation::{eval_unchecked, validate_range, ActivationKind, Family};
use crate::{Error, Result};

/// Points in the uniform error-measurement grid.
pub const ERROR_GRID_POINTS: usize = 4097;
/// Default error budget.
pub const DEFAULT_BUDGET: f64 = 0.01;
/// Search limit for [`min_terms`].
pub const MAX_TERMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Polynomial variable: `x` itself, or FINER's substituted `z = (|x|+1)·x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    X,
    Z,
}

impl Variable {
    pub fn symbol(self) -> &'static str {
        match self {
            Variable::X => "x",
            Variable::Z => "z",
        }
    }

    #[inline]
    pub fn substitute(self, x: f64) -> f64 {
        match self {
            Variable::X => x,
            Variable::Z => (x.abs() + 1.0) * x,
        }
    }
}

/// A truncated power series `Σ c_d · v^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSeries {
    pub family: Family,
    pub parity: Parity,
    /// `(degree, coefficient)` pairs with strictly increasing degree.
    pub coeffs: Vec<(u32, f64)>,
    pub variable: Variable,
    pub range_half_width: f64,
    /// Normalized max error on `[-range, range]`.
    pub max_err: f64,
    /// Number of nonzero coefficients.
    pub term_count: usize,
    /// When set, the coefficients describe the `v > 0` branch only and the
    /// polynomial is extended by `p(-v) = -p(v)`. Used for the quadratic.
    pub sign_symmetric: bool,
}

impl TaylorSeries {
    pub fn max_degree(&self) -> u32 {
        self.coeffs.last().map_or(0, |&(d, _)| d)
    }

    /// Coefficient count when zero coefficients below the top degree are
    /// included as well.
    pub fn dense_term_count(&self) -> usize {
        self.max_degree() as usize + 1
    }

    pub fn coefficient(&self, degree: u32) -> f64 {
        self.coeffs
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(0.0, |&(_, c)| c)
    }

    /// True when the polynomial reproduces the activation exactly.
    pub fn is_exact(&self) -> bool {
        self.family == Family::Quad
    }

    pub fn accepted(&self, budget: f64) -> bool {
        self.max_err <= budget
    }

    fn check_invariants(&self) {
        debug_assert!(self.coeffs.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(match self.parity {
            Parity::Even => self.coeffs.iter().all(|&(d, _)| d % 2 == 0),
            Parity::Odd => self.coeffs.iter().all(|&(d, _)| d % 2 == 1),
            Parity::Mixed => true,
        });
        debug_assert_eq!(
            self.term_count,
            self.coeffs.iter().filter(|&&(_, c)| c != 0.0).count()
        );
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn sine_coeffs(terms: usize) -> Vec<(u32, f64)> {
    (0..terms as u32)
        .map(|k| (2 * k + 1, sign(k) / factorial(2 * k + 1)))
        .collect()
}

fn cosine_coeffs(terms: usize) -> Vec<(u32, f64)> {
    (0..terms as u32)
        .map(|k| (2 * k, sign(k) / factorial(2 * k)))
        .collect()
}

fn gaussian_coeffs(terms: usize) -> Vec<(u32, f64)> {
    (0..terms as u32)
        .map(|k| (2 * k, sign(k) / factorial(k)))
        .collect()
}

fn sinc_coeffs(terms: usize) -> Vec<(u32, f64)> {
    // numerator series of sin(x), each term divided by x
    sine_coeffs(terms)
        .into_iter()
        .map(|(d, c)| (d - 1, c))
        .collect()
}

fn sign(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Product of two sparse polynomials, keeping degrees `<= max_degree`.
pub fn truncated_product(a: &[(u32, f64)], b: &[(u32, f64)], max_degree: u32) -> Vec<(u32, f64)> {
    let mut dense = vec![0.0; max_degree as usize + 1];
    let mut present = vec![false; max_degree as usize + 1];
    for &(da, ca) in a {
        for &(db, cb) in b {
            let d = da + db;
            if d <= max_degree {
                dense[d as usize] += ca * cb;
                present[d as usize] = true;
            }
        }
    }
    dense
        .into_iter()
        .zip(present)
        .enumerate()
        .filter(|&(_, (_, p))| p)
        .map(|(d, (c, _))| (d as u32, c))
        .collect()
}

/// Exact Maclaurin coefficients of `kind` truncated to `terms` terms.
///
/// WIRE's polynomial is the product of the cosine and Gaussian series cut
/// back to `terms` even-degree coefficients. FINER's series is the sine
/// series in `z`. The quadratic has exactly two terms and zero error.
pub fn taylor_coeffs(kind: &ActivationKind, terms: usize) -> Result<TaylorSeries> {
    validate_range(kind.range_half_width)?;
    if terms == 0 {
        return Err(Error::InvalidArgument("a series needs at least one term".into()));
    }
    let (parity, coeffs, variable, sign_symmetric) = match kind.family {
        Family::Sine => (Parity::Odd, sine_coeffs(terms), Variable::X, false),
        Family::Gaussian => (Parity::Even, gaussian_coeffs(terms), Variable::X, false),
        Family::Sinc => (Parity::Even, sinc_coeffs(terms), Variable::X, false),
        Family::Finer => (Parity::Odd, sine_coeffs(terms), Variable::Z, false),
        Family::Wire => {
            let max_degree = 2 * (terms as u32 - 1);
            let product =
                truncated_product(&cosine_coeffs(terms), &gaussian_coeffs(terms), max_degree);
            (Parity::Even, product, Variable::X, false)
        }
        Family::Quad => {
            if terms != 2 {
                return Err(Error::Unsupported(format!(
                    "the quadratic activation is an exact 2-term polynomial, {terms} terms requested"
                )));
            }
            (Parity::Mixed, vec![(1, 2.0), (2, -1.0)], Variable::X, true)
        }
        Family::Relu => {
            return Err(Error::Unsupported("relu has no Taylor expansion".into()));
        }
    };
    let term_count = coeffs.iter().filter(|&&(_, c)| c != 0.0).count();
    let mut series = TaylorSeries {
        family: kind.family,
        parity,
        coeffs,
        variable,
        range_half_width: kind.range_half_width,
        max_err: 0.0,
        term_count,
        sign_symmetric,
    };
    series.max_err = if series.is_exact() {
        0.0
    } else {
        max_norm_error(&series, kind)?
    };
    series.check_invariants();
    Ok(series)
}

fn poly_eval(coeffs: &[(u32, f64)], v: f64) -> f64 {
    // Horner over the sparse degree list, highest degree first.
    let mut acc = 0.0;
    let mut prev_degree = match coeffs.last() {
        Some(&(d, _)) => d,
        None => return 0.0,
    };
    for &(d, c) in coeffs.iter().rev() {
        acc *= v.powi((prev_degree - d) as i32);
        acc += c;
        prev_degree = d;
    }
    acc * v.powi(prev_degree as i32)
}

/// Evaluates the series at `x`, substituting FINER's `z` first.
pub fn series_eval(s: &TaylorSeries, x: f64) -> f64 {
    let v = s.variable.substitute(x);
    if s.sign_symmetric && v < 0.0 {
        -poly_eval(&s.coeffs, -v)
    } else {
        poly_eval(&s.coeffs, v)
    }
}

/// Uniform grid of `points` samples over `[-h, h]`, endpoints included.
pub fn uniform_grid(h: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 * h / (points - 1) as f64;
    (0..points).map(move |i| if i == points - 1 { h } else { -h + step * i as f64 })
}

/// Normalized max error of `s` against the exact activation on the series range.
pub fn max_norm_error(s: &TaylorSeries, kind: &ActivationKind) -> Result<f64> {
    if s.family != kind.family {
        return Err(Error::InvalidArgument(format!(
            "series is for {} but activation is {}",
            s.family, kind.family
        )));
    }
    validate_range(s.range_half_width)?;
    let mut max_dev = 0.0f64;
    let mut max_mag = 0.0f64;
    for x in uniform_grid(s.range_half_width, ERROR_GRID_POINTS) {
        let exact = eval_unchecked(kind.family, x);
        max_dev = max_dev.max((series_eval(s, x) - exact).abs());
        max_mag = max_mag.max(exact.abs());
    }
    Ok(if max_mag == 0.0 { max_dev } else { max_dev / max_mag })
}

/// Smallest series whose normalized max error is within `budget`.
pub fn min_terms(kind: &ActivationKind, budget: f64) -> Result<TaylorSeries> {
    if !(budget > 0.0) {
        return Err(Error::InvalidArgument(format!("budget must be positive, got {budget}")));
    }
    if kind.family == Family::Quad {
        return taylor_coeffs(kind, 2);
    }
    for terms in 1..=MAX_TERMS {
        let s = taylor_coeffs(kind, terms)?;
        if s.max_err <= budget {
            return Ok(s);
        }
    }
    Err(Error::NoConvergence {
        family: kind.family.to_string(),
        budget,
        max_terms: MAX_TERMS,
    })
}

/// Magnitude of the first omitted term at the range edge, normalized the
/// same way as [`max_norm_error`]. Only defined for the alternating series
/// (sine, Gaussian, sinc).
pub fn first_omitted_term_bound(s: &TaylorSeries) -> Option<f64> {
    let h = s.range_half_width;
    let n = s.coeffs.len() as u32;
    let (omitted, max_mag) = match s.family {
        Family::Sine => (h.powi(2 * n as i32 + 1) / factorial(2 * n + 1), grid_max_abs(Family::Sine, h)),
        Family::Gaussian => (h.powi(2 * n as i32) / factorial(n), 1.0),
        Family::Sinc => (h.powi(2 * n as i32) / factorial(2 * n + 1), 1.0),
        _ => return None,
    };
    Some(omitted / max_mag)
}

fn grid_max_abs(family: Family, h: f64) -> f64 {
    uniform_grid(h, ERROR_GRID_POINTS)
        .map(|x| eval_unchecked(family, x).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(family: Family, h: f64) -> ActivationKind {
        ActivationKind::new(family, 1.0, h).unwrap()
    }

    #[test]
    fn sine_four_terms() {
        let s = taylor_coeffs(&kind(Family::Sine, 2.0), 4).unwrap();
        let degrees: Vec<u32> = s.coeffs.iter().map(|c| c.0).collect();
        assert_eq!(degrees, vec![1, 3, 5, 7]);
        assert_eq!(s.coefficient(1), 1.0);
        assert_eq!(s.coefficient(3), -1.0 / 6.0);
        assert_eq!(s.coefficient(5), 1.0 / 120.0);
        assert_eq!(s.coefficient(7), -1.0 / 5040.0);
        assert_eq!(s.parity, Parity::Odd);
        assert_eq!(series_eval(&s, 0.0), 0.0);
        assert!((series_eval(&s, 2.0) - 0.9079).abs() < 1e-4);
    }

    #[test]
    fn sinc_is_sine_divided_by_x() {
        let s = taylor_coeffs(&kind(Family::Sinc, 2.0), 4).unwrap();
        let degrees: Vec<u32> = s.coeffs.iter().map(|c| c.0).collect();
        assert_eq!(degrees, vec![0, 2, 4, 6]);
        assert_eq!(s.coefficient(6), -1.0 / 5040.0);
        // pointwise against the numerator series divided by x
        let sine = taylor_coeffs(&kind(Family::Sine, 2.0), 4).unwrap();
        for i in 1..100 {
            let x = i as f64 * 0.02;
            assert!((series_eval(&s, x) - series_eval(&sine, x) / x).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_constant_term() {
        for n in 1..10 {
            let s = taylor_coeffs(&kind(Family::Gaussian, 2.0), n).unwrap();
            assert_eq!(series_eval(&s, 0.0), 1.0);
        }
    }

    #[test]
    fn quad_series_is_exact() {
        let k = kind(Family::Quad, 2.0);
        let s = taylor_coeffs(&k, 2).unwrap();
        assert_eq!(s.coeffs, vec![(1, 2.0), (2, -1.0)]);
        assert_eq!(s.max_err, 0.0);
        assert_eq!(max_norm_error(&s, &k).unwrap(), 0.0);
        assert!(taylor_coeffs(&k, 3).is_err());
        assert_eq!(series_eval(&s, -1.0), -1.0);
        assert_eq!(series_eval(&s, 0.5), 0.75);
    }

    #[test]
    fn relu_and_zero_terms_rejected() {
        assert!(taylor_coeffs(&kind(Family::Relu, 2.0), 3).is_err());
        assert!(taylor_coeffs(&kind(Family::Sine, 2.0), 0).is_err());
        assert!(min_terms(&kind(Family::Sine, 2.0), 0.0).is_err());
    }

    #[test]
    fn sine_errors_from_grid_scan() {
        let s = taylor_coeffs(&kind(Family::Sine, 2.0), 4).unwrap();
        // remainder bound 2^9/9! with the next term partly cancelling
        assert!((s.max_err - 0.00136).abs() < 2e-5, "{}", s.max_err);
        // one term on [-1,1]: |1 - sin 1| / sin 1
        let s = taylor_coeffs(&kind(Family::Sine, 1.0), 1).unwrap();
        let expect = (1.0 - 1f64.sin()) / 1f64.sin();
        assert!((s.max_err - expect).abs() < 1e-12);
        assert!((s.max_err - 0.18840).abs() < 1e-4);
    }

    #[test]
    fn product_truncation() {
        let a = [(0, 1.0), (2, 2.0)];
        let b = [(0, 3.0), (2, 4.0)];
        assert_eq!(truncated_product(&a, &b, 2), vec![(0, 3.0), (2, 10.0)]);
        assert_eq!(
            truncated_product(&a, &b, 4),
            vec![(0, 3.0), (2, 10.0), (4, 8.0)]
        );
    }
}
