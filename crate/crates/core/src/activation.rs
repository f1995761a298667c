//! Activation functions used by the INR models.
//!
//! All functions here are evaluated in binary64. The frequency scale
//! `omega0` is stored on [`ActivationKind`] but applied by the network layer,
//! never inside [`af_eval`] / [`af_grad`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Period of the quadratic wave.
pub const QUAD_PERIOD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Piecewise quadratic `±x² + 2x`, period 4.
    Quad,
    /// `sin(x)`.
    Sine,
    /// `exp(-x²)`.
    Gaussian,
    /// Real Gabor wavelet `cos(x)·exp(-x²)`.
    Wire,
    /// Variable-periodic `sin((|x|+1)·x)`.
    Finer,
    /// `sin(x)/x`.
    Sinc,
    /// `max(0, x)`. Only used as a training control; it has no Taylor form.
    Relu,
}

impl Family {
    /// The six activation families compared in the hardware study.
    pub const STUDIED: [Family; 6] = [
        Family::Sine,
        Family::Gaussian,
        Family::Wire,
        Family::Finer,
        Family::Sinc,
        Family::Quad,
    ];

    /// Stable numeric id used by the `.qbin` model format.
    pub fn id(self) -> u8 {
        match self {
            Family::Quad => 0,
            Family::Sine => 1,
            Family::Gaussian => 2,
            Family::Wire => 3,
            Family::Finer => 4,
            Family::Sinc => 5,
            Family::Relu => 6,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Ok(match id {
            0 => Family::Quad,
            1 => Family::Sine,
            2 => Family::Gaussian,
            3 => Family::Wire,
            4 => Family::Finer,
            5 => Family::Sinc,
            6 => Family::Relu,
            _ => return Err(Error::Parse(format!("unknown activation id {id}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Quad => "quad",
            Family::Sine => "sine",
            Family::Gaussian => "gaussian",
            Family::Wire => "wire",
            Family::Finer => "finer",
            Family::Sinc => "sinc",
            Family::Relu => "relu",
        }
    }

    /// Frequency scale used when the caller gives none.
    pub fn default_omega0(self) -> f64 {
        match self {
            Family::Sine | Family::Finer | Family::Quad => 30.0,
            Family::Gaussian | Family::Wire | Family::Sinc => 10.0,
            Family::Relu => 1.0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "quad" | "quadinr" => Family::Quad,
            "sin" | "sine" | "siren" => Family::Sine,
            "gauss" | "gaussian" => Family::Gaussian,
            "wire" | "gabor" => Family::Wire,
            "finer" => Family::Finer,
            "sinc" => Family::Sinc,
            "relu" => Family::Relu,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown activation '{other}' (expected quad, sin, gauss, wire, finer, sinc or relu)"
                )))
            }
        })
    }
}

/// An activation family together with its scale and analysis range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationKind {
    pub family: Family,
    pub omega0: f64,
    /// Half-width of the input interval used for hardware analysis, 1 or 2.
    pub range_half_width: f64,
}

impl ActivationKind {
    pub fn new(family: Family, omega0: f64, range_half_width: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega0 must be positive and finite, got {omega0}"
            )));
        }
        validate_range(range_half_width)?;
        Ok(Self {
            family,
            omega0,
            range_half_width,
        })
    }

    /// Family with its default `omega0` on the wide range.
    pub fn of(family: Family) -> Self {
        Self {
            family,
            omega0: family.default_omega0(),
            range_half_width: 2.0,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        af_eval(self.family, x)
    }

    pub fn grad(&self, x: f64) -> Result<f64> {
        af_grad(self.family, x)
    }
}

/// Only the two analysis ranges `[-1, 1]` and `[-2, 2]` are supported.
pub fn validate_range(range_half_width: f64) -> Result<()> {
    if range_half_width == 1.0 || range_half_width == 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "range half-width must be 1 or 2, got {range_half_width}"
        )))
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite activation input {x}")))
    }
}

/// Round half to even without a libm call. Below 2^52, adding and
/// removing 2^52 leaves a unit ulp, so the FPU rounding mode does the work;
/// anything larger is already an integer.
#[inline]
fn round_even(q: f64) -> f64 {
    const TWO52: f64 = 4_503_599_627_370_496.0;
    let a = q.abs();
    let r = if a < TWO52 { (a + TWO52) - TWO52 } else { a };
    r.copysign(q)
}

/// Maps `x` onto the representative interval `(-2, 2]` of the quadratic
/// wave, using `x - 4·round(x/4)` with ties to even.
pub fn quad_wrap(x: f64) -> f64 {
    let w = x - QUAD_PERIOD * round_even(x / QUAD_PERIOD);
    w + if w <= -2.0 { QUAD_PERIOD } else { 0.0 }
}

// Both branches fold into one expression: x² + 2x = x(2 − |x|) for x ≤ 0.
#[inline]
fn quad_base(w: f64) -> f64 {
    w * (2.0 - w.abs())
}

#[inline]
fn quad_base_grad(w: f64) -> f64 {
    2.0 - 2.0 * w.abs()
}

/// Periodic piecewise quadratic activation.
pub fn quad_eval(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(quad_base(quad_wrap(x)))
}

/// Derivative of [`quad_eval`]; continuous everywhere, in `[-2, 2]`.
pub fn quad_grad(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(quad_base_grad(quad_wrap(x)))
}

/// Evaluates the activation `family` at `x`.
pub fn af_eval(family: Family, x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(eval_unchecked(family, x))
}

/// Exact derivative of [`af_eval`].
pub fn af_grad(family: Family, x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(grad_unchecked(family, x))
}

/// Expands `$body` once per family with `$f` bound to a closure for that
/// family's `$func`, so element loops compile without a per-element match.
macro_rules! per_family {
    ($family:expr, $func:ident, |$f:ident| $body:expr) => {{
        use $crate::activation::Family as F;
        match $family {
            F::Quad => { let $f = |x: f64| $crate::activation::$func(F::Quad, x); $body }
            F::Sine => { let $f = |x: f64| $crate::activation::$func(F::Sine, x); $body }
            F::Gaussian => { let $f = |x: f64| $crate::activation::$func(F::Gaussian, x); $body }
            F::Wire => { let $f = |x: f64| $crate::activation::$func(F::Wire, x); $body }
            F::Finer => { let $f = |x: f64| $crate::activation::$func(F::Finer, x); $body }
            F::Sinc => { let $f = |x: f64| $crate::activation::$func(F::Sinc, x); $body }
            F::Relu => { let $f = |x: f64| $crate::activation::$func(F::Relu, x); $body }
        }
    }};
}
pub(crate) use per_family;

/// [`af_eval`] without the finiteness check, for hot loops that validate
/// their inputs elsewhere. Non-finite inputs propagate as NaN.
#[inline(always)]
pub(crate) fn eval_unchecked(family: Family, x: f64) -> f64 {
    match family {
        Family::Quad => quad_base(quad_wrap(x)),
        Family::Sine => x.sin(),
        Family::Gaussian => (-x * x).exp(),
        Family::Wire => x.cos() * (-x * x).exp(),
        Family::Finer => ((x.abs() + 1.0) * x).sin(),
        Family::Sinc => {
            if x == 0.0 {
                1.0
            } else {
                x.sin() / x
            }
        }
        Family::Relu => x.max(0.0),
    }
}

#[inline(always)]
pub(crate) fn grad_unchecked(family: Family, x: f64) -> f64 {
    match family {
        Family::Quad => quad_base_grad(quad_wrap(x)),
        Family::Sine => x.cos(),
        Family::Gaussian => -2.0 * x * (-x * x).exp(),
        Family::Wire => -(x.sin() + 2.0 * x * x.cos()) * (-x * x).exp(),
        Family::Finer => ((x.abs() + 1.0) * x).cos() * (2.0 * x.abs() + 1.0),
        Family::Sinc => sinc_grad(x),
        Family::Relu => {
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn sinc_grad(x: f64) -> f64 {
    // x·cos x − sin x cancels badly near zero; use the series there.
    if x.abs() < 1e-2 {
        let x2 = x * x;
        -x / 3.0 + x * x2 / 30.0 - x * x2 * x2 / 840.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}
