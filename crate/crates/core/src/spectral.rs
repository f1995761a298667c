//! Fourier content of the quadratic wave and single-neuron tangent kernels.
//!
//! The quadratic activation is an odd, period-4 function, so its Fourier
//! series is a pure sine series over odd harmonics with
//! `b_n = 32 / (π³ n³)`. [`fourier_b_numeric`] integrates the activation
//! directly and serves as an independent check on the closed form.
//!
//! For a single neuron `f(x) = φ(ω0 (W·x + b))` the tangent kernel over
//! `θ = (W, b)` is `ω0² φ'(ω0 z1) φ'(ω0 z2) (x1·x2 + 1)`.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::Serialize;

use crate::activation::{eval_unchecked, grad_unchecked, quad_eval, ActivationKind};
use crate::nn::autodiff::Tape;
use crate::{Error, Result};

/// Period of the quadratic wave.
pub const PERIOD: f64 = 4.0;
/// Default quadrature grid.
pub const DEFAULT_POINTS: usize = 4097;
pub const MIN_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierCoefficient {
    pub n: u32,
    pub a_n: f64,
    pub b_n: f64,
    pub period: f64,
}

pub fn fourier_b_analytic(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("harmonic index must be at least 1".into()));
    }
    if n % 2 == 0 {
        return Ok(0.0);
    }
    let n = n as f64;
    Ok(32.0 / (PI.powi(3) * n.powi(3)))
}

fn simpson(points: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    if points < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least {MIN_POINTS} points, got {points}"
        )));
    }
    // Simpson wants an even number of intervals
    let points = if points % 2 == 0 { points + 1 } else { points };
    let intervals = points - 1;
    let (a, b) = (-PERIOD / 2.0, PERIOD / 2.0);
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    Ok(acc * h / 3.0)
}

fn quad(x: f64) -> f64 {
    quad_eval(x).expect("finite grid point")
}

/// `b_n = (2/T) ∫ φ(x) sin(2πnx/T) dx` over one period, by composite Simpson.
pub fn fourier_b_numeric(n: u32, points: usize) -> Result<f64> {
    let k = 2.0 * PI * n as f64 / PERIOD;
    Ok(2.0 / PERIOD * simpson(points, |x| quad(x) * (k * x).sin())?)
}

/// Cosine coefficient, same quadrature. Zero for an odd function.
pub fn fourier_a_numeric(n: u32, points: usize) -> Result<f64> {
    let k = 2.0 * PI * n as f64 / PERIOD;
    Ok(2.0 / PERIOD * simpson(points, |x| quad(x) * (k * x).cos())?)
}

pub fn fourier_coefficient(n: u32, points: usize) -> Result<FourierCoefficient> {
    if n == 0 {
        return Err(Error::Domain("harmonic index must be at least 1".into()));
    }
    Ok(FourierCoefficient {
        n,
        a_n: fourier_a_numeric(n, points)?,
        b_n: fourier_b_numeric(n, points)?,
        period: PERIOD,
    })
}

/// Sum of the first `k_max + 1` odd harmonics, `n = 1, 3, …, 2 k_max + 1`.
pub fn fourier_partial_sum(x: f64, k_max: u32) -> f64 {
    (0..=k_max)
        .map(|k| {
            let n = 2 * k + 1;
            let b = 32.0 / (PI.powi(3) * (n as f64).powi(3));
            b * (PI * n as f64 * x / 2.0).sin()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NtkSample {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub z1: f64,
    pub z2: f64,
    pub theta: f64,
}

/// How the constant term of the quadratic closed form is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadNtkForm {
    /// `(2ω0²z1 + ω0)(2ω0²z2 + ω0)(x1·x2 + 1)`, exactly as usually quoted.
    Printed,
    /// Differentiated per branch: `ω0 φ'(ω0 z) = ±2ω0²z + 2ω0`.
    ChainRule,
}

pub fn dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

/// Pre-activation `z = W·x + b`.
pub fn preactivation(w: &[f64], b: f64, x: &[f64]) -> Result<f64> {
    Ok(dot(w, x)? + b)
}

fn quad_factor(omega0: f64, z: f64, form: QuadNtkForm) -> f64 {
    match form {
        QuadNtkForm::Printed => 2.0 * omega0 * omega0 * z + omega0,
        QuadNtkForm::ChainRule => {
            let s = if omega0 * z <= 0.0 { 1.0 } else { -1.0 };
            s * 2.0 * omega0 * omega0 * z + 2.0 * omega0
        }
    }
}

pub fn ntk_closed_quad(
    omega0: f64,
    z1: f64,
    z2: f64,
    x1: &[f64],
    x2: &[f64],
    form: QuadNtkForm,
) -> Result<f64> {
    Ok(quad_factor(omega0, z1, form) * quad_factor(omega0, z2, form) * (dot(x1, x2)? + 1.0))
}

pub fn ntk_closed_siren(omega0: f64, z1: f64, z2: f64, x1: &[f64], x2: &[f64]) -> Result<f64> {
    Ok(omega0 * omega0 * (omega0 * z1).cos() * (omega0 * z2).cos() * (dot(x1, x2)? + 1.0))
}

/// Gradient of the single-neuron output with respect to `(W, b)`, taken on
/// the autodiff tape.
fn param_gradient(act: &ActivationKind, w: &[f64], b: f64, x: &[f64]) -> Result<Vec<f64>> {
    let d = w.len();
    let mut tape = Tape::new();
    let xv = tape.constant(Array2::from_shape_vec((1, d), x.to_vec()).expect("row vector"));
    let wv = tape.param(Array2::from_shape_vec((d, 1), w.to_vec()).expect("column vector"));
    let bv = tape.param(Array2::from_elem((1, 1), b));
    let z = tape.matmul(xv, wv)?;
    let z = tape.add_row(z, bv)?;
    let u = tape.scale(z, act.omega0);
    let f = tape.activation(u, act.family);
    let grads = tape.backward(f)?;
    let mut g: Vec<f64> = grads.get(wv).map(|a| a.iter().copied().collect()).unwrap_or(vec![0.0; d]);
    g.push(grads.get(bv).map_or(0.0, |a| a[[0, 0]]));
    Ok(g)
}

/// `Σ_θ ∂f(x1)/∂θ · ∂f(x2)/∂θ` for `f(x) = φ(ω0 (W·x + b))`.
pub fn ntk_empirical(act: &ActivationKind, w: &[f64], b: f64, x1: &[f64], x2: &[f64]) -> Result<f64> {
    if w.len() != x1.len() || w.len() != x2.len() {
        return Err(Error::DimensionMismatch(format!(
            "weights of length {} for inputs of length {} and {}",
            w.len(),
            x1.len(),
            x2.len()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() || !act.omega0.is_finite() {
        return Err(Error::Domain("non-finite neuron parameter".into()));
    }
    let g1 = param_gradient(act, w, b, x1)?;
    let g2 = param_gradient(act, w, b, x2)?;
    let theta = dot(&g1, &g2)?;
    if !theta.is_finite() {
        return Err(Error::NonFinite {
            layer: 0,
            detail: format!("kernel value {theta}"),
        });
    }
    Ok(theta)
}

/// Same kernel from the analytic derivative, no tape involved.
pub fn ntk_analytic(act: &ActivationKind, w: &[f64], b: f64, x1: &[f64], x2: &[f64]) -> Result<f64> {
    let (z1, z2) = (preactivation(w, b, x1)?, preactivation(w, b, x2)?);
    let w0 = act.omega0;
    Ok(w0
        * w0
        * grad_unchecked(act.family, w0 * z1)
        * grad_unchecked(act.family, w0 * z2)
        * (dot(x1, x2)? + 1.0))
}

/// Central finite differences of the parameter gradient, for checking the
/// tape on smooth activations.
pub fn ntk_finite_difference(
    act: &ActivationKind,
    w: &[f64],
    b: f64,
    x1: &[f64],
    x2: &[f64],
    h: f64,
) -> Result<f64> {
    let f = |w: &[f64], b: f64, x: &[f64]| -> Result<f64> {
        Ok(eval_unchecked(act.family, act.omega0 * preactivation(w, b, x)?))
    };
    let grad = |x: &[f64]| -> Result<Vec<f64>> {
        let mut g = Vec::with_capacity(w.len() + 1);
        for i in 0..w.len() {
            let (mut wp, mut wm) = (w.to_vec(), w.to_vec());
            wp[i] += h;
            wm[i] -= h;
            g.push((f(&wp, b, x)? - f(&wm, b, x)?) / (2.0 * h));
        }
        g.push((f(w, b + h, x)? - f(w, b - h, x)?) / (2.0 * h));
        Ok(g)
    };
    dot(&grad(x1)?, &grad(x2)?)
}

/// Kernel values along an ω0 grid with `z1 = z2 = z`.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingContrast {
    pub z: f64,
    pub omega0: Vec<f64>,
    pub quad_printed: Vec<f64>,
    pub quad_chain_rule: Vec<f64>,
    pub siren: Vec<f64>,
    /// `ω0 cos(ω0 z)`, the per-input factor of the sine kernel.
    pub siren_factor: Vec<f64>,
    pub quad_printed_monotone: bool,
    pub siren_monotone: bool,
    pub siren_kernel_sign_changes: usize,
    pub siren_factor_sign_changes: usize,
}

pub fn omega0_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] > p[0])
}

fn monotone(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] >= p[0]) || v.windows(2).all(|p| p[1] <= p[0])
}

fn sign_changes(v: &[f64]) -> usize {
    v.windows(2)
        .filter(|p| p[0] != 0.0 && p[1] != 0.0 && (p[0] < 0.0) != (p[1] < 0.0))
        .count()
}

/// Scalar inputs `x1 = x2 = 0`, so the `(x1·x2 + 1)` factor is 1.
pub fn scaling_contrast(z: f64, grid: &[f64]) -> ScalingContrast {
    let zero = [0.0];
    let quad_printed: Vec<f64> = grid
        .iter()
        .map(|&w| ntk_closed_quad(w, z, z, &zero, &zero, QuadNtkForm::Printed).unwrap())
        .collect();
    let quad_chain_rule = grid
        .iter()
        .map(|&w| ntk_closed_quad(w, z, z, &zero, &zero, QuadNtkForm::ChainRule).unwrap())
        .collect();
    let siren: Vec<f64> = grid
        .iter()
        .map(|&w| ntk_closed_siren(w, z, z, &zero, &zero).unwrap())
        .collect();
    let siren_factor: Vec<f64> = grid.iter().map(|&w| w * (w * z).cos()).collect();
    ScalingContrast {
        z,
        omega0: grid.to_vec(),
        quad_printed_monotone: strictly_increasing(&quad_printed),
        siren_monotone: monotone(&siren),
        siren_kernel_sign_changes: sign_changes(&siren),
        siren_factor_sign_changes: sign_changes(&siren_factor),
        quad_printed,
        quad_chain_rule,
        siren,
        siren_factor,
    }
}

/// Checks the sine-series claim that the activation is well approximated by
/// its leading harmonic: returns the max deviation between the activation
/// and `b1 sin(πx/2)` on a uniform grid over one period.
pub fn leading_harmonic_residual(points: usize) -> f64 {
    let b1 = 32.0 / PI.powi(3);
    (0..points)
        .map(|i| {
            let x = -2.0 + 4.0 * i as f64 / (points - 1) as f64;
            (quad(x) - b1 * (PI * x / 2.0).sin()).abs()
        })
        .fold(0.0, f64::max)
}
