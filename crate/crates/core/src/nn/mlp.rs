use ndarray::{Array2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::autodiff::{Tape, Var};
use crate::activation::{eval_unchecked, per_family, ActivationKind};
use crate::{Error, Result};

/// Fully connected INR: `φ(ω0·(W·x + b))` on every layer but the last,
/// which is a plain affine map.
///
/// Parameters are stored in binary32, weights row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f32>>,
    pub biases: Vec<Vec<f32>>,
    pub activation: ActivationKind,
    pub omega0_first: f64,
    pub omega0_hidden: f64,
}

/// Binary64 working copy of the parameters, weights laid out `[in][out]`
/// so a batch of row vectors multiplies on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array2<f64>>,
}

impl Params {
    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn slot(&mut self, mut index: usize) -> &mut f64 {
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            if index < w.len() {
                return w.iter_mut().nth(index).expect("index in range");
            }
            index -= w.len();
            if index < b.len() {
                return b.iter_mut().nth(index).expect("index in range");
            }
            index -= b.len();
        }
        panic!("parameter index out of range")
    }

    /// Flat parameter access in layer order, weights before biases.
    pub fn get(&mut self, index: usize) -> f64 {
        *self.slot(index)
    }

    pub fn set(&mut self, index: usize, value: f64) {
        *self.slot(index) = value;
    }

    /// Rounds every parameter to the nearest binary32 value.
    pub fn round_to_f32(&mut self) {
        for a in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            a.mapv_inplace(|v| v as f32 as f64);
        }
    }
}

/// Bound of the uniform initializer for layers after the first.
pub fn hidden_init_bound(fan_in: usize, omega0: f64) -> f64 {
    (6.0 / fan_in as f64).sqrt() / omega0
}

/// Bound of the uniform initializer for the first layer.
pub fn first_init_bound(fan_in: usize) -> f64 {
    1.0 / fan_in as f64
}

impl MlpModel {
    /// Seeded initialization: the first layer is uniform on `±1/fan_in`,
    /// later layers on `±√(6/fan_in)/ω0` for every activation family.
    pub fn init(
        layer_dims: &[usize],
        activation: ActivationKind,
        omega0_first: f64,
        omega0_hidden: f64,
        seed: u64,
    ) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "layer dims must have at least two positive entries, got {layer_dims:?}"
            )));
        }
        for w in [omega0_first, omega0_hidden] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("omega0 must be positive, got {w}")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, pair) in layer_dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = if l == 0 {
                first_init_bound(fan_in)
            } else {
                hidden_init_bound(fan_in, omega0_hidden)
            };
            let dist = Uniform::new_inclusive(-bound, bound);
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| dist.sample(&mut rng) as f32)
                    .collect(),
            );
            biases.push((0..fan_out).map(|_| dist.sample(&mut rng) as f32).collect());
        }
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            activation,
            omega0_first,
            omega0_hidden,
        })
    }

    /// `in → width × depth → out`.
    pub fn architecture(input: usize, width: usize, depth: usize, output: usize) -> Vec<usize> {
        std::iter::once(input)
            .chain(std::iter::repeat(width).take(depth))
            .chain(std::iter::once(output))
            .collect()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("non-empty dims")
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Whether layer `l` is followed by the activation.
    pub fn is_activated(&self, l: usize) -> bool {
        l + 1 < self.num_layers()
    }

    /// Frequency scale applied before the activation of layer `l`.
    pub fn layer_omega0(&self, l: usize) -> f64 {
        if l == 0 {
            self.omega0_first
        } else {
            self.omega0_hidden
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_layers();
        if self.weights.len() != n || self.biases.len() != n {
            return Err(Error::DimensionMismatch("layer count mismatch".into()));
        }
        for (l, pair) in self.layer_dims.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] || self.biases[l].len() != pair[1] {
                return Err(Error::DimensionMismatch(format!(
                    "layer {l} parameters do not match dims {}x{}",
                    pair[1], pair[0]
                )));
            }
        }
        if self
            .weights
            .iter()
            .chain(self.biases.iter())
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::Domain("non-finite model parameter".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, pair) in self.layer_dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let w = Array2::from_shape_fn((fan_in, fan_out), |(i, o)| {
                self.weights[l][o * fan_in + i] as f64
            });
            weights.push(w);
            biases.push(Array2::from_shape_fn((1, fan_out), |(_, o)| self.biases[l][o] as f64));
        }
        Params { weights, biases }
    }

    /// Copies `params` back, rounding to binary32.
    pub fn set_params(&mut self, params: &Params) {
        for (l, pair) in self.layer_dims.windows(2).enumerate() {
            let fan_in = pair[0];
            for ((i, o), &v) in params.weights[l].indexed_iter() {
                self.weights[l][o * fan_in + i] = v as f32;
            }
            for (o, &v) in params.biases[l].iter().enumerate() {
                self.biases[l][o] = v as f32;
            }
        }
    }
}

fn check_coords(model: &MlpModel, coords: &Array2<f64>) -> Result<()> {
    if coords.ncols() != model.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "coordinates have {} components, model expects {}",
            coords.ncols(),
            model.input_dim()
        )));
    }
    Ok(())
}

/// Binary64 evaluation of `model` on a batch of row-vector coordinates.
pub fn forward(model: &MlpModel, coords: &Array2<f64>) -> Result<Array2<f64>> {
    check_coords(model, coords)?;
    let p = model.params();
    Ok(forward_params(model, &p, coords))
}

pub(crate) fn forward_params(model: &MlpModel, p: &Params, coords: &Array2<f64>) -> Array2<f64> {
    let family = model.activation.family;
    let mut h = coords.to_owned();
    for l in 0..model.num_layers() {
        h = h.dot(&p.weights[l]) + &p.biases[l];
        if model.is_activated(l) {
            let w0 = model.layer_omega0(l);
            per_family!(family, eval_unchecked, |phi| h.mapv_inplace(|v| phi(w0 * v)));
        }
    }
    h
}

/// Records the network on `tape`; returns the parameter leaves in layer
/// order (`w0, b0, w1, b1, …`) and the output node.
pub fn record(
    tape: &mut Tape,
    model: &MlpModel,
    p: &Params,
    coords: &Array2<f64>,
) -> Result<(Vec<Var>, Var)> {
    let mut leaves = Vec::with_capacity(2 * model.num_layers());
    let mut h = tape.constant(coords.to_owned());
    for l in 0..model.num_layers() {
        let w = tape.param(p.weights[l].clone());
        let b = tape.param(p.biases[l].clone());
        leaves.push(w);
        leaves.push(b);
        let z = tape.matmul(h, w)?;
        h = if model.is_activated(l) {
            tape.affine_activation(z, b, model.layer_omega0(l), model.activation.family)?
        } else {
            tape.add_row(z, b)?
        };
    }
    Ok((leaves, h))
}

/// MSE loss and its gradient for every parameter.
pub fn loss_and_grads(
    model: &MlpModel,
    p: &Params,
    coords: &Array2<f64>,
    targets: &Array2<f64>,
) -> Result<(f64, Params)> {
    check_coords(model, coords)?;
    let mut tape = Tape::new();
    let (leaves, out) = record(&mut tape, model, p, coords)?;
    let loss_var = tape.mse(out, targets)?;
    let loss = tape.value(loss_var)[[0, 0]];
    if !representable(loss) {
        return Err(non_finite_diagnostic(model, p, coords, loss));
    }
    let mut grads = tape.backward(loss_var)?;
    let mut gw = Vec::new();
    let mut gb = Vec::new();
    for pair in leaves.chunks(2) {
        gw.push(grads.take(pair[0]).expect("weight gradient"));
        gb.push(grads.take(pair[1]).expect("bias gradient"));
    }
    Ok((
        loss,
        Params {
            weights: gw,
            biases: gb,
        },
    ))
}

/// MSE loss only.
pub fn loss(model: &MlpModel, p: &Params, coords: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    let out = forward_params(model, p, coords);
    let n = out.len().max(1) as f64;
    out.iter()
        .zip(targets.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}

fn non_finite_diagnostic(model: &MlpModel, p: &Params, coords: &Array2<f64>, loss: f64) -> Error {
    let family = model.activation.family;
    let mut h = coords.to_owned();
    for l in 0..model.num_layers() {
        h = h.dot(&p.weights[l]) + &p.biases[l];
        if model.is_activated(l) {
            let w0 = model.layer_omega0(l);
            h.mapv_inplace(|v| eval_unchecked(family, w0 * v));
        }
        if let Some(bad) = h.iter().find(|v| !representable(**v)) {
            return Error::NonFinite {
                layer: l,
                detail: format!("activation value {bad}, loss {loss}"),
            };
        }
    }
    Error::NonFinite {
        layer: model.num_layers(),
        detail: format!("loss {loss} with finite outputs (targets non-finite?)"),
    }
}

/// Values past the binary32 range are treated as overflow: the deployed
/// model runs in single precision even though training accumulates in f64.
fn representable(v: f64) -> bool {
    v.is_finite() && v.abs() <= f32::MAX as f64
}

/// Adder-tree width for each layer of a strict binary32 evaluation.
///
/// Products of a dot product are zero-padded to the layer's lane count and
/// summed by a balanced pairwise tree, adjacent lanes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOrder {
    pub lanes: Vec<usize>,
}

impl ReductionOrder {
    /// Input layer uses the smallest power of two covering its fan-in; every
    /// other layer uses the full `mac_width` lanes.
    pub fn accelerator(model: &MlpModel, mac_width: usize) -> Self {
        let lanes = (0..model.num_layers())
            .map(|l| {
                if l == 0 {
                    model.input_dim().next_power_of_two()
                } else {
                    mac_width
                }
            })
            .collect();
        Self { lanes }
    }
}

/// Balanced pairwise sum, recursively splitting in halves. `values.len()`
/// must be a power of two.
pub fn pairwise_sum(values: &[f32]) -> f32 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            debug_assert!(n.is_power_of_two());
            pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..])
        }
    }
}

/// Strict binary32 evaluation with a fixed reduction order: per neuron the
/// lane products `w·x`, a pairwise tree over `order.lanes[l]` lanes, `+ b`,
/// `· ω0` and `af` on activated layers. `coords` is row-major `n × d`; the
/// result is row-major `n × c`.
pub fn forward_binary32(
    model: &MlpModel,
    coords: &[f32],
    order: &ReductionOrder,
    af: &dyn Fn(f32) -> f32,
) -> Result<Vec<f32>> {
    let d = model.input_dim();
    if coords.len() % d != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinate values is not a multiple of {d}",
            coords.len()
        )));
    }
    if order.lanes.len() != model.num_layers() {
        return Err(Error::DimensionMismatch("reduction order layer count".into()));
    }
    for (l, &lanes) in order.lanes.iter().enumerate() {
        if !lanes.is_power_of_two() || lanes < model.layer_dims[l] {
            return Err(Error::Capacity(format!(
                "layer {l} fan-in {} does not fit {lanes} lanes",
                model.layer_dims[l]
            )));
        }
    }
    let mut out = Vec::with_capacity(coords.len() / d * model.output_dim());
    let mut lanes_buf = Vec::new();
    for point in coords.chunks(d) {
        let mut h: Vec<f32> = point.to_vec();
        for l in 0..model.num_layers() {
            let fan_in = model.layer_dims[l];
            let fan_out = model.layer_dims[l + 1];
            let w0 = model.layer_omega0(l) as f32;
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let row = &model.weights[l][o * fan_in..(o + 1) * fan_in];
                lanes_buf.clear();
                lanes_buf.extend(row.iter().zip(&h).map(|(w, x)| w * x));
                lanes_buf.resize(order.lanes[l], 0.0);
                let mut y = pairwise_sum(&lanes_buf) + model.biases[l][o];
                if model.is_activated(l) {
                    y = af(w0 * y);
                }
                next.push(y);
            }
            h = next;
        }
        out.extend_from_slice(&h);
    }
    Ok(out)
}

/// Row-wise binary64 view of the model output for a batch.
pub fn predict_rows(model: &MlpModel, coords: &Array2<f64>) -> Result<Vec<Vec<f64>>> {
    let out = forward(model, coords)?;
    Ok(out.axis_iter(Axis(0)).map(|r| r.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{quad_eval, Family};

    fn quad() -> ActivationKind {
        ActivationKind::new(Family::Quad, 1.0, 2.0).unwrap()
    }

    #[test]
    fn init_is_deterministic() {
        let dims = MlpModel::architecture(2, 16, 2, 3);
        let a = MlpModel::init(&dims, quad(), 30.0, 30.0, 7).unwrap();
        let b = MlpModel::init(&dims, quad(), 30.0, 30.0, 7).unwrap();
        let c = MlpModel::init(&dims, quad(), 30.0, 30.0, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.weights, c.weights);
        let bound = hidden_init_bound(16, 30.0) as f32;
        assert!(a.weights[1].iter().all(|w| w.abs() <= bound));
        assert!(a.weights[0].iter().all(|w| w.abs() <= 0.5));
    }

    #[test]
    fn init_bound_closed_form() {
        assert!((hidden_init_bound(256, 30.0) - 0.005103).abs() < 1e-6);
    }

    #[test]
    fn zero_model_outputs_zero() {
        let dims = MlpModel::architecture(2, 8, 2, 3);
        let mut m = MlpModel::init(&dims, quad(), 30.0, 30.0, 1).unwrap();
        for v in m.weights.iter_mut().chain(m.biases.iter_mut()) {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        let coords = Array2::from_shape_fn((5, 2), |(i, j)| (i as f64 - 2.0) / 2.0 * (j as f64 + 1.0) / 2.0);
        let out = forward(&m, &coords).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_chain_applies_quad() {
        let m = MlpModel {
            layer_dims: vec![1, 1, 1],
            weights: vec![vec![1.0], vec![1.0]],
            biases: vec![vec![0.0], vec![0.0]],
            activation: quad(),
            omega0_first: 1.0,
            omega0_hidden: 1.0,
        };
        let out = forward(&m, &Array2::from_elem((1, 1), 0.5)).unwrap();
        assert_eq!(out[[0, 0]], quad_eval(0.5).unwrap());
        assert_eq!(out[[0, 0]], 0.75);
    }

    #[test]
    fn dimension_mismatch() {
        let dims = MlpModel::architecture(2, 4, 1, 3);
        let m = MlpModel::init(&dims, quad(), 1.0, 1.0, 1).unwrap();
        assert!(forward(&m, &Array2::zeros((3, 3))).is_err());
        assert!(MlpModel::init(&[2], quad(), 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn final_bias_gradient_is_twice_mean_residual() {
        let dims = MlpModel::architecture(2, 6, 1, 1);
        let m = MlpModel::init(&dims, quad(), 2.0, 2.0, 3).unwrap();
        let coords = Array2::from_shape_fn((10, 2), |(i, j)| ((i * 3 + j) as f64 * 0.37).sin());
        let targets = Array2::from_shape_fn((10, 1), |(i, _)| i as f64 / 10.0);
        let p = m.params();
        let (_, g) = loss_and_grads(&m, &p, &coords, &targets).unwrap();
        let pred = forward(&m, &coords).unwrap();
        let mean_residual = (&pred - &targets).mean().unwrap();
        assert!((g.biases[1][[0, 0]] - 2.0 * mean_residual).abs() < 1e-12);
    }

    #[test]
    fn zero_model_zero_targets_zero_gradients() {
        let dims = MlpModel::architecture(2, 4, 2, 3);
        let mut m = MlpModel::init(&dims, quad(), 1.0, 1.0, 1).unwrap();
        for v in m.weights.iter_mut().chain(m.biases.iter_mut()) {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        let coords = Array2::from_elem((4, 2), 0.3);
        let (loss, g) = loss_and_grads(&m, &m.params(), &coords, &Array2::zeros((4, 3))).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.weights.iter().chain(g.biases.iter()).flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn pairwise_order() {
        // ((a+b)+(c+d)) differs from left-to-right for these values
        let v = [1e8f32, 1.0, -1e8, 1.0];
        assert_eq!(pairwise_sum(&v), (1e8f32 + 1.0) + (-1e8f32 + 1.0));
    }

    #[test]
    fn flat_param_access() {
        let dims = MlpModel::architecture(2, 3, 1, 1);
        let m = MlpModel::init(&dims, quad(), 1.0, 1.0, 5).unwrap();
        let mut p = m.params();
        assert_eq!(p.num_params(), m.num_params());
        let last = p.num_params() - 1;
        assert_eq!(p.get(last), m.biases[1][0] as f64);
        p.set(0, 0.25);
        assert_eq!(p.weights[0][[0, 0]], 0.25);
    }
}
