//! Tape-based reverse-mode automatic differentiation over dense matrices.
//!
//! Nodes are appended to the tape in evaluation order, so a single reverse
//! sweep visits every node after all of its consumers.

use ndarray::{Array2, Axis};

use crate::activation::{eval_unchecked, grad_unchecked, per_family, Family};
use crate::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    /// `a + bias` with a `1 × m` bias broadcast over rows.
    AddRow(Var, Var),
    Scale(Var, f64),
    Activation(Var, Family),
    /// `φ(ω0 (a + bias))` in one pass; the pre-activation is recomputed
    /// on the way back instead of stored.
    AffineActivation {
        a: Var,
        bias: Var,
        omega0: f64,
        family: Family,
    },
    /// Mean squared error against a constant target.
    Mse(Var, Array2<f64>),
}

#[derive(Debug)]
struct Node {
    value: Array2<f64>,
    op: Op,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar output with respect to every node that needs one.
#[derive(Debug)]
pub struct Gradients(Vec<Option<Array2<f64>>>);

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Array2<f64>> {
        self.0[v.0].as_ref()
    }

    pub fn take(&mut self, v: Var) -> Option<Array2<f64>> {
        self.0[v.0].take()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Array2<f64>, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Trainable input.
    pub fn param(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Constant input; no gradient is computed for it.
    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.ncols() != vb.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "matmul {:?} x {:?}",
                va.dim(),
                vb.dim()
            )));
        }
        let out = va.dot(vb);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    pub fn add_row(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(bias));
        if vb.nrows() != 1 || vb.ncols() != va.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "bias {:?} for activations {:?}",
                vb.dim(),
                va.dim()
            )));
        }
        let out = va + vb;
        let rg = self.needs(a) || self.needs(bias);
        Ok(self.push(out, Op::AddRow(a, bias), rg))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let out = self.value(a) * s;
        let rg = self.needs(a);
        self.push(out, Op::Scale(a, s), rg)
    }

    pub fn activation(&mut self, a: Var, family: Family) -> Var {
        let out = self.value(a).mapv(|x| eval_unchecked(family, x));
        let rg = self.needs(a);
        self.push(out, Op::Activation(a, family), rg)
    }

    /// Fused `φ(ω0 (a + bias))` with a `1 × m` bias.
    pub fn affine_activation(&mut self, a: Var, bias: Var, omega0: f64, family: Family) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(bias));
        if vb.nrows() != 1 || vb.ncols() != va.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "bias {:?} for activations {:?}",
                vb.dim(),
                va.dim()
            )));
        }
        let m = va.ncols();
        let mut out = va.as_standard_layout().into_owned();
        let bias_row: Vec<f64> = vb.iter().copied().collect();
        let data = out.as_slice_mut().expect("standard layout");
        per_family!(family, eval_unchecked, |phi| {
            for row in data.chunks_exact_mut(m.max(1)) {
                for (v, &b) in row.iter_mut().zip(&bias_row) {
                    *v = phi(omega0 * (*v + b));
                }
            }
        });
        let rg = self.needs(a) || self.needs(bias);
        Ok(self.push(
            out,
            Op::AffineActivation {
                a,
                bias,
                omega0,
                family,
            },
            rg,
        ))
    }

    /// `mean((pred - target)²)` as a `1 × 1` node.
    pub fn mse(&mut self, pred: Var, target: &Array2<f64>) -> Result<Var> {
        let vp = self.value(pred);
        if vp.dim() != target.dim() {
            return Err(Error::DimensionMismatch(format!(
                "prediction {:?} vs target {:?}",
                vp.dim(),
                target.dim()
            )));
        }
        let n = vp.len().max(1) as f64;
        let loss = vp
            .iter()
            .zip(target.iter())
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / n;
        let rg = self.needs(pred);
        Ok(self.push(
            Array2::from_elem((1, 1), loss),
            Op::Mse(pred, target.clone()),
            rg,
        ))
    }

    /// Reverse sweep from the scalar node `output`.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if self.value(output).len() != 1 {
            return Err(Error::DimensionMismatch(
                "backward needs a scalar output".into(),
            ));
        }
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Array2::ones((1, 1)));

        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            // leaves keep their gradient for the caller
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    if self.needs(*a) {
                        let ga = g.dot(&self.value(*b).t());
                        accumulate(&mut grads, *a, ga);
                    }
                    if self.needs(*b) {
                        let gb = self.value(*a).t().dot(&g);
                        accumulate(&mut grads, *b, gb);
                    }
                }
                Op::AddRow(a, bias) => {
                    if self.needs(*bias) {
                        let gb = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                        accumulate(&mut grads, *bias, gb);
                    }
                    if self.needs(*a) {
                        accumulate(&mut grads, *a, g);
                    }
                }
                Op::Scale(a, s) => accumulate(&mut grads, *a, g * *s),
                Op::Activation(a, family) => {
                    let mut ga = g;
                    ga.zip_mut_with(self.value(*a), |gv, &x| *gv *= grad_unchecked(*family, x));
                    accumulate(&mut grads, *a, ga);
                }
                &Op::AffineActivation {
                    a,
                    bias,
                    omega0,
                    family,
                } => {
                    let m = g.ncols().max(1);
                    let mut ga = g.as_standard_layout().into_owned();
                    let va = self.value(a).as_standard_layout();
                    let vb = self.value(bias).as_standard_layout();
                    let (xs, bs) = (va.as_slice().expect("standard"), vb.as_slice().expect("standard"));
                    let gs = ga.as_slice_mut().expect("standard layout");
                    per_family!(family, grad_unchecked, |dphi| {
                        for (grow, xrow) in gs.chunks_exact_mut(m).zip(xs.chunks_exact(m)) {
                            for ((gv, &x), &b) in grow.iter_mut().zip(xrow).zip(bs) {
                                *gv *= omega0 * dphi(omega0 * (x + b));
                            }
                        }
                    });
                    if self.needs(bias) {
                        let gb = ga.sum_axis(Axis(0)).insert_axis(Axis(0));
                        accumulate(&mut grads, bias, gb);
                    }
                    if self.needs(a) {
                        accumulate(&mut grads, a, ga);
                    }
                }
                Op::Mse(pred, target) => {
                    let vp = self.value(*pred);
                    let k = 2.0 * g[[0, 0]] / vp.len().max(1) as f64;
                    let mut gp = vp - target;
                    gp *= k;
                    accumulate(&mut grads, *pred, gp);
                }
            }
        }
        Ok(Gradients(grads))
    }
}

fn accumulate(grads: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
    match &mut grads[v.0] {
        Some(existing) => *existing += &g,
        slot @ None => *slot = Some(g),
    }
}
