use ndarray::Array2;

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(shapes: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let (m, v) = shapes
            .into_iter()
            .map(|s| (Array2::zeros(s), Array2::zeros(s)))
            .unzip();
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m,
            v,
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.t
    }

    /// One update of every tensor in `params` with its matching gradient.
    pub fn step<'a>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut Array2<f64>>,
        grads: impl IntoIterator<Item = &'a Array2<f64>>,
        lr: f64,
    ) {
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            ndarray::Zip::from(p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        // with bias correction the first step is lr·sign(g) (up to eps)
        let mut p = Array2::from_elem((1, 2), 1.0);
        let g = Array2::from_shape_vec((1, 2), vec![0.5, -3.0]).unwrap();
        let mut adam = Adam::new([(1, 2)]);
        adam.step([&mut p], [&g], 0.1);
        assert!((p[[0, 0]] - 0.9).abs() < 1e-7);
        assert!((p[[0, 1]] - 1.1).abs() < 1e-7);
        assert_eq!(adam.steps_taken(), 1);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut p = Array2::from_elem((1, 1), 5.0);
        let mut adam = Adam::new([(1, 1)]);
        for _ in 0..2000 {
            let g = p.mapv(|x| 2.0 * (x - 1.5));
            adam.step([&mut p], [&g], 0.05);
        }
        assert!((p[[0, 0]] - 1.5).abs() < 1e-3);
    }
}
