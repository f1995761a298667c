#![allow(dead_code)]

use ndarray::Array2;
use quadinr::accel::{reference_inference, Accelerator, AcceleratorConfig};
use quadinr::nn::mlp::{loss, loss_and_grads};
use quadinr::nn::MlpModel;
use quadinr::{ActivationKind, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst parameter in a gradient check.
#[derive(Debug, Clone, Copy)]
pub struct GradReport {
    pub params: usize,
    pub failures: usize,
    pub worst_abs: f64,
    pub worst_rel: f64,
}

pub fn grad_model(family: Family, seed: u64) -> (MlpModel, Array2<f64>, Array2<f64>) {
    let kind = ActivationKind::of(family);
    // 2 -> 8 -> 8 -> 3 has 123 parameters
    let model = MlpModel::init(&[2, 8, 8, 3], kind, kind.omega0, kind.omega0, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let coords = Array2::from_shape_fn((8, 2), |_| rng.gen_range(-1.0..1.0));
    let targets = Array2::from_shape_fn((8, 3), |_| rng.gen_range(0.0..1.0));
    (model, coords, targets)
}

/// Reverse-mode gradients against central differences. A parameter passes
/// when the 5-point stencil (h = 1e-4) or a 3-point one (h = 1e-6 or 1e-8)
/// agrees within `abs_tol` or `rel_tol`. Near a jump in the second
/// derivative (quad at 0, finer at 0) only the short steps are accurate.
pub fn gradient_check(family: Family, seed: u64, rel_tol: f64, abs_tol: f64) -> GradReport {
    let (model, coords, targets) = grad_model(family, seed);
    let p = model.params();
    let (_, g) = loss_and_grads(&model, &p, &coords, &targets).unwrap();
    let mut flat_g = g;
    let mut q = p.clone();
    let at = |q: &mut quadinr::nn::Params, i: usize, x: f64| {
        q.set(i, x);
        loss(&model, q, &coords, &targets)
    };
    let n = p.num_params();
    let mut rep = GradReport { params: n, failures: 0, worst_abs: 0.0, worst_rel: 0.0 };
    for i in 0..n {
        let theta = q.get(i);
        let ad = flat_g.get(i);
        let h = 1e-4;
        let five = (8.0 * (at(&mut q, i, theta + h) - at(&mut q, i, theta - h))
            - (at(&mut q, i, theta + 2.0 * h) - at(&mut q, i, theta - 2.0 * h)))
            / (12.0 * h);
        let mut three = |h: f64| (at(&mut q, i, theta + h) - at(&mut q, i, theta - h)) / (2.0 * h);
        let (short, shorter) = (three(1e-6), three(1e-8));
        q.set(i, theta);
        let (abs, rel) = [five, short, shorter]
            .iter()
            .map(|&fd| {
                let abs = (ad - fd).abs();
                (abs, abs / fd.abs().max(f64::MIN_POSITIVE))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        if !(abs <= abs_tol || rel <= rel_tol) {
            rep.failures += 1;
        }
        if abs > abs_tol {
            rep.worst_rel = rep.worst_rel.max(rel);
        }
        rep.worst_abs = rep.worst_abs.max(abs);
    }
    rep
}

pub fn random_coords(n: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * n).map(|_| rng.gen_range(-1.0f32..=1.0)).collect()
}

/// Number of output values where the simulator and the strict binary32
/// reference differ bitwise.
pub fn accel_mismatches(model: &MlpModel, coords: &[f32]) -> usize {
    let cfg = AcceleratorConfig::default();
    let mut acc = Accelerator::from_model(model, cfg.clone()).unwrap();
    let (sim, _) = acc.run_inference(coords).unwrap();
    let reference = reference_inference(model, &cfg, coords).unwrap();
    assert_eq!(sim.len(), reference.len());
    sim.iter().zip(&reference).filter(|(a, b)| a.to_bits() != b.to_bits()).count()
}

/// Ten accelerator-sized models cycling through the studied families.
pub fn accel_models() -> Vec<MlpModel> {
    (0..10u64)
        .map(|i| {
            let family = Family::STUDIED[i as usize % Family::STUDIED.len()];
            let kind = ActivationKind::of(family);
            let width = [256, 64, 100][i as usize % 3];
            let depth = 2 + (i as usize % 3);
            MlpModel::init(&MlpModel::architecture(2, width, depth, 3), kind, kind.omega0, kind.omega0, 100 + i)
                .unwrap()
        })
        .collect()
}
