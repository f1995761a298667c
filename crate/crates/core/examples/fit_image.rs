//! Fits a small quadratic-activation MLP to the bundled synthetic crop and
//! writes the reconstruction next to the target.
//!
//! cargo run --release --example fit_image -- [steps] [out_dir]

use quadinr::imageio::{synthetic_crop, write_image, Image};
use quadinr::nn::{forward, psnr, train_with_progress, MlpModel, SignalDataset, TrainConfig};
use quadinr::{ActivationKind, Family};

fn main() -> quadinr::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    let out_dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let target = synthetic_crop(64);
    let data = SignalDataset::from_image(&target);
    let kind = ActivationKind::of(Family::Quad);
    let model = MlpModel::init(&MlpModel::architecture(2, 64, 2, 3), kind, kind.omega0, kind.omega0, 7)?;
    let cfg = TrainConfig { steps, seed: 7, ..Default::default() };

    let outcome = train_with_progress(&model, &data, &cfg, |step, loss| {
        if step % 50 == 0 {
            println!("step {step:>4}  mse {loss:.3e}");
        }
    })?;
    let pred = forward(&outcome.model, &data.coords)?;
    let recon = Image::from_unclamped(64, 64, pred.as_slice().expect("contiguous"))?;
    println!("PSNR {:.2} dB after {steps} steps", psnr(&recon.data, &target.data)?);

    write_image(out_dir.join("target.ppm"), &target)?;
    write_image(out_dir.join("recon.ppm"), &recon)?;
    Ok(())
}
