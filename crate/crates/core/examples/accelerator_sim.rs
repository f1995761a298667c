use quadinr::accel::{cycle_report_summary, reference_inference, Accelerator, AcceleratorConfig};
use quadinr::nn::{make_grid, MlpModel};
use quadinr::{ActivationKind, Family};

fn main() -> quadinr::Result<()> {
    let kind = ActivationKind::of(Family::Quad);
    let model = MlpModel::init(&MlpModel::architecture(2, 256, 4, 3), kind, kind.omega0, kind.omega0, 1)?;
    let cfg = AcceleratorConfig::default();
    let mut acc = Accelerator::from_model(&model, cfg.clone())?;
    println!("{} pipeline stages, {} activation units", acc.stages().len(), acc.af_instances());

    let coords: Vec<f32> = make_grid(&[32, 32])?.iter().map(|&v| v as f32).collect();
    let (pixels, report) = acc.run_inference(&coords)?;
    let expected = reference_inference(&model, &cfg, &coords)?;
    let same = pixels.iter().zip(&expected).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("{} pixels in {} cycles, bit-exact: {same}", report.pixels, report.total_cycles);

    for row in cycle_report_summary(&report, cfg.clock_mhz) {
        println!("{:<12} {:>7} cycles {:>9.0} ns", row.component, row.cycles, row.ns);
    }
    Ok(())
}
