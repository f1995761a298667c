//! Stage-by-stage schedules for a few activations, with resource counts
//! and an f32 check of the datapath against the series.

use quadinr::pipeline::{build_schedule, estimate_resources, functional_check, DEFAULT_DSP_PER_MULTIPLIER};
use quadinr::taylor::{min_terms, uniform_grid, DEFAULT_BUDGET};
use quadinr::{ActivationKind, Family};

fn main() -> quadinr::Result<()> {
    for family in [Family::Quad, Family::Sine, Family::Gaussian, Family::Finer] {
        let kind = ActivationKind::new(family, 1.0, 2.0)?;
        let series = min_terms(&kind, DEFAULT_BUDGET)?;
        let schedule = build_schedule(&series, false)?;
        let est = estimate_resources(&schedule, 100.0, DEFAULT_DSP_PER_MULTIPLIER)?;
        println!(
            "{}: {} stages, {} ns, {} mul / {} add, {} DSP ({} if power-of-two coefficients are shifts)",
            family.name(),
            est.stages,
            est.latency_ns,
            est.fp_multipliers,
            est.fp_adders,
            est.dsp_estimate,
            est.dsp_estimate_shift_aware
        );
        for st in &schedule.stages {
            println!("  S{:<3} {:?}  -> {}", st.index, st.ops, st.produces);
        }
        let probe: Vec<f64> = uniform_grid(2.0, 513).collect();
        println!("  f32 datapath vs series: {:.2e}\n", functional_check(&series, &schedule, &probe));
    }
    Ok(())
}
