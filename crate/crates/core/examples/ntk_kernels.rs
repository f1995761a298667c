//! Single-neuron tangent kernels: closed forms against the autodiff tape,
//! then the ω0 sweep at a fixed pre-activation.

use quadinr::cli::ntk_agreement;
use quadinr::spectral::{omega0_grid, scaling_contrast};

fn main() -> quadinr::Result<()> {
    let check = ntk_agreement(200, 3, 1e-6)?;
    println!("sine  max relative error      {:.2e}", check.siren_max_rel_err);
    println!("quad  printed form abs error  {:.2e}", check.quad_max_abs_err_printed);
    println!("quad  chain-rule abs error    {:.2e}", check.quad_max_abs_err_chain_rule);
    println!("quad matches: {:?}", check.quad_matching_form);

    let c = scaling_contrast(0.4, &omega0_grid(1.0, 8.0, 0.5));
    println!("\n  ω0    quad      sine");
    for (i, w) in c.omega0.iter().enumerate() {
        println!("{w:>5.2} {:>8.3} {:>8.4}", c.quad_printed[i], c.siren[i]);
    }
    println!("quad monotone: {}  sine monotone: {}", c.quad_printed_monotone, c.siren_monotone);
    Ok(())
}
