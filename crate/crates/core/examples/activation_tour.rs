//! Prints each activation and its derivative on a coarse grid, plus the
//! quadratic wave's period-4 wrap.

use quadinr::activation::{af_eval, af_grad, quad_wrap};
use quadinr::Family;

fn main() -> quadinr::Result<()> {
    let xs = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];
    for family in Family::STUDIED.iter().copied().chain([Family::Relu]) {
        println!("{}", family.name());
        for &x in &xs {
            println!("  x={x:>5.2}  f={:>9.5}  f'={:>9.5}", af_eval(family, x)?, af_grad(family, x)?);
        }
    }

    println!("\nquad wrap");
    for x in [-6.0, -2.0, 1.9, 2.0, 5.5, 10.0] {
        println!("  {x:>5.1} -> {:>5.2}", quad_wrap(x));
    }
    Ok(())
}
