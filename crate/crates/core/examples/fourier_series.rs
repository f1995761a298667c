use quadinr::activation::quad_eval;
use quadinr::spectral::{fourier_b_analytic, fourier_b_numeric, fourier_partial_sum, DEFAULT_POINTS};

fn main() -> quadinr::Result<()> {
    println!(" n   quadrature        closed form");
    for n in (1..=11).step_by(2) {
        println!("{n:>2}   {:.10}   {:.10}", fourier_b_numeric(n, DEFAULT_POINTS)?, fourier_b_analytic(n)?);
    }
    println!(" 2   {:.3e}", fourier_b_numeric(2, DEFAULT_POINTS)?);

    for k in [1, 3, 11, 101] {
        let worst = (0..=400)
            .map(|i| -2.0 + i as f64 / 100.0)
            .map(|x| (fourier_partial_sum(x, k) - quad_eval(x).unwrap()).abs())
            .fold(0.0, f64::max);
        println!("partial sum to n={k:<3} max residual {worst:.2e}");
    }
    Ok(())
}
