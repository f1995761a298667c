use quadinr::reference::taylor_terms;
use quadinr::taylor::{min_terms, taylor_coeffs, DEFAULT_BUDGET};
use quadinr::{ActivationKind, Family};

fn main() -> quadinr::Result<()> {
    println!("{:<9} {:>5} {:>6} {:>7} {:>11}   published", "family", "range", "terms", "degree", "max err");
    for range in [2.0, 1.0] {
        for &family in Family::STUDIED.iter() {
            let kind = ActivationKind::new(family, 1.0, range)?;
            let s = min_terms(&kind, DEFAULT_BUDGET)?;
            let published = match taylor_terms(family, range) {
                Some(r) => {
                    let err = taylor_coeffs(&kind, r.terms)?.max_err;
                    format!("{} terms, {}^{} (err {err:.1e})", r.terms, s.variable.symbol(), r.max_degree)
                }
                None => "-".into(),
            };
            println!(
                "{:<9} {:>5} {:>6} {:>5}^{:<2} {:>10.2e}   {published}",
                family.name(),
                range,
                s.term_count,
                s.variable.symbol(),
                s.max_degree(),
                s.max_err
            );
        }
    }
    Ok(())
}
