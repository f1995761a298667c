//! Family × range comparison table: Taylor size, pipeline depth and
//! resource estimates, each beside the published figure.
//!
//! A failing cell is recorded in its row's `error` field; the sweep itself
//! always completes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, Family};
use crate::pipeline::{build_schedule, estimate_resources, DEFAULT_DSP_PER_MULTIPLIER};
use crate::reference;
use crate::taylor::{min_terms, taylor_coeffs, DEFAULT_BUDGET};
use crate::{Error, Result};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "QUADINR_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub families: Vec<Family>,
    pub ranges: Vec<f64>,
    pub budget: f64,
    pub clock_mhz: f64,
    pub dsp_per_multiplier: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            families: Family::STUDIED.to_vec(),
            ranges: vec![2.0, 1.0],
            budget: DEFAULT_BUDGET,
            clock_mhz: reference::REFERENCE_CLOCK_MHZ,
            dsp_per_multiplier: DEFAULT_DSP_PER_MULTIPLIER,
        }
    }
}

/// One (family, range) cell. `Option` columns are empty when the value
/// could not be computed or has no published counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub range: f64,
    pub terms: Option<usize>,
    pub max_degree: Option<u32>,
    pub max_err: Option<f64>,
    pub stages: Option<usize>,
    pub latency_cycles: Option<usize>,
    pub latency_ns: Option<f64>,
    pub fp_multipliers: Option<usize>,
    pub fp_adders: Option<usize>,
    pub dsp_estimate: Option<usize>,
    pub dsp_estimate_shift_aware: Option<usize>,
    /// Pipeline built from the published term count instead of ours.
    pub latency_cycles_at_ref_terms: Option<usize>,
    pub dsp_estimate_at_ref_terms: Option<usize>,
    /// Normalized error of the published term count under our metric.
    pub max_err_at_ref_terms: Option<f64>,
    pub ref_terms: Option<usize>,
    pub ref_max_degree: Option<u32>,
    pub ref_latency_cycles: Option<usize>,
    pub ref_dsp: Option<u32>,
    pub terms_match: bool,
    pub degree_match: bool,
    pub latency_match: bool,
    pub latency_at_ref_terms_match: bool,
    pub dsp_at_ref_terms_match: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(family: Family, range: f64) -> Self {
        Self {
            family: family.name().to_string(),
            range,
            terms: None,
            max_degree: None,
            max_err: None,
            stages: None,
            latency_cycles: None,
            latency_ns: None,
            fp_multipliers: None,
            fp_adders: None,
            dsp_estimate: None,
            dsp_estimate_shift_aware: None,
            latency_cycles_at_ref_terms: None,
            dsp_estimate_at_ref_terms: None,
            max_err_at_ref_terms: None,
            ref_terms: None,
            ref_max_degree: None,
            ref_latency_cycles: None,
            ref_dsp: None,
            terms_match: false,
            degree_match: false,
            latency_match: false,
            latency_at_ref_terms_match: false,
            dsp_at_ref_terms_match: false,
            error: None,
        }
    }
}

fn note(row: &mut SweepRow, e: Error) {
    let msg = e.to_string();
    row.error = Some(match row.error.take() {
        Some(prev) => format!("{prev}; {msg}"),
        None => msg,
    });
}

pub fn sweep_row(family: Family, range: f64, cfg: &SweepConfig) -> SweepRow {
    let mut row = SweepRow::empty(family, range);
    if let Some(r) = reference::taylor_terms(family, range) {
        row.ref_terms = Some(r.terms);
        row.ref_max_degree = Some(r.max_degree);
    }
    if let Some(r) = reference::fpga_af(family, range) {
        row.ref_dsp = Some(r.dsp);
    }
    row.ref_latency_cycles = reference::fpga_latency_cycles(family, range);

    let kind = match ActivationKind::new(family, 1.0, range) {
        Ok(k) => k,
        Err(e) => {
            note(&mut row, e);
            return row;
        }
    };

    let computed = min_terms(&kind, cfg.budget).and_then(|s| {
        row.terms = Some(s.term_count);
        row.max_degree = Some(s.max_degree());
        row.max_err = Some(s.max_err);
        let schedule = build_schedule(&s, false)?;
        estimate_resources(&schedule, cfg.clock_mhz, cfg.dsp_per_multiplier)
    });
    match computed {
        Ok(est) => {
            row.stages = Some(est.stages);
            row.latency_cycles = Some(est.latency_cycles);
            row.latency_ns = Some(est.latency_ns);
            row.fp_multipliers = Some(est.fp_multipliers);
            row.fp_adders = Some(est.fp_adders);
            row.dsp_estimate = Some(est.dsp_estimate);
            row.dsp_estimate_shift_aware = Some(est.dsp_estimate_shift_aware);
        }
        Err(e) => note(&mut row, e),
    }

    if let Some(ref_terms) = row.ref_terms {
        let at_ref = taylor_coeffs(&kind, ref_terms).and_then(|s| {
            row.max_err_at_ref_terms = Some(s.max_err);
            let schedule = build_schedule(&s, false)?;
            estimate_resources(&schedule, cfg.clock_mhz, cfg.dsp_per_multiplier)
        });
        match at_ref {
            Ok(est) => {
                row.latency_cycles_at_ref_terms = Some(est.latency_cycles);
                row.dsp_estimate_at_ref_terms = Some(est.dsp_estimate);
            }
            Err(e) => note(&mut row, e),
        }
    }

    let same = |a: Option<usize>, b: Option<usize>| a.is_some() && a == b;
    row.terms_match = same(row.terms, row.ref_terms);
    row.degree_match = row.max_degree.is_some() && row.max_degree == row.ref_max_degree;
    row.latency_match = same(row.latency_cycles, row.ref_latency_cycles);
    row.latency_at_ref_terms_match = same(row.latency_cycles_at_ref_terms, row.ref_latency_cycles);
    row.dsp_at_ref_terms_match = same(row.dsp_estimate_at_ref_terms, row.ref_dsp.map(|d| d as usize));
    row
}

/// Worker count from `QUADINR_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Rows in family-major order, computed in parallel.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.families.is_empty() || cfg.ranges.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    let cells: Vec<(Family, f64)> = cfg
        .families
        .iter()
        .flat_map(|&f| cfg.ranges.iter().map(move |&r| (f, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(f, r)| sweep_row(f, r, cfg))
            .collect()
    }))
}

pub fn to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Parse(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Parse(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let rows = sweep(&SweepConfig::default()).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.error.is_none()), "{rows:#?}");
        let quad: Vec<_> = rows.iter().filter(|r| r.family == "quad").collect();
        assert_eq!(quad.len(), 2);
        assert_eq!(quad[0].terms, quad[1].terms);
        assert_eq!(quad[0].latency_cycles, quad[1].latency_cycles);
        assert_eq!(quad[0].dsp_estimate, quad[1].dsp_estimate);
    }

    #[test]
    fn single_family() {
        let cfg = SweepConfig {
            families: vec![Family::Sine],
            ..Default::default()
        };
        let rows = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.terms_match && r.latency_match));
        let csv = to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn bad_cell_is_marked() {
        let cfg = SweepConfig {
            families: vec![Family::Sine],
            ranges: vec![2.0, 3.0],
            ..Default::default()
        };
        let rows = sweep(&cfg).unwrap();
        assert!(rows[0].error.is_none());
        assert!(rows[1].error.is_some());
    }
}
