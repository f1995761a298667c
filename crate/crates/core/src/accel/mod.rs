//! Behavioral model of a fully pipelined INR accelerator.
//!
//! Every layer is a MAC array (one multiplier per lane and a balanced
//! adder tree), a bias adder, the `ω0` scaler and an activation pipeline;
//! the output layer skips the last two and writes to the result RAM. The
//! simulator advances one clock at a time with one pixel entering per
//! cycle, and its arithmetic follows
//! [`forward_binary32`](crate::nn::forward_binary32) exactly, so outputs can
//! be compared bit for bit.

mod sim;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, Family};
use crate::nn::mlp::{MlpModel, ReductionOrder};
use crate::nn::{forward_binary32, qbin};
use crate::pipeline::{build_schedule, Datapath, PipelineSchedule};
use crate::reference::{ACCELERATOR_BREAKDOWN, ACCELERATOR_TOTAL};
use crate::taylor::{min_terms, taylor_coeffs, DEFAULT_BUDGET};
use crate::{Error, Result};

pub use sim::{Component, StageKind};

/// Pixels the result RAM holds by default (one 768×512 frame).
pub const DEFAULT_RESULT_RAM_PIXELS: usize = 768 * 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorConfig {
    pub mac_width: usize,
    pub adder_tree_inputs: usize,
    pub clock_mhz: f64,
    /// Prepend a range-reduction stage to the quadratic unit so inputs
    /// outside one period are folded back.
    pub with_wrap: bool,
    /// Taylor error budget used to pick schedules for series activations.
    pub budget: f64,
    pub result_ram_pixels: usize,
}

impl Default for AcceleratorConfig {
    fn default() -> Self {
        Self {
            mac_width: 256,
            adder_tree_inputs: 256,
            clock_mhz: 100.0,
            with_wrap: false,
            budget: DEFAULT_BUDGET,
            result_ram_pixels: DEFAULT_RESULT_RAM_PIXELS,
        }
    }
}

impl AcceleratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mac_width != self.adder_tree_inputs {
            return Err(Error::InvalidArgument(format!(
                "MAC width {} must equal adder tree inputs {}",
                self.mac_width, self.adder_tree_inputs
            )));
        }
        if !self.mac_width.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "MAC width {} is not a power of two",
                self.mac_width
            )));
        }
        if !(self.clock_mhz > 0.0 && self.clock_mhz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "clock must be positive, got {} MHz",
                self.clock_mhz
            )));
        }
        Ok(())
    }
}

/// On-chip storage: parameter ROMs, one staging buffer per layer boundary
/// and the result RAM.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryMap {
    pub layer_dims: Vec<usize>,
    /// Row-major `[out][in]` per layer.
    pub weight_rom: Vec<Vec<f32>>,
    pub bias_rom: Vec<Vec<f32>>,
    pub omega0: Vec<f32>,
    pub intermediate_ram: Vec<Vec<f32>>,
    /// Pixel-major output store, `capacity × channels`.
    pub result_ram: Vec<f32>,
    pub result_capacity: usize,
}

impl MemoryMap {
    fn from_model(model: &MlpModel, cfg: &AcceleratorConfig) -> Result<Self> {
        for (l, &d) in model.layer_dims.iter().enumerate() {
            if d > cfg.mac_width {
                return Err(Error::Capacity(format!(
                    "layer {l} has {d} units but the MAC array has {} lanes",
                    cfg.mac_width
                )));
            }
        }
        let inner = &model.layer_dims[1..model.layer_dims.len() - 1];
        Ok(Self {
            layer_dims: model.layer_dims.clone(),
            weight_rom: model.weights.clone(),
            bias_rom: model.biases.clone(),
            omega0: (0..model.num_layers())
                .map(|l| model.layer_omega0(l) as f32)
                .collect(),
            intermediate_ram: inner.iter().map(|&d| vec![0.0; d]).collect(),
            result_ram: Vec::new(),
            result_capacity: cfg.result_ram_pixels,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }
}

/// Activation schedule the accelerator instantiates for `kind`: the exact
/// two-term quadratic, or the shortest Taylor series within `budget`.
pub fn af_schedule(kind: &ActivationKind, budget: f64, with_wrap: bool) -> Result<PipelineSchedule> {
    let series = match kind.family {
        Family::Quad => taylor_coeffs(kind, 2)?,
        Family::Relu => {
            return Err(Error::Unsupported(
                "relu has no activation pipeline in the accelerator".into(),
            ))
        }
        _ => min_terms(kind, budget)?,
    };
    build_schedule(&series, with_wrap && kind.family == Family::Quad)
}

/// A configured accelerator holding one model.
#[derive(Debug, Clone)]
pub struct Accelerator {
    pub config: AcceleratorConfig,
    pub memory: MemoryMap,
    pub activation: ActivationKind,
    pub af_schedule: PipelineSchedule,
    datapath: Datapath,
    pipeline: Vec<StageKind>,
}

impl Accelerator {
    pub fn from_model(model: &MlpModel, config: AcceleratorConfig) -> Result<Self> {
        config.validate()?;
        model.validate()?;
        let memory = MemoryMap::from_model(model, &config)?;
        let af_schedule = af_schedule(&model.activation, config.budget, config.with_wrap)?;
        let datapath = Datapath::new(&af_schedule);
        let pipeline = sim::build_pipeline(&memory, &config, datapath.stage_count());
        Ok(Self {
            config,
            memory,
            activation: model.activation,
            af_schedule,
            datapath,
            pipeline,
        })
    }

    /// Number of activation units: one per activated layer.
    pub fn af_instances(&self) -> usize {
        self.memory.num_layers() - 1
    }

    pub fn stages(&self) -> &[StageKind] {
        &self.pipeline
    }

    pub fn datapath(&self) -> &Datapath {
        &self.datapath
    }

    /// Evaluates row-major `n × d` coordinates; returns row-major `n × c`
    /// outputs and the cycle accounting.
    pub fn run_inference(&mut self, coords: &[f32]) -> Result<(Vec<f32>, CycleReport)> {
        sim::run(self, coords)
    }
}

pub fn load_model(path: impl AsRef<Path>, config: AcceleratorConfig) -> Result<Accelerator> {
    Accelerator::from_model(&qbin::load(path)?, config)
}

/// Strict binary32 reference for the accelerator: same reduction widths
/// and the same activation datapath.
pub fn reference_inference(model: &MlpModel, config: &AcceleratorConfig, coords: &[f32]) -> Result<Vec<f32>> {
    let schedule = af_schedule(&model.activation, config.budget, config.with_wrap)?;
    let dp = Datapath::new(&schedule);
    let order = ReductionOrder::accelerator(model, config.mac_width);
    forward_binary32(model, coords, &order, &|x| dp.eval_f32(x))
}

/// Per-pixel stage counts by component plus measured run length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub pixels: usize,
    /// Cycles from a pixel entering until its result is written.
    pub fill_latency: usize,
    pub initiation_interval: usize,
    /// Clock ticks the run took, counted by the simulator.
    pub total_cycles: usize,
    pub mac_array: usize,
    pub memory_control: usize,
    pub storage: usize,
    pub af: usize,
    pub others: usize,
    pub adder_tree_depth: Vec<usize>,
    pub af_stages_per_crossing: usize,
    pub af_crossings: usize,
}

impl CycleReport {
    pub fn component_cycles(&self, c: Component) -> usize {
        match c {
            Component::MacArray => self.mac_array,
            Component::MemoryControl => self.memory_control,
            Component::Storage => self.storage,
            Component::Af => self.af,
            Component::Others => self.others,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub component: String,
    pub cycles: usize,
    pub ns: f64,
    /// Published latency of the five-layer sine-activated build.
    pub reference_ns: f64,
}

/// Component table in nanoseconds at `clock_mhz`, with a closing total row
/// (`cycles` there is the whole run).
pub fn cycle_report_summary(report: &CycleReport, clock_mhz: f64) -> Vec<SummaryRow> {
    let ns = |cycles: usize| cycles as f64 * 1000.0 / clock_mhz;
    let mut rows: Vec<SummaryRow> = Component::ALL
        .iter()
        .zip(ACCELERATOR_BREAKDOWN.iter())
        .map(|(&c, r)| {
            let cycles = report.component_cycles(c);
            SummaryRow {
                component: r.name.to_string(),
                cycles,
                ns: ns(cycles),
                reference_ns: r.latency_ns,
            }
        })
        .collect();
    rows.push(SummaryRow {
        component: ACCELERATOR_TOTAL.name.to_string(),
        cycles: report.total_cycles,
        ns: ns(report.total_cycles),
        reference_ns: ACCELERATOR_TOTAL.latency_ns,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::make_grid;

    fn model(family: Family, width: usize, depth: usize, seed: u64) -> MlpModel {
        let kind = ActivationKind::new(family, family.default_omega0(), 2.0).unwrap();
        let w0 = kind.omega0;
        MlpModel::init(&MlpModel::architecture(2, width, depth, 3), kind, w0, w0, seed).unwrap()
    }

    fn grid(h: usize, w: usize) -> Vec<f32> {
        make_grid(&[h, w]).unwrap().iter().map(|&v| v as f32).collect()
    }

    #[test]
    fn four_af_units_for_default_depth() {
        let acc = Accelerator::from_model(&model(Family::Quad, 256, 4, 1), Default::default()).unwrap();
        assert_eq!(acc.af_instances(), 4);
        assert_eq!(acc.af_schedule.stage_count(), 2);
    }

    #[test]
    fn wide_model_rejected() {
        let err = Accelerator::from_model(&model(Family::Quad, 300, 2, 1), Default::default()).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn relu_rejected() {
        let err = Accelerator::from_model(&model(Family::Relu, 8, 2, 1), Default::default()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn zero_model_single_pixel() {
        let mut m = model(Family::Quad, 16, 2, 3);
        m.weights.iter_mut().flatten().for_each(|w| *w = 0.0);
        m.biases.iter_mut().flatten().for_each(|b| *b = 0.0);
        let mut acc = Accelerator::from_model(&m, Default::default()).unwrap();
        let (out, rep) = acc.run_inference(&[0.25, -0.5]).unwrap();
        assert_eq!(out, vec![0.0; 3]);
        assert_eq!(rep.total_cycles, rep.fill_latency);
        assert_eq!(rep.fill_latency, acc.stages().len());
    }

    #[test]
    fn matches_reference_bitwise() {
        for family in Family::STUDIED {
            let m = model(family, 24, 3, 11);
            let coords = grid(6, 5);
            let mut acc = Accelerator::from_model(&m, Default::default()).unwrap();
            let (out, rep) = acc.run_inference(&coords).unwrap();
            let want = reference_inference(&m, &acc.config, &coords).unwrap();
            let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&out), bits(&want), "{family}");
            assert_eq!(rep.total_cycles, rep.fill_latency + 29);
        }
    }

    #[test]
    fn component_counts() {
        let mut acc = Accelerator::from_model(&model(Family::Quad, 256, 4, 5), Default::default()).unwrap();
        let (_, rep) = acc.run_inference(&grid(2, 2)).unwrap();
        assert_eq!(rep.af, 8);
        assert_eq!(rep.af_crossings, 4);
        assert_eq!(rep.adder_tree_depth, vec![1, 8, 8, 8, 8]);
        assert_eq!(
            rep.mac_array + rep.memory_control + rep.storage + rep.af + rep.others,
            rep.fill_latency
        );
        let rows = cycle_report_summary(&rep, 100.0);
        assert_eq!(rows[3].ns, 80.0);
        let fast = cycle_report_summary(&rep, 200.0);
        for (a, b) in rows.iter().zip(&fast) {
            assert_eq!(a.ns, 2.0 * b.ns);
        }
    }

    #[test]
    fn empty_run() {
        let mut acc = Accelerator::from_model(&model(Family::Sine, 8, 2, 5), Default::default()).unwrap();
        let (out, rep) = acc.run_inference(&[]).unwrap();
        assert!(out.is_empty());
        assert_eq!(rep.total_cycles, 0);
        assert!(cycle_report_summary(&rep, 100.0).last().unwrap().ns == 0.0);
    }

    #[test]
    fn result_ram_overflow() {
        let cfg = AcceleratorConfig {
            result_ram_pixels: 3,
            ..Default::default()
        };
        let mut acc = Accelerator::from_model(&model(Family::Quad, 8, 2, 5), cfg).unwrap();
        assert!(matches!(acc.run_inference(&grid(2, 2)), Err(Error::Capacity(_))));
    }
}
