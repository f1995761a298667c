use serde::{Deserialize, Serialize};

use super::{Accelerator, CycleReport, MemoryMap};
use crate::pipeline::Registers;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    MacArray,
    MemoryControl,
    Storage,
    Af,
    Others,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::MacArray,
        Component::MemoryControl,
        Component::Storage,
        Component::Af,
        Component::Others,
    ];
}

/// One clocked stage of the layer pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageKind {
    /// Read the layer input (coordinate buffer or staging buffer).
    Fetch { layer: usize },
    /// One product per lane, zero-padded to the lane count.
    Multiply { layer: usize, lanes: usize },
    /// One level of the adder tree: adjacent pairs are summed.
    TreeLevel { layer: usize, level: usize },
    BiasAdd { layer: usize },
    /// `ω0 · y` ahead of the activation unit.
    Scale { layer: usize },
    /// Stage `k` of the activation pipeline.
    Af { layer: usize, k: usize },
    /// Write the activated layer output to the staging buffer.
    Store { layer: usize },
    ResultWrite,
}

impl StageKind {
    pub fn component(self) -> Component {
        match self {
            StageKind::Fetch { .. } => Component::MemoryControl,
            StageKind::Multiply { .. } | StageKind::TreeLevel { .. } | StageKind::BiasAdd { .. } => {
                Component::MacArray
            }
            StageKind::Scale { .. } => Component::Others,
            StageKind::Af { .. } => Component::Af,
            StageKind::Store { .. } | StageKind::ResultWrite => Component::Storage,
        }
    }
}

pub(super) fn build_pipeline(mem: &MemoryMap, cfg: &super::AcceleratorConfig, af_stages: usize) -> Vec<StageKind> {
    let layers = mem.num_layers();
    let mut stages = Vec::new();
    for layer in 0..layers {
        let lanes = if layer == 0 {
            mem.layer_dims[0].next_power_of_two()
        } else {
            cfg.mac_width
        };
        stages.push(StageKind::Fetch { layer });
        stages.push(StageKind::Multiply { layer, lanes });
        for level in 0..lanes.trailing_zeros() as usize {
            stages.push(StageKind::TreeLevel { layer, level });
        }
        stages.push(StageKind::BiasAdd { layer });
        if layer + 1 < layers {
            stages.push(StageKind::Scale { layer });
            for k in 0..af_stages {
                stages.push(StageKind::Af { layer, k });
            }
            stages.push(StageKind::Store { layer });
        } else {
            stages.push(StageKind::ResultWrite);
        }
    }
    stages
}

/// A pixel in flight and the registers it currently owns.
struct Token {
    pixel: usize,
    input: Vec<f32>,
    /// `fan_out` blocks of `lanes` partial sums while in the MAC array.
    partial: Vec<f32>,
    width: usize,
    y: Vec<f32>,
    regs: Vec<Registers>,
}

fn execute(acc: &mut Accelerator, stage: StageKind, t: &mut Token, coords: &[f32]) {
    let mem = &mut acc.memory;
    match stage {
        StageKind::Fetch { layer } => {
            t.input.clear();
            if layer == 0 {
                let d = mem.layer_dims[0];
                t.input.extend_from_slice(&coords[t.pixel * d..(t.pixel + 1) * d]);
            } else {
                t.input.extend_from_slice(&mem.intermediate_ram[layer - 1]);
            }
        }
        StageKind::Multiply { layer, lanes } => {
            let (fan_in, fan_out) = (mem.layer_dims[layer], mem.layer_dims[layer + 1]);
            let w = &mem.weight_rom[layer];
            t.partial.clear();
            t.partial.resize(fan_out * lanes, 0.0);
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let block = &mut t.partial[o * lanes..o * lanes + fan_in];
                for ((p, &wi), &xi) in block.iter_mut().zip(row).zip(&t.input) {
                    *p = wi * xi;
                }
            }
            t.width = lanes;
        }
        StageKind::TreeLevel { layer, .. } => {
            let fan_out = mem.layer_dims[layer + 1];
            let (w, half) = (t.width, t.width / 2);
            for o in 0..fan_out {
                let block = &mut t.partial[o * w..(o + 1) * w];
                for j in 0..half {
                    block[j] = block[2 * j] + block[2 * j + 1];
                }
                // compact so the next level sees contiguous blocks
                t.partial.copy_within(o * w..o * w + half, o * half);
            }
            t.partial.truncate(fan_out * half);
            t.width = half;
        }
        StageKind::BiasAdd { layer } => {
            t.y.clear();
            t.y.extend(t.partial.iter().zip(&mem.bias_rom[layer]).map(|(s, b)| s + b));
        }
        StageKind::Scale { layer } => {
            let w0 = mem.omega0[layer];
            t.y.iter_mut().for_each(|v| *v *= w0);
        }
        StageKind::Af { k, .. } => {
            let dp = &acc.datapath;
            if k == 0 {
                t.regs.clear();
                t.regs.extend(t.y.iter().map(|&v| dp.load(v)));
            }
            for r in &mut t.regs {
                dp.apply_stage(k, r);
            }
            if k + 1 == dp.stage_count() {
                for (y, r) in t.y.iter_mut().zip(&t.regs) {
                    *y = r.output();
                }
            }
        }
        StageKind::Store { layer } => {
            mem.intermediate_ram[layer].copy_from_slice(&t.y);
        }
        StageKind::ResultWrite => {
            let c = t.y.len();
            mem.result_ram[t.pixel * c..(t.pixel + 1) * c].copy_from_slice(&t.y);
        }
    }
}

pub(super) fn run(acc: &mut Accelerator, coords: &[f32]) -> Result<(Vec<f32>, CycleReport)> {
    let d = acc.memory.layer_dims[0];
    if coords.len() % d != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinate values is not a multiple of {d}",
            coords.len()
        )));
    }
    let n = coords.len() / d;
    if n > acc.memory.result_capacity {
        return Err(Error::Capacity(format!(
            "{n} pixels exceed the result RAM ({} pixels)",
            acc.memory.result_capacity
        )));
    }
    let channels = *acc.memory.layer_dims.last().expect("non-empty dims");
    acc.memory.result_ram = vec![0.0; n * channels];

    let pipeline = acc.pipeline.clone();
    let depth = pipeline.len();
    let mut slots: Vec<Option<Token>> = (0..depth).map(|_| None).collect();
    let mut next_pixel = 0;
    let mut done = 0;
    let mut ticks = 0;
    let new_token = |pixel| Token {
        pixel,
        input: Vec::new(),
        partial: Vec::new(),
        width: 0,
        y: Vec::new(),
        regs: Vec::new(),
    };
    if n > 0 {
        slots[0] = Some(new_token(0));
        next_pixel = 1;
    }
    while done < n {
        // back to front, so a stage reads its buffer before the upstream
        // stage overwrites it in the same cycle
        for s in (0..depth).rev() {
            if let Some(mut tok) = slots[s].take() {
                execute(acc, pipeline[s], &mut tok, coords);
                if s + 1 < depth {
                    slots[s + 1] = Some(tok);
                } else {
                    done += 1;
                }
            }
        }
        ticks += 1;
        if next_pixel < n {
            slots[0] = Some(new_token(next_pixel));
            next_pixel += 1;
        }
    }

    let count = |c| pipeline.iter().filter(|s| s.component() == c).count();
    let adder_tree_depth = (0..acc.memory.num_layers())
        .map(|l| {
            pipeline
                .iter()
                .filter(|s| matches!(s, StageKind::TreeLevel { layer, .. } if *layer == l))
                .count()
        })
        .collect();
    let report = CycleReport {
        pixels: n,
        fill_latency: depth,
        initiation_interval: 1,
        total_cycles: ticks,
        mac_array: count(Component::MacArray),
        memory_control: count(Component::MemoryControl),
        storage: count(Component::Storage),
        af: count(Component::Af),
        others: count(Component::Others),
        adder_tree_depth,
        af_stages_per_crossing: acc.datapath.stage_count(),
        af_crossings: acc.memory.num_layers() - 1,
    };
    Ok((acc.memory.result_ram.clone(), report))
}
