//! N-stage activation pipeline built from a Taylor series.
//!
//! Every clocked stage holds at most one power-term multiply, one
//! coefficient multiply and one polynomial add. The running power advances
//! by `v²` per stage, so a term's power is ready in stage `k`, its
//! coefficient product in `k + 1` and its contribution to the partial sum
//! in `k + 2`. That gives `N + 1` stages for an even series of `N` terms and
//! `N + 2` for an odd one (stage 1 spends its multiplier on `x³`). FINER
//! adds two preprocessing stages for `z = (|x|+1)·x`. The quadratic needs
//! two stages: `x|x|` and `2x` in parallel, then one add.
//!
//! Coefficients of magnitude one are a sign flip and cost no multiplier.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::activation::{Family, QUAD_PERIOD};
use crate::taylor::{series_eval, Parity, TaylorSeries, Variable};
use crate::{Error, Result};

/// Default mapping of one binary32 multiplier onto DSP slices.
pub const DEFAULT_DSP_PER_MULTIPLIER: u32 = 2;

/// Allowed deviation of the binary32 datapath from the binary64 series.
pub const FUNCTIONAL_TOLERANCE: f64 = 1e-5;

/// One operation issued in a pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    /// Running power `v^degree` (`v·v` for degree 2, otherwise `v^(degree-2)·v²`).
    PowerMul { degree: u32 },
    /// Term `c_degree · v^degree`.
    CoeffMul { degree: u32 },
    /// `|x| + 1`.
    AbsAdd,
    /// `(|x| + 1) · x`.
    PreMul,
    /// Adds the term of `degree` to the partial sum.
    PolyAdd { degree: u32 },
    /// Range reduction `x - 4·round(x/4)` onto the quadratic's base period.
    WrapReduce,
}

impl Op {
    pub fn multipliers(self) -> usize {
        match self {
            Op::PowerMul { .. } | Op::CoeffMul { .. } | Op::PreMul | Op::WrapReduce => 1,
            Op::AbsAdd | Op::PolyAdd { .. } => 0,
        }
    }

    pub fn adders(self) -> usize {
        match self {
            Op::AbsAdd | Op::PolyAdd { .. } | Op::WrapReduce => 1,
            Op::PowerMul { .. } | Op::CoeffMul { .. } | Op::PreMul => 0,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::PowerMul { degree } => write!(f, "PowerMul(v^{degree})"),
            Op::CoeffMul { degree } => write!(f, "CoeffMul(c{degree})"),
            Op::AbsAdd => f.write_str("AbsAdd"),
            Op::PreMul => f.write_str("PreMul"),
            Op::PolyAdd { degree } => write!(f, "PolyAdd(+t{degree})"),
            Op::WrapReduce => f.write_str("WrapReduce"),
        }
    }
}

/// A clocked stage. Index 0 is `S0`; preprocessing stages are negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStage {
    pub index: i32,
    pub ops: Vec<Op>,
    pub produces: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSchedule {
    pub series: TaylorSeries,
    pub stages: Vec<PipelineStage>,
    pub with_wrap: bool,
}

impl PipelineSchedule {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn family(&self) -> Family {
        self.series.family
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub stages: usize,
    pub latency_cycles: usize,
    pub latency_ns: f64,
    pub clock_mhz: f64,
    pub fp_multipliers: usize,
    pub fp_adders: usize,
    pub dsp_per_multiplier: u32,
    pub dsp_estimate: usize,
    /// Multiplies by a power-of-two coefficient; realizable as an exponent
    /// increment without a DSP slice.
    pub pow2_coeff_multipliers: usize,
    pub dsp_estimate_shift_aware: usize,
    pub exact: bool,
}

fn unit_magnitude(c: f64) -> bool {
    c.abs() == 1.0
}

fn is_pow2_coefficient(c: f64) -> bool {
    let a = c.abs();
    a != 0.0 && a != 1.0 && a.log2().fract() == 0.0
}

struct StagePlan {
    stages: Vec<(Vec<Op>, Vec<String>)>,
}

impl StagePlan {
    fn new() -> Self {
        Self { stages: Vec::new() }
    }

    fn push(&mut self, stage: usize, op: Op, what: String) {
        while self.stages.len() <= stage {
            self.stages.push((Vec::new(), Vec::new()));
        }
        self.stages[stage].0.push(op);
        self.stages[stage].1.push(what);
    }
}

/// Builds the stage schedule for `series`. `with_wrap` prepends a range
/// reduction stage and is only meaningful for the quadratic.
pub fn build_schedule(series: &TaylorSeries, with_wrap: bool) -> Result<PipelineSchedule> {
    let terms: Vec<(u32, f64)> = series
        .coeffs
        .iter()
        .copied()
        .filter(|&(_, c)| c != 0.0)
        .collect();
    if terms.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    if with_wrap && series.family != Family::Quad {
        return Err(Error::Unsupported(format!(
            "range reduction stage is only defined for the quadratic activation, not {}",
            series.family
        )));
    }
    let v = series.variable.symbol();
    let mut prefix = Vec::new();
    if series.variable == Variable::Z {
        prefix.push(PipelineStage {
            index: -2,
            ops: vec![Op::AbsAdd],
            produces: "|x| + 1".into(),
        });
        prefix.push(PipelineStage {
            index: -1,
            ops: vec![Op::PreMul],
            produces: "z = (|x| + 1)·x".into(),
        });
    }
    if with_wrap {
        prefix.push(PipelineStage {
            index: -1,
            ops: vec![Op::WrapReduce],
            produces: "x wrapped onto (-2, 2]".into(),
        });
    }

    let mut plan = StagePlan::new();
    if series.family == Family::Quad {
        plan.push(0, Op::PowerMul { degree: 2 }, format!("{v}·|{v}|"));
        plan.push(0, Op::CoeffMul { degree: 1 }, format!("2{v}"));
        plan.push(1, Op::PolyAdd { degree: 2 }, format!("2{v} ∓ {v}²"));
    } else {
        if terms.len() < 2 {
            return Err(Error::Unsupported(format!(
                "a single-term {} series has no multiply pipeline",
                series.family
            )));
        }
        let odd = match series.parity {
            Parity::Even => false,
            Parity::Odd => true,
            Parity::Mixed => {
                return Err(Error::Unsupported("mixed-parity series".into()));
            }
        };
        let base = terms[0].0;
        if terms
            .iter()
            .enumerate()
            .any(|(i, &(d, _))| d != base + 2 * i as u32)
        {
            return Err(Error::Unsupported("series with gaps between degrees".into()));
        }
        if odd && !unit_magnitude(terms[0].1) {
            plan.push(0, Op::CoeffMul { degree: 1 }, format!("c1·{v}"));
        }
        if odd {
            plan.push(0, Op::PowerMul { degree: 2 }, format!("{v}^2"));
        }
        for (i, &(degree, c)) in terms.iter().enumerate().skip(1) {
            let power_stage = if odd { i } else { i - 1 };
            plan.push(power_stage, Op::PowerMul { degree }, format!("{v}^{degree}"));
            if !unit_magnitude(c) {
                plan.push(
                    power_stage + 1,
                    Op::CoeffMul { degree },
                    format!("c{degree}·{v}^{degree}"),
                );
            }
            plan.push(
                power_stage + 2,
                Op::PolyAdd { degree },
                format!("partial sum through {v}^{degree}"),
            );
        }
    }
    let mut stages = prefix;
    stages.extend(plan.stages.into_iter().enumerate().map(|(k, (ops, what))| {
        PipelineStage {
            index: k as i32,
            ops,
            produces: what.join("; "),
        }
    }));
    let schedule = PipelineSchedule {
        series: series.clone(),
        stages,
        with_wrap,
    };
    debug_assert!(schedule.stages.iter().all(|s| s.ops.len() <= 3));
    Ok(schedule)
}

/// Expected stage count for `terms` terms of `series`'s shape, excluding
/// optional wrap: `N + 1` even, `N + 2` odd, plus 2 for FINER, 2 for quad.
pub fn stage_count_formula(family: Family, terms: usize) -> usize {
    match family {
        Family::Quad => 2,
        Family::Sine => terms + 2,
        Family::Finer => terms + 4,
        Family::Gaussian | Family::Wire | Family::Sinc => terms + 1,
        Family::Relu => 0,
    }
}

/// Counts operators and converts stages to latency at `clock_mhz`.
pub fn estimate_resources(
    schedule: &PipelineSchedule,
    clock_mhz: f64,
    dsp_per_multiplier: u32,
) -> Result<ResourceEstimate> {
    if !(clock_mhz > 0.0 && clock_mhz.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "clock must be positive, got {clock_mhz} MHz"
        )));
    }
    let ops = schedule.stages.iter().flat_map(|s| s.ops.iter().copied());
    let (mut multipliers, mut adders, mut pow2) = (0, 0, 0);
    for op in ops {
        multipliers += op.multipliers();
        adders += op.adders();
        if let Op::CoeffMul { degree } = op {
            if is_pow2_coefficient(schedule.series.coefficient(degree)) {
                pow2 += 1;
            }
        }
    }
    let stages = schedule.stages.len();
    let dsp = dsp_per_multiplier as usize;
    Ok(ResourceEstimate {
        stages,
        latency_cycles: stages,
        latency_ns: stages as f64 * (1000.0 / clock_mhz),
        clock_mhz,
        fp_multipliers: multipliers,
        fp_adders: adders,
        dsp_per_multiplier,
        dsp_estimate: dsp * multipliers,
        pow2_coeff_multipliers: pow2,
        dsp_estimate_shift_aware: dsp * (multipliers - pow2),
        exact: schedule.series.is_exact(),
    })
}

/// Register file of one activation unit while a value is in flight.
#[derive(Debug, Clone)]
pub struct Registers {
    x: f32,
    v: f32,
    pre: f32,
    powers: Vec<f32>,
    terms: Vec<f32>,
    acc: Option<f32>,
}

impl Registers {
    pub fn output(&self) -> f32 {
        self.acc.unwrap_or(self.v)
    }
}

/// Executes a [`PipelineSchedule`] in binary32, one stage at a time.
#[derive(Debug, Clone)]
pub struct Datapath {
    stages: Vec<Vec<Op>>,
    coeffs: Vec<f32>,
    unit: Vec<bool>,
    lowest: u32,
    sign_symmetric: bool,
}

impl Datapath {
    pub fn new(schedule: &PipelineSchedule) -> Self {
        let s = &schedule.series;
        let top = s.max_degree() as usize;
        let mut coeffs = vec![0.0f32; top + 1];
        let mut unit = vec![false; top + 1];
        for &(d, c) in &s.coeffs {
            coeffs[d as usize] = c as f32;
            unit[d as usize] = unit_magnitude(c);
        }
        let lowest = s
            .coeffs
            .iter()
            .find(|&&(_, c)| c != 0.0)
            .map_or(0, |&(d, _)| d);
        Self {
            stages: schedule.stages.iter().map(|st| st.ops.clone()).collect(),
            coeffs,
            unit,
            lowest,
            sign_symmetric: s.sign_symmetric,
        }
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn load(&self, x: f32) -> Registers {
        let n = self.coeffs.len();
        Registers {
            x,
            v: x,
            pre: 0.0,
            powers: vec![0.0; n],
            terms: vec![0.0; n],
            acc: None,
        }
    }

    fn power(&self, r: &Registers, degree: u32) -> f32 {
        if degree == 1 {
            r.v
        } else {
            r.powers[degree as usize]
        }
    }

    fn term(&self, r: &Registers, degree: u32) -> f32 {
        let d = degree as usize;
        if degree == 0 {
            self.coeffs[0]
        } else if self.unit[d] {
            let p = self.power(r, degree);
            if self.coeffs[d] < 0.0 {
                -p
            } else {
                p
            }
        } else {
            r.terms[d]
        }
    }

    /// Applies every op of stage `k` to `r`. Ops inside a stage only read
    /// values produced by earlier stages.
    pub fn apply_stage(&self, k: usize, r: &mut Registers) {
        for &op in &self.stages[k] {
            match op {
                Op::WrapReduce => {
                    let p = QUAD_PERIOD as f32;
                    let mut w = r.v - p * (r.v * 0.25).round_ties_even();
                    if w <= -2.0 {
                        w += p;
                    }
                    r.v = w;
                }
                Op::AbsAdd => r.pre = r.x.abs() + 1.0,
                Op::PreMul => r.v = r.pre * r.x,
                Op::PowerMul { degree } => {
                    let d = degree as usize;
                    r.powers[d] = match degree {
                        2 if self.sign_symmetric => r.v * r.v.abs(),
                        2 => r.v * r.v,
                        3 => r.v * r.powers[2],
                        _ => r.powers[d - 2] * r.powers[2],
                    };
                }
                Op::CoeffMul { degree } => {
                    let p = self.power(r, degree);
                    r.terms[degree as usize] = self.coeffs[degree as usize] * p;
                }
                Op::PolyAdd { degree } => {
                    let base = match r.acc {
                        Some(a) => a,
                        None => self.term(r, self.lowest),
                    };
                    r.acc = Some(base + self.term(r, degree));
                }
            }
        }
    }

    /// Runs all stages on one input.
    pub fn eval_f32(&self, x: f32) -> f32 {
        let mut r = self.load(x);
        for k in 0..self.stages.len() {
            self.apply_stage(k, &mut r);
        }
        r.output()
    }
}

/// Largest deviation of the binary32 pipeline from the binary64 series over
/// `inputs`, normalized by the largest series magnitude (or 1 if smaller).
pub fn functional_check(series: &TaylorSeries, schedule: &PipelineSchedule, inputs: &[f64]) -> f64 {
    let dp = Datapath::new(schedule);
    let mut max_dev = 0.0f64;
    let mut max_mag = 1.0f64;
    for &x in inputs {
        let want = series_eval(series, x);
        let got = dp.eval_f32(x as f32) as f64;
        max_dev = max_dev.max((got - want).abs());
        max_mag = max_mag.max(want.abs());
    }
    max_dev / max_mag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;
    use crate::taylor::taylor_coeffs;

    fn schedule(family: Family, h: f64, terms: usize) -> PipelineSchedule {
        let kind = ActivationKind::new(family, 1.0, h).unwrap();
        build_schedule(&taylor_coeffs(&kind, terms).unwrap(), false).unwrap()
    }

    #[test]
    fn quad_two_stages() {
        let s = schedule(Family::Quad, 2.0, 2);
        assert_eq!(s.stage_count(), 2);
        let r = estimate_resources(&s, 100.0, 2).unwrap();
        assert_eq!(r.latency_ns, 20.0);
        assert_eq!((r.fp_multipliers, r.fp_adders, r.dsp_estimate), (2, 1, 4));
        assert_eq!(r.dsp_estimate_shift_aware, 2);
        assert!(r.exact);
        let dp = Datapath::new(&s);
        assert_eq!(dp.eval_f32(1.0), 1.0);
        assert_eq!(dp.eval_f32(-1.0), -1.0);
        assert_eq!(dp.eval_f32(0.5), 0.75);
    }

    #[test]
    fn sine_schedule_shape() {
        let s = schedule(Family::Sine, 2.0, 4);
        assert_eq!(s.stage_count(), 6);
        assert_eq!(s.stages[0].ops, vec![Op::PowerMul { degree: 2 }]);
        assert_eq!(s.stages[1].ops, vec![Op::PowerMul { degree: 3 }]);
        let r = estimate_resources(&s, 100.0, 2).unwrap();
        assert_eq!(r.latency_ns, 60.0);
        assert_eq!(r.fp_multipliers, 7);
        assert_eq!(r.dsp_estimate, 14);
        assert_eq!(Datapath::new(&s).eval_f32(0.0), 0.0);
    }

    #[test]
    fn wrap_only_for_quad() {
        let kind = ActivationKind::new(Family::Sine, 1.0, 2.0).unwrap();
        let series = taylor_coeffs(&kind, 4).unwrap();
        assert!(build_schedule(&series, true).is_err());
        let kind = ActivationKind::new(Family::Quad, 1.0, 2.0).unwrap();
        let s = build_schedule(&taylor_coeffs(&kind, 2).unwrap(), true).unwrap();
        assert_eq!(s.stage_count(), 3);
        let dp = Datapath::new(&s);
        assert_eq!(dp.eval_f32(3.0), -1.0);
        assert_eq!(dp.eval_f32(5.0), 1.0);
        let r = estimate_resources(&s, 100.0, 2).unwrap();
        assert_eq!(r.latency_ns, 30.0);
    }

    #[test]
    fn rejects_bad_clock() {
        let s = schedule(Family::Quad, 1.0, 2);
        assert!(estimate_resources(&s, 0.0, 2).is_err());
        assert!(estimate_resources(&s, -5.0, 2).is_err());
    }

    #[test]
    fn adds_only_schedule_has_no_multipliers() {
        let s = PipelineSchedule {
            series: taylor_coeffs(&ActivationKind::new(Family::Sine, 1.0, 1.0).unwrap(), 2)
                .unwrap(),
            stages: vec![PipelineStage {
                index: 0,
                ops: vec![Op::PolyAdd { degree: 3 }],
                produces: String::new(),
            }],
            with_wrap: false,
        };
        let r = estimate_resources(&s, 100.0, 2).unwrap();
        assert_eq!((r.fp_multipliers, r.dsp_estimate), (0, 0));
    }

    #[test]
    fn single_term_rejected() {
        let kind = ActivationKind::new(Family::Sine, 1.0, 1.0).unwrap();
        assert!(build_schedule(&taylor_coeffs(&kind, 1).unwrap(), false).is_err());
    }
}
