//! Published reference figures for the six activation designs.
//!
//! These are measured values (synthesis, place-and-route, training runs)
//! that the crate compares against but never tries to predict. Anything a
//! report prints from here goes under `reference_values`.

use serde::Serialize;

use crate::activation::Family;

/// Taylor expansion size needed for a 1% budget: `(terms, max degree)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermsRef {
    pub terms: usize,
    pub max_degree: u32,
}

/// FPGA cost of one activation module (VCU128, 100 MHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpgaRef {
    pub lut: u32,
    pub ff: u32,
    pub dsp: u32,
    pub power_mw: f64,
    pub latency_ns: f64,
}

/// 28 nm synthesis of one activation module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsicRef {
    pub area_um2: f64,
    pub static_mw: f64,
    pub dynamic_mw: f64,
    pub energy_uj: f64,
}

/// One row of the accelerator cost breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentRef {
    pub name: &'static str,
    pub lut: u32,
    pub ff: u32,
    pub dsp: u32,
    pub lutram: u32,
    pub bram: u32,
    pub power_mw: f64,
    pub latency_ns: f64,
}

/// Clock the FPGA figures were taken at.
pub const REFERENCE_CLOCK_MHZ: f64 = 100.0;

fn range_index(range_half_width: f64) -> Option<usize> {
    if range_half_width == 2.0 {
        Some(0)
    } else if range_half_width == 1.0 {
        Some(1)
    } else {
        None
    }
}

pub fn taylor_terms(family: Family, range_half_width: f64) -> Option<TermsRef> {
    let r = range_index(range_half_width)?;
    let t = |terms, max_degree| TermsRef { terms, max_degree };
    let rows = match family {
        Family::Sine => [t(4, 7), t(2, 3)],
        Family::Gaussian => [t(16, 30), t(6, 10)],
        Family::Wire => [t(31, 60), t(7, 12)],
        // degree in the substituted variable z = (|x| + 1) x
        Family::Finer => [t(10, 19), t(4, 7)],
        Family::Sinc => [t(4, 6), t(3, 4)],
        Family::Quad => [t(2, 2), t(2, 2)],
        Family::Relu => return None,
    };
    Some(rows[r])
}

pub fn fpga_af(family: Family, range_half_width: f64) -> Option<FpgaRef> {
    let r = range_index(range_half_width)?;
    let f = |lut, ff, dsp, power_mw, latency_ns| FpgaRef {
        lut,
        ff,
        dsp,
        power_mw,
        latency_ns,
    };
    let rows = match family {
        Family::Sine => [f(3868, 477, 14, 112.0, 60.0), f(1312, 223, 6, 35.0, 40.0)],
        Family::Gaussian => [f(18520, 1790, 58, 520.0, 170.0), f(5835, 535, 18, 153.0, 70.0)],
        Family::Wire => [f(37069, 3682, 120, 1055.0, 320.0), f(7158, 691, 24, 196.0, 80.0)],
        Family::Finer => [f(12150, 1334, 40, 365.0, 140.0), f(4487, 572, 16, 127.0, 80.0)],
        Family::Sinc => [f(3433, 314, 12, 85.0, 50.0), f(2206, 189, 8, 49.0, 50.0)],
        Family::Quad => [f(1258, 97, 2, 28.0, 20.0), f(1258, 97, 2, 28.0, 20.0)],
        Family::Relu => return None,
    };
    Some(rows[r])
}

/// Latency in cycles at the reference clock.
pub fn fpga_latency_cycles(family: Family, range_half_width: f64) -> Option<usize> {
    fpga_af(family, range_half_width)
        .map(|r| (r.latency_ns * REFERENCE_CLOCK_MHZ / 1000.0).round() as usize)
}

pub fn asic_af(family: Family, range_half_width: f64) -> Option<AsicRef> {
    let r = range_index(range_half_width)?;
    let a = |area_um2, static_mw, dynamic_mw, energy_uj| AsicRef {
        area_um2,
        static_mw,
        dynamic_mw,
        energy_uj,
    };
    let rows = match family {
        Family::Sine => [a(8415.0, 6.83, 23.30, 36.79), a(3421.0, 3.25, 8.97, 14.16)],
        Family::Gaussian => [a(37099.0, 20.60, 112.25, 177.30), a(11274.0, 8.10, 31.48, 49.72)],
        Family::Wire => [a(74536.0, 32.00, 228.75, 362.19), a(14287.0, 10.10, 40.45, 63.89)],
        Family::Finer => [a(25765.0, 15.34, 69.45, 109.60), a(9918.0, 7.19, 27.25, 43.04)],
        Family::Sinc => [a(6582.0, 5.12, 16.55, 26.10), a(4092.0, 3.23, 9.50, 15.00)],
        Family::Quad => [a(1914.0, 1.54, 6.14, 9.69), a(1914.0, 1.54, 6.14, 9.69)],
        Family::Relu => return None,
    };
    Some(rows[r])
}

/// Cost breakdown of the five-layer accelerator built with sine activations.
pub const ACCELERATOR_BREAKDOWN: [ComponentRef; 5] = [
    ComponentRef {
        name: "MAC Array",
        lut: 244_759,
        ff: 442_268,
        dsp: 5_130,
        lutram: 14_394,
        bram: 0,
        power_mw: 6_350.0,
        latency_ns: 3_760.0,
    },
    ComponentRef {
        name: "Mem. Ctrl.",
        lut: 60,
        ff: 55,
        dsp: 0,
        lutram: 0,
        bram: 0,
        power_mw: 10.0,
        latency_ns: 80.0,
    },
    ComponentRef {
        name: "Storage",
        lut: 0,
        ff: 0,
        dsp: 0,
        lutram: 0,
        bram: 231,
        power_mw: 615.0,
        latency_ns: 40.0,
    },
    ComponentRef {
        name: "AF",
        lut: 5_032,
        ff: 388,
        dsp: 8,
        lutram: 0,
        bram: 0,
        power_mw: 112.0,
        latency_ns: 80.0,
    },
    ComponentRef {
        name: "Others",
        lut: 525,
        ff: 99_015,
        dsp: 0,
        lutram: 396,
        bram: 0,
        power_mw: 455.0,
        latency_ns: 10_280.0,
    },
];

pub const ACCELERATOR_TOTAL: ComponentRef = ComponentRef {
    name: "Total",
    lut: 250_376,
    ff: 541_726,
    dsp: 5_138,
    lutram: 14_790,
    bram: 231,
    power_mw: 7_542.0,
    latency_ns: 14_240.0,
};

/// Printed value of the third-harmonic coefficient. It does not follow
/// from `32 / (π³ n³)`, which gives about 0.0382 for `n = 3`.
pub const PRINTED_B3: f64 = 0.129;
/// Printed leading coefficient.
pub const PRINTED_B1: f64 = 1.032;

/// Kodak01..04 PSNR in dB.
pub fn kodak_psnr(family: Family) -> Option<[f64; 4]> {
    match family {
        Family::Sine => Some([30.52, 35.21, 36.26, 34.52]),
        Family::Wire => Some([30.95, 35.61, 37.96, 35.78]),
        Family::Finer => Some([35.17, 37.90, 40.87, 38.65]),
        Family::Gaussian => Some([29.94, 34.20, 37.91, 34.36]),
        Family::Quad => Some([32.58, 36.21, 38.86, 36.32]),
        Family::Sinc | Family::Relu => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_sums_to_total() {
        let sum = |f: fn(&ComponentRef) -> f64| ACCELERATOR_BREAKDOWN.iter().map(f).sum::<f64>();
        assert_eq!(sum(|c| c.lut as f64), ACCELERATOR_TOTAL.lut as f64);
        assert_eq!(sum(|c| c.ff as f64), ACCELERATOR_TOTAL.ff as f64);
        assert_eq!(sum(|c| c.dsp as f64), ACCELERATOR_TOTAL.dsp as f64);
        assert_eq!(sum(|c| c.lutram as f64), ACCELERATOR_TOTAL.lutram as f64);
        assert_eq!(sum(|c| c.power_mw), ACCELERATOR_TOTAL.power_mw);
        assert_eq!(sum(|c| c.latency_ns), ACCELERATOR_TOTAL.latency_ns);
    }

    #[test]
    fn latency_cycles() {
        let cycles: Vec<_> = Family::STUDIED
            .iter()
            .map(|&f| fpga_latency_cycles(f, 2.0).unwrap())
            .collect();
        assert_eq!(cycles, [6, 17, 32, 14, 5, 2]);
        assert!(taylor_terms(Family::Sine, 3.0).is_none());
    }
}
