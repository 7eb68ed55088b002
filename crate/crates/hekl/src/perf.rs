//! Analytic operational-density model for the transform kernels, plus
//! roofline classification of measured profiles.
//!
//! The model derives ALU and memory-traffic totals from the pass structure
//! alone; agreement with the counters measured by the engine is a checked
//! property, not an implementation artifact: the engine accumulates its
//! counters while executing, the model recomputes them here from closed
//! form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ntt::{KernelProfile, NttVariant};

/// Per-work-item 64-bit integer ALU operation counts for one kernel round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RadixCost {
    pub radix: u32,
    /// Index/address arithmetic and other bookkeeping ops.
    pub other_ops: u64,
    /// Butterfly arithmetic ops.
    pub butterfly_ops: u64,
    pub total_ops: u64,
}

const RADIX_COSTS: [RadixCost; 4] = [
    RadixCost { radix: 2, other_ops: 20, butterfly_ops: 28, total_ops: 48 },
    RadixCost { radix: 4, other_ops: 45, butterfly_ops: 112, total_ops: 157 },
    RadixCost { radix: 8, other_ops: 120, butterfly_ops: 336, total_ops: 456 },
    RadixCost { radix: 16, other_ops: 260, butterfly_ops: 896, total_ops: 1156 },
];

/// The fixed cost row for a supported radix.
pub fn radix_cost(radix: u32) -> Result<RadixCost> {
    RADIX_COSTS
        .iter()
        .find(|c| c.radix == radix)
        .copied()
        .ok_or_else(|| Error::param(format!("no cost row for radix {radix}")))
}

/// Machine envelope for roofline classification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MachineParams {
    pub peak_int64_ops_per_s: f64,
    pub mem_bandwidth_bytes_per_s: f64,
}

impl MachineParams {
    /// Density at which the machine transitions from memory- to
    /// compute-bound.
    pub fn knee(&self) -> f64 {
        self.peak_int64_ops_per_s / self.mem_bandwidth_bytes_per_s
    }
}

/// Which roofline regime a kernel configuration lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    Memory,
    Compute,
}

/// Operational-density summary for one kernel configuration.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub variant: String,
    pub n: usize,
    pub total_alu_ops: u64,
    pub total_mem_bytes: u64,
    /// ALU operations per byte of main-memory traffic.
    pub density: f64,
    /// Present when machine parameters were supplied.
    pub bound: Option<Bound>,
}

impl DensityReport {
    fn classify(mut self, machine: Option<&MachineParams>) -> DensityReport {
        self.bound = machine.map(|mp| {
            if self.density >= mp.knee() {
                Bound::Compute
            } else {
                Bound::Memory
            }
        });
        self
    }
}

/// Predicted ALU and memory totals for a forward transform of degree `n`
/// under `variant`.
///
/// The naive schedule streams the array once per butterfly level: element
/// traffic `2n log2 n`, ops `(n/2) * 48 * log2 n`, hence density exactly
/// 1.5 at any size. A staged schedule pays `2n` elements per pass that
/// touches the main array (the leading pass plus every pass whose top gap
/// exceeds `block_gap`) and `2n` for the block-resident remainder; staged
/// radix-8 therefore lands at `4n` elements and density 8.9 for a 32K-point
/// transform.
pub fn operational_density(
    variant: NttVariant,
    n: usize,
    machine: Option<&MachineParams>,
) -> Result<DensityReport> {
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::param(format!("degree {n} is not a power of two >= 2")));
    }
    variant.validate(n)?;
    let log_n = n.trailing_zeros();

    let mut alu: u64 = 0;
    let mut mem_elements: u64 = 0;
    match variant {
        NttVariant::Naive => {
            alu = (n as u64 / 2) * radix_cost(2)?.total_ops * log_n as u64;
            mem_elements = 2 * n as u64 * log_n as u64;
        }
        NttVariant::Staged2 { block_gap } | NttVariant::HighRadix { block_gap, .. } => {
            let log_radix = match variant {
                NttVariant::HighRadix { radix, .. } => radix.trailing_zeros(),
                _ => 1,
            };
            let mut remaining = log_n;
            let mut gap = n >> 1;
            let mut first = true;
            let mut any_resident = false;
            while remaining > 0 {
                let chunk = log_radix.min(remaining);
                let round_radix = 1u64 << chunk;
                alu += (n as u64 / round_radix) * radix_cost(round_radix as u32)?.total_ops;
                if first || gap > block_gap {
                    mem_elements += 2 * n as u64;
                } else {
                    any_resident = true;
                }
                gap >>= chunk;
                remaining -= chunk;
                first = false;
            }
            if any_resident {
                // one load + one store of every element for the whole
                // block-resident phase
                mem_elements += 2 * n as u64;
            }
        }
    }

    let total_mem_bytes = mem_elements * 8;
    Ok(DensityReport {
        variant: variant.label().to_string(),
        n,
        total_alu_ops: alu,
        total_mem_bytes,
        density: alu as f64 / total_mem_bytes as f64,
        bound: None,
    }
    .classify(machine))
}

/// Density of a measured profile, classified against the machine envelope.
pub fn classify(
    profile: &KernelProfile,
    n: usize,
    variant: NttVariant,
    machine: &MachineParams,
) -> Result<DensityReport> {
    if profile.mem_elements == 0 {
        return Err(Error::param("profile reports zero memory traffic"));
    }
    let bytes = profile.mem_bytes();
    Ok(DensityReport {
        variant: variant.label().to_string(),
        n,
        total_alu_ops: profile.alu_ops,
        total_mem_bytes: bytes,
        density: profile.alu_ops as f64 / bytes as f64,
        bound: None,
    }
    .classify(Some(machine)))
}
