//! Instrumentation counters for transform kernels.

/// Per-run counters describing the work a transform performed. Memory
/// traffic counts element loads and stores against the main (modeled
/// "global") array; block-buffer and twiddle traffic is excluded, matching
/// the accounting used by the operational-density model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct KernelProfile {
    /// Number of two-point butterfly evaluations.
    pub butterflies: u64,
    /// 64-bit integer ALU operations, charged per work-item per round from
    /// the per-radix cost table.
    pub alu_ops: u64,
    /// Element loads + stores against the main array.
    pub mem_elements: u64,
    /// Kernel rounds executed (one radix-R pass counts as one round).
    pub rounds: u64,
}

impl KernelProfile {
    pub fn reset(&mut self) {
        *self = KernelProfile::default();
    }

    /// Memory traffic in bytes (8 bytes per element).
    pub fn mem_bytes(&self) -> u64 {
        self.mem_elements * 8
    }

    /// Charge one radix-`2^log_radix` round over an `n`-point sequence.
    pub(crate) fn record_round(&mut self, n: usize, log_radix: u32) {
        let radix = 1u64 << log_radix;
        let work_items = n as u64 / radix;
        self.rounds += 1;
        self.butterflies += work_items * (radix / 2) * log_radix as u64;
        self.alu_ops += work_items * crate::perf::radix_cost(radix as u32).unwrap().total_ops;
    }

    /// Charge one full load + store pass over the main array.
    pub(crate) fn record_global_pass(&mut self, n: usize) {
        self.mem_elements += 2 * n as u64;
    }

    pub(crate) fn merge(&mut self, other: &KernelProfile) {
        self.butterflies += other.butterflies;
        self.alu_ops += other.alu_ops;
        self.mem_elements += other.mem_elements;
        self.rounds += other.rounds;
    }
}
