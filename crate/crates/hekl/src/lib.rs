//! RNS-CKKS homomorphic-encryption kernels built around a negacyclic NTT
//! engine with a ladder of interchangeable kernel variants (naive radix-2,
//! cache-blocked staged, high-radix register kernels with fused final
//! reduction), a reusable-buffer memory cache, and an operational-density
//! performance model.
//!
//! Start with the runnable programs under `examples/`, one per major
//! capability, or the `hekl-bench` binary for the benchmark harness.

pub mod error;
pub mod modular;
pub mod ntt;
pub mod perf;
pub mod pool;
pub mod bench;
pub mod ckks;
pub mod rns;

pub use error::{Error, Result};
