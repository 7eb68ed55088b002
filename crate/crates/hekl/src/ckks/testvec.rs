//! Versioned JSON test vectors: parameters, seed, input slots, expected
//! decoded slots, and a tolerance. A vector is self-contained: loading one
//! rebuilds the context, runs encode/encrypt/decrypt/decode, and checks the
//! result against the recorded expectation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{CkksContext, CkksParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestVectorParams {
    pub n: usize,
    pub levels: usize,
    pub delta_bits: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestVector {
    pub version: u32,
    pub params: TestVectorParams,
    pub seed: u64,
    /// Input slots as (re, im) pairs.
    pub input_slots: Vec<[f64; 2]>,
    /// What decode(decrypt(encrypt(encode(input)))) must approximate.
    pub expected_slots: Vec<[f64; 2]>,
    /// Maximum per-slot absolute error.
    pub tolerance: f64,
}

/// Outcome of running a vector.
#[derive(Debug, Clone, Serialize)]
pub struct TestVectorReport {
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl TestVector {
    /// A round-trip vector: the expectation is the input itself.
    pub fn round_trip(
        params: TestVectorParams,
        seed: u64,
        input: &[Complex64],
        tolerance: f64,
    ) -> TestVector {
        let slots: Vec<[f64; 2]> = input.iter().map(|z| [z.re, z.im]).collect();
        TestVector {
            version: FORMAT_VERSION,
            params,
            seed,
            expected_slots: slots.clone(),
            input_slots: slots,
            tolerance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(json: &str) -> Result<TestVector> {
        let vec: TestVector = serde_json::from_str(json)
            .map_err(|e| Error::param(format!("malformed test vector: {e}")))?;
        if vec.version != FORMAT_VERSION {
            return Err(Error::param(format!(
                "test vector version {} unsupported (expected {FORMAT_VERSION})",
                vec.version
            )));
        }
        if vec.input_slots.len() != vec.params.n / 2
            || vec.expected_slots.len() != vec.params.n / 2
        {
            return Err(Error::param("slot count does not match n/2"));
        }
        Ok(vec)
    }

    /// Rebuild the context from the recorded parameters, run the
    /// encode/encrypt/decrypt/decode pipeline, and compare slots.
    pub fn run(&self) -> Result<TestVectorReport> {
        let params = CkksParams::default_chain(
            self.params.n,
            self.params.levels,
            self.params.delta_bits,
            self.seed,
        )?;
        let ctx = CkksContext::new(params)?;
        let keys = ctx.keygen(&[])?;
        let input: Vec<Complex64> = self
            .input_slots
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let pt = ctx.encode(&input)?;
        let ct = ctx.encrypt(&pt, &keys.public)?;
        let decoded = ctx.decode(&ctx.decrypt(&ct, &keys.secret)?)?;
        let max_error = decoded
            .iter()
            .zip(&self.expected_slots)
            .map(|(got, &[re, im])| (got - Complex64::new(re, im)).norm())
            .fold(0.0f64, f64::max);
        Ok(TestVectorReport {
            max_error,
            tolerance: self.tolerance,
            pass: max_error <= self.tolerance,
        })
    }
}
