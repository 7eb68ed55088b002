//! Generate, serialize, and replay a versioned JSON test vector for the
//! encode/encrypt/decrypt/decode pipeline.

use hekl::ckks::testvec::{TestVector, TestVectorParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> hekl::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let input: Vec<Complex64> = (0..512)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let vector = TestVector::round_trip(
        TestVectorParams {
            n: 1024,
            levels: 3,
            delta_bits: 40,
        },
        2024,
        &input,
        1e-4,
    );

    let json = vector.to_json();
    println!("vector: version {}, {} bytes of JSON", vector.version, json.len());

    let reloaded = TestVector::from_json(&json)?;
    let outcome = reloaded.run()?;
    println!(
        "replayed: max slot error {:.3e} against tolerance {:.0e} -> {}",
        outcome.max_error,
        outcome.tolerance,
        if outcome.pass { "pass" } else { "fail" }
    );
    Ok(())
}
