//! Walk the transform kernel ladder (naive radix-2, cache-blocked staged,
//! high-radix register kernels) and show they produce identical bits while
//! touching main memory very differently.

use std::time::Instant;

use hekl::modular::Modulus;
use hekl::ntt::{all_variants, KernelProfile, NttTables};
use hekl::rns::generate_primes;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> hekl::Result<()> {
    let n = 1 << 15;
    let prime: Modulus = generate_primes(n, 55, 1)?[0];
    let tables = NttTables::build(n, &prime)?;
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let input: Vec<u64> = (0..n).map(|_| rng.gen_range(0..prime.value())).collect();

    let mut reference: Option<Vec<u64>> = None;
    println!("{n}-point negacyclic transform over p = {}", prime.value());
    println!(
        "{:<10} {:>12} {:>14} {:>10} {:>12} {:>10}",
        "variant", "rounds", "mem elements", "ops/byte", "time (us)", "bits"
    );
    for variant in all_variants(n) {
        let mut poly = input.clone();
        let mut profile = KernelProfile::default();
        let start = Instant::now();
        tables.forward(&mut poly, variant, &mut profile)?;
        let elapsed = start.elapsed();

        let identical = match &reference {
            None => {
                reference = Some(poly.clone());
                true
            }
            Some(r) => r == &poly,
        };
        println!(
            "{:<10} {:>12} {:>14} {:>10.2} {:>12.1} {:>10}",
            variant.label(),
            profile.rounds,
            profile.mem_elements,
            profile.alu_ops as f64 / profile.mem_bytes() as f64,
            elapsed.as_secs_f64() * 1e6,
            if identical { "identical" } else { "DIFFER" }
        );

        // and back again
        tables.inverse(&mut poly, variant, &mut KernelProfile::default())?;
        assert_eq!(poly, input, "round trip must be exact");
    }
    println!("all variants round-trip exactly");
    Ok(())
}
