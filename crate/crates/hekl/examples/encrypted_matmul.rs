//! Encrypted element-wise polynomial matrix multiplication C += A*B: every
//! matrix element is an encrypted polynomial, every scalar product a
//! ciphertext multiplication with relinearization.

use hekl::bench::{BenchConfig, MatmulHarness, MatmulSpec};

fn main() -> hekl::Result<()> {
    let spec = MatmulSpec { m: 4, n: 4, k: 4, poly_degree: 8192 };
    let cfg = BenchConfig {
        rns: 2,
        seed: 21,
        ..BenchConfig::default()
    };
    let harness = MatmulHarness::new(spec, &cfg)?;
    let threads = cfg.resolved_threads();
    println!(
        "C += A*B with C {}x{}, A {}x{}, B {}x{}; {}-degree polynomial elements, {threads} threads",
        spec.m, spec.n, spec.m, spec.k, spec.k, spec.n, spec.poly_degree
    );
    let run = harness.run_once(threads)?;
    println!(
        "whole pipeline (encode, encrypt, multiply-accumulate, decrypt, verify): {:.2}s",
        run.elapsed_ns as f64 / 1e9
    );
    println!("max slot error vs plaintext oracle: {:.2e}", run.max_error);
    println!("pool stats: {:?}", harness.pool_stats());
    assert!(run.pass);
    Ok(())
}
