//! The full approximate-arithmetic pipeline: encode complex slots, encrypt,
//! evaluate (add, multiply-relinearize-rescale), decrypt, decode, and
//! measure the slot error.

use hekl::ckks::{CkksContext, CkksParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> hekl::Result<()> {
    let params = CkksParams::default_chain(8192, 4, 40, 42)?;
    println!(
        "n = {}, levels = {}, scale = 2^40, sigma = {}",
        params.n(),
        params.levels(),
        params.sigma()
    );
    let ctx = CkksContext::new(params)?;
    let keys = ctx.keygen(&[])?;

    let slots = ctx.params().slots();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let z1: Vec<Complex64> = (0..slots)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let z2: Vec<Complex64> = (0..slots)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();

    let c1 = ctx.encrypt(&ctx.encode(&z1)?, &keys.public)?;
    let c2 = ctx.encrypt(&ctx.encode(&z2)?, &keys.public)?;

    let max_err = |got: &[Complex64], want: &[Complex64]| {
        got.iter()
            .zip(want)
            .map(|(g, w)| (g - w).norm())
            .fold(0.0f64, f64::max)
    };

    // fresh round trip
    let decoded = ctx.decode(&ctx.decrypt(&c1, &keys.secret)?)?;
    println!("round-trip max slot error:   {:.3e}", max_err(&decoded, &z1));

    // homomorphic addition
    let sum = ctx.add(&c1, &c2)?;
    let decoded = ctx.decode(&ctx.decrypt(&sum, &keys.secret)?)?;
    let expect: Vec<Complex64> = z1.iter().zip(&z2).map(|(a, b)| a + b).collect();
    println!("addition max slot error:     {:.3e}", max_err(&decoded, &expect));

    // multiply, relinearize, rescale: one level consumed
    let product = ctx.mul_lin_rs(&c1, &c2, &keys.evaluation)?;
    println!(
        "product level {} (from {}), scale {:.4e}",
        product.level(),
        c1.level(),
        product.scale()
    );
    let decoded = ctx.decode(&ctx.decrypt(&product, &keys.secret)?)?;
    let expect: Vec<Complex64> = z1.iter().zip(&z2).map(|(a, b)| a * b).collect();
    println!("product max slot error:      {:.3e}", max_err(&decoded, &expect));
    Ok(())
}
