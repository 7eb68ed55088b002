//! Rotate an encrypted slot vector cyclically with Galois keys.

use hekl::ckks::{CkksContext, CkksParams};
use num_complex::Complex64;

fn main() -> hekl::Result<()> {
    let ctx = CkksContext::new(CkksParams::default_chain(64, 2, 30, 5)?)?;
    let keys = ctx.keygen(&[1, 4])?;
    let slots = ctx.params().slots();

    // a recognizable ramp: 0, 1, 2, ...
    let z: Vec<Complex64> = (0..slots).map(|j| Complex64::new(j as f64 / 10.0, 0.0)).collect();
    let ct = ctx.encrypt(&ctx.encode(&z)?, &keys.public)?;

    for step in [1usize, 4] {
        let rotated = ctx.rotate(&ct, step, &keys.galois)?;
        let decoded = ctx.decode(&ctx.decrypt(&rotated, &keys.secret)?)?;
        let head: Vec<f64> = decoded.iter().take(6).map(|v| (v.re * 10.0).round() / 10.0).collect();
        println!("rotate by {step}: first slots {head:?}");
        let expect: Vec<Complex64> = (0..slots).map(|j| z[(j + step) % slots]).collect();
        let err = decoded
            .iter()
            .zip(&expect)
            .map(|(g, w)| (g - w).norm())
            .fold(0.0f64, f64::max);
        println!("            max slot error {err:.3e}");
    }
    Ok(())
}
