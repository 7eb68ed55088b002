//! Multiply two polynomials modulo x^n + 1 through the transform engine and
//! check the result against the schoolbook convolution.

use hekl::modular::{add_mod, mul_mod, sub_mod, Modulus};
use hekl::ntt::{negacyclic_poly_mul, NttTables, NttVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn schoolbook(a: &[u64], b: &[u64], m: &Modulus) -> Vec<u64> {
    let n = a.len();
    let mut c = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            let prod = mul_mod(a[i], b[j], m);
            if i + j < n {
                c[i + j] = add_mod(c[i + j], prod, m);
            } else {
                // wrap-around picks up the negacyclic sign
                c[i + j - n] = sub_mod(c[i + j - n], prod, m);
            }
        }
    }
    c
}

fn main() -> hekl::Result<()> {
    let n = 256;
    let prime = Modulus::new(7681)?;
    let tables = NttTables::build(n, &prime)?;
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..prime.value())).collect();
    let b: Vec<u64> = (0..n).map(|_| rng.gen_range(0..prime.value())).collect();

    let fast = negacyclic_poly_mul(&a, &b, &tables, NttVariant::high_radix_for(8, n))?;
    let slow = schoolbook(&a, &b, &prime);
    assert_eq!(fast, slow);
    println!("transform product matches schoolbook for n = {n}");

    // x * x = -1 mod x^2 + 1
    let t2 = NttTables::build(2, &Modulus::new(5)?)?;
    let c = negacyclic_poly_mul(&[0, 1], &[0, 1], &t2, NttVariant::Naive)?;
    println!("x * x mod (x^2 + 1, 5) = {c:?} (i.e. -1)");
    Ok(())
}
