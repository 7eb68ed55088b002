//! Engine-wide transform properties: variant equivalence at every size,
//! the convolution theorem, and linearity.

use hekl::modular::{add_mod, mul_mod, sub_mod, Modulus};
use hekl::ntt::{all_variants, negacyclic_poly_mul, NttTables, NttVariant};
use hekl::rns::generate_primes;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_poly(n: usize, p: u64, rng: &mut impl Rng) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..p)).collect()
}

#[test]
fn every_variant_matches_naive_at_every_size() {
    let prime = generate_primes(1 << 15, 55, 1).unwrap()[0];
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for log_n in 4..=15u32 {
        let n = 1usize << log_n;
        let tables = NttTables::build(n, &prime).unwrap();
        let variants = all_variants(n);
        for _ in 0..100 {
            let poly = random_poly(n, prime.value(), &mut rng);
            let mut reference = poly.clone();
            tables
                .forward_simple(&mut reference, NttVariant::Naive)
                .unwrap();
            for &variant in &variants[1..] {
                let mut got = poly.clone();
                tables.forward_simple(&mut got, variant).unwrap();
                assert_eq!(got, reference, "n={n} {}", variant.label());
            }
        }
    }
}

#[test]
fn convolution_theorem_small_sizes_full() {
    let prime = Modulus::new(7681).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for log_n in 1..=8u32 {
        let n = 1usize << log_n;
        let tables = NttTables::build(n, &prime).unwrap();
        for _ in 0..10 {
            let a = random_poly(n, 7681, &mut rng);
            let b = random_poly(n, 7681, &mut rng);
            let mut expected = vec![0u64; n];
            for i in 0..n {
                for j in 0..n {
                    let prod = mul_mod(a[i], b[j], &prime);
                    if i + j < n {
                        expected[i + j] = add_mod(expected[i + j], prod, &prime);
                    } else {
                        expected[i + j - n] = sub_mod(expected[i + j - n], prod, &prime);
                    }
                }
            }
            for variant in all_variants(n) {
                let got = negacyclic_poly_mul(&a, &b, &tables, variant).unwrap();
                assert_eq!(got, expected, "n={n} {}", variant.label());
            }
        }
    }
}

#[test]
fn convolution_theorem_spot_check_32k() {
    let n = 1usize << 15;
    let prime = generate_primes(n, 55, 1).unwrap()[0];
    let tables = NttTables::build(n, &prime).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let a = random_poly(n, prime.value(), &mut rng);
    let b = random_poly(n, prime.value(), &mut rng);

    let fast = negacyclic_poly_mul(&a, &b, &tables, NttVariant::high_radix_for(8, n)).unwrap();

    // schoolbook oracle, accumulated in u128 with deferred reduction
    let p = prime.value();
    let mut expected = vec![0u64; n];
    for (k, slot) in expected.iter_mut().enumerate() {
        let mut plus: u128 = 0;
        let mut minus: u128 = 0;
        for i in 0..n {
            let j_wrap = k as i64 - i as i64;
            let (j, negate) = if j_wrap >= 0 {
                (j_wrap as usize, false)
            } else {
                ((j_wrap + n as i64) as usize, true)
            };
            let term = mul_mod(a[i], b[j], &prime) as u128;
            if negate {
                minus += term;
            } else {
                plus += term;
            }
        }
        let reduced = (plus % p as u128 + p as u128 - minus % p as u128) % p as u128;
        *slot = reduced as u64;
    }
    assert_eq!(fast, expected);
}

#[test]
fn transform_linearity_randomized() {
    let prime = generate_primes(1 << 12, 50, 1).unwrap()[0];
    let p = prime.value();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for log_n in [6u32, 10, 12] {
        let n = 1usize << log_n;
        let tables = NttTables::build(n, &prime).unwrap();
        for _ in 0..20 {
            let a = random_poly(n, p, &mut rng);
            let b = random_poly(n, p, &mut rng);
            let alpha = rng.gen_range(1..p);
            let combo: Vec<u64> = a
                .iter()
                .zip(&b)
                .map(|(&x, &y)| add_mod(mul_mod(alpha, x, &prime), y, &prime))
                .collect();
            let mut fa = a;
            let mut fb = b;
            let mut fc = combo;
            tables.forward_simple(&mut fa, NttVariant::Naive).unwrap();
            tables.forward_simple(&mut fb, NttVariant::Naive).unwrap();
            tables.forward_simple(&mut fc, NttVariant::Naive).unwrap();
            for i in 0..n {
                assert_eq!(
                    fc[i],
                    add_mod(mul_mod(alpha, fa[i], &prime), fb[i], &prime)
                );
            }
        }
    }
}
