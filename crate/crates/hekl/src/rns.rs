//! Residue number system machinery: NTT-friendly prime generation, basis
//! bookkeeping, the ciphertext-modulus chain, and rescale / modulus-switch
//! arithmetic on residue matrices.
//!
//! Big-integer CRT composition exists for oracles and decoding only; the
//! evaluation hot path works purely on word-sized residues.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::modular::{inv_mod, is_prime, sub_mod, Modulus, MulOperand};
use crate::pool::{BufferPool, PooledBuffer};

/// Deterministically generate `count` distinct NTT-friendly primes of the
/// given bit size, descending. Every prime satisfies `p ≡ 1 (mod 2n)`.
pub fn generate_primes(n: usize, bit_size: u32, count: usize) -> Result<Vec<Modulus>> {
    if !(3..=61).contains(&bit_size) {
        return Err(Error::param(format!(
            "prime bit size {bit_size} outside supported range 3..=61"
        )));
    }
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::param(format!("degree {n} is not a power of two >= 2")));
    }
    let stride = 2 * n as u64;
    let hi = (1u64 << bit_size) - 1;
    let lo = 1u64 << (bit_size - 1);
    let mut primes = Vec::with_capacity(count);
    // largest candidate <= hi congruent to 1 mod 2n
    let mut candidate = hi - ((hi - 1) % stride);
    while primes.len() < count && candidate >= lo && candidate > stride {
        if is_prime(candidate) {
            primes.push(Modulus::new(candidate)?);
        }
        candidate -= stride;
    }
    if primes.len() < count {
        return Err(Error::PrimeExhausted(format!(
            "found {} of {count} {bit_size}-bit primes congruent to 1 mod {stride}",
            primes.len()
        )));
    }
    Ok(primes)
}

/// An ordered prime basis `(q_1 .. q_L)` with optional key-switching prime
/// `P`, plus the per-level precomputations rescale and key switching need.
#[derive(Debug, Clone)]
pub struct RnsBasis {
    primes: Vec<Modulus>,
    special: Option<Modulus>,
    /// `rescale_inv[l-2][i]` = `(q_l)^-1 mod q_{i+1}` for a rescale from
    /// level `l` (dropping `primes[l-1]`), `i < l-1`.
    rescale_inv: Vec<Vec<MulOperand>>,
    /// `P^-1 mod q_i`.
    special_inv: Vec<MulOperand>,
    /// `P mod q_i`.
    special_mod: Vec<u64>,
}

impl RnsBasis {
    /// Validate and precompute a basis for degree `n`. All primes must be
    /// distinct, below 2^60, and congruent to 1 mod 2n; `special`, when
    /// present, must additionally exceed every chain prime.
    pub fn new(n: usize, primes: Vec<Modulus>, special: Option<Modulus>) -> Result<RnsBasis> {
        if primes.is_empty() {
            return Err(Error::param("empty prime basis"));
        }
        let stride = 2 * n as u64;
        let mut all: Vec<u64> = primes.iter().map(|m| m.value()).collect();
        if let Some(p) = &special {
            all.push(p.value());
        }
        for (i, &p) in all.iter().enumerate() {
            if p >= (1u64 << 60) {
                return Err(Error::param(format!("prime {p} is not below 2^60")));
            }
            if p % stride != 1 {
                return Err(Error::param(format!("prime {p} is not 1 mod {stride}")));
            }
            if all[..i].contains(&p) {
                return Err(Error::param(format!("duplicate prime {p}")));
            }
        }
        if let Some(p) = &special {
            if primes.iter().any(|q| q.value() >= p.value()) {
                return Err(Error::param(
                    "key-switching prime must exceed every chain prime",
                ));
            }
        }

        let mut rescale_inv = Vec::new();
        for l in 2..=primes.len() {
            let dropped = primes[l - 1].value();
            let mut row = Vec::with_capacity(l - 1);
            for q in &primes[..l - 1] {
                let inv = inv_mod(q.reduce_u64(dropped), q)?;
                row.push(MulOperand::new(inv, q));
            }
            rescale_inv.push(row);
        }
        let (special_inv, special_mod) = match &special {
            Some(sp) => {
                let mut invs = Vec::with_capacity(primes.len());
                let mut mods = Vec::with_capacity(primes.len());
                for q in &primes {
                    let reduced = q.reduce_u64(sp.value());
                    invs.push(MulOperand::new(inv_mod(reduced, q)?, q));
                    mods.push(reduced);
                }
                (invs, mods)
            }
            None => (Vec::new(), Vec::new()),
        };
        Ok(RnsBasis {
            primes,
            special,
            rescale_inv,
            special_inv,
            special_mod,
        })
    }

    /// Number of chain primes (the maximum level).
    pub fn levels(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[Modulus] {
        &self.primes
    }

    pub fn prime(&self, i: usize) -> &Modulus {
        &self.primes[i]
    }

    pub fn special(&self) -> Option<&Modulus> {
        self.special.as_ref()
    }

    pub(crate) fn special_inv(&self, i: usize) -> &MulOperand {
        &self.special_inv[i]
    }

    pub(crate) fn special_mod(&self, i: usize) -> u64 {
        self.special_mod[i]
    }

    pub(crate) fn rescale_inv(&self, level: usize, i: usize) -> &MulOperand {
        &self.rescale_inv[level - 2][i]
    }

    /// Product of the first `level` chain primes, as a float (headroom
    /// checks only).
    pub fn modulus_product_f64(&self, level: usize) -> f64 {
        self.primes[..level]
            .iter()
            .map(|m| m.value() as f64)
            .product()
    }
}

/// Which representation the residue rows currently hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyDomain {
    Coefficient,
    Ntt,
}

/// A degree-`n` polynomial as `level` rows of residues, one row per chain
/// prime, tagged with its domain.
#[derive(Debug)]
pub struct RnsPolynomial {
    n: usize,
    level: usize,
    domain: PolyDomain,
    data: PooledBuffer,
}

impl RnsPolynomial {
    /// All-zero polynomial backed by a plain heap buffer.
    pub fn zero(n: usize, level: usize, domain: PolyDomain) -> RnsPolynomial {
        RnsPolynomial {
            n,
            level,
            domain,
            data: PooledBuffer::unpooled(vec![0u64; n * level]),
        }
    }

    /// All-zero polynomial drawn from `pool`.
    pub fn zero_in(pool: &BufferPool, n: usize, level: usize, domain: PolyDomain) -> RnsPolynomial {
        let mut data = pool.acquire(n * level);
        data.fill(0);
        RnsPolynomial {
            n,
            level,
            domain,
            data,
        }
    }

    /// Pool-backed polynomial whose rows the caller fully overwrites.
    pub(crate) fn uninit_in(
        pool: &BufferPool,
        n: usize,
        level: usize,
        domain: PolyDomain,
    ) -> RnsPolynomial {
        RnsPolynomial {
            n,
            level,
            domain,
            data: pool.acquire(n * level),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn domain(&self) -> PolyDomain {
        self.domain
    }

    pub(crate) fn set_domain(&mut self, domain: PolyDomain) {
        self.domain = domain;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.data.chunks(self.n)
    }

    /// Copy into a pool-backed clone.
    pub fn clone_in(&self, pool: &BufferPool) -> RnsPolynomial {
        let mut data = pool.acquire(self.n * self.level);
        data.copy_from_slice(&self.data);
        RnsPolynomial {
            n: self.n,
            level: self.level,
            domain: self.domain,
            data,
        }
    }
}

impl Clone for RnsPolynomial {
    fn clone(&self) -> Self {
        RnsPolynomial {
            n: self.n,
            level: self.level,
            domain: self.domain,
            data: self.data.clone(),
        }
    }
}

/// Divide by the level's last prime: for each retained prime `q_i`,
/// `out_i = (in_i - in_last) * q_last^-1 mod q_i`, realizing the rounded
/// division `floor(x / q_last)` with at most one unit of error per
/// coefficient. Input must be in coefficient domain at level >= 2.
pub fn rescale_rows(
    poly: &RnsPolynomial,
    basis: &RnsBasis,
    pool: &BufferPool,
) -> Result<RnsPolynomial> {
    if poly.domain() != PolyDomain::Coefficient {
        return Err(Error::state("rescale requires coefficient domain"));
    }
    let level = poly.level();
    if level < 2 {
        return Err(Error::state("cannot rescale below level 1"));
    }
    let mut out = RnsPolynomial::uninit_in(pool, poly.n(), level - 1, PolyDomain::Coefficient);
    let last = poly.row(level - 1);
    for i in 0..level - 1 {
        let q = basis.prime(i);
        let inv = basis.rescale_inv(level, i);
        let src = poly.row(i);
        let dst = out.row_mut(i);
        for j in 0..poly.n() {
            let reduced_last = q.reduce_u64(last[j]);
            dst[j] = inv.mul(sub_mod(src[j], reduced_last, q), q);
        }
    }
    Ok(out)
}

/// Drop the last residue row without division; retained rows are unchanged.
pub fn mod_switch_drop_last(mut poly: RnsPolynomial) -> Result<RnsPolynomial> {
    if poly.level() < 2 {
        return Err(Error::state("cannot switch modulus below level 1"));
    }
    poly.level -= 1;
    Ok(poly)
}

/// Compose one coefficient's residues into the integer in `[0, prod(q_i))`.
/// Oracle/decode support only.
pub fn crt_compose(residues: &[u64], primes: &[Modulus]) -> BigUint {
    assert_eq!(residues.len(), primes.len());
    let q: BigUint = primes.iter().map(|m| BigUint::from(m.value())).product();
    let mut acc = BigUint::zero();
    for (x, m) in residues.iter().zip(primes) {
        let qi = BigUint::from(m.value());
        let mi = &q / &qi;
        let mi_mod = (&mi % &qi)
            .try_into()
            .map(|v: u64| inv_mod(v, m).expect("co-prime basis"))
            .expect("residue fits u64");
        acc += BigUint::from(*x) * &mi * BigUint::from(mi_mod);
    }
    acc % q
}

/// Decompose a non-negative integer into residues under `primes`.
pub fn crt_decompose(x: &BigUint, primes: &[Modulus]) -> Vec<u64> {
    primes
        .iter()
        .map(|m| {
            let r: BigUint = x % BigUint::from(m.value());
            r.try_into().expect("residue fits u64")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::RandBigInt;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn prime_generation_basics() {
        let primes = generate_primes(8, 7, 2).unwrap();
        for m in &primes {
            assert!(is_prime(m.value()));
            assert_eq!(m.value() % 16, 1);
            assert_eq!(m.bit_len(), 7);
        }
        assert!(primes[0].value() > primes[1].value());
        // 97 and 113 are the only 7-bit primes congruent to 1 mod 16
        assert_eq!(primes[0].value(), 113);
        assert_eq!(primes[1].value(), 97);

        // determinism
        assert_eq!(
            generate_primes(1 << 13, 41, 4).unwrap(),
            generate_primes(1 << 13, 41, 4).unwrap()
        );

        // no 8-bit prime is congruent to 1 mod 2^21
        assert!(matches!(
            generate_primes(1 << 20, 8, 1),
            Err(Error::PrimeExhausted(_))
        ));
    }

    #[test]
    fn basis_validation() {
        let primes = generate_primes(16, 50, 2).unwrap();
        let special = generate_primes(16, 55, 1).unwrap().pop().unwrap();
        assert!(RnsBasis::new(16, primes.clone(), Some(special)).is_ok());

        // special prime must dominate the chain
        let small_special = generate_primes(16, 40, 1).unwrap().pop().unwrap();
        assert!(RnsBasis::new(16, primes.clone(), Some(small_special)).is_err());

        // duplicates rejected
        let dup = vec![primes[0], primes[0]];
        assert!(RnsBasis::new(16, dup, None).is_err());

        // wrong congruence rejected
        let p97 = Modulus::new(97).unwrap();
        assert!(RnsBasis::new(1 << 10, vec![p97], None).is_err());
    }

    #[test]
    fn crt_round_trip_small() {
        let primes = vec![Modulus::new(3).unwrap(), Modulus::new(5).unwrap()];
        assert_eq!(crt_decompose(&BigUint::from(7u32), &primes), vec![1, 2]);
        assert_eq!(
            crt_compose(&[1, 2], &primes),
            BigUint::from(7u32)
        );
        assert_eq!(crt_decompose(&BigUint::zero(), &primes), vec![0, 0]);

        let triple = vec![
            Modulus::new(3).unwrap(),
            Modulus::new(5).unwrap(),
            Modulus::new(7).unwrap(),
        ];
        for x in 0u64..105 {
            let big = BigUint::from(x);
            let residues = crt_decompose(&big, &triple);
            assert_eq!(crt_compose(&residues, &triple), big);
        }
    }

    #[test]
    fn crt_round_trip_wide() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let primes = generate_primes(1 << 10, 60, 2).unwrap();
        let q: BigUint = primes.iter().map(|m| BigUint::from(m.value())).product();
        for _ in 0..200 {
            let x = rng.gen_biguint_below(&q);
            let residues = crt_decompose(&x, &primes);
            assert_eq!(crt_compose(&residues, &primes), x);
        }
    }

    fn test_basis(n: usize, levels: usize) -> RnsBasis {
        let primes = generate_primes(n, 50, levels).unwrap();
        RnsBasis::new(n, primes, None).unwrap()
    }

    #[test]
    fn rescale_zero_and_exact_multiples() {
        let pool = BufferPool::new();
        let n = 16;
        let basis = test_basis(n, 3);
        let zero = RnsPolynomial::zero(n, 3, PolyDomain::Coefficient);
        let out = rescale_rows(&zero, &basis, &pool).unwrap();
        assert_eq!(out.level(), 2);
        assert!(out.rows().all(|r| r.iter().all(|&x| x == 0)));

        // a value q_last * k rescales to exactly k
        let q_last = BigUint::from(basis.prime(2).value());
        let mut poly = RnsPolynomial::zero(n, 3, PolyDomain::Coefficient);
        let mut expected = Vec::new();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for j in 0..n {
            let k = rng.gen_range(0u64..1 << 30);
            expected.push(k);
            let value = &q_last * BigUint::from(k);
            let residues = crt_decompose(&value, basis.primes());
            for (i, &r) in residues.iter().enumerate() {
                poly.row_mut(i)[j] = r;
            }
        }
        let out = rescale_rows(&poly, &basis, &pool).unwrap();
        for i in 0..2 {
            for j in 0..n {
                assert_eq!(out.row(i)[j], expected[j] % basis.prime(i).value());
            }
        }
    }

    #[test]
    fn rescale_error_bounded_by_one() {
        let pool = BufferPool::new();
        let n = 32;
        let basis = test_basis(n, 3);
        let q_full: BigUint = basis.primes().iter().map(|m| BigUint::from(m.value())).product();
        let q_last = BigUint::from(basis.prime(2).value());
        let retained = &basis.primes()[..2];
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        for _ in 0..50 {
            let mut poly = RnsPolynomial::zero(n, 3, PolyDomain::Coefficient);
            let mut originals = Vec::new();
            for j in 0..n {
                let x = rng.gen_biguint_below(&q_full);
                let residues = crt_decompose(&x, basis.primes());
                for (i, &r) in residues.iter().enumerate() {
                    poly.row_mut(i)[j] = r;
                }
                originals.push(x);
            }
            let out = rescale_rows(&poly, &basis, &pool).unwrap();
            for j in 0..n {
                let residues: Vec<u64> = (0..2).map(|i| out.row(i)[j]).collect();
                let got = crt_compose(&residues, retained);
                // round(x / q_last), floor-division form
                let rounded = (&originals[j] + &q_last / 2u32) / &q_last;
                let diff = if got >= rounded {
                    &got - &rounded
                } else {
                    &rounded - &got
                };
                assert!(diff <= BigUint::one(), "rounding error above 1");
            }
        }
    }

    #[test]
    fn rescale_state_errors() {
        let pool = BufferPool::new();
        let basis = test_basis(16, 2);
        let level1 = RnsPolynomial::zero(16, 1, PolyDomain::Coefficient);
        assert!(rescale_rows(&level1, &basis, &pool).is_err());
        let ntt_domain = RnsPolynomial::zero(16, 2, PolyDomain::Ntt);
        assert!(rescale_rows(&ntt_domain, &basis, &pool).is_err());
    }

    #[test]
    fn mod_switch_preserves_retained_rows() {
        let mut rng = ChaCha20Rng::seed_from_u64(14);
        let basis = test_basis(16, 3);
        let mut poly = RnsPolynomial::zero(16, 3, PolyDomain::Coefficient);
        for i in 0..3 {
            let p = basis.prime(i).value();
            for x in poly.row_mut(i) {
                *x = rng.gen_range(0..p);
            }
        }
        let saved: Vec<Vec<u64>> = (0..2).map(|i| poly.row(i).to_vec()).collect();
        let switched = mod_switch_drop_last(poly).unwrap();
        assert_eq!(switched.level(), 2);
        for i in 0..2 {
            assert_eq!(switched.row(i), &saved[i][..]);
        }
        let level1 = RnsPolynomial::zero(16, 1, PolyDomain::Coefficient);
        assert!(mod_switch_drop_last(level1).is_err());
    }
}
