//! Word-sized modular arithmetic: Barrett reduction, fused multiply-add-mod,
//! and lazy-reduction NTT butterflies.
//!
//! All operations work on 64-bit residues with 128-bit intermediates. The
//! butterfly pair keeps values in the lazy range `[0, 4p)` (forward) and
//! `[0, 2p)` (inverse); callers are responsible for the documented input
//! ranges, which debug builds assert.

use crate::error::{Error, Result};

/// A word-sized NTT-friendly prime with precomputed Barrett constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    p: u64,
    /// High word of floor(2^128 / p).
    barrett_hi: u64,
    /// Low word of floor(2^128 / p).
    barrett_lo: u64,
    bit_len: u32,
}

impl Modulus {
    /// Build a modulus for the prime `p`. Requires `2 < p < 2^62` (the
    /// butterfly lazy bound needs `p < beta/4`) and `p` prime.
    pub fn new(p: u64) -> Result<Modulus> {
        if p <= 2 || p >= (1u64 << 62) {
            return Err(Error::param(format!("modulus {p} outside (2, 2^62)")));
        }
        if !is_prime(p) {
            return Err(Error::param(format!("modulus {p} is not prime")));
        }
        // floor(2^128 / p) == floor((2^128 - 1) / p) for odd p: the exact
        // quotient differs only when p divides 2^128, impossible here.
        let ratio = u128::MAX / p as u128;
        Ok(Modulus {
            p,
            barrett_hi: (ratio >> 64) as u64,
            barrett_lo: ratio as u64,
            bit_len: 64 - p.leading_zeros(),
        })
    }

    #[inline(always)]
    pub fn value(&self) -> u64 {
        self.p
    }

    pub fn bit_len(&self) -> u32 {
        self.bit_len
    }

    pub fn barrett_constants(&self) -> (u64, u64) {
        (self.barrett_hi, self.barrett_lo)
    }

    /// Reduce an arbitrary 128-bit value modulo `p` by Barrett reduction:
    /// one 256-bit quotient estimate and at most one correction subtraction.
    #[inline(always)]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        let xl = x as u64;
        let xh = (x >> 64) as u64;
        // q = floor(x * floor(2^128/p) / 2^128), low 64 bits only: the
        // remainder x - q*p fits one word, so the quotient's high bits
        // cannot influence it.
        let carry = (wide_mul(xl, self.barrett_lo) >> 64) as u64;
        let m1 = wide_mul(xl, self.barrett_hi);
        let m2 = wide_mul(xh, self.barrett_lo);
        let (mid, c1) = (m1 as u64).overflowing_add(m2 as u64);
        let (_, c2) = mid.overflowing_add(carry);
        let q = xh
            .wrapping_mul(self.barrett_hi)
            .wrapping_add((m1 >> 64) as u64)
            .wrapping_add((m2 >> 64) as u64)
            .wrapping_add(c1 as u64 + c2 as u64);
        let r = xl.wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    /// Reduce a 64-bit value modulo `p`.
    #[inline(always)]
    pub fn reduce_u64(&self, x: u64) -> u64 {
        if x < self.p {
            x
        } else {
            self.reduce_u128(x as u128)
        }
    }
}

#[inline(always)]
fn wide_mul(a: u64, b: u64) -> u128 {
    a as u128 * b as u128
}

/// Conditional subtraction mapping `[0, 2*bound)` to `[0, bound)`.
#[inline(always)]
pub fn reduce_once(x: u64, bound: u64) -> u64 {
    if x >= bound {
        x - bound
    } else {
        x
    }
}

/// Modular addition for operands already reduced below `p`.
#[inline(always)]
pub fn add_mod(x: u64, y: u64, m: &Modulus) -> u64 {
    debug_assert!(x < m.p && y < m.p);
    reduce_once(x + y, m.p)
}

/// Modular subtraction for operands already reduced below `p`.
#[inline(always)]
pub fn sub_mod(x: u64, y: u64, m: &Modulus) -> u64 {
    debug_assert!(x < m.p && y < m.p);
    if x >= y {
        x - y
    } else {
        x + m.p - y
    }
}

/// Modular multiplication via the 128-bit product and Barrett reduction.
/// Accepts any 64-bit operands.
#[inline(always)]
pub fn mul_mod(x: u64, y: u64, m: &Modulus) -> u64 {
    m.reduce_u128(wide_mul(x, y))
}

/// Fused multiply-add-mod: `(a*b + c) mod p` with the sum accumulated in a
/// 128-bit intermediate and exactly one modular reduction. Requires
/// `a, b < p` and `c < 2^60` so the accumulation cannot overflow.
#[inline(always)]
pub fn mad_mod(a: u64, b: u64, c: u64, m: &Modulus) -> u64 {
    debug_assert!(a < m.p && b < m.p);
    debug_assert!(c < (1u64 << 60));
    m.reduce_u128(wide_mul(a, b) + c as u128)
}

/// A multiplicand `w < p` with its Shoup precomputation `floor(w * 2^64 / p)`,
/// enabling a modular multiply from two machine multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MulOperand {
    w: u64,
    w_precon: u64,
}

impl MulOperand {
    pub fn new(w: u64, m: &Modulus) -> MulOperand {
        debug_assert!(w < m.p);
        MulOperand {
            w,
            w_precon: (((w as u128) << 64) / m.p as u128) as u64,
        }
    }

    #[inline(always)]
    pub fn value(&self) -> u64 {
        self.w
    }

    #[inline(always)]
    pub fn precon(&self) -> u64 {
        self.w_precon
    }

    /// `w * y mod p` in the lazy range `[0, 2p)`, valid for any `y`.
    #[inline(always)]
    pub fn mul_lazy(&self, y: u64, m: &Modulus) -> u64 {
        let q = (wide_mul(self.w_precon, y) >> 64) as u64;
        self.w
            .wrapping_mul(y)
            .wrapping_sub(q.wrapping_mul(m.p))
    }

    /// Fully reduced `w * y mod p`.
    #[inline(always)]
    pub fn mul(&self, y: u64, m: &Modulus) -> u64 {
        reduce_once(self.mul_lazy(y, m), m.p)
    }
}

/// Lazy Cooley-Tukey butterfly:
/// `X' = X + W*Y (mod p)`, `Y' = X - W*Y (mod p)` with inputs and outputs in
/// `[0, 4p)`:
///
/// - if `X >= 2p` then `X <- X - 2p`
/// - `Q <- floor(W' * Y / 2^64)`
/// - `T <- (W*Y - Q*p) mod 2^64`
/// - `X' <- X + T`, `Y' <- X - T + 2p`
#[inline(always)]
pub fn harvey_butterfly(x: u64, y: u64, w: &MulOperand, m: &Modulus) -> (u64, u64) {
    debug_assert!(x < 4 * m.p && y < 4 * m.p);
    let x = reduce_once(x, 2 * m.p);
    let t = w.mul_lazy(y, m);
    let xo = x + t;
    let yo = x + 2 * m.p - t;
    debug_assert!(xo < 4 * m.p && yo < 4 * m.p);
    (xo, yo)
}

/// Lazy Gentleman-Sande butterfly:
/// `X' = X + Y (mod p)`, `Y' = W*(X - Y) (mod p)` with inputs and outputs in
/// `[0, 2p)`.
#[inline(always)]
pub fn harvey_inv_butterfly(x: u64, y: u64, w: &MulOperand, m: &Modulus) -> (u64, u64) {
    debug_assert!(x < 2 * m.p && y < 2 * m.p);
    let xo = reduce_once(x + y, 2 * m.p);
    let yo = w.mul_lazy(x + 2 * m.p - y, m);
    debug_assert!(xo < 2 * m.p && yo < 2 * m.p);
    (xo, yo)
}

/// `b^e mod p` by square-and-multiply.
pub fn pow_mod(b: u64, mut e: u64, m: &Modulus) -> u64 {
    let mut base = m.reduce_u64(b);
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// `x^-1 mod p`; errors on non-invertible input (`x ≡ 0`).
pub fn inv_mod(x: u64, m: &Modulus) -> Result<u64> {
    let x = m.reduce_u64(x);
    if x == 0 {
        return Err(Error::Domain(format!(
            "0 has no inverse modulo {}",
            m.p
        )));
    }
    // p prime, so Fermat applies.
    Ok(pow_mod(x, m.p - 2, m))
}

/// The smallest primitive 2N-th root of unity modulo `p`, i.e. the minimal
/// `psi` with `psi^N ≡ -1 (mod p)`. Requires `p ≡ 1 (mod 2N)`.
pub fn find_primitive_2n_root(m: &Modulus, n: u64) -> Result<u64> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(format!("degree {n} is not a power of two")));
    }
    if !(m.p - 1).is_multiple_of(2 * n) {
        return Err(Error::param(format!(
            "{} is not congruent to 1 mod {}",
            m.p,
            2 * n
        )));
    }
    let exponent = (m.p - 1) / (2 * n);
    // Find any primitive root, then take the minimum over its odd powers,
    // which enumerate every primitive 2N-th root.
    let mut seed_root = None;
    for g in 2..m.p {
        let candidate = pow_mod(g, exponent, m);
        if pow_mod(candidate, n, m) == m.p - 1 {
            seed_root = Some(candidate);
            break;
        }
    }
    let root = seed_root
        .ok_or_else(|| Error::Domain(format!("no primitive 2*{n}-th root modulo {}", m.p)))?;
    let root_sq = mul_mod(root, root, m);
    let mut best = root;
    let mut current = root;
    for _ in 1..n {
        current = mul_mod(current, root_sq, m);
        if current < best {
            best = current;
        }
    }
    Ok(best)
}

/// Deterministic Miller-Rabin, valid for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_raw(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod_raw(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Plain u128 arithmetic versions for primality testing, where no Barrett
// constants exist yet.
fn mul_mod_raw(a: u64, b: u64, n: u64) -> u64 {
    (wide_mul(a, b) % n as u128) as u64
}

fn pow_mod_raw(mut b: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_raw(acc, b, n);
        }
        b = mul_mod_raw(b, b, n);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn modulus(p: u64) -> Modulus {
        Modulus::new(p).unwrap()
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(Modulus::new(0).is_err());
        assert!(Modulus::new(2).is_err());
        assert!(Modulus::new(91).is_err()); // 7 * 13
        assert!(Modulus::new(1u64 << 62).is_err());
    }

    #[test]
    fn barrett_constants_match_wide_integer_oracle() {
        for p in [97u64, 13, (1 << 61) - 1, 1152921504606830593] {
            let m = modulus(p);
            let expected = (BigUint::one() << 128u32) / BigUint::from(p);
            let got = (BigUint::from(m.barrett_hi) << 64u32) + BigUint::from(m.barrett_lo);
            assert_eq!(got, expected, "p = {p}");
        }
    }

    #[test]
    fn add_mod_examples() {
        let m = modulus(7);
        assert_eq!(add_mod(3, 5, &m), 1);
        assert_eq!(add_mod(0, 0, &m), 0);
        assert_eq!(add_mod(6, 6, &m), 5); // (p-1)+(p-1) = p-2
    }

    #[test]
    fn sub_mod_examples() {
        let m = modulus(7);
        assert_eq!(sub_mod(0, 0, &m), 0);
        assert_eq!(sub_mod(3, 5, &m), 5);
    }

    #[test]
    fn mul_mod_examples() {
        let m = modulus(97);
        assert_eq!(mul_mod(0, 55, &m), 0);
        assert_eq!(mul_mod(10, 20, &m), 6);
    }

    #[test]
    fn mad_mod_examples() {
        let m = modulus(97);
        assert_eq!(mad_mod(0, 11, 5, &m), 5);
        assert_eq!(mad_mod(10, 20, 3, &m), 9);
    }

    #[test]
    fn exhaustive_small_prime_vs_oracle() {
        // oracle: 128-bit arithmetic then remainder
        for p in [13u64, 97] {
            let m = modulus(p);
            for x in 0..p {
                for y in 0..p {
                    assert_eq!(add_mod(x, y, &m), ((x + y) % p), "add {x},{y} mod {p}");
                    assert_eq!(
                        sub_mod(x, y, &m),
                        ((x + p - y) % p),
                        "sub {x},{y} mod {p}"
                    );
                    assert_eq!(
                        mul_mod(x, y, &m),
                        ((x as u128 * y as u128) % p as u128) as u64,
                        "mul {x},{y} mod {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn exhaustive_mad_mod_p13() {
        let p = 13u64;
        let m = modulus(p);
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    let expect = ((a as u128 * b as u128 + c as u128) % p as u128) as u64;
                    assert_eq!(mad_mod(a, b, c, &m), expect);
                }
            }
        }
    }

    #[test]
    fn randomized_60bit_vs_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let p = crate::rns::generate_primes(1 << 14, 60, 1).unwrap()[0];
        let m = p;
        let p = m.value();
        for _ in 0..200_000 {
            let x = rng.gen_range(0..p);
            let y = rng.gen_range(0..p);
            let c = rng.gen_range(0..1u64 << 60);
            assert_eq!(add_mod(x, y, &m), ((x as u128 + y as u128) % p as u128) as u64);
            assert_eq!(
                sub_mod(x, y, &m),
                ((x as i128 - y as i128).rem_euclid(p as i128)) as u64
            );
            assert_eq!(mul_mod(x, y, &m), ((x as u128 * y as u128) % p as u128) as u64);
            assert_eq!(
                mad_mod(x, y, c, &m),
                ((x as u128 * y as u128 + c as u128) % p as u128) as u64
            );
        }
    }

    #[test]
    fn reduce_u128_handles_full_range() {
        let m = modulus(97);
        assert_eq!(m.reduce_u128(u128::MAX), (u128::MAX % 97) as u64);
        let m = modulus((1 << 61) - 1);
        assert_eq!(m.reduce_u128(u128::MAX), (u128::MAX % ((1u128 << 61) - 1)) as u64);
    }

    #[test]
    fn butterfly_trivial_cases() {
        let m = modulus(17);
        let w = MulOperand::new(5, &m);
        assert_eq!(harvey_butterfly(0, 0, &w, &m), (0, 2 * 17));
        assert_eq!(harvey_butterfly(2 * 17 + 1, 0, &w, &m), (1, 1 + 2 * 17));
    }

    #[test]
    fn butterfly_exhaustive_congruence_and_range() {
        for p in [17u64] {
            let m = modulus(p);
            for wv in 1..p {
                let w = MulOperand::new(wv, &m);
                for x in 0..4 * p {
                    for y in 0..4 * p {
                        let (xo, yo) = harvey_butterfly(x, y, &w, &m);
                        assert!(xo < 4 * p && yo < 4 * p);
                        let wy = (wv as u128 * y as u128 % p as u128) as u64;
                        assert_eq!(xo % p, (x + wy) % p);
                        assert_eq!(yo % p, (x as u128 + 4 * p as u128 - wy as u128) as u64 % p);
                    }
                }
            }
        }
    }

    #[test]
    fn inv_butterfly_exhaustive() {
        let p = 17u64;
        let m = modulus(p);
        for wv in 1..p {
            let w = MulOperand::new(wv, &m);
            for x in 0..2 * p {
                for y in 0..2 * p {
                    let (xo, yo) = harvey_inv_butterfly(x, y, &w, &m);
                    assert!(xo < 2 * p && yo < 2 * p);
                    assert_eq!(xo % p, (x + y) % p);
                    let diff = (x + 2 * p - y) % p;
                    assert_eq!(yo % p, wv * diff % p);
                }
            }
        }
    }

    #[test]
    fn butterfly_sum_and_difference_identities() {
        let p = 97u64;
        let m = modulus(p);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let wv = rng.gen_range(1..p);
            let w = MulOperand::new(wv, &m);
            let x = rng.gen_range(0..4 * p);
            let y = rng.gen_range(0..4 * p);
            let (xo, yo) = harvey_butterfly(x, y, &w, &m);
            assert_eq!((xo + yo) % p, 2 * x % p);
            assert_eq!((xo + 4 * p - yo) % p, 2 * (wv * (y % p)) % p);
        }
    }

    #[test]
    fn inverse_composes_with_forward() {
        // matching twiddles recover doubled inputs modulo p
        let p = 97u64;
        let m = modulus(p);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let wv = rng.gen_range(1..p);
            let w = MulOperand::new(wv, &m);
            let w_inv = MulOperand::new(inv_mod(wv, &m).unwrap(), &m);
            let x = rng.gen_range(0..p);
            let y = rng.gen_range(0..p);
            let (a, b) = harvey_butterfly(x, y, &w, &m);
            let (xr, yr) = harvey_inv_butterfly(reduce_once(a, 2 * p), reduce_once(b, 2 * p), &w_inv, &m);
            assert_eq!(xr % p, 2 * x % p);
            assert_eq!(yr % p, 2 * y % p);
        }
    }

    #[test]
    fn shoup_path_matches_barrett_path() {
        let p = 97u64;
        let m = modulus(p);
        for wv in 0..p {
            let w = MulOperand::new(wv, &m);
            for y in 0..4 * p {
                assert_eq!(w.mul(y, &m), mul_mod(wv, y, &m));
            }
        }
    }

    #[test]
    fn pow_and_inv() {
        let m = modulus(97);
        assert_eq!(pow_mod(2, 5, &m), 32);
        assert_eq!(inv_mod(1, &m).unwrap(), 1);
        assert!(inv_mod(0, &m).is_err());
        for x in 1..97 {
            assert_eq!(mul_mod(x, inv_mod(x, &m).unwrap(), &m), 1);
        }
    }

    #[test]
    fn primitive_root_order_checks() {
        let m = modulus(97);
        let psi = find_primitive_2n_root(&m, 8).unwrap();
        assert_eq!(pow_mod(psi, 8, &m), 96);
        assert_eq!(pow_mod(psi, 16, &m), 1);
        for k in 1..16 {
            assert_ne!(pow_mod(psi, k, &m), 1, "order divides {k}");
        }
        // brute-force minimality oracle
        let brute = (2..97)
            .find(|&c| pow_mod(c, 8, &m) == 96)
            .unwrap();
        assert_eq!(psi, brute);

        let m5 = modulus(5);
        let psi = find_primitive_2n_root(&m5, 2).unwrap();
        assert!(psi == 2 || psi == 3);
        assert_eq!(pow_mod(psi, 2, &m5), 4);

        let m7 = modulus(7);
        assert!(find_primitive_2n_root(&m7, 8).is_err());
    }
}
