//! CKKS over an RNS modulus chain: key generation, encoding through the
//! canonical embedding, encryption, and the evaluation operations
//! (addition, multiplication, relinearization, rescaling, slot rotation)
//! plus the composite routines built from them.
//!
//! Ciphertexts live in NTT domain at rest; rescaling and key switching
//! round-trip through coefficient domain internally. All randomness comes
//! from a per-context seeded generator, so a fixed seed reproduces keys and
//! ciphertexts bit-for-bit.

mod encoding;
mod ops;
mod routines;
pub mod testvec;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::modular::{mul_mod, Modulus};
use crate::ntt::{dyadic_mad, elementwise_add, KernelProfile, NttTables, NttVariant};
use crate::pool::BufferPool;
use crate::rns::{PolyDomain, RnsBasis, RnsPolynomial};

use encoding::Encoder;

/// Scheme parameters: ring degree, modulus chain, scale, noise width, seed.
#[derive(Debug, Clone)]
pub struct CkksParams {
    n: usize,
    basis: RnsBasis,
    delta: f64,
    sigma: f64,
    seed: u64,
}

impl CkksParams {
    pub fn new(n: usize, basis: RnsBasis, delta: f64, sigma: f64, seed: u64) -> Result<CkksParams> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::param(format!("degree {n} is not a power of two >= 8")));
        }
        if !(delta > 1.0 && delta.is_finite()) {
            return Err(Error::param(format!("scale {delta} must be a finite value > 1")));
        }
        for q in basis.primes() {
            if delta >= q.value() as f64 {
                return Err(Error::param(format!(
                    "scale {delta} does not fit under chain prime {}",
                    q.value()
                )));
            }
        }
        if sigma <= 0.0 {
            return Err(Error::param("noise width must be positive"));
        }
        Ok(CkksParams {
            n,
            basis,
            delta,
            sigma,
            seed,
        })
    }

    /// A standard chain for `levels` levels at scale `2^delta_bits`: one
    /// 59-bit base prime, `levels - 1` primes of `delta_bits + 1` bits, and
    /// a 60-bit key-switching prime.
    pub fn default_chain(n: usize, levels: usize, delta_bits: u32, seed: u64) -> Result<CkksParams> {
        if levels == 0 {
            return Err(Error::param("need at least one level"));
        }
        if !(20..=50).contains(&delta_bits) {
            return Err(Error::param(format!(
                "delta_bits {delta_bits} outside supported range 20..=50"
            )));
        }
        let mut primes = crate::rns::generate_primes(n, 59, 1)?;
        if levels > 1 {
            primes.extend(crate::rns::generate_primes(n, delta_bits + 1, levels - 1)?);
        }
        let special = crate::rns::generate_primes(n, 60, 1)?.pop().unwrap();
        let basis = RnsBasis::new(n, primes, Some(special))?;
        CkksParams::new(n, basis, (2f64).powi(delta_bits as i32), 3.2, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &RnsBasis {
        &self.basis
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn levels(&self) -> usize {
        self.basis.levels()
    }

    pub fn slots(&self) -> usize {
        self.n / 2
    }
}

/// An encoded message: coefficient-domain residue rows with a scale.
#[derive(Debug, Clone)]
pub struct Plaintext {
    pub(crate) poly: RnsPolynomial,
    scale: f64,
}

impl Plaintext {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn level(&self) -> usize {
        self.poly.level()
    }

    pub fn poly(&self) -> &RnsPolynomial {
        &self.poly
    }
}

/// An encryption of a plaintext: two (three after multiplication)
/// NTT-domain polynomials at a common level and scale.
#[derive(Debug, Clone)]
pub struct Ciphertext {
    pub(crate) polys: Vec<RnsPolynomial>,
    scale: f64,
}

impl Ciphertext {
    pub fn size(&self) -> usize {
        self.polys.len()
    }

    pub fn level(&self) -> usize {
        self.polys[0].level()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub(crate) fn new(polys: Vec<RnsPolynomial>, scale: f64) -> Ciphertext {
        debug_assert!(matches!(polys.len(), 2 | 3));
        debug_assert!(polys.windows(2).all(|w| w[0].level() == w[1].level()));
        Ciphertext { polys, scale }
    }
}

/// Ternary secret, stored in NTT form over the chain primes and the
/// key-switching prime.
#[derive(Debug, Clone)]
pub struct SecretKey {
    pub(crate) rows_q: RnsPolynomial,
    pub(crate) row_p: Vec<u64>,
}

/// Encryption key pair `(e - a*s, a)` over the full chain.
#[derive(Debug, Clone)]
pub struct PublicKey {
    pub(crate) b: RnsPolynomial,
    pub(crate) a: RnsPolynomial,
}

/// One key-switching digit: a pair over the extended basis (chain + P).
#[derive(Debug, Clone)]
pub(crate) struct KswPart {
    pub b_q: RnsPolynomial,
    pub a_q: RnsPolynomial,
    pub b_p: Vec<u64>,
    pub a_p: Vec<u64>,
}

/// Key-switching key: one digit per chain prime, digit `i` carrying
/// `P * W_i * target` where `W_i` is the CRT interpolation weight of `q_i`.
#[derive(Debug, Clone)]
pub struct KswKey {
    pub(crate) parts: Vec<KswPart>,
}

/// Relinearization key: switches `s^2` back to `s`.
pub type EvaluationKey = KswKey;

/// Rotation keys: per step `k`, a key switching `s(x^(5^k))` to `s`.
#[derive(Debug, Clone)]
pub struct GaloisKeys {
    pub(crate) keys: BTreeMap<usize, KswKey>,
}

impl GaloisKeys {
    pub fn steps(&self) -> Vec<usize> {
        self.keys.keys().copied().collect()
    }
}

/// Everything `keygen` produces.
#[derive(Debug, Clone)]
pub struct KeySet {
    pub secret: SecretKey,
    pub public: PublicKey,
    pub evaluation: EvaluationKey,
    pub galois: GaloisKeys,
}

/// Owns parameters, per-prime transform tables, the buffer pool, and the
/// context RNG. All evaluation operations hang off this type.
pub struct CkksContext {
    params: CkksParams,
    tables: Vec<NttTables>,
    special_tables: NttTables,
    encoder: Encoder,
    pool: BufferPool,
    rng: Mutex<ChaCha20Rng>,
    variant: NttVariant,
    ntt_nanos: AtomicU64,
    ntt_timing: AtomicBool,
}

impl CkksContext {
    pub fn new(params: CkksParams) -> Result<CkksContext> {
        Self::with_pool(params, BufferPool::new())
    }

    pub fn with_pool(params: CkksParams, pool: BufferPool) -> Result<CkksContext> {
        let special = params
            .basis
            .special()
            .ok_or_else(|| Error::param("context requires a key-switching prime"))?;
        let tables = params
            .basis
            .primes()
            .iter()
            .map(|m| NttTables::build(params.n, m))
            .collect::<Result<Vec<_>>>()?;
        let special_tables = NttTables::build(params.n, special)?;
        let encoder = Encoder::new(params.n);
        let rng = Mutex::new(ChaCha20Rng::seed_from_u64(params.seed));
        let variant = NttVariant::high_radix_for(8, params.n);
        Ok(CkksContext {
            params,
            tables,
            special_tables,
            encoder,
            pool,
            rng,
            variant,
            ntt_nanos: AtomicU64::new(0),
            ntt_timing: AtomicBool::new(false),
        })
    }

    pub fn params(&self) -> &CkksParams {
        &self.params
    }

    pub fn pool(&self) -> &BufferPool {
        &self.pool
    }

    pub fn variant(&self) -> NttVariant {
        self.variant
    }

    pub fn set_variant(&mut self, variant: NttVariant) -> Result<()> {
        variant.validate(self.params.n)?;
        self.variant = variant;
        Ok(())
    }

    /// Start accumulating wall time spent inside transforms.
    pub fn enable_ntt_timing(&self) {
        self.ntt_timing.store(true, Ordering::Relaxed);
        self.ntt_nanos.store(0, Ordering::Relaxed);
    }

    /// Transform time accumulated since timing was enabled, in nanoseconds.
    pub fn ntt_nanos(&self) -> u64 {
        self.ntt_nanos.load(Ordering::Relaxed)
    }

    fn basis(&self) -> &RnsBasis {
        &self.params.basis
    }

    fn prime(&self, i: usize) -> &Modulus {
        self.params.basis.prime(i)
    }

    fn timed<R>(&self, f: impl FnOnce() -> R) -> R {
        if self.ntt_timing.load(Ordering::Relaxed) {
            let start = Instant::now();
            let out = f();
            self.ntt_nanos
                .fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
            out
        } else {
            f()
        }
    }

    pub(crate) fn fwd_row(&self, prime_index: usize, row: &mut [u64]) {
        self.timed(|| {
            self.tables[prime_index]
                .forward(row, self.variant, &mut KernelProfile::default())
                .expect("context-validated transform")
        })
    }

    pub(crate) fn inv_row(&self, prime_index: usize, row: &mut [u64]) {
        self.timed(|| {
            self.tables[prime_index]
                .inverse(row, self.variant, &mut KernelProfile::default())
                .expect("context-validated transform")
        })
    }

    pub(crate) fn fwd_row_special(&self, row: &mut [u64]) {
        self.timed(|| {
            self.special_tables
                .forward(row, self.variant, &mut KernelProfile::default())
                .expect("context-validated transform")
        })
    }

    pub(crate) fn inv_row_special(&self, row: &mut [u64]) {
        self.timed(|| {
            self.special_tables
                .inverse(row, self.variant, &mut KernelProfile::default())
                .expect("context-validated transform")
        })
    }

    pub(crate) fn fwd_poly(&self, poly: &mut RnsPolynomial) {
        debug_assert_eq!(poly.domain(), PolyDomain::Coefficient);
        for i in 0..poly.level() {
            self.fwd_row(i, poly.row_mut(i));
        }
        poly.set_domain(PolyDomain::Ntt);
    }

    pub(crate) fn inv_poly(&self, poly: &mut RnsPolynomial) {
        debug_assert_eq!(poly.domain(), PolyDomain::Ntt);
        for i in 0..poly.level() {
            self.inv_row(i, poly.row_mut(i));
        }
        poly.set_domain(PolyDomain::Coefficient);
    }

    // ---- sampling ------------------------------------------------------

    fn sample_ternary(&self, rng: &mut ChaCha20Rng) -> Vec<i64> {
        (0..self.params.n).map(|_| rng.gen_range(-1i64..=1)).collect()
    }

    fn sample_gaussian(&self, rng: &mut ChaCha20Rng) -> Vec<i64> {
        let normal = Normal::new(0.0, self.params.sigma).expect("validated sigma");
        (0..self.params.n)
            .map(|_| normal.sample(rng).round() as i64)
            .collect()
    }

    fn sample_uniform_poly(&self, rng: &mut ChaCha20Rng, level: usize) -> RnsPolynomial {
        let mut poly =
            RnsPolynomial::uninit_in(&self.pool, self.params.n, level, PolyDomain::Ntt);
        for i in 0..level {
            let p = self.prime(i).value();
            for x in poly.row_mut(i) {
                *x = rng.gen_range(0..p);
            }
        }
        poly
    }

    /// Signed small coefficients to residue rows (coefficient domain).
    fn smalls_to_poly(&self, values: &[i64], level: usize) -> RnsPolynomial {
        let mut poly =
            RnsPolynomial::uninit_in(&self.pool, self.params.n, level, PolyDomain::Coefficient);
        for i in 0..level {
            let p = self.prime(i).value() as i64;
            for (dst, &v) in poly.row_mut(i).iter_mut().zip(values) {
                *dst = v.rem_euclid(p) as u64;
            }
        }
        poly
    }

    fn smalls_to_special_row(&self, values: &[i64]) -> Vec<u64> {
        let p = self.basis().special().unwrap().value() as i64;
        values.iter().map(|&v| v.rem_euclid(p) as u64).collect()
    }

    // ---- key generation ------------------------------------------------

    /// Generate the key set: secret/public/evaluation keys plus Galois keys
    /// for the requested rotation steps. Deterministic for a fixed seed.
    pub fn keygen(&self, rotation_steps: &[usize]) -> Result<KeySet> {
        let mut rng = self.rng.lock().unwrap();
        let levels = self.params.levels();
        let n = self.params.n;

        let s_small = self.sample_ternary(&mut rng);
        let mut rows_q = self.smalls_to_poly(&s_small, levels);
        self.fwd_poly(&mut rows_q);
        let mut row_p = self.smalls_to_special_row(&s_small);
        self.fwd_row_special(&mut row_p);
        let secret = SecretKey { rows_q, row_p };

        // pk = (e - a*s, a)
        let a = self.sample_uniform_poly(&mut rng, levels);
        let e_small = self.sample_gaussian(&mut rng);
        let mut b = self.smalls_to_poly(&e_small, levels);
        self.fwd_poly(&mut b);
        for i in 0..levels {
            let m = self.prime(i);
            let s_row = secret.rows_q.row(i);
            let (b_row, a_row) = (b.row_mut(i), a.row(i));
            for j in 0..n {
                let as_j = mul_mod(a_row[j], s_row[j], m);
                b_row[j] = crate::modular::sub_mod(b_row[j], as_j, m);
            }
        }
        let public = PublicKey { b, a };

        // s^2 rows for the relinearization target
        let mut s_sq = RnsPolynomial::uninit_in(&self.pool, n, levels, PolyDomain::Ntt);
        for i in 0..levels {
            let s_row = secret.rows_q.row(i);
            let m = self.prime(i);
            let dst = s_sq.row_mut(i);
            for j in 0..n {
                dst[j] = mul_mod(s_row[j], s_row[j], m);
            }
        }
        let evaluation = self.make_ksw_key(&mut rng, &secret, &s_sq)?;

        let mut galois = BTreeMap::new();
        let mut steps: Vec<usize> = rotation_steps.to_vec();
        steps.sort_unstable();
        steps.dedup();
        for step in steps {
            if step == 0 || step >= self.params.slots() {
                return Err(Error::param(format!(
                    "rotation step {step} outside 1..{}",
                    self.params.slots()
                )));
            }
            let g = ops::galois_element(step, n);
            let mut tau_small = vec![0i64; n];
            ops::automorph_signed(&s_small, &mut tau_small, g, n);
            let mut target = self.smalls_to_poly(&tau_small, levels);
            self.fwd_poly(&mut target);
            let key = self.make_ksw_key(&mut rng, &secret, &target)?;
            galois.insert(step, key);
        }

        Ok(KeySet {
            secret,
            public,
            evaluation,
            galois: GaloisKeys { keys: galois },
        })
    }

    /// Build a key-switching key whose digit `i` encrypts
    /// `P * W_i * target` under `s`, where `W_i` is the CRT weight that is 1
    /// mod `q_i` and 0 mod every other chain prime (so digit `i` only
    /// carries `(P mod q_i) * target` in its own row, and nothing mod P).
    fn make_ksw_key(
        &self,
        rng: &mut ChaCha20Rng,
        secret: &SecretKey,
        target: &RnsPolynomial,
    ) -> Result<KswKey> {
        let levels = self.params.levels();
        let n = self.params.n;
        let special = *self.basis().special().unwrap();
        let mut parts = Vec::with_capacity(levels);
        for digit in 0..levels {
            let a_q = self.sample_uniform_poly(rng, levels);
            let a_p: Vec<u64> = (0..n).map(|_| rng.gen_range(0..special.value())).collect();
            let e_small = self.sample_gaussian(rng);
            let mut b_q = self.smalls_to_poly(&e_small, levels);
            self.fwd_poly(&mut b_q);
            let mut b_p = self.smalls_to_special_row(&e_small);
            self.fwd_row_special(&mut b_p);

            for i in 0..levels {
                let m = self.prime(i);
                let s_row = secret.rows_q.row(i);
                let a_row = a_q.row(i);
                let b_row = b_q.row_mut(i);
                let pmod = self.basis().special_mod(i);
                let t_row = target.row(i);
                for j in 0..n {
                    let as_j = mul_mod(a_row[j], s_row[j], m);
                    let mut v = crate::modular::sub_mod(b_row[j], as_j, m);
                    if i == digit {
                        let lift = mul_mod(pmod, t_row[j], m);
                        v = crate::modular::add_mod(v, lift, m);
                    }
                    b_row[j] = v;
                }
            }
            for j in 0..n {
                let as_j = mul_mod(a_p[j], secret.row_p[j], &special);
                b_p[j] = crate::modular::sub_mod(b_p[j], as_j, &special);
            }
            parts.push(KswPart { b_q, a_q, b_p, a_p });
        }
        Ok(KswKey { parts })
    }

    // ---- encoding ------------------------------------------------------

    /// Encode `n/2` complex slots at the given scale: inverse canonical
    /// embedding, rounding to integers, CRT decomposition at the top level.
    pub fn encode_at(&self, slots: &[Complex64], scale: f64) -> Result<Plaintext> {
        if slots.len() != self.params.slots() {
            return Err(Error::param(format!(
                "expected {} slots, got {}",
                self.params.slots(),
                slots.len()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param("scale must be positive and finite"));
        }
        let levels = self.params.levels();
        let half = self.params.slots();
        let mut vals = slots.to_vec();
        self.encoder.embed_inverse(&mut vals);

        let headroom = self.basis().modulus_product_f64(levels) / 2.0;
        let mut coeffs = vec![0i128; self.params.n];
        for (i, v) in vals.iter().enumerate() {
            for (slot, part) in [(i, v.re), (i + half, v.im)] {
                let scaled = part * scale;
                if !scaled.is_finite() || scaled.abs() >= headroom {
                    return Err(Error::Overflow(format!(
                        "scaled coefficient {scaled:e} exceeds modulus headroom"
                    )));
                }
                coeffs[slot] = scaled.round() as i128;
            }
        }

        let mut poly =
            RnsPolynomial::uninit_in(&self.pool, self.params.n, levels, PolyDomain::Coefficient);
        for i in 0..levels {
            let p = self.prime(i).value() as i128;
            for (dst, &c) in poly.row_mut(i).iter_mut().zip(&coeffs) {
                *dst = c.rem_euclid(p) as u64;
            }
        }
        Ok(Plaintext { poly, scale })
    }

    /// Encode at the context's default scale.
    pub fn encode(&self, slots: &[Complex64]) -> Result<Plaintext> {
        self.encode_at(slots, self.params.delta)
    }

    /// Decode a plaintext back to complex slots: CRT-compose each
    /// coefficient, center, divide by the scale, forward embedding.
    pub fn decode(&self, pt: &Plaintext) -> Result<Vec<Complex64>> {
        let level = pt.level();
        let primes = &self.basis().primes()[..level];
        let q: BigUint = primes.iter().map(|m| BigUint::from(m.value())).product();
        let half_q = &q / 2u32;
        // CRT interpolation weights (Q/q_i) * ((Q/q_i)^-1 mod q_i)
        let weights: Vec<BigUint> = primes
            .iter()
            .map(|m| {
                let qi = BigUint::from(m.value());
                let mi = &q / &qi;
                let mi_mod: u64 = (&mi % &qi).to_u64().expect("fits");
                let inv = crate::modular::inv_mod(mi_mod, m).expect("co-prime");
                &mi * BigUint::from(inv)
            })
            .collect();

        let half = self.params.slots();
        let mut centered = vec![0.0f64; self.params.n];
        for j in 0..self.params.n {
            let mut acc = BigUint::default();
            for i in 0..level {
                acc += &weights[i] * BigUint::from(pt.poly.row(i)[j]);
            }
            acc %= &q;
            centered[j] = if acc > half_q {
                -((&q - &acc).to_f64().unwrap_or(f64::MAX))
            } else {
                acc.to_f64().unwrap_or(f64::MAX)
            };
        }

        let inv_scale = 1.0 / pt.scale;
        let mut vals: Vec<Complex64> = (0..half)
            .map(|i| Complex64::new(centered[i] * inv_scale, centered[i + half] * inv_scale))
            .collect();
        self.encoder.embed_forward(&mut vals);
        Ok(vals)
    }

    // ---- encryption ----------------------------------------------------

    /// Encrypt a top-level plaintext: `c = v*pk + (m + e0, e1)` with `v`
    /// ternary and Gaussian noise, output in NTT domain.
    pub fn encrypt(&self, pt: &Plaintext, pk: &PublicKey) -> Result<Ciphertext> {
        if pt.level() != self.params.levels() {
            return Err(Error::state(format!(
                "encrypt expects a level-{} plaintext, got level {}",
                self.params.levels(),
                pt.level()
            )));
        }
        let levels = self.params.levels();
        let mut rng = self.rng.lock().unwrap();
        let v_small = self.sample_ternary(&mut rng);
        let e0_small = self.sample_gaussian(&mut rng);
        let e1_small = self.sample_gaussian(&mut rng);
        drop(rng);

        let mut v = self.smalls_to_poly(&v_small, levels);
        self.fwd_poly(&mut v);
        let mut c0 = self.smalls_to_poly(&e0_small, levels);
        let mut c1 = self.smalls_to_poly(&e1_small, levels);

        // m + e0 in coefficient domain, then into NTT
        for i in 0..levels {
            let m = self.prime(i);
            elementwise_add(c0.row_mut(i), pt.poly.row(i), m).expect("same degree");
        }
        self.fwd_poly(&mut c0);
        self.fwd_poly(&mut c1);

        for i in 0..levels {
            let m = self.prime(i);
            dyadic_mad(c0.row_mut(i), v.row(i), pk.b.row(i), m).expect("same degree");
            dyadic_mad(c1.row_mut(i), v.row(i), pk.a.row(i), m).expect("same degree");
        }
        Ok(Ciphertext::new(vec![c0, c1], pt.scale))
    }

    /// Decrypt a size-2 ciphertext: `m' = c0 + c1 * s`, returned in
    /// coefficient domain at the ciphertext's level and scale.
    pub fn decrypt(&self, c: &Ciphertext, sk: &SecretKey) -> Result<Plaintext> {
        if c.size() != 2 {
            return Err(Error::state(
                "decrypt requires a size-2 ciphertext; relinearize first",
            ));
        }
        let level = c.level();
        let mut out = c.polys[0].clone_in(&self.pool);
        for i in 0..level {
            let m = self.prime(i);
            dyadic_mad(out.row_mut(i), c.polys[1].row(i), sk.rows_q.row(i), m)
                .expect("same degree");
        }
        self.inv_poly(&mut out);
        Ok(Plaintext {
            poly: out,
            scale: c.scale,
        })
    }
}
