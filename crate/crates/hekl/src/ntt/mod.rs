//! Forward and inverse negacyclic NTT over a word-sized prime, with a ladder
//! of interchangeable kernel variants.
//!
//! The transform is merged-negacyclic: powers of the 2N-th root `psi` are
//! folded into the twiddle factors, so no separate pre/post scaling pass
//! exists. Forward is Cooley-Tukey (natural order in, bit-reversed out),
//! inverse is Gentleman-Sande (bit-reversed in, natural out) with `n^-1`
//! folded into its final round. All variants produce bit-identical output;
//! they differ in how butterfly levels are grouped into passes:
//!
//! - [`NttVariant::Naive`]: one radix-2 pass over the main array per level.
//! - [`NttVariant::Staged2`]: radix-2, but once the exchange gap fits under
//!   `block_gap` the remaining levels complete inside a cache-resident block
//!   buffer of `2 * block_gap` elements, touching the main array once.
//! - [`NttVariant::HighRadix`]: radix 4/8/16 register-resident kernels on
//!   top of the same blocked schedule.

mod kernels;
mod profile;

pub use kernels::{radix4_block_round, radix8_block_round};
pub use profile::KernelProfile;

use crate::error::{Error, Result};
use crate::modular::{
    add_mod, find_primitive_2n_root, inv_mod, mad_mod, mul_mod, Modulus, MulOperand,
};

use kernels::plan_passes;

/// Kernel schedule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NttVariant {
    /// Radix-2, one full-array pass per butterfly level.
    Naive,
    /// Radix-2 with the low levels completed inside a cache-resident block.
    Staged2 { block_gap: usize },
    /// Staged high-radix register kernels; `radix` is 4, 8, or 16.
    HighRadix { radix: usize, block_gap: usize },
}

impl NttVariant {
    /// Block-gap threshold modeling a 64 KiB scratchpad of 8K words.
    pub const DEFAULT_BLOCK_GAP: usize = 4096;

    /// Staged radix-2 with the default gap clamped to fit `n`.
    pub fn staged2_for(n: usize) -> NttVariant {
        NttVariant::Staged2 {
            block_gap: Self::DEFAULT_BLOCK_GAP.min(n / 2),
        }
    }

    /// Staged high-radix with the default gap clamped to fit `n`.
    pub fn high_radix_for(radix: usize, n: usize) -> NttVariant {
        NttVariant::HighRadix {
            radix,
            block_gap: Self::DEFAULT_BLOCK_GAP.min(n / 2),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NttVariant::Naive => "naive",
            NttVariant::Staged2 { .. } => "staged2",
            NttVariant::HighRadix { radix: 4, .. } => "radix4",
            NttVariant::HighRadix { radix: 8, .. } => "radix8",
            NttVariant::HighRadix { radix: 16, .. } => "radix16",
            NttVariant::HighRadix { .. } => "highradix",
        }
    }

    pub fn block_gap(&self) -> Option<usize> {
        match self {
            NttVariant::Naive => None,
            NttVariant::Staged2 { block_gap } | NttVariant::HighRadix { block_gap, .. } => {
                Some(*block_gap)
            }
        }
    }

    pub(crate) fn log_radix(&self) -> u32 {
        match self {
            NttVariant::Naive | NttVariant::Staged2 { .. } => 1,
            NttVariant::HighRadix { radix, .. } => radix.trailing_zeros(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let NttVariant::HighRadix { radix, .. } = self {
            if ![4usize, 8, 16].contains(radix) {
                return Err(Error::param(format!("unsupported radix {radix}")));
            }
        }
        if let Some(bg) = self.block_gap() {
            if !bg.is_power_of_two() || bg >= n {
                return Err(Error::param(format!(
                    "block_gap {bg} must be a power of two below n = {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-prime twiddle tables for an `n`-point negacyclic transform.
#[derive(Debug, Clone)]
pub struct NttTables {
    n: usize,
    log_n: u32,
    modulus: Modulus,
    psi: u64,
    fwd: Vec<MulOperand>,
    inv: Vec<MulOperand>,
    n_inv: MulOperand,
}

fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

impl NttTables {
    /// Build tables for degree `n` (a power of two >= 2) over `m`, which
    /// must satisfy `p ≡ 1 (mod 2n)`. The 2n-th root is the minimal
    /// primitive one, so tables are deterministic.
    pub fn build(n: usize, m: &Modulus) -> Result<NttTables> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::param(format!("degree {n} is not a power of two >= 2")));
        }
        let psi = find_primitive_2n_root(m, n as u64)?;
        let psi_inv = inv_mod(psi, m)?;
        let log_n = n.trailing_zeros();

        let mut pow = Vec::with_capacity(n + 1);
        let mut pow_inv = Vec::with_capacity(n + 1);
        let (mut acc, mut acc_inv) = (1u64, 1u64);
        for _ in 0..=n {
            pow.push(acc);
            pow_inv.push(acc_inv);
            acc = mul_mod(acc, psi, m);
            acc_inv = mul_mod(acc_inv, psi_inv, m);
        }

        let fwd = (0..n)
            .map(|i| MulOperand::new(pow[bit_reverse(i, log_n)], m))
            .collect();
        let n_inv_val = inv_mod(n as u64, m)?;
        let mut inv: Vec<MulOperand> = (0..n)
            .map(|i| MulOperand::new(pow_inv[bit_reverse(i, log_n) + 1], m))
            .collect();
        // The entry at n-2 is consumed only by the transform's final round;
        // fold n^-1 into it so the inverse needs no separate scaling pass.
        inv[n - 2] = MulOperand::new(
            mul_mod(pow_inv[bit_reverse(n - 2, log_n) + 1], n_inv_val, m),
            m,
        );

        Ok(NttTables {
            n,
            log_n,
            modulus: *m,
            psi,
            fwd,
            inv,
            n_inv: MulOperand::new(n_inv_val, m),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn psi(&self) -> u64 {
        self.psi
    }

    pub fn n_inv(&self) -> &MulOperand {
        &self.n_inv
    }

    pub(crate) fn forward_twiddle(&self, i: usize) -> MulOperand {
        self.fwd[i]
    }

    pub(crate) fn inverse_twiddle(&self, i: usize) -> MulOperand {
        self.inv[i]
    }

    fn check_poly(&self, poly: &[u64], variant: NttVariant) -> Result<()> {
        variant.validate(self.n)?;
        if poly.len() != self.n {
            return Err(Error::param(format!(
                "polynomial length {} does not match degree {}",
                poly.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// In-place forward negacyclic NTT. Input: coefficients in `[0, p)`,
    /// natural order. Output: NTT values in `[0, p)`, bit-reversed order;
    /// the final lazy-range offsetting is fused into the last pass.
    pub fn forward(
        &self,
        poly: &mut [u64],
        variant: NttVariant,
        prof: &mut KernelProfile,
    ) -> Result<()> {
        self.check_poly(poly, variant)?;
        debug_assert!(poly.iter().all(|&x| x < self.modulus.value()));
        let passes = plan_passes(self.n, variant.log_radix(), variant.block_gap());
        let total = passes.len();
        let resident_from = passes.iter().position(|p| !p.global).unwrap_or(total);

        for (i, pass) in passes[..resident_from].iter().enumerate() {
            kernels::forward_pass(poly, 0, self, pass, i + 1 == total);
            prof.record_global_pass(self.n);
            prof.record_round(self.n, pass.log_radix);
        }

        if resident_from < total {
            let resident = &passes[resident_from..];
            let window = 2 * resident[0].top_gap;
            let mut block = vec![0u64; window];
            for wb in (0..self.n).step_by(window) {
                block.copy_from_slice(&poly[wb..wb + window]);
                for (i, pass) in resident.iter().enumerate() {
                    kernels::forward_pass(&mut block, wb, self, pass, resident_from + i + 1 == total);
                }
                poly[wb..wb + window].copy_from_slice(&block);
            }
            prof.record_global_pass(self.n);
            for pass in resident {
                prof.record_round(self.n, pass.log_radix);
            }
        }
        Ok(())
    }

    /// In-place inverse negacyclic NTT: bit-reversed NTT values in `[0, p)`
    /// to natural-order coefficients in `[0, p)`, including the folded
    /// `n^-1` and inverse-psi scaling.
    pub fn inverse(
        &self,
        poly: &mut [u64],
        variant: NttVariant,
        prof: &mut KernelProfile,
    ) -> Result<()> {
        self.check_poly(poly, variant)?;
        debug_assert!(poly.iter().all(|&x| x < self.modulus.value()));
        let mut passes = plan_passes(self.n, variant.log_radix(), variant.block_gap());
        passes.reverse();
        let total = passes.len();
        let global_from = passes.iter().position(|p| p.global).unwrap_or(total);

        if global_from > 0 {
            let resident = &passes[..global_from];
            let window = 2 * resident[global_from - 1].top_gap;
            let mut block = vec![0u64; window];
            for wb in (0..self.n).step_by(window) {
                block.copy_from_slice(&poly[wb..wb + window]);
                for pass in resident {
                    kernels::inverse_pass(&mut block, wb, self, pass, false);
                }
                poly[wb..wb + window].copy_from_slice(&block);
            }
            prof.record_global_pass(self.n);
            for pass in resident {
                prof.record_round(self.n, pass.log_radix);
            }
        }

        for (i, pass) in passes[global_from..].iter().enumerate() {
            kernels::inverse_pass(poly, 0, self, pass, global_from + i + 1 == total);
            prof.record_global_pass(self.n);
            prof.record_round(self.n, pass.log_radix);
        }
        Ok(())
    }

    /// Forward transform discarding instrumentation.
    pub fn forward_simple(&self, poly: &mut [u64], variant: NttVariant) -> Result<()> {
        self.forward(poly, variant, &mut KernelProfile::default())
    }

    /// Inverse transform discarding instrumentation.
    pub fn inverse_simple(&self, poly: &mut [u64], variant: NttVariant) -> Result<()> {
        self.inverse(poly, variant, &mut KernelProfile::default())
    }
}

/// Element-wise product of two NTT-domain polynomials.
pub fn dyadic_mul(a: &[u64], b: &[u64], m: &Modulus) -> Result<Vec<u64>> {
    if a.len() != b.len() {
        return Err(Error::param("dyadic operand length mismatch"));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| mul_mod(x, y, m)).collect())
}

/// `out = a ⊙ b` element-wise.
pub fn dyadic_mul_into(out: &mut [u64], a: &[u64], b: &[u64], m: &Modulus) -> Result<()> {
    if a.len() != b.len() || out.len() != a.len() {
        return Err(Error::param("dyadic operand length mismatch"));
    }
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = mul_mod(x, y, m);
    }
    Ok(())
}

/// `acc += a ⊙ b` element-wise with exactly one modular reduction per
/// element (fused multiply-add).
pub fn dyadic_mad(acc: &mut [u64], a: &[u64], b: &[u64], m: &Modulus) -> Result<()> {
    if a.len() != b.len() || acc.len() != a.len() {
        return Err(Error::param("dyadic operand length mismatch"));
    }
    for ((acc, &x), &y) in acc.iter_mut().zip(a).zip(b) {
        *acc = mad_mod(x, y, *acc, m);
    }
    Ok(())
}

/// Element-wise sum of NTT- or coefficient-domain rows.
pub fn elementwise_add(out: &mut [u64], a: &[u64], m: &Modulus) -> Result<()> {
    if out.len() != a.len() {
        return Err(Error::param("elementwise operand length mismatch"));
    }
    for (o, &x) in out.iter_mut().zip(a) {
        *o = add_mod(*o, x, m);
    }
    Ok(())
}

/// Product of two coefficient-domain polynomials modulo `x^n + 1` and `p`,
/// computed by transform, dyadic product, inverse transform.
pub fn negacyclic_poly_mul(
    a: &[u64],
    b: &[u64],
    tables: &NttTables,
    variant: NttVariant,
) -> Result<Vec<u64>> {
    if a.len() != tables.n() || b.len() != tables.n() {
        return Err(Error::param("operand length does not match tables"));
    }
    let m = tables.modulus();
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    tables.forward_simple(&mut fa, variant)?;
    tables.forward_simple(&mut fb, variant)?;
    let mut prod = dyadic_mul(&fa, &fb, m)?;
    tables.inverse_simple(&mut prod, variant)?;
    Ok(prod)
}

fn run_batch<F>(
    data: &mut [u64],
    tables: &[NttTables],
    variant: NttVariant,
    threads: usize,
    op: F,
) -> Result<KernelProfile>
where
    F: Fn(&NttTables, &mut [u64], &mut KernelProfile) + Sync,
{
    if tables.is_empty() {
        return Err(Error::param("no tables supplied"));
    }
    let n = tables[0].n();
    if tables.iter().any(|t| t.n() != n) {
        return Err(Error::param("tables disagree on degree"));
    }
    variant.validate(n)?;
    let stride = tables.len() * n;
    if data.is_empty() || !data.len().is_multiple_of(stride) {
        return Err(Error::param(format!(
            "batch length {} is not a multiple of L*n = {stride}",
            data.len()
        )));
    }
    let row_profiles = |rows: &mut [u64]| -> KernelProfile {
        let mut prof = KernelProfile::default();
        for (i, row) in rows.chunks_mut(n).enumerate() {
            op(&tables[i % tables.len()], row, &mut prof);
        }
        prof
    };
    if threads <= 1 {
        return Ok(row_profiles(data));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let profile = pool.install(|| {
        use rayon::prelude::*;
        data.par_chunks_mut(stride)
            .map(row_profiles)
            .reduce(KernelProfile::default, |mut a, b| {
                a.merge(&b);
                a
            })
    });
    Ok(profile)
}

/// Forward-transform a batch laid out as `M` instances of `L` residue rows
/// of `n` elements; row `(m, l)` uses `tables[l]`. Rows are independent
/// work units distributed over `threads`; results are identical to the
/// sequential loop for any thread count.
pub fn batch_forward_ntt(
    data: &mut [u64],
    tables: &[NttTables],
    variant: NttVariant,
    threads: usize,
) -> Result<KernelProfile> {
    run_batch(data, tables, variant, threads, |t, row, prof| {
        t.forward(row, variant, prof).expect("validated row");
    })
}

/// Inverse counterpart of [`batch_forward_ntt`].
pub fn batch_inverse_ntt(
    data: &mut [u64],
    tables: &[NttTables],
    variant: NttVariant,
    threads: usize,
) -> Result<KernelProfile> {
    run_batch(data, tables, variant, threads, |t, row, prof| {
        t.inverse(row, variant, prof).expect("validated row");
    })
}

/// Every variant the engine supports at degree `n`, block gaps clamped.
pub fn all_variants(n: usize) -> Vec<NttVariant> {
    vec![
        NttVariant::Naive,
        NttVariant::staged2_for(n),
        NttVariant::high_radix_for(4, n),
        NttVariant::high_radix_for(8, n),
        NttVariant::high_radix_for(16, n),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{harvey_butterfly, pow_mod, reduce_once};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn tables(n: usize, p: u64) -> NttTables {
        NttTables::build(n, &Modulus::new(p).unwrap()).unwrap()
    }

    /// O(N^2) oracle: X_k = sum_j a_j psi^(j(2k+1)) mod p, bit-reversed out.
    fn dft_oracle(poly: &[u64], t: &NttTables) -> Vec<u64> {
        let n = poly.len();
        let m = t.modulus();
        let order = 2 * n as u64;
        let mut natural = vec![0u64; n];
        for (k, out) in natural.iter_mut().enumerate() {
            let mut acc = 0u64;
            for (j, &a) in poly.iter().enumerate() {
                let e = (j as u64 * (2 * k as u64 + 1)) % order;
                let term = mul_mod(a, pow_mod(t.psi(), e, m), m);
                acc = add_mod(acc, term, m);
            }
            *out = acc;
        }
        (0..n).map(|i| natural[bit_reverse(i, t.log_n())]).collect()
    }

    fn schoolbook_negacyclic(a: &[u64], b: &[u64], m: &Modulus) -> Vec<u64> {
        let n = a.len();
        let mut c = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                let prod = mul_mod(a[i], b[j], m);
                if i + j < n {
                    c[i + j] = add_mod(c[i + j], prod, m);
                } else {
                    c[i + j - n] = crate::modular::sub_mod(c[i + j - n], prod, m);
                }
            }
        }
        c
    }

    fn random_poly(n: usize, p: u64, rng: &mut impl Rng) -> Vec<u64> {
        (0..n).map(|_| rng.gen_range(0..p)).collect()
    }

    #[test]
    fn build_tables_invariants() {
        let t = tables(8, 97);
        let m = t.modulus();
        assert_eq!(pow_mod(t.psi(), 8, m), 96);
        assert_eq!(t.forward_twiddle(0).value(), 1);
        assert_eq!(mul_mod(t.n_inv().value(), 8, m), 1);

        let t2 = tables(2, 5);
        assert!(t2.psi() == 2 || t2.psi() == 3);
        assert_eq!(pow_mod(t2.psi(), 2, t2.modulus()), 4);

        assert!(NttTables::build(8, &Modulus::new(7).unwrap()).is_err());
        assert!(NttTables::build(12, &Modulus::new(97).unwrap()).is_err());
    }

    #[test]
    fn forward_trivial_inputs() {
        let t = tables(8, 97);
        let mut zeros = vec![0u64; 8];
        t.forward_simple(&mut zeros, NttVariant::Naive).unwrap();
        assert_eq!(zeros, vec![0u64; 8]);

        // constant-term-only polynomial maps to a constant spectrum
        let mut poly = vec![0u64; 8];
        poly[0] = 42;
        t.forward_simple(&mut poly, NttVariant::Naive).unwrap();
        assert_eq!(poly, vec![42u64; 8]);
    }

    #[test]
    fn forward_matches_schoolbook_dft() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for n in [2usize, 4, 8, 16, 32, 64, 128, 256] {
            let t = tables(n, 7681); // 7681 = 1 + 512*15, supports n <= 256
            for _ in 0..20 {
                let poly = random_poly(n, 7681, &mut rng);
                let expected = dft_oracle(&poly, &t);
                for variant in all_variants(n) {
                    let mut got = poly.clone();
                    t.forward_simple(&mut got, variant).unwrap();
                    assert_eq!(got, expected, "n={n} variant={}", variant.label());
                }
            }
        }
    }

    #[test]
    fn variants_bit_identical_to_naive() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let p = crate::rns::generate_primes(1 << 15, 50, 1).unwrap()[0];
        for log_n in [4u32, 7, 10, 13, 15] {
            let n = 1usize << log_n;
            let t = NttTables::build(n, &p).unwrap();
            let poly = random_poly(n, p.value(), &mut rng);
            let mut reference = poly.clone();
            t.forward_simple(&mut reference, NttVariant::Naive).unwrap();
            for variant in all_variants(n) {
                let mut got = poly.clone();
                t.forward_simple(&mut got, variant).unwrap();
                assert_eq!(got, reference, "forward n={n} {}", variant.label());
            }
            // inverse agreement too
            let mut inv_ref = reference.clone();
            t.inverse_simple(&mut inv_ref, NttVariant::Naive).unwrap();
            assert_eq!(inv_ref, poly);
            for variant in all_variants(n) {
                let mut got = reference.clone();
                t.inverse_simple(&mut got, variant).unwrap();
                assert_eq!(got, inv_ref, "inverse n={n} {}", variant.label());
            }
        }
    }

    #[test]
    fn round_trip_all_sizes_and_variants() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let p = crate::rns::generate_primes(1 << 15, 55, 1).unwrap()[0];
        for log_n in 4..=15u32 {
            let n = 1usize << log_n;
            let t = NttTables::build(n, &p).unwrap();
            let poly = random_poly(n, p.value(), &mut rng);
            for variant in all_variants(n) {
                let mut work = poly.clone();
                t.forward_simple(&mut work, variant).unwrap();
                t.inverse_simple(&mut work, variant).unwrap();
                assert_eq!(work, poly, "n={n} {}", variant.label());
            }
        }
    }

    #[test]
    fn transform_is_linear() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let t = tables(64, 7681);
        let m = t.modulus();
        for _ in 0..50 {
            let a = random_poly(64, 7681, &mut rng);
            let b = random_poly(64, 7681, &mut rng);
            let alpha = rng.gen_range(1..7681);
            let combo: Vec<u64> = a
                .iter()
                .zip(&b)
                .map(|(&x, &y)| add_mod(mul_mod(alpha, x, m), y, m))
                .collect();
            let mut fa = a.clone();
            let mut fb = b.clone();
            let mut fc = combo.clone();
            t.forward_simple(&mut fa, NttVariant::Naive).unwrap();
            t.forward_simple(&mut fb, NttVariant::Naive).unwrap();
            t.forward_simple(&mut fc, NttVariant::Naive).unwrap();
            for i in 0..64 {
                assert_eq!(fc[i], add_mod(mul_mod(alpha, fa[i], m), fb[i], m));
            }
        }
    }

    #[test]
    fn profile_counts_match_accounting() {
        let p = crate::rns::generate_primes(1 << 12, 50, 1).unwrap()[0];
        for log_n in [10u32, 11, 12] {
            let n = 1usize << log_n;
            let t = NttTables::build(n, &p).unwrap();
            let mut poly = vec![1u64; n];

            let mut prof = KernelProfile::default();
            t.forward(&mut poly, NttVariant::Naive, &mut prof).unwrap();
            assert_eq!(prof.mem_elements, 2 * n as u64 * log_n as u64);
            assert_eq!(prof.rounds, log_n as u64);
            assert_eq!(prof.butterflies, (n as u64 / 2) * log_n as u64);
            assert_eq!(prof.alu_ops, (n as u64 / 2) * 48 * log_n as u64);

            let mut prof = KernelProfile::default();
            t.forward(&mut poly, NttVariant::high_radix_for(8, n), &mut prof)
                .unwrap();
            assert_eq!(prof.mem_elements, 4 * n as u64, "radix-8 staged at n={n}");
        }
    }

    #[test]
    fn dyadic_ops() {
        let t = tables(8, 97);
        let m = t.modulus();
        let a = vec![5u64, 10, 20, 40, 80, 63, 31, 15];
        let zeros = vec![0u64; 8];
        let ones = vec![1u64; 8];
        assert_eq!(dyadic_mul(&a, &zeros, m).unwrap(), zeros);
        assert_eq!(dyadic_mul(&a, &ones, m).unwrap(), a);
        let mut acc = a.clone();
        dyadic_mad(&mut acc, &a, &ones, m).unwrap();
        for (got, &x) in acc.iter().zip(&a) {
            assert_eq!(*got, add_mod(x, x, m));
        }
        assert!(dyadic_mul(&a, &ones[..4], m).is_err());
    }

    #[test]
    fn negacyclic_identities() {
        let t = tables(2, 5);
        // x * x = x^2 = -1 mod x^2 + 1
        let c = negacyclic_poly_mul(&[0, 1], &[0, 1], &t, NttVariant::Naive).unwrap();
        assert_eq!(c, vec![4, 0]);

        let t = tables(8, 97);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let b = random_poly(8, 97, &mut rng);
        let mut one = vec![0u64; 8];
        one[0] = 1;
        let c = negacyclic_poly_mul(&one, &b, &t, NttVariant::Naive).unwrap();
        assert_eq!(c, b);
    }

    #[test]
    fn negacyclic_matches_schoolbook() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let t = tables(256, 7681);
        for variant in all_variants(256) {
            let a = random_poly(256, 7681, &mut rng);
            let b = random_poly(256, 7681, &mut rng);
            let expected = schoolbook_negacyclic(&a, &b, t.modulus());
            let got = negacyclic_poly_mul(&a, &b, &t, variant).unwrap();
            assert_eq!(got, expected, "{}", variant.label());
        }
    }

    #[test]
    fn batch_matches_sequential_and_is_thread_invariant() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let primes = crate::rns::generate_primes(256, 50, 3).unwrap();
        let tables: Vec<NttTables> = primes
            .iter()
            .map(|p| NttTables::build(256, p).unwrap())
            .collect();
        let instances = 8;
        let mut batch: Vec<u64> = Vec::new();
        for i in 0..instances {
            for l in 0..tables.len() {
                let p = primes[l].value();
                let _ = i;
                batch.extend(random_poly(256, p, &mut rng));
            }
        }
        let mut expected = batch.clone();
        for (row, t) in expected
            .chunks_mut(256)
            .zip(tables.iter().cycle())
        {
            t.forward_simple(row, NttVariant::Naive).unwrap();
        }

        let mut serial = batch.clone();
        batch_forward_ntt(&mut serial, &tables, NttVariant::Naive, 1).unwrap();
        assert_eq!(serial, expected);

        let mut parallel = batch.clone();
        batch_forward_ntt(&mut parallel, &tables, NttVariant::Naive, 8).unwrap();
        assert_eq!(parallel, expected);

        // batch of one equals a single transform
        let mut single = batch[..256].to_vec();
        batch_forward_ntt(&mut single, &tables[..1], NttVariant::Naive, 1).unwrap();
        assert_eq!(&single, &expected[..256]);
    }

    #[test]
    fn block_round_kernels_match_radix2_levels() {
        let t = tables(8, 97);
        let m = t.modulus();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let poly = random_poly(8, 97, &mut rng);

        // reference: three radix-2 levels (gaps 4, 2, 1), no final reduction
        let mut reference = poly.clone();
        let mut k = 1usize;
        let mut l = 4usize;
        while l > 0 {
            let mblocks = 8 / (2 * l);
            for i in 0..mblocks {
                let w = t.forward_twiddle(k);
                k += 1;
                for j in 2 * i * l..2 * i * l + l {
                    let (a, b) = harvey_butterfly(reference[j], reference[j + l], &w, m);
                    reference[j] = a;
                    reference[j + l] = b;
                }
            }
            l /= 2;
        }

        let mut block: [u64; 8] = poly.clone().try_into().unwrap();
        let tw: [MulOperand; 7] = [
            t.forward_twiddle(1),
            t.forward_twiddle(2),
            t.forward_twiddle(3),
            t.forward_twiddle(4),
            t.forward_twiddle(5),
            t.forward_twiddle(6),
            t.forward_twiddle(7),
        ];
        radix8_block_round(&mut block, &tw, m);
        assert_eq!(block.to_vec(), reference, "pre-reduction lazy values");

        // reduced values equal the full forward transform
        let mut reduced = block;
        for v in reduced.iter_mut() {
            *v = reduce_once(reduce_once(*v, 2 * 97), 97);
        }
        let mut full = poly.clone();
        t.forward_simple(&mut full, NttVariant::Naive).unwrap();
        assert_eq!(reduced.to_vec(), full);

        // radix-4 kernel equals two radix-2 levels
        let mut quad: [u64; 4] = [poly[0], poly[1], poly[2], poly[3]];
        let t4 = tables(4, 97);
        let tw4: [MulOperand; 3] = [
            t4.forward_twiddle(1),
            t4.forward_twiddle(2),
            t4.forward_twiddle(3),
        ];
        radix4_block_round(&mut quad, &tw4, t4.modulus());
        let mut ref4 = [poly[0], poly[1], poly[2], poly[3]];
        for (l, ks) in [(2usize, 1usize), (1, 2)] {
            let mut k = ks;
            let mblocks = 4 / (2 * l);
            for i in 0..mblocks {
                let w = t4.forward_twiddle(k);
                k += 1;
                for j in 2 * i * l..2 * i * l + l {
                    let (a, b) = harvey_butterfly(ref4[j], ref4[j + l], &w, t4.modulus());
                    ref4[j] = a;
                    ref4[j + l] = b;
                }
            }
        }
        assert_eq!(quad, ref4);
    }

    #[test]
    fn variant_validation_errors() {
        let t = tables(16, 97);
        let mut poly = vec![0u64; 16];
        // block_gap >= n
        let bad = NttVariant::Staged2 { block_gap: 16 };
        assert!(t
            .forward(&mut poly, bad, &mut KernelProfile::default())
            .is_err());
        let bad = NttVariant::HighRadix {
            radix: 5,
            block_gap: 4,
        };
        assert!(t
            .forward(&mut poly, bad, &mut KernelProfile::default())
            .is_err());
        // wrong length
        let mut short = vec![0u64; 8];
        assert!(t
            .forward(&mut short, NttVariant::Naive, &mut KernelProfile::default())
            .is_err());
    }
}
