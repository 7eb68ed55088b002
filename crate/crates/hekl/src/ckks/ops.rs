//! Evaluation operations: addition, multiplication, relinearization,
//! rescaling, modulus switching, and slot rotation via Galois automorphism
//! plus key switching.

use crate::error::{Error, Result};
use crate::modular::sub_mod;
use crate::ntt::{dyadic_mad, dyadic_mul_into, elementwise_add};
use crate::rns::{mod_switch_drop_last, rescale_rows, PolyDomain, RnsPolynomial};

use super::{Ciphertext, CkksContext, GaloisKeys, KswKey};

/// The Galois element `5^step mod 2n` driving a rotation by `step` slots.
pub(crate) fn galois_element(step: usize, n: usize) -> usize {
    let m = 2 * n;
    let mut g = 1usize;
    for _ in 0..step {
        g = g * 5 % m;
    }
    g
}

/// Apply `x -> x^g` to signed coefficients: index permutation with a sign
/// flip on wrap-around past degree n.
pub(crate) fn automorph_signed(src: &[i64], dst: &mut [i64], g: usize, n: usize) {
    let m = 2 * n;
    for (j, &v) in src.iter().enumerate() {
        let e = j * g % m;
        if e < n {
            dst[e] = v;
        } else {
            dst[e - n] = -v;
        }
    }
}

/// Apply `x -> x^g` to one residue row in coefficient domain.
fn automorph_row(src: &[u64], dst: &mut [u64], g: usize, p: u64) {
    let n = src.len();
    let m = 2 * n;
    for (j, &v) in src.iter().enumerate() {
        let e = j * g % m;
        if e < n {
            dst[e] = v;
        } else {
            dst[e - n] = if v == 0 { 0 } else { p - v };
        }
    }
}

impl CkksContext {
    fn check_pair(&self, c0: &Ciphertext, c1: &Ciphertext) -> Result<()> {
        if c0.level() != c1.level() {
            return Err(Error::param(format!(
                "level mismatch: {} vs {}",
                c0.level(),
                c1.level()
            )));
        }
        if c0.scale() != c1.scale() {
            return Err(Error::param(format!(
                "scale mismatch: {:e} vs {:e}; align with rescale/mod_switch",
                c0.scale(),
                c1.scale()
            )));
        }
        Ok(())
    }

    /// Element-wise ciphertext addition. Levels and scales must match
    /// exactly; callers align them with rescale / mod_switch.
    pub fn add(&self, c0: &Ciphertext, c1: &Ciphertext) -> Result<Ciphertext> {
        self.check_pair(c0, c1)?;
        if c0.size() != c1.size() {
            return Err(Error::param("ciphertext size mismatch"));
        }
        let mut polys = Vec::with_capacity(c0.size());
        for (p0, p1) in c0.polys.iter().zip(&c1.polys) {
            let mut out = p0.clone_in(&self.pool);
            for i in 0..out.level() {
                elementwise_add(out.row_mut(i), p1.row(i), self.prime(i)).expect("same degree");
            }
            polys.push(out);
        }
        Ok(Ciphertext::new(polys, c0.scale()))
    }

    /// Tensor multiplication of two size-2 ciphertexts: the size-3 result
    /// `(a0*b0, a0*b1 + a1*b0, a1*b1)` at scale `scale0 * scale1`. The
    /// middle term accumulates through the fused multiply-add, one modular
    /// reduction per element.
    pub fn multiply(&self, c0: &Ciphertext, c1: &Ciphertext) -> Result<Ciphertext> {
        self.check_level(c0, c1)?;
        if c0.size() != 2 || c1.size() != 2 {
            return Err(Error::state("multiply requires size-2 inputs"));
        }
        let level = c0.level();
        let n = self.params.n;
        let mut out0 = RnsPolynomial::uninit_in(&self.pool, n, level, PolyDomain::Ntt);
        let mut out1 = RnsPolynomial::uninit_in(&self.pool, n, level, PolyDomain::Ntt);
        let mut out2 = RnsPolynomial::uninit_in(&self.pool, n, level, PolyDomain::Ntt);
        for i in 0..level {
            let m = self.prime(i);
            let (a0, a1) = (c0.polys[0].row(i), c0.polys[1].row(i));
            let (b0, b1) = (c1.polys[0].row(i), c1.polys[1].row(i));
            dyadic_mul_into(out0.row_mut(i), a0, b0, m).expect("same degree");
            dyadic_mul_into(out2.row_mut(i), a1, b1, m).expect("same degree");
            let mid = out1.row_mut(i);
            dyadic_mul_into(mid, a0, b1, m).expect("same degree");
            dyadic_mad(mid, a1, b0, m).expect("same degree");
        }
        Ok(Ciphertext::new(
            vec![out0, out1, out2],
            c0.scale() * c1.scale(),
        ))
    }

    fn check_level(&self, c0: &Ciphertext, c1: &Ciphertext) -> Result<()> {
        if c0.level() != c1.level() {
            return Err(Error::param(format!(
                "level mismatch: {} vs {}",
                c0.level(),
                c1.level()
            )));
        }
        Ok(())
    }

    /// Key-switch a coefficient-domain polynomial `d` from the key `target`
    /// (encrypted in `key`) to `s`: decompose `d` into per-prime digits,
    /// accumulate digit-by-key products over the extended basis, then divide
    /// by the key-switching prime. Returns NTT-domain `(ks0, ks1)` whose
    /// decryption under `s` is `d * target` plus key-switching noise.
    fn key_switch(&self, d: &RnsPolynomial, key: &KswKey) -> Result<(RnsPolynomial, RnsPolynomial)> {
        debug_assert_eq!(d.domain(), PolyDomain::Coefficient);
        let level = d.level();
        if key.parts.len() < level {
            return Err(Error::param(format!(
                "key-switching key has {} digits, level {level} needs as many",
                key.parts.len()
            )));
        }
        if key.parts[0].b_q.n() != d.n() {
            return Err(Error::param("key-switching key degree mismatch"));
        }
        let n = d.n();
        let special = *self.basis().special().unwrap();

        let mut acc0 = RnsPolynomial::zero_in(&self.pool, n, level, PolyDomain::Ntt);
        let mut acc1 = RnsPolynomial::zero_in(&self.pool, n, level, PolyDomain::Ntt);
        let mut acc0_p = self.pool.acquire(n);
        let mut acc1_p = self.pool.acquire(n);
        acc0_p.fill(0);
        acc1_p.fill(0);
        let mut digit = self.pool.acquire(n);

        for i in 0..level {
            let part = &key.parts[i];
            let source = d.row(i);
            for j in 0..level {
                let m = self.prime(j);
                if j == i {
                    digit.copy_from_slice(source);
                } else {
                    for (dst, &x) in digit.iter_mut().zip(source) {
                        *dst = m.reduce_u64(x);
                    }
                }
                self.fwd_row(j, &mut digit);
                dyadic_mad(acc0.row_mut(j), &digit, part.b_q.row(j), m).expect("same degree");
                dyadic_mad(acc1.row_mut(j), &digit, part.a_q.row(j), m).expect("same degree");
            }
            // digits are already below P
            digit.copy_from_slice(source);
            self.fwd_row_special(&mut digit);
            dyadic_mad(&mut acc0_p, &digit, &part.b_p, &special).expect("same degree");
            dyadic_mad(&mut acc1_p, &digit, &part.a_p, &special).expect("same degree");
        }

        let ks0 = self.divide_by_special(acc0, &mut acc0_p);
        let ks1 = self.divide_by_special(acc1, &mut acc1_p);
        Ok((ks0, ks1))
    }

    /// Scale an extended-basis accumulator down by the key-switching prime:
    /// `out_i = (acc_i - acc_P) * P^-1 mod q_i`, the rescale form with `P`
    /// as the dropped modulus.
    fn divide_by_special(&self, mut acc: RnsPolynomial, acc_p: &mut [u64]) -> RnsPolynomial {
        let level = acc.level();
        self.inv_row_special(acc_p);
        for i in 0..level {
            let m = self.prime(i);
            let inv = self.basis().special_inv(i);
            self.inv_row(i, acc.row_mut(i));
            let row = acc.row_mut(i);
            for (x, &p_res) in row.iter_mut().zip(acc_p.iter()) {
                let reduced = m.reduce_u64(p_res);
                *x = inv.mul(sub_mod(*x, reduced, m), m);
            }
            self.fwd_row(i, row);
        }
        acc.set_domain(PolyDomain::Ntt);
        acc
    }

    /// Reduce a size-3 ciphertext back to size 2 by key-switching its
    /// quadratic component with the evaluation key.
    pub fn relinearize(&self, c: &Ciphertext, evk: &KswKey) -> Result<Ciphertext> {
        if c.size() != 3 {
            return Err(Error::state("relinearize requires a size-3 ciphertext"));
        }
        let mut d = c.polys[2].clone_in(&self.pool);
        self.inv_poly(&mut d);
        let (ks0, ks1) = self.key_switch(&d, evk)?;
        let mut out0 = c.polys[0].clone_in(&self.pool);
        let mut out1 = c.polys[1].clone_in(&self.pool);
        for i in 0..c.level() {
            let m = self.prime(i);
            elementwise_add(out0.row_mut(i), ks0.row(i), m).expect("same degree");
            elementwise_add(out1.row_mut(i), ks1.row(i), m).expect("same degree");
        }
        Ok(Ciphertext::new(vec![out0, out1], c.scale()))
    }

    /// Drop the last chain prime with division: level decreases by one and
    /// the scale divides by the dropped prime.
    pub fn rescale(&self, c: &Ciphertext) -> Result<Ciphertext> {
        if c.level() < 2 {
            return Err(Error::state("cannot rescale below level 1"));
        }
        let dropped = self.prime(c.level() - 1).value() as f64;
        let mut polys = Vec::with_capacity(c.size());
        for poly in &c.polys {
            let mut coeff = poly.clone_in(&self.pool);
            self.inv_poly(&mut coeff);
            let mut scaled = rescale_rows(&coeff, self.basis(), &self.pool)?;
            self.fwd_poly(&mut scaled);
            polys.push(scaled);
        }
        Ok(Ciphertext::new(polys, c.scale() / dropped))
    }

    /// Drop the last chain prime without division; scale is unchanged.
    pub fn mod_switch(&self, c: &Ciphertext) -> Result<Ciphertext> {
        if c.level() < 2 {
            return Err(Error::state("cannot switch modulus below level 1"));
        }
        let mut polys = Vec::with_capacity(c.size());
        for poly in &c.polys {
            polys.push(mod_switch_drop_last(poly.clone_in(&self.pool))?);
        }
        Ok(Ciphertext::new(polys, c.scale()))
    }

    /// Rotate the slot vector cyclically by `k` places: Galois automorphism
    /// `x -> x^(5^k)` on both components, then key-switch the secret-key
    /// component back to `s` with the step's rotation key.
    pub fn rotate(&self, c: &Ciphertext, k: usize, keys: &GaloisKeys) -> Result<Ciphertext> {
        if c.size() != 2 {
            return Err(Error::state("rotate requires a size-2 ciphertext"));
        }
        let slots = self.params.slots();
        let step = k % slots;
        if step == 0 {
            return Ok(c.clone());
        }
        let key = keys
            .keys
            .get(&step)
            .ok_or_else(|| Error::param(format!("no Galois key for rotation step {step}")))?;
        let n = self.params.n;
        let g = galois_element(step, n);
        let level = c.level();

        let mut c0 = c.polys[0].clone_in(&self.pool);
        let mut c1 = c.polys[1].clone_in(&self.pool);
        self.inv_poly(&mut c0);
        self.inv_poly(&mut c1);
        let mut t0 = RnsPolynomial::uninit_in(&self.pool, n, level, PolyDomain::Coefficient);
        let mut d = RnsPolynomial::uninit_in(&self.pool, n, level, PolyDomain::Coefficient);
        for i in 0..level {
            let p = self.prime(i).value();
            automorph_row(c0.row(i), t0.row_mut(i), g, p);
            automorph_row(c1.row(i), d.row_mut(i), g, p);
        }

        let (ks0, ks1) = self.key_switch(&d, key)?;
        self.fwd_poly(&mut t0);
        for i in 0..level {
            let m = self.prime(i);
            elementwise_add(t0.row_mut(i), ks0.row(i), m).expect("same degree");
        }
        Ok(Ciphertext::new(vec![t0, ks1], c.scale()))
    }

    /// Plaintext-space helper for tests and oracles: decrypt a size-3
    /// ciphertext directly with `s` and `s^2`.
    #[cfg(test)]
    pub(crate) fn decrypt_size3(
        &self,
        c: &Ciphertext,
        sk: &super::SecretKey,
    ) -> Result<super::Plaintext> {
        use crate::modular::{add_mod, mul_mod};
        if c.size() != 3 {
            return Err(Error::state("expected a size-3 ciphertext"));
        }
        let level = c.level();
        let mut out = c.polys[0].clone_in(&self.pool);
        for i in 0..level {
            let m = self.prime(i);
            let s = sk.rows_q.row(i);
            let out_row = out.row_mut(i);
            let c1 = c.polys[1].row(i);
            let c2 = c.polys[2].row(i);
            for j in 0..self.params.n {
                let s2 = mul_mod(s[j], s[j], m);
                let t = add_mod(mul_mod(c1[j], s[j], m), mul_mod(c2[j], s2, m), m);
                out_row[j] = add_mod(out_row[j], t, m);
            }
        }
        self.inv_poly(&mut out);
        Ok(super::Plaintext {
            poly: out,
            scale: c.scale(),
        })
    }
}
