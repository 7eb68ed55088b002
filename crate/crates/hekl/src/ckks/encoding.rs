//! Canonical-embedding encoder: maps complex slot vectors to and from ring
//! coefficients through a special FFT over the 2n-th roots of unity.
//!
//! Slots are evaluations of the ring element at the odd root powers indexed
//! by the rotation group 5^j mod 2n, which is what makes a cyclic slot
//! rotation an automorphism x -> x^(5^k).

use num_complex::Complex64;

pub(crate) struct Encoder {
    slots: usize,
    m: usize,
    /// 5^i mod 2n for i < slots.
    rot_group: Vec<usize>,
    /// exp(2*pi*i*j / m) for j <= m.
    ksi_pows: Vec<Complex64>,
}

fn bit_reverse_permute(vals: &mut [Complex64]) {
    let size = vals.len();
    let mut j = 0usize;
    for i in 1..size {
        let mut bit = size >> 1;
        while j >= bit {
            j -= bit;
            bit >>= 1;
        }
        j += bit;
        if i < j {
            vals.swap(i, j);
        }
    }
}

impl Encoder {
    pub fn new(n: usize) -> Encoder {
        let slots = n / 2;
        let m = 2 * n;
        let mut rot_group = Vec::with_capacity(slots);
        let mut five_pow = 1usize;
        for _ in 0..slots {
            rot_group.push(five_pow);
            five_pow = (five_pow * 5) % m;
        }
        let angle = 2.0 * std::f64::consts::PI / m as f64;
        let ksi_pows = (0..=m)
            .map(|j| Complex64::from_polar(1.0, angle * j as f64))
            .collect();
        Encoder {
            slots,
            m,
            rot_group,
            ksi_pows,
        }
    }

    /// Slot values -> embedding coefficients (the encode direction).
    pub fn embed_inverse(&self, vals: &mut [Complex64]) {
        debug_assert_eq!(vals.len(), self.slots);
        let size = self.slots;
        let mut len = size;
        while len >= 2 {
            let lenh = len >> 1;
            let lenq = len << 2;
            for base in (0..size).step_by(len) {
                for j in 0..lenh {
                    let idx = (lenq - (self.rot_group[j] % lenq)) * self.m / lenq;
                    let u = vals[base + j] + vals[base + j + lenh];
                    let v = (vals[base + j] - vals[base + j + lenh]) * self.ksi_pows[idx];
                    vals[base + j] = u;
                    vals[base + j + lenh] = v;
                }
            }
            len >>= 1;
        }
        bit_reverse_permute(vals);
        let scale = 1.0 / size as f64;
        for v in vals.iter_mut() {
            *v *= scale;
        }
    }

    /// Embedding coefficients -> slot values (the decode direction).
    pub fn embed_forward(&self, vals: &mut [Complex64]) {
        debug_assert_eq!(vals.len(), self.slots);
        let size = self.slots;
        bit_reverse_permute(vals);
        let mut len = 2;
        while len <= size {
            let lenh = len >> 1;
            let lenq = len << 2;
            for base in (0..size).step_by(len) {
                for j in 0..lenh {
                    let idx = (self.rot_group[j] % lenq) * self.m / lenq;
                    let u = vals[base + j];
                    let v = vals[base + j + lenh] * self.ksi_pows[idx];
                    vals[base + j] = u + v;
                    vals[base + j + lenh] = u - v;
                }
            }
            len <<= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_slots(slots: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..slots)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn embedding_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for n in [8usize, 64, 1024] {
            let enc = Encoder::new(n);
            let original = random_slots(n / 2, &mut rng);
            let mut vals = original.clone();
            enc.embed_inverse(&mut vals);
            enc.embed_forward(&mut vals);
            for (got, want) in vals.iter().zip(&original) {
                assert!((got - want).norm() < 1e-9, "{got} != {want}");
            }
        }
    }

    #[test]
    fn constant_embeds_to_constant_coefficient() {
        let enc = Encoder::new(64);
        let mut vals = vec![Complex64::new(0.75, 0.0); 32];
        enc.embed_inverse(&mut vals);
        assert!((vals[0].re - 0.75).abs() < 1e-12);
        for v in &vals[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn slotwise_product_matches_negacyclic_coefficient_product() {
        // the embedding must be a ring homomorphism: slot products
        // correspond to polynomial products modulo x^n + 1
        let n = 16usize;
        let slots = n / 2;
        let enc = Encoder::new(n);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let za = random_slots(slots, &mut rng);
        let zb = random_slots(slots, &mut rng);

        let coeffs = |z: &[Complex64]| -> Vec<f64> {
            let mut vals = z.to_vec();
            enc.embed_inverse(&mut vals);
            let mut c = vec![0.0; n];
            for i in 0..slots {
                c[i] = vals[i].re;
                c[i + slots] = vals[i].im;
            }
            c
        };
        let ca = coeffs(&za);
        let cb = coeffs(&zb);
        // negacyclic product over the reals
        let mut cc = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i + j < n {
                    cc[i + j] += ca[i] * cb[j];
                } else {
                    cc[i + j - n] -= ca[i] * cb[j];
                }
            }
        }
        let mut vals: Vec<Complex64> = (0..slots)
            .map(|i| Complex64::new(cc[i], cc[i + slots]))
            .collect();
        enc.embed_forward(&mut vals);
        for ((got, a), b) in vals.iter().zip(&za).zip(&zb) {
            assert!((got - a * b).norm() < 1e-9, "{got} vs {}", a * b);
        }
    }
}
