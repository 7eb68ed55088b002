//! Composite evaluation routines: multiply-relinearize chains with optional
//! rescaling, modulus switching, and accumulation, plus slot rotation.

use crate::error::{Error, Result};

use super::{Ciphertext, CkksContext, GaloisKeys, KswKey};

impl CkksContext {
    /// Multiplication followed by relinearization.
    pub fn mul_lin(&self, c0: &Ciphertext, c1: &Ciphertext, evk: &KswKey) -> Result<Ciphertext> {
        let product = self.multiply(c0, c1)?;
        self.relinearize(&product, evk)
    }

    /// Multiplication, relinearization, then rescaling.
    pub fn mul_lin_rs(&self, c0: &Ciphertext, c1: &Ciphertext, evk: &KswKey) -> Result<Ciphertext> {
        let relinearized = self.mul_lin(c0, c1, evk)?;
        self.rescale(&relinearized)
    }

    /// Ciphertext square with relinearization and rescaling.
    pub fn sqr_lin_rs(&self, c: &Ciphertext, evk: &KswKey) -> Result<Ciphertext> {
        self.mul_lin_rs(c, c, evk)
    }

    /// Multiply, relinearize, rescale, then add `c2`. `c2` may sit at the
    /// product's original level (it is modulus-switched down) or already at
    /// the rescaled level; its scale must match the rescaled product's.
    pub fn mul_lin_rs_modsw_add(
        &self,
        c0: &Ciphertext,
        c1: &Ciphertext,
        c2: &Ciphertext,
        evk: &KswKey,
    ) -> Result<Ciphertext> {
        let product = self.mul_lin_rs(c0, c1, evk)?;
        let aligned = if c2.level() == product.level() + 1 {
            self.mod_switch(c2)?
        } else if c2.level() == product.level() {
            c2.clone()
        } else {
            return Err(Error::param(format!(
                "addend level {} incompatible with product level {}",
                c2.level(),
                product.level()
            )));
        };
        self.add(&product, &aligned)
    }

    /// Cyclic slot rotation (the fifth benchmark routine).
    pub fn rotate_routine(
        &self,
        c: &Ciphertext,
        k: usize,
        keys: &GaloisKeys,
    ) -> Result<Ciphertext> {
        self.rotate(c, k, keys)
    }
}
