//! Schnorr signatures over a [`GroupParams`] subgroup.
//!
//! A signature on `m` under `(x, y = g^x)` is `(r, s)` with `t1 = g^k`,
//! `r = H(m, t1) mod q` and `s = k + r*x mod q`. Verification recomputes
//! `t1 = g^s * y^-r`.

use num_bigint::BigUint;

use crate::error::Result;
use crate::group::{GroupParams, KeyPair, PublicKey};
use crate::hashing::{HashSuite, Part};
use crate::numeric::{mod_exp, mod_inv, sample_zq_star, ExpCounter, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchnorrSignature {
    pub r: BigUint,
    pub s: BigUint,
}

impl SchnorrSignature {
    pub fn in_range(&self, params: &GroupParams) -> bool {
        self.r < params.q && self.s < params.q
    }
}

/// `H(m, t1) mod q`, with `m` length-prefixed and `t1` at the byte width of `p`.
pub fn challenge(params: &GroupParams, hash: &HashSuite, m: &[u8], t1: &BigUint) -> BigUint {
    hash.to_zq(
        &[Part::Bytes(m), Part::Fixed(t1, params.p_bytes())],
        &params.q,
    )
}

/// `g^s * y^-r mod p`. Two exponentiations; the inversion is not counted.
pub fn commitment(
    params: &GroupParams,
    signer: &PublicKey,
    sig: &SchnorrSignature,
    counter: Option<&ExpCounter>,
) -> Result<BigUint> {
    let gs = mod_exp(&params.g, &sig.s, &params.p, counter)?;
    let y_inv = mod_inv(&signer.y, &params.p)?;
    let y_neg_r = mod_exp(&y_inv, &sig.r, &params.p, counter)?;
    Ok(gs * y_neg_r % &params.p)
}

/// `s = k + r*x mod q`.
pub(crate) fn response(params: &GroupParams, k: &BigUint, r: &BigUint, x: &BigUint) -> BigUint {
    (k + r * x) % &params.q
}

pub fn sign_with_nonce(
    params: &GroupParams,
    hash: &HashSuite,
    signer: &KeyPair,
    m: &[u8],
    k: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<SchnorrSignature> {
    let t1 = mod_exp(&params.g, k, &params.p, counter)?;
    let r = challenge(params, hash, m, &t1);
    let s = response(params, k, &r, signer.secret());
    Ok(SchnorrSignature { r, s })
}

pub fn sign<R: RandomSource + ?Sized>(
    params: &GroupParams,
    hash: &HashSuite,
    signer: &KeyPair,
    m: &[u8],
    rng: &mut R,
) -> Result<SchnorrSignature> {
    let k = sample_zq_star(&params.q, rng);
    sign_with_nonce(params, hash, signer, m, &k, None)
}

pub fn verify(
    params: &GroupParams,
    hash: &HashSuite,
    signer: &PublicKey,
    m: &[u8],
    sig: &SchnorrSignature,
    counter: Option<&ExpCounter>,
) -> bool {
    if !sig.in_range(params) {
        return false;
    }
    match commitment(params, signer, sig, counter) {
        Ok(t1) => challenge(params, hash, m, &t1) == sig.r,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn sign_then_verify() {
        let params = GroupParams::toy();
        let hash = HashSuite::sha256();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let key = KeyPair::generate(&params, &mut rng);
        for i in 0..50u8 {
            let m = [i; 3];
            let sig = sign(&params, &hash, &key, &m, &mut rng).unwrap();
            assert!(verify(&params, &hash, key.public(), &m, &sig, None));
        }
    }

    #[test]
    fn out_of_range_signature_rejected() {
        let params = GroupParams::toy();
        let hash = HashSuite::sha256();
        let key = KeyPair::from_secret(&params, BigUint::from(3u8)).unwrap();
        let sig = SchnorrSignature {
            r: BigUint::from(11u8),
            s: BigUint::from(1u8),
        };
        assert!(!verify(&params, &hash, key.public(), b"m", &sig, None));
    }
}
