//! Schnorr-based authenticated encryption with public verifiability.
//!
//! ```text
//! k <- Z_q^*,  t1 = g^k,  t2 = y_B^k
//! c = E_h(t2)(m),  r = H(m, t1),  s = k + r*x_A mod q
//! ```
//!
//! `(r, s)` is an ordinary Schnorr signature on `m`, so the receiver turns a
//! ciphertext into third-party evidence by releasing `(m, r, s)`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::group::{GroupParams, KeyPair, PublicKey};
use crate::hashing::{sym_decrypt, sym_encrypt, HashSuite};
use crate::numeric::{mod_exp, sample_zq_star, ExpCounter, RandomSource};
use crate::schnorr::{self, challenge, commitment, response};

pub use crate::schnorr::SchnorrSignature;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovedCiphertext {
    pub c: Vec<u8>,
    pub sig: SchnorrSignature,
}

/// `(m, r, s)`: the message with its sender's Schnorr signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicProof {
    pub m: Vec<u8>,
    pub sig: SchnorrSignature,
}

pub fn encrypt_sign<R: RandomSource + ?Sized>(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &KeyPair,
    receiver: &PublicKey,
    m: &[u8],
    rng: &mut R,
    counter: Option<&ExpCounter>,
) -> Result<ImprovedCiphertext> {
    let k = sample_zq_star(&params.q, rng);
    encrypt_sign_with_nonce(params, hash, sender, receiver, m, &k, counter)
}

/// [`encrypt_sign`] with a caller-chosen nonce `k`, for known-answer tests.
pub fn encrypt_sign_with_nonce(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &KeyPair,
    receiver: &PublicKey,
    m: &[u8],
    k: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<ImprovedCiphertext> {
    let t1 = mod_exp(&params.g, k, &params.p, counter)?;
    let t2 = mod_exp(&receiver.y, k, &params.p, counter)?;
    let c = sym_encrypt(&hash.kdf(&t2, &params.p), m);
    // r = 0 is accepted, as in standard Schnorr.
    let r = challenge(params, hash, m, &t1);
    let s = response(params, k, &r, sender.secret());
    Ok(ImprovedCiphertext {
        c,
        sig: SchnorrSignature { r, s },
    })
}

/// Recomputes `t1 = g^s y_A^-r`, `t2 = t1^x_B`, decrypts, then checks
/// `r = H(m, t1)`. The decrypted buffer is dropped on failure.
pub fn decrypt_verify(
    params: &GroupParams,
    hash: &HashSuite,
    receiver: &KeyPair,
    sender: &PublicKey,
    ct: &ImprovedCiphertext,
    counter: Option<&ExpCounter>,
) -> Result<Vec<u8>> {
    if ct.sig.r >= params.q {
        return Err(Error::OutOfRange("r"));
    }
    if ct.sig.s >= params.q {
        return Err(Error::OutOfRange("s"));
    }
    let t1 = commitment(params, sender, &ct.sig, counter)?;
    let t2 = mod_exp(&t1, receiver.secret(), &params.p, counter)?;
    let m = sym_decrypt(&hash.kdf(&t2, &params.p), &ct.c);
    if challenge(params, hash, &m, &t1) == ct.sig.r {
        Ok(m)
    } else {
        drop(m);
        Err(Error::AuthenticationFailed)
    }
}

/// Packages an accepted ciphertext's signature with its plaintext. No
/// group arithmetic is involved.
pub fn release_proof(ct: &ImprovedCiphertext, m: &[u8]) -> PublicProof {
    PublicProof {
        m: m.to_vec(),
        sig: ct.sig.clone(),
    }
}

/// Standard Schnorr verification of a released proof: two exponentiations.
pub fn public_verify(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &PublicKey,
    proof: &PublicProof,
    counter: Option<&ExpCounter>,
) -> bool {
    schnorr::verify(params, hash, sender, &proof.m, &proof.sig, counter)
}
