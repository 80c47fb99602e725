//! The Ma-Chen authenticated encryption scheme, as published.
//!
//! Sender (`x_A`) to receiver (`x_B`), for a message `m` in `Z_p^*`:
//!
//! ```text
//! k <- Z_q^*,  v = (g*y_B)^k,  e = v mod q
//! c = m * H(v)^-1 mod p,  r = H(e, H(m)),  s = k - x_A*r mod q
//! ```
//!
//! The receiver rebuilds `v = (g*y_B)^s * y_A^(r(x_B+1))`. The arbitrator path
//! ([`ttp_verify`]) is kept exactly as written, including the premature
//! `mod q` reduction of `K1` that makes it reject honest proofs.
//! [`ttp_verify_unreduced`] is a non-normative diagnostic showing that
//! reduction is the only problem.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{GroupParams, KeyPair, PublicKey};
use crate::hashing::{HashSuite, Part, DIGEST_LEN};
use crate::numeric::{mod_exp, mod_inv, sample_zq_star, sub_mod, ExpCounter, RandomSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaChenCiphertext {
    pub c: BigUint,
    pub r: BigUint,
    pub s: BigUint,
}

impl MaChenCiphertext {
    pub fn check_range(&self, params: &GroupParams) -> Result<()> {
        if self.c.is_zero() || self.c >= params.p {
            return Err(Error::OutOfRange("c"));
        }
        if self.r >= params.q {
            return Err(Error::OutOfRange("r"));
        }
        if self.s >= params.q {
            return Err(Error::OutOfRange("s"));
        }
        Ok(())
    }
}

/// The tuple `(H(m), K1, r, s)` handed to the arbitrator. It carries neither
/// `v` nor anything else from which `y_AB` could be rebuilt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaChenProof {
    pub m_digest: [u8; DIGEST_LEN],
    pub k1: BigUint,
    pub r: BigUint,
    pub s: BigUint,
}

/// Diagnostic variant of [`MaChenProof`] carrying `K1*` before the `mod q` reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnreducedProof {
    pub m_digest: [u8; DIGEST_LEN],
    pub k1_unreduced: BigUint,
    pub r: BigUint,
    pub s: BigUint,
}

/// The static Diffie-Hellman value `y_AB = g^(x_A x_B) mod p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedStaticKey {
    pub y_ab: BigUint,
}

impl SharedStaticKey {
    /// `y_B^x_A`, as Alice would compute it (or `y_A^x_B` for Bob).
    pub fn derive(params: &GroupParams, own: &KeyPair, peer: &PublicKey) -> Result<Self> {
        Ok(Self {
            y_ab: mod_exp(&peer.y, own.secret(), &params.p, None)?,
        })
    }
}

/// `H(m)`, the raw digest of the message element.
pub fn message_digest(hash: &HashSuite, m: &BigUint) -> [u8; DIGEST_LEN] {
    hash.digest(&[Part::Int(m)])
}

/// `r = H(e, H(m)) mod q`.
pub fn tag(params: &GroupParams, hash: &HashSuite, e: &BigUint, m_digest: &[u8]) -> BigUint {
    hash.to_zq(&[Part::Int(e), Part::Bytes(m_digest)], &params.q)
}

fn mask(params: &GroupParams, hash: &HashSuite, v: &BigUint) -> BigUint {
    hash.to_zp_star(&[Part::Int(v)], &params.p)
}

fn g_times(params: &GroupParams, y: &PublicKey) -> BigUint {
    &params.g * &y.y % &params.p
}

pub fn encrypt_sign<R: RandomSource + ?Sized>(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &KeyPair,
    receiver: &PublicKey,
    m: &BigUint,
    rng: &mut R,
    counter: Option<&ExpCounter>,
) -> Result<MaChenCiphertext> {
    let k = sample_zq_star(&params.q, rng);
    encrypt_sign_with_nonce(params, hash, sender, receiver, m, &k, counter)
}

/// [`encrypt_sign`] with a caller-chosen nonce `k`, for known-answer tests.
pub fn encrypt_sign_with_nonce(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &KeyPair,
    receiver: &PublicKey,
    m: &BigUint,
    k: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<MaChenCiphertext> {
    if m.is_zero() || *m >= params.p {
        return Err(Error::InvalidMessage);
    }
    let v = mod_exp(&g_times(params, receiver), k, &params.p, counter)?;
    let e = &v % &params.q;
    let c = m * mod_inv(&mask(params, hash, &v), &params.p)? % &params.p;
    let r = tag(params, hash, &e, &message_digest(hash, m));
    let s = sub_mod(k, &(sender.secret() * &r), &params.q);
    Ok(MaChenCiphertext { c, r, s })
}

/// The receiver's recomputation `v = (g*y_B)^s * y_A^(r(x_B+1)) mod p`.
pub fn session_value(
    params: &GroupParams,
    receiver: &KeyPair,
    sender: &PublicKey,
    ct: &MaChenCiphertext,
    counter: Option<&ExpCounter>,
) -> Result<BigUint> {
    let left = mod_exp(
        &g_times(params, receiver.public()),
        &ct.s,
        &params.p,
        counter,
    )?;
    let exp = &ct.r * (receiver.secret() + 1u8) % &params.q;
    let right = mod_exp(&sender.y, &exp, &params.p, counter)?;
    Ok(left * right % &params.p)
}

fn open(
    params: &GroupParams,
    hash: &HashSuite,
    v: &BigUint,
    ct: &MaChenCiphertext,
) -> Result<BigUint> {
    let e = v % &params.q;
    let m = &ct.c * mask(params, hash, v) % &params.p;
    if tag(params, hash, &e, &message_digest(hash, &m)) == ct.r {
        Ok(m)
    } else {
        Err(Error::AuthenticationFailed)
    }
}

/// Decrypts and authenticates. On failure nothing about `m` is returned.
pub fn decrypt_verify(
    params: &GroupParams,
    hash: &HashSuite,
    receiver: &KeyPair,
    sender: &PublicKey,
    ct: &MaChenCiphertext,
    counter: Option<&ExpCounter>,
) -> Result<BigUint> {
    ct.check_range(params)?;
    let v = session_value(params, receiver, sender, ct, counter)?;
    open(params, hash, &v, ct)
}

fn k1_unreduced(
    params: &GroupParams,
    receiver: &KeyPair,
    sender: &PublicKey,
    ct: &MaChenCiphertext,
    counter: Option<&ExpCounter>,
) -> Result<BigUint> {
    let a = mod_exp(&receiver.public().y, &ct.s, &params.p, counter)?;
    let exp = &ct.r * receiver.secret() % &params.q;
    let b = mod_exp(&sender.y, &exp, &params.p, counter)?;
    Ok(a * b % &params.p)
}

/// `K1 = (y_B^s * y_A^(r x_B) mod p) mod q`, bundled as `(H(m), K1, r, s)`.
pub fn make_proof(
    params: &GroupParams,
    hash: &HashSuite,
    receiver: &KeyPair,
    sender: &PublicKey,
    ct: &MaChenCiphertext,
    m: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<MaChenProof> {
    let k1 = k1_unreduced(params, receiver, sender, ct, counter)? % &params.q;
    Ok(MaChenProof {
        m_digest: message_digest(hash, m),
        k1,
        r: ct.r.clone(),
        s: ct.s.clone(),
    })
}

/// Like [`make_proof`] but keeps `K1* = y_B^s * y_A^(r x_B) mod p` unreduced.
pub fn make_unreduced_proof(
    params: &GroupParams,
    hash: &HashSuite,
    receiver: &KeyPair,
    sender: &PublicKey,
    ct: &MaChenCiphertext,
    m: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<UnreducedProof> {
    Ok(UnreducedProof {
        m_digest: message_digest(hash, m),
        k1_unreduced: k1_unreduced(params, receiver, sender, ct, counter)?,
        r: ct.r.clone(),
        s: ct.s.clone(),
    })
}

fn ttp_value(
    params: &GroupParams,
    sender: &PublicKey,
    s: &BigUint,
    r: &BigUint,
    k1: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<BigUint> {
    let gs = mod_exp(&params.g, s, &params.p, counter)?;
    let yr = mod_exp(&sender.y, r, &params.p, counter)?;
    Ok(gs * yr % &params.p * k1 % &params.p % &params.q)
}

/// The arbitrator's check: `e' = (g^s * y_A^r * K1 mod p) mod q`, accept iff
/// `r = H(e', H(m))`.
///
/// Implemented as published. Because `K1` was already reduced mod `q`,
/// `e'` generally differs from the sender's `e` and honest proofs are
/// rejected.
pub fn ttp_verify(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &PublicKey,
    proof: &MaChenProof,
    counter: Option<&ExpCounter>,
) -> bool {
    if proof.r >= params.q || proof.s >= params.q || proof.k1 >= params.q {
        return false;
    }
    match ttp_value(params, sender, &proof.s, &proof.r, &proof.k1, counter) {
        Ok(e) => tag(params, hash, &e, &proof.m_digest) == proof.r,
        Err(_) => false,
    }
}

/// Non-normative: [`ttp_verify`] fed with the unreduced `K1*`.
pub fn ttp_verify_unreduced(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &PublicKey,
    proof: &UnreducedProof,
    counter: Option<&ExpCounter>,
) -> bool {
    if proof.r >= params.q || proof.s >= params.q || proof.k1_unreduced >= params.p {
        return false;
    }
    match ttp_value(
        params,
        sender,
        &proof.s,
        &proof.r,
        &proof.k1_unreduced,
        counter,
    ) {
        Ok(e) => tag(params, hash, &e, &proof.m_digest) == proof.r,
        Err(_) => false,
    }
}

/// Decrypts without `x_B` using the leaked `y_AB`:
/// `v = (g*y_B)^s * y_AB^r * y_A^r mod p`.
pub fn decrypt_with_shared_key(
    params: &GroupParams,
    hash: &HashSuite,
    shared: &SharedStaticKey,
    sender: &PublicKey,
    receiver: &PublicKey,
    ct: &MaChenCiphertext,
) -> Result<BigUint> {
    ct.check_range(params)?;
    let a = mod_exp(&g_times(params, receiver), &ct.s, &params.p, None)?;
    let b = mod_exp(&shared.y_ab, &ct.r, &params.p, None)?;
    let c = mod_exp(&sender.y, &ct.r, &params.p, None)?;
    let v = a * b % &params.p * c % &params.p;
    open(params, hash, &v, ct)
}

/// Recovers `y_AB = y_A^-1 * v^(r^-1) * (g*y_B)^(-s r^-1) mod p` from one
/// leaked session value `v`.
pub fn recover_shared_key(
    params: &GroupParams,
    v: &BigUint,
    ct: &MaChenCiphertext,
    sender: &PublicKey,
    receiver: &PublicKey,
) -> Result<SharedStaticKey> {
    let r_inv = mod_inv(&ct.r, &params.q)?;
    let ya_inv = mod_inv(&sender.y, &params.p)?;
    let v_part = mod_exp(v, &r_inv, &params.p, None)?;
    let neg = sub_mod(&BigUint::zero(), &(&ct.s * &r_inv), &params.q);
    let gy_part = mod_exp(&g_times(params, receiver), &neg, &params.p, None)?;
    Ok(SharedStaticKey {
        y_ab: ya_inv * v_part % &params.p * gy_part % &params.p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn naive_pow(base: u64, exp: u64, m: u64) -> u64 {
        (0..exp).fold(1 % m, |acc, _| acc * base % m)
    }

    fn toy() -> (GroupParams, KeyPair, KeyPair) {
        let params = GroupParams::toy();
        let a = KeyPair::from_secret(&params, big(3)).unwrap();
        let b = KeyPair::from_secret(&params, big(5)).unwrap();
        (params, a, b)
    }

    #[test]
    fn toy_vector_sender_side() {
        // g*y_B = 4*12 = 48 = 2 (mod 23); 2^7 = 128 = 13 (mod 23); 13 mod 11 = 2; (7 - 12) mod 11 = 6
        assert_eq!(naive_pow(2, 7, 23), 13);
        let (params, a, b) = toy();
        let hash = HashSuite::stubbed(Some(big(4)), Some(big(7)));
        let m = big(9);
        let ct =
            encrypt_sign_with_nonce(&params, &hash, &a, b.public(), &m, &big(7), None).unwrap();
        assert_eq!(ct.r, big(4));
        assert_eq!(ct.s, big(6));
        // c = 9 * 7^-1 = 9 * 10 = 90 = 21 (mod 23)
        assert_eq!(ct.c, big(21));
        let v = session_value(&params, &b, a.public(), &ct, None).unwrap();
        assert_eq!(naive_pow(2, 6, 23) * naive_pow(18, 24, 23) % 23, 13);
        assert_eq!(v, big(13));
        assert_eq!(&v % &params.q, big(2));
        assert_eq!(
            decrypt_verify(&params, &hash, &b, a.public(), &ct, None).unwrap(),
            m
        );
    }

    #[test]
    fn toy_vector_proof_and_ttp() {
        let (params, a, b) = toy();
        let hash = HashSuite::stubbed(Some(big(4)), Some(big(7)));
        let ct = MaChenCiphertext {
            c: big(21),
            r: big(4),
            s: big(6),
        };
        assert_eq!(naive_pow(12, 6, 23) * naive_pow(18, 20, 23) % 23, 16);
        let proof = make_proof(&params, &hash, &b, a.public(), &ct, &big(9), None).unwrap();
        assert_eq!(proof.k1, big(5));
        let e_prime = ttp_value(&params, a.public(), &big(6), &big(4), &big(5), None).unwrap();
        assert_eq!(naive_pow(4, 6, 23) * naive_pow(18, 4, 23) * 5 % 23, 17);
        assert_eq!(e_prime, big(6));

        let unreduced =
            make_unreduced_proof(&params, &hash, &b, a.public(), &ct, &big(9), None).unwrap();
        assert_eq!(unreduced.k1_unreduced, big(16));
        let e_star = ttp_value(&params, a.public(), &big(6), &big(4), &big(16), None).unwrap();
        assert_eq!(naive_pow(4, 6, 23) * naive_pow(18, 4, 23) * 16 % 23, 13);
        assert_eq!(e_star, big(2));
    }

    #[test]
    fn toy_vector_shared_key() {
        let (params, a, b) = toy();
        let hash = HashSuite::stubbed(Some(big(4)), Some(big(7)));
        let ct = MaChenCiphertext {
            c: big(21),
            r: big(4),
            s: big(6),
        };
        assert_eq!(naive_pow(4, 15, 23), 3);
        let shared = SharedStaticKey::derive(&params, &a, b.public()).unwrap();
        assert_eq!(shared.y_ab, big(3));
        assert_eq!(
            decrypt_with_shared_key(&params, &hash, &shared, a.public(), b.public(), &ct).unwrap(),
            big(9)
        );
        let recovered = recover_shared_key(&params, &big(13), &ct, a.public(), b.public()).unwrap();
        // 18^-1 = 9, 13^3 = 12, 2^(-18 mod 11) = 2^4 = 16; 9 * 12 * 16 = 3 (mod 23)
        assert_eq!(9 * naive_pow(13, 3, 23) * naive_pow(2, 4, 23) % 23, 3);
        assert_eq!(recovered.y_ab, big(3));
    }

    #[test]
    fn recovery_requires_invertible_r() {
        let (params, a, b) = toy();
        let ct = MaChenCiphertext {
            c: big(1),
            r: big(0),
            s: big(3),
        };
        assert_eq!(
            recover_shared_key(&params, &big(13), &ct, a.public(), b.public()),
            Err(Error::NoInverse)
        );
    }

    #[test]
    fn message_range_enforced() {
        let (params, a, b) = toy();
        let hash = HashSuite::sha256();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        for m in [big(0), big(23), big(30)] {
            assert_eq!(
                encrypt_sign(&params, &hash, &a, b.public(), &m, &mut rng, None),
                Err(Error::InvalidMessage)
            );
        }
    }

    #[test]
    fn ciphertext_range_enforced() {
        let (params, a, b) = toy();
        let hash = HashSuite::sha256();
        let bad = MaChenCiphertext {
            c: big(23),
            r: big(1),
            s: big(1),
        };
        assert_eq!(
            decrypt_verify(&params, &hash, &b, a.public(), &bad, None),
            Err(Error::OutOfRange("c"))
        );
    }

    #[test]
    fn wrong_shared_key_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let params = crate::group::generate_params(128, 64, &mut rng).unwrap();
        let hash = HashSuite::sha256();
        let a = KeyPair::generate(&params, &mut rng);
        let b = KeyPair::generate(&params, &mut rng);
        let ct = encrypt_sign(&params, &hash, &a, b.public(), &big(12345), &mut rng, None).unwrap();
        let wrong = SharedStaticKey {
            y_ab: params.g.clone(),
        };
        assert_eq!(
            decrypt_with_shared_key(&params, &hash, &wrong, a.public(), b.public(), &ct),
            Err(Error::AuthenticationFailed)
        );
    }
}
