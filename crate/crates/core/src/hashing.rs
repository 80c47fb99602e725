//! Hash functions `H` and `h`, their range mappings, and the keystream cipher.
//!
//! All inputs are framed as a list of [`Part`]s, each prefixed with its
//! 4-byte big-endian length, so different splits of the same bytes never
//! collide. Each use of the digest carries its own domain tag.

use num_bigint::BigUint;
use num_traits::Zero;
use sha2::{Digest, Sha256};

use crate::numeric::{byte_len, to_fixed_be};

pub const DIGEST_LEN: usize = 32;

const TAG_RAW: &[u8] = b"authenc/H/raw";
const TAG_ZQ: &[u8] = b"authenc/H/zq";
const TAG_ZP: &[u8] = b"authenc/H/zp*";
const TAG_KDF: &[u8] = b"authenc/h/kdf";

/// One component of a hash input.
#[derive(Debug, Clone, Copy)]
pub enum Part<'a> {
    Bytes(&'a [u8]),
    /// Integer in minimal big-endian form; zero encodes as the empty string.
    Int(&'a BigUint),
    /// Integer left-padded to a fixed byte width.
    Fixed(&'a BigUint, usize),
}

impl Part<'_> {
    fn bytes(&self) -> Vec<u8> {
        match *self {
            Part::Bytes(b) => b.to_vec(),
            Part::Int(v) => minimal_be(v),
            Part::Fixed(v, width) => to_fixed_be(v, width).unwrap_or_else(|| minimal_be(v)),
        }
    }
}

fn minimal_be(v: &BigUint) -> Vec<u8> {
    if v.is_zero() {
        Vec::new()
    } else {
        v.to_bytes_be()
    }
}

/// Unambiguous encoding of a part list: `len_be32 || bytes` per part.
pub fn encode_parts(parts: &[Part<'_>]) -> Vec<u8> {
    let mut out = Vec::new();
    for part in parts {
        let b = part.bytes();
        out.extend_from_slice(&(b.len() as u32).to_be_bytes());
        out.extend_from_slice(&b);
    }
    out
}

fn tagged(tag: &[u8]) -> Sha256 {
    let mut h = Sha256::new();
    h.update((tag.len() as u32).to_be_bytes());
    h.update(tag);
    h
}

/// 32-byte symmetric key produced by [`HashSuite::kdf`].
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey(pub [u8; 32]);

impl std::fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SessionKey(..)")
    }
}

/// Forced outputs for the range mappings, used to pin known-answer vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stub {
    pub to_zq: Option<BigUint>,
    pub to_zp_star: Option<BigUint>,
}

/// The hash suite shared by all parties: SHA-256 behind every mapping,
/// optionally with stubbed range mappings.
///
/// The configuration is fixed at construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HashSuite {
    stub: Option<Stub>,
}

impl HashSuite {
    pub fn sha256() -> Self {
        Self { stub: None }
    }

    /// Suite whose `to_zq` / `to_zp_star` return fixed values where given.
    /// Mappings left as `None` fall through to SHA-256.
    pub fn stubbed(to_zq: Option<BigUint>, to_zp_star: Option<BigUint>) -> Self {
        Self {
            stub: Some(Stub { to_zq, to_zp_star }),
        }
    }

    pub fn is_stubbed(&self) -> bool {
        self.stub.is_some()
    }

    /// Raw 256-bit digest `H(parts)`.
    pub fn digest(&self, parts: &[Part<'_>]) -> [u8; DIGEST_LEN] {
        let mut h = tagged(TAG_RAW);
        h.update(encode_parts(parts));
        h.finalize().into()
    }

    /// `H(parts)` read as a big-endian integer and reduced mod `q`.
    pub fn to_zq(&self, parts: &[Part<'_>], q: &BigUint) -> BigUint {
        if let Some(forced) = self.stub.as_ref().and_then(|s| s.to_zq.as_ref()) {
            return forced % q;
        }
        let mut h = tagged(TAG_ZQ);
        h.update(encode_parts(parts));
        BigUint::from_bytes_be(&h.finalize()) % q
    }

    /// `H(parts)` expanded in counter mode to `|p|` bits and reduced into
    /// `[1, p - 1]`. A zero result restarts with the next retry index.
    pub fn to_zp_star(&self, parts: &[Part<'_>], p: &BigUint) -> BigUint {
        if let Some(forced) = self.stub.as_ref().and_then(|s| s.to_zp_star.as_ref()) {
            let v = forced % p;
            if !v.is_zero() {
                return v;
            }
        }
        let enc = encode_parts(parts);
        let bits = p.bits();
        let nbytes = byte_len(bits);
        let excess = (nbytes as u64 * 8 - bits) as u32;
        let mut retry = 0u32;
        loop {
            let mut buf = Vec::with_capacity(nbytes + DIGEST_LEN);
            let mut block = 0u32;
            while buf.len() < nbytes {
                let mut h = tagged(TAG_ZP);
                h.update(retry.to_be_bytes());
                h.update(block.to_be_bytes());
                h.update(&enc);
                buf.extend_from_slice(&h.finalize());
                block += 1;
            }
            buf.truncate(nbytes);
            if excess > 0 {
                buf[0] &= 0xffu8 >> excess;
            }
            let v = BigUint::from_bytes_be(&buf) % p;
            if !v.is_zero() {
                return v;
            }
            retry += 1;
        }
    }

    /// `h(t2)`: session key from a group element, hashed at the byte width of `p`.
    pub fn kdf(&self, t2: &BigUint, p: &BigUint) -> SessionKey {
        let mut h = tagged(TAG_KDF);
        h.update(kdf_encoding(t2, p));
        SessionKey(h.finalize().into())
    }
}

/// The fixed-width encoding of `t2` fed to the key derivation.
pub fn kdf_encoding(t2: &BigUint, p: &BigUint) -> Vec<u8> {
    let width = byte_len(p.bits());
    to_fixed_be(t2, width).unwrap_or_else(|| minimal_be(t2))
}

fn apply_keystream(key: &SessionKey, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    for (i, chunk) in data.chunks(DIGEST_LEN).enumerate() {
        let mut h = Sha256::new();
        h.update(key.0);
        h.update((i as u64).to_be_bytes());
        let block = h.finalize();
        out.extend(chunk.iter().zip(block.iter()).map(|(a, b)| a ^ b));
    }
    out
}

/// `E_K`: XOR with the keystream `SHA-256(K || i)`. Output length equals input length.
pub fn sym_encrypt(key: &SessionKey, plaintext: &[u8]) -> Vec<u8> {
    apply_keystream(key, plaintext)
}

/// `D_K`, the inverse of [`sym_encrypt`].
pub fn sym_decrypt(key: &SessionKey, ciphertext: &[u8]) -> Vec<u8> {
    apply_keystream(key, ciphertext)
}
