//! Schnorr groups, key pairs, and a simulated certification authority.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hashing::{encode_parts, HashSuite, Part};
use crate::numeric::{
    byte_len, is_prime, mod_exp, sample_range, sample_zq_star, RandomSource, DEFAULT_MR_ROUNDS,
};
use crate::schnorr::{self, SchnorrSignature};

/// Default cap on candidate draws during parameter generation.
pub const DEFAULT_GENERATION_ATTEMPTS: usize = 1_000_000;

/// The public triple `(p, q, g)`: `q | p - 1` and `g` generates the order-`q` subgroup of `Z_p^*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
}

impl GroupParams {
    /// Builds and validates a parameter set.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self> {
        let params = Self { p, q, g };
        params.validate()?;
        Ok(params)
    }

    /// `(23, 11, 4)`, small enough to check by hand.
    pub fn toy() -> Self {
        Self {
            p: BigUint::from(23u8),
            q: BigUint::from(11u8),
            g: BigUint::from(4u8),
        }
    }

    pub fn p_bits(&self) -> u64 {
        self.p.bits()
    }

    pub fn q_bits(&self) -> u64 {
        self.q.bits()
    }

    pub fn p_bytes(&self) -> usize {
        byte_len(self.p_bits())
    }

    pub fn q_bytes(&self) -> usize {
        byte_len(self.q_bits())
    }

    /// Checks every invariant and names the first one that fails.
    pub fn validate(&self) -> Result<()> {
        if !is_prime(&self.p, DEFAULT_MR_ROUNDS) {
            return Err(Error::InvalidParams("p is not prime"));
        }
        if !is_prime(&self.q, DEFAULT_MR_ROUNDS) {
            return Err(Error::InvalidParams("q is not prime"));
        }
        if !(&self.p - 1u8).is_multiple_of(&self.q) {
            return Err(Error::InvalidParams("q does not divide p - 1"));
        }
        if self.g.is_zero() || self.g >= self.p {
            return Err(Error::InvalidParams("g is not in Z_p^*"));
        }
        if self.g.is_one() {
            return Err(Error::InvalidParams("generator is the identity"));
        }
        if !mod_exp(&self.g, &self.q, &self.p, None)?.is_one() {
            return Err(Error::InvalidParams("g does not have order q"));
        }
        Ok(())
    }

    /// SHA-256 over `(p, q, g)`, used to bind files to a parameter set.
    pub fn fingerprint(&self) -> [u8; 32] {
        let enc = encode_parts(&[Part::Int(&self.p), Part::Int(&self.q), Part::Int(&self.g)]);
        let mut h = Sha256::new();
        h.update(b"authenc/params");
        h.update(enc);
        h.finalize().into()
    }

    /// Whether `y` lies in the order-`q` subgroup.
    pub fn is_member(&self, y: &BigUint) -> bool {
        !y.is_zero()
            && *y < self.p
            && mod_exp(y, &self.q, &self.p, None)
                .map(|v| v.is_one())
                .unwrap_or(false)
    }
}

/// Generates a fresh Schnorr group with `|p| = bits_p` and `|q| = bits_q`.
pub fn generate_params<R: RandomSource + ?Sized>(
    bits_p: u64,
    bits_q: u64,
    rng: &mut R,
) -> Result<GroupParams> {
    generate_params_capped(bits_p, bits_q, DEFAULT_GENERATION_ATTEMPTS, rng)
}

/// As [`generate_params`], giving up after `max_attempts` candidate draws.
///
/// `q` is a random `bits_q`-bit prime, `p = q*t + 1` for random even `t`, and
/// `g = h^((p-1)/q)` for random `h` until `g != 1`.
pub fn generate_params_capped<R: RandomSource + ?Sized>(
    bits_p: u64,
    bits_q: u64,
    max_attempts: usize,
    rng: &mut R,
) -> Result<GroupParams> {
    if bits_q < 8 || bits_p < bits_q + 8 {
        return Err(Error::InvalidSizes { bits_p, bits_q });
    }
    let one = BigUint::one();
    let mut attempts = 0usize;
    let mut bump = || {
        attempts += 1;
        if attempts > max_attempts {
            Err(Error::GenerationFailed(max_attempts))
        } else {
            Ok(())
        }
    };

    let q_low = &one << (bits_q - 1);
    let q_high = &one << bits_q;
    let q = loop {
        bump()?;
        let c = sample_range(&q_low, &q_high, rng) | &one;
        if is_prime(&c, DEFAULT_MR_ROUNDS) {
            break c;
        }
    };

    // p in [2^(bits_p-1), 2^bits_p) means t in [ceil((2^(bits_p-1) - 1)/q), (2^bits_p - 2)/q].
    let p_low = &one << (bits_p - 1);
    let p_high = &one << bits_p;
    let t_low = (&p_low - &one).div_ceil(&q);
    let t_high = (&p_high - 2u8) / &q + &one;
    let p = loop {
        bump()?;
        let mut t = sample_range(&t_low, &t_high, rng);
        if t.is_odd() {
            t += &one;
        }
        let c = &q * &t + &one;
        if c.bits() != bits_p {
            continue;
        }
        if is_prime(&c, DEFAULT_MR_ROUNDS) {
            break c;
        }
    };

    let cofactor = (&p - &one) / &q;
    let two = BigUint::from(2u8);
    let g = loop {
        bump()?;
        let h = sample_range(&two, &(&p - &one), rng);
        let g = mod_exp(&h, &cofactor, &p, None)?;
        if !g.is_one() {
            break g;
        }
    };

    let params = GroupParams { p, q, g };
    params.validate()?;
    Ok(params)
}

/// A public key `y = g^x mod p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PublicKey {
    pub y: BigUint,
}

impl PublicKey {
    pub fn new(y: BigUint) -> Self {
        Self { y }
    }
}

/// A secret exponent `x` in `[1, q - 1]` with its public key.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    x: BigUint,
    public: PublicKey,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("y", &self.public.y)
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn generate<R: RandomSource + ?Sized>(params: &GroupParams, rng: &mut R) -> Self {
        let x = sample_zq_star(&params.q, rng);
        Self::from_secret(params, x).expect("sampled secret is in range")
    }

    /// Key pair for a chosen secret. Rejects `x` outside `[1, q - 1]`.
    pub fn from_secret(params: &GroupParams, x: BigUint) -> Result<Self> {
        if x.is_zero() || x >= params.q {
            return Err(Error::InvalidSecret);
        }
        let y = mod_exp(&params.g, &x, &params.p, None)?;
        Ok(Self {
            x,
            public: PublicKey { y },
        })
    }

    /// Unchecked constructor for decoded key material; see [`KeyPair::is_consistent`].
    pub(crate) fn from_raw(x: BigUint, public: PublicKey) -> Self {
        Self { x, public }
    }

    /// Whether `x` is in range and `y = g^x` under `params`.
    pub fn is_consistent(&self, params: &GroupParams) -> bool {
        !self.x.is_zero()
            && self.x < params.q
            && mod_exp(&params.g, &self.x, &params.p, None).ok().as_ref() == Some(&self.public.y)
    }

    pub fn secret(&self) -> &BigUint {
        &self.x
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }
}

/// Registration policy of the certification authority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaMode {
    /// Subgroup-membership check only.
    #[default]
    MembershipOnly,
    /// Membership plus a Schnorr self-signature proving knowledge of `x`.
    StrictPop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub seq: u64,
    pub identity: String,
    pub key: PublicKey,
}

/// In-memory certification authority: an append-only log of
/// `(identity, key)` registrations. Re-registering an identity supersedes
/// its earlier key; the history stays queryable.
#[derive(Debug, Clone, Default)]
pub struct CaRegistry {
    mode: CaMode,
    entries: Vec<RegistryEntry>,
}

fn pop_message(identity: &str, key: &PublicKey) -> Vec<u8> {
    encode_parts(&[
        Part::Bytes(b"authenc/pop"),
        Part::Bytes(identity.as_bytes()),
        Part::Int(&key.y),
    ])
}

/// Self-signature binding `identity` to `key`, checked by a [`CaMode::StrictPop`] registry.
pub fn proof_of_possession<R: RandomSource + ?Sized>(
    params: &GroupParams,
    identity: &str,
    key: &KeyPair,
    rng: &mut R,
) -> Result<SchnorrSignature> {
    let m = pop_message(identity, key.public());
    schnorr::sign(params, &HashSuite::sha256(), key, &m, rng)
}

impl CaRegistry {
    pub fn new(mode: CaMode) -> Self {
        Self {
            mode,
            entries: Vec::new(),
        }
    }

    /// Rebuilds a registry from stored entries; sequence numbers must strictly increase.
    pub fn from_entries(mode: CaMode, entries: Vec<RegistryEntry>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].seq >= w[1].seq) {
            return Err(Error::OutOfRange("registry sequence numbers"));
        }
        Ok(Self { mode, entries })
    }

    pub fn mode(&self) -> CaMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: CaMode) {
        self.mode = mode;
    }

    /// Records `key` for `identity` and returns its sequence number.
    ///
    /// The key must be a non-identity member of the order-`q` subgroup. In
    /// strict mode `pop` must be a valid self-signature from
    /// [`proof_of_possession`].
    pub fn register(
        &mut self,
        params: &GroupParams,
        identity: &str,
        key: &PublicKey,
        pop: Option<&SchnorrSignature>,
    ) -> Result<u64> {
        if !params.is_member(&key.y) {
            return Err(Error::RejectedKey("not in the order-q subgroup"));
        }
        if key.y.is_one() {
            return Err(Error::RejectedKey("identity element"));
        }
        if self.mode == CaMode::StrictPop {
            let sig = pop.ok_or(Error::RejectedKey("missing proof of possession"))?;
            let m = pop_message(identity, key);
            if !schnorr::verify(params, &HashSuite::sha256(), key, &m, sig, None) {
                return Err(Error::RejectedKey("invalid proof of possession"));
            }
        }
        let seq = self.entries.last().map_or(1, |e| e.seq + 1);
        self.entries.push(RegistryEntry {
            seq,
            identity: identity.to_owned(),
            key: key.clone(),
        });
        Ok(seq)
    }

    /// Newest entry for `identity`.
    pub fn lookup(&self, identity: &str) -> Option<&RegistryEntry> {
        self.entries.iter().rev().find(|e| e.identity == identity)
    }

    /// All entries for `identity`, oldest first.
    pub fn history<'a>(&'a self, identity: &'a str) -> impl Iterator<Item = &'a RegistryEntry> {
        self.entries.iter().filter(move |e| e.identity == identity)
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }
}
