//! Modular arithmetic over arbitrary-precision integers.
//!
//! Every exponentiation performed by the schemes goes through [`mod_exp`],
//! which optionally ticks an [`ExpCounter`]. One tick is recorded per call,
//! independent of the exponent's bit length, so counts line up with the
//! usual "number of exponentiations per party" accounting.

use std::cell::Cell;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default number of Miller-Rabin rounds.
pub const DEFAULT_MR_ROUNDS: usize = 40;

/// Source of randomness injected into every randomized operation.
pub trait RandomSource: RngCore + CryptoRng {}

impl<T: RngCore + CryptoRng + ?Sized> RandomSource for T {}

/// Counts top-level modular exponentiations within one scope.
///
/// A counter is created fresh for each measured region and is not meant to
/// be shared across threads.
#[derive(Debug, Default)]
pub struct ExpCounter {
    count: Cell<u64>,
}

impl ExpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.count.get()
    }

    fn tick(&self) {
        self.count.set(self.count.get() + 1);
    }
}

/// Computes `base^exp mod modulus`.
pub fn mod_exp(
    base: &BigUint,
    exp: &BigUint,
    modulus: &BigUint,
    counter: Option<&ExpCounter>,
) -> Result<BigUint> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::InvalidModulus);
    }
    if let Some(c) = counter {
        c.tick();
    }
    Ok(base.modpow(exp, modulus))
}

/// Multiplicative inverse of `a` modulo `modulus`, in `[1, modulus - 1]`.
pub fn mod_inv(a: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::InvalidModulus);
    }
    let a = a % modulus;
    if a.is_zero() {
        return Err(Error::NoInverse);
    }
    a.modinv(modulus).ok_or(Error::NoInverse)
}

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Miller-Rabin primality test.
///
/// A `false` verdict is always correct. A `true` verdict is wrong with
/// probability at most `4^-rounds`. Witnesses are drawn from a generator
/// seeded by the candidate itself, so the verdict is reproducible.
pub fn is_prime(n: &BigUint, rounds: usize) -> bool {
    let rounds = rounds.max(1);
    if *n < BigUint::from(2u8) {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }

    let one = BigUint::one();
    let two = BigUint::from(2u8);
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u64;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }

    let seed: [u8; 32] = Sha256::digest(n.to_bytes_be()).into();
    let mut rng = ChaCha20Rng::from_seed(seed);

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform sample from `Z_q^* = [1, q - 1]`.
pub fn sample_zq_star<R: RandomSource + ?Sized>(q: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), q)
}

/// Uniform sample from `[low, high)`.
pub(crate) fn sample_range<R: RandomSource + ?Sized>(
    low: &BigUint,
    high: &BigUint,
    rng: &mut R,
) -> BigUint {
    rng.gen_biguint_range(low, high)
}

/// `(a - b) mod m` for operands already reduced or not.
pub(crate) fn sub_mod(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    let a = a % m;
    let b = b % m;
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// Number of bytes needed to hold `n` bits.
pub fn byte_len(bits: u64) -> usize {
    bits.div_ceil(8) as usize
}

/// Big-endian encoding left-padded to exactly `width` bytes.
///
/// Returns `None` if `value` does not fit.
pub fn to_fixed_be(value: &BigUint, width: usize) -> Option<Vec<u8>> {
    let raw = if value.is_zero() {
        Vec::new()
    } else {
        value.to_bytes_be()
    };
    if raw.len() > width {
        return None;
    }
    let mut out = vec![0u8; width - raw.len()];
    out.extend_from_slice(&raw);
    Some(out)
}
