//! Authenticated encryption with public verifiability over Schnorr groups.
//!
//! Two schemes are provided:
//!
//! * [`machen`]: the Ma-Chen scheme, implemented as published, together with
//!   the analytical operations that expose its weaknesses ([`attack`] holds
//!   the rogue-key forgery).
//! * [`improved`]: a Schnorr signature fused with static Diffie-Hellman key
//!   transport, where the receiver converts a ciphertext into a publicly
//!   verifiable signature at no exponentiation cost.
//!
//! Supporting modules cover modular arithmetic ([`numeric`]), group setup and
//! key registration ([`group`]), hashing and the symmetric cipher
//! ([`hashing`]), and the file/wire formats ([`codec`]).

pub mod attack;
pub mod codec;
pub mod error;
pub mod group;
pub mod hashing;
pub mod improved;
pub mod machen;
pub mod numeric;
pub mod schnorr;

pub use error::{Error, Result};
pub use group::{CaMode, CaRegistry, GroupParams, KeyPair, PublicKey};
pub use hashing::HashSuite;
pub use numeric::{ExpCounter, RandomSource};
