//! Rogue-key forgery against the Ma-Chen scheme.
//!
//! A receiver who registers his key after seeing the sender's can make a
//! ciphertext of his choosing verify as if the sender produced it:
//!
//! ```text
//! a, b <- Z_q^*,  v = g^a * y_A^b
//! e = v mod q,  c = m * H(v)^-1,  r = H(e, H(m)),  s = r*a*b^-1 mod q
//! x_B = b*r^-1 - 1 mod q,  register y_B = g^x_B
//! ```
//!
//! Then `(g*y_B)^s * y_A^(r(x_B+1)) = g^((1+x_B)s) * y_A^b = g^a * y_A^b = v`.
//! Only the sender's public key is used.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{proof_of_possession, CaMode, CaRegistry, GroupParams, KeyPair, PublicKey};
use crate::hashing::{sym_encrypt, HashSuite, Part};
use crate::improved::{ImprovedCiphertext, SchnorrSignature};
use crate::machen::{self, MaChenCiphertext};
use crate::numeric::{mod_exp, mod_inv, sample_zq_star, RandomSource};
use crate::schnorr;

/// Resampling cap for `(a, b)` when `r = 0` or `x_B = 0`.
pub const MAX_FORGERY_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForgeryOutput {
    pub ciphertext: MaChenCiphertext,
    pub rogue_keypair: KeyPair,
    pub a: BigUint,
    pub b: BigUint,
    pub target_message: BigUint,
}

/// Forges a Ma-Chen ciphertext for `m` that appears to come from `sender`.
pub fn forge<R: RandomSource + ?Sized>(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &PublicKey,
    m: &BigUint,
    rng: &mut R,
) -> Result<ForgeryOutput> {
    for _ in 0..MAX_FORGERY_ATTEMPTS {
        let a = sample_zq_star(&params.q, rng);
        let b = sample_zq_star(&params.q, rng);
        match forge_with(params, hash, sender, m, a, b) {
            Err(Error::NoInverse) | Err(Error::InvalidSecret) => continue,
            other => return other,
        }
    }
    Err(Error::ForgeryFailed(MAX_FORGERY_ATTEMPTS))
}

/// [`forge`] with fixed randomness. Fails with [`Error::NoInverse`] when
/// `r = 0` and [`Error::InvalidSecret`] when the rogue secret comes out as 0.
pub fn forge_with(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &PublicKey,
    m: &BigUint,
    a: BigUint,
    b: BigUint,
) -> Result<ForgeryOutput> {
    if m.is_zero() || *m >= params.p {
        return Err(Error::InvalidMessage);
    }
    let q = &params.q;
    let v = mod_exp(&params.g, &a, &params.p, None)? * mod_exp(&sender.y, &b, &params.p, None)?
        % &params.p;
    let e = &v % q;
    let mask = hash.to_zp_star(&[Part::Int(&v)], &params.p);
    let c = m * mod_inv(&mask, &params.p)? % &params.p;
    let r = machen::tag(params, hash, &e, &machen::message_digest(hash, m));

    let r_inv = mod_inv(&r, q)?;
    let b_inv = mod_inv(&b, q)?;
    let s = &r * &a % q * b_inv % q;
    let x_b = (&b * r_inv % q + q - 1u8) % q;
    let rogue_keypair = KeyPair::from_secret(params, x_b)?;

    Ok(ForgeryOutput {
        ciphertext: MaChenCiphertext { c, r, s },
        rogue_keypair,
        a,
        b,
        target_message: m.clone(),
    })
}

/// Outcome of [`run_attack_scenario`].
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub ca_mode: CaMode,
    pub sender_identity: String,
    pub attacker_identity: String,
    pub sender_seq: u64,
    /// `None` when the registry refused the rogue key.
    pub rogue_seq: Option<u64>,
    pub registration_error: Option<String>,
    pub forgery: ForgeryOutput,
    pub receiver_accepted: bool,
    pub ttp_accepted: bool,
    pub ttp_unreduced_accepted: bool,
}

impl ScenarioReport {
    pub fn attack_succeeded(&self) -> bool {
        self.rogue_seq.is_some() && self.receiver_accepted
    }
}

fn mode_name(mode: CaMode) -> &'static str {
    match mode {
        CaMode::MembershipOnly => "default (subgroup membership only)",
        CaMode::StrictPop => "strict-pop (membership + proof of possession)",
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ct = &self.forgery.ciphertext;
        writeln!(f, "== rogue-key forgery against Ma-Chen ==")?;
        writeln!(f, "ca-mode: {}", mode_name(self.ca_mode))?;
        writeln!(
            f,
            "[1] sender {:?} registered at seq {}",
            self.sender_identity, self.sender_seq
        )?;
        writeln!(
            f,
            "[2] forged ciphertext for m = {:x}",
            self.forgery.target_message
        )?;
        writeln!(f, "    c = {:x}", ct.c)?;
        writeln!(f, "    r = {:x}", ct.r)?;
        writeln!(f, "    s = {:x}", ct.s)?;
        writeln!(
            f,
            "    rogue y_B = {:x}",
            self.forgery.rogue_keypair.public().y
        )?;
        match (self.rogue_seq, &self.registration_error) {
            (Some(seq), _) => writeln!(
                f,
                "[3] attacker {:?} registered rogue key at seq {} (after seq {})",
                self.attacker_identity, seq, self.sender_seq
            )?,
            (None, err) => writeln!(
                f,
                "[3] registration REFUSED: {}",
                err.as_deref().unwrap_or("unknown reason")
            )?,
        }
        if self.ca_mode == CaMode::StrictPop && self.rogue_seq.is_some() {
            writeln!(
                f,
                "    note: proof of possession does NOT block this attack; the attacker knows x_B"
            )?;
        }
        writeln!(
            f,
            "[4] receiver verification: {}",
            if self.receiver_accepted {
                "FORGERY ACCEPTED"
            } else {
                "rejected"
            }
        )?;
        writeln!(
            f,
            "[5] arbitrator check as published: {}",
            if self.ttp_accepted {
                "accepted"
            } else {
                "rejected (the published check also rejects honest proofs)"
            }
        )?;
        writeln!(
            f,
            "[6] arbitrator check with unreduced K1: {}",
            if self.ttp_unreduced_accepted {
                "FORGERY ACCEPTED"
            } else {
                "rejected"
            }
        )?;
        let verdict = if self.attack_succeeded() {
            "ATTACK SUCCEEDED: only binding registration before the sender's key is published would prevent it"
        } else {
            "ATTACK BLOCKED"
        };
        writeln!(f, "result: {verdict}")
    }
}

/// Runs the full story against `registry`: forge, register the rogue key
/// after the sender, then check the forgery as the receiver and as the
/// arbitrator.
pub fn run_attack_scenario<R: RandomSource + ?Sized>(
    params: &GroupParams,
    hash: &HashSuite,
    registry: &mut CaRegistry,
    sender_identity: &str,
    attacker_identity: &str,
    m: &BigUint,
    rng: &mut R,
) -> Result<ScenarioReport> {
    let sender_entry = registry
        .lookup(sender_identity)
        .ok_or_else(|| Error::UnknownIdentity(sender_identity.to_owned()))?
        .clone();
    let sender = &sender_entry.key;

    let forgery = forge(params, hash, sender, m, rng)?;
    let rogue = &forgery.rogue_keypair;

    let pop = match registry.mode() {
        CaMode::StrictPop => Some(proof_of_possession(params, attacker_identity, rogue, rng)?),
        CaMode::MembershipOnly => None,
    };
    let (rogue_seq, registration_error) =
        match registry.register(params, attacker_identity, rogue.public(), pop.as_ref()) {
            Ok(seq) => (Some(seq), None),
            Err(e) => (None, Some(e.to_string())),
        };

    let receiver_accepted =
        machen::decrypt_verify(params, hash, rogue, sender, &forgery.ciphertext, None)
            .map(|got| got == *m)
            .unwrap_or(false);
    let proof = machen::make_proof(params, hash, rogue, sender, &forgery.ciphertext, m, None)?;
    let ttp_accepted = machen::ttp_verify(params, hash, sender, &proof, None);
    let unreduced =
        machen::make_unreduced_proof(params, hash, rogue, sender, &forgery.ciphertext, m, None)?;
    let ttp_unreduced_accepted =
        machen::ttp_verify_unreduced(params, hash, sender, &unreduced, None);

    Ok(ScenarioReport {
        ca_mode: registry.mode(),
        sender_identity: sender_identity.to_owned(),
        attacker_identity: attacker_identity.to_owned(),
        sender_seq: sender_entry.seq,
        rogue_seq,
        registration_error,
        forgery,
        receiver_accepted,
        ttp_accepted,
        ttp_unreduced_accepted,
    })
}

/// The same strategy aimed at the improved scheme: `v = g^a y_A^b` stands in
/// for `t1`, and the rogue key is derived the same way. The receiver
/// recomputes `t1 = g^s y_A^-r`, which does not depend on `x_B`, so the
/// result does not verify.
pub fn transplant_forge_improved<R: RandomSource + ?Sized>(
    params: &GroupParams,
    hash: &HashSuite,
    sender: &PublicKey,
    m: &[u8],
    rng: &mut R,
) -> Result<(ImprovedCiphertext, KeyPair)> {
    let q = &params.q;
    for _ in 0..MAX_FORGERY_ATTEMPTS {
        let a = sample_zq_star(q, rng);
        let b = sample_zq_star(q, rng);
        let t1 = mod_exp(&params.g, &a, &params.p, None)?
            * mod_exp(&sender.y, &b, &params.p, None)?
            % &params.p;
        let r = schnorr::challenge(params, hash, m, &t1);
        let Ok(r_inv) = mod_inv(&r, q) else { continue };
        let s = &r * &a % q * mod_inv(&b, q)? % q;
        let x_b = (&b * r_inv % q + q - 1u8) % q;
        let Ok(rogue) = KeyPair::from_secret(params, x_b) else {
            continue;
        };
        let t2 = mod_exp(&t1, rogue.secret(), &params.p, None)?;
        let c = sym_encrypt(&hash.kdf(&t2, &params.p), m);
        return Ok((
            ImprovedCiphertext {
                c,
                sig: SchnorrSignature { r, s },
            },
            rogue,
        ));
    }
    Err(Error::ForgeryFailed(MAX_FORGERY_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::generate_params;
    use crate::improved;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn naive_pow(base: u64, exp: u64, m: u64) -> u64 {
        (0..exp).fold(1 % m, |acc, _| acc * base % m)
    }

    fn brute_inverse(a: u64, m: u64) -> u64 {
        (1..m).find(|x| a * x % m == 1).unwrap()
    }

    #[test]
    fn toy_vector() {
        let params = GroupParams::toy();
        let hash = HashSuite::stubbed(Some(big(7)), Some(big(7)));
        let alice = PublicKey::new(big(18));

        // v = 4^2 * 18^5 = 16 * 3 = 2; s = 7 * 2 * 5^-1 = 7*2*9 = 5; x_B = 5 * 7^-1 - 1 = 5*8 - 1 = 6
        assert_eq!(naive_pow(4, 2, 23) * naive_pow(18, 5, 23) % 23, 2);
        assert_eq!(7 * 2 * brute_inverse(5, 11) % 11, 5);
        assert_eq!((5 * brute_inverse(7, 11) + 10) % 11, 6);
        assert_eq!(naive_pow(4, 6, 23), 2);

        let out = forge_with(&params, &hash, &alice, &big(9), big(2), big(5)).unwrap();
        assert_eq!(out.ciphertext.r, big(7));
        assert_eq!(out.ciphertext.s, big(5));
        assert_eq!(*out.rogue_keypair.secret(), big(6));
        assert_eq!(out.rogue_keypair.public().y, big(2));

        // (g*y_B)^s * y_A^(r(x_B+1)) = 8^5 * 18^49 = 8^5 * 4^(3*49 mod 11) = 16 * 3 = 2
        assert_eq!(naive_pow(8, 5, 23) * naive_pow(4, 147 % 11, 23) % 23, 2);
        let v = machen::session_value(&params, &out.rogue_keypair, &alice, &out.ciphertext, None)
            .unwrap();
        assert_eq!(v, big(2));
        assert_eq!(
            machen::decrypt_verify(
                &params,
                &hash,
                &out.rogue_keypair,
                &alice,
                &out.ciphertext,
                None
            )
            .unwrap(),
            big(9)
        );
    }

    #[test]
    fn forge_with_reports_degenerate_draws() {
        let params = GroupParams::toy();
        let alice = PublicKey::new(big(18));
        let zero_r = HashSuite::stubbed(Some(big(0)), None);
        assert_eq!(
            forge_with(&params, &zero_r, &alice, &big(9), big(2), big(5)),
            Err(Error::NoInverse)
        );
        // b = r gives x_B = 0
        let r7 = HashSuite::stubbed(Some(big(7)), None);
        assert_eq!(
            forge_with(&params, &r7, &alice, &big(9), big(2), big(7)),
            Err(Error::InvalidSecret)
        );
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            forge(&params, &zero_r, &alice, &big(9), &mut rng),
            Err(Error::ForgeryFailed(MAX_FORGERY_ATTEMPTS))
        );
    }

    #[test]
    fn derivation_identities_hold() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let params = generate_params(256, 96, &mut rng).unwrap();
        let hash = HashSuite::sha256();
        let alice = KeyPair::generate(&params, &mut rng);
        let q = &params.q;
        for i in 1..=20u64 {
            let out = forge(&params, &hash, alice.public(), &big(i * 1000), &mut rng).unwrap();
            let one_plus = (out.rogue_keypair.secret() + 1u8) % q;
            assert_eq!(&one_plus * &out.ciphertext.s % q, out.a);
            assert_eq!(&out.ciphertext.r * &one_plus % q, out.b);
            assert_eq!(
                mod_exp(&params.g, out.rogue_keypair.secret(), &params.p, None).unwrap(),
                out.rogue_keypair.public().y
            );
        }
    }

    #[test]
    fn scenario_default_and_strict() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let params = generate_params(256, 96, &mut rng).unwrap();
        let hash = HashSuite::sha256();
        let alice = KeyPair::generate(&params, &mut rng);
        for mode in [CaMode::MembershipOnly, CaMode::StrictPop] {
            let mut reg = CaRegistry::new(mode);
            let pop = proof_of_possession(&params, "alice", &alice, &mut rng).unwrap();
            let seq_a = reg
                .register(&params, "alice", alice.public(), Some(&pop))
                .unwrap();
            let report = run_attack_scenario(
                &params,
                &hash,
                &mut reg,
                "alice",
                "bob",
                &big(424242),
                &mut rng,
            )
            .unwrap();
            assert!(report.attack_succeeded());
            assert!(report.receiver_accepted);
            assert!(report.rogue_seq.unwrap() > seq_a);
            assert!(!report.ttp_accepted);
            assert!(report.ttp_unreduced_accepted);
            let text = report.to_string();
            assert!(text.contains("FORGERY ACCEPTED"));
            assert_eq!(
                text.contains("proof of possession does NOT block"),
                mode == CaMode::StrictPop
            );
            assert_eq!(
                reg.lookup("bob").unwrap().key,
                *report.forgery.rogue_keypair.public()
            );
        }
    }

    #[test]
    fn scenario_requires_registered_sender() {
        let params = GroupParams::toy();
        let mut reg = CaRegistry::default();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let err = run_attack_scenario(
            &params,
            &HashSuite::sha256(),
            &mut reg,
            "alice",
            "bob",
            &big(3),
            &mut rng,
        )
        .unwrap_err();
        assert_eq!(err, Error::UnknownIdentity("alice".into()));
    }

    #[test]
    fn transplant_fails_on_improved() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let params = generate_params(256, 96, &mut rng).unwrap();
        let hash = HashSuite::sha256();
        let alice = KeyPair::generate(&params, &mut rng);
        for i in 0..20u8 {
            let m = [i; 16];
            let (ct, rogue) =
                transplant_forge_improved(&params, &hash, alice.public(), &m, &mut rng).unwrap();
            assert!(
                improved::decrypt_verify(&params, &hash, &rogue, alice.public(), &ct, None)
                    .is_err()
            );
        }
    }
}
