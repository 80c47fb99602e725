use std::sync::OnceLock;

use authenc::group::generate_params;
use authenc::hashing::HashSuite;
use authenc::improved::{self, ImprovedCiphertext};
use authenc::machen::{self, SharedStaticKey};
use authenc::numeric::{mod_exp, mod_inv, ExpCounter};
use authenc::{schnorr, GroupParams, KeyPair};
use num_bigint::{BigUint, RandBigInt};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn mid_params() -> &'static GroupParams {
    static P: OnceLock<GroupParams> = OnceLock::new();
    P.get_or_init(|| generate_params(256, 96, &mut ChaCha20Rng::seed_from_u64(0xA11CE)).unwrap())
}

fn full_params() -> &'static GroupParams {
    static P: OnceLock<GroupParams> = OnceLock::new();
    P.get_or_init(|| generate_params(1024, 160, &mut ChaCha20Rng::seed_from_u64(1024)).unwrap())
}

fn parties(params: &GroupParams, rng: &mut ChaCha20Rng) -> (KeyPair, KeyPair) {
    (
        KeyPair::generate(params, rng),
        KeyPair::generate(params, rng),
    )
}

fn random_message(params: &GroupParams, rng: &mut ChaCha20Rng) -> BigUint {
    rng.gen_biguint_range(&BigUint::from(1u8), &params.p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn machen_completeness(seed in any::<u64>(), toy in any::<bool>()) {
        let params = if toy { GroupParams::toy() } else { mid_params().clone() };
        let hash = HashSuite::sha256();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = parties(&params, &mut rng);
        let m = random_message(&params, &mut rng);
        let ct = machen::encrypt_sign(&params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        prop_assert_eq!(machen::decrypt_verify(&params, &hash, &b, a.public(), &ct, None).unwrap(), m);
    }

    #[test]
    fn machen_recomputation_identity(seed in any::<u64>()) {
        // (g*y_B)^s * y_A^(r(x_B+1)) = (g*y_B)^k when s = k - x_A r
        let params = mid_params();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = parties(params, &mut rng);
        let k = rng.gen_biguint_range(&BigUint::from(1u8), &params.q);
        let r = rng.gen_biguint_below(&params.q);
        let s = (&k + &params.q * &params.q - a.secret() * &r) % &params.q;
        let gy = &params.g * &b.public().y % &params.p;
        let lhs = mod_exp(&gy, &s, &params.p, None).unwrap()
            * mod_exp(&a.public().y, &(&r * (b.secret() + 1u8)), &params.p, None).unwrap()
            % &params.p;
        prop_assert_eq!(lhs, mod_exp(&gy, &k, &params.p, None).unwrap());
    }

    #[test]
    fn improved_completeness(seed in any::<u64>(), toy in any::<bool>(),
                             m in proptest::collection::vec(any::<u8>(), 0..300)) {
        let params = if toy { GroupParams::toy() } else { mid_params().clone() };
        let hash = HashSuite::sha256();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = parties(&params, &mut rng);
        let ct = improved::encrypt_sign(&params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        prop_assert_eq!(ct.c.len(), m.len());
        let got = improved::decrypt_verify(&params, &hash, &b, a.public(), &ct, None).unwrap();
        prop_assert_eq!(&got, &m);
        // receiver acceptance implies public verifiability
        let proof = improved::release_proof(&ct, &got);
        prop_assert!(improved::public_verify(&params, &hash, a.public(), &proof, None));
    }

    #[test]
    fn key_transport_and_schnorr_identities(seed in any::<u64>()) {
        let params = mid_params();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = parties(params, &mut rng);
        let k = rng.gen_biguint_range(&BigUint::from(1u8), &params.q);
        let t1 = mod_exp(&params.g, &k, &params.p, None).unwrap();
        prop_assert_eq!(
            mod_exp(&t1, b.secret(), &params.p, None).unwrap(),
            mod_exp(&b.public().y, &k, &params.p, None).unwrap()
        );
        let r = rng.gen_biguint_below(&params.q);
        let s = (&k + &r * a.secret()) % &params.q;
        let sig = schnorr::SchnorrSignature { r, s };
        prop_assert_eq!(schnorr::commitment(params, a.public(), &sig, None).unwrap(), t1);
    }

    #[test]
    fn unreduced_ttp_tracks_receiver(seed in any::<u64>(), tamper in any::<bool>()) {
        let params = mid_params();
        let hash = HashSuite::sha256();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = parties(params, &mut rng);
        let m = random_message(params, &mut rng);
        let mut ct = machen::encrypt_sign(params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        if tamper {
            ct.s = (&ct.s + 1u8) % &params.q;
        }
        let accepted = machen::decrypt_verify(params, &hash, &b, a.public(), &ct, None).is_ok();
        prop_assert_eq!(accepted, !tamper);
        let proof = machen::make_unreduced_proof(params, &hash, &b, a.public(), &ct, &m, None).unwrap();
        prop_assert_eq!(machen::ttp_verify_unreduced(params, &hash, a.public(), &proof, None), accepted);
    }
}

#[test]
fn shared_key_decryption_agrees() {
    let params = mid_params();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    for i in 0..100 {
        let (a, b) = parties(params, &mut rng);
        let shared = SharedStaticKey::derive(params, &b, a.public()).unwrap();
        let m = random_message(params, &mut rng);
        let mut ct =
            machen::encrypt_sign(params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        if i % 2 == 1 {
            ct.c = (&ct.c % (&params.p - 1u8)) + 1u8;
            ct.r = (&ct.r + 1u8) % &params.q;
        }
        let direct = machen::decrypt_verify(params, &hash, &b, a.public(), &ct, None);
        let via_shared =
            machen::decrypt_with_shared_key(params, &hash, &shared, a.public(), b.public(), &ct);
        assert_eq!(direct, via_shared, "run {i}");
    }
}

#[test]
fn leaked_session_value_recovers_static_key() {
    let params = full_params();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(50);
    let mut done = 0;
    while done < 50 {
        let (a, b) = parties(params, &mut rng);
        let m = random_message(params, &mut rng);
        let ct = machen::encrypt_sign(params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        if mod_inv(&ct.r, &params.q).is_err() {
            continue;
        }
        let v = machen::session_value(params, &b, a.public(), &ct, None).unwrap();
        let recovered =
            machen::recover_shared_key(params, &v, &ct, a.public(), b.public()).unwrap();
        let expected = mod_exp(&params.g, &(a.secret() * b.secret()), &params.p, None).unwrap();
        assert_eq!(recovered.y_ab, expected);
        // the recovered key alone is enough to read and authenticate
        assert_eq!(
            machen::decrypt_with_shared_key(params, &hash, &recovered, a.public(), b.public(), &ct)
                .unwrap(),
            m
        );
        done += 1;
    }
}

#[test]
fn mc_ttp_rejections_come_from_reducing_k1() {
    let params = GroupParams::toy();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let (mut rejected, mut changed) = (0, 0);
    for _ in 0..10_000 {
        let (a, b) = parties(&params, &mut rng);
        let m = random_message(&params, &mut rng);
        let ct = machen::encrypt_sign(&params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        let got = machen::decrypt_verify(&params, &hash, &b, a.public(), &ct, None).unwrap();
        let proof = machen::make_proof(&params, &hash, &b, a.public(), &ct, &got, None).unwrap();
        let diag =
            machen::make_unreduced_proof(&params, &hash, &b, a.public(), &ct, &got, None).unwrap();
        let reduced_away = diag.k1_unreduced != proof.k1;
        let accepted = machen::ttp_verify(&params, &hash, a.public(), &proof, None);
        assert!(
            reduced_away || accepted,
            "rejected although K1 was already below q"
        );
        rejected += !accepted as u32;
        changed += reduced_away as u32;
    }
    assert!(
        rejected > 0 && rejected <= changed,
        "rejected {rejected}, changed {changed}"
    );
}

#[test]
fn random_k1_star_rejected() {
    let params = mid_params();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (a, b) = parties(params, &mut rng);
    for _ in 0..100 {
        let m = random_message(params, &mut rng);
        let ct = machen::encrypt_sign(params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        let mut proof =
            machen::make_unreduced_proof(params, &hash, &b, a.public(), &ct, &m, None).unwrap();
        proof.k1_unreduced = rng.gen_biguint_range(&BigUint::from(1u8), &params.p);
        assert!(!machen::ttp_verify_unreduced(
            params,
            &hash,
            a.public(),
            &proof,
            None
        ));
    }
}

#[test]
fn wrong_session_key_fails_hash_check() {
    let params = mid_params();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let (a, b) = parties(params, &mut rng);
    let eve = KeyPair::generate(params, &mut rng);
    for i in 0..50u8 {
        let m = vec![i; 40];
        let ct = improved::encrypt_sign(params, &hash, &a, b.public(), &m, &mut rng, None).unwrap();
        assert!(improved::decrypt_verify(params, &hash, &eve, a.public(), &ct, None).is_err());
    }
}

#[test]
fn ciphertexts_differ_across_nonces() {
    let params = mid_params();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let (a, b) = parties(params, &mut rng);
    let m = b"the same message every time, long enough to span blocks".to_vec();
    let cts: Vec<ImprovedCiphertext> = (0..200)
        .map(|_| improved::encrypt_sign(params, &hash, &a, b.public(), &m, &mut rng, None).unwrap())
        .collect();
    for i in 0..cts.len() {
        assert_ne!(cts[i].c, m);
        for j in i + 1..cts.len() {
            assert_ne!(cts[i].c, cts[j].c);
        }
    }
}

#[test]
fn release_proof_costs_nothing() {
    let params = full_params();
    let hash = HashSuite::sha256();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let (a, b) = parties(params, &mut rng);
    let ct = improved::encrypt_sign(params, &hash, &a, b.public(), b"x", &mut rng, None).unwrap();
    let m = improved::decrypt_verify(params, &hash, &b, a.public(), &ct, None).unwrap();
    let counter = ExpCounter::new();
    let proof = improved::release_proof(&ct, &m);
    assert_eq!(counter.get(), 0);
    improved::public_verify(params, &hash, a.public(), &proof, Some(&counter));
    assert_eq!(counter.get(), 2);
}
