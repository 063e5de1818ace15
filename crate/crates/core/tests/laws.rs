use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use selene_core::encoding::Canonical;
use selene_core::{
    combine, decrypt, encrypt, fake_alpha, open_commitment, parse_tracker_display, prove_decryption,
    reencrypt, sign, tracker_display, verify_decryption, verify_sig, Ciphertext, GroupCtx,
    GroupProfile, SecretKey, Tracker, TrackerTable,
};

fn test_ctx() -> GroupCtx {
    GroupCtx::test()
}

#[test]
fn roundtrip_exhaustive_over_test_group() {
    let ctx = test_ctx();
    for sk in 1..11 {
        let sk = SecretKey::from_u64(&ctx, sk).unwrap();
        let pk = sk.public_key(&ctx);
        for e in 0..11 {
            let m = ctx.exp(&ctx.scalar_u64(e).unwrap());
            for r in 0..11 {
                let ct = encrypt(&ctx, &pk, &m, &ctx.scalar_u64(r).unwrap()).unwrap();
                assert_eq!(decrypt(&ctx, &sk, &ct), m);
            }
        }
    }
}

#[test]
fn reencryption_and_homomorphism_exhaustive() {
    let ctx = test_ctx();
    let sk = SecretKey::from_u64(&ctx, 3).unwrap();
    let pk = sk.public_key(&ctx);
    let s = |x: u64| ctx.scalar_u64(x).unwrap();
    for e1 in 0..11 {
        let m1 = ctx.exp(&s(e1));
        for r1 in 0..11 {
            let ct1 = encrypt(&ctx, &pk, &m1, &s(r1)).unwrap();
            for r2 in 0..11 {
                assert_eq!(decrypt(&ctx, &sk, &reencrypt(&ctx, &pk, &ct1, &s(r2))), m1);
            }
            for e2 in 0..11 {
                let m2 = ctx.exp(&s(e2));
                let ct2 = encrypt(&ctx, &pk, &m2, &s((r1 * 7 + e2) % 11)).unwrap();
                let prod = combine(&ctx, &ct1, &ct2);
                assert_eq!(prod, combine(&ctx, &ct2, &ct1));
                assert_eq!(decrypt(&ctx, &sk, &prod), ctx.mul(&m1, &m2));
            }
        }
    }
}

#[test]
fn fake_alpha_law_for_every_tracker_and_key() {
    let ctx = test_ctx();
    let pool: Vec<Tracker> = (0..11).map(Tracker).collect();
    let table = TrackerTable::new(&ctx, pool.iter().copied()).unwrap();
    for x in 1..11 {
        let sk = SecretKey::from_u64(&ctx, x).unwrap();
        let h = sk.public_key(&ctx);
        for &n in &pool {
            for r in 0..11 {
                let r = ctx.scalar_u64(r).unwrap();
                let alpha = ctx.exp(&r);
                let beta = ctx.mul(&selene_core::encode_tracker(&ctx, n).unwrap(), &ctx.pow(&h, &r));
                assert_eq!(fake_alpha(&ctx, &beta, n, &sk).unwrap(), alpha);
                for &fake in &pool {
                    let a = fake_alpha(&ctx, &beta, fake, &sk).unwrap();
                    assert!(ctx.is_member(a.as_biguint()));
                    assert_eq!(open_commitment(&ctx, &beta, &a, &sk, &table).unwrap(), fake);
                }
            }
        }
    }
}

fn profile() -> impl Strategy<Value = GroupProfile> {
    prop_oneof![Just(GroupProfile::Test), Just(GroupProfile::Dev)]
}

proptest! {
    #[test]
    fn display_round_trips(n in any::<u32>()) {
        let s = tracker_display(Tracker(n.into()));
        prop_assert_eq!(parse_tracker_display(&s).unwrap(), Tracker(n.into()));
        prop_assert_eq!(parse_tracker_display(&s.to_lowercase()).unwrap(), Tracker(n.into()));
    }

    #[test]
    fn display_is_injective(a in any::<u32>(), b in any::<u32>()) {
        prop_assume!(a != b);
        prop_assert_ne!(tracker_display(Tracker(a.into())), tracker_display(Tracker(b.into())));
    }

    #[test]
    fn signatures_round_trip(p in profile(), seed in any::<u64>(), msg in proptest::collection::vec(any::<u8>(), 0..64)) {
        let ctx = GroupCtx::from_profile(p);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let sk = SecretKey::random(&ctx, &mut rng);
        let pk = sk.public_key(&ctx);
        let sig = sign(&ctx, &sk, &msg, &mut rng);
        prop_assert!(verify_sig(&ctx, &pk, &msg, &sig));
        let back = selene_core::Signature::from_canonical_bytes(&sig.to_canonical_bytes(), &ctx).unwrap();
        prop_assert_eq!(back, sig);
    }

    #[test]
    fn decryption_proofs_complete(p in profile(), seed in any::<u64>()) {
        let ctx = GroupCtx::from_profile(p);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let sk = SecretKey::random(&ctx, &mut rng);
        let pk = sk.public_key(&ctx);
        let m = ctx.exp(&ctx.random_scalar(&mut rng));
        let ct = encrypt(&ctx, &pk, &m, &ctx.random_scalar(&mut rng)).unwrap();
        let proof = prove_decryption(&ctx, &sk, &ct, &m, &mut rng);
        prop_assert!(verify_decryption(&ctx, &pk, &ct, &m, &proof));
        // With q = 11 a wrong m slips through when both challenges are 0.
        if p != GroupProfile::Test {
            let other = ctx.mul(&m, &ctx.generator());
            prop_assert!(!verify_decryption(&ctx, &pk, &ct, &other, &proof));
        }
    }

    #[test]
    fn reencryption_preserves_plaintext_dev(seed in any::<u64>()) {
        let ctx = GroupCtx::from_profile(GroupProfile::Dev);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let sk = SecretKey::random(&ctx, &mut rng);
        let pk = sk.public_key(&ctx);
        let m = ctx.exp(&ctx.random_scalar(&mut rng));
        let ct = encrypt(&ctx, &pk, &m, &ctx.random_scalar(&mut rng)).unwrap();
        let re = reencrypt(&ctx, &pk, &ct, &ctx.random_nonzero_scalar(&mut rng));
        prop_assert_ne!(&re, &ct);
        prop_assert_eq!(decrypt(&ctx, &sk, &re), m);
    }

    #[test]
    fn ciphertext_encoding_round_trips(p in profile(), seed in any::<u64>()) {
        let ctx = GroupCtx::from_profile(p);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let ct = Ciphertext {
            alpha: ctx.exp(&ctx.random_scalar(&mut rng)),
            beta: ctx.exp(&ctx.random_scalar(&mut rng)),
        };
        let bytes = ct.to_canonical_bytes();
        prop_assert_eq!(Ciphertext::from_canonical_bytes(&bytes, &ctx).unwrap(), ct.clone());
        let json = serde_json::to_string(&ct).unwrap();
        prop_assert_eq!(serde_json::from_str::<Ciphertext>(&json).unwrap(), ct);
    }
}
