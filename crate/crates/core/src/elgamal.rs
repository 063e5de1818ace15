//! Multiplicative ElGamal over a [`GroupCtx`].

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::encoding::{Canonical, CanonicalReader, CanonicalWriter};
use crate::error::CryptoError;
use crate::group::{GroupCtx, GroupElement, Scalar};

/// Secret exponent in `[1, q)`. Deliberately not `Serialize`; use
/// [`SecretKey::expose_hex`] where a key file has to be written.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey(Scalar);

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl SecretKey {
    pub fn new(ctx: &GroupCtx, scalar: Scalar) -> Result<Self, CryptoError> {
        if !ctx.is_canonical_scalar(&scalar) {
            return Err(CryptoError::ScalarOutOfRange);
        }
        if scalar.to_u64() == Some(0) {
            return Err(CryptoError::ZeroSecretKey);
        }
        Ok(SecretKey(scalar))
    }

    pub fn from_u64(ctx: &GroupCtx, x: u64) -> Result<Self, CryptoError> {
        Self::new(ctx, Scalar::from_u64_unchecked(x))
    }

    pub fn from_hex(ctx: &GroupCtx, s: &str) -> Result<Self, CryptoError> {
        Self::new(ctx, Scalar::from_hex(s)?)
    }

    pub fn random<R: RngCore + CryptoRng>(ctx: &GroupCtx, rng: &mut R) -> Self {
        SecretKey(ctx.random_nonzero_scalar(rng))
    }

    pub fn expose(&self) -> &Scalar {
        &self.0
    }

    pub fn expose_hex(&self) -> String {
        self.0.to_hex()
    }

    pub fn public_key(&self, ctx: &GroupCtx) -> GroupElement {
        ctx.exp(&self.0)
    }
}

#[derive(Debug, Clone)]
pub struct KeyPair {
    secret: SecretKey,
    public: GroupElement,
}

impl KeyPair {
    pub fn from_secret(ctx: &GroupCtx, secret: SecretKey) -> Self {
        let public = secret.public_key(ctx);
        KeyPair { secret, public }
    }

    pub fn secret(&self) -> &SecretKey {
        &self.secret
    }

    pub fn public(&self) -> &GroupElement {
        &self.public
    }
}

pub fn keygen<R: RngCore + CryptoRng>(ctx: &GroupCtx, rng: &mut R) -> KeyPair {
    KeyPair::from_secret(ctx, SecretKey::random(ctx, rng))
}

/// ElGamal pair `(α, β) = (g^r, h^r·m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ciphertext {
    pub alpha: GroupElement,
    pub beta: GroupElement,
}

impl Ciphertext {
    /// The trivial encryption of 1.
    pub fn one(ctx: &GroupCtx) -> Self {
        Ciphertext { alpha: ctx.identity(), beta: ctx.identity() }
    }

    pub fn validate(&self, ctx: &GroupCtx) -> Result<(), CryptoError> {
        ctx.check_element(&self.alpha)?;
        ctx.check_element(&self.beta)
    }
}

impl Canonical for Ciphertext {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.element(&self.alpha).element(&self.beta);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(Ciphertext { alpha: r.element(ctx)?, beta: r.element(ctx)? })
    }
}

pub fn encrypt(
    ctx: &GroupCtx,
    pk: &GroupElement,
    m: &GroupElement,
    r: &Scalar,
) -> Result<Ciphertext, CryptoError> {
    ctx.check_element(m)?;
    ctx.check_element(pk)?;
    if !ctx.is_canonical_scalar(r) {
        return Err(CryptoError::ScalarOutOfRange);
    }
    Ok(Ciphertext {
        alpha: ctx.exp(r),
        beta: ctx.mul(&ctx.pow(pk, r), m),
    })
}

/// `β / α^sk`.
pub fn decrypt(ctx: &GroupCtx, sk: &SecretKey, ct: &Ciphertext) -> GroupElement {
    ctx.div(&ct.beta, &ctx.pow(&ct.alpha, sk.expose()))
}

/// `(α·g^r2, β·h^r2)`; same plaintext, fresh randomness.
pub fn reencrypt(ctx: &GroupCtx, pk: &GroupElement, ct: &Ciphertext, r2: &Scalar) -> Ciphertext {
    Ciphertext {
        alpha: ctx.mul(&ct.alpha, &ctx.exp(r2)),
        beta: ctx.mul(&ct.beta, &ctx.pow(pk, r2)),
    }
}

/// Componentwise product; decrypts to the product of the plaintexts.
pub fn combine(ctx: &GroupCtx, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
    Ciphertext {
        alpha: ctx.mul(&a.alpha, &b.alpha),
        beta: ctx.mul(&a.beta, &b.beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> GroupCtx {
        GroupCtx::test()
    }

    fn el(x: u64) -> GroupElement {
        ctx().element_u64(x).unwrap()
    }

    fn sc(x: u64) -> Scalar {
        ctx().scalar_u64(x).unwrap()
    }

    fn ct(a: u64, b: u64) -> Ciphertext {
        Ciphertext { alpha: el(a), beta: el(b) }
    }

    #[test]
    fn keygen_fixtures() {
        let ctx = ctx();
        let kp = KeyPair::from_secret(&ctx, SecretKey::from_u64(&ctx, 1).unwrap());
        assert_eq!(kp.public(), &el(2));
        let kp = KeyPair::from_secret(&ctx, SecretKey::from_u64(&ctx, 3).unwrap());
        assert_eq!(kp.public(), &el(8));
        assert_eq!(SecretKey::from_u64(&ctx, 0).unwrap_err(), CryptoError::ZeroSecretKey);
        assert_eq!(SecretKey::from_u64(&ctx, 11).unwrap_err(), CryptoError::ScalarOutOfRange);
    }

    #[test]
    fn random_keys_are_in_range() {
        use rand::SeedableRng;
        let ctx = ctx();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        for _ in 0..200 {
            let kp = keygen(&ctx, &mut rng);
            let sk = kp.secret().expose().to_u64().unwrap();
            assert!((1..11).contains(&sk));
            assert_eq!(kp.public(), &ctx.exp(kp.secret().expose()));
        }
    }

    #[test]
    fn encrypt_fixtures() {
        let ctx = ctx();
        assert_eq!(encrypt(&ctx, &el(8), &el(4), &sc(5)).unwrap(), ct(9, 18));
        assert_eq!(encrypt(&ctx, &el(8), &el(4), &sc(0)).unwrap(), ct(1, 4));
        let not_member = GroupElement::from_u64_unchecked(5);
        assert_eq!(
            encrypt(&ctx, &el(8), &not_member, &sc(1)).unwrap_err(),
            CryptoError::NotInSubgroup
        );
    }

    #[test]
    fn decrypt_fixtures() {
        let ctx = ctx();
        let sk = SecretKey::from_u64(&ctx, 3).unwrap();
        assert_eq!(decrypt(&ctx, &sk, &ct(9, 18)), el(4));
        assert_eq!(decrypt(&ctx, &sk, &ct(1, 4)), el(4));
    }

    #[test]
    fn reencrypt_fixtures() {
        let ctx = ctx();
        assert_eq!(reencrypt(&ctx, &el(8), &ct(9, 18), &sc(0)), ct(9, 18));
        assert_eq!(reencrypt(&ctx, &el(8), &ct(9, 18), &sc(6)), ct(1, 4));
    }

    #[test]
    fn combine_fixtures() {
        let ctx = ctx();
        let a = encrypt(&ctx, &el(8), &el(2), &sc(1)).unwrap();
        assert_eq!(a, ct(2, 16));
        let c = combine(&ctx, &a, &ct(9, 18));
        assert_eq!(c, ct(18, 12));
        let sk = SecretKey::from_u64(&ctx, 3).unwrap();
        assert_eq!(decrypt(&ctx, &sk, &c), el(8));
        let one = encrypt(&ctx, &el(8), &el(1), &sc(0)).unwrap();
        assert_eq!(combine(&ctx, &c, &one), c);
        assert_eq!(combine(&ctx, &ct(9, 18), &a), c);
    }

    #[test]
    fn canonical_round_trip_checks_membership() {
        let ctx = ctx();
        let bytes = ct(9, 18).to_canonical_bytes();
        assert_eq!(Ciphertext::from_canonical_bytes(&bytes, &ctx).unwrap(), ct(9, 18));
        let bad = Ciphertext {
            alpha: GroupElement::from_u64_unchecked(5),
            beta: el(1),
        };
        assert!(Ciphertext::from_canonical_bytes(&bad.to_canonical_bytes(), &ctx).is_err());
    }
}
