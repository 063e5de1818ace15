//! Schnorr signatures over the subgroup.
//!
//! `commit = g^k`, `c = H(g ∥ pk ∥ commit ∥ message) mod q`, `response = k + sk·c`.
//! Verification checks `g^response = commit · pk^c`.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::elgamal::SecretKey;
use crate::encoding::{Canonical, CanonicalReader, CanonicalWriter};
use crate::error::CryptoError;
use crate::group::{GroupCtx, GroupElement, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub commit: GroupElement,
    pub response: Scalar,
}

impl Canonical for Signature {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.element(&self.commit).scalar(&self.response);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(Signature { commit: r.element(ctx)?, response: r.scalar(ctx)? })
    }
}

pub(crate) fn signature_challenge(
    ctx: &GroupCtx,
    pk: &GroupElement,
    commit: &GroupElement,
    message: &[u8],
) -> Scalar {
    let mut w = CanonicalWriter::new();
    w.element(&ctx.generator()).element(pk).element(commit).bytes(message);
    w.challenge(ctx)
}

pub fn sign<R: RngCore + CryptoRng>(
    ctx: &GroupCtx,
    sk: &SecretKey,
    message: &[u8],
    rng: &mut R,
) -> Signature {
    let nonce = ctx.random_nonzero_scalar(rng);
    sign_with_nonce(ctx, sk, message, &nonce)
}

/// Deterministic variant for known-answer tests. Reusing a nonce across two
/// messages leaks the key.
pub fn sign_with_nonce(ctx: &GroupCtx, sk: &SecretKey, message: &[u8], nonce: &Scalar) -> Signature {
    let pk = sk.public_key(ctx);
    let commit = ctx.exp(nonce);
    let c = signature_challenge(ctx, &pk, &commit, message);
    let response = ctx.scalar_add(nonce, &ctx.scalar_mul(sk.expose(), &c));
    Signature { commit, response }
}

pub fn verify_sig(ctx: &GroupCtx, pk: &GroupElement, message: &[u8], sig: &Signature) -> bool {
    if !ctx.is_member(pk.as_biguint())
        || !ctx.is_member(sig.commit.as_biguint())
        || !ctx.is_canonical_scalar(&sig.response)
    {
        return false;
    }
    let c = signature_challenge(ctx, pk, &sig.commit, message);
    ctx.exp(&sig.response) == ctx.mul(&sig.commit, &ctx.pow(pk, &c))
}

/// Verifies a signature given in canonical bytes; malformed encodings are rejected.
pub fn verify_sig_bytes(ctx: &GroupCtx, pk: &GroupElement, message: &[u8], sig: &[u8]) -> bool {
    Signature::from_canonical_bytes(sig, ctx).is_ok_and(|s| verify_sig(ctx, pk, message, &s))
}
