//! Chaum–Pedersen proofs that a ciphertext decrypts to a claimed plaintext.
//!
//! The prover shows `log_g pk = log_α (β / m)` without revealing the key:
//! `A = g^w`, `B = α^w`, `c = H(g, pk, α, β, m, A, B) mod q`, `s = w + c·sk`.
//! The verifier checks `g^s = A·pk^c` and `α^s = B·(β/m)^c`.
//!
//! Teller partial decryptions reuse the same proof: a share `d = α^sk_j` is
//! proven as a decryption of `(α, β)` to `β / d` under `pk_j`.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::elgamal::{Ciphertext, SecretKey};
use crate::encoding::{Canonical, CanonicalReader, CanonicalWriter};
use crate::error::CryptoError;
use crate::group::{GroupCtx, GroupElement, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecryptionProof {
    pub commit_a: GroupElement,
    pub commit_b: GroupElement,
    pub response: Scalar,
}

impl Canonical for DecryptionProof {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.element(&self.commit_a).element(&self.commit_b).scalar(&self.response);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(DecryptionProof {
            commit_a: r.element(ctx)?,
            commit_b: r.element(ctx)?,
            response: r.scalar(ctx)?,
        })
    }
}

fn decryption_challenge(
    ctx: &GroupCtx,
    pk: &GroupElement,
    ct: &Ciphertext,
    claimed: &GroupElement,
    commit_a: &GroupElement,
    commit_b: &GroupElement,
) -> Scalar {
    let mut w = CanonicalWriter::new();
    w.element(&ctx.generator())
        .element(pk)
        .element(&ct.alpha)
        .element(&ct.beta)
        .element(claimed)
        .element(commit_a)
        .element(commit_b);
    w.challenge(ctx)
}

pub fn prove_decryption<R: RngCore + CryptoRng>(
    ctx: &GroupCtx,
    sk: &SecretKey,
    ct: &Ciphertext,
    claimed: &GroupElement,
    rng: &mut R,
) -> DecryptionProof {
    let nonce = ctx.random_nonzero_scalar(rng);
    prove_decryption_with_nonce(ctx, sk, ct, claimed, &nonce)
}

pub fn prove_decryption_with_nonce(
    ctx: &GroupCtx,
    sk: &SecretKey,
    ct: &Ciphertext,
    claimed: &GroupElement,
    nonce: &Scalar,
) -> DecryptionProof {
    let pk = sk.public_key(ctx);
    let commit_a = ctx.exp(nonce);
    let commit_b = ctx.pow(&ct.alpha, nonce);
    let c = decryption_challenge(ctx, &pk, ct, claimed, &commit_a, &commit_b);
    let response = ctx.scalar_add(nonce, &ctx.scalar_mul(&c, sk.expose()));
    DecryptionProof { commit_a, commit_b, response }
}

pub fn verify_decryption(
    ctx: &GroupCtx,
    pk: &GroupElement,
    ct: &Ciphertext,
    claimed: &GroupElement,
    proof: &DecryptionProof,
) -> bool {
    let members = [pk, &ct.alpha, &ct.beta, claimed, &proof.commit_a, &proof.commit_b];
    if !members.iter().all(|e| ctx.is_member(e.as_biguint()))
        || !ctx.is_canonical_scalar(&proof.response)
    {
        return false;
    }
    let c = decryption_challenge(ctx, pk, ct, claimed, &proof.commit_a, &proof.commit_b);
    let blinded = ctx.div(&ct.beta, claimed);
    ctx.exp(&proof.response) == ctx.mul(&proof.commit_a, &ctx.pow(pk, &c))
        && ctx.pow(&ct.alpha, &proof.response) == ctx.mul(&proof.commit_b, &ctx.pow(&blinded, &c))
}

pub fn verify_decryption_bytes(
    ctx: &GroupCtx,
    pk: &GroupElement,
    ct: &Ciphertext,
    claimed: &GroupElement,
    proof: &[u8],
) -> bool {
    DecryptionProof::from_canonical_bytes(proof, ctx)
        .is_ok_and(|p| verify_decryption(ctx, pk, ct, claimed, &p))
}
