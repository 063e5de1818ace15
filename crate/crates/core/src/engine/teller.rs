use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::mix::MixPlan;
use crate::elgamal::{Ciphertext, SecretKey};
use crate::encoding::{Canonical, CanonicalReader, CanonicalWriter};
use crate::error::{CryptoError, EngineError};
use crate::group::{GroupCtx, GroupElement, Scalar};
use crate::proof::{prove_decryption, verify_decryption, DecryptionProof};

/// Secret material held by one Teller. Serializable only so that a server can
/// persist it in its private state; none of it is ever written to the board.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TellerState {
    pub teller_id: u32,
    key_share: Scalar,
    pub public_share: GroupElement,
    /// `r_{i,j}` per voter id.
    voter_randomness: BTreeMap<String, Scalar>,
    pub(crate) assignment_mix: Option<MixPlan>,
    pub(crate) tally_mix: Option<MixPlan>,
    results_published: bool,
}

impl TellerState {
    pub fn new<'a, R, I>(ctx: &GroupCtx, teller_id: u32, voter_ids: I, rng: &mut R) -> Self
    where
        R: RngCore + CryptoRng,
        I: IntoIterator<Item = &'a str>,
    {
        let key_share = ctx.random_nonzero_scalar(rng);
        let voter_randomness = voter_ids
            .into_iter()
            .map(|id| (id.to_owned(), ctx.random_nonzero_scalar(rng)))
            .collect();
        Self::from_parts(ctx, teller_id, key_share, voter_randomness)
    }

    /// Builds a Teller from explicit secrets, e.g. for known-answer tests.
    pub fn from_parts(
        ctx: &GroupCtx,
        teller_id: u32,
        key_share: Scalar,
        voter_randomness: BTreeMap<String, Scalar>,
    ) -> Self {
        TellerState {
            teller_id,
            public_share: ctx.exp(&key_share),
            key_share,
            voter_randomness,
            assignment_mix: None,
            tally_mix: None,
            results_published: false,
        }
    }

    fn key(&self, ctx: &GroupCtx) -> SecretKey {
        SecretKey::new(ctx, self.key_share.clone()).expect("key share is non-zero")
    }

    fn randomness(&self, voter_id: &str) -> Result<&Scalar, EngineError> {
        self.voter_randomness
            .get(voter_id)
            .ok_or_else(|| EngineError::UnknownVoter(voter_id.to_owned()))
    }

    pub fn alpha_share_count(&self) -> usize {
        self.voter_randomness.len()
    }

    /// This Teller's contribution `h_i^{r_{i,j}}` to voter `i`'s commitment.
    pub fn beta_factor(
        &self,
        ctx: &GroupCtx,
        voter_id: &str,
        trapdoor_pk: &GroupElement,
    ) -> Result<GroupElement, EngineError> {
        Ok(ctx.pow(trapdoor_pk, self.randomness(voter_id)?))
    }

    pub fn assignment_mix_plan(&self) -> Option<&MixPlan> {
        self.assignment_mix.as_ref()
    }

    pub fn tally_mix_plan(&self) -> Option<&MixPlan> {
        self.tally_mix.as_ref()
    }

    pub fn results_published(&self) -> bool {
        self.results_published
    }

    pub(crate) fn mark_published(&mut self) {
        self.results_published = true;
    }

    /// `g^{r_{i,j}}`, refused until results are published.
    pub fn release_alpha_share(
        &self,
        ctx: &GroupCtx,
        voter_id: &str,
    ) -> Result<AlphaShare, EngineError> {
        if !self.results_published {
            return Err(EngineError::ResultsNotPublished);
        }
        Ok(AlphaShare {
            teller_id: self.teller_id,
            voter_id: voter_id.to_owned(),
            share: ctx.exp(self.randomness(voter_id)?),
        })
    }

    /// `α^{s_j}` with a proof that it uses the same exponent as `public_share`.
    pub fn partial_decrypt<R: RngCore + CryptoRng>(
        &self,
        ctx: &GroupCtx,
        ct: &Ciphertext,
        rng: &mut R,
    ) -> DecryptionShare {
        let share = ctx.pow(&ct.alpha, &self.key_share);
        let claimed = ctx.div(&ct.beta, &share);
        let proof = prove_decryption(ctx, &self.key(ctx), ct, &claimed, rng);
        DecryptionShare { teller_id: self.teller_id, share, proof }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaShare {
    pub teller_id: u32,
    pub voter_id: String,
    pub share: GroupElement,
}

impl Canonical for AlphaShare {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.u64(self.teller_id.into()).str(&self.voter_id).element(&self.share);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(AlphaShare {
            teller_id: read_teller_id(r)?,
            voter_id: r.string()?,
            share: r.element(ctx)?,
        })
    }
}

pub fn assemble_alpha(ctx: &GroupCtx, shares: &[AlphaShare]) -> GroupElement {
    ctx.product(shares.iter().map(|s| &s.share))
}

/// Releases every Teller's share for one voter.
pub fn release_alpha(
    ctx: &GroupCtx,
    voter_id: &str,
    tellers: &[TellerState],
) -> Result<Vec<AlphaShare>, EngineError> {
    tellers.iter().map(|t| t.release_alpha_share(ctx, voter_id)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecryptionShare {
    pub teller_id: u32,
    pub share: GroupElement,
    pub proof: DecryptionProof,
}

impl DecryptionShare {
    pub fn verify(&self, ctx: &GroupCtx, teller_pk: &GroupElement, ct: &Ciphertext) -> bool {
        if !ctx.is_member(self.share.as_biguint()) {
            return false;
        }
        let claimed = ctx.div(&ct.beta, &self.share);
        verify_decryption(ctx, teller_pk, ct, &claimed, &self.proof)
    }
}

impl Canonical for DecryptionShare {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.u64(self.teller_id.into()).element(&self.share).put(&self.proof);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(DecryptionShare {
            teller_id: read_teller_id(r)?,
            share: r.element(ctx)?,
            proof: r.get(ctx)?,
        })
    }
}

pub(crate) fn read_teller_id(r: &mut CanonicalReader<'_>) -> Result<u32, CryptoError> {
    u32::try_from(r.u64()?).map_err(|_| CryptoError::Decode("teller id exceeds u32".into()))
}

/// Checks every Teller's share and proof, then returns `β / Π d_j`.
pub fn combine_shares(
    ctx: &GroupCtx,
    ct: &Ciphertext,
    shares: &[DecryptionShare],
    teller_pks: &[GroupElement],
    row: usize,
) -> Result<GroupElement, EngineError> {
    if shares.len() != teller_pks.len() {
        return Err(EngineError::TellerFailure {
            teller: shares.len() as u32,
            reason: format!("expected {} decryption shares, got {}", teller_pks.len(), shares.len()),
        });
    }
    for (j, (share, pk)) in shares.iter().zip(teller_pks).enumerate() {
        if share.teller_id as usize != j || !share.verify(ctx, pk, ct) {
            return Err(EngineError::InvalidDecryptionProof { teller: j as u32, row });
        }
    }
    let combined = ctx.product(shares.iter().map(|s| &s.share));
    Ok(ctx.div(&ct.beta, &combined))
}
