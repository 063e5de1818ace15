//! Re-encryption mixing. Each Teller applies one secret permutation and fresh
//! re-encryption randomness to every row; pass outputs travel between Tellers
//! as canonical bytes.

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::teller::TellerState;
use crate::elgamal::{reencrypt, Ciphertext};
use crate::encoding::{Canonical, CanonicalReader, CanonicalWriter};
use crate::error::{CryptoError, EngineError};
use crate::group::{GroupCtx, GroupElement, Scalar};

/// Something a mix pass can shuffle: a fixed number of ciphertexts that are
/// permuted together.
pub trait Mixable: Canonical + Clone {
    const WIDTH: usize;

    fn components(&self) -> Vec<&Ciphertext>;

    fn from_components(parts: Vec<Ciphertext>) -> Self;
}

impl Mixable for Ciphertext {
    const WIDTH: usize = 1;

    fn components(&self) -> Vec<&Ciphertext> {
        vec![self]
    }

    fn from_components(mut parts: Vec<Ciphertext>) -> Self {
        parts.remove(0)
    }
}

/// One `(encrypted tracker, encrypted vote)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixRow {
    pub enc_tracker: Ciphertext,
    pub enc_vote: Ciphertext,
}

impl Canonical for MixRow {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.put(&self.enc_tracker).put(&self.enc_vote);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(MixRow { enc_tracker: r.get(ctx)?, enc_vote: r.get(ctx)? })
    }
}

impl Mixable for MixRow {
    const WIDTH: usize = 2;

    fn components(&self) -> Vec<&Ciphertext> {
        vec![&self.enc_tracker, &self.enc_vote]
    }

    fn from_components(mut parts: Vec<Ciphertext>) -> Self {
        let enc_vote = parts.pop().expect("two components");
        let enc_tracker = parts.pop().expect("two components");
        MixRow { enc_tracker, enc_vote }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixBatch {
    pub rows: Vec<MixRow>,
}

impl Canonical for MixBatch {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.put(&self.rows);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(MixBatch { rows: r.get(ctx)? })
    }
}

/// A Teller's secret choices for one pass: output row `i` is input row
/// `permutation[i]` re-encrypted with `randomness[i]` (one scalar per component).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixPlan {
    pub permutation: Vec<usize>,
    pub randomness: Vec<Vec<Scalar>>,
}

impl MixPlan {
    pub fn random<R: RngCore + CryptoRng>(
        ctx: &GroupCtx,
        rows: usize,
        width: usize,
        rng: &mut R,
    ) -> Self {
        let mut permutation: Vec<usize> = (0..rows).collect();
        permutation.shuffle(rng);
        let randomness = (0..rows)
            .map(|_| (0..width).map(|_| ctx.random_nonzero_scalar(rng)).collect())
            .collect();
        MixPlan { permutation, randomness }
    }

    /// Identity permutation with zero re-encryption randomness.
    pub fn identity(rows: usize, width: usize) -> Self {
        MixPlan {
            permutation: (0..rows).collect(),
            randomness: vec![vec![Scalar::from_u64_unchecked(0); width]; rows],
        }
    }

    fn check(&self, ctx: &GroupCtx, rows: usize, width: usize) -> Result<(), String> {
        let mut seen = vec![false; rows];
        if self.permutation.len() != rows || self.randomness.len() != rows {
            return Err("plan size does not match batch".into());
        }
        for &i in &self.permutation {
            if i >= rows || std::mem::replace(&mut seen[i], true) {
                return Err("not a permutation".into());
            }
        }
        let scalars_ok = self
            .randomness
            .iter()
            .all(|r| r.len() == width && r.iter().all(|s| ctx.is_canonical_scalar(s)));
        if scalars_ok {
            Ok(())
        } else {
            Err("bad re-encryption randomness".into())
        }
    }
}

/// Applies one pass.
pub fn apply_mix<T: Mixable>(
    ctx: &GroupCtx,
    pk: &GroupElement,
    rows: &[T],
    plan: &MixPlan,
) -> Result<Vec<T>, String> {
    plan.check(ctx, rows.len(), T::WIDTH)?;
    Ok(plan
        .permutation
        .iter()
        .zip(&plan.randomness)
        .map(|(&src, rands)| {
            let parts = rows[src]
                .components()
                .into_iter()
                .zip(rands)
                .map(|(ct, r)| reencrypt(ctx, pk, ct, r))
                .collect();
            T::from_components(parts)
        })
        .collect())
}

/// Runs the passes in order, round-tripping every intermediate batch through
/// its canonical encoding. Returns each pass's output; the last is the result.
pub fn mix_with_plans<T: Mixable>(
    ctx: &GroupCtx,
    pk: &GroupElement,
    input: &[T],
    plans: &[(u32, &MixPlan)],
) -> Result<Vec<Vec<T>>, EngineError> {
    let mut wire = input.to_vec().to_canonical_bytes();
    let mut outputs = Vec::with_capacity(plans.len());
    for &(teller, plan) in plans {
        let failure = |reason: String| EngineError::TellerFailure { teller, reason };
        let received = Vec::<T>::from_canonical_bytes(&wire, ctx).map_err(|e| failure(e.to_string()))?;
        let mixed = apply_mix(ctx, pk, &received, plan).map_err(failure)?;
        wire = mixed.to_canonical_bytes();
        outputs.push(mixed);
    }
    Ok(outputs)
}

/// Output of the ballot mix: one batch per Teller pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixTranscript {
    pub passes: Vec<MixPass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixPass {
    pub teller_id: u32,
    pub output: MixBatch,
}

impl MixTranscript {
    pub fn output<'a>(&'a self, input: &'a MixBatch) -> &'a MixBatch {
        self.passes.last().map_or(input, |p| &p.output)
    }
}

/// Mixes `(tracker, vote)` pairs through every Teller, each drawing a fresh
/// plan that it keeps in its state.
pub fn mix<R: RngCore + CryptoRng>(
    ctx: &GroupCtx,
    pk: &GroupElement,
    batch: &MixBatch,
    tellers: &mut [TellerState],
    rng: &mut R,
) -> Result<MixTranscript, EngineError> {
    for t in tellers.iter_mut() {
        t.tally_mix = Some(MixPlan::random(ctx, batch.rows.len(), MixRow::WIDTH, rng));
    }
    let plans: Vec<(u32, &MixPlan)> = tellers
        .iter()
        .map(|t| (t.teller_id, t.tally_mix.as_ref().expect("just set")))
        .collect();
    let outputs = mix_with_plans(ctx, pk, &batch.rows, &plans)?;
    Ok(MixTranscript {
        passes: tellers
            .iter()
            .zip(outputs)
            .map(|(t, rows)| MixPass { teller_id: t.teller_id, output: MixBatch { rows } })
            .collect(),
    })
}
