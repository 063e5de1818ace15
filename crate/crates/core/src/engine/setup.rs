//! Election setup: Teller keys, the tracker pool, and the assignment ceremony
//! that gives every voter a tracker and a published commitment `β`.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::config::{Candidate, ElectionConfig};
use super::mix::{mix_with_plans, MixPlan, Mixable};
use super::tally::{collect_partial_decryptions, PartialDecryptions};
use super::teller::{combine_shares, TellerState};
use crate::elgamal::{encrypt, Ciphertext};
use crate::error::EngineError;
use crate::group::{GroupCtx, GroupElement, GroupProfile, Scalar};
use crate::tracker::{encode_tracker, Tracker, TrackerTable};

/// Public outcome of setup; everything in here goes on the board.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupBundle {
    pub election_id: String,
    pub group: GroupProfile,
    pub candidates: Vec<Candidate>,
    pub election_pk: GroupElement,
    pub teller_pks: Vec<GroupElement>,
    /// Plaintext pool in ascending order.
    pub tracker_pool: Vec<Tracker>,
    /// `Enc(g^n)` for each pool entry, in pool order, before mixing.
    pub encrypted_pool: Vec<Ciphertext>,
    /// Filled by [`assign_trackers`], in roster order.
    pub voters: Vec<VoterSetupRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterSetupRow {
    pub voter_id: String,
    pub trapdoor_pk: GroupElement,
    pub signing_pk: GroupElement,
    /// The voter's row of the mixed pool; later paired with the ballot.
    pub encrypted_tracker: Ciphertext,
    pub beta: GroupElement,
}

impl SetupBundle {
    pub fn voter(&self, voter_id: &str) -> Option<&VoterSetupRow> {
        self.voters.iter().find(|v| v.voter_id == voter_id)
    }

    pub fn tracker_table(&self, ctx: &GroupCtx) -> TrackerTable {
        TrackerTable::new(ctx, self.tracker_pool.iter().copied()).expect("pool within range")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackerAssignment {
    pub voter_id: String,
    pub tracker: Tracker,
    pub beta: GroupElement,
    pub encrypted_tracker: Ciphertext,
}

/// `β = g^n · h^{Σ r_j}` and the per-Teller `α`-shares `g^{r_j}`.
pub fn commit_tracker(
    ctx: &GroupCtx,
    trapdoor_pk: &GroupElement,
    tracker: Tracker,
    r_shares: &[Scalar],
) -> Result<(GroupElement, Vec<GroupElement>), EngineError> {
    let factors = r_shares.iter().map(|r| ctx.pow(trapdoor_pk, r)).collect::<Vec<_>>();
    let beta = ctx.mul(&encode_tracker(ctx, tracker)?, &ctx.product(&factors));
    let alphas = r_shares.iter().map(|r| ctx.exp(r)).collect();
    Ok((beta, alphas))
}

/// Generates Teller key shares and per-voter randomness, samples the tracker
/// pool, and encrypts it under the joint key. Voter rows are added by
/// [`assign_trackers`].
pub fn setup_election<R: RngCore + CryptoRng>(
    cfg: &ElectionConfig,
    rng: &mut R,
) -> Result<(SetupBundle, Vec<TellerState>), EngineError> {
    let ctx = cfg.ctx();
    cfg.validate(&ctx)?;
    let tellers: Vec<TellerState> = (0..cfg.teller_count)
        .map(|j| TellerState::new(&ctx, j, cfg.voter_roster.iter().map(|v| v.voter_id.as_str()), rng))
        .collect();
    let teller_pks: Vec<GroupElement> = tellers.iter().map(|t| t.public_share.clone()).collect();
    let election_pk = ctx.product(&teller_pks);

    let bound = ctx.pool_bound();
    let mut tracker_pool: Vec<Tracker> =
        rand::seq::index::sample(rng, bound as usize, cfg.voter_roster.len())
            .into_iter()
            .map(|n| Tracker(n as u64))
            .collect();
    tracker_pool.sort_unstable();
    let encrypted_pool = tracker_pool
        .iter()
        .map(|&n| {
            let r = ctx.random_nonzero_scalar(rng);
            encrypt(&ctx, &election_pk, &encode_tracker(&ctx, n)?, &r).map_err(EngineError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let bundle = SetupBundle {
        election_id: cfg.election_id.clone(),
        group: cfg.group_profile,
        candidates: cfg.candidates.clone(),
        election_pk,
        teller_pks,
        tracker_pool,
        encrypted_pool,
        voters: Vec::new(),
    };
    Ok((bundle, tellers))
}

/// Assignment ceremony with Teller-chosen plans: each Teller permutes and
/// re-encrypts the encrypted pool, the quorum decrypts the result, and mixed
/// row `k` goes to roster entry `k`.
pub fn assign_trackers<R: RngCore + CryptoRng>(
    cfg: &ElectionConfig,
    bundle: &mut SetupBundle,
    tellers: &mut [TellerState],
    rng: &mut R,
) -> Result<Vec<TrackerAssignment>, EngineError> {
    let ctx = cfg.ctx();
    let rows = bundle.encrypted_pool.len();
    for t in tellers.iter_mut() {
        t.assignment_mix = Some(MixPlan::random(&ctx, rows, Ciphertext::WIDTH, rng));
    }
    assign_with_recorded_plans(cfg, bundle, tellers, rng)
}

/// Same ceremony with explicit plans, one per Teller.
pub fn assign_trackers_with_plans<R: RngCore + CryptoRng>(
    cfg: &ElectionConfig,
    bundle: &mut SetupBundle,
    tellers: &mut [TellerState],
    plans: Vec<MixPlan>,
    rng: &mut R,
) -> Result<Vec<TrackerAssignment>, EngineError> {
    if plans.len() != tellers.len() {
        return Err(EngineError::InvalidConfig("one mix plan per teller required".into()));
    }
    for (t, plan) in tellers.iter_mut().zip(plans) {
        t.assignment_mix = Some(plan);
    }
    assign_with_recorded_plans(cfg, bundle, tellers, rng)
}

fn assign_with_recorded_plans<R: RngCore + CryptoRng>(
    cfg: &ElectionConfig,
    bundle: &mut SetupBundle,
    tellers: &[TellerState],
    rng: &mut R,
) -> Result<Vec<TrackerAssignment>, EngineError> {
    let ctx = cfg.ctx();
    let plans: Vec<(u32, &MixPlan)> = tellers
        .iter()
        .map(|t| (t.teller_id, t.assignment_mix.as_ref().expect("plan recorded")))
        .collect();
    let mixed = mix_with_plans(&ctx, &bundle.election_pk, &bundle.encrypted_pool, &plans)?
        .pop()
        .unwrap_or_else(|| bundle.encrypted_pool.clone());

    let messages: Vec<PartialDecryptions> = collect_partial_decryptions(&ctx, &mixed, tellers, rng)?;
    let table = bundle.tracker_table(&ctx);
    let mut assignments = Vec::with_capacity(mixed.len());
    let mut voters = Vec::with_capacity(mixed.len());
    for (k, (voter, enc_tracker)) in cfg.voter_roster.iter().zip(&mixed).enumerate() {
        let shares: Vec<_> = messages.iter().map(|m| m.shares[k].clone()).collect();
        let plain = combine_shares(&ctx, enc_tracker, &shares, &bundle.teller_pks, k)?;
        let tracker = table.decode(&plain)?;
        let factors = tellers
            .iter()
            .map(|t| t.beta_factor(&ctx, &voter.voter_id, &voter.trapdoor_pk))
            .collect::<Result<Vec<_>, _>>()?;
        let beta = ctx.mul(&encode_tracker(&ctx, tracker)?, &ctx.product(&factors));
        assignments.push(TrackerAssignment {
            voter_id: voter.voter_id.clone(),
            tracker,
            beta: beta.clone(),
            encrypted_tracker: enc_tracker.clone(),
        });
        voters.push(VoterSetupRow {
            voter_id: voter.voter_id.clone(),
            trapdoor_pk: voter.trapdoor_pk.clone(),
            signing_pk: voter.signing_pk.clone(),
            encrypted_tracker: enc_tracker.clone(),
            beta,
        });
    }
    bundle.voters = voters;
    Ok(assignments)
}
