//! Tracking numbers: exponential encoding, pool-bounded decoding, the
//! trapdoor-commitment opening, and fake openings for coerced voters.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elgamal::SecretKey;
use crate::error::CryptoError;
use crate::group::{GroupCtx, GroupElement, Scalar};

const CROCKFORD: &[u8; 32] = b"0123456789ABCDEFGHJKMNPQRSTVWXYZ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tracker(pub u64);

impl Tracker {
    pub fn value(&self) -> u64 {
        self.0
    }

    pub fn display(&self) -> String {
        tracker_display(*self)
    }
}

impl fmt::Display for Tracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&tracker_display(*self))
    }
}

impl FromStr for Tracker {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tracker_display(s)
    }
}

/// Crockford base-32 rendering, most significant digit first, no padding.
pub fn tracker_display(n: Tracker) -> String {
    let mut value = n.0;
    let mut digits = Vec::new();
    loop {
        digits.push(CROCKFORD[(value % 32) as usize]);
        value /= 32;
        if value == 0 {
            break;
        }
    }
    digits.reverse();
    String::from_utf8(digits).expect("ascii alphabet")
}

/// Inverse of [`tracker_display`]. Case-insensitive; accepts the usual Crockford
/// aliases (`I`/`L` for 1, `O` for 0).
pub fn parse_tracker_display(s: &str) -> Result<Tracker, CryptoError> {
    let bad = || CryptoError::BadTrackerDisplay(s.to_owned());
    if s.is_empty() {
        return Err(bad());
    }
    let mut value: u64 = 0;
    for ch in s.chars() {
        let ch = match ch.to_ascii_uppercase() {
            'I' | 'L' => '1',
            'O' => '0',
            c => c,
        };
        let digit = CROCKFORD.iter().position(|&c| c as char == ch).ok_or_else(bad)? as u64;
        value = value.checked_mul(32).and_then(|v| v.checked_add(digit)).ok_or_else(bad)?;
    }
    Ok(Tracker(value))
}

/// `g^n`.
pub fn encode_tracker(ctx: &GroupCtx, n: Tracker) -> Result<GroupElement, CryptoError> {
    let exponent = ctx.scalar_u64(n.0).map_err(|_| CryptoError::TrackerOutOfRange(n.0))?;
    Ok(ctx.exp(&exponent))
}

/// Precomputed `g^n → n` lookup over a finite tracker pool.
#[derive(Debug, Clone)]
pub struct TrackerTable {
    by_element: HashMap<GroupElement, Tracker>,
}

impl TrackerTable {
    pub fn new<I>(ctx: &GroupCtx, pool: I) -> Result<Self, CryptoError>
    where
        I: IntoIterator<Item = Tracker>,
    {
        let mut by_element = HashMap::new();
        for n in pool {
            by_element.insert(encode_tracker(ctx, n)?, n);
        }
        Ok(TrackerTable { by_element })
    }

    pub fn decode(&self, e: &GroupElement) -> Result<Tracker, CryptoError> {
        self.by_element.get(e).copied().ok_or(CryptoError::UnknownTracker)
    }

    pub fn len(&self) -> usize {
        self.by_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_element.is_empty()
    }
}

pub fn decode_tracker(
    ctx: &GroupCtx,
    e: &GroupElement,
    pool: &[Tracker],
) -> Result<Tracker, CryptoError> {
    TrackerTable::new(ctx, pool.iter().copied())?.decode(e)
}

/// Opens the commitment `β` with `α` under the voter's trapdoor key:
/// decodes `β / α^sk` against the pool.
pub fn open_commitment(
    ctx: &GroupCtx,
    beta: &GroupElement,
    alpha: &GroupElement,
    trapdoor: &SecretKey,
    pool: &TrackerTable,
) -> Result<Tracker, CryptoError> {
    let encoded = ctx.div(beta, &ctx.pow(alpha, trapdoor.expose()));
    pool.decode(&encoded)
}

/// `α' = (β / g^fake)^(sk⁻¹)`, which opens `β` to `fake` under the same key.
pub fn fake_alpha(
    ctx: &GroupCtx,
    beta: &GroupElement,
    fake: Tracker,
    trapdoor: &SecretKey,
) -> Result<GroupElement, CryptoError> {
    ctx.check_element(beta)?;
    let blinded = ctx.div(beta, &encode_tracker(ctx, fake)?);
    let inverse: Scalar = ctx.scalar_inv(trapdoor.expose()).ok_or(CryptoError::ZeroSecretKey)?;
    Ok(ctx.pow(&blinded, &inverse))
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

    fn sk(x: u64) -> SecretKey {
        SecretKey::from_u64(&ctx(), x).unwrap()
    }

    fn table(pool: &[u64]) -> TrackerTable {
        TrackerTable::new(&ctx(), pool.iter().map(|&n| Tracker(n))).unwrap()
    }

    /// Digit-by-digit base-32 conversion written independently of the encoder.
    fn base32_oracle(mut n: u64) -> String {
        let alphabet: Vec<char> = "0123456789ABCDEFGHJKMNPQRSTVWXYZ".chars().collect();
        if n == 0 {
            return "0".into();
        }
        let mut out = String::new();
        while n > 0 {
            out.insert(0, alphabet[(n % 32) as usize]);
            n /= 32;
        }
        out
    }

    #[test]
    fn display_fixtures() {
        assert_eq!(tracker_display(Tracker(0)), "0");
        assert_eq!(tracker_display(Tracker(31)), "Z");
        assert_eq!(tracker_display(Tracker(1234)), "16J");
        assert_eq!(base32_oracle(1234), "16J");
        for n in [1, 32, 33, 1023, 1024, (1 << 20) - 1, u32::MAX as u64] {
            assert_eq!(tracker_display(Tracker(n)), base32_oracle(n));
        }
    }

    #[test]
    fn parse_accepts_aliases() {
        assert_eq!(parse_tracker_display("16j").unwrap(), Tracker(1234));
        assert_eq!(parse_tracker_display("lO").unwrap(), Tracker(32));
        assert!(parse_tracker_display("").is_err());
        assert!(parse_tracker_display("U").is_err());
        assert!(parse_tracker_display("ZZZZZZZZZZZZZZ").is_err());
    }

    #[test]
    fn encode_decode_fixtures() {
        let ctx = ctx();
        assert_eq!(encode_tracker(&ctx, Tracker(0)).unwrap(), el(1));
        assert_eq!(decode_tracker(&ctx, &el(1), &[Tracker(0)]).unwrap(), Tracker(0));
        assert_eq!(encode_tracker(&ctx, Tracker(2)).unwrap(), el(4));
        let pool = [Tracker(2), Tracker(7)];
        assert_eq!(decode_tracker(&ctx, &el(4), &pool).unwrap(), Tracker(2));
        assert_eq!(decode_tracker(&ctx, &el(6), &pool).unwrap_err(), CryptoError::UnknownTracker);
        assert_eq!(
            encode_tracker(&ctx, Tracker(11)).unwrap_err(),
            CryptoError::TrackerOutOfRange(11)
        );
    }

    #[test]
    fn open_commitment_fixtures() {
        let ctx = ctx();
        let pool = table(&[2, 7]);
        assert_eq!(open_commitment(&ctx, &el(18), &el(9), &sk(3), &pool).unwrap(), Tracker(2));
        // α = 1 leaves β = g^n unblinded
        assert_eq!(open_commitment(&ctx, &el(13), &el(1), &sk(3), &pool).unwrap(), Tracker(7));
        // 18 / 9^4 = 18 / 6 = 3 = 2^8, and 8 is not in the pool
        assert_eq!(
            open_commitment(&ctx, &el(18), &el(9), &sk(4), &pool).unwrap_err(),
            CryptoError::UnknownTracker
        );
    }

    #[test]
    fn fake_alpha_fixtures() {
        let ctx = ctx();
        let forged = fake_alpha(&ctx, &el(18), Tracker(7), &sk(3)).unwrap();
        assert_eq!(forged, el(13));
        assert_eq!(fake_alpha(&ctx, &el(18), Tracker(2), &sk(3)).unwrap(), el(9));
        let pool = table(&[2, 7]);
        assert_eq!(open_commitment(&ctx, &el(18), &forged, &sk(3), &pool).unwrap(), Tracker(7));
    }
}
