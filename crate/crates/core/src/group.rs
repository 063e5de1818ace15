//! Prime-order subgroups of `Z_p^*` and the scalar/element newtypes used by every
//! other module.
//!
//! All arithmetic goes through a [`GroupCtx`]; elements and scalars are plain
//! integers that only become meaningful relative to a context. Membership is
//! checked at the boundaries (deserialization, [`GroupCtx::element`]) and assumed
//! afterwards.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::encoding;
use crate::error::CryptoError;

/// 2048-bit MODP group (RFC 3526, group 14). `p = 2q + 1` with `p ≡ 7 (mod 8)`,
/// so 2 is a quadratic residue and generates the order-`q` subgroup.
const PROD_P_HEX: &str = concat!(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74",
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437",
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05",
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB",
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718",
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
);

/// 129-bit safe prime `p = 2q + 1`; large enough for realistic tracker pools,
/// small enough that scripted elections with dozens of voters run in well under
/// a second.
const DEV_P_HEX: &str = "10000000000000000000000000000bf47";

/// Default upper bound (exclusive) for tracker values in the larger profiles.
pub const DEFAULT_POOL_BOUND: u64 = 1 << 20;

/// Built-in group parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupProfile {
    /// `p = 23, q = 11, g = 2`. Every law can be checked exhaustively.
    Test,
    /// 129-bit safe-prime group for fast multi-voter harness runs.
    Dev,
    /// 2048-bit safe-prime group.
    Prod,
}

impl GroupProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupProfile::Test => "test",
            GroupProfile::Dev => "dev",
            GroupProfile::Prod => "prod",
        }
    }
}

impl fmt::Display for GroupProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupProfile {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "test" => Ok(GroupProfile::Test),
            "dev" => Ok(GroupProfile::Dev),
            "prod" => Ok(GroupProfile::Prod),
            other => Err(CryptoError::InvalidGroup(format!("unknown group profile `{other}`"))),
        }
    }
}

/// Exponent in `[0, q)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(pub(crate) BigUint);

/// Member of the order-`q` subgroup, represented by its residue mod `p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub(crate) BigUint);

macro_rules! integer_newtype {
    ($ty:ident) => {
        impl $ty {
            /// Wraps a raw integer without any range check.
            pub fn from_biguint_unchecked(value: BigUint) -> Self {
                $ty(value)
            }

            pub fn from_u64_unchecked(value: u64) -> Self {
                $ty(BigUint::from(value))
            }

            pub fn as_biguint(&self) -> &BigUint {
                &self.0
            }

            /// Minimal big-endian bytes (zero encodes as a single `0x00`).
            pub fn to_bytes(&self) -> Vec<u8> {
                encoding::minimal_be(&self.0)
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.to_bytes())
            }

            pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
                let bytes = hex::decode(s).map_err(|e| CryptoError::Decode(e.to_string()))?;
                encoding::parse_minimal_be(&bytes).map($ty)
            }

            /// Value as `u64`, if it fits.
            pub fn to_u64(&self) -> Option<u64> {
                let digits = self.0.to_u64_digits();
                match digits.as_slice() {
                    [] => Some(0),
                    [d] => Some(*d),
                    _ => None,
                }
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($ty), self.0)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                $ty::from_hex(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

integer_newtype!(Scalar);
integer_newtype!(GroupElement);

/// Group parameters: modulus `p`, subgroup order `q`, generator `g`.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupCtx {
    profile: Option<GroupProfile>,
    p: BigUint,
    q: BigUint,
    g: BigUint,
    pool_bound: u64,
}

impl fmt::Debug for GroupCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupCtx")
            .field("profile", &self.profile)
            .field("p_bits", &self.p.bits())
            .field("q_bits", &self.q.bits())
            .field("g", &self.g)
            .finish()
    }
}

impl GroupCtx {
    /// Builds and validates a custom group: `q` prime, `q | p - 1`, `g ≠ 1`,
    /// `g^q ≡ 1 (mod p)`.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, CryptoError> {
        if p <= BigUint::from(3u32) || !is_probable_prime(&p) {
            return Err(CryptoError::InvalidGroup("p is not prime".into()));
        }
        if !is_probable_prime(&q) {
            return Err(CryptoError::InvalidGroup("q is not prime".into()));
        }
        if !(&p - 1u32).is_multiple_of(&q) {
            return Err(CryptoError::InvalidGroup("q does not divide p - 1".into()));
        }
        if g.is_zero() || g.is_one() || g >= p {
            return Err(CryptoError::InvalidGroup("g must lie in (1, p)".into()));
        }
        if !g.modpow(&q, &p).is_one() {
            return Err(CryptoError::InvalidGroup("g does not have order q".into()));
        }
        let pool_bound = q.to_u64_digits().first().copied().filter(|_| q.bits() <= 64);
        let pool_bound = pool_bound.map_or(DEFAULT_POOL_BOUND, |q| q.min(DEFAULT_POOL_BOUND));
        Ok(GroupCtx { profile: None, p, q, g, pool_bound })
    }

    pub fn from_profile(profile: GroupProfile) -> Self {
        let (p, q, g, pool_bound) = match profile {
            GroupProfile::Test => (
                BigUint::from(23u32),
                BigUint::from(11u32),
                BigUint::from(2u32),
                11,
            ),
            GroupProfile::Dev => {
                let p = BigUint::parse_bytes(DEV_P_HEX.as_bytes(), 16).expect("valid constant");
                let q = (&p - 1u32) >> 1;
                (p, q, BigUint::from(4u32), DEFAULT_POOL_BOUND)
            }
            GroupProfile::Prod => {
                let p = BigUint::parse_bytes(PROD_P_HEX.as_bytes(), 16).expect("valid constant");
                let q = (&p - 1u32) >> 1;
                (p, q, BigUint::from(2u32), DEFAULT_POOL_BOUND)
            }
        };
        GroupCtx { profile: Some(profile), p, q, g, pool_bound }
    }

    pub fn test() -> Self {
        Self::from_profile(GroupProfile::Test)
    }

    pub fn profile(&self) -> Option<GroupProfile> {
        self.profile
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// Exclusive upper bound for tracker values in this group.
    pub fn pool_bound(&self) -> u64 {
        self.pool_bound
    }

    pub fn generator(&self) -> GroupElement {
        GroupElement(self.g.clone())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(BigUint::one())
    }

    pub fn is_member(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.p && x.modpow(&self.q, &self.p).is_one()
    }

    /// Validated element constructor.
    pub fn element(&self, x: BigUint) -> Result<GroupElement, CryptoError> {
        if self.is_member(&x) {
            Ok(GroupElement(x))
        } else {
            Err(CryptoError::NotInSubgroup)
        }
    }

    pub fn element_u64(&self, x: u64) -> Result<GroupElement, CryptoError> {
        self.element(BigUint::from(x))
    }

    pub fn check_element(&self, e: &GroupElement) -> Result<(), CryptoError> {
        if self.is_member(&e.0) {
            Ok(())
        } else {
            Err(CryptoError::NotInSubgroup)
        }
    }

    /// Validated scalar constructor (`x < q`).
    pub fn scalar(&self, x: BigUint) -> Result<Scalar, CryptoError> {
        if x < self.q {
            Ok(Scalar(x))
        } else {
            Err(CryptoError::ScalarOutOfRange)
        }
    }

    pub fn scalar_u64(&self, x: u64) -> Result<Scalar, CryptoError> {
        self.scalar(BigUint::from(x))
    }

    pub fn is_canonical_scalar(&self, s: &Scalar) -> bool {
        s.0 < self.q
    }

    pub fn reduce(&self, x: &BigUint) -> Scalar {
        Scalar(x % &self.q)
    }

    /// Uniform scalar in `[0, q)`.
    pub fn random_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_below(&self.q))
    }

    /// Uniform scalar in `[1, q)`.
    pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_range(&BigUint::one(), &self.q))
    }

    /// `g^e`.
    pub fn exp(&self, e: &Scalar) -> GroupElement {
        GroupElement(self.g.modpow(&e.0, &self.p))
    }

    /// `base^e`.
    pub fn pow(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        GroupElement(base.0.modpow(&e.0, &self.p))
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement((&a.0 * &b.0) % &self.p)
    }

    /// Inverse in the subgroup, `a^(q-1)`.
    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        GroupElement(a.0.modpow(&(&self.q - 1u32), &self.p))
    }

    /// `a / b`.
    pub fn div(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.mul(a, &self.inv(b))
    }

    pub fn product<'a, I>(&self, items: I) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        items.into_iter().fold(self.identity(), |acc, x| self.mul(&acc, x))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.q)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.q)
    }

    pub fn scalar_sum<'a, I>(&self, items: I) -> Scalar
    where
        I: IntoIterator<Item = &'a Scalar>,
    {
        items.into_iter().fold(Scalar(BigUint::zero()), |acc, x| self.scalar_add(&acc, x))
    }

    /// Multiplicative inverse mod `q`; `None` for zero.
    pub fn scalar_inv(&self, a: &Scalar) -> Option<Scalar> {
        if (&a.0 % &self.q).is_zero() {
            return None;
        }
        // q is prime: a^(q-2) = a^-1
        Some(Scalar(a.0.modpow(&(&self.q - 2u32), &self.q)))
    }
}

/// Miller–Rabin with fixed small-prime bases plus a handful of derived ones.
/// Deterministic for all inputs below 3.3·10^24 and overwhelmingly reliable
/// beyond that.
pub(crate) fn is_probable_prime(n: &BigUint) -> bool {
    const SMALL: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &sp in &SMALL {
        let sp = BigUint::from(sp);
        if n == &sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let shift = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> shift;
    let extra = (0..8u32).map(|i| BigUint::from(43u32 + 2 * i) + (n >> 3u32));
    let bases = SMALL.iter().map(|&b| BigUint::from(b)).chain(extra);
    'outer: for a in bases {
        let a = &a % n;
        if a < two {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..shift {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'outer;
            }
        }
        return false;
    }
    true
}
