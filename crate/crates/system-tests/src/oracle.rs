//! Arithmetic for the order-11 subgroup of `Z*_23` written with plain `u64`,
//! independent of the core's big-integer code. Used to decrypt and take
//! discrete logs when checking the system from outside.

use selene_core::GroupElement;

pub const P: u64 = 23;
pub const Q: u64 = 11;
pub const G: u64 = 2;

pub fn pow(base: u64, exp: u64) -> u64 {
    let (mut acc, mut b, mut e) = (1u64, base % P, exp);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    acc
}

pub fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

pub fn mul(a: u64, b: u64) -> u64 {
    a * b % P
}

/// `β / α^x`.
pub fn decrypt(x: u64, alpha: u64, beta: u64) -> u64 {
    mul(beta, inv(pow(alpha, x)))
}

/// `n` with `g^n = h`, if `h` is in the subgroup.
pub fn dlog(h: u64) -> Option<u64> {
    (0..Q).find(|&n| pow(G, n) == h)
}

/// The eleven subgroup elements, `g^0..g^10`.
pub fn elements() -> Vec<u64> {
    (0..Q).map(|n| pow(G, n)).collect()
}

pub fn value(e: &GroupElement) -> u64 {
    e.to_u64().expect("small-group element fits in u64")
}

/// Candidate index `k` is encoded as `g^(k+1)`.
pub fn candidate_index(m: u64) -> Option<usize> {
    dlog(m).and_then(|n| n.checked_sub(1)).map(|k| k as usize)
}
