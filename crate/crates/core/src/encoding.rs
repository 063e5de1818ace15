//! Canonical byte encoding shared by hashing, signatures and Teller messages.
//!
//! Every field is written as a 4-byte big-endian length followed by its bytes.
//! Integers use their minimal big-endian form, with zero written as a single
//! `0x00` byte. Decoding rejects non-minimal integers so each value has exactly
//! one encoding.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::error::CryptoError;
use crate::group::{GroupCtx, GroupElement, Scalar};

pub fn minimal_be(x: &BigUint) -> Vec<u8> {
    x.to_bytes_be()
}

pub fn parse_minimal_be(bytes: &[u8]) -> Result<BigUint, CryptoError> {
    match bytes {
        [] => Err(CryptoError::Decode("empty integer".into())),
        [0] => Ok(BigUint::default()),
        [0, ..] => Err(CryptoError::Decode("non-minimal integer encoding".into())),
        _ => Ok(BigUint::from_bytes_be(bytes)),
    }
}

#[derive(Debug, Default, Clone)]
pub struct CanonicalWriter {
    buf: Vec<u8>,
}

impl CanonicalWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, data: &[u8]) -> &mut Self {
        let len = u32::try_from(data.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(data);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn uint(&mut self, x: &BigUint) -> &mut Self {
        self.bytes(&minimal_be(x))
    }

    pub fn u64(&mut self, x: u64) -> &mut Self {
        self.uint(&BigUint::from(x))
    }

    pub fn element(&mut self, e: &GroupElement) -> &mut Self {
        self.uint(e.as_biguint())
    }

    pub fn scalar(&mut self, s: &Scalar) -> &mut Self {
        self.uint(s.as_biguint())
    }

    pub fn put<T: Canonical + ?Sized>(&mut self, value: &T) -> &mut Self {
        value.write_canonical(self);
        self
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.buf
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(&self.buf).into()
    }

    /// SHA-256 of the written bytes, read as a big-endian integer and reduced mod `q`.
    pub fn challenge(&self, ctx: &GroupCtx) -> Scalar {
        ctx.reduce(&BigUint::from_bytes_be(&self.digest()))
    }
}

#[derive(Debug)]
pub struct CanonicalReader<'a> {
    data: &'a [u8],
}

impl<'a> CanonicalReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        CanonicalReader { data }
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CryptoError> {
        if self.data.len() < 4 {
            return Err(CryptoError::Decode("truncated length prefix".into()));
        }
        let (len, rest) = self.data.split_at(4);
        let len = u32::from_be_bytes(len.try_into().expect("4 bytes")) as usize;
        if rest.len() < len {
            return Err(CryptoError::Decode("truncated field".into()));
        }
        let (field, rest) = rest.split_at(len);
        self.data = rest;
        Ok(field)
    }

    pub fn string(&mut self) -> Result<String, CryptoError> {
        let raw = self.bytes()?;
        String::from_utf8(raw.to_vec()).map_err(|e| CryptoError::Decode(e.to_string()))
    }

    pub fn uint(&mut self) -> Result<BigUint, CryptoError> {
        parse_minimal_be(self.bytes()?)
    }

    pub fn u64(&mut self) -> Result<u64, CryptoError> {
        let x = self.uint()?;
        u64::try_from(x).map_err(|_| CryptoError::Decode("integer exceeds u64".into()))
    }

    /// Reads an element and checks subgroup membership.
    pub fn element(&mut self, ctx: &GroupCtx) -> Result<GroupElement, CryptoError> {
        ctx.element(self.uint()?)
    }

    /// Reads a scalar and checks it is below `q`.
    pub fn scalar(&mut self, ctx: &GroupCtx) -> Result<Scalar, CryptoError> {
        ctx.scalar(self.uint()?)
    }

    pub fn get<T: Canonical>(&mut self, ctx: &GroupCtx) -> Result<T, CryptoError> {
        T::read_canonical(self, ctx)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn finish(self) -> Result<(), CryptoError> {
        if self.data.is_empty() {
            Ok(())
        } else {
            Err(CryptoError::Decode("trailing bytes".into()))
        }
    }
}

/// Types with a canonical byte form. Decoding validates every group element
/// and scalar against the context.
pub trait Canonical: Sized {
    fn write_canonical(&self, w: &mut CanonicalWriter);

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError>;

    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut w = CanonicalWriter::new();
        self.write_canonical(&mut w);
        w.into_bytes()
    }

    fn from_canonical_bytes(bytes: &[u8], ctx: &GroupCtx) -> Result<Self, CryptoError> {
        let mut r = CanonicalReader::new(bytes);
        let value = Self::read_canonical(&mut r, ctx)?;
        r.finish()?;
        Ok(value)
    }
}

impl<T: Canonical> Canonical for Vec<T> {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.u64(self.len() as u64);
        for item in self {
            item.write_canonical(w);
        }
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        let len = r.u64()?;
        let mut out = Vec::new();
        for _ in 0..len {
            out.push(T::read_canonical(r, ctx)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_prefixed_layout() {
        let mut w = CanonicalWriter::new();
        w.u64(0).u64(0x0102).str("ab");
        assert_eq!(
            w.as_slice(),
            &[0, 0, 0, 1, 0, 0, 0, 0, 2, 1, 2, 0, 0, 0, 2, b'a', b'b']
        );
        let mut r = CanonicalReader::new(w.as_slice());
        assert_eq!(r.u64().unwrap(), 0);
        assert_eq!(r.u64().unwrap(), 0x0102);
        assert_eq!(r.string().unwrap(), "ab");
        r.finish().unwrap();
    }

    #[test]
    fn rejects_non_minimal_and_truncated() {
        assert!(parse_minimal_be(&[0, 1]).is_err());
        assert!(parse_minimal_be(&[]).is_err());
        let mut r = CanonicalReader::new(&[0, 0, 0, 5, 1]);
        assert!(r.bytes().is_err());
        let r = CanonicalReader::new(&[0]);
        assert!(r.finish().is_err());
    }
}
