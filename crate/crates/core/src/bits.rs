//! Helpers for unpacked bit vectors (`u8` values 0/1) and their packed
//! little-endian encoding: bit `i` lives in byte `i / 8` at position `i % 8`.

use crate::error::{Error, Result};

pub fn weight(v: &[u8]) -> usize {
    v.iter().filter(|&&b| b != 0).count()
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn xor_assign(a: &mut [u8], b: &[u8]) {
    debug_assert_eq!(a.len(), b.len());
    a.iter_mut().zip(b).for_each(|(x, y)| *x ^= y);
}

pub fn pack_le(v: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; v.len().div_ceil(8)];
    for (i, &b) in v.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

/// Inverse of [`pack_le`]. Padding bits past `len` must be zero.
pub fn unpack_le(bytes: &[u8], len: usize) -> Result<Vec<u8>> {
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Format(format!(
            "expected {} bytes for {} bits, got {}",
            len.div_ceil(8),
            len,
            bytes.len()
        )));
    }
    if len % 8 != 0 && bytes[len / 8] >> (len % 8) != 0 {
        return Err(Error::Format("nonzero padding bits".into()));
    }
    Ok((0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect())
}

pub fn to_hex(v: &[u8]) -> String {
    hex::encode(pack_le(v))
}

pub fn from_hex(s: &str, len: usize) -> Result<Vec<u8>> {
    let bytes = hex::decode(s.trim()).map_err(|e| Error::Format(format!("bad hex: {e}")))?;
    unpack_le(&bytes, len)
}
