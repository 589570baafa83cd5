//! Text key and ciphertext files.
//!
//! Keys:
//!
//! ```text
//! QCMC1 <CLASSIC|SYSTEMATIC> <public|private>
//! n0=4 p=4096 dv=15 t=46 [seed=<64 hex digits>]
//! W=3,2,0,0,0,3,2,0,...
//! <one hex polynomial per line>
//! ```
//!
//! A private key lists the blocks of H, then Q, then S (classic mode only), each
//! row-major. A public key lists every block of G', or only its right-hand
//! column in systematic mode. Polynomials use the little-endian byte packing of
//! [`BitPolynomial::to_hex`].
//!
//! Ciphertexts carry the message split into `k`-bit blocks:
//!
//! ```text
//! QCCT1
//! n=16384 blocks=2 bytes=1700
//! <hex of one n-bit ciphertext per line>
//! ```

use rand::Rng;

use crate::bits;
use crate::crypto::{decrypt, encrypt, KeyMode, PrivateKey, PublicKey};
use crate::decoder::DecoderConfig;
use crate::design::{ParityCheck, SystemParams};
use crate::error::{Error, Result};
use crate::gf2::{BitPolynomial, QcMatrix};
use crate::rng::Seed;

const KEY_MAGIC: &str = "QCMC1";
const CT_MAGIC: &str = "QCCT1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyFile {
    Public(PublicKey),
    Private(PrivateKey),
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn header(mode: KeyMode, kind: &str, params: &SystemParams, seed: Option<&Seed>) -> String {
    let mut out = format!(
        "{KEY_MAGIC} {mode} {kind}\nn0={} p={} dv={} t={}",
        params.n0, params.p, params.d_v, params.t
    );
    if let Some(seed) = seed {
        out.push_str(&format!(" seed={}", seed.to_hex()));
    }
    let w: Vec<String> = params.w.iter().flatten().map(usize::to_string).collect();
    out.push_str(&format!("\nW={}\n", w.join(",")));
    out
}

fn push_blocks<'a>(out: &mut String, blocks: impl IntoIterator<Item = &'a BitPolynomial>) {
    for b in blocks {
        out.push_str(&b.to_hex());
        out.push('\n');
    }
}

pub fn write_public(pk: &PublicKey) -> String {
    let mut out = header(pk.mode, "public", &pk.params, None);
    push_blocks(&mut out, pk.payload_blocks());
    out
}

pub fn write_private(sk: &PrivateKey) -> String {
    let mut out = header(sk.mode, "private", &sk.params, Some(&sk.seed));
    let h: Vec<BitPolynomial> = sk.h.blocks().iter().map(|b| b.to_dense()).collect();
    push_blocks(&mut out, &h);
    push_blocks(&mut out, sk.q.blocks());
    if let Some(s) = &sk.s {
        push_blocks(&mut out, s.blocks());
    }
    out
}

struct Parsed<'a> {
    mode: KeyMode,
    private: bool,
    params: SystemParams,
    seed: Option<Seed>,
    payload: Vec<&'a str>,
}

fn parse_fields(line: &str) -> Result<Vec<(&str, &str)>> {
    line.split_whitespace()
        .map(|f| f.split_once('=').ok_or_else(|| fmt_err(format!("expected key=value, got {f:?}"))))
        .collect()
}

fn field<T: std::str::FromStr>(fields: &[(&str, &str)], name: &str) -> Result<T> {
    let (_, v) = fields
        .iter()
        .find(|(k, _)| *k == name)
        .ok_or_else(|| fmt_err(format!("missing field {name}")))?;
    v.parse().map_err(|_| fmt_err(format!("bad value for {name}: {v:?}")))
}

fn parse_key(text: &str) -> Result<Parsed<'_>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let magic = lines.next().ok_or_else(|| fmt_err("empty key file"))?;
    let tokens: Vec<&str> = magic.split_whitespace().collect();
    if tokens.first() != Some(&KEY_MAGIC) || tokens.len() != 3 {
        return Err(fmt_err(format!("expected '{KEY_MAGIC} <mode> <public|private>', got {magic:?}")));
    }
    let mode: KeyMode = tokens[1].parse().map_err(|_| fmt_err(format!("unknown mode {:?}", tokens[1])))?;
    let private = match tokens[2] {
        "public" => false,
        "private" => true,
        other => return Err(fmt_err(format!("unknown key kind {other:?}"))),
    };
    let fields = parse_fields(lines.next().ok_or_else(|| fmt_err("missing parameter line"))?)?;
    let n0: usize = field(&fields, "n0")?;
    let p: usize = field(&fields, "p")?;
    let d_v: usize = field(&fields, "dv")?;
    let t: usize = field(&fields, "t")?;
    let seed = if private { Some(field::<String>(&fields, "seed")?.parse::<Seed>()?) } else { None };

    let w_line = lines.next().ok_or_else(|| fmt_err("missing W line"))?;
    let w_vals = w_line.strip_prefix("W=").ok_or_else(|| fmt_err("expected W= line"))?;
    let flat: Vec<usize> = w_vals
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| fmt_err(format!("bad W entry {v:?}"))))
        .collect::<Result<_>>()?;
    if n0 == 0 || flat.len() != n0 * n0 {
        return Err(fmt_err(format!("W needs {} entries, got {}", n0 * n0, flat.len())));
    }
    let w = flat.chunks(n0).map(<[usize]>::to_vec).collect();
    let params = SystemParams::new(n0, p, d_v, w, t).map_err(|e| fmt_err(e.to_string()))?;
    Ok(Parsed { mode, private, params, seed, payload: lines.collect() })
}

fn take_blocks(payload: &mut std::slice::Iter<'_, &str>, p: usize, count: usize) -> Result<Vec<BitPolynomial>> {
    (0..count)
        .map(|_| {
            let line = payload.next().ok_or_else(|| fmt_err("key file is truncated"))?;
            BitPolynomial::from_hex(p, line).map_err(|e| fmt_err(e.to_string()))
        })
        .collect()
}

pub fn read_key(text: &str) -> Result<KeyFile> {
    let parsed = parse_key(text)?;
    let (n0, p) = (parsed.params.n0, parsed.params.p);
    let k0 = n0 - 1;
    let mut payload = parsed.payload.iter();
    let key = if parsed.private {
        let h_blocks = take_blocks(&mut payload, p, n0)?;
        let h = ParityCheck::from_blocks(parsed.params.clone(), h_blocks.iter().map(BitPolynomial::to_sparse).collect())
            .map_err(|e| fmt_err(e.to_string()))?;
        let q = QcMatrix::new(n0, n0, take_blocks(&mut payload, p, n0 * n0)?)?;
        let s = match parsed.mode {
            KeyMode::Classic => Some(QcMatrix::new(k0, k0, take_blocks(&mut payload, p, k0 * k0)?)?),
            KeyMode::Systematic => None,
        };
        let seed = parsed.seed.expect("private keys carry a seed");
        KeyFile::Private(PrivateKey::from_parts(parsed.params, parsed.mode, h, s, q, seed)?)
    } else {
        let gp = match parsed.mode {
            KeyMode::Classic => QcMatrix::new(k0, n0, take_blocks(&mut payload, p, k0 * n0)?)?,
            KeyMode::Systematic => {
                let right = take_blocks(&mut payload, p, k0)?;
                let mut gp = QcMatrix::zero(k0, n0, p);
                for (i, b) in right.into_iter().enumerate() {
                    gp.set_block(i, i, BitPolynomial::one(p));
                    gp.set_block(i, n0 - 1, b);
                }
                gp
            }
        };
        KeyFile::Public(PublicKey { params: parsed.params, mode: parsed.mode, gp })
    };
    if payload.next().is_some() {
        return Err(fmt_err("trailing data after key blocks"));
    }
    Ok(key)
}

pub fn read_public(text: &str) -> Result<PublicKey> {
    match read_key(text)? {
        KeyFile::Public(pk) => Ok(pk),
        KeyFile::Private(_) => Err(fmt_err("expected a public key, found a private key")),
    }
}

pub fn read_private(text: &str) -> Result<PrivateKey> {
    match read_key(text)? {
        KeyFile::Private(sk) => Ok(sk),
        KeyFile::Public(_) => Err(fmt_err("expected a private key, found a public key")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub n: usize,
    /// Plaintext length in bytes.
    pub bytes: usize,
    pub blocks: Vec<Vec<u8>>,
}

impl Ciphertext {
    pub fn to_text(&self) -> String {
        let mut out = format!("{CT_MAGIC}\nn={} blocks={} bytes={}\n", self.n, self.blocks.len(), self.bytes);
        for b in &self.blocks {
            out.push_str(&bits::to_hex(b));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(CT_MAGIC) {
            return Err(fmt_err(format!("missing {CT_MAGIC} header")));
        }
        let fields = parse_fields(lines.next().ok_or_else(|| fmt_err("missing ciphertext header line"))?)?;
        let n: usize = field(&fields, "n")?;
        let count: usize = field(&fields, "blocks")?;
        let bytes: usize = field(&fields, "bytes")?;
        let blocks: Vec<Vec<u8>> = lines.map(|l| bits::from_hex(l, n).map_err(|e| fmt_err(e.to_string()))).collect::<Result<_>>()?;
        if blocks.len() != count {
            return Err(fmt_err(format!("header announces {count} blocks, found {}", blocks.len())));
        }
        Ok(Ciphertext { n, bytes, blocks })
    }
}

/// Splits `message` into zero-padded `k`-bit blocks and encrypts each one.
pub fn encrypt_bytes<R: Rng + ?Sized>(pk: &PublicKey, message: &[u8], rng: &mut R) -> Result<Ciphertext> {
    let k = pk.k();
    let mut bitstream: Vec<u8> = message.iter().flat_map(|&byte| (0..8).map(move |i| (byte >> i) & 1)).collect();
    let count = bitstream.len().div_ceil(k).max(1);
    bitstream.resize(count * k, 0);
    let blocks = bitstream.chunks(k).map(|u| encrypt(pk, u, rng)).collect::<Result<_>>()?;
    Ok(Ciphertext { n: pk.n(), bytes: message.len(), blocks })
}

pub fn decrypt_bytes(sk: &PrivateKey, ct: &Ciphertext, cfg: &DecoderConfig) -> Result<Vec<u8>> {
    if ct.n != sk.params.n() {
        return Err(fmt_err(format!("ciphertext length {} does not match key length {}", ct.n, sk.params.n())));
    }
    let mut bitstream = Vec::with_capacity(ct.blocks.len() * sk.params.k());
    for c in &ct.blocks {
        bitstream.extend(decrypt(sk, c, cfg)?);
    }
    if bitstream.len() < ct.bytes * 8 {
        return Err(fmt_err("ciphertext holds fewer bits than announced"));
    }
    if bitstream[ct.bytes * 8..].iter().any(|&b| b != 0) {
        return Err(fmt_err("nonzero padding after the announced message length"));
    }
    Ok(bits::pack_le(&bitstream[..ct.bytes * 8]))
}
