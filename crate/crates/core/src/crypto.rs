//! McEliece-style encryption with a QC-LDPC/MDPC private code and a sparse
//! transformation matrix Q.
//!
//! The public generator is `G' = S⁻¹·G·Q⁻¹`, so the public code admits the
//! parity-check matrix `H' = H·Qᵀ` of column weight `m·d_v`. Decryption
//! computes `c·Q = u·S⁻¹·G + e·Q`, decodes the `e·Q` pattern (at most
//! `m_max·t` errors) with the private decoder and unscrambles the
//! information part.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::bits;
use crate::decoder::{decode, DecoderConfig};
use crate::design::{pattern_parity_invertible, systematic_generator, Construction, ParityCheck, SystemParams};
use crate::error::{Error, Result};
use crate::gf2::{BitPolynomial, QcMatrix};
use crate::rng::{sample_error, sample_support, Seed, Stream};

/// Draws allowed for Q, S and the systematic reduction before giving up.
pub const KEYGEN_BUDGET: usize = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KeyMode {
    #[default]
    Classic,
    /// Public key `[I | P']`; S is dropped, and Q too when m = 1.
    Systematic,
}

impl FromStr for KeyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(KeyMode::Classic),
            "systematic" => Ok(KeyMode::Systematic),
            _ => Err(Error::param(format!("unknown key mode {s:?} (expected classic or systematic)"))),
        }
    }
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::Classic => "CLASSIC",
            KeyMode::Systematic => "SYSTEMATIC",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateKey {
    pub params: SystemParams,
    pub mode: KeyMode,
    pub h: ParityCheck,
    /// `k0 × k0` scrambler; absent in systematic mode.
    pub s: Option<QcMatrix>,
    pub s_inv: Option<QcMatrix>,
    pub q: QcMatrix,
    pub q_inv: QcMatrix,
    /// Cached public generator, used for the re-encoding check.
    pub gp: QcMatrix,
    pub seed: Seed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub params: SystemParams,
    pub mode: KeyMode,
    /// `G'` as a `(n0-1) × n0` block matrix.
    pub gp: QcMatrix,
}

impl PublicKey {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    /// Circulant blocks that actually need storing: all of `G'`, or only the
    /// right-hand column in systematic form.
    pub fn payload_blocks(&self) -> Vec<&BitPolynomial> {
        let (rows, cols) = (self.gp.rows(), self.gp.cols());
        match self.mode {
            KeyMode::Classic => self.gp.blocks().iter().collect(),
            KeyMode::Systematic => (0..rows).map(|i| self.gp.block(i, cols - 1)).collect(),
        }
    }

    /// Size of the stored payload in bits.
    pub fn payload_bits(&self) -> usize {
        self.payload_blocks().len() * self.params.p
    }

    /// `H' = H·Qᵀ` for a given private key, as a `1 × n0` block matrix.
    pub fn public_parity_check(sk: &PrivateKey) -> Result<QcMatrix> {
        sk.h.to_qc().mul(&sk.q.transpose())
    }
}

fn random_dense<R: Rng + ?Sized>(rng: &mut R, p: usize) -> BitPolynomial {
    let bits: Vec<u8> = (0..p).map(|_| rng.gen::<u8>() & 1).collect();
    BitPolynomial::from_bits(&bits)
}

/// Random Q with block weights `W`, redrawn until invertible.
pub fn sample_q<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<QcMatrix> {
    params.validate()?;
    if !pattern_parity_invertible(&params.w) {
        return Err(Error::param("W mod 2 is singular, so no Q with these weights is invertible"));
    }
    let (n0, p) = (params.n0, params.p);
    for _ in 0..KEYGEN_BUDGET {
        let mut blocks = Vec::with_capacity(n0 * n0);
        for row in &params.w {
            for &w in row {
                blocks.push(BitPolynomial::from_support(p, &sample_support(rng, p, w))?);
            }
        }
        let q = QcMatrix::new(n0, n0, blocks)?;
        if q.invert().is_ok() {
            return Ok(q);
        }
    }
    Err(Error::KeygenFailure(format!("no invertible Q with W={:?} after {KEYGEN_BUDGET} draws", params.w)))
}

/// Dense random invertible `k × k` block matrix.
pub fn sample_scrambler<R: Rng + ?Sized>(k0: usize, p: usize, rng: &mut R) -> Result<QcMatrix> {
    for _ in 0..KEYGEN_BUDGET {
        let s = QcMatrix::new(k0, k0, (0..k0 * k0).map(|_| random_dense(rng, p)).collect())?;
        if s.invert().is_ok() {
            return Ok(s);
        }
    }
    Err(Error::KeygenFailure(format!("no invertible scrambler after {KEYGEN_BUDGET} draws")))
}

pub fn keygen(params: &SystemParams, seed: &Seed, mode: KeyMode) -> Result<(PrivateKey, PublicKey)> {
    keygen_with(params, seed, mode, Construction::Random)
}

pub fn keygen_with(
    params: &SystemParams,
    seed: &Seed,
    mode: KeyMode,
    construction: Construction,
) -> Result<(PrivateKey, PublicKey)> {
    params.validate()?;
    let h = ParityCheck::generate(params, seed, construction)?;
    let g = systematic_generator(&h)?;
    let (n0, p) = (params.n0, params.p);
    let k0 = n0 - 1;
    let mut q_rng = seed.rng(Stream::Transform);

    let (s, q, gp) = match mode {
        KeyMode::Classic => {
            let q = sample_q(params, &mut q_rng)?;
            let s = sample_scrambler(k0, p, &mut seed.rng(Stream::Scrambler))?;
            let gp = s.invert()?.mul(&g)?.mul(&q.invert()?)?;
            (Some(s), q, gp)
        }
        KeyMode::Systematic if params.is_permutation() => {
            // A QC permutation only relabels the private code, so it is folded
            // into H and the public key is the systematic G itself.
            (None, QcMatrix::identity(n0, p), g)
        }
        KeyMode::Systematic => {
            let mut found = None;
            for _ in 0..KEYGEN_BUDGET {
                let q = sample_q(params, &mut q_rng)?;
                let m = g.mul(&q.invert()?)?;
                let mut left = QcMatrix::zero(k0, k0, p);
                for i in 0..k0 {
                    for j in 0..k0 {
                        left.set_block(i, j, m.block(i, j).clone());
                    }
                }
                if let Ok(left_inv) = left.invert() {
                    found = Some((q, left_inv.mul(&m)?));
                    break;
                }
            }
            let (q, gp) = found.ok_or_else(|| {
                Error::KeygenFailure(format!("G·Q⁻¹ had no invertible left part in {KEYGEN_BUDGET} draws"))
            })?;
            (None, q, gp)
        }
    };
    let q_inv = q.invert()?;
    let s_inv = s.as_ref().map(QcMatrix::invert).transpose()?;
    let sk = PrivateKey { params: params.clone(), mode, h, s, s_inv, q, q_inv, gp: gp.clone(), seed: *seed };
    let pk = PublicKey { params: params.clone(), mode, gp };
    Ok((sk, pk))
}

/// `u·G'` without errors.
pub fn encode(pk: &PublicKey, u: &[u8]) -> Result<Vec<u8>> {
    if u.len() != pk.k() {
        return Err(Error::param(format!("message length {} != k = {}", u.len(), pk.k())));
    }
    pk.gp.vec_mul(u)
}

/// `u·G' ⊕ e` with `e` uniform of weight `t`.
pub fn encrypt<R: Rng + ?Sized>(pk: &PublicKey, u: &[u8], rng: &mut R) -> Result<Vec<u8>> {
    let mut c = encode(pk, u)?;
    let e = sample_error(rng, pk.n(), pk.params.t);
    bits::xor_assign(&mut c, &e);
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decryption {
    pub message: Vec<u8>,
    pub iterations: usize,
    /// Recovered intentional error vector.
    pub error: Vec<u8>,
}

pub fn decrypt(sk: &PrivateKey, c: &[u8], cfg: &DecoderConfig) -> Result<Vec<u8>> {
    decrypt_detailed(sk, c, cfg).map(|d| d.message)
}

pub fn decrypt_detailed(sk: &PrivateKey, c: &[u8], cfg: &DecoderConfig) -> Result<Decryption> {
    let n = sk.params.n();
    if c.len() != n {
        return Err(Error::param(format!("ciphertext length {} != n = {n}", c.len())));
    }
    cfg.validate(sk.params.d_v)?;
    let cq = sk.q.vec_mul(c)?;
    let out = decode(&sk.h, &cq, cfg)?;
    if !out.success {
        return Err(Error::DecodingFailure { iterations: out.iterations_used });
    }
    let e = sk.q_inv.vec_mul(&out.error_estimate)?;
    let k = sk.params.k();
    let message = match &sk.s {
        // c ⊕ e = u·S⁻¹·G·Q⁻¹; the private codeword carries u·S⁻¹ up front
        Some(s) => s.vec_mul(&bits::xor(&cq, &out.error_estimate)[..k])?,
        None => bits::xor(c, &e)[..k].to_vec(),
    };
    let reencoded = encode(&sk.public_key(), &message)?;
    let residual = bits::weight(&bits::xor(c, &reencoded));
    if residual > sk.params.t {
        return Err(Error::DecodingFailure { iterations: out.iterations_used });
    }
    Ok(Decryption { message, iterations: out.iterations_used, error: bits::xor(c, &reencoded) })
}

impl PrivateKey {
    /// Assembles a key from its stored parts, recomputing the cached inverses
    /// and the public generator.
    pub fn from_parts(
        params: SystemParams,
        mode: KeyMode,
        h: ParityCheck,
        s: Option<QcMatrix>,
        q: QcMatrix,
        seed: Seed,
    ) -> Result<Self> {
        let (n0, p) = (params.n0, params.p);
        if q.rows() != n0 || q.cols() != n0 || q.p() != p {
            return Err(Error::Format("Q has the wrong shape".into()));
        }
        let folded = mode == KeyMode::Systematic && params.is_permutation() && q.is_identity();
        if !folded && q.weights() != params.w {
            return Err(Error::Format("Q block weights do not match W".into()));
        }
        if let Some(s) = &s {
            if s.rows() != n0 - 1 || s.cols() != n0 - 1 || s.p() != p {
                return Err(Error::Format("S has the wrong shape".into()));
            }
        }
        if (mode == KeyMode::Classic) != s.is_some() {
            return Err(Error::Format("S must be present exactly in classic mode".into()));
        }
        let q_inv = q.invert()?;
        let s_inv = s.as_ref().map(QcMatrix::invert).transpose()?;
        let gp = rebuild_generator(&h, &q_inv, s_inv.as_ref())?;
        Ok(PrivateKey { params, mode, h, s, s_inv, q, q_inv, gp, seed })
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey { params: self.params.clone(), mode: self.mode, gp: self.gp.clone() }
    }
}

fn rebuild_generator(h: &ParityCheck, q_inv: &QcMatrix, s_inv: Option<&QcMatrix>) -> Result<QcMatrix> {
    let g = systematic_generator(h)?;
    let m = g.mul(q_inv)?;
    match s_inv {
        Some(s_inv) => s_inv.mul(&m),
        None => {
            let k0 = h.n0() - 1;
            let mut left = QcMatrix::zero(k0, k0, h.p());
            for i in 0..k0 {
                for j in 0..k0 {
                    left.set_block(i, j, m.block(i, j).clone());
                }
            }
            left.invert()?.mul(&m)
        }
    }
}
