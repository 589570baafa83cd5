//! Iterative decoders working directly on the sparse private parity-check
//! matrix: bit flipping with a fixed or a variable decision threshold, and
//! the sum-product algorithm in the log-likelihood domain.
//!
//! Check `r` of `H` involves variable `(i, (r + d) mod p)` for every `d` in
//! the support of block `i`, so the Tanner graph is never materialised.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::design::ParityCheck;
use crate::error::{Error, Result};

/// Magnitude clamp for SPA messages.
pub const LLR_CLAMP: f64 = 25.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    BfFixed,
    BfVariable,
    Spa,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "bf-fixed" | "bf" => Ok(Algorithm::BfFixed),
            "bf-variable" | "bfv" => Ok(Algorithm::BfVariable),
            "spa" => Ok(Algorithm::Spa),
            _ => Err(Error::param(format!("unknown decoder {s:?} (expected bf-fixed, bf-variable or spa)"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::BfFixed => "bf-fixed",
            Algorithm::BfVariable => "bf-variable",
            Algorithm::Spa => "spa",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    pub algorithm: Algorithm,
    pub max_iterations: usize,
    /// Flip threshold for [`Algorithm::BfFixed`].
    pub b: usize,
    /// Offset below the maximum unsatisfied-check count for
    /// [`Algorithm::BfVariable`].
    pub delta: usize,
    /// Channel crossover probability assumed by [`Algorithm::Spa`].
    pub p0: f64,
}

impl DecoderConfig {
    pub fn bf_fixed(b: usize) -> Self {
        DecoderConfig { algorithm: Algorithm::BfFixed, max_iterations: 100, b, delta: 0, p0: 0.0 }
    }

    pub fn bf_variable(delta: usize) -> Self {
        DecoderConfig { algorithm: Algorithm::BfVariable, max_iterations: 100, b: 0, delta, p0: 0.0 }
    }

    pub fn spa(p0: f64) -> Self {
        DecoderConfig { algorithm: Algorithm::Spa, max_iterations: 100, b: 0, delta: 0, p0 }
    }

    /// SPA initialised for exactly `t_prime` errors in `n` positions.
    pub fn spa_for(t_prime: usize, n: usize) -> Self {
        Self::spa((t_prime.max(1) as f64 / n as f64).min(0.49))
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self, d_v: usize) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations must be positive"));
        }
        match self.algorithm {
            Algorithm::BfFixed if self.b < d_v.div_ceil(2) || self.b > d_v => Err(Error::param(format!(
                "BF threshold b={} outside [{}, {}]",
                self.b,
                d_v.div_ceil(2),
                d_v
            ))),
            Algorithm::Spa if !(self.p0 > 0.0 && self.p0 < 0.5) => {
                Err(Error::param(format!("SPA p0={} outside (0, 0.5)", self.p0)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub success: bool,
    /// Estimated error pattern; `received ⊕ error_estimate` is the decoded word.
    pub error_estimate: Vec<u8>,
    pub iterations_used: usize,
}

/// `expand(H)·vᵀ` over GF(2).
pub fn syndrome(h: &ParityCheck, v: &[u8]) -> Result<Vec<u8>> {
    if v.len() != h.n() {
        return Err(Error::param(format!("vector length {} != n = {}", v.len(), h.n())));
    }
    let p = h.p();
    let mut s = vec![0u8; p];
    for (i, block) in h.blocks().iter().enumerate() {
        let part = &v[i * p..(i + 1) * p];
        for (j, _) in part.iter().enumerate().filter(|(_, &b)| b & 1 == 1) {
            for &d in block.indices() {
                s[(j + p - d) % p] ^= 1;
            }
        }
    }
    Ok(s)
}

pub fn decode(h: &ParityCheck, received: &[u8], cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    match cfg.algorithm {
        Algorithm::BfFixed | Algorithm::BfVariable => decode_bf(h, received, cfg),
        Algorithm::Spa => decode_spa(h, received, cfg),
    }
}

pub fn decode_bf(h: &ParityCheck, received: &[u8], cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    if cfg.algorithm == Algorithm::Spa {
        return Err(Error::param("decode_bf called with an SPA configuration"));
    }
    cfg.validate(h.d_v())?;
    let (n, p) = (h.n(), h.p());
    let mut s = syndrome(h, received)?;
    let mut word = received.to_vec();
    let mut upc = vec![0u32; n];
    let mut iterations = 0;

    while s.iter().any(|&b| b != 0) && iterations < cfg.max_iterations {
        iterations += 1;
        unsatisfied_counts(h, &s, &mut upc);
        let threshold = match cfg.algorithm {
            Algorithm::BfFixed => cfg.b as u32,
            _ => upc.iter().copied().max().unwrap_or(0).saturating_sub(cfg.delta as u32).max(1),
        };
        let mut flipped = false;
        for (i, block) in h.blocks().iter().enumerate() {
            for j in 0..p {
                if upc[i * p + j] >= threshold {
                    word[i * p + j] ^= 1;
                    for &d in block.indices() {
                        s[(j + p - d) % p] ^= 1;
                    }
                    flipped = true;
                }
            }
        }
        if !flipped {
            // Nothing reaches the threshold; later iterations would repeat this one.
            break;
        }
    }

    let success = s.iter().all(|&b| b == 0);
    let error_estimate = received.iter().zip(&word).map(|(a, b)| a ^ b).collect();
    Ok(DecodeOutcome { success, error_estimate, iterations_used: iterations })
}

/// Number of unsatisfied checks touching each bit.
fn unsatisfied_counts(h: &ParityCheck, s: &[u8], upc: &mut [u32]) {
    let p = h.p();
    upc.iter_mut().for_each(|c| *c = 0);
    for (i, block) in h.blocks().iter().enumerate() {
        let out = &mut upc[i * p..(i + 1) * p];
        for &d in block.indices() {
            // bit j sees check (j - d) mod p
            let (head, tail) = out.split_at_mut(d);
            for (c, &sv) in tail.iter_mut().zip(&s[..p - d]) {
                *c += u32::from(sv);
            }
            for (c, &sv) in head.iter_mut().zip(&s[p - d..]) {
                *c += u32::from(sv);
            }
        }
    }
}

/// `-ln tanh(x/2)`, self-inverse on (0, inf).
fn phi_exact(x: f64) -> f64 {
    let x = x.clamp(PHI_MIN, LLR_CLAMP);
    (2.0 / x.exp_m1()).ln_1p()
}

/// `phi(LLR_CLAMP)`: the smallest magnitude a message is allowed to carry into `phi`.
const PHI_MIN: f64 = 2.777_588_772_225_07e-11;

/// Below this argument `phi` is evaluated exactly; above it, by linear
/// interpolation in a table with step `1/PHI_TABLE_SCALE`.
const PHI_TABLE_START: f64 = 1.0 / 16.0;
const PHI_TABLE_SCALE: f64 = 1024.0;

fn phi_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let len = (LLR_CLAMP * PHI_TABLE_SCALE) as usize + 2;
        (0..len).map(|i| phi_exact(i as f64 / PHI_TABLE_SCALE)).collect()
    })
}

#[inline]
fn phi(table: &[f64], x: f64) -> f64 {
    if x < PHI_TABLE_START {
        return phi_exact(x);
    }
    let pos = x.min(LLR_CLAMP) * PHI_TABLE_SCALE;
    let i = pos as usize;
    let frac = pos - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

/// `dst[(r + d) mod p] += src[r]` for all `r`.
#[inline]
fn add_rotated(dst: &mut [f64], src: &[f64], d: usize) {
    let p = src.len();
    let (head, tail) = dst.split_at_mut(d);
    for (o, &x) in tail.iter_mut().zip(&src[..p - d]) {
        *o += x;
    }
    for (o, &x) in head.iter_mut().zip(&src[p - d..]) {
        *o += x;
    }
}

pub fn decode_spa(h: &ParityCheck, received: &[u8], cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    if cfg.algorithm != Algorithm::Spa {
        return Err(Error::param("decode_spa called with a bit-flipping configuration"));
    }
    cfg.validate(h.d_v())?;
    let (n, p) = (h.n(), h.p());
    let s0 = syndrome(h, received)?;
    if s0.iter().all(|&b| b == 0) {
        return Ok(DecodeOutcome { success: true, error_estimate: vec![0; n], iterations_used: 0 });
    }
    let table = phi_table();

    // Edges are stored line by line: line (i, k) holds, at position r, the edge
    // between check r and variable (i, (r + supp_i[k]) mod p).
    let lines: Vec<(usize, usize)> = h
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.indices().iter().map(move |&d| (i, d)))
        .collect();
    let llr0 = ((1.0 - cfg.p0) / cfg.p0).ln();
    let channel: Vec<f64> = received.iter().map(|&y| if y & 1 == 1 { -llr0 } else { llr0 }).collect();
    let mut v2c = vec![0.0f64; lines.len() * p];
    let mut c2v = vec![0.0f64; lines.len() * p];
    let mut total = vec![0.0f64; p];
    let mut parity = vec![false; p];
    let mut sum = vec![0.0f64; n];
    let mut decision = received.to_vec();

    for (l, &(i, d)) in lines.iter().enumerate() {
        let ch = &channel[i * p..(i + 1) * p];
        for (r, m) in v2c[l * p..(l + 1) * p].iter_mut().enumerate() {
            *m = ch[(r + d) % p];
        }
    }

    for iter in 1..=cfg.max_iterations {
        total.iter_mut().for_each(|x| *x = 0.0);
        parity.iter_mut().for_each(|x| *x = false);
        for (vl, cl) in v2c.chunks_exact(p).zip(c2v.chunks_exact_mut(p)) {
            for r in 0..p {
                let f = phi(table, vl[r].abs());
                cl[r] = f;
                total[r] += f;
                parity[r] ^= vl[r] < 0.0;
            }
        }
        for (vl, cl) in v2c.chunks_exact(p).zip(c2v.chunks_exact_mut(p)) {
            for r in 0..p {
                let mag = phi(table, (total[r] - cl[r]).max(0.0));
                cl[r] = if parity[r] ^ (vl[r] < 0.0) { -mag } else { mag };
            }
        }

        sum.copy_from_slice(&channel);
        for (l, &(i, d)) in lines.iter().enumerate() {
            add_rotated(&mut sum[i * p..(i + 1) * p], &c2v[l * p..(l + 1) * p], d);
        }
        for (l, &(i, d)) in lines.iter().enumerate() {
            let s = &sum[i * p..(i + 1) * p];
            let cl = &c2v[l * p..(l + 1) * p];
            let vl = &mut v2c[l * p..(l + 1) * p];
            let (lo, hi) = (cl.split_at(p - d), vl.split_at_mut(p - d));
            // r < p - d reads sum[r + d]; the rest wraps to sum[r + d - p]
            for ((o, &c), &sv) in hi.0.iter_mut().zip(lo.0).zip(&s[d..]) {
                *o = (sv - c).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
            for ((o, &c), &sv) in hi.1.iter_mut().zip(lo.1).zip(&s[..d]) {
                *o = (sv - c).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
        for (x, &sv) in decision.iter_mut().zip(&sum) {
            *x = u8::from(sv < 0.0);
        }

        if syndrome(h, &decision)?.iter().all(|&b| b == 0) {
            let error_estimate = received.iter().zip(&decision).map(|(a, b)| a ^ b).collect();
            return Ok(DecodeOutcome { success: true, error_estimate, iterations_used: iter });
        }
    }

    let error_estimate = received.iter().zip(&decision).map(|(a, b)| a ^ b).collect();
    Ok(DecodeOutcome { success: false, error_estimate, iterations_used: cfg.max_iterations })
}
