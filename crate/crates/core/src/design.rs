//! Private parity-check matrices `H = [H_0 | H_1 | ... | H_{n0-1}]` with
//! circulant blocks of column weight `d_v`, and the systematic generator
//! matrix of the code they define.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{BitPolynomial, QcMatrix, SparseSupport};
use crate::rng::{sample_support, Seed, Stream};

/// Resampling budget for invertibility and difference-family failures.
pub const RESAMPLE_BUDGET: usize = 100;

/// Code and transformation parameters of one system instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub n0: usize,
    pub p: usize,
    pub d_v: usize,
    /// `n0 × n0` block weights of the transformation matrix Q.
    pub w: Vec<Vec<usize>>,
    pub t: usize,
}

impl SystemParams {
    pub fn new(n0: usize, p: usize, d_v: usize, w: Vec<Vec<usize>>, t: usize) -> Result<Self> {
        let params = SystemParams { n0, p, d_v, w, t };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `Q` a block-diagonal QC permutation (m = 1).
    pub fn with_permutation(n0: usize, p: usize, d_v: usize, t: usize) -> Result<Self> {
        Self::new(n0, p, d_v, identity_pattern(n0), t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 < 2 {
            return Err(Error::param("n0 must be at least 2"));
        }
        if self.p == 0 {
            return Err(Error::param("p must be positive"));
        }
        if self.d_v == 0 || self.d_v > self.p {
            return Err(Error::param(format!("d_v={} must lie in [1, p={}]", self.d_v, self.p)));
        }
        if self.w.len() != self.n0 || self.w.iter().any(|r| r.len() != self.n0) {
            return Err(Error::param(format!("W must be {0}x{0}", self.n0)));
        }
        for i in 0..self.n0 {
            let row: usize = self.w[i].iter().sum();
            let col: usize = self.w.iter().map(|r| r[i]).sum();
            if row == 0 || col == 0 {
                return Err(Error::param("every row and column of W needs a positive sum"));
            }
        }
        if self.w.iter().flatten().any(|&x| x > self.p) {
            return Err(Error::param("W entries cannot exceed p"));
        }
        if self.t > self.n() {
            return Err(Error::param("t cannot exceed the code length"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n0 * self.p
    }

    pub fn k0(&self) -> usize {
        self.n0 - 1
    }

    pub fn k(&self) -> usize {
        self.k0() * self.p
    }

    /// Redundancy, equal to `p`.
    pub fn r(&self) -> usize {
        self.p
    }

    pub fn d_c(&self) -> usize {
        self.n0 * self.d_v
    }

    pub fn w_sum(&self) -> usize {
        self.w.iter().flatten().sum()
    }

    /// Average row/column weight of Q.
    pub fn m(&self) -> f64 {
        self.w_sum() as f64 / self.n0 as f64
    }

    /// Largest row weight of Q.
    pub fn m_max(&self) -> usize {
        self.w.iter().map(|r| r.iter().sum::<usize>()).max().unwrap_or(0)
    }

    /// `⌈m·t⌉`, errors seen by the private decoder.
    pub fn t_prime(&self) -> usize {
        (self.w_sum() * self.t).div_ceil(self.n0)
    }

    /// `m·d_v`, column weight of the public parity-check matrix H·Qᵀ.
    pub fn d_v_prime(&self) -> f64 {
        self.m() * self.d_v as f64
    }

    /// `n0·d_v'`, always an integer.
    pub fn d_c_prime(&self) -> usize {
        self.w_sum() * self.d_v
    }

    /// True when W is a permutation pattern of unit weights (m = 1).
    pub fn is_permutation(&self) -> bool {
        self.w.iter().flatten().all(|&x| x <= 1)
            && self.w.iter().all(|r| r.iter().sum::<usize>() == 1)
            && (0..self.n0).all(|j| self.w.iter().map(|r| r[j]).sum::<usize>() == 1)
    }
}

pub fn identity_pattern(n0: usize) -> Vec<Vec<usize>> {
    (0..n0).map(|i| (0..n0).map(|j| usize::from(i == j)).collect()).collect()
}

/// Whether `W mod 2` is invertible over GF(2).
///
/// Evaluating every block of Q at x = 1 is a ring homomorphism onto GF(2), so
/// this is necessary for Q to be invertible for any p, and sufficient when p is
/// a power of two.
pub fn pattern_parity_invertible(w: &[Vec<usize>]) -> bool {
    let n = w.len();
    let mut m: Vec<Vec<u8>> = w.iter().map(|r| r.iter().map(|&x| (x % 2) as u8).collect()).collect();
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| m[r][c] == 1) else {
            return false;
        };
        m.swap(c, r);
        for r in 0..n {
            if r != c && m[r][c] == 1 {
                let pivot = m[c].clone();
                m[r].iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
    }
    true
}

/// Weight pattern W with `ΣW = total` and `W mod 2` invertible.
///
/// Built as `A + 2B`: `A` is the identity (or the identity plus one
/// off-diagonal one when `total - n0` is odd), and the remaining weight is
/// spread two at a time over the cyclic off-diagonals, then the diagonal.
pub fn transform_pattern(n0: usize, total: usize) -> Result<Vec<Vec<usize>>> {
    if n0 < 2 {
        return Err(Error::param("n0 must be at least 2"));
    }
    let mut w = identity_pattern(n0);
    let mut base = n0;
    if (total + n0) % 2 == 1 {
        w[0][1] += 1;
        base += 1;
    }
    if total < base {
        return Err(Error::param(format!("W total {total} is below the minimum {base} for n0={n0}")));
    }
    let mut pairs = (total - base) / 2;
    let order: Vec<usize> = (1..n0).chain(std::iter::once(0)).collect();
    'fill: loop {
        for &k in &order {
            for i in 0..n0 {
                if pairs == 0 {
                    break 'fill;
                }
                w[i][(i + k) % n0] += 2;
                pairs -= 1;
            }
        }
    }
    debug_assert!(pattern_parity_invertible(&w));
    Ok(w)
}

/// How the supports of the circulant blocks are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Construction {
    #[default]
    Random,
    /// Random difference family: all cyclic differences within each block,
    /// pooled over the blocks, are distinct.
    Rdf,
}

impl std::str::FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Construction::Random),
            "rdf" => Ok(Construction::Rdf),
            _ => Err(Error::param(format!("unknown construction {s:?}"))),
        }
    }
}

/// The private parity-check matrix, one sparse support per circulant block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheck {
    params: SystemParams,
    blocks: Vec<SparseSupport>,
}

impl ParityCheck {
    pub fn from_blocks(params: SystemParams, blocks: Vec<SparseSupport>) -> Result<Self> {
        if blocks.len() != params.n0 {
            return Err(Error::param(format!("expected {} blocks, got {}", params.n0, blocks.len())));
        }
        if blocks.iter().any(|b| b.p() != params.p || b.weight() != params.d_v) {
            return Err(Error::param(format!("every block must have p={} and weight d_v={}", params.p, params.d_v)));
        }
        Ok(ParityCheck { params, blocks })
    }

    pub fn generate(params: &SystemParams, seed: &Seed, construction: Construction) -> Result<Self> {
        if params.d_v % 2 == 0 {
            // even weight means a root at x = 1, a factor of x^p - 1
            return Err(Error::param(format!("d_v = {} is even, so no block is invertible", params.d_v)));
        }
        let mut rng = seed.rng(Stream::ParityCheck);
        match construction {
            Construction::Random => sample_h_random(params, &mut rng),
            Construction::Rdf => sample_h_rdf(params, &mut rng),
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn blocks(&self) -> &[SparseSupport] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn p(&self) -> usize {
        self.params.p
    }

    pub fn n0(&self) -> usize {
        self.params.n0
    }

    pub fn d_v(&self) -> usize {
        self.params.d_v
    }

    /// H as a 1×n0 block matrix.
    pub fn to_qc(&self) -> QcMatrix {
        QcMatrix::new(1, self.params.n0, self.blocks.iter().map(SparseSupport::to_dense).collect())
            .expect("blocks share p")
    }
}

pub fn sample_h_random<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<ParityCheck> {
    params.validate()?;
    let (p, d_v) = (params.p, params.d_v);
    let mut blocks: Vec<SparseSupport> = (0..params.n0 - 1)
        .map(|_| SparseSupport::new(p, sample_support(rng, p, d_v)))
        .collect::<Result<_>>()?;
    for _ in 0..RESAMPLE_BUDGET {
        let last = SparseSupport::new(p, sample_support(rng, p, d_v))?;
        if last.to_dense().inverse().is_ok() {
            blocks.push(last);
            return ParityCheck::from_blocks(params.clone(), blocks);
        }
    }
    Err(Error::DesignFailure(format!(
        "no invertible last block with p={p}, d_v={d_v} after {RESAMPLE_BUDGET} draws"
    )))
}

pub fn sample_h_rdf<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<ParityCheck> {
    params.validate()?;
    let (n0, p, d_v) = (params.n0, params.p, params.d_v);
    if n0 * d_v * (d_v - 1) >= p {
        return Err(Error::param(format!(
            "difference family needs n0·d_v·(d_v-1) < p, got {} >= {p}",
            n0 * d_v * (d_v - 1)
        )));
    }
    for _ in 0..RESAMPLE_BUDGET {
        let Some(blocks) = try_difference_family(n0, p, d_v, rng) else {
            continue;
        };
        if !blocks.last().unwrap().to_dense().inverse().is_ok() {
            continue;
        }
        return ParityCheck::from_blocks(params.clone(), blocks);
    }
    Err(Error::DesignFailure(format!(
        "no difference family with invertible last block for n0={n0}, p={p}, d_v={d_v}"
    )))
}

fn try_difference_family<R: Rng + ?Sized>(
    n0: usize,
    p: usize,
    d_v: usize,
    rng: &mut R,
) -> Option<Vec<SparseSupport>> {
    const CANDIDATE_TRIES: usize = 1000;
    let mut used = vec![false; p];
    let mut blocks = Vec::with_capacity(n0);
    let mut fresh = Vec::with_capacity(2 * d_v);
    for _ in 0..n0 {
        let mut block: Vec<usize> = Vec::with_capacity(d_v);
        while block.len() < d_v {
            let mut placed = false;
            for _ in 0..CANDIDATE_TRIES {
                let x = rng.gen_range(0..p);
                if block.contains(&x) {
                    continue;
                }
                fresh.clear();
                for &a in &block {
                    fresh.push((x + p - a) % p);
                    fresh.push((a + p - x) % p);
                }
                let clash = fresh.iter().enumerate().any(|(i, d)| used[*d] || fresh[..i].contains(d));
                if !clash {
                    fresh.iter().for_each(|&d| used[d] = true);
                    block.push(x);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return None;
            }
        }
        blocks.push(SparseSupport::new(p, block).ok()?);
    }
    Some(blocks)
}

/// True when the cyclic differences `(a - b) mod p`, `a != b` within a block,
/// pooled over all blocks, never repeat.
pub fn pooled_differences_distinct(blocks: &[SparseSupport]) -> bool {
    let Some(p) = blocks.first().map(SparseSupport::p) else {
        return true;
    };
    let mut seen = vec![false; p];
    for b in blocks {
        for &a in b.indices() {
            for &c in b.indices() {
                if a == c {
                    continue;
                }
                let d = (a + p - c) % p;
                if seen[d] {
                    return false;
                }
                seen[d] = true;
            }
        }
    }
    true
}

/// `G = [I | P]` as an `(n0-1) × n0` block matrix, with
/// `P_i = (H_{n0-1}^-1 · H_i)ᵀ`, so that `G·Hᵀ = 0`.
pub fn systematic_generator(h: &ParityCheck) -> Result<QcMatrix> {
    let n0 = h.n0();
    let p = h.p();
    let last_inv = h.blocks[n0 - 1].to_dense().inverse().map_err(|_| Error::Singular)?;
    let mut g = QcMatrix::zero(n0 - 1, n0, p);
    for i in 0..n0 - 1 {
        g.set_block(i, i, BitPolynomial::one(p));
        let pi = last_inv.mul(&h.blocks[i].to_dense())?.transpose();
        g.set_block(i, n0 - 1, pi);
    }
    Ok(g)
}
