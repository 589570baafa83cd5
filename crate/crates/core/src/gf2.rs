//! Arithmetic in the circulant ring R_p = GF(2)\[x\]/(x^p - 1) and on block
//! matrices whose blocks are circulants.
//!
//! A p×p circulant is identified with the polynomial given by its first row;
//! row `s` of `circulant(a)` is `a` cyclically shifted right by `s`. Under this
//! convention circulant products are polynomial products, a row vector times a
//! circulant is a polynomial product, and the transpose of `circulant(a)` is
//! `circulant(a(x^-1))`.
//!
//! Polynomials are stored dense and bit packed ([`BitPolynomial`]); the decoders
//! use the sparse index form ([`SparseSupport`]).

use std::fmt;

use crate::bits;
use crate::error::{Error, Result};

const W: usize = 64;

/// Element of R_p, dense bit-packed. Bit `i` is the coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitPolynomial {
    p: usize,
    words: Vec<u64>,
}

impl fmt::Debug for BitPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let supp = self.support();
        if supp.len() <= 16 {
            write!(f, "BitPolynomial(p={}, {:?})", self.p, supp)
        } else {
            write!(f, "BitPolynomial(p={}, weight={})", self.p, supp.len())
        }
    }
}

impl BitPolynomial {
    pub fn zero(p: usize) -> Self {
        assert!(p > 0, "modulus degree must be positive");
        BitPolynomial { p, words: vec![0; p.div_ceil(W)] }
    }

    pub fn one(p: usize) -> Self {
        Self::monomial(p, 0)
    }

    /// `x^(k mod p)`.
    pub fn monomial(p: usize, k: usize) -> Self {
        let mut a = Self::zero(p);
        a.set(k % p, true);
        a
    }

    /// Polynomial with ones at the given exponents; repeated indices cancel.
    pub fn from_support(p: usize, support: &[usize]) -> Result<Self> {
        let mut a = Self::zero(p);
        for &i in support {
            if i >= p {
                return Err(Error::param(format!("exponent {i} out of range for p={p}")));
            }
            a.flip(i);
        }
        Ok(a)
    }

    /// Coefficient vector (one `u8` per coefficient) to polynomial.
    pub fn from_bits(v: &[u8]) -> Self {
        let mut a = Self::zero(v.len());
        for (i, &b) in v.iter().enumerate() {
            if b & 1 == 1 {
                a.set(i, true);
            }
        }
        a
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.p).map(|i| self.coeff(i) as u8).collect()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coeff(&self, i: usize) -> bool {
        (self.words[i / W] >> (i % W)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.p);
        if v {
            self.words[i / W] |= 1 << (i % W);
        } else {
            self.words[i / W] &= !(1 << (i % W));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.p);
        self.words[i / W] ^= 1 << (i % W);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.words[0] == 1 && self.words[1..].iter().all(|&w| w == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * W + b);
                w &= w - 1;
            }
        }
        out
    }

    pub fn to_sparse(&self) -> SparseSupport {
        SparseSupport { p: self.p, support: self.support() }
    }

    fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::param(format!("mismatched ring sizes {} and {}", self.p, other.p)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    fn add_assign_unchecked(&mut self, other: &Self) {
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a ^= b);
    }

    /// Product in R_p.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let (sparse, dense) =
            if self.weight() <= other.weight() { (self, other) } else { (other, self) };
        let mut out = Self::zero(self.p);
        for s in sparse.support() {
            xor_rotated(&mut out.words, &dense.words, self.p, s);
        }
        out
    }

    /// `self · x^s`.
    pub fn rotate(&self, s: usize) -> Self {
        let mut out = Self::zero(self.p);
        xor_rotated(&mut out.words, &self.words, self.p, s % self.p);
        out
    }

    /// `a(x^-1)`: the polynomial of the transposed circulant.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.p);
        for i in self.support() {
            out.set((self.p - i) % self.p, true);
        }
        out
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// x^p - 1.
    pub fn inverse(&self) -> Result<Self> {
        // Every element with a(1) = 0 is a multiple of x + 1, a common factor
        // with x^p - 1.
        if self.weight() % 2 == 0 {
            return Err(Error::NotInvertible);
        }
        let mut modulus = Gf2x::zero(self.p + 1);
        modulus.set(0);
        modulus.set(self.p);
        let (g, s) = Gf2x::gcd_cofactor(modulus, Gf2x::from_words(self.words.clone()), self.p);
        if !g.is_one() {
            return Err(Error::NotInvertible);
        }
        let inv = s.reduce_cyclic(self.p);
        debug_assert!(self.mul_unchecked(&inv).is_one());
        Ok(inv)
    }

    /// ⌈p/8⌉ bytes, little-endian bit order.
    pub fn to_bytes_le(&self) -> Vec<u8> {
        let n = self.p.div_ceil(8);
        self.words.iter().flat_map(|w| w.to_le_bytes()).take(n).collect()
    }

    pub fn from_bytes_le(p: usize, bytes: &[u8]) -> Result<Self> {
        let v = bits::unpack_le(bytes, p)?;
        Ok(Self::from_bits(&v))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes_le())
    }

    pub fn from_hex(p: usize, s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Format(format!("bad hex: {e}")))?;
        Self::from_bytes_le(p, &bytes)
    }
}

/// Read `len <= 64` bits starting at bit `start` (no wrap).
#[inline]
fn read_bits(a: &[u64], start: usize, len: usize) -> u64 {
    if len == 0 {
        return 0;
    }
    let idx = start / W;
    let off = start % W;
    let mut v = a[idx] >> off;
    if off > 0 && idx + 1 < a.len() {
        v |= a[idx + 1] << (W - off);
    }
    if len < W {
        v &= (1u64 << len) - 1;
    }
    v
}

/// `out ^= a · x^s` in R_p, with `s < p`.
fn xor_rotated(out: &mut [u64], a: &[u64], p: usize, s: usize) {
    // Output bit o takes source bit (o - s) mod p.
    for (wi, o) in out.iter_mut().enumerate() {
        let base = wi * W;
        let len = W.min(p - base);
        let src = (base + p - s) % p;
        let v = if src + len <= p {
            read_bits(a, src, len)
        } else {
            let first = p - src;
            read_bits(a, src, first) | (read_bits(a, 0, len - first) << first)
        };
        *o ^= v;
    }
}

/// Unreduced polynomial over GF(2), used by the Euclidean algorithm.
#[derive(Clone, Debug)]
struct Gf2x {
    words: Vec<u64>,
}

impl Gf2x {
    fn zero(nbits: usize) -> Self {
        Gf2x { words: vec![0; nbits.div_ceil(W).max(1)] }
    }

    fn from_words(words: Vec<u64>) -> Self {
        Gf2x { words }
    }

    fn set(&mut self, i: usize) {
        self.words[i / W] |= 1 << (i % W);
    }

    fn degree(&self) -> Option<usize> {
        self.words
            .iter()
            .rposition(|&w| w != 0)
            .map(|i| i * W + (W - 1 - self.words[i].leading_zeros() as usize))
    }

    fn is_one(&self) -> bool {
        self.degree() == Some(0)
    }

    /// `self ^= other << sh`; `self` must be wide enough.
    fn xor_shifted(&mut self, other: &Gf2x, sh: usize) {
        let ws = sh / W;
        let bs = sh % W;
        let top = match other.degree() {
            Some(d) => d / W,
            None => return,
        };
        for i in 0..=top {
            let w = other.words[i];
            if w == 0 {
                continue;
            }
            self.words[i + ws] ^= w << bs;
            if bs > 0 && w >> (W - bs) != 0 {
                self.words[i + ws + 1] ^= w >> (W - bs);
            }
        }
    }

    fn grow(&mut self, nbits: usize) {
        let need = nbits.div_ceil(W) + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
    }

    /// Returns `(g, s)` with `g = gcd(a, b)` and `s·b ≡ g (mod a)`.
    /// Requires `deg b < deg a`; `p` bounds the working width.
    fn gcd_cofactor(a: Gf2x, b: Gf2x, p: usize) -> (Gf2x, Gf2x) {
        let width = p + W + 1;
        let (mut r0, mut r1) = (a, b);
        let (mut s0, mut s1) = (Gf2x::zero(width), Gf2x::zero(width));
        s1.set(0);
        r0.grow(width);
        r1.grow(width);
        s0.grow(width);
        s1.grow(width);
        while let Some(d1) = r1.degree() {
            while let Some(d0) = r0.degree() {
                if d0 < d1 {
                    break;
                }
                let sh = d0 - d1;
                r0.xor_shifted(&r1, sh);
                s0.xor_shifted(&s1, sh);
            }
            std::mem::swap(&mut r0, &mut r1);
            std::mem::swap(&mut s0, &mut s1);
        }
        (r0, s0)
    }

    fn reduce_cyclic(&self, p: usize) -> BitPolynomial {
        let mut out = BitPolynomial::zero(p);
        if let Some(d) = self.degree() {
            for i in 0..=d {
                if (self.words[i / W] >> (i % W)) & 1 == 1 {
                    out.flip(i % p);
                }
            }
        }
        out
    }
}

/// Sorted, duplicate-free exponent list of an element of R_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseSupport {
    p: usize,
    support: Vec<usize>,
}

impl SparseSupport {
    pub fn new(p: usize, mut support: Vec<usize>) -> Result<Self> {
        if p == 0 {
            return Err(Error::param("p must be positive"));
        }
        support.sort_unstable();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("support indices must be unique"));
        }
        if support.last().is_some_and(|&i| i >= p) {
            return Err(Error::param(format!("support index out of range for p={p}")));
        }
        Ok(SparseSupport { p, support })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.support
    }

    pub fn to_dense(&self) -> BitPolynomial {
        let mut a = BitPolynomial::zero(self.p);
        for &i in &self.support {
            a.set(i, true);
        }
        a
    }
}

/// Largest block dimension inverted through the adjugate when no unit pivot exists.
const ADJUGATE_MAX_BLOCKS: usize = 10;

/// `rows × cols` grid of p×p circulant blocks, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QcMatrix {
    rows: usize,
    cols: usize,
    p: usize,
    blocks: Vec<BitPolynomial>,
}

impl fmt::Debug for QcMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QcMatrix({}x{}, p={}, weights={:?})", self.rows, self.cols, self.p, self.weights())
    }
}

impl QcMatrix {
    pub fn new(rows: usize, cols: usize, blocks: Vec<BitPolynomial>) -> Result<Self> {
        if rows == 0 || cols == 0 || blocks.len() != rows * cols {
            return Err(Error::param(format!(
                "expected {}x{} blocks, got {}",
                rows,
                cols,
                blocks.len()
            )));
        }
        let p = blocks[0].p();
        if blocks.iter().any(|b| b.p() != p) {
            return Err(Error::param("all blocks must share the same p"));
        }
        Ok(QcMatrix { rows, cols, p, blocks })
    }

    pub fn zero(rows: usize, cols: usize, p: usize) -> Self {
        QcMatrix { rows, cols, p, blocks: vec![BitPolynomial::zero(p); rows * cols] }
    }

    pub fn identity(n: usize, p: usize) -> Self {
        let mut m = Self::zero(n, n, p);
        for i in 0..n {
            m.blocks[i * n + i] = BitPolynomial::one(p);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn block(&self, i: usize, j: usize) -> &BitPolynomial {
        &self.blocks[i * self.cols + j]
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: BitPolynomial) {
        assert_eq!(b.p(), self.p);
        self.blocks[i * self.cols + j] = b;
    }

    pub fn blocks(&self) -> &[BitPolynomial] {
        &self.blocks
    }

    /// Hamming weight of each block, row-major.
    pub fn weights(&self) -> Vec<Vec<usize>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.block(i, j).weight()).collect())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let b = self.block(i, j);
                    if i == j {
                        b.is_one()
                    } else {
                        b.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(BitPolynomial::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols, self.p) != (other.rows, other.cols, other.p) {
            return Err(Error::param("shape mismatch in block addition"));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.add_assign_unchecked(b);
                c
            })
            .collect();
        Ok(QcMatrix { rows: self.rows, cols: self.cols, p: self.p, blocks })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.p != other.p {
            return Err(Error::param(format!(
                "cannot multiply {}x{} (p={}) by {}x{} (p={})",
                self.rows, self.cols, self.p, other.rows, other.cols, other.p
            )));
        }
        let mut out = Self::zero(self.rows, other.cols, self.p);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BitPolynomial::zero(self.p);
                for k in 0..self.cols {
                    let a = self.block(i, k);
                    let b = other.block(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc.add_assign_unchecked(&a.mul_unchecked(b));
                }
                out.set_block(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows, self.p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set_block(j, i, self.block(i, j).transpose());
            }
        }
        out
    }

    /// Block Gauss-Jordan elimination over R_p. Pivots must be ring units, so
    /// some invertible matrices are reported as [`Error::Singular`].
    pub fn invert(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::param("only square block matrices can be inverted"));
        }
        let n = self.rows;
        let mut a: Vec<Vec<BitPolynomial>> =
            (0..n).map(|i| (0..n).map(|j| self.block(i, j).clone()).collect()).collect();
        let mut inv: Vec<Vec<BitPolynomial>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BitPolynomial::one(self.p) } else { BitPolynomial::zero(self.p) })
                    .collect()
            })
            .collect();

        for c in 0..n {
            // For power-of-two p the ring is local, so a column without a unit
            // means singular. Otherwise an invertible matrix may lack one.
            let Some((r, piv_inv)) = (c..n).find_map(|r| a[r][c].inverse().ok().map(|x| (r, x))) else {
                if self.p.is_power_of_two() {
                    return Err(Error::Singular);
                }
                return if n <= ADJUGATE_MAX_BLOCKS { self.invert_adjugate() } else { self.invert_dense() };
            };
            a.swap(c, r);
            inv.swap(c, r);
            for j in 0..n {
                a[c][j] = a[c][j].mul_unchecked(&piv_inv);
                inv[c][j] = inv[c][j].mul_unchecked(&piv_inv);
            }
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for j in 0..n {
                    if !a[c][j].is_zero() {
                        let t = f.mul_unchecked(&a[c][j]);
                        a[r][j].add_assign_unchecked(&t);
                    }
                    if !inv[c][j].is_zero() {
                        let t = f.mul_unchecked(&inv[c][j]);
                        inv[r][j].add_assign_unchecked(&t);
                    }
                }
            }
        }
        QcMatrix::new(n, n, inv.into_iter().flatten().collect())
    }

    /// `adj(A)·det(A)^-1`. Signs vanish in characteristic 2, so every minor is
    /// a sum over column assignments, built up by a subset recursion.
    fn invert_adjugate(&self) -> Result<Self> {
        let (n, p) = (self.rows, self.p);
        let full = (1usize << n) - 1;
        // minors[mask] = det of rows `rows[..|mask|]` against the columns in mask
        let minors = |rows: &[usize]| {
            let mut f = vec![BitPolynomial::zero(p); 1 << n];
            f[0] = BitPolynomial::one(p);
            for mask in 0..=full {
                let k = mask.count_ones() as usize;
                if k >= rows.len() || f[mask].is_zero() {
                    continue;
                }
                for j in (0..n).filter(|j| mask >> j & 1 == 0) {
                    let entry = self.block(rows[k], j);
                    if !entry.is_zero() {
                        let t = f[mask].mul_unchecked(entry);
                        f[mask | 1 << j].add_assign_unchecked(&t);
                    }
                }
            }
            f
        };
        let all: Vec<usize> = (0..n).collect();
        let det_inv = minors(&all)[full].inverse().map_err(|_| Error::Singular)?;
        let mut blocks = vec![BitPolynomial::zero(p); n * n];
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let f = minors(&others);
            for j in 0..n {
                // (A^-1)[j][i] = cofactor(i, j) / det
                blocks[j * n + i] = f[full & !(1 << j)].mul_unchecked(&det_inv);
            }
        }
        QcMatrix::new(n, n, blocks)
    }

    /// Gauss-Jordan on the expanded binary matrix; the inverse of a QC matrix
    /// is QC, so the first row of each block is read back.
    fn invert_dense(&self) -> Result<Self> {
        let (n, p) = (self.rows, self.p);
        let dim = n * p;
        let words = dim.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(dim);
        for bi in 0..n {
            let firsts: Vec<Vec<u8>> = (0..n).map(|bj| self.block(bi, bj).to_bits()).collect();
            for s in 0..p {
                let mut row = vec![0u64; 2 * words];
                for (bj, bits) in firsts.iter().enumerate() {
                    for j in 0..p {
                        if bits[(j + p - s) % p] == 1 {
                            let col = bj * p + j;
                            row[col / 64] |= 1 << (col % 64);
                        }
                    }
                }
                let id = bi * p + s;
                row[words + id / 64] |= 1 << (id % 64);
                rows.push(row);
            }
        }
        for c in 0..dim {
            let bit = |row: &Vec<u64>| row[c / 64] >> (c % 64) & 1 == 1;
            let piv = (c..dim).find(|&r| bit(&rows[r])).ok_or(Error::Singular)?;
            rows.swap(c, piv);
            let pivot = rows[c].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != c && bit(row) {
                    row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
                }
            }
        }
        let mut blocks = Vec::with_capacity(n * n);
        for bi in 0..n {
            let row = &rows[bi * p];
            for bj in 0..n {
                let bits: Vec<u8> = (0..p)
                    .map(|j| {
                        let col = bj * p + j;
                        (row[words + col / 64] >> (col % 64) & 1) as u8
                    })
                    .collect();
                blocks.push(BitPolynomial::from_bits(&bits));
            }
        }
        QcMatrix::new(n, n, blocks)
    }

    /// Row vector times matrix: `v · expand(self)`, with `|v| = rows·p`.
    pub fn vec_mul(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.rows * self.p {
            return Err(Error::param(format!(
                "vector length {} does not match {} block rows of size {}",
                v.len(),
                self.rows,
                self.p
            )));
        }
        let parts: Vec<BitPolynomial> =
            v.chunks(self.p).map(BitPolynomial::from_bits).collect();
        let mut out = Vec::with_capacity(self.cols * self.p);
        for j in 0..self.cols {
            let mut acc = BitPolynomial::zero(self.p);
            for (i, part) in parts.iter().enumerate() {
                let b = self.block(i, j);
                if part.is_zero() || b.is_zero() {
                    continue;
                }
                acc.add_assign_unchecked(&part.mul_unchecked(b));
            }
            out.extend(acc.to_bits());
        }
        Ok(out)
    }

    /// Dense (rows·p)×(cols·p) binary expansion.
    pub fn expand(&self) -> Vec<Vec<u8>> {
        let (p, nr, nc) = (self.p, self.rows * self.p, self.cols * self.p);
        let mut m = vec![vec![0u8; nc]; nr];
        for bi in 0..self.rows {
            for bj in 0..self.cols {
                for e in self.block(bi, bj).support() {
                    for s in 0..p {
                        m[bi * p + s][bj * p + (e + s) % p] = 1;
                    }
                }
            }
        }
        m
    }
}

pub fn poly_mul(a: &BitPolynomial, b: &BitPolynomial) -> Result<BitPolynomial> {
    a.mul(b)
}

pub fn poly_inverse(a: &BitPolynomial) -> Result<BitPolynomial> {
    a.inverse()
}

pub fn qc_mul(a: &QcMatrix, b: &QcMatrix) -> Result<QcMatrix> {
    a.mul(b)
}

pub fn qc_transpose(a: &QcMatrix) -> QcMatrix {
    a.transpose()
}

pub fn qc_invert(a: &QcMatrix) -> Result<QcMatrix> {
    a.invert()
}

pub fn qc_vec_mul(v: &[u8], a: &QcMatrix) -> Result<Vec<u8>> {
    a.vec_mul(v)
}
