//! Dense GF(2) reference implementations used as oracles.
#![allow(dead_code)]

use qcmc_core::gf2::{BitPolynomial, QcMatrix};
use rand::Rng;

pub type Dense = Vec<Vec<u8>>;

/// Circulant with first row `a`: entry (s, j) is `a[(j - s) mod p]`.
pub fn circulant(a: &BitPolynomial) -> Dense {
    let bits = a.to_bits();
    let p = bits.len();
    (0..p).map(|s| (0..p).map(|j| bits[(j + p - s) % p]).collect()).collect()
}

pub fn dense_qc(m: &QcMatrix) -> Dense {
    let p = m.p();
    let mut out = vec![vec![0u8; m.cols() * p]; m.rows() * p];
    for bi in 0..m.rows() {
        for bj in 0..m.cols() {
            let c = circulant(m.block(bi, bj));
            for s in 0..p {
                for j in 0..p {
                    out[bi * p + s][bj * p + j] = c[s][j];
                }
            }
        }
    }
    out
}

pub fn mat_mul(a: &Dense, b: &Dense) -> Dense {
    let (r, inner, c) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0u8; c]; r];
    for i in 0..r {
        for k in 0..inner {
            if a[i][k] == 1 {
                for j in 0..c {
                    out[i][j] ^= b[k][j];
                }
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn vec_mat(v: &[u8], a: &Dense) -> Vec<u8> {
    mat_mul(&vec![v.to_vec()], a).remove(0)
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| u8::from(i == j)).collect()).collect()
}

pub fn is_zero(a: &Dense) -> bool {
    a.iter().flatten().all(|&x| x == 0)
}

/// Gauss-Jordan inverse, `None` when singular.
pub fn inverse(a: &Dense) -> Option<Dense> {
    let n = a.len();
    let mut m: Dense = a.iter().zip(identity(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for c in 0..n {
        let pivot = (c..n).find(|&r| m[r][c] == 1)?;
        m.swap(c, pivot);
        for r in 0..n {
            if r != c && m[r][c] == 1 {
                let row = m[c].clone();
                m[r].iter_mut().zip(&row).for_each(|(x, y)| *x ^= y);
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen::<u8>() & 1).collect()
}

pub fn random_poly<R: Rng>(rng: &mut R, p: usize) -> BitPolynomial {
    BitPolynomial::from_bits(&random_bits(rng, p))
}

pub fn random_qc<R: Rng>(rng: &mut R, rows: usize, cols: usize, p: usize) -> QcMatrix {
    QcMatrix::new(rows, cols, (0..rows * cols).map(|_| random_poly(rng, p)).collect()).unwrap()
}
