//! Circulant and QC operations against dense GF(2) matrices, p <= 32.

mod common;

use common::*;
use qcmc_core::crypto::{decrypt, encrypt, keygen, KeyMode, PublicKey};
use qcmc_core::decoder::{syndrome, DecoderConfig};
use qcmc_core::design::{systematic_generator, SystemParams};
use qcmc_core::gf2::{qc_invert, qc_mul, qc_transpose, qc_vec_mul, BitPolynomial, QcMatrix};
use qcmc_core::rng::{Seed, Stream};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tag)
}

#[test]
fn polynomial_product_matches_circulant_product() {
    let mut r = rng(1);
    for case in 0..400 {
        let p = 1 + case % 32;
        let (a, b) = (random_poly(&mut r, p), random_poly(&mut r, p));
        let prod = a.mul(&b).unwrap();
        assert_eq!(circulant(&prod), mat_mul(&circulant(&a), &circulant(&b)), "p={p}");
    }
}

#[test]
fn transpose_matches_dense_transpose() {
    let mut r = rng(2);
    for case in 0..200 {
        let p = 1 + case % 32;
        let a = random_poly(&mut r, p);
        assert_eq!(circulant(&a.transpose()), transpose(&circulant(&a)));
        let m = random_qc(&mut r, 2, 3, p);
        assert_eq!(dense_qc(&qc_transpose(&m)), transpose(&dense_qc(&m)));
    }
}

#[test]
fn polynomial_inverse_matches_dense_inverse() {
    let mut r = rng(3);
    let mut invertible = 0;
    for case in 0..400 {
        let p = 1 + case % 32;
        let a = random_poly(&mut r, p);
        match (a.inverse(), inverse(&circulant(&a))) {
            (Ok(inv), Some(dense)) => {
                assert_eq!(circulant(&inv), dense);
                invertible += 1;
            }
            (Err(_), None) => {}
            (ours, dense) => panic!("p={p}: ours {:?} vs dense invertible={}", ours.is_ok(), dense.is_some()),
        }
    }
    assert!(invertible > 50);
}

#[test]
fn block_operations_match_dense() {
    let mut r = rng(4);
    let mut inverted = 0;
    for case in 0..200 {
        let p = 1 + case % 32;
        let (rows, inner, cols) = (1 + case % 3, 1 + (case / 3) % 3, 1 + (case / 9) % 4);
        let a = random_qc(&mut r, rows, inner, p);
        let b = random_qc(&mut r, inner, cols, p);
        assert_eq!(dense_qc(&qc_mul(&a, &b).unwrap()), mat_mul(&dense_qc(&a), &dense_qc(&b)));

        let v = random_bits(&mut r, rows * p);
        assert_eq!(qc_vec_mul(&v, &a).unwrap(), vec_mat(&v, &dense_qc(&a)));

        let sq = random_qc(&mut r, rows, rows, p);
        match (qc_invert(&sq), inverse(&dense_qc(&sq))) {
            (Ok(inv), Some(dense)) => {
                assert_eq!(dense_qc(&inv), dense);
                inverted += 1;
            }
            (Err(_), None) => {}
            (ours, dense) => panic!("case {case}: ours {:?} vs dense invertible={}", ours.is_ok(), dense.is_some()),
        }
    }
    assert!(inverted > 20);
}

#[test]
fn syndrome_matches_dense_parity_check() {
    let mut r = rng(5);
    for case in 0..150 {
        let p = 8 + case % 25;
        let n0 = 2 + case % 3;
        let params = SystemParams::with_permutation(n0, p, 3, 0).unwrap();
        let h = qcmc_core::design::ParityCheck::generate(&params, &Seed::from_u64(case as u64), Default::default())
            .unwrap();
        let v = random_bits(&mut r, n0 * p);
        let dense = dense_qc(&h.to_qc());
        let expected: Vec<u8> = dense.iter().map(|row| row.iter().zip(&v).fold(0, |a, (x, y)| a ^ (x & y))).collect();
        assert_eq!(syndrome(&h, &v).unwrap(), expected);
        let g = systematic_generator(&h).unwrap();
        assert!(is_zero(&mat_mul(&dense_qc(&g), &transpose(&dense))));
    }
}

#[test]
fn toy_key_pipeline_matches_dense_construction() {
    // n0 = 2, p = 8, d_v = 3 and m = 2
    let params = SystemParams::new(2, 8, 3, vec![vec![1, 2], vec![0, 1]], 1).unwrap();
    let mut checked = 0;
    for seed in 0..60u64 {
        let Ok((sk, pk)) = keygen(&params, &Seed::from_u64(seed), KeyMode::Classic) else {
            continue;
        };
        let h = dense_qc(&sk.h.to_qc());
        let q = dense_qc(&sk.q);
        let s = dense_qc(sk.s.as_ref().unwrap());
        assert_eq!(sk.q.weights(), params.w);
        let g = dense_qc(&systematic_generator(&sk.h).unwrap());
        let gp = mat_mul(&mat_mul(&inverse(&s).unwrap(), &g), &inverse(&q).unwrap());
        assert_eq!(dense_qc(&pk.gp), gp);
        let hp = mat_mul(&h, &transpose(&q));
        assert_eq!(dense_qc(&PublicKey::public_parity_check(&sk).unwrap()), hp);
        assert!(is_zero(&mat_mul(&gp, &transpose(&hp))));

        let mut r = Seed::from_u64(seed).rng(Stream::Message);
        let u: Vec<u8> = (0..pk.k()).map(|_| r.gen::<u8>() & 1).collect();
        let c = encrypt(&pk, &u, &mut r).unwrap();
        let e: Vec<u8> = c.iter().zip(vec_mat(&u, &gp)).map(|(a, b)| a ^ b).collect();
        assert_eq!(e.iter().map(|&x| x as usize).sum::<usize>(), 1);
        // the private decoder sees c·Q, whose error part is e·Q
        let cq = vec_mat(&c, &q);
        assert_eq!(sk.q.vec_mul(&c).unwrap(), cq);
        if let Ok(out) = decrypt(&sk, &c, &DecoderConfig::bf_variable(0)) {
            assert_eq!(out, u);
        }
        checked += 1;
    }
    assert!(checked >= 30, "only {checked} keys generated");
}

#[test]
fn systematic_keys_match_dense_row_reduction() {
    for (n0, p) in [(2, 16), (3, 17), (4, 32)] {
        let params = SystemParams::new(n0, p, 3, qcmc_core::design::transform_pattern(n0, n0 + 2).unwrap(), 1).unwrap();
        let (sk, pk) = keygen(&params, &Seed::from_u64(p as u64), KeyMode::Systematic).unwrap();
        let g = dense_qc(&systematic_generator(&sk.h).unwrap());
        let m = mat_mul(&g, &inverse(&dense_qc(&sk.q)).unwrap());
        let k = (n0 - 1) * p;
        let left: Dense = m.iter().map(|row| row[..k].to_vec()).collect();
        assert_eq!(dense_qc(&pk.gp), mat_mul(&inverse(&left).unwrap(), &m));
        let gp = dense_qc(&pk.gp);
        assert!(gp.iter().enumerate().all(|(i, row)| row[..k] == identity(k)[i][..]));
    }
}

#[test]
fn monomial_examples() {
    let p = 7;
    let a = BitPolynomial::from_support(p, &[0, 1]).unwrap();
    let b = BitPolynomial::from_support(p, &[0, 1, 3]).unwrap();
    assert_eq!(a.mul(&b).unwrap().support(), vec![0, 2, 3, 4]);
    assert_eq!(BitPolynomial::monomial(p, 3).inverse().unwrap().support(), vec![4]);
    assert!(QcMatrix::identity(3, p).invert().unwrap().is_identity());
}

#[test]
fn non_local_rings_take_both_fallbacks() {
    // p = 15: x^15 - 1 splits into several coprime factors, so invertible
    // matrices without a unit entry in some column are common
    let mut r = rng(6);
    let mut no_unit_pivot = 0;
    for case in 0..300 {
        let p = [3, 7, 15, 21, 31][case % 5];
        let n = 2 + case % 3;
        let m = random_qc(&mut r, n, n, p);
        let first_col_has_unit = (0..n).any(|i| m.block(i, 0).inverse().is_ok());
        match (qc_invert(&m), inverse(&dense_qc(&m))) {
            (Ok(inv), Some(d)) => {
                assert_eq!(dense_qc(&inv), d);
                no_unit_pivot += usize::from(!first_col_has_unit);
            }
            (Err(_), None) => {}
            (ours, dense) => panic!("case {case}: ours {:?} vs dense invertible={}", ours.is_ok(), dense.is_some()),
        }
    }
    assert!(no_unit_pivot > 5, "{no_unit_pivot}");

    // beyond the adjugate size limit
    for _ in 0..40 {
        let m = random_qc(&mut r, 11, 11, 3);
        match (qc_invert(&m), inverse(&dense_qc(&m))) {
            (Ok(inv), Some(d)) => assert_eq!(dense_qc(&inv), d),
            (Err(_), None) => {}
            (ours, dense) => panic!("ours {:?} vs dense invertible={}", ours.is_ok(), dense.is_some()),
        }
    }
}
