//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs as a plain binary so the lines are visible under `cargo test`.
//! Criterion 8 needs tens of thousands of SPA decodings at n = 25088 and runs
//! only with `QCMC_NIGHTLY=1`.

use std::fmt::Write as _;
use std::process::{Command, ExitCode};
use std::time::Instant;

use qcmc_core::attacks::{dca_curve, isda_wf_for, q_space_size};
use qcmc_core::crypto::{decrypt_detailed, encrypt, keygen, KeyMode, PublicKey};
use qcmc_core::decoder::{syndrome, DecoderConfig};
use qcmc_core::design::{
    systematic_generator, transform_pattern, Construction, ParityCheck, SystemParams,
};
use qcmc_core::gf2::{qc_invert, qc_mul, qc_transpose, qc_vec_mul, BitPolynomial, QcMatrix};
use qcmc_core::optimizer::{complexity_c, m_star, optimize_design, OptimizerConfig};
use qcmc_core::rng::{Seed, Stream};
use qcmc_core::sim::run_trials;
use qcmc_core::threshold::{bf_threshold, ThresholdQuery};
use rand::Rng;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

// ---- 1: complexity anchors -------------------------------------------------

fn complexity_anchors() -> Outcome {
    // (n, d_v', m, printed log2 C)
    let anchors = [(16384, 59.0, 1.0, 23.21), (16384, 59.0, 3.93, 21.27), (28672, 77.0, 1.0, 24.40), (28672, 77.0, 5.13, 22.09)];
    let mut ok = true;
    let mut detail = String::new();
    for (n, dvp, m, want) in anchors {
        let got = complexity_c(n, dvp, m, 10.0, 1.0).unwrap().log2();
        ok &= (round2(got) - want).abs() < 1e-9;
        write!(detail, "C({m})={got:.4} want {want}; ").unwrap();
    }
    // rational m = d_v'/15 for reference only
    for (n, dvp) in [(16384, 59.0), (28672, 77.0)] {
        let got = complexity_c(n, dvp, dvp / 15.0, 10.0, 1.0).unwrap().log2();
        write!(detail, "C({dvp}/15)={got:.4}; ").unwrap();
    }
    Outcome::check(ok, detail)
}

// ---- 2: BF thresholds ------------------------------------------------------

fn thresholds() -> Outcome {
    let anchors = [(16384, 13, 181), (16384, 15, 187), (28672, 15, 327), (16384, 59, 68), (28672, 77, 98), (25088, 85, 77)];
    let mut ok = true;
    let mut detail = String::new();
    for (n, d_v, want) in anchors {
        let got = bf_threshold(&ThresholdQuery::new(n, 4, d_v)).unwrap();
        let rel = (got as f64 - want as f64) / want as f64;
        ok &= rel.abs() <= 0.05;
        write!(detail, "({n},{d_v})->{got} want {want} ({:+.1}%); ", 100.0 * rel).unwrap();
    }
    Outcome::check(ok, detail)
}

// ---- 3: work factors -------------------------------------------------------

fn dca_bits(p: usize, dvp: usize) -> f64 {
    dca_curve(4, p, &[dvp]).unwrap()[0].report.log2_wf
}

fn isda_bits(p: usize, t: usize) -> f64 {
    isda_wf_for(4, p, t).unwrap().log2_wf
}

fn work_factors() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for (p, dvp, t, target) in [(4096, 59, 47, 100.0), (7168, 77, 62, 128.0)] {
        let (d, i) = (dca_bits(p, dvp), isda_bits(p, t));
        ok &= (d - target).abs() <= 4.0 && (i - target).abs() <= 4.0;
        write!(detail, "p={p}: dca(d_v'={dvp})={d:.2} isda(t={t})={i:.2} want {target}+-4; ").unwrap();
    }
    let dca_gap = (dca_bits(4096, 59) - dca_bits(16384, 59)).abs();
    let isda_gap = (isda_bits(4096, 47) - isda_bits(16384, 47)).abs();
    ok &= dca_gap <= 4.0 && isda_gap <= 4.0;
    write!(detail, "gap 4096 vs 16384: dca {dca_gap:.2} isda {isda_gap:.2}").unwrap();
    Outcome::check(ok, detail)
}

// ---- 4: Q-space counts -----------------------------------------------------

fn q_space() -> Outcome {
    let a = q_space_size(4800, 2);
    let b = q_space_size(3584, 3);
    let ok = (round2(a) - 25.46).abs() < 1e-9 && (round2(b) - 38.01).abs() < 1e-9;
    Outcome::check(ok, format!("(4800,2)={a:.4} want 25.46; (3584,3)={b:.4} want 38.01"))
}

// ---- 5: optimizer ranking --------------------------------------------------

fn optimizer() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for lambda in [100.0, 128.0] {
        let report = optimize_design(&OptimizerConfig::new(lambda, 4)).unwrap();
        let dense = report.rows.iter().find(|r| r.m == 1.0 && r.params.d_v == report.targets.0);
        let sparse = report.rows.iter().find(|r| r.params.d_v == 15);
        match (dense, sparse) {
            (Some(d), Some(s)) => {
                ok &= s.c_log2 < d.c_log2;
                write!(
                    detail,
                    "lambda={lambda}: dense d_v={} p={} log2C={:.2}, sparse d_v=15 m={} p={} log2C={:.2}, best d_v={}; ",
                    d.params.d_v, d.params.p, d.c_log2, s.m, s.params.p, s.c_log2, report.rows[0].params.d_v
                )
                .unwrap();
            }
            _ => {
                ok = false;
                write!(detail, "lambda={lambda}: dense present {} sparse present {}; ", dense.is_some(), sparse.is_some())
                    .unwrap();
            }
        }
    }
    Outcome::check(ok, detail)
}

// ---- 6: cryptosystem roundtrip ---------------------------------------------

fn roundtrip() -> Outcome {
    let params = SystemParams::new(4, 4096, 15, transform_pattern(4, 16).unwrap(), 46).unwrap();
    let (sk, pk) = keygen(&params, &Seed::from_u64(1), KeyMode::Classic).unwrap();
    let cfg = DecoderConfig::spa_for(params.t_prime(), params.n());
    let mut rng = Seed::from_u64(2).rng(Stream::Message);
    let (mut successes, mut wrong) = (0, 0);
    for _ in 0..100 {
        let u: Vec<u8> = (0..pk.k()).map(|_| rng.gen::<u8>() & 1).collect();
        let c = encrypt(&pk, &u, &mut rng).unwrap();
        if let Ok(d) = decrypt_detailed(&sk, &c, &cfg) {
            successes += 1;
            wrong += usize::from(d.message != u);
        }
    }
    Outcome::check(
        successes >= 99 && wrong == 0,
        format!("m={} t={} t'={}: {successes}/100 decrypted, {wrong} wrong messages", params.m(), params.t, params.t_prime()),
    )
}

// ---- 7: dense oracle -------------------------------------------------------

type Dense = Vec<Vec<u8>>;

fn dense(m: &QcMatrix) -> Dense {
    let p = m.p();
    let mut out = vec![vec![0u8; m.cols() * p]; m.rows() * p];
    for bi in 0..m.rows() {
        for bj in 0..m.cols() {
            let a = m.block(bi, bj).to_bits();
            for s in 0..p {
                for j in 0..p {
                    out[bi * p + s][bj * p + j] = a[(j + p - s) % p];
                }
            }
        }
    }
    out
}

fn mat_mul(a: &Dense, b: &Dense) -> Dense {
    let mut out = vec![vec![0u8; b[0].len()]; a.len()];
    for (i, row) in a.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            if x == 1 {
                out[i].iter_mut().zip(&b[k]).for_each(|(o, y)| *o ^= y);
            }
        }
    }
    out
}

fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn inverse(a: &Dense) -> Option<Dense> {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().copied().chain((0..n).map(|j| u8::from(i == j))).collect())
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| m[r][c] == 1)?;
        m.swap(c, piv);
        for r in 0..n {
            if r != c && m[r][c] == 1 {
                let row = m[c].clone();
                m[r].iter_mut().zip(&row).for_each(|(x, y)| *x ^= y);
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn random_qc<R: Rng>(rng: &mut R, rows: usize, cols: usize, p: usize) -> QcMatrix {
    let blocks = (0..rows * cols)
        .map(|_| BitPolynomial::from_bits(&(0..p).map(|_| rng.gen::<u8>() & 1).collect::<Vec<_>>()))
        .collect();
    QcMatrix::new(rows, cols, blocks).unwrap()
}

fn oracle() -> Outcome {
    let mut rng = Seed::from_u64(77).rng(Stream::Message);
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for case in 0..1000 {
        let p = 1 + case % 32;
        let (r, k, c) = (1 + case % 3, 1 + (case / 3) % 3, 1 + (case / 9) % 3);
        let a = random_qc(&mut rng, r, k, p);
        let b = random_qc(&mut rng, k, c, p);
        let sq = random_qc(&mut rng, r, r, p);
        let v: Vec<u8> = (0..r * p).map(|_| rng.gen::<u8>() & 1).collect();
        let checks = [
            ("mul", dense(&qc_mul(&a, &b).unwrap()) == mat_mul(&dense(&a), &dense(&b))),
            ("transpose", dense(&qc_transpose(&a)) == transpose(&dense(&a))),
            ("vec_mul", vec![qc_vec_mul(&v, &a).unwrap()] == mat_mul(&vec![v.clone()], &dense(&a))),
            (
                "invert",
                match (qc_invert(&sq), inverse(&dense(&sq))) {
                    (Ok(x), Some(y)) => dense(&x) == y,
                    (Err(_), None) => true,
                    _ => false,
                },
            ),
        ];
        for (name, good) in checks {
            cases += 1;
            if !good {
                mismatches.push(format!("{name}@{case}"));
            }
        }
    }
    // syndrome and key pipeline on toy codes
    for seed in 0..100u64 {
        let p = [8, 16, 17, 31, 32][seed as usize % 5];
        let n0 = 2 + seed as usize % 3;
        let params = SystemParams::new(n0, p, 3, transform_pattern(n0, n0 + 1 + seed as usize % 4).unwrap(), 1).unwrap();
        let h = ParityCheck::generate(&params, &Seed::from_u64(seed), Construction::Random).unwrap();
        let hd = dense(&h.to_qc());
        let y: Vec<u8> = (0..n0 * p).map(|_| rng.gen::<u8>() & 1).collect();
        let s = mat_mul(&vec![y.clone()], &transpose(&hd)).remove(0);
        cases += 1;
        if syndrome(&h, &y).unwrap() != s {
            mismatches.push(format!("syndrome@{seed}"));
        }
        let Ok((sk, pk)) = keygen(&params, &Seed::from_u64(seed), KeyMode::Classic) else {
            continue;
        };
        let g = dense(&systematic_generator(&sk.h).unwrap());
        let s_inv = inverse(&dense(sk.s.as_ref().unwrap())).unwrap();
        let q_inv = inverse(&dense(&sk.q)).unwrap();
        let gp = mat_mul(&mat_mul(&s_inv, &g), &q_inv);
        let hp = dense(&PublicKey::public_parity_check(&sk).unwrap());
        let orthogonal = mat_mul(&gp, &transpose(&hp)).iter().flatten().all(|&x| x == 0);
        cases += 1;
        if dense(&pk.gp) != gp || hp != mat_mul(&hd, &transpose(&dense(&sk.q))) || !orthogonal {
            mismatches.push(format!("keygen@{seed}"));
        }
    }
    Outcome::check(
        mismatches.is_empty() && cases >= 1000,
        format!("{cases} cases, {} mismatches {:?}", mismatches.len(), mismatches.iter().take(5).collect::<Vec<_>>()),
    )
}

// ---- 8: MDPC decoder observation (nightly) ---------------------------------

fn mdpc_observation() -> Outcome {
    if std::env::var("QCMC_NIGHTLY").as_deref() != Ok("1") {
        return Outcome { verdict: Verdict::Skip, detail: "set QCMC_NIGHTLY=1 to run 2 x 20000 decodings at n=25088".into() };
    }
    let params = SystemParams::with_permutation(4, 6272, 85, 68).unwrap();
    let h = ParityCheck::generate(&params, &Seed::from_u64(8), Construction::Random).unwrap();
    let trials = 20000;
    let spa = run_trials(&h, &DecoderConfig::spa_for(68, params.n()), 68, trials, &Seed::from_u64(9)).unwrap();
    let bf = run_trials(&h, &DecoderConfig::bf_variable(1), 68, trials, &Seed::from_u64(9)).unwrap();
    let ok = spa.cer >= 4e-3 / 3.0 && spa.cer <= 4e-3 * 3.0 && bf.cer < spa.cer;
    Outcome::check(
        ok,
        format!(
            "SPA CER {:.3e} [{:.2e}, {:.2e}] want 4e-3 within x3; BF-variable CER {:.3e} [{:.2e}, {:.2e}] must be lower",
            spa.cer, spa.ci_low, spa.ci_high, bf.cer, bf.ci_low, bf.ci_high
        ),
    )
}

// ---- 9: property suites ----------------------------------------------------

fn has_four_cycle(h: &ParityCheck) -> bool {
    let (p, n) = (h.p(), h.n());
    let mut owner = vec![usize::MAX; n * n];
    for r in 0..p {
        let row: Vec<usize> =
            h.blocks().iter().enumerate().flat_map(|(i, b)| b.indices().iter().map(move |&d| i * p + (d + r) % p)).collect();
        for (a, &u) in row.iter().enumerate() {
            for &v in &row[a + 1..] {
                let key = u.min(v) * n + u.max(v);
                if owner[key] != usize::MAX {
                    return true;
                }
                owner[key] = r;
            }
        }
    }
    false
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qcmc")).args(args).env_remove("QCMC_JOBS").output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

/// Every seeded command run twice (with different worker counts) in fresh
/// directories; all outputs concatenated.
fn seeded_outputs(jobs: &str) -> Result<Vec<Vec<u8>>, String> {
    let dir = std::env::temp_dir().join(format!("qcmc-acceptance-{}-{jobs}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let f = |name: &str| dir.join(name).to_str().unwrap().to_string();
    std::fs::write(f("msg"), b"byte-identical reruns").map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    out.push(cli(&["keygen", "--p", "512", "--dv", "5", "--w-sum", "8", "--t", "3", "--seed", "11", "--out", &f("k")])?);
    out.push(cli(&["encrypt", "--pk", &f("k.pub"), "--in", &f("msg"), "--seed", "12", "--out", &f("ct")])?);
    out.push(cli(&["decrypt", "--sk", &f("k.key"), "--in", &f("ct"), "--out", &f("back")])?);
    out.push(cli(&["--jobs", jobs, "simulate", "--key", &f("k.key"), "--t", "10:22:4", "--trials", "300", "--decoder", "bf-variable", "--seed", "13"])?);
    out.push(cli(&["--jobs", jobs, "threshold", "--dv", "13,15", "--p", "4096,8192"])?);
    out.push(cli(&["--jobs", jobs, "wf", "--attack", "dca", "--p", "4096", "--dv-prime", "55:59:2"])?);
    out.push(cli(&["--jobs", jobs, "optimize", "--security", "80", "--dv", "9,15,49", "--csv"])?);
    for name in ["k.key", "k.pub", "ct", "back"] {
        out.push(std::fs::read(f(name)).map_err(|e| e.to_string())?);
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(out)
}

fn properties() -> Outcome {
    let mut failures = Vec::new();

    let mut rdf_codes = 0;
    for (n0, p, d_v) in [(2, 64, 5), (3, 64, 3), (4, 61, 3), (4, 64, 3)] {
        let params = SystemParams::with_permutation(n0, p, d_v, 1).unwrap();
        for seed in 0..10 {
            rdf_codes += 1;
            match ParityCheck::generate(&params, &Seed::from_u64(seed), Construction::Rdf) {
                Ok(h) if !has_four_cycle(&h) => {}
                _ => failures.push(format!("rdf({n0},{p},{d_v})#{seed}")),
            }
        }
    }

    let mut convex_points = 0;
    for (n, dvp) in [(16384, 59.0), (28672, 77.0), (25088, 85.0)] {
        let c = |m: f64| complexity_c(n, dvp, m, 10.0, 1.0).unwrap();
        let ms = m_star(dvp, 10.0);
        for i in 0..400 {
            let m = 1.0 + i as f64 * 0.05;
            convex_points += 1;
            if c(m) - 2.0 * c(m + 0.05) + c(m + 0.1) < -1e-9 * c(m) || c(ms) > c(m) * (1.0 + 1e-12) {
                failures.push(format!("convexity n={n} m={m:.2}"));
            }
        }
    }

    let mut isd_points = 0;
    let isd = |n: usize, k: usize, w: usize, targets: u64| {
        qcmc_core::attacks::isd_wf(&qcmc_core::attacks::IsdInstance::new(n, k, w, targets).unwrap()).unwrap().log2_wf
    };
    for (n, k) in [(2048, 1024), (8192, 6144), (16384, 12288)] {
        for w in (10..=120).step_by(10) {
            for targets in [1u64, 4, 64, 4096] {
                isd_points += 1;
                if isd(n, k, w, 2 * targets) > isd(n, k, w, targets) + 1e-9 || isd(n, k, w + 1, targets) < isd(n, k, w, targets) - 1e-9 {
                    failures.push(format!("isd n={n} w={w} N={targets}"));
                }
            }
        }
    }

    let determinism = match (seeded_outputs("1"), seeded_outputs("3")) {
        (Ok(a), Ok(b)) if a == b => "identical".to_string(),
        (Ok(_), Ok(_)) => {
            failures.push("cli reruns differ".into());
            "differ".to_string()
        }
        (Err(e), _) | (_, Err(e)) => {
            failures.push(e.clone());
            e
        }
    };
    Outcome::check(
        failures.is_empty(),
        format!(
            "{rdf_codes} RDF codes, {convex_points} convexity points, {isd_points} ISD grid points, CLI reruns {determinism}; failures {:?}",
            failures.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("complexity anchors", complexity_anchors),
        ("bf thresholds", thresholds),
        ("work factors", work_factors),
        ("q-space counts", q_space),
        ("optimizer ranking", optimizer),
        ("cryptosystem roundtrip", roundtrip),
        ("dense oracle equivalence", oracle),
        ("mdpc decoder observation", mdpc_observation),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
        };
        println!("acceptance {}: {tag} {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), outcome.detail);
    }
    println!("acceptance: {failed} failed");
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
