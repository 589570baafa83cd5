//! Monte Carlo residual error rates of the private decoders.
//!
//! Trials are grouped in fixed chunks, each with its own ChaCha stream, so the
//! merged counts depend only on the seed and never on the number of workers.

use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::bits;
use crate::decoder::{decode, DecoderConfig};
use crate::design::{systematic_generator, ParityCheck};
use crate::error::{Error, Result};
use crate::rng::{sample_error, Seed, Stream};

/// Trials per independently seeded chunk.
pub const CHUNK: usize = 64;

/// Two-sided 95% normal quantile used for Wilson intervals.
const Z95: f64 = 1.959963984540054;

/// Transmitted word for each trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CodewordMode {
    /// All-zero codeword; enough by linearity of the code.
    #[default]
    Zero,
    /// Fresh random codeword per trial, for checking the above.
    Random,
}

impl FromStr for CodewordMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(CodewordMode::Zero),
            "random" => Ok(CodewordMode::Random),
            _ => Err(Error::param(format!("unknown codeword mode {s:?} (expected zero or random)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub t_err: usize,
    pub trials: usize,
    pub codeword_errors: usize,
    pub bit_errors: usize,
    pub cer: f64,
    pub ber: f64,
    pub avg_iterations: f64,
    pub seed: Seed,
    /// 95% Wilson interval on the CER.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let phat = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if k == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

#[derive(Default)]
struct Counts {
    codeword_errors: usize,
    bit_errors: usize,
    iterations: usize,
}

fn run_chunk(
    h: &ParityCheck,
    g: Option<&crate::gf2::QcMatrix>,
    cfg: &DecoderConfig,
    t_err: usize,
    trials: usize,
    seed: &Seed,
    chunk: u32,
) -> Result<Counts> {
    let n = h.n();
    let mut rng = seed.rng(Stream::Simulation(chunk));
    let mut c = Counts::default();
    for _ in 0..trials {
        let e = sample_error(&mut rng, n, t_err);
        let x = match g {
            Some(g) => {
                let u: Vec<u8> = (0..g.rows() * g.p()).map(|_| rng.gen::<u8>() & 1).collect();
                g.vec_mul(&u)?
            }
            None => vec![0u8; n],
        };
        let received = bits::xor(&x, &e);
        let out = decode(h, &received, cfg)?;
        let residual = bits::weight(&bits::xor(&out.error_estimate, &e));
        c.bit_errors += residual;
        c.codeword_errors += usize::from(!out.success || residual > 0);
        c.iterations += out.iterations_used;
    }
    Ok(c)
}

/// Error-rate estimate from `trials` decodings of `t_err` random errors.
pub fn run_trials(h: &ParityCheck, cfg: &DecoderConfig, t_err: usize, trials: usize, seed: &Seed) -> Result<TrialReport> {
    run_trials_with(h, cfg, t_err, trials, seed, CodewordMode::Zero)
}

pub fn run_trials_with(
    h: &ParityCheck,
    cfg: &DecoderConfig,
    t_err: usize,
    trials: usize,
    seed: &Seed,
    mode: CodewordMode,
) -> Result<TrialReport> {
    let n = h.n();
    if t_err > n {
        return Err(Error::param(format!("t_err = {t_err} exceeds n = {n}")));
    }
    cfg.validate(h.d_v())?;
    let g = match mode {
        CodewordMode::Zero => None,
        CodewordMode::Random => Some(systematic_generator(h)?),
    };
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Counts> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK.min(trials - i * CHUNK);
            run_chunk(h, g.as_ref(), cfg, t_err, len, seed, i as u32)
        })
        .collect::<Result<_>>()?;
    let total = parts.into_iter().fold(Counts::default(), |mut a, c| {
        a.codeword_errors += c.codeword_errors;
        a.bit_errors += c.bit_errors;
        a.iterations += c.iterations;
        a
    });
    let tf = trials.max(1) as f64;
    let (ci_low, ci_high) = wilson_interval(total.codeword_errors, trials);
    Ok(TrialReport {
        t_err,
        trials,
        codeword_errors: total.codeword_errors,
        bit_errors: total.bit_errors,
        cer: total.codeword_errors as f64 / tf,
        ber: total.bit_errors as f64 / (tf * n as f64),
        avg_iterations: total.iterations as f64 / tf,
        seed: *seed,
        ci_low,
        ci_high,
    })
}

/// Runs [`run_trials`] for each error count; every point reuses `seed`.
pub fn sweep(h: &ParityCheck, cfg: &DecoderConfig, t_errs: &[usize], trials: usize, seed: &Seed) -> Result<Vec<TrialReport>> {
    t_errs.iter().map(|&t| run_trials(h, cfg, t, trials, seed)).collect()
}

pub fn reports_csv(reports: &[TrialReport]) -> String {
    let mut out = String::from("t_err,trials,cer,ber,avg_iters,ci_low,ci_high\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{:.6e},{:.6e},{:.3},{:.6e},{:.6e}\n",
            r.t_err, r.trials, r.cer, r.ber, r.avg_iterations, r.ci_low, r.ci_high
        ));
    }
    out
}

/// Worker count from `QCMC_JOBS`, if set to a positive integer.
pub fn jobs_from_env() -> Option<usize> {
    std::env::var("QCMC_JOBS").ok()?.trim().parse().ok().filter(|&j| j > 0)
}
