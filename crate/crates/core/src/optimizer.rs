//! Choice of the private parity-check density.
//!
//! Decryption multiplies the ciphertext by the sparse transformation matrix
//! Q (about `n·m` operations) and then runs an iterative decoder on the Tanner
//! graph of H (about `α·n·d_v·I` operations). For a public column weight
//! `d_v' = m·d_v` fixed by the dual-code attack, the metric
//!
//! ```text
//! C(m) = α·n·(d_v'/m)·I + n·m
//! ```
//!
//! is minimised at `m' = sqrt(α·d_v'·I)`, but `m` is further limited by the
//! error-correction capability of the private code (it must correct
//! `t' = ⌈m·t⌉` errors) and by enumeration of the sparse blocks of H.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::attacks::{dca_wf_for, h_enumeration_wf, isda_wf_for};
use crate::design::{transform_pattern, SystemParams};
use crate::error::{Error, Result};
use crate::threshold::{bf_threshold_detail, corrects, ThresholdQuery};

/// `α·n·(d_v'/m)·I + n·m`.
pub fn complexity_c(n: usize, d_v_prime: f64, m: f64, iterations: f64, alpha: f64) -> Result<f64> {
    if m < 1.0 {
        return Err(Error::param(format!("m = {m} is below the minimum 1 for a non-singular Q")));
    }
    let n = n as f64;
    Ok(alpha * n * (d_v_prime / m) * iterations + n * m)
}

/// Unconstrained minimiser `sqrt(d_v'·I)` of the complexity metric with α = 1.
pub fn m_star(d_v_prime: f64, iterations: f64) -> f64 {
    (d_v_prime * iterations).sqrt()
}

/// Smallest `d_v'` with DCA work factor at least `λ`, and smallest `t` with
/// ISDA work factor at least `λ`, both at the reference length `n0·p_ref`.
pub fn security_targets(lambda: f64, n0: usize, p_ref: usize) -> Result<(usize, usize)> {
    if lambda <= 0.0 {
        return Err(Error::param("security target must be positive"));
    }
    let d_v_prime = smallest_meeting(1, p_ref / 2, |d| Ok(dca_wf_for(n0, p_ref, n0 * d)?.log2_wf >= lambda))?
        .ok_or_else(|| Error::param(format!("DCA cannot reach {lambda} bits with p={p_ref}")))?;
    let t = smallest_meeting(2, n0 * p_ref / 4, |t| Ok(isda_wf_for(n0, p_ref, t)?.log2_wf >= lambda))?
        .ok_or_else(|| Error::param(format!("ISDA cannot reach {lambda} bits with p={p_ref}")))?;
    Ok((d_v_prime, t))
}

/// Smallest `x` in `lo..=hi` with `pred(x)`, assuming `pred` is monotone.
fn smallest_meeting(lo: usize, hi: usize, pred: impl Fn(usize) -> Result<bool>) -> Result<Option<usize>> {
    if lo > hi {
        return Ok(None);
    }
    let mut step = 1;
    let mut prev = lo;
    let mut cur = lo;
    loop {
        if pred(cur)? {
            break;
        }
        if cur == hi {
            return Ok(None);
        }
        prev = cur;
        cur = (cur + step).min(hi);
        step *= 2;
    }
    if cur == lo {
        return Ok(Some(lo));
    }
    // pred(prev) false, pred(cur) true
    let (mut a, mut b) = (prev, cur);
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if pred(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Some(b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub target_security_bits: f64,
    pub n0: usize,
    /// Average decoder iterations `I`.
    pub iterations: f64,
    /// Binary operations per Tanner-graph edge.
    pub alpha: f64,
    /// Candidate private column weights; empty means every odd value up to
    /// `d_v'` plus `d_v'` itself.
    pub d_v_candidates: Vec<usize>,
    /// Step of the achievable `m`; `n0·m_resolution` must be a positive integer.
    pub m_resolution: f64,
    /// Circulant sizes to try, ascending.
    pub p_grid: Vec<usize>,
    /// Length at which the security targets are fixed; defaults to the
    /// smallest grid entry.
    pub p_ref: Option<usize>,
}

impl OptimizerConfig {
    pub fn new(target_security_bits: f64, n0: usize) -> Self {
        OptimizerConfig {
            target_security_bits,
            n0,
            iterations: 10.0,
            alpha: 1.0,
            d_v_candidates: Vec::new(),
            m_resolution: 1.0 / n0 as f64,
            p_grid: (4..=32).map(|i| i * 1024).collect(),
            p_ref: None,
        }
    }

    fn validate(&self) -> Result<usize> {
        if self.target_security_bits <= 0.0 {
            return Err(Error::param("security target must be positive"));
        }
        if self.n0 < 2 {
            return Err(Error::param("n0 must be at least 2"));
        }
        if self.iterations < 1.0 || self.alpha < 1.0 {
            return Err(Error::param("I and alpha must be at least 1"));
        }
        if self.p_grid.is_empty() {
            return Err(Error::param("empty p grid"));
        }
        let step = self.n0 as f64 * self.m_resolution;
        let rounded = step.round();
        if rounded < 1.0 || (step - rounded).abs() > 1e-9 {
            return Err(Error::param(format!("n0·m_resolution = {step} must be a positive integer")));
        }
        Ok(rounded as usize)
    }

    fn p_ref(&self) -> usize {
        self.p_ref.unwrap_or_else(|| *self.p_grid.iter().min().expect("non-empty grid"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignResult {
    pub params: SystemParams,
    pub m: f64,
    /// Achieved `m·d_v`.
    pub d_v_prime: f64,
    pub t: usize,
    pub t_prime: usize,
    pub threshold: usize,
    pub c_log2: f64,
    /// `threshold - t'`.
    pub bf_margin: i64,
    pub dca_bits: f64,
    pub isda_bits: f64,
    pub h_enum_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub d_v: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerReport {
    pub lambda: f64,
    /// `(d_v', t)` from [`security_targets`].
    pub targets: (usize, usize),
    /// Feasible designs, cheapest first.
    pub rows: Vec<DesignResult>,
    pub rejections: Vec<Rejection>,
}

type Cache<K> = Mutex<HashMap<K, f64>>;

struct Evaluator<'a> {
    cfg: &'a OptimizerConfig,
    lambda: f64,
    d_v_prime: usize,
    t: usize,
    step: usize,
    dca: Cache<(usize, usize)>,
    isda: Cache<usize>,
}

impl Evaluator<'_> {
    fn dca_bits(&self, p: usize, w: usize) -> Result<f64> {
        if let Some(&v) = self.dca.lock().unwrap().get(&(p, w)) {
            return Ok(v);
        }
        let v = dca_wf_for(self.cfg.n0, p, w)?.log2_wf;
        self.dca.lock().unwrap().insert((p, w), v);
        Ok(v)
    }

    fn isda_bits(&self, p: usize) -> Result<f64> {
        if let Some(&v) = self.isda.lock().unwrap().get(&p) {
            return Ok(v);
        }
        let v = isda_wf_for(self.cfg.n0, p, self.t)?.log2_wf;
        self.isda.lock().unwrap().insert(p, v);
        Ok(v)
    }

    fn evaluate(&self, d_v: usize) -> std::result::Result<DesignResult, String> {
        let n0 = self.cfg.n0;
        if d_v > self.d_v_prime {
            return Err(format!("d_v above d_v' = {}", self.d_v_prime));
        }
        let m_cap = (self.cfg.alpha * self.d_v_prime as f64 * self.cfg.iterations).sqrt();
        // ΣW snapped to the resolution grid, never below n0 (m = 1)
        let exact = n0 as f64 * self.d_v_prime as f64 / d_v as f64;
        let mut w_sum = (((exact / self.step as f64).round() as usize) * self.step).max(n0);
        loop {
            let m = w_sum as f64 / n0 as f64;
            if m > m_cap + 1e-12 {
                return Err(format!("m = {m:.3} exceeds m' = {m_cap:.3}"));
            }
            let t_prime = (w_sum * self.t).div_ceil(n0);
            let mut chosen = None;
            for &p in &self.cfg.p_grid {
                let q = ThresholdQuery::new(n0 * p, n0, d_v);
                if q.validate().is_err() {
                    continue;
                }
                let h_enum = h_enumeration_wf(p, d_v).map_err(|e| e.to_string())?;
                if h_enum < self.lambda {
                    continue;
                }
                if corrects(&q, t_prime).map_err(|e| e.to_string())? {
                    chosen = Some((p, h_enum));
                    break;
                }
            }
            let Some((p, h_enum)) = chosen else {
                return Err(format!("no p in grid corrects t' = {t_prime} with enumeration cost >= λ"));
            };
            let w_dca = w_sum * d_v;
            let dca = self.dca_bits(p, w_dca).map_err(|e| e.to_string())?;
            if dca < self.lambda {
                // rounding ΣW down lost DCA security; move up one step
                w_sum += self.step;
                continue;
            }
            let isda = self.isda_bits(p).map_err(|e| e.to_string())?;
            if isda < self.lambda {
                return Err(format!("ISDA {isda:.2} bits below target at p = {p}"));
            }
            let threshold = bf_threshold_detail(&ThresholdQuery::new(n0 * p, n0, d_v))
                .map_err(|e| e.to_string())?
                .t_max;
            let pattern = transform_pattern(n0, w_sum).map_err(|e| e.to_string())?;
            let params = SystemParams::new(n0, p, d_v, pattern, self.t).map_err(|e| e.to_string())?;
            let d_v_prime = m * d_v as f64;
            let c = complexity_c(params.n(), d_v_prime, m, self.cfg.iterations, self.cfg.alpha)
                .map_err(|e| e.to_string())?;
            return Ok(DesignResult {
                params,
                m,
                d_v_prime,
                t: self.t,
                t_prime,
                threshold,
                c_log2: c.log2(),
                bf_margin: threshold as i64 - t_prime as i64,
                dca_bits: dca,
                isda_bits: isda,
                h_enum_bits: h_enum,
            });
        }
    }
}

pub fn optimize_design(cfg: &OptimizerConfig) -> Result<OptimizerReport> {
    let step = cfg.validate()?;
    let lambda = cfg.target_security_bits;
    let (d_v_prime, t) = security_targets(lambda, cfg.n0, cfg.p_ref())?;
    let mut candidates = if cfg.d_v_candidates.is_empty() {
        let mut c: Vec<usize> = (3..=d_v_prime).step_by(2).collect();
        c.push(d_v_prime);
        c
    } else {
        cfg.d_v_candidates.clone()
    };
    candidates.sort_unstable();
    candidates.dedup();

    let eval = Evaluator {
        cfg,
        lambda,
        d_v_prime,
        t,
        step,
        dca: Mutex::new(HashMap::new()),
        isda: Mutex::new(HashMap::new()),
    };
    let outcomes: Vec<(usize, std::result::Result<DesignResult, String>)> =
        candidates.par_iter().map(|&d| (d, eval.evaluate(d))).collect();

    let mut rows = Vec::new();
    let mut rejections = Vec::new();
    for (d_v, outcome) in outcomes {
        match outcome {
            Ok(r) => rows.push(r),
            Err(reason) => rejections.push(Rejection { d_v, reason }),
        }
    }
    rows.sort_by(|a, b| a.c_log2.total_cmp(&b.c_log2).then(a.params.d_v.cmp(&b.params.d_v)));
    Ok(OptimizerReport { lambda, targets: (d_v_prime, t), rows, rejections })
}

impl OptimizerReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d_v,m,p,n,t,t_prime,threshold,c,c_log2,dca_bits,isda_bits,h_enum_bits,w_sum\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.4},{},{},{},{},{},{:.0},{:.4},{:.2},{:.2},{:.2},{}\n",
                r.params.d_v,
                r.m,
                r.params.p,
                r.params.n(),
                r.t,
                r.t_prime,
                r.threshold,
                r.c_log2.exp2(),
                r.c_log2,
                r.dca_bits,
                r.isda_bits,
                r.h_enum_bits,
                r.params.w_sum()
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "security target {} bits: d_v' = {}, t = {}\n{:>5} {:>7} {:>6} {:>6} {:>4} {:>5} {:>6} {:>12} {:>8} {:>8} {:>8}\n",
            self.lambda,
            self.targets.0,
            self.targets.1,
            "d_v",
            "m",
            "p",
            "n",
            "t",
            "t'",
            "thr",
            "C",
            "log2 C",
            "DCA",
            "ISDA"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>5} {:>7.3} {:>6} {:>6} {:>4} {:>5} {:>6} {:>12.0} {:>8.2} {:>8.2} {:>8.2}\n",
                r.params.d_v,
                r.m,
                r.params.p,
                r.params.n(),
                r.t,
                r.t_prime,
                r.threshold,
                r.c_log2.exp2(),
                r.c_log2,
                r.dca_bits,
                r.isda_bits
            ));
        }
        for rej in &self.rejections {
            out.push_str(&format!("# d_v = {} rejected: {}\n", rej.d_v, rej.reason));
        }
        out
    }
}
