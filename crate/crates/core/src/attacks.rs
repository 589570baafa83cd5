//! Work factors of the attacks that bound the security level: low-weight
//! codeword search in the dual of the public code (DCA) and information-set
//! decoding of an intercepted ciphertext (ISDA).
//!
//! Both reduce to a Stern-type search for one of `n_targets` weight-`w`
//! codewords in an `[n, k]` code. Per iteration an information set is split
//! into halves of sizes `⌊k/2⌋` and `⌈k/2⌉`, each expected to hold `p_s`
//! ones, and a window of `ℓ` redundancy positions must be zero:
//!
//! ```text
//! π_one     = C(⌊k/2⌋, p_s) · C(⌈k/2⌉, p_s) · C(n-k-ℓ, w-2p_s) / C(n, w)
//! π_success = 1 - (1 - π_one)^n_targets
//! cost_iter = (n-k)²(n+k)/2 + 2ℓ·p_s·C(⌈k/2⌉, p_s) + 2p_s(n-k)·C(⌈k/2⌉, p_s)² / 2^ℓ
//! WF        = min over (p_s, ℓ) of cost_iter / π_success
//! ```
//!
//! All binomials are handled as exact sums of base-2 logarithms.

use rayon::prelude::*;

use crate::design::SystemParams;
use crate::error::{Error, Result};

pub const MAX_SPLIT_WEIGHT: usize = 10;
pub const MAX_WINDOW: usize = 60;

/// `log2(i!)` for `i = 0..=n`.
#[derive(Clone, Debug)]
pub struct LogFactorials(Vec<f64>);

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let mut t = Vec::with_capacity(n + 1);
        t.push(0.0);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).log2();
            t.push(acc);
        }
        LogFactorials(t)
    }

    /// `log2 C(a, b)`, `-inf` when `b > a`.
    pub fn binomial(&self, a: usize, b: usize) -> f64 {
        if b > a {
            return f64::NEG_INFINITY;
        }
        self.0[a] - self.0[b] - self.0[a - b]
    }
}

pub fn log2_binomial(a: usize, b: usize) -> f64 {
    LogFactorials::new(a).binomial(a, b)
}

/// `log2(2^x + 2^y)`.
fn log2_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsdInstance {
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub n_targets: u64,
}

impl IsdInstance {
    pub fn new(n: usize, k: usize, w: usize, n_targets: u64) -> Result<Self> {
        let inst = IsdInstance { n, k, w, n_targets };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 || self.w > self.n {
            return Err(Error::param(format!("target weight {} outside (0, n={}]", self.w, self.n)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::param(format!("dimension {} outside (0, n={})", self.k, self.n)));
        }
        if self.n_targets == 0 {
            return Err(Error::param("at least one target codeword is required"));
        }
        Ok(())
    }

    /// `log2 π_one`, or `None` when `(p_s, ℓ)` is outside the admissible region.
    pub fn log2_single_target_probability(&self, lf: &LogFactorials, p_s: usize, ell: usize) -> Option<f64> {
        let (n, k, w) = (self.n, self.k, self.w);
        if ell > n - k || 2 * p_s > w || w - 2 * p_s > n - k - ell {
            return None;
        }
        let v = lf.binomial(k / 2, p_s) + lf.binomial(k.div_ceil(2), p_s) + lf.binomial(n - k - ell, w - 2 * p_s)
            - lf.binomial(n, w);
        v.is_finite().then_some(v)
    }

    /// `log2 π_success` over all targets.
    pub fn log2_success_probability(&self, lf: &LogFactorials, p_s: usize, ell: usize) -> Option<f64> {
        let lp = self.log2_single_target_probability(lf, p_s, ell)?;
        let targets = self.n_targets as f64;
        let approx = lp + targets.log2();
        if approx < -20.0 {
            return Some(approx);
        }
        let pi = lp.exp2().min(1.0);
        let v = -(targets * (-pi).ln_1p()).exp_m1();
        Some(v.log2().min(0.0))
    }

    pub fn log2_cost_per_iteration(&self, lf: &LogFactorials, p_s: usize, ell: usize) -> f64 {
        let (n, k) = (self.n as f64, self.k as f64);
        let r = n - k;
        let half = lf.binomial(self.k.div_ceil(2), p_s);
        let elimination = (r * r * (n + k) / 2.0).log2();
        let lists = (2.0 * ell as f64 * p_s as f64).log2() + half;
        let collisions = (2.0 * p_s as f64 * r).log2() + 2.0 * half - ell as f64;
        log2_add(log2_add(elimination, lists), collisions)
    }

    /// `log2(cost_iter / π_success)` at one grid point.
    pub fn log2_work_factor_at(&self, lf: &LogFactorials, p_s: usize, ell: usize) -> Option<f64> {
        let ls = self.log2_success_probability(lf, p_s, ell)?;
        Some(self.log2_cost_per_iteration(lf, p_s, ell) - ls)
    }
}

/// Attack cost with the parameters attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WfReport {
    pub log2_wf: f64,
    pub p_s: usize,
    pub ell: usize,
    /// Shifted ciphertexts used (ISDA); 0 for DCA.
    pub s: usize,
    /// The optimum sits on the upper edge of the `(p_s, ℓ)` grid.
    pub at_grid_boundary: bool,
}

fn isd_wf_with(inst: &IsdInstance, lf: &LogFactorials) -> Option<WfReport> {
    let mut best: Option<WfReport> = None;
    for p_s in 1..=MAX_SPLIT_WEIGHT {
        for ell in 1..=MAX_WINDOW {
            let Some(v) = inst.log2_work_factor_at(lf, p_s, ell) else {
                continue;
            };
            if best.is_none_or(|b| v < b.log2_wf) {
                best = Some(WfReport {
                    log2_wf: v,
                    p_s,
                    ell,
                    s: 0,
                    at_grid_boundary: p_s == MAX_SPLIT_WEIGHT || ell == MAX_WINDOW,
                });
            }
        }
    }
    best
}

pub fn isd_wf(inst: &IsdInstance) -> Result<WfReport> {
    inst.validate()?;
    let lf = LogFactorials::new(inst.n);
    isd_wf_with(inst, &lf).ok_or_else(|| {
        Error::param(format!("no feasible (p_s, ell) for n={} k={} w={}", inst.n, inst.k, inst.w))
    })
}

/// Dual-code attack on `n0` blocks of size `p` looking for the `p` rows of
/// weight `w` of the public sparse parity-check matrix.
pub fn dca_wf_for(n0: usize, p: usize, w: usize) -> Result<WfReport> {
    isd_wf(&IsdInstance::new(n0 * p, p, w, p as u64)?)
}

pub fn dca_wf(params: &SystemParams) -> Result<WfReport> {
    dca_wf_for(params.n0, params.p, params.d_c_prime())
}

/// Information-set decoding of a weight-`t` error with the attacker choosing
/// how many block-wise shifted ciphertexts to append to the public code.
pub fn isda_wf_for(n0: usize, p: usize, t: usize) -> Result<WfReport> {
    let n = n0 * p;
    if n0 < 2 {
        return Err(Error::param("n0 must be at least 2"));
    }
    IsdInstance::new(n, (n0 - 1) * p + 1, t, 1)?;
    let lf = LogFactorials::new(n);
    (1..=p)
        .into_par_iter()
        .filter_map(|s| {
            let inst = IsdInstance { n, k: (n0 - 1) * p + s, w: t, n_targets: s as u64 };
            if inst.k >= n {
                return None;
            }
            isd_wf_with(&inst, &lf).map(|r| WfReport { s, ..r })
        })
        .min_by(|a, b| a.log2_wf.total_cmp(&b.log2_wf).then(a.s.cmp(&b.s)))
        .ok_or_else(|| Error::param(format!("no feasible ISD parameters for n={n} t={t}")))
}

pub fn isda_wf(params: &SystemParams) -> Result<WfReport> {
    isda_wf_for(params.n0, params.p, params.t)
}

/// `log2(p^n0 · n0!)`: number of QC permutation matrices.
pub fn q_space_size(p: usize, n0: usize) -> f64 {
    n0 as f64 * (p as f64).log2() + (1..=n0).map(|i| (i as f64).log2()).sum::<f64>()
}

/// `log2 C(p, d_v)`: enumerating the first row of one circulant block.
pub fn h_enumeration_wf(p: usize, d_v: usize) -> Result<f64> {
    if d_v > p {
        return Err(Error::param(format!("d_v={d_v} exceeds p={p}")));
    }
    Ok(log2_binomial(p, d_v))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WfRow {
    pub p: usize,
    /// `d_v'` for DCA rows, `t` for ISDA rows.
    pub x: usize,
    pub report: WfReport,
}

/// DCA work factor against `d_v'` (one row per value) at fixed `n0`, `p`.
pub fn dca_curve(n0: usize, p: usize, d_v_primes: &[usize]) -> Result<Vec<WfRow>> {
    d_v_primes
        .par_iter()
        .map(|&d| Ok(WfRow { p, x: d, report: dca_wf_for(n0, p, n0 * d)? }))
        .collect()
}

/// ISDA work factor against `t` at fixed `n0`, `p`.
pub fn isda_curve(n0: usize, p: usize, ts: &[usize]) -> Result<Vec<WfRow>> {
    ts.iter().map(|&t| Ok(WfRow { p, x: t, report: isda_wf_for(n0, p, t)? })).collect()
}

pub fn wf_csv(x_name: &str, rows: &[WfRow]) -> String {
    let mut out = format!("p,{x_name},log2_wf,wf,p_s,ell,s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.4},{:.4e},{},{},{}\n",
            r.p,
            r.x,
            r.report.log2_wf,
            r.report.log2_wf.exp2(),
            r.report.p_s,
            r.report.ell,
            r.report.s
        ));
    }
    out
}
