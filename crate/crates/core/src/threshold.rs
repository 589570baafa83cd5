//! Asymptotic bit-flipping decoding threshold.
//!
//! The expected error fraction is tracked with Gallager's algorithm-B
//! recursion on a cycle-free Tanner graph with variable degree `d_v` and check
//! degree `d_c = n0·d_v`. With `p0 = t/n` the channel error fraction and `q`
//! the current one, a check seen by a bit is unsatisfied with probability
//! `(1 ∓ (1-2q)^(d_c-1))/2` (bit correct / in error), a bit is flipped when at
//! least `b` of its `d_v - 1` other checks are unsatisfied, and
//!
//! ```text
//! q' = p0·(1 - P_flip|error) + (1 - p0)·P_flip|correct
//! ```
//!
//! The threshold is the largest integer `t` for which `n·q` falls strictly at
//! every step and drops below one error within the step budget, maximised
//! over the fixed decision threshold `b`.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdQuery {
    pub n: usize,
    pub n0: usize,
    pub d_v: usize,
    pub max_recursion_steps: usize,
}

impl ThresholdQuery {
    pub fn new(n: usize, n0: usize, d_v: usize) -> Self {
        ThresholdQuery { n, n0, d_v, max_recursion_steps: 100 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.d_v < 2 {
            return Err(Error::param("threshold needs n0 >= 1 and d_v >= 2"));
        }
        if self.n0 * self.d_v >= self.n {
            return Err(Error::param(format!(
                "row weight d_c = {} must be below n = {}",
                self.n0 * self.d_v,
                self.n
            )));
        }
        Ok(())
    }

    fn d_c(&self) -> usize {
        self.n0 * self.d_v
    }

    /// Admissible fixed decision thresholds over the `d_v - 1` extrinsic checks.
    pub fn decision_thresholds(&self) -> std::ops::RangeInclusive<usize> {
        let d = self.d_v - 1;
        d.div_ceil(2).max(1)..=d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdResult {
    pub t_max: usize,
    /// Decision threshold attaining `t_max` (smallest such `b`).
    pub b_opt: usize,
}

/// Conditional probabilities of one recursion step at error fraction `q`.
#[derive(Clone, Copy, Debug)]
pub struct StepProbabilities {
    pub unsat_given_correct: f64,
    pub unsat_given_error: f64,
    pub flip_given_correct: f64,
    pub flip_given_error: f64,
}

struct Binomials(Vec<f64>);

impl Binomials {
    fn row(d: usize) -> Self {
        let mut row = vec![1.0f64; d + 1];
        for j in 1..=d {
            row[j] = row[j - 1] * (d + 1 - j) as f64 / j as f64;
        }
        Binomials(row)
    }

    /// `P[Bin(d, x) >= b]`.
    fn upper_tail(&self, x: f64, b: usize) -> f64 {
        let d = self.0.len() - 1;
        (b..=d).map(|j| self.0[j] * x.powi(j as i32) * (1.0 - x).powi((d - j) as i32)).sum::<f64>().clamp(0.0, 1.0)
    }
}

struct Recursion {
    q: ThresholdQuery,
    binom: Binomials,
}

impl Recursion {
    fn new(q: ThresholdQuery) -> Self {
        Recursion { q, binom: Binomials::row(q.d_v - 1) }
    }

    fn probabilities(&self, frac: f64, b: usize) -> StepProbabilities {
        let x = (1.0 - 2.0 * frac).powi((self.q.d_c() - 1) as i32);
        let unsat_given_correct = ((1.0 - x) / 2.0).clamp(0.0, 1.0);
        let unsat_given_error = ((1.0 + x) / 2.0).clamp(0.0, 1.0);
        StepProbabilities {
            unsat_given_correct,
            unsat_given_error,
            flip_given_correct: self.binom.upper_tail(unsat_given_correct, b),
            flip_given_error: self.binom.upper_tail(unsat_given_error, b),
        }
    }

    fn next(&self, p0: f64, frac: f64, b: usize) -> f64 {
        let pr = self.probabilities(frac, b);
        p0 * (1.0 - pr.flip_given_error) + (1.0 - p0) * pr.flip_given_correct
    }

    fn converges(&self, t: usize, b: usize) -> bool {
        let n = self.q.n as f64;
        let p0 = t as f64 / n;
        let mut frac = p0;
        if frac * n < 1.0 {
            return true;
        }
        for _ in 0..self.q.max_recursion_steps {
            let next = self.next(p0, frac, b);
            if next >= frac {
                return false;
            }
            frac = next;
            if frac * n < 1.0 {
                return true;
            }
        }
        false
    }

    fn largest_converging(&self, b: usize) -> usize {
        let n = self.q.n;
        let mut hi = 1;
        while hi < n && self.converges(hi, b) {
            hi *= 2;
        }
        let mut lo = hi / 2; // converges (or 0)
        let mut hi = hi.min(n);
        if self.converges(hi, b) {
            return hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.converges(mid, b) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Expected error fraction after one step, starting from `t` errors.
pub fn recursion_step(q: &ThresholdQuery, t: f64, b: usize) -> f64 {
    let r = Recursion::new(*q);
    let p0 = t / q.n as f64;
    r.next(p0, p0, b) * q.n as f64
}

/// Step probabilities at error count `t` (first iteration, `q = p0`).
pub fn step_probabilities(q: &ThresholdQuery, t: f64, b: usize) -> StepProbabilities {
    Recursion::new(*q).probabilities(t / q.n as f64, b)
}

/// Whether the recursion started at `t` errors converges with threshold `b`.
pub fn converges(q: &ThresholdQuery, t: usize, b: usize) -> Result<bool> {
    q.validate()?;
    Ok(Recursion::new(*q).converges(t, b))
}

pub fn bf_threshold_detail(q: &ThresholdQuery) -> Result<ThresholdResult> {
    q.validate()?;
    let r = Recursion::new(*q);
    let mut best = ThresholdResult { t_max: 0, b_opt: *q.decision_thresholds().start() };
    for b in q.decision_thresholds() {
        let t = r.largest_converging(b);
        if t > best.t_max {
            best = ThresholdResult { t_max: t, b_opt: b };
        }
    }
    Ok(best)
}

pub fn bf_threshold(q: &ThresholdQuery) -> Result<usize> {
    bf_threshold_detail(q).map(|r| r.t_max)
}

/// Whether some decision threshold lets the recursion converge from `t`.
pub fn corrects(q: &ThresholdQuery, t: usize) -> Result<bool> {
    q.validate()?;
    let r = Recursion::new(*q);
    Ok(q.decision_thresholds().any(|b| r.converges(t, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdRow {
    pub n: usize,
    pub d_v: usize,
    pub b_opt: usize,
    pub t_max: usize,
}

/// Threshold over a `(p, d_v)` grid at fixed `n0`, rows ordered by `d_v` then `n`.
pub fn threshold_grid(n0: usize, d_vs: &[usize], ps: &[usize]) -> Result<Vec<ThresholdRow>> {
    let points: Vec<(usize, usize)> =
        d_vs.iter().flat_map(|&d| ps.iter().map(move |&p| (d, p))).collect();
    points
        .par_iter()
        .map(|&(d_v, p)| {
            let n = n0 * p;
            let r = bf_threshold_detail(&ThresholdQuery::new(n, n0, d_v))?;
            Ok(ThresholdRow { n, d_v, b_opt: r.b_opt, t_max: r.t_max })
        })
        .collect()
}

pub fn threshold_csv(rows: &[ThresholdRow]) -> String {
    let mut out = String::from("n,d_v,b_opt,t_max\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.d_v, r.b_opt, r.t_max));
    }
    out
}
