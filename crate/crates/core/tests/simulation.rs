use qcmc_core::decoder::DecoderConfig;
use qcmc_core::design::{Construction, ParityCheck, SystemParams};
use qcmc_core::rng::Seed;
use qcmc_core::sim::{run_trials, run_trials_with, sweep, CodewordMode, TrialReport};
use qcmc_core::threshold::{bf_threshold, ThresholdQuery};

fn code(n0: usize, p: usize, d_v: usize, construction: Construction, seed: u64) -> ParityCheck {
    let params = SystemParams::with_permutation(n0, p, d_v, 0).unwrap();
    ParityCheck::generate(&params, &Seed::from_u64(seed), construction).unwrap()
}

/// Standard error of the difference of two independent CER estimates.
fn sigma_diff(a: &TrialReport, b: &TrialReport) -> f64 {
    let var = |r: &TrialReport| r.cer * (1.0 - r.cer) / r.trials as f64;
    (var(a) + var(b)).sqrt().max(1.0 / a.trials as f64)
}

#[test]
fn zero_and_random_codewords_agree() {
    let h = code(4, 256, 5, Construction::Random, 3);
    let cfg = DecoderConfig::bf_variable(0);
    let zero = run_trials_with(&h, &cfg, 16, 1000, &Seed::from_u64(10), CodewordMode::Zero).unwrap();
    let random = run_trials_with(&h, &cfg, 16, 1000, &Seed::from_u64(11), CodewordMode::Random).unwrap();
    assert!(zero.cer > 0.05 && zero.cer < 0.95, "uninformative operating point: {}", zero.cer);
    assert!((zero.cer - random.cer).abs() <= 3.0 * sigma_diff(&zero, &random), "{} vs {}", zero.cer, random.cer);
}

#[test]
fn error_rate_rises_with_error_count() {
    let h = code(4, 256, 5, Construction::Random, 3);
    let ts: Vec<usize> = (6..=30).step_by(2).collect();
    let reports = sweep(&h, &DecoderConfig::bf_variable(0), &ts, 500, &Seed::from_u64(5)).unwrap();
    for w in reports.windows(2) {
        assert!(w[1].cer >= w[0].cer - 3.0 * sigma_diff(&w[0], &w[1]), "t={}: {} then {}", w[1].t_err, w[0].cer, w[1].cer);
    }
    assert!(reports[0].cer < 0.05 && reports.last().unwrap().cer > 0.95);
}

#[test]
fn worker_count_does_not_change_results() {
    let h = code(4, 256, 5, Construction::Random, 3);
    let run = |jobs: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().unwrap();
        pool.install(|| run_trials(&h, &DecoderConfig::spa_for(16, 1024), 16, 300, &Seed::from_u64(9)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn difference_family_and_random_codes_perform_alike() {
    let random = code(4, 4096, 13, Construction::Random, 3);
    let rdf = code(4, 4096, 13, Construction::Rdf, 3);
    let cfg = DecoderConfig::bf_variable(0);
    let a = run_trials(&random, &cfg, 200, 400, &Seed::from_u64(1)).unwrap();
    let b = run_trials(&rdf, &cfg, 200, 400, &Seed::from_u64(2)).unwrap();
    assert!(a.cer > 0.05 && a.cer < 0.95, "uninformative operating point: {}", a.cer);
    assert!((a.cer - b.cer).abs() <= 3.0 * sigma_diff(&a, &b), "random {} vs rdf {}", a.cer, b.cer);
}

#[test]
fn iterations_near_threshold_are_close_to_ten() {
    let h = code(4, 4096, 13, Construction::Random, 3);
    let t_max = bf_threshold(&ThresholdQuery::new(h.n(), 4, 13)).unwrap();
    let t = t_max * 95 / 100;
    let r = run_trials(&h, &DecoderConfig::bf_variable(1), t, 256, &Seed::from_u64(4)).unwrap();
    assert!(r.avg_iterations >= 5.0 && r.avg_iterations <= 20.0, "t={t}: {}", r.avg_iterations);
}
