//! Batch experiment driver: simulate, estimate with each method, evaluate.

use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use soundfield::{
    build_gram_set, estimated_field, make_grid, nmse, observe, solve_alpha,
    solve_l1, solve_l2, true_field, EstimatorState, GramSet, KernelBank, L1Options, L2Options,
    MicArray, Scene, C64,
};

use crate::config::{ExperimentConfig, Method};

/// One (frequency, method, seed) outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub frequency_hz: f64,
    pub method: String,
    pub seed: u64,
    pub nmse_db: f64,
    /// Fraction of learned weights below 1e-8.
    pub sparsity: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub gamma: Vec<f64>,
    /// Wall time is informational only and never written to output files,
    /// so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Seed-aggregated NMSE for one (frequency, method).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub frequency_hz: f64,
    pub method: String,
    pub num_seeds: usize,
    pub nmse_mean_db: f64,
    pub nmse_min_db: f64,
    pub nmse_max_db: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<CaseRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Everything shared by the seeds of one frequency.
struct FrequencyContext {
    frequency: f64,
    grams: GramSet,
    baseline_gram: GramSet,
    bank: KernelBank,
    baseline_bank: KernelBank,
    u_true: Vec<C64>,
}

fn frequency_context(
    cfg: &ExperimentConfig,
    scene: &Scene,
    mics: &MicArray,
    grid: &soundfield::EvalGrid,
    frequency: f64,
) -> Result<FrequencyContext> {
    let k = scene.wavenumber(frequency);
    let bank = cfg.build_bank(k)?;
    let baseline_bank = cfg.build_baseline_bank(k)?;
    let grams = build_gram_set(mics, &bank);
    let baseline_gram = build_gram_set(mics, &baseline_bank);
    let u_true = true_field(scene, grid, frequency)?;
    Ok(FrequencyContext { frequency, grams, baseline_gram, bank, baseline_bank, u_true })
}

fn run_case(
    cfg: &ExperimentConfig,
    fc: &FrequencyContext,
    mics: &MicArray,
    grid: &soundfield::EvalGrid,
    method: Method,
    s: &[C64],
    seed: u64,
) -> Result<CaseRecord> {
    let lambda = cfg.solver.lambda;
    let start = Instant::now();
    let (gamma, alpha, iterations, converged, bank) = match method {
        Method::Baseline => {
            let k = soundfield::mix_gram(&fc.baseline_gram, &[1.0])?;
            let alpha = solve_alpha(&k, s, lambda)?;
            (vec![1.0], alpha, 0, true, &fc.baseline_bank)
        }
        Method::L1 => {
            let res = solve_l1(&fc.grams, s, lambda, &L1Options::default())?;
            (res.gamma.into_vec(), res.alpha, res.iterations, res.converged, &fc.bank)
        }
        Method::L2 => {
            let res = solve_l2(&fc.grams, s, lambda, &L2Options::default())?;
            (res.gamma.into_vec(), res.alpha, res.iterations, res.converged, &fc.bank)
        }
    };
    let state = EstimatorState::new(alpha, bank.clone(), gamma.clone(), mics.positions().to_vec())?;
    let u_est = estimated_field(&state, grid);
    let nmse_db = nmse(&fc.u_true, &u_est)?;
    let sparsity = gamma.iter().filter(|g| **g < 1e-8).count() as f64 / gamma.len() as f64;
    Ok(CaseRecord {
        frequency_hz: fc.frequency,
        method: method.name().to_string(),
        seed,
        nmse_db,
        sparsity,
        iterations,
        converged,
        gamma,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every (frequency, seed, method) case. Frequencies are processed in
/// a worker pool; the report order is (sweep order, method order, seed
/// order) regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let scene = cfg.build_scene()?;
    let mics = cfg.build_array()?;
    let grid = make_grid(&scene.target_region, cfg.evaluation.grid_spacing)
        .context("evaluation grid")?;
    let frequencies = cfg.sweep.frequencies();

    let per_freq: Vec<Result<Vec<CaseRecord>>> = frequencies
        .par_iter()
        .map(|frequency| {
            let fc = frequency_context(cfg, &scene, &mics, &grid, *frequency)?;
            let mut records = Vec::new();
            for method in &cfg.solver.methods {
                for seed in &cfg.noise.seeds {
                    let obs = observe(&scene, &mics, *frequency, cfg.noise.snr_db, Some(*seed))
                        .with_context(|| {
                            format!("observe f={frequency} seed={seed}")
                        })?;
                    let rec = run_case(cfg, &fc, &mics, &grid, *method, &obs.values, *seed)
                        .with_context(|| {
                            format!(
                                "case f={frequency} method={} seed={seed}",
                                method.name()
                            )
                        })?;
                    records.push(rec);
                }
            }
            Ok(records)
        })
        .collect();

    let mut records = Vec::new();
    for group in per_freq {
        records.extend(group?);
    }

    let aggregates = aggregate(&records);
    Ok(RunReport { records, aggregates })
}

/// Mean/min/max NMSE over seeds, in first-appearance order of
/// (frequency, method).
pub fn aggregate(records: &[CaseRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(f64, &str)> = Vec::new();
    for r in records {
        if !keys.iter().any(|(f, m)| *f == r.frequency_hz && *m == r.method) {
            keys.push((r.frequency_hz, &r.method));
        }
    }
    keys.iter()
        .map(|(f, m)| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.frequency_hz == *f && r.method == *m)
                .map(|r| r.nmse_db)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Aggregate {
                frequency_hz: *f,
                method: m.to_string(),
                num_seeds: vals.len(),
                nmse_mean_db: mean,
                nmse_min_db: min,
                nmse_max_db: max,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(methods: &str, snr: Option<f64>) -> ExperimentConfig {
        let noise = match snr {
            Some(v) => format!("[noise]\nsnr_db = {v}\nseeds = [1, 2]\n"),
            None => String::new(),
        };
        let text = format!(
            r#"
            [scene]
            speed_of_sound = 340.0
            [[scene.sources]]
            position = [2.5, 0.0, 0.0]
            amplitude = [20.0, 0.0]
            [scene.region]
            center = [0.0, 0.0, 0.0]
            radius = 0.4

            [array]
            [[array.layers]]
            count = 25
            radius = 0.40
            point_set = "t-design"

            [bank]
            d_eta = 4
            d_beta = 3

            [solver]
            lambda = 0.05
            methods = [{methods}]

            [sweep]
            start_hz = 300.0
            stop_hz = 300.0
            step_hz = 100.0

            {noise}
            [evaluation]
            grid_spacing = 0.1
            "#
        );
        toml::from_str(&text).unwrap()
    }

    #[test]
    fn noiseless_baseline_low_frequency_is_accurate() {
        // Single source, no noise, 300 Hz: with light regularization the
        // reconstruction is near-perfect.
        let mut cfg = small_cfg(r#""baseline""#, None);
        cfg.solver.lambda = 1e-4;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(
            report.records[0].nmse_db < -30.0,
            "noiseless baseline NMSE {} dB",
            report.records[0].nmse_db
        );
    }

    #[test]
    fn record_per_case_and_aggregates() {
        let cfg = small_cfg(r#""baseline", "l2""#, Some(20.0));
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.records.len(), 4); // 1 freq x 2 methods x 2 seeds
        assert_eq!(report.aggregates.len(), 2);
        for a in &report.aggregates {
            assert_eq!(a.num_seeds, 2);
            assert!(a.nmse_min_db <= a.nmse_mean_db && a.nmse_mean_db <= a.nmse_max_db);
        }
    }

    #[test]
    fn method_order_permutes_rows_not_values() {
        let a = run_experiment(&small_cfg(r#""baseline", "l2""#, Some(20.0))).unwrap();
        let b = run_experiment(&small_cfg(r#""l2", "baseline""#, Some(20.0))).unwrap();
        for ra in &a.records {
            let rb = b
                .records
                .iter()
                .find(|r| r.method == ra.method && r.seed == ra.seed)
                .unwrap();
            assert_eq!(ra.nmse_db, rb.nmse_db);
        }
    }

    #[test]
    fn baseline_equals_l1_on_single_kernel_bank() {
        // With a one-kernel β = 0 bank, L1 learning has nothing to learn
        // and must reproduce plain ridge.
        let mut cfg = small_cfg(r#""baseline", "l1""#, Some(20.0));
        cfg.bank.d_eta = 1;
        cfg.bank.d_beta = 1;
        let report = run_experiment(&cfg).unwrap();
        for seed in [1u64, 2] {
            let base = report
                .records
                .iter()
                .find(|r| r.method == "baseline" && r.seed == seed)
                .unwrap();
            let l1 = report
                .records
                .iter()
                .find(|r| r.method == "l1" && r.seed == seed)
                .unwrap();
            assert!(
                (base.nmse_db - l1.nmse_db).abs() < 1e-9,
                "baseline {} vs single-kernel L1 {}",
                base.nmse_db,
                l1.nmse_db
            );
        }
    }

    #[test]
    fn rerun_is_bitwise_deterministic() {
        let cfg = small_cfg(r#""l2""#, Some(20.0));
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(ra.nmse_db.to_bits(), rb.nmse_db.to_bits());
            assert_eq!(ra.gamma, rb.gamma);
        }
    }
}
