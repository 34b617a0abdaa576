//! End-to-end acceptance gate. Runs every criterion in order and prints one
//! PASS/FAIL line per criterion (visible with `--nocapture`, or on failure).

use std::path::PathBuf;
use std::time::Instant;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use sfield_cli::config::ExperimentConfig;
use sfield_cli::experiment::{run_experiment, RunReport};
use sfield_cli::export::{export_report, ReportFormat};
use soundfield::{
    build_gram_set, grad_j, kappa_directional, kappa_quadrature_oracle, objective_j, observe,
    solve_l1, solve_l2, KernelBank, L1Options, L2Options, MicArray, Position3, SubKernelParam,
    C64,
};

fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + u * (hi - lo)
}

fn random_pos(rng: &mut ChaCha12Rng, half: f64) -> Position3 {
    Position3::new(
        uniform(rng, -half, half),
        uniform(rng, -half, half),
        uniform(rng, -half, half),
    )
}

fn random_unit(rng: &mut ChaCha12Rng) -> [f64; 3] {
    loop {
        let v = [
            uniform(rng, -1.0, 1.0),
            uniform(rng, -1.0, 1.0),
            uniform(rng, -1.0, 1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn random_signal(rng: &mut ChaCha12Rng, m: usize) -> Vec<C64> {
    (0..m)
        .map(|_| C64::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)))
        .collect()
}

fn shipped_config() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/two-monopole-free-field.toml");
    ExperimentConfig::load(&path).expect("shipped config loads")
}

struct Gate {
    failures: Vec<usize>,
}

impl Gate {
    fn check(&mut self, n: usize, desc: &str, ok: bool, detail: String) {
        println!(
            "{} criterion {n}: {desc} ({detail})",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            self.failures.push(n);
        }
    }
}

fn criterion_1(gate: &mut Gate) {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let k = 2.0 * std::f64::consts::PI * 900.0 / 340.0;

    let mut max_diag: f64 = 0.0;
    for beta in 0..10 {
        for _ in 0..100 {
            let r = random_pos(&mut rng, 0.5);
            let p = SubKernelParam::new(random_unit(&mut rng), beta as f64).unwrap();
            let v = kappa_directional(&r, &r, &p, k);
            max_diag = max_diag.max((v - C64::new(1.0, 0.0)).norm());
        }
    }

    let mut max_herm: f64 = 0.0;
    let mut max_sinc: f64 = 0.0;
    for _ in 0..1000 {
        let r1 = random_pos(&mut rng, 0.5);
        let r2 = random_pos(&mut rng, 0.5);
        let p = SubKernelParam::new(random_unit(&mut rng), uniform(&mut rng, 0.0, 9.0)).unwrap();
        let v12 = kappa_directional(&r1, &r2, &p, k);
        let v21 = kappa_directional(&r2, &r1, &p, k);
        max_herm = max_herm.max((v21 - v12.conj()).norm());

        let p0 = SubKernelParam::new(random_unit(&mut rng), 0.0).unwrap();
        let v0 = kappa_directional(&r1, &r2, &p0, k);
        let z = k * r1.distance(&r2);
        let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
        max_sinc = max_sinc.max((v0 - C64::new(sinc, 0.0)).norm());
    }
    let elapsed = started.elapsed().as_secs_f64();
    gate.check(
        1,
        "kernel identities (unit diagonal, Hermitian, beta=0 sinc)",
        max_diag < 1e-10 && max_herm < 1e-12 && max_sinc < 1e-12 && elapsed < 1.0,
        format!(
            "diag {max_diag:.2e}, herm {max_herm:.2e}, sinc {max_sinc:.2e}, {elapsed:.2} s"
        ),
    );
}

fn criterion_2(gate: &mut Gate) {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let mut max_abs: f64 = 0.0;
    for _ in 0..200 {
        // keep k·distance <= 20 by sampling the frequency range and
        // shrinking the position box accordingly
        let freq = uniform(&mut rng, 100.0, 1000.0);
        let k = 2.0 * std::f64::consts::PI * freq / 340.0;
        let half = (20.0 / k / (2.0 * 3f64.sqrt())).min(0.5);
        let r1 = random_pos(&mut rng, half);
        let r2 = random_pos(&mut rng, half);
        assert!(k * r1.distance(&r2) <= 20.0);
        let p = SubKernelParam::new(random_unit(&mut rng), uniform(&mut rng, 0.0, 9.0)).unwrap();
        let closed = kappa_directional(&r1, &r2, &p, k);
        let quad = kappa_quadrature_oracle(&r1, &r2, &p, k, 48).unwrap();
        max_abs = max_abs.max((closed - quad).norm());
    }
    let elapsed = started.elapsed().as_secs_f64();
    gate.check(
        2,
        "closed form matches spherical quadrature on 200 instances",
        max_abs < 1e-6 && elapsed < 30.0,
        format!("max abs err {max_abs:.2e}, {elapsed:.2} s"),
    );
}

fn criterion_3(gate: &mut Gate) {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let m = 3 + (rng.next_u64() % 6) as usize; // 3..=8
        let d = 2 + (rng.next_u64() % 4) as usize; // 2..=5
        let mics = MicArray::new((0..m).map(|_| random_pos(&mut rng, 0.4)).collect()).unwrap();
        let params: Vec<SubKernelParam> = (0..d)
            .map(|i| {
                SubKernelParam::new(random_unit(&mut rng), i as f64 + uniform(&mut rng, 0.0, 0.5))
                    .unwrap()
            })
            .collect();
        let k = uniform(&mut rng, 5.0, 18.0);
        let bank = KernelBank::new(params, k).unwrap();
        let gs = build_gram_set(&mics, &bank);
        let s = random_signal(&mut rng, m);
        let lambda = 1e-2;
        let gamma = vec![1.0 / d as f64; d];
        let (_, alpha, _) = objective_j(&gs, &gamma, &s, lambda).unwrap();
        let grad = grad_j(&gs, &alpha, lambda);
        let h = 1e-6;
        for i in 0..d {
            let mut gp = gamma.clone();
            let mut gm = gamma.clone();
            gp[i] += h;
            gm[i] -= h;
            let jp = objective_j(&gs, &gp, &s, lambda).unwrap().0;
            let jm = objective_j(&gs, &gm, &s, lambda).unwrap().0;
            let fd = (jp - jm) / (2.0 * h);
            let rel = (grad[i] - fd).abs() / fd.abs().max(1e-12);
            worst = worst.max(rel);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    gate.check(
        3,
        "gradient matches central finite differences on 50 instances",
        worst < 1e-4 && elapsed < 10.0,
        format!("max rel err {worst:.2e}, {elapsed:.2} s"),
    );
}

fn criterion_4(gate: &mut Gate, cfg: &ExperimentConfig) {
    let scene = cfg.build_scene().unwrap();
    let mics = cfg.build_array().unwrap();
    let k = scene.wavenumber(900.0);
    let bank = cfg.build_bank(k).unwrap();
    let gs = build_gram_set(&mics, &bank);
    let obs = observe(&scene, &mics, 900.0, cfg.noise.snr_db, Some(1)).unwrap();

    let l1 = solve_l1(&gs, &obs.values, cfg.solver.lambda, &L1Options::default()).unwrap();
    let mut simplex_defect: f64 = 0.0;
    let mut min_gamma: f64 = 0.0;
    for g in &l1.gamma_history {
        simplex_defect = simplex_defect.max((g.iter().sum::<f64>() - 1.0).abs());
        min_gamma = min_gamma.min(g.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    let mut j_increase: f64 = 0.0;
    for w in l1.j_history.windows(2) {
        j_increase = j_increase.max(w[1] - w[0]);
    }

    let l2 = solve_l2(&gs, &obs.values, cfg.solver.lambda, &L2Options::default()).unwrap();
    let mut ball_defect: f64 = 0.0;
    for g in l2.gamma_history.iter().skip(1) {
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        ball_defect = ball_defect.max((norm - 1.0).abs());
    }

    gate.check(
        4,
        "constraints preserved across full runs on the shipped experiment scene",
        simplex_defect < 1e-12 && min_gamma >= 0.0 && j_increase <= 1e-12 && ball_defect < 1e-12,
        format!(
            "simplex defect {simplex_defect:.2e}, min gamma {min_gamma:.1e}, \
             max J increase {j_increase:.2e}, L2 ball defect {ball_defect:.2e}"
        ),
    );
}

fn criterion_5(gate: &mut Gate) {
    let started = Instant::now();
    // L1 vs exhaustive simplex search, D = 3, M = 4, resolution 0.01.
    let mics = MicArray::new(vec![
        Position3::new(0.0, 0.0, 0.0),
        Position3::new(0.15, 0.0, 0.0),
        Position3::new(0.0, 0.2, 0.0),
        Position3::new(-0.1, -0.1, 0.1),
    ])
    .unwrap();
    let k = 14.0;
    let params: Vec<SubKernelParam> = [0.0f64, 2.5, 6.0]
        .iter()
        .enumerate()
        .map(|(i, beta)| {
            SubKernelParam::from_angles(0.7 * i as f64, std::f64::consts::FRAC_PI_2, *beta)
                .unwrap()
        })
        .collect();
    let bank = KernelBank::new(params, k).unwrap();
    let gs = build_gram_set(&mics, &bank);
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let s = random_signal(&mut rng, 4);
    let lambda = 1e-2;
    let l1 = solve_l1(&gs, &s, lambda, &L1Options::default()).unwrap();
    let j_l1 = *l1.j_history.last().unwrap();
    let mut j_grid = f64::INFINITY;
    for i in 0..=100usize {
        for j in 0..=(100 - i) {
            let g = [i as f64 / 100.0, j as f64 / 100.0, (100 - i - j) as f64 / 100.0];
            j_grid = j_grid.min(objective_j(&gs, &g, &s, lambda).unwrap().0);
        }
    }
    let l1_gap = j_l1 - j_grid;

    // L2 vs exhaustive arc search, D = 2, resolution 0.001 rad.
    let mics2 = soundfield::spherical_layer_layout(6, 0.4, soundfield::PointSet::Fibonacci)
        .unwrap();
    let params2 = vec![
        SubKernelParam::from_angles(0.0, std::f64::consts::FRAC_PI_2, 0.0).unwrap(),
        SubKernelParam::from_angles(1.0, std::f64::consts::FRAC_PI_2, 5.0).unwrap(),
    ];
    let bank2 = KernelBank::new(params2, 12.0).unwrap();
    let gs2 = build_gram_set(&mics2, &bank2);
    let a = random_signal(&mut rng, 6);
    let s2 = gs2.grams()[1].matvec(&a);
    let l2 = solve_l2(&gs2, &s2, lambda, &L2Options::default()).unwrap();
    let mut best = (f64::INFINITY, 0.0f64);
    let mut th = 0.0;
    while th <= std::f64::consts::FRAC_PI_2 {
        let g = [th.cos(), th.sin()];
        let jv = objective_j(&gs2, &g, &s2, lambda).unwrap().0;
        if jv < best.0 {
            best = (jv, th);
        }
        th += 0.001;
    }
    let g_best = [best.1.cos(), best.1.sin()];
    let l2_gap = l2
        .gamma
        .as_slice()
        .iter()
        .zip(g_best.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let elapsed = started.elapsed().as_secs_f64();
    gate.check(
        5,
        "small-instance optimality vs grid-search oracles",
        l1_gap <= 1e-6 && l2_gap < 0.02 && elapsed < 60.0,
        format!("L1 J gap {l1_gap:.2e}, L2 coord gap {l2_gap:.2e}, {elapsed:.1} s"),
    );
}

fn mean_nmse(report: &RunReport, freq: f64, method: &str) -> f64 {
    report
        .aggregates
        .iter()
        .find(|a| a.frequency_hz == freq && a.method == method)
        .map(|a| a.nmse_mean_db)
        .unwrap_or(f64::NAN)
}

fn criteria_6_to_9(gate: &mut Gate, cfg: &ExperimentConfig) {
    let started = Instant::now();
    let report = run_experiment(cfg).expect("shipped experiment runs");
    let elapsed = started.elapsed().as_secs_f64();

    // 6: 900 Hz reproduction.
    let l1_900 = mean_nmse(&report, 900.0, "l1");
    let l2_900 = mean_nmse(&report, 900.0, "l2");
    gate.check(
        6,
        "900 Hz reproduction: L1 <= -10 dB, L2 <= -7 dB, < 10 min",
        l1_900 <= -10.0 && l2_900 <= -7.0 && elapsed < 600.0,
        format!("L1 {l1_900:.2} dB, L2 {l2_900:.2} dB, sweep took {elapsed:.0} s"),
    );

    // 7: ordering at every sweep frequency in 300..=1000.
    let mut ordering_ok = true;
    let mut detail = String::new();
    for f in cfg.sweep.frequencies() {
        if !(300.0..=1000.0).contains(&f) {
            continue;
        }
        let (b, l1, l2) = (
            mean_nmse(&report, f, "baseline"),
            mean_nmse(&report, f, "l1"),
            mean_nmse(&report, f, "l2"),
        );
        if !(l1 <= l2 && l2 <= b + 0.5) {
            ordering_ok = false;
            detail = format!("violated at {f} Hz: L1 {l1:.2}, L2 {l2:.2}, base {b:.2}");
        }
    }
    let base_900 = mean_nmse(&report, 900.0, "baseline");
    let margin_l1 = base_900 - l1_900;
    let margin_l2 = base_900 - l2_900;
    if margin_l1 < 2.0 || margin_l2 < 2.0 {
        ordering_ok = false;
    }
    if detail.is_empty() {
        detail = format!(
            "L1 <= L2 <= base+0.5 everywhere; 900 Hz margins {margin_l1:.2}/{margin_l2:.2} dB"
        );
    }
    gate.check(7, "method ordering over 300-1000 Hz sweep", ordering_ok, detail);

    // 8: L1 sparsity at 900 Hz.
    let sparsities: Vec<f64> = report
        .records
        .iter()
        .filter(|r| r.frequency_hz == 900.0 && r.method == "l1")
        .map(|r| r.sparsity)
        .collect();
    let mean_sparsity = sparsities.iter().sum::<f64>() / sparsities.len() as f64;
    gate.check(
        8,
        "L1 sparsity at 900 Hz >= 40%",
        mean_sparsity >= 0.40,
        format!("mean sparsity {:.0}%", mean_sparsity * 100.0),
    );

    // 9: byte-identical reruns.
    let report2 = run_experiment(cfg).expect("second run");
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let files1 = export_report(&report, ReportFormat::Csv, dir1.path()).unwrap();
    let files2 = export_report(&report2, ReportFormat::Csv, dir2.path()).unwrap();
    let mut identical = files1.len() == files2.len();
    if identical {
        for (a, b) in files1.iter().zip(files2.iter()) {
            if std::fs::read(a).unwrap() != std::fs::read(b).unwrap() {
                identical = false;
                break;
            }
        }
    }
    gate.check(
        9,
        "two runs of the shipped config are byte-identical",
        identical,
        format!("{} files compared", files1.len()),
    );
}

#[test]
fn acceptance() {
    let mut gate = Gate { failures: Vec::new() };
    let cfg = shipped_config();

    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    criterion_4(&mut gate, &cfg);
    criterion_5(&mut gate);
    criteria_6_to_9(&mut gate, &cfg);

    assert!(
        gate.failures.is_empty(),
        "failed acceptance criteria: {:?}",
        gate.failures
    );
}
