//! `sfield`: batch sound-field reconstruction experiments.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sfield_cli::config::ExperimentConfig;
use sfield_cli::experiment::run_experiment;
use sfield_cli::export::{export_report, export_slice, fmt9, ReportFormat};
use sfield_cli::kernelcheck::run_kernel_check;
use soundfield::{
    build_gram_set, error_slice, make_grid, observe, solve_alpha, solve_l1, solve_l2,
    Axis, EstimatorState, L1Options, L2Options, PlaneSpec,
};

#[derive(Parser)]
#[command(
    name = "sfield",
    about = "Sound field reconstruction with learned directional kernels",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Worker threads for the frequency sweep (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated noise seeds, overriding the config.
        #[arg(long, value_delimiter = ',')]
        seed_list: Option<Vec<u64>>,
        /// Report format: csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Verify the closed-form kernel against spherical quadrature.
    KernelCheck {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Export a planar error map for one frequency of a config.
    Slice {
        config: PathBuf,
        /// Cutting plane, e.g. "z=0".
        #[arg(long)]
        plane: String,
        /// Frequency in Hz.
        #[arg(long)]
        freq: f64,
        /// Noise seed (default: first seed in the config).
        #[arg(long)]
        seed: Option<u64>,
        /// In-plane sample spacing in meters.
        #[arg(long, default_value_t = 0.02)]
        spacing: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_plane(text: &str) -> Result<PlaneSpec> {
    let (axis, offset) = text
        .split_once('=')
        .with_context(|| format!("plane {text:?} is not of the form axis=offset, e.g. z=0"))?;
    let axis = Axis::parse(axis.trim())?;
    let offset: f64 = offset
        .trim()
        .parse()
        .with_context(|| format!("plane offset {offset:?} is not a number"))?;
    Ok(PlaneSpec { axis, offset })
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => {
            if n == 0 {
                bail!("--threads must be >= 1");
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building worker pool")?;
            pool.install(f)
        }
    }
}

fn cmd_run(
    config: PathBuf,
    threads: Option<usize>,
    out: Option<PathBuf>,
    seed_list: Option<Vec<u64>>,
    format: String,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(seeds) = seed_list {
        cfg.noise.seeds = seeds;
    }
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let format = ReportFormat::parse(&format)?;

    let report = with_threads(threads, || run_experiment(&cfg))?;
    for a in &report.aggregates {
        println!(
            "f={} Hz  {:<8}  NMSE mean {} dB  (min {}, max {}, {} seeds)",
            a.frequency_hz,
            a.method,
            fmt9(a.nmse_mean_db),
            fmt9(a.nmse_min_db),
            fmt9(a.nmse_max_db),
            a.num_seeds
        );
    }
    let total_ms: f64 = report.records.iter().map(|r| r.wall_ms).sum();
    let files = export_report(&report, format, &dir)?;
    println!(
        "{} cases ({:.1} s solver time), {} files written to {}",
        report.records.len(),
        total_ms / 1e3,
        files.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_slice(
    config: PathBuf,
    plane: String,
    freq: f64,
    seed: Option<u64>,
    spacing: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = ExperimentConfig::load(&config)?;
    let plane = parse_plane(&plane)?;
    let seed = seed.unwrap_or(cfg.noise.seeds[0]);
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));

    let scene = cfg.build_scene()?;
    let mics = cfg.build_array()?;
    let k = scene.wavenumber(freq);
    let obs = observe(&scene, &mics, freq, cfg.noise.snr_db, Some(seed))?;
    let grid = make_grid(&scene.target_region, cfg.evaluation.grid_spacing)?;
    let u_true = soundfield::true_field(&scene, &grid, freq)?;

    for method in &cfg.solver.methods {
        let (bank, gamma, alpha) = match method {
            sfield_cli::config::Method::Baseline => {
                let bank = cfg.build_baseline_bank(k)?;
                let gram = build_gram_set(&mics, &bank);
                let kk = soundfield::mix_gram(&gram, &[1.0])?;
                (bank, vec![1.0], solve_alpha(&kk, &obs.values, cfg.solver.lambda)?)
            }
            sfield_cli::config::Method::L1 => {
                let bank = cfg.build_bank(k)?;
                let gram = build_gram_set(&mics, &bank);
                let res = solve_l1(&gram, &obs.values, cfg.solver.lambda, &L1Options::default())?;
                (bank, res.gamma.into_vec(), res.alpha)
            }
            sfield_cli::config::Method::L2 => {
                let bank = cfg.build_bank(k)?;
                let gram = build_gram_set(&mics, &bank);
                let res = solve_l2(&gram, &obs.values, cfg.solver.lambda, &L2Options::default())?;
                (bank, res.gamma.into_vec(), res.alpha)
            }
        };
        let state = EstimatorState::new(alpha, bank, gamma, mics.positions().to_vec())?;
        let u_est = soundfield::estimated_field(&state, &grid);
        let vol_nmse = soundfield::nmse(&u_true, &u_est)?;
        let slice = error_slice(&state, &scene, &plane, freq, spacing)?;
        let path = export_slice(&slice, method.name(), seed, &dir)?;
        println!(
            "{:<8}  volumetric NMSE {} dB, slice NMSE {} dB -> {}",
            method.name(),
            fmt9(vol_nmse),
            fmt9(slice.nmse_db()?),
            path.display()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { config, threads, out, seed_list, format } => {
            cmd_run(config, threads, out, seed_list, format)
        }
        Cmd::KernelCheck { instances, tol } => {
            let out = run_kernel_check(instances, tol)?;
            println!(
                "kernel-check: {}/{} instances within {:.1e} (max rel err {:.3e}, \
                 Hermitian defect {:.3e}, diagonal defect {:.3e})",
                out.instances, out.instances, tol, out.max_rel_err,
                out.max_hermitian_defect, out.max_diag_defect
            );
            Ok(())
        }
        Cmd::Slice { config, plane, freq, seed, spacing, out } => {
            cmd_slice(config, plane, freq, seed, spacing, out)
        }
    }
}
