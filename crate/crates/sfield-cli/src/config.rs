//! TOML experiment configuration and conversion to domain objects.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use soundfield::{
    spherical_layer_layout, KernelBank, MicArray, PointSet, PointSource, Position3, Scene,
    SphereRegion, SubKernelParam, C64,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scene: SceneConfig,
    pub array: ArrayConfig,
    pub bank: BankConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub evaluation: EvalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub speed_of_sound: f64,
    pub sources: Vec<SourceConfig>,
    pub region: RegionConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub position: [f64; 3],
    /// Complex amplitude as [re, im].
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub layers: Vec<LayerConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub count: usize,
    pub radius: f64,
    /// "t-design" or "fibonacci".
    pub point_set: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfig {
    /// Number of uniformly spaced azimuths for the prior direction η.
    pub d_eta: usize,
    /// Number of concentrations β = 0, step, 2·step, …
    pub d_beta: usize,
    #[serde(default = "default_beta_step")]
    pub beta_step: f64,
    /// Zenith angles of η in radians; defaults to the horizontal plane.
    #[serde(default = "default_zenith")]
    pub zenith: Vec<f64>,
}

fn default_beta_step() -> f64 {
    1.0
}

fn default_zenith() -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_2]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub lambda: f64,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Plain ridge regression with a single β = 0 (directionless) kernel.
    Baseline,
    /// Simplex-constrained weight learning (sparsity promoting).
    L1,
    /// Unit-L2-sphere weight learning.
    L2,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::L1 => "l1",
            Method::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub step_hz: f64,
}

impl SweepConfig {
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let f = self.start_hz + i as f64 * self.step_hz;
            if f > self.stop_hz + 1e-9 {
                break;
            }
            out.push(f);
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Omit for noiseless observations.
    pub snr_db: Option<f64>,
    pub seeds: Vec<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { snr_db: None, seeds: vec![0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub grid_spacing: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { grid_spacing: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scene.sources.is_empty() {
            bail!("config: at least one source is required");
        }
        if self.array.layers.is_empty() {
            bail!("config: at least one array layer is required");
        }
        if self.solver.methods.is_empty() {
            bail!("config: method list is empty");
        }
        if self.noise.seeds.is_empty() {
            bail!("config: seed list is empty");
        }
        if self.sweep.frequencies().is_empty() {
            bail!("config: frequency sweep is empty");
        }
        if !(self.sweep.step_hz > 0.0) || !(self.sweep.start_hz > 0.0) {
            bail!("config: sweep start and step must be > 0");
        }
        if !(self.solver.lambda > 0.0) {
            bail!("config: lambda must be > 0");
        }
        if !(self.evaluation.grid_spacing > 0.0) {
            bail!("config: grid_spacing must be > 0");
        }
        Ok(())
    }

    pub fn build_scene(&self) -> Result<Scene> {
        let sources = self
            .scene
            .sources
            .iter()
            .map(|s| PointSource {
                position: Position3::new(s.position[0], s.position[1], s.position[2]),
                amplitude: C64::new(s.amplitude[0], s.amplitude[1]),
            })
            .collect();
        let region = SphereRegion {
            center: Position3::new(
                self.scene.region.center[0],
                self.scene.region.center[1],
                self.scene.region.center[2],
            ),
            radius: self.scene.region.radius,
        };
        Scene::new(sources, self.scene.speed_of_sound, region).context("config: scene")
    }

    pub fn build_array(&self) -> Result<MicArray> {
        let mut layers = Vec::new();
        for layer in &self.array.layers {
            let ps = PointSet::parse(&layer.point_set).context("config: array point_set")?;
            layers.push(
                spherical_layer_layout(layer.count, layer.radius, ps)
                    .context("config: array layer")?,
            );
        }
        MicArray::concat(&layers).context("config: array")
    }

    /// Full azimuth × zenith × concentration product at wavenumber `k`.
    pub fn build_bank(&self, k: f64) -> Result<KernelBank> {
        let b = &self.bank;
        let mut params = Vec::with_capacity(b.d_eta * b.d_beta * b.zenith.len());
        for ib in 0..b.d_beta {
            for zen in &b.zenith {
                for ia in 0..b.d_eta {
                    let azimuth = -std::f64::consts::PI
                        + ia as f64 * 2.0 * std::f64::consts::PI / b.d_eta as f64;
                    params.push(
                        SubKernelParam::from_angles(azimuth, *zen, ib as f64 * b.beta_step)
                            .context("config: bank")?,
                    );
                }
            }
        }
        KernelBank::new(params, k).context("config: bank")
    }

    /// The baseline method's one-kernel bank (β = 0, direction irrelevant).
    pub fn build_baseline_bank(&self, k: f64) -> Result<KernelBank> {
        let p = SubKernelParam::new([0.0, 0.0, 1.0], 0.0).context("config: baseline bank")?;
        KernelBank::new(vec![p], k).context("config: baseline bank")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
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
            d_eta = 10
            d_beta = 10

            [solver]
            lambda = 0.05
            methods = ["baseline", "l1", "l2"]

            [sweep]
            start_hz = 900.0
            stop_hz = 900.0
            step_hz = 100.0
        "#
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: ExperimentConfig = toml::from_str(minimal()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.bank.beta_step, 1.0);
        assert_eq!(cfg.bank.zenith, vec![std::f64::consts::FRAC_PI_2]);
        assert_eq!(cfg.noise.seeds, vec![0]);
        assert_eq!(cfg.noise.snr_db, None);
        assert_eq!(cfg.evaluation.grid_spacing, 0.05);
        assert_eq!(cfg.output.dir, "out");
        assert_eq!(cfg.sweep.frequencies(), vec![900.0]);
    }

    #[test]
    fn empty_methods_rejected() {
        let text = minimal().replace(r#"methods = ["baseline", "l1", "l2"]"#, "methods = []");
        let cfg: ExperimentConfig = toml::from_str(&text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{}\n[solver2]\nx = 1\n", minimal());
        assert!(toml::from_str::<ExperimentConfig>(&text).is_err());
    }

    #[test]
    fn sweep_inclusive_endpoints() {
        let s = SweepConfig { start_hz: 100.0, stop_hz: 1000.0, step_hz: 100.0 };
        let f = s.frequencies();
        assert_eq!(f.len(), 10);
        assert_eq!(f[0], 100.0);
        assert_eq!(f[9], 1000.0);
    }

    #[test]
    fn bank_product_size() {
        let cfg: ExperimentConfig = toml::from_str(minimal()).unwrap();
        let bank = cfg.build_bank(10.0).unwrap();
        assert_eq!(bank.len(), 100);
        let base = cfg.build_baseline_bank(10.0).unwrap();
        assert_eq!(base.len(), 1);
        assert_eq!(base.params()[0].beta(), 0.0);
    }

    #[test]
    fn scene_and_array_build() {
        let cfg: ExperimentConfig = toml::from_str(minimal()).unwrap();
        let scene = cfg.build_scene().unwrap();
        assert_eq!(scene.sources.len(), 1);
        let arr = cfg.build_array().unwrap();
        assert_eq!(arr.len(), 25);
    }
}
