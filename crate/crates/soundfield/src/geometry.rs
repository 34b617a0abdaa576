//! Microphone layouts and synthetic free-field observations.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::C64;

/// A point in 3D space, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(&self, other: &Position3) -> [f64; 3] {
        [self.x - other.x, self.y - other.y, self.z - other.z]
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        let d = self.sub(other);
        libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Ordered microphone positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MicArray {
    positions: Vec<Position3>,
}

impl MicArray {
    /// Positions must be pairwise distinct; M ≥ 1.
    pub fn new(positions: Vec<Position3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter { what: "microphone array is empty" });
        }
        for p in &positions {
            if !p.is_finite() {
                return Err(Error::InvalidParameter { what: "non-finite microphone position" });
            }
        }
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                if positions[i].distance(&positions[j]) == 0.0 {
                    return Err(Error::InvalidParameter {
                        what: "duplicate microphone positions",
                    });
                }
            }
        }
        Ok(Self { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position3] {
        &self.positions
    }

    /// Concatenates layers into one array.
    pub fn concat(arrays: &[MicArray]) -> Result<Self> {
        let mut all = Vec::new();
        for a in arrays {
            all.extend_from_slice(&a.positions);
        }
        Self::new(all)
    }
}

/// Monopole source outside the target region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub position: Position3,
    pub amplitude: C64,
}

/// Spherical target region Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRegion {
    pub center: Position3,
    pub radius: f64,
}

impl SphereRegion {
    pub fn contains(&self, p: &Position3) -> bool {
        self.center.distance(p) <= self.radius
    }
}

/// Free-field scene: sources, medium, target region.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sources: Vec<PointSource>,
    pub speed_of_sound: f64,
    pub target_region: SphereRegion,
}

impl Scene {
    pub fn new(
        sources: Vec<PointSource>,
        speed_of_sound: f64,
        target_region: SphereRegion,
    ) -> Result<Self> {
        if !(speed_of_sound > 0.0) {
            return Err(Error::InvalidParameter { what: "speed_of_sound must be > 0" });
        }
        if !(target_region.radius > 0.0) {
            return Err(Error::InvalidParameter { what: "target region radius must be > 0" });
        }
        for s in &sources {
            if !s.position.is_finite() || !s.amplitude.is_finite() {
                return Err(Error::InvalidParameter { what: "non-finite source" });
            }
            if target_region.contains(&s.position) {
                return Err(Error::InvalidParameter {
                    what: "source lies inside the target region",
                });
            }
        }
        Ok(Self { sources, speed_of_sound, target_region })
    }

    pub fn wavenumber(&self, frequency: f64) -> f64 {
        2.0 * core::f64::consts::PI * frequency / self.speed_of_sound
    }
}

/// One frequency-domain snapshot of the microphone signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub mic_array: MicArray,
    pub values: Vec<C64>,
    pub frequency: f64,
    pub snr_db: Option<f64>,
    pub noise_seed: Option<u64>,
}

/// Named point-set families for spherical layer layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSet {
    /// Embedded spherical t-design table (currently the 25-point 4-design).
    TDesign,
    /// Deterministic Fibonacci sphere, any size.
    Fibonacci,
}

impl PointSet {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "t-design" | "tdesign" => Ok(PointSet::TDesign),
            "fibonacci" => Ok(PointSet::Fibonacci),
            other => Err(Error::UnknownPointSet { name: other.to_string() }),
        }
    }
}

/// 25-point spherical 4-design: equal-weight averages over these points
/// integrate all spherical polynomials up to degree 4 (monomial quadrature
/// error below 1e-8). Obtained by minimizing the degree-≤4 Weyl sums.
const T_DESIGN_25: [[f64; 3]; 25] = [
    [0.8377746195825837, -0.5455396930664944, -0.022806360344697026],
    [-0.043854240251190356, -0.5831653621508972, -0.8111688887028421],
    [-0.3807253776084574, 0.8981995120344557, -0.21974035456866628],
    [0.7369428515745762, 0.656339500381703, 0.1616591901248696],
    [0.9201157434465256, 0.16476730570082534, 0.35530093390524364],
    [-0.21123061094912882, 0.4981344070032917, -0.8409778484345095],
    [0.358328721381029, -0.7788130356948089, 0.5148308293656019],
    [-0.12584480506108142, 0.96188404815709, 0.24278007113448846],
    [0.42957759262464756, 0.3505920839267332, -0.8321948585534057],
    [-0.4720880183217541, -0.4975443827570197, -0.7277241854878643],
    [0.5587026202999099, 0.31621609160003394, -0.7667194829161534],
    [-0.6528378895204464, 0.1572178746036153, -0.7410028541858739],
    [-0.8171904617314094, 0.2613104885046577, 0.5137281166654819],
    [-0.11185188595456703, -0.9936868480557007, -0.008695033613123708],
    [-0.05672346534981945, 0.2444202649656616, 0.9680088752448625],
    [-0.9630366562326086, -0.2355321563675497, -0.13070960970475215],
    [-0.8840860263462202, 0.4618746130487632, -0.07115995953066255],
    [0.18869165175455035, -0.5864842058962795, 0.7876748928284752],
    [0.9062886810841191, -0.22074211688505055, -0.36043549266396413],
    [0.36072952285034526, -0.7677954874844731, -0.5294943821634395],
    [-0.2689578622544949, 0.4162828951859407, 0.8685448862937961],
    [-0.6113651083826555, -0.48113866881720385, 0.6282820112187464],
    [-0.6657166070709309, -0.7201924369961832, 0.19530553695035513],
    [0.5902019219732981, 0.0980022755115957, 0.8012847466996824],
    [0.3781549769360791, 0.9253929841079374, 0.025429085360666712],
];

/// Places `n_points` microphones on a sphere of the given radius around
/// the origin using the named point set.
pub fn spherical_layer_layout(n_points: usize, radius: f64, point_set: PointSet) -> Result<MicArray> {
    if n_points < 1 {
        return Err(Error::InvalidParameter { what: "n_points must be >= 1" });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter { what: "radius must be > 0" });
    }
    let positions: Vec<Position3> = match point_set {
        PointSet::TDesign => {
            if n_points != T_DESIGN_25.len() {
                return Err(Error::PointSetSizeUnavailable {
                    name: "t-design".to_string(),
                    requested: n_points,
                });
            }
            T_DESIGN_25
                .iter()
                .map(|p| {
                    let n = libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                    Position3::new(p[0] / n * radius, p[1] / n * radius, p[2] / n * radius)
                })
                .collect()
        }
        PointSet::Fibonacci => fibonacci_sphere(n_points, radius),
    };
    MicArray::new(positions)
}

fn fibonacci_sphere(n: usize, radius: f64) -> Vec<Position3> {
    let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = if n == 1 { 0.0 } else { 1.0 - 2.0 * (i as f64 + 0.5) / n as f64 };
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let th = golden * i as f64;
            // n == 1 degenerates to a single point on the +x axis.
            let (x, y) = if n == 1 { (1.0, 0.0) } else { (r * libm::cos(th), r * libm::sin(th)) };
            Position3::new(x * radius, y * radius, z * radius)
        })
        .collect()
}

/// Free-field pressure at `r`: Σ_sources A · e^{+jk‖r−r_s‖} / (4π‖r−r_s‖).
///
/// The +jk phase sign pairs with the e^{jkᵀr}, k = −kx plane-wave
/// convention, so a distant source arrives from its own direction.
pub fn greens_field(scene: &Scene, r: &Position3, frequency: f64) -> Result<C64> {
    if !(frequency > 0.0) {
        return Err(Error::InvalidParameter { what: "frequency must be > 0" });
    }
    let k = scene.wavenumber(frequency);
    let mut total = C64::new(0.0, 0.0);
    for src in &scene.sources {
        let d = r.distance(&src.position);
        if d == 0.0 {
            return Err(Error::SourceSingularity);
        }
        let phase = C64::new(0.0, k * d).exp();
        total += src.amplitude * phase / (4.0 * core::f64::consts::PI * d);
    }
    Ok(total)
}

/// Samples the scene at the microphones and optionally adds circularly
/// symmetric complex Gaussian noise at the requested SNR.
///
/// The noise variance is set from the mean squared signal magnitude over
/// all M microphones; a fixed seed reproduces the observation bit-exactly.
pub fn observe(
    scene: &Scene,
    mic_array: &MicArray,
    frequency: f64,
    snr_db: Option<f64>,
    seed: Option<u64>,
) -> Result<Observation> {
    let mut values = Vec::with_capacity(mic_array.len());
    for p in mic_array.positions() {
        values.push(greens_field(scene, p, frequency)?);
    }
    if let Some(snr) = snr_db {
        let m = values.len() as f64;
        let signal_power = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / m;
        let noise_var = signal_power / libm::pow(10.0, snr / 10.0);
        let mut rng = ChaCha12Rng::seed_from_u64(seed.unwrap_or(0));
        let scale = libm::sqrt(noise_var / 2.0);
        for v in values.iter_mut() {
            let (n1, n2) = gaussian_pair(&mut rng);
            *v += C64::new(scale * n1, scale * n2);
        }
    }
    Ok(Observation {
        mic_array: mic_array.clone(),
        values,
        frequency,
        snr_db,
        noise_seed: seed,
    })
}

/// Box–Muller from 53-bit uniforms.
fn gaussian_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    let u1 = loop {
        let u = uniform01(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform01(rng);
    let r = libm::sqrt(-2.0 * libm::log(u1));
    let th = 2.0 * core::f64::consts::PI * u2;
    (r * libm::cos(th), r * libm::sin(th))
}

fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}
