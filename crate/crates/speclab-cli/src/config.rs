//! Run configuration: a structured TOML file with one section per concern.
//! Unknown keys are errors, every default the user did not set is resolved
//! into the manifest, and a run is reproducible from its manifest alone.


use anyhow::{bail, Context};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use speclab::operator::{ChannelSpace, MatrixPotential, SourceProfile};
use speclab::Interval;

/// Complex number as a `[re, im]` pair in config files.
pub type ComplexPair = [f64; 2];

pub fn to_complex(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// "zero" | "power-law" | "spherical"
    pub kind: String,
    #[serde(rename = "N", default = "default_one")]
    pub n: usize,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "T", default = "default_support")]
    pub t: f64,
    /// "identity" or explicit real symmetric rows.
    #[serde(default)]
    pub coupling: Option<CouplingConfig>,
    /// Spherical generator knobs.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub channel_budget: Option<usize>,
}

fn default_one() -> usize {
    1
}

fn default_gamma() -> f64 {
    0.8
}

fn default_support() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CouplingConfig {
    Named(String),
    Rows(Vec<Vec<f64>>),
}

impl PotentialConfig {
    pub fn build(&self) -> anyhow::Result<MatrixPotential> {
        let channels = ChannelSpace::new(self.n).context("channel space")?;
        match self.kind.as_str() {
            "zero" => Ok(MatrixPotential::zero(channels)),
            "power-law" => {
                let coupling = match &self.coupling {
                    None | Some(CouplingConfig::Named(_)) => {
                        if let Some(CouplingConfig::Named(name)) = &self.coupling {
                            if name != "identity" {
                                bail!("potential.coupling: unknown pattern '{name}'");
                            }
                        }
                        DMatrix::<Complex64>::identity(self.n, self.n)
                    }
                    Some(CouplingConfig::Rows(rows)) => {
                        if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                            bail!("potential.coupling: expected {0}x{0} rows", self.n);
                        }
                        DMatrix::from_fn(self.n, self.n, |i, j| Complex64::from(rows[i][j]))
                    }
                };
                Ok(MatrixPotential::power_law(channels, self.lambda, self.gamma, self.t, coupling)?)
            }
            "spherical" => {
                let kappa = self.kappa.context("potential.kappa required for kind = spherical")?;
                let budget = self
                    .channel_budget
                    .context("potential.channel_budget required for kind = spherical")?;
                Ok(MatrixPotential::spherical_reduction(budget, kappa, self.t, None)?)
            }
            other => bail!("potential.kind: unknown kind '{other}'"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// "indicator" | "smooth"
    pub profile: String,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig { profile: "indicator".to_string() }
    }
}

impl SourceConfig {
    pub fn build(&self, channels: ChannelSpace) -> anyhow::Result<SourceProfile> {
        match self.profile.as_str() {
            "indicator" => Ok(SourceProfile::indicator(channels)),
            "smooth" => Ok(SourceProfile::smooth(channels)),
            other => bail!("source.profile: unknown profile '{other}'"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub step: f64,
    /// Explicit right end; when absent every solve sizes its own grid.
    #[serde(default)]
    pub right_end: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { step: 1e-3, right_end: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KConfig {
    /// `[re, im]` pairs.
    pub values: Vec<ComplexPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    /// Real k samples for the boundary formula.
    pub k_values: Vec<f64>,
    /// Run the Stieltjes cross-check at each `E = k²`.
    #[serde(default)]
    pub stieltjes: bool,
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
}

fn default_etas() -> Vec<f64> {
    vec![1e-2, 5e-3, 2.5e-3]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    /// Interval in the k variable (the E-variant integrates over [a², b²]).
    pub interval: [f64; 2],
    #[serde(default = "default_entropy_nodes")]
    pub nodes: usize,
    #[serde(default = "default_zero_floor")]
    pub zero_floor: f64,
    /// Integration variable: "k" (default) or "E".
    #[serde(default = "default_entropy_variable")]
    pub variable: String,
}

fn default_entropy_variable() -> String {
    "k".to_string()
}

fn default_entropy_nodes() -> usize {
    129
}

fn default_zero_floor() -> f64 {
    speclab::spectral::DEFAULT_ZERO_FLOOR
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IterateConfig {
    pub interval: [f64; 2],
    pub n0: u32,
    pub n_max: u32,
    pub upsilon: f64,
    /// "analytic" | "desk-scale"
    #[serde(default = "default_upsilon_mode")]
    pub upsilon_mode: String,
    #[serde(default)]
    pub delta1: Option<f64>,
    #[serde(default = "default_y_count")]
    pub y_count: usize,
    #[serde(default = "default_x_count")]
    pub x_count: usize,
    #[serde(default)]
    pub freeze_geometry: bool,
    /// Also run the stability probe at each scale.
    #[serde(default = "default_true")]
    pub probe: bool,
}

fn default_upsilon_mode() -> String {
    "desk-scale".to_string()
}

fn default_y_count() -> usize {
    16
}

fn default_x_count() -> usize {
    65
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Checks to run: "energy-identity" | "rough-bound" | "convolution" |
    /// "combes-thomas" | "windowed-decay", or "all".
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
    #[serde(default = "default_identity_k")]
    pub k: ComplexPair,
    #[serde(default = "default_ab")]
    pub ab: [f64; 2],
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default = "default_threshold_factor")]
    pub threshold_factor: f64,
}

fn default_checks() -> Vec<String> {
    vec!["all".to_string()]
}

fn default_interval() -> [f64; 2] {
    [1.0, 2.0]
}

fn default_identity_k() -> ComplexPair {
    [1.0, 0.1]
}

fn default_ab() -> [f64; 2] {
    [2.0, 4.0]
}

fn default_alpha() -> f64 {
    0.5
}

fn default_threshold_factor() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HarmonicDomainConfig {
    /// "cylinder" | "rectangle" | "trapezoid" (normalized, lower base [0,2])
    pub kind: String,
    #[serde(default = "default_cyl_eps")]
    pub epsilon: f64,
    #[serde(default = "default_cut")]
    pub cut: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_x1")]
    pub x1: f64,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_cyl_eps() -> f64 {
    1.0
}

fn default_cut() -> f64 {
    6.0
}

fn default_x1() -> f64 {
    2.0
}

fn default_height() -> f64 {
    0.5
}

fn default_beta() -> f64 {
    3.0
}

impl HarmonicDomainConfig {
    pub fn build(&self) -> anyhow::Result<speclab::harmonic::PlanarDomain> {
        use speclab::harmonic::PlanarDomain;
        Ok(match self.kind.as_str() {
            "cylinder" => PlanarDomain::cylinder(self.epsilon, self.cut)?,
            "rectangle" => {
                PlanarDomain::rectangle(Interval::new(self.x0, self.x1)?, self.height)?
            }
            "trapezoid" => PlanarDomain::trapezoid_normalized(self.epsilon, self.beta)?,
            other => bail!("harmonic.domain.kind: unknown kind '{other}'"),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub domain: HarmonicDomainConfig,
    pub poles: Vec<ComplexPair>,
    /// Any of "exact", "grid", "walk".
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_mesh")]
    pub mesh: f64,
    #[serde(default = "default_walkers")]
    pub walkers: usize,
    /// Lower-side density sample parameters `t ∈ (0,1)` (grid + exact).
    #[serde(default = "default_density_t")]
    pub density_t: Vec<f64>,
}

fn default_methods() -> Vec<String> {
    vec!["exact".into(), "grid".into(), "walk".into()]
}

fn default_mesh() -> f64 {
    1.0 / 32.0
}

fn default_walkers() -> usize {
    100_000
}

fn default_density_t() -> Vec<f64> {
    vec![0.35, 0.5, 0.65]
}

/// The full run configuration; commands read the sections they need.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub source: Option<SourceConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub k: Option<KConfig>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
    #[serde(default)]
    pub entropy: Option<EntropyConfig>,
    #[serde(default)]
    pub iterate: Option<IterateConfig>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub harmonic: Option<HarmonicConfig>,
    /// Master seed: all randomness (the walk-on-spheres walkers) derives
    /// from it.
    #[serde(default)]
    pub master_seed: u64,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn potential(&self) -> anyhow::Result<PotentialConfig> {
        self.potential.clone().context("config needs a [potential] section")
    }

    pub fn source_or_default(&self) -> SourceConfig {
        self.source.clone().unwrap_or_default()
    }

    pub fn grid_or_default(&self) -> GridConfig {
        self.grid.clone().unwrap_or_default()
    }
}
