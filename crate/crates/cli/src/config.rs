//! Run configuration: a flat TOML file of `key = value` pairs.
//!
//! ```toml
//! process = "thomas"
//! rho = 2e-4
//! sigma = 10.0
//! mu = 10.0
//! seed = 7
//! analyses = ["knuth", "g", "K2", "envelope", "indices"]
//! output = "out"
//! ```
//!
//! Either `input` (a census CSV) or `process` (a generator) must be given.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use pointbin::generators::{
    gen_csr, gen_gradient_poisson, gen_hardcore, gen_matern, gen_thomas, gen_uniform, Axis, ThomasMode,
    ThomasParams, DEFAULT_MAX_ATTEMPTS,
};
use pointbin::{PointPattern, RandomStream, Window};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Analysis {
    #[serde(rename = "knuth")]
    Knuth,
    #[serde(rename = "kernel")]
    Kernel,
    K,
    L,
    #[serde(rename = "g")]
    G,
    K2,
    #[serde(rename = "envelope")]
    Envelope,
    #[serde(rename = "fit-thomas")]
    FitThomas,
    #[serde(rename = "indices")]
    Indices,
    #[serde(rename = "stone-compare")]
    StoneCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Csr,
    Uniform,
    Gradient,
    Thomas,
    Matern,
    Hardcore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum EnvelopeStatistic {
    K,
    L,
    #[serde(rename = "g")]
    #[value(name = "g")]
    G,
    K2,
}

impl EnvelopeStatistic {
    pub fn name(&self) -> &'static str {
        match self {
            EnvelopeStatistic::K => "K",
            EnvelopeStatistic::L => "L",
            EnvelopeStatistic::G => "g",
            EnvelopeStatistic::K2 => "K2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GradientAxis {
    X,
    Y,
}

/// Process and parameters for a simulated pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, clap::Args)]
pub struct GeneratorSpec {
    #[arg(long, value_enum)]
    pub process: Option<Process>,
    #[arg(long, default_value_t = 500.0)]
    #[serde(default = "default_side")]
    pub width: f64,
    #[arg(long, default_value_t = 500.0)]
    #[serde(default = "default_side")]
    pub height: f64,
    /// Intensity for `csr`.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Point count for `uniform` and `hardcore`, and fixed-N `thomas`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Hard-core distance, or Matérn disk radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub axis: Option<GradientAxis>,
    #[arg(long)]
    pub low: Option<f64>,
    #[arg(long)]
    pub high: Option<f64>,
}

fn default_side() -> f64 {
    500.0
}

fn need<T: Copy>(value: Option<T>, key: &str, process: Process) -> CliResult<T> {
    value.ok_or_else(|| CliError::config(format!("process {process:?} needs `{key}`")))
}

impl GeneratorSpec {
    pub fn window(&self) -> CliResult<Window> {
        Window::with_size(self.width, self.height).map_err(|e| CliError::config(e.to_string()))
    }

    /// Checks that the keys the process needs are present.
    pub fn validate(&self) -> CliResult<()> {
        let Some(process) = self.process else {
            return Err(CliError::config("no process given"));
        };
        self.window()?;
        match process {
            Process::Csr => {
                need(self.lambda, "lambda", process)?;
            }
            Process::Uniform => {
                need(self.n, "n", process)?;
            }
            Process::Gradient => {
                need(self.axis, "axis", process)?;
                need(self.low, "low", process)?;
                need(self.high, "high", process)?;
            }
            Process::Thomas => {
                need(self.rho, "rho", process)?;
                need(self.sigma, "sigma", process)?;
                if self.n.is_none() {
                    need(self.mu, "mu", process)?;
                }
            }
            Process::Matern => {
                need(self.rho, "rho", process)?;
                need(self.radius, "radius", process)?;
                need(self.mu, "mu", process)?;
            }
            Process::Hardcore => {
                need(self.n, "n", process)?;
                need(self.radius, "radius", process)?;
            }
        }
        Ok(())
    }

    pub fn generate(&self, rng: &mut RandomStream) -> CliResult<PointPattern> {
        self.validate()?;
        let process = self.process.expect("validated");
        let w = self.window()?;
        let pattern = match process {
            Process::Csr => gen_csr(&w, self.lambda.unwrap(), rng)?,
            Process::Uniform => gen_uniform(&w, self.n.unwrap(), rng)?,
            Process::Gradient => {
                let axis = match self.axis.unwrap() {
                    GradientAxis::X => Axis::X,
                    GradientAxis::Y => Axis::Y,
                };
                gen_gradient_poisson(&w, axis, self.low.unwrap(), self.high.unwrap(), rng)?
            }
            Process::Thomas => {
                let mode = match self.n {
                    Some(n) => ThomasMode::FixedN(n),
                    None => ThomasMode::PoissonOffspring,
                };
                let mu = self.mu.unwrap_or(1.0);
                let params = ThomasParams::new(self.rho.unwrap(), self.sigma.unwrap(), mu)?;
                gen_thomas(&w, &params, mode, rng)?
            }
            Process::Matern => gen_matern(&w, self.rho.unwrap(), self.radius.unwrap(), self.mu.unwrap(), rng)?,
            Process::Hardcore => gen_hardcore(&w, self.n.unwrap(), self.radius.unwrap(), DEFAULT_MAX_ATTEMPTS, rng)?,
        };
        Ok(pattern)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// `[x_min, x_max, y_min, y_max]`; overrides the census window.
    pub window: Option<[f64; 4]>,
    #[serde(flatten)]
    pub generator: GeneratorSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub analyses: Vec<Analysis>,
    #[serde(default = "default_output")]
    pub output: PathBuf,

    #[serde(default = "default_cap")]
    pub knuth_cap_x: usize,
    #[serde(default = "default_cap")]
    pub knuth_cap_y: usize,

    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    #[serde(default = "default_r_points")]
    pub r_points: usize,
    pub g_bandwidth: Option<f64>,
    pub k2_bandwidth: Option<f64>,

    pub kernel_bandwidth: Option<f64>,
    #[serde(default = "default_nx")]
    pub raster_nx: usize,
    #[serde(default = "default_ny")]
    pub raster_ny: usize,

    #[serde(default = "default_n_sims")]
    pub n_sims: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_envelope_statistics")]
    pub envelope_statistics: Vec<EnvelopeStatistic>,

    #[serde(default = "default_d_max")]
    pub d_max: f64,
    #[serde(default = "default_fit_step")]
    pub fit_step: f64,
    /// Also require clump area `σ²π/2 < 10⁴` for acceptance.
    #[serde(default)]
    pub clump_area_filter: bool,
    /// Analyse only species with abundance in `[20, 3000]`.
    #[serde(default)]
    pub abundance_filter: bool,
    /// Number of fitted-model realizations averaged for Δ.
    #[serde(default = "default_delta_realizations")]
    pub delta_realizations: usize,
    #[serde(default = "default_omega_radius")]
    pub omega_radius: f64,
    #[serde(default = "default_stone_cap")]
    pub stone_cap: usize,
}

fn default_seed() -> u64 {
    1
}
fn default_output() -> PathBuf {
    PathBuf::from("pointbin-out")
}
fn default_cap() -> usize {
    50
}
fn default_r_points() -> usize {
    pointbin::secondstats::DEFAULT_R_POINTS
}
fn default_nx() -> usize {
    pointbin::kernel::DEFAULT_RASTER_NX
}
fn default_ny() -> usize {
    pointbin::kernel::DEFAULT_RASTER_NY
}
fn default_n_sims() -> usize {
    199
}
fn default_level() -> f64 {
    0.99
}
fn default_envelope_statistics() -> Vec<EnvelopeStatistic> {
    vec![EnvelopeStatistic::L, EnvelopeStatistic::G]
}
fn default_d_max() -> f64 {
    pointbin::fitting::DEFAULT_D_MAX
}
fn default_fit_step() -> f64 {
    pointbin::fitting::DEFAULT_FIT_STEP
}
fn default_delta_realizations() -> usize {
    1
}
fn default_omega_radius() -> f64 {
    10.0
}
fn default_stone_cap() -> usize {
    100
}

const KNOWN_KEYS: &[&str] = &[
    "input",
    "window",
    "process",
    "width",
    "height",
    "lambda",
    "n",
    "rho",
    "sigma",
    "mu",
    "radius",
    "axis",
    "low",
    "high",
    "seed",
    "analyses",
    "output",
    "knuth_cap_x",
    "knuth_cap_y",
    "r_min",
    "r_max",
    "r_points",
    "g_bandwidth",
    "k2_bandwidth",
    "kernel_bandwidth",
    "raster_nx",
    "raster_ny",
    "n_sims",
    "level",
    "envelope_statistics",
    "d_max",
    "fit_step",
    "clump_area_filter",
    "abundance_filter",
    "delta_realizations",
    "omega_radius",
    "stone_cap",
];

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::config(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::config(format!("unknown key `{key}`")));
        }
        let config: RunConfig = table.try_into().map_err(|e: toml::de::Error| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            if let Some(input) = &config.input {
                if input.is_relative() {
                    config.input = Some(dir.join(input));
                }
            }
            if config.output.is_relative() {
                config.output = dir.join(&config.output);
            }
        }
        Ok(config)
    }

    pub fn has(&self, analysis: Analysis) -> bool {
        self.analyses.contains(&analysis)
    }

    pub fn window_override(&self) -> CliResult<Option<Window>> {
        self.window
            .map(|[a, b, c, d]| Window::new(a, b, c, d).map_err(|e| CliError::config(e.to_string())))
            .transpose()
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.analyses.is_empty() {
            return Err(CliError::config("at least one analysis is required"));
        }
        match (&self.input, self.generator.process) {
            (Some(_), Some(_)) => return Err(CliError::config("give either `input` or `process`, not both")),
            (None, None) => return Err(CliError::config("give `input` or `process`")),
            (None, Some(_)) => self.generator.validate()?,
            (Some(_), None) => {}
        }
        self.window_override()?;
        if self.knuth_cap_x == 0 || self.knuth_cap_y == 0 {
            return Err(CliError::config("knuth caps must be at least 1"));
        }
        if self.r_points < 5 {
            return Err(CliError::config("r_points must be at least 5"));
        }
        for (key, value) in [
            ("g_bandwidth", self.g_bandwidth),
            ("k2_bandwidth", self.k2_bandwidth),
            ("kernel_bandwidth", self.kernel_bandwidth),
            ("r_max", self.r_max),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::config(format!("`{key}` must be positive")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.r_min, self.r_max) {
            if !(lo >= 0.0 && lo < hi) {
                return Err(CliError::config("need 0 <= r_min < r_max"));
            }
        }
        if self.raster_nx < 2 || self.raster_ny < 2 {
            return Err(CliError::config("raster needs at least 2 cells per axis"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::config("level must lie in (0, 1)"));
        }
        let required = pointbin::secondstats::required_sims(self.level);
        if self.has(Analysis::Envelope) && self.n_sims < required {
            return Err(CliError::config(format!(
                "level {} needs at least {required} simulations, got {}",
                self.level, self.n_sims
            )));
        }
        if self.has(Analysis::Envelope) && self.envelope_statistics.is_empty() {
            return Err(CliError::config("envelope_statistics is empty"));
        }
        if !(self.d_max > 0.0 && self.fit_step > 0.0 && self.fit_step < self.d_max) {
            return Err(CliError::config("need 0 < fit_step < d_max"));
        }
        if self.delta_realizations == 0 {
            return Err(CliError::config("delta_realizations must be at least 1"));
        }
        if !(self.omega_radius > 0.0) {
            return Err(CliError::config("omega_radius must be positive"));
        }
        if self.stone_cap == 0 {
            return Err(CliError::config("stone_cap must be at least 1"));
        }
        Ok(())
    }
}
