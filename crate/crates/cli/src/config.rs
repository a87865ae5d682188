//! Experiment description read from TOML.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use hessianfr::linalg::CgParams;
use hessianfr::optim::{Algorithm, HessInvMode, OptimizerConfig, Precondition};
use serde::Deserialize;
use thiserror::Error;

/// Environment variable that replaces the top-level `seed`.
pub const SEED_ENV: &str = "HFR_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    pub stop: StopSpec,
    pub pretrain: Option<PretrainSpec>,
    pub stochastic: Option<StochasticSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Toy {
        tag: String,
    },
    /// `f = ½xᵀAx + xᵀBy + ½yᵀCy (+ lxᵀx + lyᵀy)`, matrices as rows.
    Quadratic {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        lx: Option<Vec<f64>>,
        ly: Option<Vec<f64>>,
    },
    RandomQuadratic {
        d1: usize,
        d2: usize,
        #[serde(default = "unit_range")]
        schur_range: [f64; 2],
        #[serde(default = "unit_range")]
        neg_hyy_range: [f64; 2],
        #[serde(default = "one")]
        coupling: f64,
        seed: Option<u64>,
    },
    FiniteSumQuadratic {
        #[serde(default = "fsq_n")]
        n: usize,
        #[serde(default = "three")]
        d1: usize,
        #[serde(default = "three")]
        d2: usize,
        #[serde(default = "fsq_conditioning")]
        conditioning: f64,
        #[serde(default = "fsq_perturbation")]
        perturbation: f64,
        #[serde(default = "fsq_noise")]
        linear_noise: f64,
        seed: Option<u64>,
    },
    MixtureGan {
        #[serde(default = "gan_n")]
        n_data: usize,
        #[serde(default = "gan_n")]
        m_noise: usize,
        #[serde(default = "gan_l2")]
        l2_reg: f64,
        #[serde(default = "three")]
        noise_dim: usize,
        #[serde(default = "gan_hidden")]
        gen_hidden: Vec<usize>,
        #[serde(default = "gan_hidden")]
        disc_hidden: Vec<usize>,
        seed: Option<u64>,
    },
}

fn unit_range() -> [f64; 2] {
    [0.5, 2.0]
}
fn one() -> f64 {
    1.0
}
fn three() -> usize {
    3
}
fn fsq_n() -> usize {
    64
}
fn fsq_conditioning() -> f64 {
    4.0
}
fn fsq_perturbation() -> f64 {
    0.3
}
fn fsq_noise() -> f64 {
    0.5
}
fn gan_n() -> usize {
    512
}
fn gan_l2() -> f64 {
    1e-4
}
fn gan_hidden() -> Vec<usize> {
    vec![16, 16]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Explicit {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    /// Uniform in the ball; `center` defaults to the origin.
    RandomBall {
        center: Option<Vec<f64>>,
        radius: f64,
        seed: Option<u64>,
    },
    /// Network initialisation of the mixture GAN.
    GanInit {
        seed: Option<u64>,
    },
    Origin,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Origin
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub max_iters: usize,
    #[serde(default)]
    pub grad_tol: f64,
    #[serde(default = "stride")]
    pub record_stride: usize,
    #[serde(default = "bound")]
    pub divergence_bound: f64,
    #[serde(default = "yes")]
    pub record_time: bool,
}

fn stride() -> usize {
    1
}
fn bound() -> f64 {
    1e6
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
pub struct PretrainSpec {
    pub iters: usize,
    #[serde(flatten)]
    pub algorithm: AlgorithmSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticSpec {
    pub batch_size: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: out_dir() }
    }
}

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Exact,
    Cg,
    Dg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionSpec {
    #[default]
    Off,
    Adam,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AlgorithmSpec {
    /// File stem and display name; defaults to the algorithm name.
    pub label: Option<String>,
    pub algorithm: String,
    pub eta_x: f64,
    #[serde(default)]
    pub eta_y: f64,
    #[serde(default)]
    pub eta_y1: f64,
    #[serde(default)]
    pub eta_y2: f64,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default = "cg_iters")]
    pub cg_iters: usize,
    #[serde(default = "cg_tol")]
    pub cg_tol: f64,
    #[serde(default)]
    pub cg_damping: f64,
    pub fd_alpha: Option<f64>,
    #[serde(default)]
    pub precondition: PreconditionSpec,
    #[serde(default = "k_inner")]
    pub k_inner: usize,
    #[serde(default)]
    pub sga_lambda: f64,
    #[serde(default)]
    pub co_gamma: f64,
}

fn cg_iters() -> usize {
    5
}
fn cg_tol() -> f64 {
    1e-10
}
fn k_inner() -> usize {
    1
}

impl AlgorithmSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.algorithm.clone())
    }

    pub fn to_optimizer(&self) -> Result<OptimizerConfig, ConfigError> {
        let label = self.label();
        let ctx = |e: hessianfr::Error| ConfigError::Invalid(format!("algorithm '{label}': {e}"));
        let algorithm: Algorithm = self.algorithm.parse().map_err(ctx)?;
        let mode = match self.mode {
            ModeSpec::Exact => HessInvMode::Exact,
            ModeSpec::Cg => HessInvMode::Cg(
                CgParams::new(self.cg_iters, self.cg_tol, self.cg_damping).map_err(ctx)?,
            ),
            ModeSpec::Dg => HessInvMode::Dg,
        };
        let (ex, ey) = (self.eta_x, self.eta_y);
        let mut cfg = match algorithm {
            Algorithm::Ttsgda => OptimizerConfig::ttsgda(ex, ey),
            Algorithm::GdaK => OptimizerConfig::gda_k(ex, ey, self.k_inner),
            Algorithm::Eg => OptimizerConfig::eg(ex, ey),
            Algorithm::Ogda => OptimizerConfig::ogda(ex, ey),
            Algorithm::Sga => OptimizerConfig::sga(ex, ey, self.sga_lambda),
            Algorithm::Co => OptimizerConfig::co(ex, ey, self.co_gamma),
            Algorithm::Fr => OptimizerConfig::fr(ex, self.eta_y1, mode),
            Algorithm::HessianFr => OptimizerConfig::hessianfr(ex, self.eta_y1, self.eta_y2, mode),
            Algorithm::Gdn => OptimizerConfig::gdn(ex, mode),
        };
        if self.precondition == PreconditionSpec::Adam {
            cfg = cfg.with_precondition(Precondition::adam_default());
        }
        if let Some(a) = self.fd_alpha {
            cfg = cfg.with_fd_alpha(a);
        }
        cfg.validate().map_err(ctx)?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        Ok(cfg)
    }

    /// Reads, applies the seed override from the environment and validates.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.seed = s
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{SEED_ENV}='{s}' is not a u64")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.algorithms.is_empty() {
            return invalid("at least one [[algorithms]] entry is required");
        }
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            let label = a.label();
            if label.is_empty() || label.contains(['/', '\\']) {
                return invalid(format!("bad label '{label}'"));
            }
            if !seen.insert(label.clone()) {
                return invalid(format!("duplicate label '{label}'"));
            }
            a.to_optimizer()?;
        }
        if let Some(p) = &self.pretrain {
            if p.iters == 0 {
                return invalid("pretrain.iters must be ≥ 1");
            }
            p.algorithm.to_optimizer()?;
        }
        if self.stop.max_iters == 0 || self.stop.record_stride == 0 {
            return invalid("stop.max_iters and stop.record_stride must be ≥ 1");
        }
        if let Some(s) = &self.stochastic {
            if s.batch_size == 0 {
                return invalid("stochastic.batch_size must be ≥ 1");
            }
            if matches!(self.problem, ProblemSpec::Toy { .. } | ProblemSpec::Quadratic { .. } | ProblemSpec::RandomQuadratic { .. }) {
                return invalid("[stochastic] needs a finite-sum problem");
            }
        }
        Ok(())
    }

    /// Looks an algorithm up by label, falling back to the algorithm name.
    pub fn find_algorithm(&self, key: &str) -> Option<&AlgorithmSpec> {
        self.algorithms
            .iter()
            .find(|a| a.label() == key)
            .or_else(|| self.algorithms.iter().find(|a| a.algorithm == key))
    }

    // Derived seeds keep the components independent under one global seed.
    pub fn problem_seed(&self) -> u64 {
        self.seed
    }
    pub fn initial_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }
    pub fn sampler_seed(&self) -> u64 {
        self.stochastic
            .as_ref()
            .and_then(|s| s.seed)
            .unwrap_or(self.seed.wrapping_add(2))
    }
    pub fn pretrain_sampler_seed(&self) -> u64 {
        self.sampler_seed().wrapping_add(1)
    }
}
