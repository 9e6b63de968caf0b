//! Run configuration: a single TOML file with nested blocks, plus the flag
//! overrides. Every run artifact embeds the fully resolved configuration in
//! its metadata sidecar, so a rerun from the sidecar reproduces the artifact
//! byte for byte.

use serde::{Deserialize, Serialize};

use percount::estimate::{LatentKind, MarginalFamilyKind};
use percount::{FourierCurve, LatentSpec, MarginalSpec};

use crate::AppError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub period: u32,
    pub marginal: MarginalBlock,
    pub latent: LatentBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub optimizer: OptimizerBlock,
    #[serde(default)]
    pub study: Option<StudyBlock>,
    #[serde(default)]
    pub link: LinkBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub level: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalBlock {
    pub family: String,
    #[serde(default)]
    pub lambda: Option<CurveConfig>,
    #[serde(default)]
    pub p: Option<CurveConfig>,
    #[serde(default)]
    pub mu: Option<CurveConfig>,
    #[serde(default)]
    pub sigma2: Option<CurveConfig>,
    #[serde(default)]
    pub alpha: Option<CurveConfig>,
    #[serde(default)]
    pub beta: Option<CurveConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentBlock {
    pub kind: String,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub phi_curve: Option<CurveConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub n: usize,
    pub particles: usize,
    /// Simulation seed (explicit; no ambient entropy anywhere).
    pub seed: u64,
    /// Common-random-numbers seed for the likelihood.
    pub crn_seed: u64,
    #[serde(default)]
    pub data: Option<String>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub workers: usize,
}

fn default_out_dir() -> String {
    "out".to_string()
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            n: 300,
            particles: 500,
            seed: 1,
            crn_seed: 2,
            data: None,
            out_dir: default_out_dir(),
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBlock {
    pub max_iters: usize,
    pub tol: f64,
    pub restarts: usize,
    pub final_particles: usize,
}

impl Default for OptimizerBlock {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-6,
            restarts: 3,
            final_particles: 5000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyBlock {
    pub replicates: usize,
    pub base_seed: u64,
    pub grid: Vec<GridEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub n: usize,
    pub period: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBlock {
    pub nu1: u32,
    pub nu2: u32,
    pub order: usize,
    pub step: f64,
}

impl Default for LinkBlock {
    fn default() -> Self {
        Self {
            nu1: 1,
            nu2: 1,
            order: 30,
            step: 0.01,
        }
    }
}

impl RunConfig {
    pub fn load(path: &str) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read config {path}: {e}")))?;
        toml::from_str(&text)
            .map_err(|e| AppError::Config(format!("config {path}: {e}")))
    }

    pub fn family_kind(&self) -> Result<MarginalFamilyKind, AppError> {
        match self.marginal.family.as_str() {
            "poisson" => Ok(MarginalFamilyKind::Poisson),
            "binomial" => Ok(MarginalFamilyKind::Binomial),
            "gen_poisson" => Ok(MarginalFamilyKind::TruncGenPoisson),
            "tsmc" => Ok(MarginalFamilyKind::Tsmc),
            other => Err(AppError::Config(format!(
                "unknown marginal family '{other}' (expected poisson | binomial | gen_poisson | tsmc)"
            ))),
        }
    }

    pub fn latent_kind(&self) -> Result<LatentKind, AppError> {
        match self.latent.kind.as_str() {
            "wn" => Ok(LatentKind::WhiteNoise),
            "ar1" => Ok(LatentKind::Ar1),
            "par1" => Ok(LatentKind::Par1),
            "sar1" => Ok(LatentKind::Sar1),
            other => Err(AppError::Config(format!(
                "unknown latent kind '{other}' (expected wn | ar1 | par1 | sar1)"
            ))),
        }
    }

    fn curve(&self, c: &CurveConfig, what: &str, period: u32) -> Result<FourierCurve, AppError> {
        FourierCurve::new(c.level, c.amplitude, c.phase, period)
            .map_err(|e| AppError::Config(format!("{what} curve: {e}")))
    }

    /// Build the fully parametrized marginal at a given period (the grid may
    /// override the top-level period).
    pub fn marginal_spec_at(&self, period: u32) -> Result<MarginalSpec, AppError> {
        let family = self.family_kind()?;
        let need = |opt: &Option<CurveConfig>, name: &str| -> Result<CurveConfig, AppError> {
            opt.clone().ok_or_else(|| {
                AppError::Config(format!(
                    "marginal family '{}' needs the '{name}' curve",
                    self.marginal.family
                ))
            })
        };
        let spec = match family {
            MarginalFamilyKind::Poisson => MarginalSpec::Poisson {
                lambda: self.curve(&need(&self.marginal.lambda, "lambda")?, "lambda", period)?,
            },
            MarginalFamilyKind::Binomial => MarginalSpec::Binomial {
                p: self.curve(&need(&self.marginal.p, "p")?, "p", period)?,
            },
            MarginalFamilyKind::TruncGenPoisson => MarginalSpec::TruncGenPoisson {
                mu: self.curve(&need(&self.marginal.mu, "mu")?, "mu", period)?,
                sigma2: self.curve(&need(&self.marginal.sigma2, "sigma2")?, "sigma2", period)?,
            },
            MarginalFamilyKind::Tsmc => MarginalSpec::Tsmc {
                alpha: self.curve(&need(&self.marginal.alpha, "alpha")?, "alpha", period)?,
                beta: self.curve(&need(&self.marginal.beta, "beta")?, "beta", period)?,
            },
        };
        spec.validate()
            .map_err(|e| AppError::Config(format!("marginal parameters: {e}")))?;
        Ok(spec)
    }

    pub fn latent_spec_at(&self, period: u32) -> Result<LatentSpec, AppError> {
        let kind = self.latent_kind()?;
        let spec = match kind {
            LatentKind::WhiteNoise => LatentSpec::WhiteNoise { period },
            LatentKind::Ar1 => LatentSpec::Ar1 {
                phi: self.latent.phi.ok_or_else(|| {
                    AppError::Config("latent kind 'ar1' needs 'phi'".to_string())
                })?,
                period,
            },
            LatentKind::Par1 => LatentSpec::Par1 {
                phi: self.curve(
                    &self.latent.phi_curve.clone().ok_or_else(|| {
                        AppError::Config("latent kind 'par1' needs 'phi_curve'".to_string())
                    })?,
                    "phi",
                    period,
                )?,
            },
            LatentKind::Sar1 => LatentSpec::Sar1 {
                phi: self.latent.phi.ok_or_else(|| {
                    AppError::Config("latent kind 'sar1' needs 'phi'".to_string())
                })?,
                alpha: self.latent.alpha.ok_or_else(|| {
                    AppError::Config("latent kind 'sar1' needs 'alpha'".to_string())
                })?,
                period,
            },
        };
        spec.validate()
            .map_err(|e| AppError::Config(format!("latent parameters: {e}")))?;
        Ok(spec)
    }

    pub fn marginal_spec(&self) -> Result<MarginalSpec, AppError> {
        self.marginal_spec_at(self.period)
    }

    pub fn latent_spec(&self) -> Result<LatentSpec, AppError> {
        self.latent_spec_at(self.period)
    }

    /// Marginal curves present? (fit can run from method-of-moments init
    /// when they are absent; simulate and pit cannot.)
    pub fn has_marginal_params(&self) -> bool {
        match self.marginal.family.as_str() {
            "poisson" => self.marginal.lambda.is_some(),
            "binomial" => self.marginal.p.is_some(),
            "gen_poisson" => self.marginal.mu.is_some() && self.marginal.sigma2.is_some(),
            "tsmc" => self.marginal.alpha.is_some() && self.marginal.beta.is_some(),
            _ => false,
        }
    }

    pub fn has_latent_params(&self) -> bool {
        match self.latent.kind.as_str() {
            "wn" => true,
            "ar1" => self.latent.phi.is_some(),
            "par1" => self.latent.phi_curve.is_some(),
            "sar1" => self.latent.phi.is_some() && self.latent.alpha.is_some(),
            _ => false,
        }
    }

    /// The documented default configuration (printed by `config
    /// --print-defaults`).
    pub fn defaults() -> Self {
        Self {
            period: 10,
            marginal: MarginalBlock {
                family: "poisson".into(),
                lambda: Some(CurveConfig {
                    level: 10.0,
                    amplitude: 5.0,
                    phase: 5.0,
                }),
                p: None,
                mu: None,
                sigma2: None,
                alpha: None,
                beta: None,
            },
            latent: LatentBlock {
                kind: "par1".into(),
                phi: None,
                alpha: None,
                phi_curve: Some(CurveConfig {
                    level: 0.5,
                    amplitude: 0.2,
                    phase: 5.0,
                }),
            },
            run: RunBlock::default(),
            optimizer: OptimizerBlock::default(),
            study: Some(StudyBlock {
                replicates: 20,
                base_seed: 100,
                grid: vec![GridEntry { n: 300, period: 10 }],
            }),
            link: LinkBlock::default(),
        }
    }
}
