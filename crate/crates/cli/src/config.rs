use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;
use switchtrack::bounds::{optimal_tuning, BoundInputs};
use switchtrack::harness::LossModel;
use switchtrack::learners::LearnerSpec;
use switchtrack::schemes::MixingScheme;

use crate::Invalid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ew,
    FixedShare,
    Pods,
    Share,
    Specialists,
    MppGeometric,
    MppUniform,
    MppDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tuning {
    #[default]
    Optimal,
    Manual,
}

/// The `simulate` config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub learner: LearnerKind,
    pub n: Option<usize>,
    #[serde(rename = "T", alias = "horizon")]
    pub horizon: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    #[serde(default = "default_loss")]
    pub loss: LossModel,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub tuning: Tuning,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    /// Exponent of the power-decay scheme.
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    /// Loss matrix to replay instead of generating one; relative paths
    /// resolve against the config file.
    pub losses_csv: Option<PathBuf>,
    /// 0-based comparator experts, one per row of `losses_csv`.
    pub comparator: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
}

fn default_loss() -> LossModel {
    LossModel::Mix
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Invalid(format!("config {}: {e}", path.display())))?;
        if let Some(csv) = &cfg.losses_csv {
            if csv.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.losses_csv = Some(base.join(csv));
            }
        }
        Ok(cfg)
    }

    /// Seeds to run, with `--seed` taking precedence over the file.
    pub fn seeds(&self, flag: Option<u64>) -> Vec<u64> {
        match (flag, &self.seeds, self.seed) {
            (Some(s), _, _) => vec![s],
            (None, Some(list), _) if !list.is_empty() => list.clone(),
            (None, _, Some(s)) => vec![s],
            _ => vec![0],
        }
    }

    pub fn field<T: Copy>(value: Option<T>, name: &str) -> anyhow::Result<T> {
        match value {
            Some(v) => Ok(v),
            None => bail!(Invalid(format!("config is missing \"{name}\""))),
        }
    }

    /// The learner with its parameters, tuned from `inp` when tuning is optimal.
    pub fn learner(&self, inp: &BoundInputs) -> anyhow::Result<LearnerSpec> {
        let (alpha, theta) = match self.tuning {
            Tuning::Optimal => {
                let (a, t) = optimal_tuning(inp)?;
                log::info!("optimal tuning: alpha={a} theta={t}");
                (a, t)
            }
            Tuning::Manual => {
                let needs_theta = matches!(
                    self.learner,
                    LearnerKind::Pods | LearnerKind::Share | LearnerKind::Specialists | LearnerKind::MppGeometric
                );
                let alpha = match self.learner {
                    LearnerKind::Ew => 0.0,
                    _ => Self::field(self.alpha, "alpha")?,
                };
                let theta = if needs_theta {
                    Self::field(self.theta, "theta")?
                } else {
                    0.0
                };
                (alpha, theta)
            }
        };
        let spec = match self.learner {
            LearnerKind::Ew => LearnerSpec::Ew,
            LearnerKind::FixedShare => LearnerSpec::FixedShare { alpha },
            LearnerKind::Pods => LearnerSpec::Pods { alpha, theta },
            LearnerKind::Share => LearnerSpec::Share { alpha, theta },
            LearnerKind::Specialists => LearnerSpec::Specialists { alpha, theta },
            LearnerKind::MppGeometric => LearnerSpec::Mpp {
                scheme: MixingScheme::geometric(alpha, theta)?,
            },
            LearnerKind::MppUniform => LearnerSpec::Mpp {
                scheme: MixingScheme::uniform(alpha)?,
            },
            LearnerKind::MppDecay => LearnerSpec::Mpp {
                scheme: MixingScheme::power_decay(alpha, self.gamma.unwrap_or(1.0))?,
            },
        };
        spec.init(inp.n)?;
        Ok(spec)
    }
}
