use std::fs;
use std::path::{Path, PathBuf};

use medpriv_core::risk::{EstimatorConfig, RiskScope};
use medpriv_core::transforms::{preset_plan, Family, Preset};
use medpriv_core::utility::{ClassifierSpec, SplitConfig};
use medpriv_core::{ProtectionPlan, RoleMap};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

/// Role map given inline or as a path to a JSON file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RolesSource {
    Path(PathBuf),
    Inline(RoleMap),
}

/// Preset name or a full plan object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PlanSource {
    Preset(String),
    Plan(ProtectionPlan),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: Option<f64>,
    /// Defaults to the run seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input_csv: PathBuf,
    pub roles: RolesSource,
    #[serde(default)]
    pub positive_label: Option<String>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub plan: Option<PlanSource>,
    /// Presets run by `compare`; all five when empty.
    #[serde(default)]
    pub presets: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub risk_scope: RiskScope,
    #[serde(default = "ClassifierSpec::defaults")]
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(default)]
    pub split: SplitSection,
    pub output_dir: PathBuf,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn role_map(&self) -> Result<RoleMap, CliError> {
        match &self.roles {
            RolesSource::Inline(m) => Ok(m.clone()),
            RolesSource::Path(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read roles file {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("roles file {}: {e}", p.display())))
            }
        }
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            test_fraction: self
                .split
                .test_fraction
                .unwrap_or(SplitConfig::default().test_fraction),
            seed: self.split.seed.unwrap_or(self.seed),
        }
    }

    pub fn family(&self) -> Result<Family, CliError> {
        let name = self.family.as_deref().ok_or_else(|| {
            CliError::Config("a preset needs `family` (heart or diabetes)".into())
        })?;
        name.parse().map_err(|e| CliError::Config(format!("{e}")))
    }

    pub fn preset_plan(&self, name: &str) -> Result<ProtectionPlan, CliError> {
        let preset: Preset = name.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        Ok(preset_plan(preset, self.family()?, self.seed))
    }

    /// The plan to run: `preset` overrides the config's `plan`; a plan
    /// object takes the run seed.
    pub fn resolve_plan(&self, preset: Option<&str>) -> Result<ProtectionPlan, CliError> {
        if let Some(p) = preset {
            return self.preset_plan(p);
        }
        match &self.plan {
            Some(PlanSource::Preset(p)) => self.preset_plan(p),
            Some(PlanSource::Plan(plan)) => Ok(ProtectionPlan {
                seed: self.seed,
                ..plan.clone()
            }),
            None => Err(CliError::Config(
                "no plan: set `plan` in the config or pass --preset".into(),
            )),
        }
    }

    pub fn compare_presets(&self, cli: Option<&str>) -> Vec<String> {
        if let Some(list) = cli {
            return list
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
        }
        if self.presets.is_empty() {
            Preset::ALL.iter().map(Preset::to_string).collect()
        } else {
            self.presets.clone()
        }
    }
}
