//! Run configuration: one TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use locust_radar::crosscheck::CrossCheckConfig;
use locust_radar::{FilterConfig, TrackerConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlertConfig {
    /// Alert when an active track's lead time drops below this.
    pub lead_time_threshold_h: f64,
    /// Tracks whose last centroid is farther than this get no estimate.
    pub range_limit_km: f64,
}

impl Default for AlertConfig {
    fn default() -> Self {
        AlertConfig { lead_time_threshold_h: 7.0, range_limit_km: 250.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub filter: FilterConfig,
    pub tracker: TrackerConfig,
    pub crosscheck: CrossCheckConfig,
    pub alert: AlertConfig,
    pub paths: PathsConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.filter.validate()?;
        self.tracker.validate()?;
        self.crosscheck.validate()?;
        if !(self.alert.lead_time_threshold_h > 0.0) {
            bail!("alert.lead_time_threshold_h must be positive");
        }
        if !(self.alert.range_limit_km > 0.0) {
            bail!("alert.range_limit_km must be positive");
        }
        Ok(())
    }

    /// The config as echoed into output provenance. Output locations are
    /// left out so identical runs in different directories match.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("config is a table").remove("paths");
        v
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML config file; see the README for the schema.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub z_min_dbz: Option<f64>,
    #[arg(long)]
    pub v_max_ms: Option<f64>,
    #[arg(long)]
    pub height_ceiling_km: Option<f64>,
    #[arg(long)]
    pub min_cluster_gates: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    /// File, then flags, then validation.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(x) = self.z_min_dbz {
            cfg.filter.z_min_dbz = x;
        }
        if let Some(x) = self.v_max_ms {
            cfg.filter.v_max_abs_ms = x;
        }
        if let Some(x) = self.height_ceiling_km {
            cfg.filter.height_ceiling_km = x;
        }
        if let Some(x) = self.min_cluster_gates {
            cfg.filter.min_cluster_gates = x;
        }
        if let Some(p) = &self.out_dir {
            cfg.paths.out_dir = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
