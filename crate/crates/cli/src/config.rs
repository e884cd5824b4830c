use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use beanrec_core::evaluation::SweepConfig;
use beanrec_core::regressors::{
    Family, ForestConfig, MlpConfig, MlpSearchSpace, RegressorConfig, SvrConfig, SvrGrid,
};
use beanrec_service::ServiceConfig;
use serde::Deserialize;

/// Optional TOML file passed with `--config`. Every section falls back to
/// the built-in defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub data: Option<PathBuf>,
    pub forest: ForestConfig,
    pub svr: SvrConfig,
    pub svr_grid: SvrGrid,
    /// Skip the grid and use `svr.per_target` as given.
    pub svr_fixed: bool,
    pub mlp: MlpConfig,
    pub mlp_search: MlpSearchSpace,
    pub sweep: SweepConfig,
    pub service: Option<ServiceConfig>,
    #[serde(skip)]
    pub base: PathBuf,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self {
                base: PathBuf::from("."),
                ..Default::default()
            });
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: CliConfig = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        if let Some(d) = cfg.data.as_mut() {
            if d.is_relative() {
                *d = cfg.base.join(&*d);
            }
        }
        Ok(cfg)
    }

    /// Model configuration for `family` with `seed` applied.
    pub fn regressor(&self, family: Family, seed: u64) -> RegressorConfig {
        let cfg = match family {
            Family::Forest => RegressorConfig::Forest(self.forest.clone()),
            Family::Svr => RegressorConfig::Svr(self.svr.clone()),
            Family::Mlp => RegressorConfig::Mlp(self.mlp.clone()),
        };
        cfg.with_seed(seed)
    }

    pub fn data(&self, flag: Option<&Path>) -> Result<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.data.clone())
            .context("no dataset given: pass --data or set `data` in the config file")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("beanrec.toml");
        std::fs::write(&p, "data = \"reviews.csv\"\n[forest]\nn_trees = 7\n[sweep]\nk = 3\n").unwrap();
        let cfg = CliConfig::load(Some(&p)).unwrap();
        assert_eq!(cfg.forest.n_trees, 7);
        assert_eq!(cfg.sweep.k, 3);
        assert_eq!(cfg.sweep.n_users, 100);
        assert_eq!(cfg.data.unwrap(), dir.path().join("reviews.csv"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("beanrec.toml");
        std::fs::write(&p, "trees = 7\n").unwrap();
        assert!(CliConfig::load(Some(&p)).is_err());
    }

    #[test]
    fn example_file_parses() {
        let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../beanrec.example.toml");
        let cfg = CliConfig::load(Some(&p)).unwrap();
        assert_eq!(cfg.forest, ForestConfig::default());
        assert_eq!(cfg.sweep, SweepConfig::default());
        assert_eq!(cfg.svr.per_target.len(), 8);
        let service = cfg.service.unwrap();
        service.validate().unwrap();
        assert_eq!(service.hidden_fraction, Some(0.2));
    }
}
