use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    /// Reviews, raw or cleaned CSV.
    pub dataset: PathBuf,
    /// Trained model JSON.
    pub model: PathBuf,
    /// Beans without reviews; their scores are predicted at load time.
    #[serde(default)]
    pub unreviewed: Option<PathBuf>,
    /// Treat this fraction of the reviewed beans as unreviewed (demo mode).
    #[serde(default)]
    pub hidden_fraction: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub default_k: usize,
    #[serde(default = "default_bind")]
    pub bind: SocketAddr,
    /// Permissive CORS for a UI served from another origin.
    #[serde(default)]
    pub dev_cors: bool,
    #[serde(default = "default_log")]
    pub log: String,
}

fn default_k() -> usize {
    5
}

fn default_bind() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_log() -> String {
    "info".into()
}

impl ServiceConfig {
    pub fn new(dataset: impl Into<PathBuf>, model: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            model: model.into(),
            unreviewed: None,
            hidden_fraction: None,
            seed: 0,
            default_k: default_k(),
            bind: default_bind(),
            dev_cors: false,
            log: default_log(),
        }
    }

    /// Parses TOML; relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ServiceError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        for p in [&mut cfg.dataset, &mut cfg.model] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.unreviewed.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.default_k == 0 {
            return Err(ServiceError::Config("default_k must be at least 1".into()));
        }
        if let Some(m) = self.hidden_fraction {
            if !(0.0..1.0).contains(&m) {
                return Err(ServiceError::Config(format!("hidden_fraction {m} not in [0, 1)")));
            }
        }
        if !["error", "warn", "info", "debug", "trace"].contains(&self.log.as_str()) {
            return Err(ServiceError::Config(format!("log level `{}` is not one of error, warn, info, debug, trace", self.log)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let cfg = ServiceConfig::from_toml(
            "dataset = \"data.csv\"\nmodel = \"/abs/model.json\"\ndefault_k = 3\n",
            Path::new("/etc/beanrec"),
        )
        .unwrap();
        assert_eq!(cfg.dataset, PathBuf::from("/etc/beanrec/data.csv"));
        assert_eq!(cfg.model, PathBuf::from("/abs/model.json"));
        assert_eq!(cfg.default_k, 3);
        assert_eq!(cfg.bind.port(), 8080);
        assert!(!cfg.dev_cors);
    }

    #[test]
    fn rejects_bad_values() {
        let base = Path::new(".");
        assert!(ServiceConfig::from_toml("dataset = \"a\"\nmodel = \"b\"\ndefault_k = 0\n", base).is_err());
        assert!(ServiceConfig::from_toml("dataset = \"a\"\nmodel = \"b\"\nhidden_fraction = 1.0\n", base).is_err());
        assert!(ServiceConfig::from_toml("dataset = \"a\"\nmodel = \"b\"\nport = 1\n", base).is_err());
        assert!(ServiceConfig::from_toml("dataset = \"a\"\nmodel = \"b\"\nlog = \"loud\"\n", base).is_err());
    }
}
