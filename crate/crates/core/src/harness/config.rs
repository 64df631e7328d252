use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QmplError, Result};
use crate::scalar::{normalize_precision, ScalarMode, MIN_PRECISION_BITS};

/// Environment variable naming a TOML file with defaults for [`RunConfig`].
pub const CONFIG_ENV: &str = "QMPL_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ModeName,
    /// Float precision; ignored in exact mode.
    pub precision_bits: u32,
    /// Default series cutoff `K`.
    pub trunc: usize,
    /// Upper limit on Jackson lattice sizes.
    pub lattice_cap: usize,
    pub seed: u64,
    pub format: OutputFormat,
    /// When set, evaluations pick the smallest cutoff whose tail bound is
    /// below this value, never less than `trunc`.
    pub tail_target: Option<f64>,
    /// Upper limit for automatically chosen cutoffs.
    pub max_trunc: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: ModeName::Exact,
            precision_bits: 128,
            trunc: 40,
            lattice_cap: 40_000,
            seed: 1,
            format: OutputFormat::Json,
            tail_target: None,
            max_trunc: 1_000_000,
        }
    }
}

impl RunConfig {
    pub fn scalar_mode(&self) -> ScalarMode {
        match self.mode {
            ModeName::Exact => ScalarMode::Exact,
            ModeName::Float => ScalarMode::float(self.precision_bits),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| QmplError::Parse(format!("config: {e}")))?;
        cfg.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QmplError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Defaults, overridden by the file named in [`CONFIG_ENV`] if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn validated(mut self) -> Result<Self> {
        if self.precision_bits < MIN_PRECISION_BITS {
            return Err(QmplError::InvalidParameter(format!(
                "precision_bits must be at least {MIN_PRECISION_BITS}"
            )));
        }
        self.precision_bits = normalize_precision(self.precision_bits);
        if self.trunc == 0 {
            return Err(QmplError::InvalidParameter("trunc must be positive".into()));
        }
        if self.lattice_cap == 0 {
            return Err(QmplError::InvalidParameter("lattice_cap must be positive".into()));
        }
        if let Some(t) = self.tail_target {
            if !(t > 0.0 && t.is_finite()) {
                return Err(QmplError::InvalidParameter("tail_target must be positive".into()));
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let c = RunConfig::from_toml("mode = \"float\"\nprecision_bits = 256\nseed = 7\n").unwrap();
        assert_eq!(c.scalar_mode(), ScalarMode::float(256));
        assert_eq!(c.seed, 7);
        assert_eq!(c.trunc, RunConfig::default().trunc);
    }

    #[test]
    fn rejects_unknown_keys_and_low_precision() {
        assert!(RunConfig::from_toml("precison_bits = 64").is_err());
        assert!(RunConfig::from_toml("precision_bits = 32").is_err());
        assert!(RunConfig::from_toml("trunc = 0").is_err());
    }
}
