//! Run configuration: one TOML (or JSON) file with sections `data`,
//! `marginal`, `seasonal`, `copula`, `simulate` and `output`. Every field has
//! a default; relative paths are resolved against the config file's
//! directory.

use std::path::{Path, PathBuf};

use autocopula_core::seasonal::DEFAULT_FAN_LEVELS;
use autocopula_core::simulate::DEFAULT_LEVELS;
use autocopula_core::{Conditioning, DeltaMode};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub data: DataConfig,
    pub marginal: MarginalConfig,
    pub seasonal: SeasonalConfig,
    pub copula: CopulaConfig,
    pub simulate: SimulateConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    pub date_column: String,
    pub value_column: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("data.csv"),
            date_column: "date".into(),
            value_column: "value".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginalConfig {
    /// Nelder–Mead tolerance on the mean negative log-likelihood.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeasonalConfig {
    pub harmonics: usize,
    /// δ fan: simulated paths, months ahead of the last fitted month, levels.
    pub fan_paths: usize,
    pub fan_months: usize,
    pub fan_levels: Vec<f64>,
}

impl Default for SeasonalConfig {
    fn default() -> Self {
        Self {
            harmonics: autocopula_core::seasonal::MAX_HARMONICS,
            fan_paths: 20_000,
            fan_months: 120,
            fan_levels: DEFAULT_FAN_LEVELS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CopulaConfig {
    /// Pairs per rectangle; `max(32, ⌈n/256⌉)` when absent.
    pub target_per_rect: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// 0 runs the fit stages only.
    pub paths: usize,
    pub seed: u64,
    pub conditioning: Conditioning,
    pub delta_mode: DeltaMode,
    /// First simulated date; the first observation date when absent.
    pub start: Option<NaiveDate>,
    /// Days per path; the span of the data when absent.
    pub horizon_days: Option<usize>,
    /// Initial value; the median of the first day's marginal when absent.
    pub x0: Option<f64>,
    pub levels: Vec<f64>,
    pub format: EnsembleFormat,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            paths: 100,
            seed: 0,
            conditioning: Conditioning::default(),
            delta_mode: DeltaMode::default(),
            start: None,
            horizon_days: None,
            x0: None,
            levels: DEFAULT_LEVELS.to_vec(),
            format: EnsembleFormat::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl Config {
    /// Reads `path` as JSON if it ends in `.json`, TOML otherwise, and
    /// resolves relative paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data.path = base.join(&cfg.data.path);
        cfg.output.dir = base.join(&cfg.output.dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if !(self.marginal.ftol > 0.0) || self.marginal.max_iter == 0 {
            return bad("marginal.ftol must be positive and marginal.max_iter at least 1");
        }
        if !(1..=autocopula_core::seasonal::MAX_HARMONICS).contains(&self.seasonal.harmonics) {
            return bad("seasonal.harmonics must be between 1 and 4");
        }
        let unit = |v: &[f64]| v.iter().all(|l| (0.0..=1.0).contains(l));
        if !unit(&self.seasonal.fan_levels) || !unit(&self.simulate.levels) {
            return bad("percentile levels must lie in [0, 1]");
        }
        if self.copula.target_per_rect.is_some_and(|t| t == 0) {
            return bad("copula.target_per_rect must be positive");
        }
        if self.simulate.horizon_days == Some(0) {
            return bad("simulate.horizon_days must be positive");
        }
        if self.simulate.x0.is_some_and(|x| !x.is_finite()) {
            return bad("simulate.x0 must be finite");
        }
        Ok(())
    }

    /// SHA-256 of the effective configuration (after overrides). The data
    /// and output paths are left out: the data is identified by its own
    /// digest, and where results are written does not change them.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.data.path = PathBuf::new();
        c.output.dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex(&Sha256::digest(bytes))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = Config::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.simulate.levels, vec![0.01, 0.05, 0.5, 0.95, 0.99]);
    }

    #[test]
    fn partial_sections_and_typos() {
        let cfg: Config =
            toml::from_str("[simulate]\npaths = 3\nconditioning = \"partial\"\n").unwrap();
        assert_eq!(cfg.simulate.paths, 3);
        assert_eq!(cfg.simulate.conditioning, Conditioning::Partial);
        assert_eq!(cfg.seasonal.fan_paths, 20_000);
        assert!(toml::from_str::<Config>("[simulate]\npath = 3\n").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = Config::default();
        cfg.seasonal.harmonics = 5;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = Config::default();
        cfg.simulate.levels = vec![1.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = Config::default();
        let mut b = a.clone();
        b.simulate.seed = 1;
        assert_eq!(a.digest(), Config::default().digest());
        assert_ne!(a.digest(), b.digest());
        let mut c = a.clone();
        c.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
