//! Optional TOML run configuration. Command-line flags take precedence over
//! file values, which take precedence over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Box side lengths as a decimal or fraction list, e.g. `"1,2,3"` or `"7/5,11/3,2"`.
    pub domain: Option<String>,
    pub nu: Option<f64>,
    pub cutoff: Option<u32>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub segments: Option<usize>,
    pub iters: Option<usize>,
    /// Stop steering once the squared distance falls below this fraction of
    /// its initial value.
    pub stop_ratio: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub const DEFAULT_DOMAIN: &str = "1,1,1";
pub const DEFAULT_NU: f64 = 0.1;
pub const DEFAULT_CUTOFF: u32 = 4;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 5.0;
pub const DEFAULT_SEGMENTS: usize = 8;
pub const DEFAULT_ITERS: usize = 500;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_files() {
        let c: RunConfig = toml::from_str("domain = \"1,2,3\"\nnu = 0.05\n").unwrap();
        assert_eq!(c.domain.as_deref(), Some("1,2,3"));
        assert_eq!(c.nu, Some(0.05));
        assert_eq!(c.cutoff, None);
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }
}
