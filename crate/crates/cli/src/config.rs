use std::path::PathBuf;

use authenc::CaMode;
use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

/// Names a TOML file with defaults for flags that are not given.
pub const CONFIG_ENV: &str = "AUTHENC_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Machen,
    Improved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaModeArg {
    Default,
    StrictPop,
}

impl From<CaModeArg> for CaMode {
    fn from(m: CaModeArg) -> Self {
        match m {
            CaModeArg::Default => CaMode::MembershipOnly,
            CaModeArg::StrictPop => CaMode::StrictPop,
        }
    }
}

impl From<CaMode> for CaModeArg {
    fn from(m: CaMode) -> Self {
        match m {
            CaMode::MembershipOnly => CaModeArg::Default,
            CaMode::StrictPop => CaModeArg::StrictPop,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CliConfig {
    pub scheme: Option<Scheme>,
    pub params: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub ca_mode: Option<CaModeArg>,
    /// Ignored unless `--insecure-test-rng` is passed.
    pub seed: Option<u64>,
}

impl CliConfig {
    pub fn load() -> Result<Self, CliError> {
        let Some(path) = std::env::var_os(CONFIG_ENV) else {
            return Ok(Self::default());
        };
        let path = PathBuf::from(path);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kebab_case() {
        let cfg: CliConfig = toml::from_str(
            "scheme = \"improved\"\nparams = \"g.pem\"\nca-mode = \"strict-pop\"\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme, Some(Scheme::Improved));
        assert_eq!(cfg.ca_mode, Some(CaModeArg::StrictPop));
        assert_eq!(cfg.seed, Some(7));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<CliConfig>("schema = \"machen\"").is_err());
    }
}
