//! Structure configuration files: flat TOML key-value pairs.
//!
//! ```toml
//! l0 = 0.0
//! l1 = 1.0
//! l2 = 2.0
//! l3 = 3.0
//! rho1 = 1.0
//! rho2 = 1.0
//! beta = 1.0
//! ```
//!
//! Every key is required and unknown keys are rejected, so a misspelled
//! damping coefficient cannot silently change the regime.

use std::path::Path;

use serde::Deserialize;
use translab::StructureConfig;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    l0: f64,
    l1: f64,
    l2: f64,
    l3: f64,
    rho1: f64,
    rho2: f64,
    beta: f64,
}

pub fn parse_config(text: &str) -> Result<StructureConfig, CliError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    let cfg = StructureConfig {
        l0: file.l0,
        l1: file.l1,
        l2: file.l2,
        l3: file.l3,
        rho1: file.rho1,
        rho2: file.rho2,
        beta: file.beta,
    };
    Ok(cfg.validate()?)
}

pub fn load_config(path: &Path) -> Result<StructureConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

/// Configuration used when no file is given: unit intervals with every
/// damping mechanism switched on.
pub fn default_config() -> StructureConfig {
    StructureConfig::unit(1.0, 1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use translab::DampingCase;

    #[test]
    fn parses_complete_file() {
        let cfg = parse_config(
            "l0 = 0\nl1 = 1.5\nl2 = 2.0\nl3 = 3\nrho1 = 0\nrho2 = 0\nbeta = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.l1, 1.5);
        assert_eq!(cfg.damping_case(), DampingCase::Udu);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        let typo = "l0 = 0\nl1 = 1\nl2 = 2\nl3 = 3\nrho1 = 1\nrho2 = 1\nbeta = 1\nbetta = 2\n";
        assert!(matches!(parse_config(typo), Err(CliError::Config(_))));
        let missing = "l0 = 0\nl1 = 1\nl2 = 2\nl3 = 3\nrho1 = 1\nrho2 = 1\n";
        assert!(matches!(parse_config(missing), Err(CliError::Config(_))));
        let section = "[beam]\nl0 = 0\n";
        assert!(parse_config(section).is_err());
    }

    #[test]
    fn rejects_invalid_geometry() {
        let bad = "l0 = 0\nl1 = 2\nl2 = 1\nl3 = 3\nrho1 = 1\nrho2 = 1\nbeta = 1\n";
        assert!(matches!(parse_config(bad), Err(CliError::Model(_))));
        let negative = "l0 = 0\nl1 = 1\nl2 = 2\nl3 = 3\nrho1 = -1\nrho2 = 1\nbeta = 1\n";
        assert!(matches!(parse_config(negative), Err(CliError::Model(_))));
    }
}
