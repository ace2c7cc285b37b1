//! The bundled reference system.

use std::path::Path;

use gridplan_core::data::SystemSpec;

use crate::config::{parse_config, resolve, ConfigError, LoadOptions};

/// TOML of the reference system. Its time series are synthetic.
pub const DEFAULT_CONFIG: &str = include_str!("../data/default.toml");

pub fn default_system(opts: LoadOptions) -> Result<SystemSpec, ConfigError> {
    let cfg = parse_config(DEFAULT_CONFIG, Path::new("<default>"))?;
    resolve(&cfg, Path::new("."), opts)
}
