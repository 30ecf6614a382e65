//! Optional `key=value` settings file. Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "lambda-s",
    "lambda-m",
    "tmax",
    "points",
    "solver",
    "runs",
    "seed",
    "max-sensors",
    "max-mcus",
    "horizons",
    "out",
    "format",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Blank lines and lines starting with `#` are skipped. Keys may use
    /// `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!(
                    "config line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        debug_assert!(KNOWN_KEYS.contains(&key));
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Usage(format!("config key {key}: invalid value {v:?}")))
            })
            .transpose()
    }
}
