//! Simple `key=value` configuration files.
//!
//! Keys use the long flag names without the leading dashes; values are
//! parsed exactly like the flag would be. Precedence is built-in defaults,
//! then the config file, then explicit flags.
//!
//! Two keys have no flag equivalent and select the codebook backend:
//! `backend=tans` and `tans-counts=<path>` (a file of 256 whitespace
//! separated 4-mer counts; uniform counts when omitted).

use anyhow::{bail, Context, Result};
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = HashMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value", path.display(), number + 1);
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key}={raw}: {e}"),
            },
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Reads the tANS model counts file referenced by `tans-counts`.
    pub fn tans_counts(&self) -> Result<Option<Vec<u32>>> {
        let Some(path) = self.values.get("tans-counts") else {
            return Ok(None);
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read tans-counts file {path}"))?;
        let counts: Vec<u32> = text
            .split_whitespace()
            .map(|tok| {
                tok.parse()
                    .with_context(|| format!("bad count {tok:?} in {path}"))
            })
            .collect::<Result<_>>()?;
        Ok(Some(counts))
    }
}
