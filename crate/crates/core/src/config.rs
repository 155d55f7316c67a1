//! Runtime configuration: resource caps, thread count and output mode.
//! Sources in increasing precedence: defaults, config file, `WF_*`
//! environment variables, command-line flags.

use crate::{Error, Result};
use std::path::Path;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum OutputMode {
    Json,
    Text,
}

#[derive(Clone, Debug)]
pub struct Config {
    /// refuse enumerations projected to exceed this many generators
    pub generator_cap: usize,
    /// refuse relation matrices with more nonzero entries than this
    pub matrix_entry_limit: usize,
    /// worker threads; None lets the runtime decide
    pub thread_count: Option<usize>,
    pub output: OutputMode,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            generator_cap: 200_000,
            matrix_entry_limit: 20_000_000,
            thread_count: None,
            output: OutputMode::Json,
        }
    }
}

impl Config {
    /// Loads the file (simple `key = value` lines, `#` comments) and then the
    /// WF_* environment. Flags are applied by the caller on top.
    pub fn load(file: Option<&Path>) -> Result<Config> {
        let mut cfg = Config::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Error::Validation(format!(
                        "{}:{}: expected key = value",
                        path.display(),
                        lineno + 1
                    )));
                };
                cfg.set(key.trim(), value.trim())?;
            }
        }
        for (key, field) in [
            ("WF_GENERATOR_CAP", "generator_cap"),
            ("WF_MATRIX_ENTRY_LIMIT", "matrix_entry_limit"),
            ("WF_THREAD_COUNT", "thread_count"),
            ("WF_OUTPUT", "output"),
        ] {
            if let Ok(value) = std::env::var(key) {
                cfg.set(field, &value)?;
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Validation(format!("bad {what} value '{value}'"));
        match key {
            "generator_cap" => {
                self.generator_cap = value.parse().map_err(|_| bad("generator_cap"))?;
                if self.generator_cap == 0 {
                    return Err(Error::Validation("generator_cap must be positive".into()));
                }
            }
            "matrix_entry_limit" => {
                self.matrix_entry_limit =
                    value.parse().map_err(|_| bad("matrix_entry_limit"))?;
                if self.matrix_entry_limit == 0 {
                    return Err(Error::Validation("matrix_entry_limit must be positive".into()));
                }
            }
            "thread_count" => {
                self.thread_count = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("thread_count"))?)
                };
            }
            "output" => {
                self.output = match value {
                    "json" => OutputMode::Json,
                    "text" => OutputMode::Text,
                    _ => return Err(bad("output")),
                };
            }
            _ => return Err(Error::Validation(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }
}
