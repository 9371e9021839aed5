//! Flat `key = value` experiment files. Keys are the long CLI flag names
//! without the dashes; `#` starts a comment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{BenchError, Result};

pub const KEYS: &[&str] = &[
    "family",
    "n",
    "k",
    "p",
    "d",
    "b",
    "trials",
    "seed-list",
    "out",
    "reps",
    "t",
    "s",
    "matrix-seed",
    "kappa",
    "algorithms",
];

/// Settings keyed by flag name; later sources override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    entries: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut settings = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| BenchError::ConfigFile {
                path: origin.to_path_buf(),
                line: idx + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key '{key}'")));
            }
            settings.entries.insert(key, value.trim().to_string());
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let text = "# heat run\nfamily = heat\nn=400,800  # two sizes\n\nseed_list = 1,2,3\n";
        let mut s = Settings::parse(text, Path::new("exp.cfg")).unwrap();
        assert_eq!(s.get("family"), Some("heat"));
        assert_eq!(s.get("n"), Some("400,800"));
        assert_eq!(s.get("seed-list"), Some("1,2,3"));
        let mut cli = Settings::default();
        cli.set("n", 100);
        s.overlay(&cli);
        assert_eq!(s.get("n"), Some("100"));
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let err = Settings::parse("k = 3\nrank = 4\n", Path::new("bad.cfg")).unwrap_err();
        assert_eq!(err.to_string(), "bad.cfg:2: unknown key 'rank'");
        assert!(Settings::parse("k 3\n", Path::new("x")).is_err());
    }
}
