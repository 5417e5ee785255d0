//! Plain-text `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long CLI
//! flag names without the leading dashes (`snr-start`, `lmax`, ...).

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return invalid(format!(
                    "line {}: expected key=value, got {line:?}",
                    lineno + 1
                ));
            };
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            if key.is_empty() {
                return invalid(format!("line {}: empty key", lineno + 1));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(KeyValues(map))
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Parses the value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .or_else(|e| invalid(format!("config key {key}: cannot parse {v:?}: {e}"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalises() {
        let kv =
            KeyValues::parse("# comment\n\nn1 = 256\n--snr_start=1.5\nearly-stop=off\n").unwrap();
        assert_eq!(kv.get::<usize>("n1").unwrap(), Some(256));
        assert_eq!(kv.get::<f64>("snr-start").unwrap(), Some(1.5));
        assert_eq!(kv.get_raw("early-stop"), Some("off"));
        assert_eq!(kv.get::<usize>("missing").unwrap(), None);
    }

    #[test]
    fn rejects_garbage() {
        assert!(KeyValues::parse("n1 256").is_err());
        assert!(KeyValues::parse("=3").is_err());
        let kv = KeyValues::parse("n1=abc").unwrap();
        assert!(kv.get::<usize>("n1").is_err());
    }
}
