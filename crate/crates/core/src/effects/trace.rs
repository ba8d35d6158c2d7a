//! Observable events, traces and run configurations.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An observable effect. Cell and scheduler operations are never observable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Event {
    Read { key: String, value: i64 },
    Tick { label: String },
}

impl Event {
    pub fn read(key: impl Into<String>, value: i64) -> Self {
        Event::Read {
            key: key.into(),
            value,
        }
    }

    pub fn tick(label: impl Into<String>) -> Self {
        Event::Tick {
            label: label.into(),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Read { key, value } => write!(f, "read {key} = {value}"),
            Event::Tick { label } => write!(f, "tick {label}"),
        }
    }
}

/// Ordered log of one run. For sequential runs `span == work == events.len()`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<Event>,
    pub span: u64,
    pub work: u64,
}

impl Trace {
    pub fn sequential(events: Vec<Event>) -> Self {
        let n = events.len() as u64;
        Trace {
            events,
            span: n,
            work: n,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

pub fn multiset(events: &[Event]) -> BTreeMap<&Event, usize> {
    let mut counts = BTreeMap::new();
    for e in events {
        *counts.entry(e).or_insert(0) += 1;
    }
    counts
}

/// True when every event occurs in `small` at most as often as in `big`.
pub fn is_sub_multiset(small: &[Event], big: &[Event]) -> bool {
    let big = multiset(big);
    multiset(small)
        .into_iter()
        .all(|(e, n)| big.get(e).is_some_and(|&m| n <= m))
}

pub fn sorted(events: &[Event]) -> Vec<Event> {
    let mut v = events.to_vec();
    v.sort();
    v
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Values answered by `read` effects: a flat `key = integer` table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Config(BTreeMap<String, i64>);

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<i64> {
        self.0.get(key).copied()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: i64) {
        self.0.insert(key.into(), value);
    }

    pub fn with(mut self, key: impl Into<String>, value: i64) -> Self {
        self.insert(key, value);
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

impl<K: Into<String>> FromIterator<(K, i64)> for Config {
    fn from_iter<I: IntoIterator<Item = (K, i64)>>(iter: I) -> Self {
        Config(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_json_shape() {
        let t = Trace::sequential(vec![Event::read("k", 7), Event::tick("t")]);
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"events":[{"type":"read","key":"k","value":7},{"type":"tick","label":"t"}],"span":2,"work":2}"#
        );
    }

    #[test]
    fn config_from_toml() {
        let cfg = Config::parse("new_size = 1024\nlegacy_size = -3 # comment\n").unwrap();
        assert_eq!(cfg.get("new_size"), Some(1024));
        assert_eq!(cfg.get("legacy_size"), Some(-3));
        assert_eq!(cfg.get("other"), None);
        assert!(Config::parse("k = \"text\"").is_err());
        assert!(Config::parse("[table]\nk = 1").is_err());
    }

    #[test]
    fn sub_multisets() {
        let a = Event::read("a", 1);
        let b = Event::tick("b");
        assert!(is_sub_multiset(std::slice::from_ref(&a), &[b.clone(), a.clone()]));
        assert!(!is_sub_multiset(&[a.clone(), a.clone()], &[a.clone(), b.clone()]));
        assert!(is_sub_multiset(&[], &[]));
    }
}
