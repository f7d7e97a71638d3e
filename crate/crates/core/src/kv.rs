//! Flat `key = value` text used for experiment configs and saved models.
//!
//! One entry per line; `#` starts a comment; blank lines are ignored. Keys
//! may not repeat. Vectors are stored as indexed keys (`theta.0`, `theta.1`,
//! …) or as comma-separated lists, depending on the caller.

use std::collections::BTreeMap;
use std::fmt::{self, Display};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvMap {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse { line: line_no, message: "empty key".into() });
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (line_no, value.trim().to_string())) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key {key:?} (first on line {first})"),
                });
            }
        }
        Ok(KvMap { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.get_str(key).ok_or_else(|| Error::config(format!("missing key {key:?}")))
    }

    /// Parse `key` if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e: T::Err| Error::Parse {
                line: *line,
                message: format!("bad value {v:?} for {key:?}: {e}"),
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| Error::config(format!("missing key {key:?}")))
    }

    /// Comma-separated list, if present. An empty value is an empty list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        if v.is_empty() {
            return Ok(Some(Vec::new()));
        }
        v.split(',')
            .map(|item| {
                let item = item.trim();
                item.parse().map_err(|e: T::Err| Error::Parse {
                    line: *line,
                    message: format!("bad list item {item:?} for {key:?}: {e}"),
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Values of `prefix.0`, `prefix.1`, … which must be contiguous.
    pub fn get_indexed<T: FromStr>(&self, prefix: &str) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let dotted = format!("{prefix}.");
        let count = self.entries.keys().filter(|k| k.starts_with(&dotted)).count();
        (0..count)
            .map(|i| {
                let key = format!("{prefix}.{i}");
                self.get(&key)?
                    .ok_or_else(|| Error::config(format!("{prefix} entries are not contiguous: missing {key:?}")))
            })
            .collect()
    }
}

/// Builds `key = value` text in insertion order.
#[derive(Debug, Clone, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.out.push_str(&format!("{key} = {value}\n"));
        self
    }

    /// f64 written with round-trip precision.
    pub fn put_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, format_args!("{value:?}"))
    }

    pub fn put_indexed_f64(&mut self, prefix: &str, values: &[f64]) -> &mut Self {
        for (i, v) in values.iter().enumerate() {
            self.put_f64(&format!("{prefix}.{i}"), *v);
        }
        self
    }

    pub fn put_list<T: Display>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        self.put(key, joined)
    }

    pub fn finish(self) -> String {
        self.out
    }
}

impl fmt::Display for KvWriter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.out)
    }
}
