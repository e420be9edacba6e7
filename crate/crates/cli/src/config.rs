//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! seed = 7
//! [adr]
//! n_sites = 20      # becomes adr.n_sites
//! adr.dt = 0.01     # dotted keys work outside sections too
//! ```

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::CliError;
use crate::output::fmt_f64;

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    read: RefCell<BTreeSet<String>>,
    echo: RefCell<Vec<(String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| CliError::Syntax {
                    line: line_no,
                    msg: format!("unterminated section header `{line}`"),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Syntax {
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if entries
                .insert(full.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Syntax {
                    line: line_no,
                    msg: format!("duplicate key `{full}`"),
                });
            }
        }
        Ok(Self {
            entries,
            ..Self::default()
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.read.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    fn record(&self, key: &str, value: String) {
        self.echo.borrow_mut().push((key.to_string(), value));
    }

    /// Every key read so far with its resolved value, in read order.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.echo.borrow().clone()
    }

    /// Fails on keys present in the file that no getter asked for.
    pub fn reject_unknown(&self) -> Result<(), CliError> {
        let read = self.read.borrow();
        match self.entries.keys().find(|k| !read.contains(*k)) {
            Some(k) => Err(CliError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = match self.raw(key) {
            Some(s) => parse_f64(key, s)?,
            None => default,
        };
        self.record(key, fmt_f64(v));
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        let v = match self.raw(key) {
            Some(s) => parse_usize(key, s)?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        let v = match self.raw(key) {
            Some(s) => s
                .parse()
                .map_err(|_| value_err(key, s, "an unsigned integer"))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        let v = match self.raw(key) {
            Some(s) => s.parse().map_err(|_| value_err(key, s, "true or false"))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        v
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        let v = match self.raw(key) {
            Some(s) => split_list(s)
                .map(|item| parse_usize(key, item))
                .collect::<Result<Vec<_>, _>>()?,
            None => default.to_vec(),
        };
        if v.is_empty() {
            return Err(value_err(key, "", "a non-empty list"));
        }
        self.record(key, join(v.iter().map(|x| x.to_string())));
        Ok(v)
    }

    /// Comma list of numbers, or `start:stop:count` for `count` evenly spaced
    /// points including both ends.
    pub fn grid_or(&self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let s = self.raw(key).unwrap_or(default).to_string();
        let v = parse_grid(key, &s)?;
        self.record(key, join(v.iter().map(|x| fmt_f64(*x))));
        Ok(v)
    }
}

fn value_err(key: &str, raw: &str, expected: &str) -> CliError {
    CliError::Value {
        key: key.to_string(),
        msg: format!("expected {expected}, got `{raw}`"),
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(value_err(key, s, "a finite number")),
    }
}

fn parse_usize(key: &str, s: &str) -> Result<usize, CliError> {
    s.parse()
        .map_err(|_| value_err(key, s, "a non-negative integer"))
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

fn parse_grid(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let v = match parts.as_slice() {
        [start, stop, count] => {
            let (start, stop) = (parse_f64(key, start)?, parse_f64(key, stop)?);
            let count = parse_usize(key, count)?;
            match count {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..count)
                    .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                    .collect(),
            }
        }
        [_] => split_list(s)
            .map(|item| parse_f64(key, item))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(value_err(key, s, "a list or start:stop:count")),
    };
    if v.is_empty() {
        return Err(value_err(key, s, "a non-empty grid"));
    }
    Ok(v)
}
