//! Plain `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment. Values are numbers, booleans,
//! strings (optionally double-quoted) or bracketed comma-separated lists.
//! Readers consume keys explicitly; `finish` rejects whatever was not read.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::params::PhysicalParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key '{key}': {message}")]
    Value { line: usize, key: String, message: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("line {line}: unknown key '{key}'")]
    Unknown { line: usize, key: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
    List(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s}"),
            Value::List(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: Value,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn parse_scalar(raw: &str) -> Value {
    let s = raw.trim();
    if let Some(inner) = s.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
        return Value::Text(inner.to_string());
    }
    match s {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    match s.parse::<f64>() {
        Ok(x) => Value::Number(x),
        Err(_) => Value::Text(s.to_string()),
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected 'key = value', got '{body}'"),
            })?;
            let key = key.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
            {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("invalid key '{key}'"),
                });
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("key '{key}' has no value"),
                });
            }
            let value = if let Some(inner) = value.strip_prefix('[') {
                let inner = inner.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "unterminated list".into(),
                })?;
                if inner.trim().is_empty() {
                    Value::List(Vec::new())
                } else {
                    Value::List(inner.split(',').map(parse_scalar).collect())
                }
            } else {
                parse_scalar(value)
            };
            if entries.contains_key(key) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate key '{key}'"),
                });
            }
            entries.insert(key.to_string(), Entry { value, line });
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Value)>) -> Self {
        let entries = pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), Entry { value: v, line: 0 }))
            .collect();
        Self { entries }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        let line = self.entries.get(key).map(|e| e.line).unwrap_or(0);
        self.entries.insert(key.to_string(), Entry { value, line });
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    /// Resolved key/value pairs in sorted key order.
    pub fn resolved(&self) -> BTreeMap<String, Value> {
        self.entries
            .iter()
            .map(|(k, e)| (k.clone(), e.value.clone()))
            .collect()
    }

    pub fn reader(&self) -> Reader<'_> {
        Reader { cfg: self, used: Default::default() }
    }
}

/// Tracks which keys were consumed.
pub struct Reader<'a> {
    cfg: &'a Config,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl<'a> Reader<'a> {
    fn entry(&self, key: &str) -> Option<&'a Entry> {
        let e = self.cfg.entries.get(key);
        if e.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        e
    }

    fn err(&self, e: &Entry, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value { line: e.line, key: key.to_string(), message: message.into() }
    }

    pub fn has(&self, key: &str) -> bool {
        self.cfg.entries.contains_key(key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match &e.value {
                Value::Number(x) if x.is_finite() => Ok(Some(*x)),
                Value::Number(_) => Err(self.err(e, key, "value must be finite")),
                other => Err(self.err(e, key, format!("expected a number, got '{other}'"))),
            },
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.opt_f64(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.opt_f64(key)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= 9.007e15 => Ok(Some(x as u64)),
            Some(x) => {
                let e = self.entry(key).expect("key present");
                Err(self.err(e, key, format!("expected a nonnegative integer, got {x}")))
            }
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        Ok(self.opt_u64(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => match &e.value {
                Value::Bool(b) => Ok(*b),
                other => Err(self.err(e, key, format!("expected true or false, got '{other}'"))),
            },
        }
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match &e.value {
                Value::Text(s) => Ok(Some(s.clone())),
                other => Err(self.err(e, key, format!("expected text, got '{other}'"))),
            },
        }
    }

    pub fn opt_list_f64(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match &e.value {
                Value::List(items) => items
                    .iter()
                    .map(|v| match v {
                        Value::Number(x) if x.is_finite() => Ok(*x),
                        other => Err(self.err(e, key, format!("list item '{other}' is not a number"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some),
                Value::Number(x) => Ok(Some(vec![*x])),
                other => Err(self.err(e, key, format!("expected a list, got '{other}'"))),
            },
        }
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.cfg.entries.get(key).map(|e| e.line).unwrap_or(0)
    }

    /// Fail on the first key (in file order) that nothing consumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        let mut unknown: Vec<(&String, &Entry)> = self
            .cfg
            .entries
            .iter()
            .filter(|(k, _)| !used.contains(*k))
            .collect();
        unknown.sort_by_key(|(_, e)| e.line);
        match unknown.first() {
            Some((k, e)) => Err(ConfigError::Unknown { line: e.line, key: (*k).clone() }),
            None => Ok(()),
        }
    }
}

pub const PARAM_KEYS: [&str; 16] = [
    "n_atoms", "g_a_re", "g_a_im", "g_b_re", "g_b_im", "omega1_re", "omega1_im", "omega2_re",
    "omega2_im", "delta1", "omega_ab", "delta", "kappa", "gamma_a", "gamma_b", "gamma_o",
];

/// Read the physical parameter block. Missing imaginary parts default to 0.
pub fn read_params(r: &Reader<'_>) -> Result<PhysicalParams, ConfigError> {
    let cplx = |re: &str, im: &str| -> Result<C64, ConfigError> {
        Ok(C64::new(r.f64(re)?, r.f64_or(im, 0.0)?))
    };
    let n_atoms = r.opt_u64("n_atoms")?.ok_or_else(|| ConfigError::Missing("n_atoms".into()))?;
    let p = PhysicalParams {
        n_atoms,
        g_a: cplx("g_a_re", "g_a_im")?,
        g_b: cplx("g_b_re", "g_b_im")?,
        omega_1: cplx("omega1_re", "omega1_im")?,
        omega_2: cplx("omega2_re", "omega2_im")?,
        delta_1: r.f64("delta1")?,
        omega_ab: r.f64("omega_ab")?,
        delta: r.f64("delta")?,
        kappa: r.f64("kappa")?,
        gamma_a: r.f64("gamma_a")?,
        gamma_b: r.f64("gamma_b")?,
        gamma_o: r.f64("gamma_o")?,
    };
    p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(p)
}

/// Config entries reproducing `p` exactly under `read_params`.
pub fn params_to_pairs(p: &PhysicalParams) -> Vec<(&'static str, Value)> {
    let n = Value::Number;
    vec![
        ("n_atoms", n(p.n_atoms as f64)),
        ("g_a_re", n(p.g_a.re)),
        ("g_a_im", n(p.g_a.im)),
        ("g_b_re", n(p.g_b.re)),
        ("g_b_im", n(p.g_b.im)),
        ("omega1_re", n(p.omega_1.re)),
        ("omega1_im", n(p.omega_1.im)),
        ("omega2_re", n(p.omega_2.re)),
        ("omega2_im", n(p.omega_2.im)),
        ("delta1", n(p.delta_1)),
        ("omega_ab", n(p.omega_ab)),
        ("delta", n(p.delta)),
        ("kappa", n(p.kappa)),
        ("gamma_a", n(p.gamma_a)),
        ("gamma_b", n(p.gamma_b)),
        ("gamma_o", n(p.gamma_o)),
    ]
}
