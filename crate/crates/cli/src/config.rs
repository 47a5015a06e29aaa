//! Parameter resolution: flag, then config file, then default. Every resolved
//! value is recorded so the manifest can echo it and rebuild the command.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::CliError;

/// A value that can come from a flag or from a TOML config entry.
pub trait Param: Sized + Clone {
    fn from_toml(v: &toml::Value) -> Option<Self>;
    fn to_json(&self) -> Value;
    fn to_arg(&self) -> String;
}

impl Param for f64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
    fn to_arg(&self) -> String {
        format!("{self:?}")
    }
}

impl Param for usize {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| usize::try_from(i).ok())
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
    fn to_arg(&self) -> String {
        self.to_string()
    }
}

impl Param for u64 {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_integer().and_then(|i| u64::try_from(i).ok())
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
    fn to_arg(&self) -> String {
        self.to_string()
    }
}

impl Param for String {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(str::to_owned)
    }
    fn to_json(&self) -> Value {
        Value::from(self.as_str())
    }
    fn to_arg(&self) -> String {
        quote(self)
    }
}

impl Param for PathBuf {
    fn from_toml(v: &toml::Value) -> Option<Self> {
        v.as_str().map(PathBuf::from)
    }
    fn to_json(&self) -> Value {
        Value::from(self.display().to_string())
    }
    fn to_arg(&self) -> String {
        quote(&self.display().to_string())
    }
}

fn quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=:+".contains(c)) {
        s.to_owned()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

pub struct Resolver {
    file: toml::Table,
    used: BTreeSet<String>,
    record: Vec<(String, Value, String)>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self, CliError> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        Ok(Self { file, used: BTreeSet::new(), record: Vec::new() })
    }

    fn lookup<T: Param>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        self.used.insert(key.to_owned());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => T::from_toml(v)
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("config entry '{key}' has the wrong type"))),
        }
    }

    fn keep<T: Param>(&mut self, key: &str, v: &T) {
        self.record.push((key.to_owned(), v.to_json(), v.to_arg()));
    }

    /// Resolved value, if any source supplied one.
    pub fn optional<T: Param>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let v = self.lookup(key, flag)?;
        if let Some(v) = &v {
            self.keep(key, v);
        }
        Ok(v)
    }

    /// Like [`Resolver::optional`], falling back to `fallback` after the
    /// config file.
    pub fn optional_or<T: Param>(&mut self, key: &str, flag: Option<T>, fallback: Option<T>) -> Result<Option<T>, CliError> {
        let v = self.lookup(key, flag)?.or(fallback);
        if let Some(v) = &v {
            self.keep(key, v);
        }
        Ok(v)
    }

    pub fn or<T: Param>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.keep(key, &v);
        Ok(v)
    }

    /// Like [`Resolver::or`] with a fallback that is only known at run time.
    pub fn or_else<T: Param>(
        &mut self,
        key: &str,
        flag: Option<T>,
        fallback: impl FnOnce() -> Option<T>,
    ) -> Result<T, CliError> {
        match self.lookup(key, flag)?.or_else(fallback) {
            Some(v) => {
                self.keep(key, &v);
                Ok(v)
            }
            None => Err(CliError::Usage(format!("missing --{key}"))),
        }
    }

    pub fn required<T: Param>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.or_else(key, flag, || None)
    }

    /// Fails on config entries no parameter of the command asked for, so a
    /// misspelt key is not silently ignored.
    pub fn finish(&mut self) -> Result<Resolved, CliError> {
        let unused: Vec<&String> = self.file.keys().filter(|k| !self.used.contains(*k)).collect();
        if !unused.is_empty() {
            let names: Vec<&str> = unused.iter().map(|s| s.as_str()).collect();
            return Err(CliError::Usage(format!("unknown config entries: {}", names.join(", "))));
        }
        Ok(Resolved { entries: std::mem::take(&mut self.record) })
    }
}

/// Resolved parameters in resolution order.
#[derive(Debug, Clone, Default)]
pub struct Resolved {
    entries: Vec<(String, Value, String)>,
}

impl Resolved {
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (k, v, _) in &self.entries {
            map.insert(k.clone(), v.clone());
        }
        Value::Object(map)
    }

    /// Command line reproducing the run. `positional` goes right after the
    /// subcommand.
    pub fn command_line(&self, command: &str, positional: Option<&str>) -> String {
        let mut line = format!("rdens {command}");
        if let Some(p) = positional {
            line.push(' ');
            line.push_str(p);
        }
        for (k, _, arg) in &self.entries {
            line.push_str(&format!(" --{k} {arg}"));
        }
        line
    }
}
