use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::error::CliError;

/// Parsed `key = value` file with `[section]` headers. Relative paths in
/// values resolve against the file's directory.
pub struct Config {
    ini: Ini,
    base: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let ini = Ini::load_from_str_noescape(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { ini, base })
    }

    #[cfg(test)]
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { ini, base: PathBuf::new() })
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.ini.section(Some(section)).is_some()
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    pub fn string(&self, section: &str, key: &str) -> Result<String, CliError> {
        self.raw(section, key)
            .map(str::to_string)
            .ok_or_else(|| CliError::Config(format!("missing [{section}] {key}")))
    }

    pub fn string_or(&self, section: &str, key: &str, default: &str) -> String {
        self.raw(section, key).unwrap_or(default).to_string()
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<T, CliError> {
        let raw = self.string(section, key)?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("[{section}] {key}: cannot parse {raw:?}")))
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(_) => self.get(section, key),
        }
    }

    pub fn get_opt<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(_) => self.get(section, key).map(Some),
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Vec<T>, CliError> {
        let raw = self.string(section, key)?;
        parse_list(&raw).map_err(|bad| CliError::Config(format!("[{section}] {key}: cannot parse {bad:?}")))
    }

    pub fn path(&self, section: &str, key: &str) -> Result<PathBuf, CliError> {
        Ok(self.base.join(self.string(section, key)?))
    }

    pub fn read_file(&self, section: &str, key: &str) -> Result<String, CliError> {
        let path = self.path(section, key)?;
        std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
    }
}

pub fn parse_list<T: FromStr>(raw: &str) -> Result<Vec<T>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| s.to_string()))
        .collect()
}
