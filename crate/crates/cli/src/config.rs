//! Run configuration: flags override a `key=value` file, which overrides the
//! defaults. The resolved values are hashed into every output header.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use conewave::error::{Error, Result};
use sha2::{Digest, Sha256};

/// Resolved settings, in key order.
#[derive(Clone, Debug, Default)]
pub struct Resolved {
    file: BTreeMap<String, String>,
    pub values: BTreeMap<String, String>,
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_file(&text)
}

/// Lines `key = value`; `#` starts a comment; keys may use `-` or `_`.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", no + 1)))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

impl Resolved {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self { file, values: BTreeMap::new() }
    }

    /// Flag, then file, then default; records the chosen value.
    pub fn get<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = self.get_opt(key, flag)?.unwrap_or(default);
        self.values.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn get_opt<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse::<T>().map_err(|_| Error::Config(format!("config key {key}: cannot parse {s:?}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.values.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    /// Seed of a randomized run; missing seeds are a configuration error.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        self.get_opt("seed", flag)?
            .ok_or_else(|| Error::Config("this subcommand is randomized and needs --seed".into()))
    }

    /// First 16 hex digits of SHA-256 over `key=value` lines.
    pub fn hash(&self, subcommand: &str) -> String {
        let mut h = Sha256::new();
        h.update(format!("subcommand={subcommand}\n"));
        for (k, v) in &self.values {
            if k == "output" || k == "threads" {
                continue;
            }
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// `lo:hi` doubling from `lo`, or a comma list.
pub fn parse_dyadic(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse R grid {s:?}; use lo:hi or a comma list"));
    if let Some((a, b)) = s.split_once(':') {
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && hi / lo <= 2f64.powi(40)) {
            return Err(bad());
        }
        let mut v = Vec::new();
        let mut r = lo;
        while r <= hi * (1.0 + 1e-12) {
            v.push(r);
            r *= 2.0;
        }
        Ok(v)
    } else {
        parse_list(s)
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("cannot parse number {t:?}"))))
        .collect()
}

/// `a:b:step`, inclusive of `b` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("cannot parse grid {s:?}; use start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (a, b, h) = (nums[0], nums[1], nums[2]);
    if !(h > 0.0 && b >= a) || (b - a) / h > 1e7 {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_file_default() {
        let file = parse_file("d = 4\nR=8 # comment\n").unwrap();
        let mut r = Resolved::new(file);
        assert_eq!(r.get("d", Some(3usize), 2).unwrap(), 3);
        let mut r2 = Resolved::new(parse_file("d=4").unwrap());
        assert_eq!(r2.get("d", None, 2usize).unwrap(), 4);
        assert_eq!(r2.get("q", None, 2.0f64).unwrap(), 2.0);
    }

    #[test]
    fn hash_ignores_output_and_threads() {
        let mut a = Resolved::default();
        a.get("d", Some(3usize), 2).unwrap();
        a.get("output", Some("x.csv".to_string()), String::new()).unwrap();
        let mut b = Resolved::default();
        b.get("d", Some(3usize), 2).unwrap();
        b.get("threads", Some(4usize), 1).unwrap();
        assert_eq!(a.hash("bounds"), b.hash("bounds"));
        assert_ne!(a.hash("bounds"), a.hash("sharpness"));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_dyadic("4:64").unwrap(), vec![4.0, 8.0, 16.0, 32.0, 64.0]);
        assert_eq!(parse_range("0.1:0.3:0.1").unwrap().len(), 3);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_file("novalue").is_err());
    }
}
