//! Flat `key = value` config files merged with command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mipt_core::store::parse_key_values;

use crate::UsageError;

/// Reads `path` (if given) and lets every `Some` flag override its key.
pub fn merge(path: Option<&Path>, flags: &[(&str, Option<String>)]) -> Result<BTreeMap<String, String>> {
    let mut map = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_key_values(&text).map_err(|e| UsageError(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in flags {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    Ok(map)
}

/// Comma-separated list of numbers, or `lo:hi:step` for a grid.
pub fn parse_values(key: &str, v: &str) -> Result<Vec<f64>> {
    let bad = || UsageError(format!("cannot parse {key} = {v:?}"));
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts.iter().map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        return mipt_core::sweep::grid(nums[0], nums[1], nums[2]).map_err(|e| UsageError(e.to_string()).into());
    }
    Ok(v.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?)
}

pub fn parse_sizes(key: &str, v: &str) -> Result<Vec<usize>> {
    let bad = || UsageError(format!("cannot parse {key} = {v:?}"));
    Ok(v.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?)
}

pub fn parse_range(key: &str, v: &str) -> Result<(f64, f64)> {
    let bad = || UsageError(format!("{key} expects lo:hi, got {v:?}"));
    let (a, b) = v.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if hi <= lo {
        return Err(bad().into());
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_lists() {
        assert_eq!(parse_values("p", "0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_values("p", "0.1:0.2:0.05").unwrap(), vec![0.1, 0.15, 0.2]);
        assert!(parse_values("p", "a,b").is_err());
        assert_eq!(parse_range("w", "0.1:0.3").unwrap(), (0.1, 0.3));
        assert!(parse_range("w", "0.3:0.1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("mipt-cli-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.cfg");
        fs::write(&path, "# comment\nmodel = B1\nL = 16\n").unwrap();
        let m = merge(Some(&path), &[("L", Some("32".into())), ("p", None)]).unwrap();
        assert_eq!(m["L"], "32");
        assert_eq!(m["model"], "B1");
        assert!(!m.contains_key("p"));
        fs::remove_dir_all(dir).unwrap();
    }
}
