use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Environment variable holding the default worker count.
pub const JOBS_ENV: &str = "CIRCLELAB_JOBS";

/// Worker count from [`JOBS_ENV`], else the available parallelism.
pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Data(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Data(format!("config line {}: empty key", i + 1)));
        }
        out.insert(k.replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let c = parse_config("# sweep\nt_min = 1000\n\npoints=10 # trailing\n").unwrap();
        assert_eq!(c["t-min"], "1000");
        assert_eq!(c["points"], "10");
        assert!(parse_config("oops").is_err());
        assert!(parse_config("=3").is_err());
    }
}
