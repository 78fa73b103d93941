//! `key = value` files for `sweep-cavity`.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};

pub const KEYS: [&str; 8] = [
    "finesse",
    "detuning_ratio",
    "photons",
    "optical_density",
    "atom_radius",
    "waist_ratio",
    "wavelength",
    "noise_constant",
];

/// Parses `key = v1, v2, ...` lines. `#` starts a comment.
pub fn parse(text: &str) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key = value", i + 1))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            bail!("line {}: unknown key {key:?} (known: {})", i + 1, KEYS.join(", "));
        }
        let values = parse_list(value).with_context(|| format!("line {}: bad value for {key}", i + 1))?;
        if out.insert(key.to_string(), values).is_some() {
            bail!("line {}: {key} given twice", i + 1);
        }
    }
    Ok(out)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("not a number: {:?}", v.trim())))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty list");
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_comments() {
        let cfg = parse("# sweep\nfinesse = 1e4, 1e5\n\nphotons=1 # one photon\n").unwrap();
        assert_eq!(cfg["finesse"], vec![1e4, 1e5]);
        assert_eq!(cfg["photons"], vec![1.0]);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(parse("finess = 1").is_err());
        assert!(parse("finesse = 1\nfinesse = 2").is_err());
        assert!(parse("finesse = abc").is_err());
        assert!(parse("finesse").is_err());
    }
}
