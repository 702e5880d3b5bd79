//! Line-oriented configuration: `[claim:ID]` section headers with
//! `key = value` entries, plus `--set key=value` overrides.

use crate::HarnessError;
use countable_games::catalog::claims::claim_registry;
use std::collections::BTreeMap;
use std::path::Path;

/// Parameters for one claim (string-typed; experiments parse on use).
pub type Params = BTreeMap<String, String>;

/// Default parameters of a claim from the registry.
pub fn defaults_for(id: &str) -> Result<Params, HarnessError> {
    let info = claim_registry()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| HarnessError::UnknownClaim(id.into()))?;
    Ok(info
        .defaults
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

/// Applies `key=value` overrides, rejecting keys the claim does not declare.
pub fn apply_overrides(
    id: &str,
    params: &mut Params,
    overrides: &[(String, String)],
) -> Result<(), HarnessError> {
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(HarnessError::UnknownParameter {
                claim: id.into(),
                key: k.clone(),
            });
        }
        params.insert(k.clone(), v.clone());
    }
    Ok(())
}

/// Parses a config file: sections select claims, entries override defaults.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, Vec<(String, String)>>, HarnessError> {
    let mut out: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("[claim:") {
            let id = rest
                .strip_suffix(']')
                .ok_or_else(|| HarnessError::Config(format!("line {}: bad section", lineno + 1)))?;
            current = Some(id.to_string());
            out.entry(id.to_string()).or_default();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::Config(format!(
                "line {}: expected key = value",
                lineno + 1
            )));
        };
        let section = current
            .clone()
            .ok_or_else(|| HarnessError::Config(format!("line {}: entry before any section", lineno + 1)))?;
        out.entry(section)
            .or_default()
            .push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Reads every `*.cfg` file in a directory (sorted), merging sections.
pub fn load_config_dir(dir: &Path) -> Result<BTreeMap<String, Vec<(String, String)>>, HarnessError> {
    let mut merged: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    if !dir.exists() {
        return Ok(merged);
    }
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    files.sort();
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        for (id, entries) in parse_config(&text)? {
            merged.entry(id).or_default().extend(entries);
        }
    }
    Ok(merged)
}

/// Typed accessors.
pub fn get_u64(p: &Params, claim: &str, key: &str) -> Result<u64, HarnessError> {
    p[key].parse().map_err(|_| HarnessError::BadParameter {
        claim: claim.into(),
        key: key.into(),
        value: p[key].clone(),
    })
}

pub fn get_f64(p: &Params, claim: &str, key: &str) -> Result<f64, HarnessError> {
    p[key].parse().map_err(|_| HarnessError::BadParameter {
        claim: claim.into(),
        key: key.into(),
        value: p[key].clone(),
    })
}

pub fn get_list_u64(p: &Params, claim: &str, key: &str) -> Result<Vec<u64>, HarnessError> {
    p[key]
        .split(',')
        .map(|x| {
            x.trim().parse().map_err(|_| HarnessError::BadParameter {
                claim: claim.into(),
                key: key.into(),
                value: p[key].clone(),
            })
        })
        .collect()
}

pub fn get_list_f64(p: &Params, claim: &str, key: &str) -> Result<Vec<f64>, HarnessError> {
    p[key]
        .split(',')
        .map(|x| {
            x.trim().parse().map_err(|_| HarnessError::BadParameter {
                claim: claim.into(),
                key: key.into(),
                value: p[key].clone(),
            })
        })
        .collect()
}
