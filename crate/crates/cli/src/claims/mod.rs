//! One runnable experiment per registered claim.

mod attain;
mod constructions;
mod infinite;
mod optimal;
mod prop_suites;
mod values;

use crate::config::{apply_overrides, defaults_for, Params};
use crate::report::{ClaimOutcome, ResultRow};
use crate::HarnessError;
use countable_games::catalog::claims::claim_registry;
use std::time::Instant;

type Runner = fn(&Params) -> Result<Vec<ResultRow>, HarnessError>;

fn runner_for(id: &str) -> Option<Runner> {
    Some(match id {
        "BMN-VAL" => values::bmn_val,
        "BMZ-VAL" => values::bmz_val,
        "BMN-ATTAIN" => attain::bmn_attain,
        "TB-ATTAIN" => attain::tb_attain,
        "BMN-MR-DECAY" => attain::bmn_mr_decay,
        "NOMR-AS" => infinite::nomr_as,
        "NOMR-DECAY" => infinite::nomr_decay,
        "NOMARKOV" => infinite::nomarkov,
        "NESTED-AS" => infinite::nested_as,
        "OPTMAX-23" => optimal::optmax,
        "OPTMIN-12" => optimal::optmin,
        "ACYCLIC-MIN" => constructions::acyclic_min,
        "PLASTER-1BIT" => constructions::plaster_one_bit,
        "WSTRASS" => prop_suites::wstrass,
        "PRODSUM" => prop_suites::prodsum,
        "TAILPROD" => prop_suites::tailprod,
        "ORACLES" => prop_suites::oracles,
        _ => return None,
    })
}

/// Checks at startup that every registry entry has an experiment.
pub fn verify_registry() -> Result<(), HarnessError> {
    for info in claim_registry() {
        if runner_for(info.id).is_none() {
            return Err(HarnessError::Run(format!(
                "registry entry {} has no experiment",
                info.id
            )));
        }
    }
    Ok(())
}

/// Runs one claim with defaults plus overrides.
pub fn reproduce(id: &str, overrides: &[(String, String)]) -> Result<ClaimOutcome, HarnessError> {
    let runner = runner_for(id).ok_or_else(|| HarnessError::UnknownClaim(id.to_string()))?;
    let mut params = defaults_for(id)?;
    apply_overrides(id, &mut params, overrides)?;
    let start = Instant::now();
    let result = runner(&params);
    let runtime_ms = start.elapsed().as_millis();
    Ok(match result {
        Ok(mut rows) => {
            for r in &mut rows {
                r.runtime_ms = runtime_ms;
            }
            ClaimOutcome {
                id: id.to_string(),
                params,
                rows,
                runtime_ms,
                error: None,
            }
        }
        Err(e) => ClaimOutcome {
            id: id.to_string(),
            params,
            rows: vec![],
            runtime_ms,
            error: Some(e.to_string()),
        },
    })
}

/// Runs every registered claim (in registry order) with per-claim overrides;
/// failures are collected, not fatal.
pub fn run_all(
    overrides: &std::collections::BTreeMap<String, Vec<(String, String)>>,
) -> Result<Vec<ClaimOutcome>, HarnessError> {
    verify_registry()?;
    let ids: Vec<&'static str> = claim_registry().into_iter().map(|c| c.id).collect();
    use rayon::prelude::*;
    let outcomes: Vec<ClaimOutcome> = ids
        .par_iter()
        .map(|id| {
            let ov = overrides.get(*id).cloned().unwrap_or_default();
            reproduce(id, &ov).unwrap_or_else(|e| ClaimOutcome {
                id: id.to_string(),
                params: Params::new(),
                rows: vec![],
                runtime_ms: 0,
                error: Some(e.to_string()),
            })
        })
        .collect();
    Ok(outcomes)
}
