use std::path::Path;

use crate::error::{Error, Result};

use super::config::{parse_config, ScenarioConfig};

/// Built-in scenarios: name, one-line description and JSON source.
pub const LIBRARY: &[(&str, &str, &str)] = &[
    (
        "S1_positivity",
        "two-species competition with non-negative data stays non-negative",
        include_str!("../../scenarios/S1_positivity.json"),
    ),
    (
        "S2_maxbound",
        "2D competition run stays below the dissipativity bound",
        include_str!("../../scenarios/S2_maxbound.json"),
    ),
    (
        "S3_extinction",
        "integrable growth rate e^-t drives the species extinct",
        include_str!("../../scenarios/S3_extinction.json"),
    ),
    (
        "S4_asymptotics",
        "monotone coefficients give monotone convergence to a weak steady state",
        include_str!("../../scenarios/S4_asymptotics.json"),
    ),
    (
        "S5_cauchy_nested",
        "whole-line problem approximated on nested boxes",
        include_str!("../../scenarios/S5_cauchy_nested.json"),
    ),
    (
        "S6_oracle_crosscheck",
        "finite differences against the heat-kernel Picard iteration",
        include_str!("../../scenarios/S6_oracle_crosscheck.json"),
    ),
    (
        "S7_negative_source",
        "source with c^1 = -1 at u^1 = 0 fails the positivity hypothesis",
        include_str!("../../scenarios/S7_negative_source.json"),
    ),
];

pub fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    LIBRARY.iter().map(|(n, d, _)| (*n, *d)).collect()
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    let (_, _, text) = LIBRARY
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::config("/name", format!("no built-in scenario named {name}")))?;
    parse_config(text, Path::new(""))
}
