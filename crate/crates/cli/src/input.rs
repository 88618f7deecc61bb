use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use linrl_core::cnf::parse_dimacs;
use linrl_core::{frac, Action, Formula, PolicyParams, Rational64, State};

/// Reads a DIMACS file, or standard input for `-`.
pub fn read_formula(path: &str) -> Result<Formula> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))?
    };
    parse_dimacs(&text).with_context(|| format!("parsing {path}"))
}

/// `θ'` as a JSON file (`{"theta_prime": [...]}` or a bare array), a sign
/// pattern such as `+-+`, or a comma-separated list of numbers.
pub fn parse_theta(arg: &str) -> Result<PolicyParams> {
    let arg = arg.trim();
    if Path::new(arg).is_file() {
        let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
        let entries = value.get("theta_prime").unwrap_or(&value).clone();
        let theta: Vec<f64> = serde_json::from_value(entries)
            .with_context(|| format!("{arg}: expected an array of numbers"))?;
        return Ok(PolicyParams::new(theta)?);
    }
    if !arg.is_empty() && arg.chars().all(|c| c == '+' || c == '-') {
        return Ok(PolicyParams::from_sign_string(arg)?);
    }
    let theta = arg
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad θ' entry {t:?}: {e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolicyParams::new(theta)?)
}

/// A comma-separated state over `{-1, 0, 1}`, or `initial`.
pub fn parse_state(arg: &str, n: usize) -> Result<State> {
    let arg = arg.trim();
    if arg == "initial" || arg.is_empty() {
        return Ok(State::initial(n));
    }
    let values = arg
        .trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i8>()
                .map_err(|e| anyhow!("bad state entry {t:?}: {e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        bail!(
            "state has {} entries, the formula has {n} variables",
            values.len()
        );
    }
    Ok(State::new(values)?)
}

pub fn parse_action(s: &str) -> Result<Action, String> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" => Ok(Action::True),
        "0" | "false" | "f" => Ok(Action::False),
        _ => Err(format!("expected true/false or 1/0, got {s:?}")),
    }
}

pub fn parse_fraction(s: &str) -> Result<Rational64, String> {
    frac::parse(s).ok_or_else(|| format!("expected a fraction such as 1/10 or 0.1, got {s:?}"))
}
