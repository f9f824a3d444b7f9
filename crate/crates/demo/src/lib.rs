//! Browser front end: three JSON-in, JSON-out operations over the core
//! solvers. The `*_json` functions are plain Rust so they can be tested
//! natively; the exported wrappers only translate errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use stopgame_core::instance::{self, Instance, BUILTIN_NAMES};
use stopgame_core::oracle::Caps;
use stopgame_core::refine::{abs_time_diff_study, DEFAULT_EXHAUSTIVE_LIMIT};
use stopgame_core::report;
use stopgame_core::verify;

/// Smaller than the batch defaults so the page stays responsive.
pub const DEMO_CAPS: Caps = Caps {
    stopping_times: 200,
    maps: 200_000,
};

/// A built-in fixture name, or an instance document.
fn load(source: &str, seed: u64) -> Result<Instance, String> {
    let source = source.trim();
    if source.starts_with('{') {
        instance::from_str("input", source).map_err(|e| e.to_string())
    } else {
        instance::builtin(source, seed).map_err(|e| e.to_string())
    }
}

fn float_mode(mode: &str) -> Result<bool, String> {
    match mode {
        "rational" => Ok(false),
        "float" => Ok(true),
        other => Err(format!("unknown mode {other:?}; use rational or float")),
    }
}

pub fn fixtures_json() -> String {
    Value::from(BUILTIN_NAMES.to_vec()).to_string()
}

/// Value families and every Dynkin value.
pub fn solve_json(source: &str, mode: &str, seed: u64) -> Result<String, String> {
    let inst = load(source, seed)?;
    let v = if float_mode(mode)? {
        report::solve(&inst.space, &inst.payoff.to_float(), DEMO_CAPS)
    } else {
        report::solve(&inst.space, &inst.payoff, DEMO_CAPS)
    };
    Ok(v.to_string())
}

/// Exhaustive game values and the full check suite.
pub fn verify_json(source: &str, mode: &str, seed: u64) -> Result<String, String> {
    let inst = load(source, seed)?;
    let v = if float_mode(mode)? {
        verify(&inst.space, &inst.payoff.to_float(), DEMO_CAPS).map(|v| report::verification(&v))
    } else {
        verify(&inst.space, &inst.payoff, DEMO_CAPS).map(|v| report::verification(&v))
    };
    v.map(|v| v.to_string()).map_err(|e| e.to_string())
}

/// Spread of all values against the step size for `|s - t|`.
pub fn refine_json(levels: usize) -> Result<String, String> {
    if !(1..=4).contains(&levels) {
        return Err("levels must be between 1 and 4".into());
    }
    let rows = abs_time_diff_study(levels, DEMO_CAPS, DEFAULT_EXHAUSTIVE_LIMIT).map_err(|e| e.to_string())?;
    Ok(json!({"payoff": "abs_time_diff", "rows": report::refine_rows(&rows)}).to_string())
}

#[wasm_bindgen]
pub fn fixtures() -> String {
    fixtures_json()
}

#[wasm_bindgen]
pub fn solve(source: &str, mode: &str, seed: u32) -> Result<String, JsError> {
    solve_json(source, mode, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn check(source: &str, mode: &str, seed: u32) -> Result<String, JsError> {
    verify_json(source, mode, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn refine(levels: u32) -> Result<String, JsError> {
    refine_json(levels as usize).map_err(|e| JsError::new(&e))
}
