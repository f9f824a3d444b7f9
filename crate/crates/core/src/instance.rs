//! Instance documents: a space plus a payoff, from JSON or by fixture name.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::payoff::{build_payoff, Payoff};
use crate::scalar::Rational;
use crate::space::{FilteredSpace, SpaceSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub space: FilteredSpace,
    pub payoff: Payoff<Rational>,
}

/// Parse `{"grid": [...], "nodes": [...], "payoff": {...}}`.
pub fn from_json(name: &str, doc: &Value) -> Result<Instance> {
    let space = FilteredSpace::build(&SpaceSpec::from_json(doc)?)?;
    let payoff = build_payoff(
        &space,
        doc.get("payoff")
            .ok_or_else(|| Error::Parse("instance needs a \"payoff\" object".into()))?,
    )?;
    Ok(Instance {
        name: name.to_string(),
        space,
        payoff,
    })
}

pub fn from_str(name: &str, text: &str) -> Result<Instance> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    from_json(name, &doc)
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "cex",
    "single",
    "grid2",
    "grid4",
    "grid8",
    "b1-table",
    "b2-table",
    "b2asym-table",
    "b3-table",
    "b2-w",
];

/// A built-in instance. Random tables use `seed`.
pub fn builtin(name: &str, seed: u64) -> Result<Instance> {
    let (space, payoff) = match name {
        "cex" => (fixtures::cex(), fixtures::cex_payoff()),
        "single" => {
            let s = fixtures::single_node();
            let u = Payoff::constant(&s, crate::scalar::rat(1, 1));
            (s, u)
        }
        "grid2" | "grid4" | "grid8" => {
            let steps = name[4..].parse().unwrap();
            let s = fixtures::uniform_chain(steps);
            let u = Payoff::abs_time_diff(&s);
            (s, u)
        }
        "b1-table" | "b2-table" | "b3-table" => {
            let depth = name[1..2].parse().unwrap();
            fixtures::seeded_instance(depth, seed)
        }
        "b2asym-table" => {
            let s = fixtures::binary_asym(2);
            let u = fixtures::random_table(&s, seed);
            (s, u)
        }
        "b2-w" => {
            let s = fixtures::binary(2);
            let u = fixtures::catalog()
                .into_iter()
                .find(|(n, _, _)| n == "b2/w_process")
                .map(|(_, _, u)| u)
                .expect("catalog has b2/w_process");
            (s, u)
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown fixture {other:?}; known: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(Instance {
        name: name.to_string(),
        space,
        payoff,
    })
}
