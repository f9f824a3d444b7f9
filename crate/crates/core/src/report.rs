//! Deterministic JSON and CSV renderings of results.
//!
//! Scalars are written as strings (`a/b` for rationals) so that reports are
//! exact and byte-for-byte reproducible.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dynkin::{closed_loop, jj_decomposition, DynkinSolution, DynkinSpec, Order, Tie};
use crate::oracle::{all_dvalues, count_stopping_times, enumerate_stopping_times, Caps, DValue, GameValues, SandwichReport, Witness};
use crate::payoff::Payoff;
use crate::refine::RefineRow;
use crate::scalar::Scalar;
use crate::space::FilteredSpace;
use crate::stopping::StoppingTime;
use crate::values::{NodeValueFamily, ValueFamilies};
use crate::verify::Verification;

pub fn scalar<S: Scalar>(x: &S) -> Value {
    Value::String(x.to_string())
}

pub fn scalars<S: Scalar>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(scalar).collect())
}

/// `"S"`/`"C"` per node.
pub fn labels(t: &StoppingTime) -> Value {
    Value::Array(
        t.stop_flags()
            .iter()
            .map(|&s| Value::String(if s { "S" } else { "C" }.into()))
            .collect(),
    )
}

pub fn families<S: Scalar>(fam: &ValueFamilies<S>) -> Value {
    let mut m = Map::new();
    for f in [&fam.v1, &fam.v1_strict, &fam.v2, &fam.v2_strict] {
        m.insert(f.label().into(), scalars(&f.values));
    }
    Value::Object(m)
}

pub fn solution<S: Scalar>(sol: &DynkinSolution<S>) -> Value {
    json!({
        "root_value": scalar(&sol.root_value),
        "values": scalars(&sol.values),
        "stop_regions": sol.regions,
        "tau_star": labels(&sol.tau_star),
        "rho_star": labels(&sol.rho_star),
    })
}

fn tie_name(t: Tie) -> &'static str {
    match t {
        Tie::Low => "low",
        Tie::High => "high",
    }
}

fn order_name(o: Order) -> &'static str {
    match o {
        Order::InfSup => "inf_sup",
        Order::SupInf => "sup_inf",
    }
}

fn dvalue_json<S: Scalar>(d: &DValue<S>) -> Value {
    json!({
        "name": d.name(),
        "lower": d.lower,
        "upper": d.upper,
        "tie": tie_name(d.tie),
        "order": order_name(d.order),
        "value": scalar(&d.value),
        "optimizer": d.optimizer,
    })
}

/// Families, closed-loop solutions and J/J' values for every ordered
/// combination, and all open-loop values when the stopping times can be
/// enumerated within `caps`.
pub fn solve<S: Scalar>(space: &FilteredSpace, u: &Payoff<S>, caps: Caps) -> Value {
    let fam = ValueFamilies::compute(space, u);
    let count = count_stopping_times(space);
    let mut games = Vec::new();
    let pairs: [(&NodeValueFamily<S>, &NodeValueFamily<S>); 4] = [
        (&fam.v1, &fam.v2),
        (&fam.v1, &fam.v2_strict),
        (&fam.v1_strict, &fam.v2),
        (&fam.v1_strict, &fam.v2_strict),
    ];
    for (lower, upper) in pairs {
        for tie in [Tie::Low, Tie::High] {
            let spec = DynkinSpec::new(lower, upper, tie);
            let mut entry = json!({
                "lower": lower.label(),
                "upper": upper.label(),
                "tie": tie_name(tie),
                "ordered": spec.is_ordered(),
            });
            match closed_loop(space, &spec) {
                Ok(sol) => {
                    entry["closed_loop"] = solution(&sol);
                    entry["jj"] = match jj_decomposition(space, &spec, None) {
                        Ok(jj) => json!({"value": scalar(&jj.value), "iterations": jj.iterations}),
                        Err(e) => json!({"error": e.to_string()}),
                    };
                }
                Err(e) => entry["closed_loop"] = json!({"error": e.to_string()}),
            }
            games.push(entry);
        }
    }
    let open_loop = match enumerate_stopping_times(space, caps.stopping_times) {
        Ok(set) => Value::Array(all_dvalues(space, &set, &fam).iter().map(dvalue_json).collect()),
        Err(e) => json!({"error": e.to_string()}),
    };
    json!({
        "mode": S::mode_name(),
        "nodes": space.len(),
        "leaves": space.leaf_count(),
        "stopping_times": count,
        "payoff": {
            "kind": u.kind().name(),
            "bound": scalar(u.bound()),
            "lipschitz": u.lipschitz().map(scalar),
        },
        "diagonal": scalars(&u.diagonal_nodes(space)),
        "families": families(&fam),
        "dynkin": games,
        "open_loop": open_loop,
    })
}

fn witness_json(w: &Witness) -> Value {
    json!({"map": w.map, "response": w.response})
}

pub fn game_values<S: Scalar>(g: &GameValues<S>) -> Value {
    json!({
        "A_upper": scalar(&g.a_upper),
        "A_lower": scalar(&g.a_lower),
        "B_upper": scalar(&g.b_upper),
        "B_lower": scalar(&g.b_lower),
        "witnesses": {
            "A_upper": witness_json(&g.a_upper_witness),
            "A_lower": witness_json(&g.a_lower_witness),
            "B_upper": witness_json(&g.b_upper_witness),
            "B_lower": witness_json(&g.b_lower_witness),
        },
        "maps": {"type_i": g.type_i_maps, "type_ii": g.type_ii_maps},
    })
}

pub fn sandwich<S: Scalar>(r: &SandwichReport<S>) -> Value {
    let assertions: Vec<Value> = r
        .assertions
        .iter()
        .map(|a| {
            json!({
                "id": a.id,
                "statement": a.statement(),
                "lhs": scalar(&a.lhs),
                "rhs": scalar(&a.rhs),
                "pass": a.pass,
                "binds": a.binds,
            })
        })
        .collect();
    let mut statuses = Map::new();
    for (id, pass) in r.statuses() {
        statuses.insert(id.into(), Value::String(if pass { "PASS" } else { "FAIL" }.into()));
    }
    json!({
        "mode": S::mode_name(),
        "stopping_times": r.stopping_times,
        "families": families(&r.families),
        "game_values": game_values(&r.game),
        "dvalues": r.dvalues.iter().map(dvalue_json).collect::<Vec<_>>(),
        "diagonal_max": scalar(&r.diagonal_max),
        "assertions": assertions,
        "statuses": statuses,
        "all_pass": r.all_pass(),
    })
}

pub fn verification<S: Scalar>(v: &Verification<S>) -> Value {
    json!({
        "checks": v.checks.iter().map(|c| json!({
            "id": c.id,
            "status": if c.pass { "PASS" } else { "FAIL" },
            "detail": c.detail,
        })).collect::<Vec<_>>(),
        "all_pass": v.all_pass(),
        "sandwich": sandwich(&v.sandwich),
    })
}

pub fn refine_rows<S: Scalar>(rows: &[RefineRow<S>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "level": r.level,
                    "steps": r.steps,
                    "delta": scalar(&r.delta),
                    "exhaustive": r.exhaustive(),
                    "game_values": r.game.as_ref().map(|g| json!({
                        "A_upper": scalar(&g[0]),
                        "A_lower": scalar(&g[1]),
                        "B_upper": scalar(&g[2]),
                        "B_lower": scalar(&g[3]),
                    })),
                    "dvalues": r.dvalues.iter().map(|(n, v)| json!({"name": n, "value": scalar(v)})).collect::<Vec<_>>(),
                    "dvalue_spread": scalar(&r.dvalue_spread),
                    "spread": scalar(&r.spread),
                    "spread_kind": if r.exhaustive() { "exact" } else { "dvalue_bound" },
                })
            })
            .collect(),
    )
}

/// One CSV line: a named quantity of one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsvRow {
    pub instance: String,
    pub quantity: String,
    pub value_num: String,
    pub value_den: String,
    pub mode: &'static str,
    pub witness_id: String,
}

impl CsvRow {
    pub fn new<S: Scalar>(instance: &str, quantity: impl Into<String>, value: &S, witness_id: impl Into<String>) -> Self {
        let (value_num, value_den) = value.parts();
        CsvRow {
            instance: instance.into(),
            quantity: quantity.into(),
            value_num,
            value_den,
            mode: S::mode_name(),
            witness_id: witness_id.into(),
        }
    }
}

fn map_id(w: &Witness) -> String {
    let parts: Vec<String> = w.map.iter().map(usize::to_string).collect();
    format!("map:{}", parts.join("."))
}

pub fn game_value_rows<S: Scalar>(instance: &str, g: &GameValues<S>) -> Vec<CsvRow> {
    vec![
        CsvRow::new(instance, "A_upper", &g.a_upper, map_id(&g.a_upper_witness)),
        CsvRow::new(instance, "A_lower", &g.a_lower, map_id(&g.a_lower_witness)),
        CsvRow::new(instance, "B_upper", &g.b_upper, map_id(&g.b_upper_witness)),
        CsvRow::new(instance, "B_lower", &g.b_lower, map_id(&g.b_lower_witness)),
    ]
}

pub fn sandwich_rows<S: Scalar>(instance: &str, r: &SandwichReport<S>) -> Vec<CsvRow> {
    let mut rows = game_value_rows(instance, &r.game);
    for d in &r.dvalues {
        rows.push(CsvRow::new(instance, d.name(), &d.value, format!("st:{}", d.optimizer)));
    }
    rows.push(CsvRow::new(instance, "max_diag", &r.diagonal_max, ""));
    rows
}

pub fn refine_csv_rows<S: Scalar>(instance: &str, rows: &[RefineRow<S>]) -> Vec<CsvRow> {
    let mut out = Vec::new();
    for r in rows {
        let tag = format!("N={}", r.steps);
        out.push(CsvRow::new(instance, format!("{tag}:delta"), &r.delta, ""));
        if let Some(g) = &r.game {
            for (name, v) in ["A_upper", "A_lower", "B_upper", "B_lower"].iter().zip(g) {
                out.push(CsvRow::new(instance, format!("{tag}:{name}"), v, ""));
            }
        }
        out.push(CsvRow::new(instance, format!("{tag}:dvalue_spread"), &r.dvalue_spread, ""));
        let kind = if r.exhaustive() { "spread" } else { "spread_bound" };
        out.push(CsvRow::new(instance, format!("{tag}:{kind}"), &r.spread, ""));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::sandwich_report;

    #[test]
    fn reports_are_reproducible() {
        let space = fixtures::cex();
        let u = fixtures::cex_payoff();
        let a = serde_json::to_string(&solve(&space, &u, Caps::default())).unwrap();
        let b = serde_json::to_string(&solve(&space, &u, Caps::default())).unwrap();
        assert_eq!(a, b);
        let r = sandwich_report(&space, &u, Caps::default()).unwrap();
        let v = sandwich(&r);
        assert_eq!(v["game_values"]["A_upper"], "1");
        assert_eq!(v["statuses"]["S1"], "PASS");
        assert_eq!(v["families"]["V1+"], json!(["0", "1", "0"]));
    }

    #[test]
    fn csv_rows_split_rationals() {
        let space = fixtures::uniform_chain(2);
        let u = Payoff::<crate::scalar::Rational>::abs_time_diff(&space);
        let r = sandwich_report(&space, &u, Caps::default()).unwrap();
        let rows = sandwich_rows("grid2", &r);
        let a = rows.iter().find(|r| r.quantity == "A_upper").unwrap();
        assert_eq!((a.value_num.as_str(), a.value_den.as_str(), a.mode), ("1", "2", "rational"));
    }
}
