//! The full invariant suite for one instance: structural checks plus the
//! sandwich assertions S1 to S6.

use crate::dynkin::{closed_loop, jj_decomposition, open_loop, saddle, DynkinSpec, Order, Tie};
use crate::error::{Error, Result};
use crate::oracle::{enumerate_stopping_times, enumerate_strategy_maps, sandwich_report, Caps, SandwichReport};
use crate::payoff::Payoff;
use crate::scalar::{max_of, min_of, Scalar};
use crate::space::FilteredSpace;
use crate::strategy::{
    best_response_to_map, build_rho_map, build_tau_map, check_nonanticipativity, fixed_point_check,
    NonAnticipativity, PayoffMatrix, StrategyMap,
};
use crate::values::ValueFamilies;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub id: &'static str,
    pub pass: bool,
    /// First failure, or a short summary on success.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verification<S> {
    pub checks: Vec<Check>,
    pub sandwich: SandwichReport<S>,
}

impl<S: Scalar> Verification<S> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(id: &'static str, outcome: std::result::Result<String, String>) -> Check {
    match outcome {
        Ok(detail) => Check { id, pass: true, detail },
        Err(detail) => Check { id, pass: false, detail },
    }
}

fn combos<S: Scalar>(fam: &ValueFamilies<S>) -> Vec<DynkinSpec<S>> {
    let mut out = Vec::new();
    for strict_lower in [false, true] {
        for strict_upper in [false, true] {
            for tie in [Tie::Low, Tie::High] {
                out.push(DynkinSpec::new(fam.lower(strict_lower), fam.upper(strict_upper), tie));
            }
        }
    }
    out
}

fn game_name<S: Scalar>(spec: &DynkinSpec<S>) -> String {
    format!("({}, {}, {:?})", spec.lower.label(), spec.upper.label(), spec.tie)
}

/// Mathematical failures become failed checks; data and capacity errors
/// abort the run.
fn soft(e: Error) -> Result<String> {
    if e.is_data() || e.is_capacity() {
        Err(e)
    } else {
        Ok(e.to_string())
    }
}

/// Run every check. Capacity errors from the enumerations are returned
/// as errors; everything else is reported as a pass or a fail.
pub fn verify<S: Scalar>(space: &FilteredSpace, u: &Payoff<S>, caps: Caps) -> Result<Verification<S>> {
    let set = enumerate_stopping_times(space, caps.stopping_times)?;
    let fam = ValueFamilies::compute(space, u);
    let mut checks = Vec::new();

    let diag = u.diagonal_nodes(space);
    checks.push(check(
        "diagonal",
        (0..space.len())
            .find_map(|n| {
                let (v1, v2, d) = (&fam.v1.values[n], &fam.v2.values[n], &diag[n]);
                if !v1.approx_le(d) || !d.approx_le(v2) {
                    Some(format!("node {n}: V1 {v1}, diag {d}, V2 {v2}"))
                } else if !v1.approx_eq(&min_of(d.clone(), fam.v1_strict.values[n].clone())) {
                    Some(format!("node {n}: V1 != min(diag, V1+)"))
                } else if !v2.approx_eq(&max_of(d.clone(), fam.v2_strict.values[n].clone())) {
                    Some(format!("node {n}: V2 != max(diag, V2+)"))
                } else {
                    None
                }
            })
            .map_or(Ok(format!("{} nodes", space.len())), Err),
    ));

    let (mut dynkin, mut saddles, mut jj) = (Ok(0), Ok(0), Ok(0));
    for spec in combos(&fam) {
        let name = game_name(&spec);
        let up = open_loop(space, &set, &spec, Order::InfSup).value;
        let down = open_loop(space, &set, &spec, Order::SupInf).value;
        if !down.approx_le(&up) {
            dynkin = dynkin.and(Err(format!("{name}: sup-inf {down} > inf-sup {up}")));
        }
        if !spec.is_ordered() {
            if closed_loop(space, &spec).is_ok() {
                dynkin = dynkin.and(Err(format!("{name}: closed loop accepted an unordered game")));
            }
            continue;
        }
        let closed = match closed_loop(space, &spec) {
            Ok(sol) => sol.root_value,
            Err(e) => {
                let msg = soft(e)?;
                dynkin = dynkin.and(Err(format!("{name}: {msg}")));
                continue;
            }
        };
        if closed.approx_eq(&up) && closed.approx_eq(&down) {
            dynkin = dynkin.map(|k| k + 1);
        } else {
            dynkin = dynkin.and(Err(format!("{name}: closed {closed}, inf-sup {up}, sup-inf {down}")));
        }
        match saddle(space, &set, &spec) {
            Ok(_) => saddles = saddles.map(|k| k + 1),
            Err(e) => saddles = saddles.and(Err(format!("{name}: {}", soft(e)?))),
        }
        match jj_decomposition(space, &spec, None) {
            Ok(d) if d.value.approx_eq(&closed) => jj = jj.map(|k| k + 1),
            Ok(d) => jj = jj.and(Err(format!("{name}: J - J' gives {}, closed loop {closed}", d.value))),
            Err(e) => jj = jj.and(Err(format!("{name}: {}", soft(e)?))),
        }
    }
    checks.push(check("dynkin", dynkin.map(|k| format!("{k} ordered games"))));
    checks.push(check("saddle", saddles.map(|k| format!("{k} saddle points"))));
    checks.push(check("jj", jj.map(|k| format!("{k} decompositions"))));

    let mut constructions = Ok(0);
    for anchor in set.iter() {
        for (strict, ty) in [(true, NonAnticipativity::TypeI), (false, NonAnticipativity::TypeII)] {
            for map in [build_rho_map(space, u, anchor, strict), build_tau_map(space, u, anchor, strict)] {
                let table = map.to_table(space, &set)?;
                match check_nonanticipativity(space, &set, &table, ty)? {
                    None => constructions = constructions.map(|k| k + 1),
                    Some(cx) => constructions = constructions.and(Err(cx.to_string())),
                }
            }
        }
    }
    checks.push(check("constructions", constructions.map(|k| format!("{k} constructed maps"))));

    let type_i = enumerate_strategy_maps(&set, NonAnticipativity::TypeI, caps.maps)?;
    let mut fixed = Ok(type_i.len());
    for m in &type_i {
        if let Some(v) = fixed_point_check(space, &set, m)? {
            fixed = Err(format!("map {m:?}: map(T) = {}, map(map(T)) = {}", v.first, v.second));
            break;
        }
    }
    checks.push(check("fixed_point", fixed.map(|k| format!("{k} Type I maps"))));

    let type_ii = enumerate_strategy_maps(&set, NonAnticipativity::TypeII, caps.maps)?;
    let spec = DynkinSpec::new(&fam.v1, &fam.v2_strict, Tie::Low);
    let anchor = set.get(open_loop(space, &set, &spec, Order::SupInf).optimizer).clone();
    let mut responses = Ok(type_ii.len());
    for m in &type_ii {
        if let Err(e) = best_response_to_map(space, &set, u, &StrategyMap::from_table(m.clone()), Some(&anchor)) {
            responses = Err(format!("map {m:?}: {}", soft(e)?));
            break;
        }
    }
    checks.push(check("best_response", responses.map(|k| format!("{k} Type II maps"))));

    let sandwich = sandwich_report(space, u, caps)?;
    let matrix = PayoffMatrix::new(space, &set, u);
    checks.push(check(
        "witnesses",
        if sandwich.game.witnesses_hold(&matrix) {
            Ok("4 witnesses".into())
        } else {
            Err("a witness map does not reach its value".into())
        },
    ));
    for (id, pass) in sandwich.statuses() {
        let detail: Vec<String> = sandwich
            .assertion(id)
            .map(|a| format!("{}: {} vs {}", a.statement(), a.lhs, a.rhs))
            .collect();
        checks.push(Check {
            id,
            pass,
            detail: detail.join("; "),
        });
    }
    Ok(Verification { checks, sandwich })
}
