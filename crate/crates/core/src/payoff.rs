//! Biadmissible payoff families `U(rho, tau)`.
//!
//! A payoff is tabulated once over its whole finite domain: for every node
//! `n` at depth `d` and every index pair `(s, t)` with `max(s, t) = d`.
//! Measurability with respect to the information at `s ∨ t` and consistency
//! on `{rho1 = rho2} ∩ {tau1 = tau2}` then hold by construction.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{max_of, rational_from_json, Rational, Scalar};
use crate::space::{AdaptedProcess, FilteredSpace, NodeId, RandomVariable};
use crate::stopping::StoppingTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PayoffKind {
    Table,
    WProcess,
    AbsDiffF,
    AbsTimeDiff,
    UtilitySpread,
}

impl PayoffKind {
    pub fn name(self) -> &'static str {
        match self {
            PayoffKind::Table => "table",
            PayoffKind::WProcess => "w_process",
            PayoffKind::AbsDiffF => "abs_diff_f",
            PayoffKind::AbsTimeDiff => "abs_time_diff",
            PayoffKind::UtilitySpread => "utility_spread",
        }
    }
}

/// Arguments `(s, t, f_s, g_t)` fed to `W` for one table slot.
#[derive(Clone, Debug, PartialEq)]
struct WArgs<S> {
    s: S,
    t: S,
    x: S,
    y: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Payoff<S> {
    kind: PayoffKind,
    table: Vec<Vec<S>>,
    bound: S,
    lipschitz: Option<S>,
    w_args: Option<Vec<Vec<WArgs<S>>>>,
}

/// Position of `(s, t)` inside the row of a node at depth `d = max(s, t)`.
fn slot(s: usize, t: usize, d: usize) -> usize {
    debug_assert_eq!(s.max(t), d);
    if s == d {
        t
    } else {
        d + 1 + s
    }
}

/// All `(s, t)` with `max(s, t) = d`, in slot order.
fn slot_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=d).map(move |t| (d, t)).chain((0..d).map(move |s| (s, d)))
}

impl<S: Scalar> Payoff<S> {
    /// Tabulate `value(s, t, node)` over the full domain.
    pub fn from_fn(
        space: &FilteredSpace,
        kind: PayoffKind,
        mut value: impl FnMut(usize, usize, NodeId) -> S,
    ) -> Self {
        let table: Vec<Vec<S>> = space
            .nodes()
            .iter()
            .map(|n| slot_pairs(n.depth).map(|(s, t)| value(s, t, n.id)).collect())
            .collect();
        let bound = table
            .iter()
            .flatten()
            .fold(S::zero(), |b, v| max_of(b, v.abs()));
        Payoff {
            kind,
            table,
            bound,
            lipschitz: None,
            w_args: None,
        }
    }

    pub fn constant(space: &FilteredSpace, c: S) -> Self {
        Self::from_fn(space, PayoffKind::Table, |_, _, _| c.clone())
    }

    /// Explicit table keyed `(s, t, node)`; every slot must be present.
    pub fn table(space: &FilteredSpace, entries: Vec<(usize, usize, NodeId, S)>) -> Result<Self> {
        let mut rows: Vec<Vec<Option<S>>> = space
            .nodes()
            .iter()
            .map(|n| vec![None; 2 * n.depth + 1])
            .collect();
        for (s, t, node, v) in entries {
            if node >= space.len() {
                return Err(Error::invalid(node, "table entry for unknown node"));
            }
            let d = space.depth(node);
            if s.max(t) != d {
                return Err(Error::invalid(
                    node,
                    format!("entry (s={s}, t={t}) needs a node at depth {}", s.max(t)),
                ));
            }
            rows[node][slot(s, t, d)] = Some(v);
        }
        for (node, row) in rows.iter().enumerate() {
            let d = space.depth(node);
            if let Some((s, t)) = slot_pairs(d).zip(row).find(|(_, v)| v.is_none()).map(|p| p.0) {
                return Err(Error::invalid(
                    node,
                    format!("table does not cover (s={s}, t={t})"),
                ));
            }
        }
        Ok(Self::from_fn(space, PayoffKind::Table, |s, t, n| {
            rows[n][slot(s, t, space.depth(n))].clone().unwrap()
        }))
    }

    /// `|f(s) - f(t)|` evaluated along the path to the node.
    pub fn abs_diff_f(space: &FilteredSpace, f: &AdaptedProcess<S>) -> Self {
        Self::from_fn(space, PayoffKind::AbsDiffF, |s, t, n| {
            (f.at(space.ancestor(n, s)).clone() - f.at(space.ancestor(n, t)).clone()).abs()
        })
    }

    /// `|s - t|` in grid time units.
    pub fn abs_time_diff(space: &FilteredSpace) -> Self {
        let times: Vec<S> = space.grid().times().iter().map(S::from_rational).collect();
        Self::from_fn(space, PayoffKind::AbsTimeDiff, |s, t, _| {
            (times[s].clone() - times[t].clone()).abs()
        })
    }

    /// `W(s, t, f_s, g_t)` for a `W` that is Lipschitz with constant
    /// `lipschitz` in the sum metric. The constant is checked against every
    /// pair of tabulated arguments.
    pub fn w_process(
        space: &FilteredSpace,
        w: impl Fn(&S, &S, &S, &S) -> S,
        lipschitz: S,
        f: &AdaptedProcess<S>,
        g: &AdaptedProcess<S>,
    ) -> Result<Self> {
        let times: Vec<S> = space.grid().times().iter().map(S::from_rational).collect();
        let args: Vec<Vec<WArgs<S>>> = space
            .nodes()
            .iter()
            .map(|n| {
                slot_pairs(n.depth)
                    .map(|(s, t)| WArgs {
                        s: times[s].clone(),
                        t: times[t].clone(),
                        x: f.at(space.ancestor(n.id, s)).clone(),
                        y: g.at(space.ancestor(n.id, t)).clone(),
                    })
                    .collect()
            })
            .collect();
        let mut payoff = Self::from_fn(space, PayoffKind::WProcess, |s, t, n| {
            let a = &args[n][slot(s, t, space.depth(n))];
            w(&a.s, &a.t, &a.x, &a.y)
        });
        payoff.lipschitz = Some(lipschitz);
        payoff.w_args = Some(args);
        payoff.lipschitz_certificate()?;
        Ok(payoff)
    }

    /// `u(f_s - g_t)` for a tabulated monotone utility.
    pub fn utility_spread(
        space: &FilteredSpace,
        utility: &Utility<S>,
        f: &AdaptedProcess<S>,
        g: &AdaptedProcess<S>,
    ) -> Self {
        Self::from_fn(space, PayoffKind::UtilitySpread, |s, t, n| {
            utility.eval(&(f.at(space.ancestor(n, s)).clone() - g.at(space.ancestor(n, t)).clone()))
        })
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }

    /// `max |U|` over the evaluation domain.
    pub fn bound(&self) -> &S {
        &self.bound
    }

    pub fn lipschitz(&self) -> Option<&S> {
        self.lipschitz.as_ref()
    }

    /// `U(s, t)` at a node of depth `max(s, t)`.
    pub fn get(&self, s: usize, t: usize, node: NodeId) -> &S {
        let row = &self.table[node];
        &row[slot(s, t, row.len() / 2)]
    }

    /// Leaf-indexed `U(rho, tau)`.
    pub fn eval(&self, space: &FilteredSpace, rho: &StoppingTime, tau: &StoppingTime) -> RandomVariable<S> {
        RandomVariable(
            (0..space.leaf_count())
                .map(|leaf| {
                    let (s, t) = (rho.value(leaf), tau.value(leaf));
                    self.get(s, t, space.path_node(leaf, s.max(t))).clone()
                })
                .collect(),
        )
    }

    /// `U(sigma, sigma)`.
    pub fn diagonal(&self, space: &FilteredSpace, sigma: &StoppingTime) -> RandomVariable<S> {
        self.eval(space, sigma, sigma)
    }

    /// `U(d, d, n)` for every node.
    pub fn diagonal_nodes(&self, space: &FilteredSpace) -> Vec<S> {
        space
            .nodes()
            .iter()
            .map(|n| self.get(n.depth, n.depth, n.id).clone())
            .collect()
    }

    /// Check `|U_1 - U_2| <= L (|Δs| + |Δt| + |Δf| + |Δg|)` over every pair
    /// of tabulated arguments. Only meaningful for `W_PROCESS` payoffs.
    pub fn lipschitz_certificate(&self) -> Result<()> {
        let (Some(l), Some(args)) = (&self.lipschitz, &self.w_args) else {
            return Err(Error::Lipschitz("payoff carries no Lipschitz data".into()));
        };
        let flat: Vec<(&WArgs<S>, &S)> = args
            .iter()
            .zip(&self.table)
            .flat_map(|(a, v)| a.iter().zip(v))
            .collect();
        for (i, (a, u)) in flat.iter().enumerate() {
            for (b, v) in &flat[i + 1..] {
                let dist = (a.s.clone() - b.s.clone()).abs()
                    + (a.t.clone() - b.t.clone()).abs()
                    + (a.x.clone() - b.x.clone()).abs()
                    + (a.y.clone() - b.y.clone()).abs();
                let gap = ((*u).clone() - (*v).clone()).abs();
                let limit = l.clone() * dist.clone();
                if !gap.approx_le(&limit) {
                    return Err(Error::Lipschitz(format!(
                        "|ΔU| = {gap} exceeds L·distance = {limit} (L = {l}, distance = {dist})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Change arithmetic.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Payoff<T> {
        let conv = |row: &Vec<S>| row.iter().map(&f).collect::<Vec<T>>();
        Payoff {
            kind: self.kind,
            table: self.table.iter().map(conv).collect(),
            bound: f(&self.bound),
            lipschitz: self.lipschitz.as_ref().map(&f),
            w_args: self.w_args.as_ref().map(|rows| {
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .map(|a| WArgs {
                                s: f(&a.s),
                                t: f(&a.t),
                                x: f(&a.x),
                                y: f(&a.y),
                            })
                            .collect()
                    })
                    .collect()
            }),
        }
    }
}

impl Payoff<Rational> {
    pub fn to_float(&self) -> Payoff<f64> {
        self.convert(f64::from_rational)
    }
}

/// Piecewise-linear monotone utility with constant extension beyond its knots.
#[derive(Clone, Debug, PartialEq)]
pub struct Utility<S> {
    knots: Vec<(S, S)>,
}

impl<S: Scalar> Utility<S> {
    pub fn new(knots: Vec<(S, S)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid(None, "utility needs at least one knot"));
        }
        for w in knots.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::invalid(None, "utility knots must be strictly increasing"));
            }
            if w[0].1 > w[1].1 {
                return Err(Error::invalid(None, "utility must be non-decreasing"));
            }
        }
        Ok(Utility { knots })
    }

    pub fn eval(&self, x: &S) -> S {
        let first = &self.knots[0];
        if *x <= first.0 {
            return first.1.clone();
        }
        for w in self.knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if x <= x1 {
                let frac = (x.clone() - x0.clone()) / (x1.clone() - x0.clone());
                return y0.clone() + frac * (y1.clone() - y0.clone());
            }
        }
        self.knots.last().unwrap().1.clone()
    }
}

/// `W(s,t,x,y) = c + a_s s + a_t t + a_x x + a_y y + b_xy |x-y| + b_st |s-t|`.
#[derive(Clone, Debug, PartialEq)]
pub struct WForm<S> {
    pub constant: S,
    pub s: S,
    pub t: S,
    pub x: S,
    pub y: S,
    pub abs_xy: S,
    pub abs_st: S,
}

impl<S: Scalar> WForm<S> {
    pub fn eval(&self, s: &S, t: &S, x: &S, y: &S) -> S {
        self.constant.clone()
            + self.s.clone() * s.clone()
            + self.t.clone() * t.clone()
            + self.x.clone() * x.clone()
            + self.y.clone() * y.clone()
            + self.abs_xy.clone() * (x.clone() - y.clone()).abs()
            + self.abs_st.clone() * (s.clone() - t.clone()).abs()
    }

    /// Smallest constant valid for this form in the sum metric.
    pub fn lipschitz(&self) -> S {
        [
            self.s.abs() + self.abs_st.abs(),
            self.t.abs() + self.abs_st.abs(),
            self.x.abs() + self.abs_xy.abs(),
            self.y.abs() + self.abs_xy.abs(),
        ]
        .into_iter()
        .fold(S::zero(), max_of)
    }

    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> WForm<T> {
        WForm {
            constant: f(&self.constant),
            s: f(&self.s),
            t: f(&self.t),
            x: f(&self.x),
            y: f(&self.y),
            abs_xy: f(&self.abs_xy),
            abs_st: f(&self.abs_st),
        }
    }
}

fn field<'a>(doc: &'a Value, key: &str) -> Result<&'a Value> {
    doc.get(key)
        .ok_or_else(|| Error::Parse(format!("payoff is missing \"{key}\"")))
}

fn rationals(v: &Value) -> Result<Vec<Rational>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected an array, got {v}")))?
        .iter()
        .map(rational_from_json)
        .collect()
}

/// Per-node process given in instance-id order; a shorter table must cover
/// exactly the nodes up to some depth (the process maturity) and is extended
/// constantly after it.
fn process_from_json(space: &FilteredSpace, v: &Value) -> Result<AdaptedProcess<Rational>> {
    let raw = rationals(v)?;
    if raw.len() > space.len() {
        return Err(Error::invalid(None, "process has more values than nodes"));
    }
    let by_node: Vec<Option<Rational>> = space
        .nodes()
        .iter()
        .map(|n| raw.get(n.source_id).cloned())
        .collect();
    let maturity = (0..=space.last_index())
        .rev()
        .find(|&d| by_node[space.nodes_at_depth(d)].iter().all(Option::is_some))
        .ok_or_else(|| Error::invalid(None, "process does not cover the root"))?;
    if by_node[..space.nodes_at_depth(maturity).end]
        .iter()
        .any(Option::is_none)
        || by_node[space.nodes_at_depth(maturity).end..]
            .iter()
            .any(Option::is_some)
    {
        return Err(Error::invalid(
            None,
            "a truncated process must list exactly the nodes up to its maturity",
        ));
    }
    let prefix: Vec<Rational> = by_node
        .into_iter()
        .take(space.nodes_at_depth(maturity).end)
        .map(Option::unwrap)
        .collect();
    AdaptedProcess::new(space, prefix)
}

fn grid_process(space: &FilteredSpace, v: &Value) -> Result<AdaptedProcess<Rational>> {
    let per_index = rationals(v)?;
    if per_index.len() != space.grid().times().len() {
        return Err(Error::invalid(None, "f_grid needs one value per grid point"));
    }
    Ok(AdaptedProcess::from_grid_fn(space, |k| per_index[k].clone()))
}

/// Build a payoff from its JSON description. Node ids inside tables and
/// per-node arrays refer to the instance's ids.
pub fn build_payoff(space: &FilteredSpace, doc: &Value) -> Result<Payoff<Rational>> {
    let kind = field(doc, "kind")?
        .as_str()
        .ok_or_else(|| Error::Parse("payoff kind must be a string".into()))?;
    match kind {
        "constant" => Ok(Payoff::constant(space, rational_from_json(field(doc, "c")?)?)),
        "table" => {
            let entries = field(doc, "entries")?
                .as_array()
                .ok_or_else(|| Error::Parse("entries must be an array".into()))?
                .iter()
                .map(|e| {
                    let idx = |k: &str| {
                        e.get(k)
                            .and_then(Value::as_u64)
                            .map(|v| v as usize)
                            .ok_or_else(|| Error::Parse(format!("table entry without {k}: {e}")))
                    };
                    let source = idx("node")?;
                    let node = space
                        .from_source_id(source)
                        .ok_or_else(|| Error::invalid(source, "table entry for unknown node"))?;
                    Ok((idx("s")?, idx("t")?, node, rational_from_json(field(e, "v")?)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Payoff::table(space, entries)
        }
        "abs_diff_f" => {
            let f = match (doc.get("f"), doc.get("f_grid")) {
                (Some(f), _) => process_from_json(space, f)?,
                (None, Some(f)) => grid_process(space, f)?,
                (None, None) => return Err(Error::Parse("abs_diff_f needs \"f\" or \"f_grid\"".into())),
            };
            Ok(Payoff::abs_diff_f(space, &f))
        }
        "abs_time_diff" => Ok(Payoff::abs_time_diff(space)),
        "w_process" => {
            let w = field(doc, "W")?;
            let coef = |k: &str| match w.get(k) {
                Some(v) => rational_from_json(v),
                None => Ok(Rational::from_integer(0.into())),
            };
            let form = WForm {
                constant: coef("const")?,
                s: coef("s")?,
                t: coef("t")?,
                x: coef("x")?,
                y: coef("y")?,
                abs_xy: coef("abs_xy")?,
                abs_st: coef("abs_st")?,
            };
            let l = match doc.get("L") {
                Some(v) => rational_from_json(v)?,
                None => form.lipschitz(),
            };
            let f = process_from_json(space, field(doc, "f")?)?;
            let g = process_from_json(space, field(doc, "g")?)?;
            Payoff::w_process(space, |s, t, x, y| form.eval(s, t, x, y), l, &f, &g)
        }
        "utility_spread" => {
            let knots = field(doc, "utility")?
                .as_array()
                .ok_or_else(|| Error::Parse("utility must be an array of [x, y] pairs".into()))?
                .iter()
                .map(|pair| {
                    let xy = rationals(pair)?;
                    match xy.as_slice() {
                        [x, y] => Ok((x.clone(), y.clone())),
                        _ => Err(Error::Parse(format!("utility knot must be [x, y]: {pair}"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let utility = Utility::new(knots)?;
            let f = process_from_json(space, field(doc, "f")?)?;
            let g = process_from_json(space, field(doc, "g")?)?;
            Ok(Payoff::utility_spread(space, &utility, &f, &g))
        }
        other => Err(Error::Parse(format!("unknown payoff kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use num::Signed;
    use super::*;
    use crate::fixtures;
    use crate::oracle::enumerate_stopping_times;
    use crate::scalar::rat;
    use serde_json::json;

    #[test]
    fn step_function_payoff() {
        let cex = fixtures::cex();
        let u = build_payoff(&cex, &json!({"kind": "abs_diff_f", "f": [0, 0, 1]})).unwrap();
        assert_eq!(u.get(1, 2, 2), &rat(1, 1));
        assert_eq!(u.get(0, 1, 1), &rat(0, 1));
        assert_eq!(u, fixtures::cex_payoff());
        let via_grid = build_payoff(&cex, &json!({"kind": "abs_diff_f", "f_grid": [0, 0, 1]})).unwrap();
        assert_eq!(via_grid, u);
    }

    #[test]
    fn constant_payoff() {
        let b2 = fixtures::binary(2);
        let u = build_payoff(&b2, &json!({"kind": "constant", "c": 5})).unwrap();
        assert_eq!(u.bound(), &rat(5, 1));
        for t in enumerate_stopping_times(&b2, 100).unwrap().iter() {
            assert_eq!(u.eval(&b2, t, t).0, vec![rat(5, 1); 4]);
        }
    }

    #[test]
    fn time_difference() {
        let cex = fixtures::cex();
        let u = build_payoff(&cex, &json!({"kind": "abs_time_diff"})).unwrap();
        assert_eq!(u.get(0, 2, 2), &rat(1, 1));
        assert_eq!(u.get(1, 1, 1), &rat(0, 1));
        assert_eq!(u.bound(), &rat(1, 1));
    }

    #[test]
    fn evaluation_examples() {
        let cex = fixtures::cex();
        let u = fixtures::cex_payoff();
        let half = StoppingTime::constant(&cex, 1);
        let end = StoppingTime::at_horizon(&cex);
        assert_eq!(u.eval(&cex, &half, &end).0, vec![rat(1, 1)]);
        assert_eq!(u.eval(&cex, &end, &end).0, vec![rat(0, 1)]);
        assert_eq!(u.diagonal(&cex, &half).0, vec![rat(0, 1)]);
        let t = Payoff::<Rational>::abs_time_diff(&cex);
        for s in enumerate_stopping_times(&cex, 10).unwrap().iter() {
            assert_eq!(t.diagonal(&cex, s).0, vec![rat(0, 1)]);
        }
    }

    #[test]
    fn incomplete_table_is_rejected() {
        let cex = fixtures::cex();
        let err = build_payoff(
            &cex,
            &json!({"kind": "table", "entries": [{"s": 0, "t": 0, "node": 0, "v": "1/2"}]}),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { node: Some(1), .. }));
        let wrong_depth = build_payoff(
            &cex,
            &json!({"kind": "table", "entries": [{"s": 0, "t": 1, "node": 0, "v": 1}]}),
        );
        assert!(wrong_depth.is_err());
        assert!(build_payoff(&cex, &json!({"kind": "abs_diff_f"})).is_err());
        assert!(build_payoff(&cex, &json!({"kind": "nope"})).is_err());
    }

    #[test]
    fn full_table_round_trips() {
        let b2 = fixtures::binary(2);
        let u = fixtures::random_table(&b2, 3);
        let mut entries = Vec::new();
        for n in b2.nodes() {
            for (s, t) in slot_pairs(n.depth) {
                entries.push(json!({"s": s, "t": t, "node": n.source_id, "v": u.get(s, t, n.id).to_string()}));
            }
        }
        let parsed = build_payoff(&b2, &json!({"kind": "table", "entries": entries})).unwrap();
        assert_eq!(parsed.table, u.table);
    }

    #[test]
    fn w_process_certificate() {
        let b2 = fixtures::binary(2);
        let doc = json!({
            "kind": "w_process",
            "W": {"x": "1", "y": "-1/2", "abs_st": "1/4"},
            "f": [0, 1, -1, 2, 0, 0, -2],
            "g": [1, 1, 0]
        });
        let u = build_payoff(&b2, &doc).unwrap();
        assert_eq!(u.lipschitz(), Some(&rat(1, 1)));
        u.lipschitz_certificate().unwrap();
        let mut too_small = doc.clone();
        too_small["L"] = json!("1/2");
        assert!(matches!(build_payoff(&b2, &too_small), Err(Error::Lipschitz(_))));
    }

    #[test]
    fn utility_spread_with_short_maturity() {
        let b2 = fixtures::binary(2);
        let doc = json!({
            "kind": "utility_spread",
            "utility": [[-1, -2], [0, 0], [2, 1]],
            "f": [0, 1, -1],
            "g": [0, 0, 0, 1, 1, 1, 1]
        });
        let u = build_payoff(&b2, &doc).unwrap();
        // f frozen after depth 1: at leaf 3 (child of node 1) f = 1, g = 1.
        assert_eq!(u.get(2, 2, 3), &rat(0, 1));
        // f_0 - g_2 = -1 -> -2.
        assert_eq!(u.get(0, 2, 3), &rat(-2, 1));
        // f_1 - g_0 = 1 -> halfway between 0 and 1.
        assert_eq!(u.get(1, 0, 1), &rat(1, 2));
        assert!(Utility::new(vec![(rat(0, 1), rat(1, 1)), (rat(1, 1), rat(0, 1))]).is_err());
    }

    #[test]
    fn bounded_and_measurable() {
        for space in [fixtures::binary(1), fixtures::binary(2), fixtures::binary_asym(2)] {
            let all = enumerate_stopping_times(&space, 100).unwrap();
            for seed in 0..5 {
                let u = fixtures::random_table(&space, seed);
                for r in all.iter() {
                    for t in all.iter() {
                        let x = u.eval(&space, r, t);
                        assert!(x.0.iter().all(|v| v.abs() <= *u.bound()));
                        for leaf in 0..space.leaf_count() {
                            let d = r.value(leaf).max(t.value(leaf));
                            let atom = space.path_node(leaf, d);
                            for other in space.leaf_range(atom) {
                                assert_eq!(x.0[other], x.0[leaf]);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn float_conversion() {
        let u = fixtures::cex_payoff().to_float();
        assert_eq!(u.get(1, 2, 2), &1.0);
        assert_eq!(u.bound(), &1.0);
    }
}
