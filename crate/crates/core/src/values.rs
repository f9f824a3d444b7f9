//! The admissible value families of the converted Dynkin game.
//!
//! For a node `a` at depth `d` the lower family solves
//! `min over rho >= d of E_a[U(rho, d)]` and the upper family solves
//! `max over tau >= d of E_a[U(d, tau)]`, each by backward induction over
//! the subtree rooted at `a`. The strict variants only allow stopping after
//! `d`, except at the horizon where the only admissible time is the horizon.

use serde::Serialize;

use crate::payoff::Payoff;
use crate::scalar::{max_of, min_of, Scalar};
use crate::space::{FilteredSpace, NodeId};
use crate::stopping::StoppingTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeValueFamily<S> {
    pub values: Vec<S>,
    pub side: Side,
    pub strict: bool,
}

impl<S: Scalar> NodeValueFamily<S> {
    /// Value of the family at a stopping time, leaf by leaf.
    pub fn at(&self, sigma: &StoppingTime, leaf: usize) -> &S {
        &self.values[sigma.stop_node(leaf)]
    }

    pub fn shifted(&self, c: &S) -> Self {
        NodeValueFamily {
            values: self.values.iter().map(|v| v.clone() + c.clone()).collect(),
            ..self.clone()
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.side, self.strict) {
            (Side::Lower, false) => "V1",
            (Side::Lower, true) => "V1+",
            (Side::Upper, false) => "V2",
            (Side::Upper, true) => "V2+",
        }
    }
}

/// Optimal-stopping rules for the inner problems, one per base node.
///
/// `stops[a]` lists (sorted) the nodes of the subtree below `a` where the
/// rule started at `a` stops if it gets there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerPolicy {
    pub side: Side,
    pub strict: bool,
    stops: Vec<Vec<NodeId>>,
}

impl InnerPolicy {
    /// Earliest-optimal stopping time for the inner problem started at
    /// `base`, as a stopping time on the whole space.
    pub fn optimizer(&self, space: &FilteredSpace, base: &StoppingTime) -> StoppingTime {
        let depths: Vec<usize> = (0..space.leaf_count())
            .map(|leaf| {
                let a = base.stop_node(leaf);
                (space.depth(a)..=space.last_index())
                    .find(|&k| self.stops[a].binary_search(&space.path_node(leaf, k)).is_ok())
                    .expect("every inner rule stops by the horizon")
            })
            .collect();
        StoppingTime::from_leaf_depths(space, &depths).expect("inner rules are adapted")
    }

    pub fn stops_from(&self, base_node: NodeId) -> &[NodeId] {
        &self.stops[base_node]
    }
}

/// Compute a value family together with its inner stopping rules.
///
/// `slack` widens the stopping region: the rule stops at the first node
/// whose immediate reward is within `slack` of the continuation value. With
/// zero slack the rule is exactly optimal.
pub fn solve_inner<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    side: Side,
    strict: bool,
    slack: &S,
) -> (NodeValueFamily<S>, InnerPolicy) {
    let probs = space.branch_probs::<S>();
    let last = space.last_index();
    let mut values = Vec::with_capacity(space.len());
    let mut stops = Vec::with_capacity(space.len());
    let mut snell = vec![S::zero(); space.len()];
    for a in 0..space.len() {
        let d = space.depth(a);
        let reward = |m: NodeId| match side {
            Side::Lower => u.get(space.depth(m), d, m).clone(),
            Side::Upper => u.get(d, space.depth(m), m).clone(),
        };
        let sub = space.subtree(a);
        let mut stop_here = Vec::new();
        let mut cont_at_a = S::zero();
        for &m in sub.iter().rev() {
            let r = reward(m);
            if space.depth(m) == last {
                snell[m] = r;
                stop_here.push(m);
                continue;
            }
            let cont = space.continuation(&probs, m, &snell);
            if m == a {
                cont_at_a = cont.clone();
            }
            let stop = match side {
                Side::Lower => r.approx_le(&(cont.clone() + slack.clone())),
                Side::Upper => (cont.clone() - slack.clone()).approx_le(&r),
            };
            if stop && !(strict && m == a) {
                stop_here.push(m);
            }
            snell[m] = match side {
                Side::Lower => min_of(r, cont),
                Side::Upper => max_of(r, cont),
            };
        }
        let value = if strict && d < last {
            cont_at_a
        } else {
            snell[a].clone()
        };
        values.push(value);
        stop_here.sort_unstable();
        stops.push(stop_here);
    }
    (
        NodeValueFamily {
            values,
            side,
            strict,
        },
        InnerPolicy {
            side,
            strict,
            stops,
        },
    )
}

pub fn value_family<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    side: Side,
    strict: bool,
) -> NodeValueFamily<S> {
    solve_inner(space, u, side, strict, &S::zero()).0
}

/// `V1` (or its strict variant `V1+`).
pub fn value_lower<S: Scalar>(space: &FilteredSpace, u: &Payoff<S>, strict: bool) -> NodeValueFamily<S> {
    value_family(space, u, Side::Lower, strict)
}

/// `V2` (or its strict variant `V2+`).
pub fn value_upper<S: Scalar>(space: &FilteredSpace, u: &Payoff<S>, strict: bool) -> NodeValueFamily<S> {
    value_family(space, u, Side::Upper, strict)
}

pub fn inner_policy<S: Scalar>(space: &FilteredSpace, u: &Payoff<S>, side: Side, strict: bool) -> InnerPolicy {
    solve_inner(space, u, side, strict, &S::zero()).1
}

/// Attained optimizer of the inner problem started at `base`.
pub fn inner_optimizer<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    side: Side,
    strict: bool,
    base: &StoppingTime,
) -> StoppingTime {
    inner_policy(space, u, side, strict).optimizer(space, base)
}

/// The four families at once.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueFamilies<S> {
    pub v1: NodeValueFamily<S>,
    pub v1_strict: NodeValueFamily<S>,
    pub v2: NodeValueFamily<S>,
    pub v2_strict: NodeValueFamily<S>,
}

impl<S: Scalar> ValueFamilies<S> {
    pub fn compute(space: &FilteredSpace, u: &Payoff<S>) -> Self {
        ValueFamilies {
            v1: value_lower(space, u, false),
            v1_strict: value_lower(space, u, true),
            v2: value_upper(space, u, false),
            v2_strict: value_upper(space, u, true),
        }
    }

    pub fn lower(&self, strict: bool) -> &NodeValueFamily<S> {
        if strict {
            &self.v1_strict
        } else {
            &self.v1
        }
    }

    pub fn upper(&self, strict: bool) -> &NodeValueFamily<S> {
        if strict {
            &self.v2_strict
        } else {
            &self.v2
        }
    }
}

#[cfg(test)]
mod tests {
    use num::Signed;
    use super::*;
    use crate::fixtures;
    use crate::oracle::enumerate_stopping_times;
    use crate::scalar::{rat, Rational};
    use crate::stopping::{conditional_expectation, StoppingTimeSet};

    fn vals(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn counterexample_families() {
        let cex = fixtures::cex();
        let u = fixtures::cex_payoff();
        assert_eq!(value_lower(&cex, &u, false).values, vals(&[(0, 1), (0, 1), (0, 1)]));
        // At time 0 the strictly later time T/2 still has f = 0.
        assert_eq!(value_lower(&cex, &u, true).values, vals(&[(0, 1), (1, 1), (0, 1)]));
        assert_eq!(value_upper(&cex, &u, false).values, vals(&[(1, 1), (1, 1), (0, 1)]));
        assert_eq!(value_upper(&cex, &u, true).values, vals(&[(1, 1), (1, 1), (0, 1)]));
    }

    #[test]
    fn time_difference_upper() {
        let cex = fixtures::cex();
        let u = Payoff::<Rational>::abs_time_diff(&cex);
        assert_eq!(value_upper(&cex, &u, false).values, vals(&[(1, 1), (1, 2), (0, 1)]));
        assert_eq!(value_lower(&cex, &u, true).values, vals(&[(1, 2), (1, 2), (0, 1)]));
    }

    #[test]
    fn constant_payoff_families() {
        let b2 = fixtures::binary(2);
        let u = Payoff::constant(&b2, rat(3, 2));
        let fam = ValueFamilies::compute(&b2, &u);
        for f in [&fam.v1, &fam.v1_strict, &fam.v2, &fam.v2_strict] {
            assert_eq!(f.values, vec![rat(3, 2); 7]);
        }
    }

    #[test]
    fn inner_optimizer_examples() {
        let cex = fixtures::cex();
        let u = fixtures::cex_payoff();
        for k in 0..3 {
            let base = StoppingTime::constant(&cex, k);
            assert_eq!(inner_optimizer(&cex, &u, Side::Lower, false, &base), base);
        }
        let half = StoppingTime::constant(&cex, 1);
        assert_eq!(
            inner_optimizer(&cex, &u, Side::Lower, true, &half),
            StoppingTime::at_horizon(&cex)
        );
        assert_eq!(
            inner_optimizer(&cex, &u, Side::Upper, false, &StoppingTime::at_root(&cex)),
            StoppingTime::at_horizon(&cex)
        );
    }

    /// Brute-force inner value at a node: optimize over every stopping time
    /// of the space that is constant-compatible with the base node.
    fn brute_inner(
        space: &FilteredSpace,
        u: &Payoff<Rational>,
        all: &StoppingTimeSet,
        node: NodeId,
        side: Side,
        strict: bool,
    ) -> Rational {
        let d = space.depth(node);
        let last = space.last_index();
        let base = StoppingTime::constant(space, d);
        let range = space.leaf_range(node);
        let mass: Rational = range.clone().map(|l| space.reach_prob(space.leaves()[l]).clone()).sum();
        let mut best: Option<Rational> = None;
        for cand in all.iter() {
            let ok = range.clone().all(|l| {
                let c = cand.value(l);
                if strict && d < last {
                    c > d
                } else {
                    c >= d
                }
            });
            if !ok {
                continue;
            }
            let x = match side {
                Side::Lower => u.eval(space, cand, &base),
                Side::Upper => u.eval(space, &base, cand),
            };
            let v: Rational = range
                .clone()
                .map(|l| space.reach_prob(space.leaves()[l]).clone() * x.0[l].clone())
                .sum::<Rational>()
                / mass.clone();
            best = Some(match (best, side) {
                (None, _) => v,
                (Some(b), Side::Lower) => min_of(b, v),
                (Some(b), Side::Upper) => max_of(b, v),
            });
        }
        best.unwrap()
    }

    #[test]
    fn matches_brute_force_oracle() {
        for (_, space, u) in fixtures::catalog() {
            if space.last_index() > 2 {
                continue;
            }
            let all = enumerate_stopping_times(&space, 1000).unwrap();
            for side in [Side::Lower, Side::Upper] {
                for strict in [false, true] {
                    let fam = value_family(&space, &u, side, strict);
                    for node in 0..space.len() {
                        assert_eq!(
                            fam.values[node],
                            brute_inner(&space, &u, &all, node, side, strict),
                            "node {node} side {side:?} strict {strict}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sandwich_and_splitting() {
        for (_, space, u) in fixtures::catalog() {
            let fam = ValueFamilies::compute(&space, &u);
            let diag = u.diagonal_nodes(&space);
            for n in 0..space.len() {
                assert!(fam.v1.values[n] <= diag[n] && diag[n] <= fam.v2.values[n]);
                assert_eq!(fam.v1.values[n], min_of(diag[n].clone(), fam.v1_strict.values[n].clone()));
                assert_eq!(fam.v2.values[n], max_of(diag[n].clone(), fam.v2_strict.values[n].clone()));
            }
        }
    }

    #[test]
    fn optimizer_attains_family_value() {
        for (_, space, u) in fixtures::catalog() {
            if space.last_index() > 2 {
                continue;
            }
            let all = enumerate_stopping_times(&space, 1000).unwrap();
            for side in [Side::Lower, Side::Upper] {
                for strict in [false, true] {
                    let (fam, policy) = solve_inner(&space, &u, side, strict, &Rational::from_integer(0.into()));
                    for base in all.iter() {
                        let opt = policy.optimizer(&space, base);
                        if strict {
                            assert!(opt.strictly_after(&space, base));
                        } else {
                            assert!(opt.is_at_or_after(base));
                        }
                        let x = match side {
                            Side::Lower => u.eval(&space, &opt, base),
                            Side::Upper => u.eval(&space, base, &opt),
                        };
                        let cx = conditional_expectation(&space, &x, base);
                        for leaf in 0..space.leaf_count() {
                            assert_eq!(cx.0[leaf], *fam.at(base, leaf));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn slack_rule_is_near_optimal() {
        let space = fixtures::binary(2);
        let u = fixtures::random_table(&space, 11);
        let eps = rat(1, 4);
        let root = StoppingTime::at_root(&space);
        for side in [Side::Lower, Side::Upper] {
            let (fam, _) = solve_inner(&space, &u, side, false, &Rational::from_integer(0.into()));
            let (_, loose) = solve_inner(&space, &u, side, false, &eps);
            let opt = loose.optimizer(&space, &root);
            let x = match side {
                Side::Lower => u.eval(&space, &opt, &root),
                Side::Upper => u.eval(&space, &root, &opt),
            };
            let gap = (space.expectation(&x) - fam.values[0].clone()).abs();
            assert!(gap <= eps);
        }
    }
}
