use num::Signed;
use proptest::prelude::*;

use stopgame_core::dynkin::{closed_loop, jj_decomposition, open_loop, saddle, DynkinSpec, Order, Tie};
use stopgame_core::oracle::{
    count_stopping_times, enumerate_stopping_times, enumerate_strategy_maps, find_dvalue, sandwich_report, Caps,
};
use stopgame_core::payoff::{Payoff, PayoffKind};
use stopgame_core::scalar::{rat, Rational};
use stopgame_core::space::{FilteredSpace, NodeSpec, RandomVariable, SpaceSpec};
use stopgame_core::stopping::{conditional_expectation, StoppingTime};
use stopgame_core::strategy::{
    best_response_to_map, build_rho_map, build_tau_map, check_nonanticipativity, strategy_game_value,
    NonAnticipativity, Player, StrategyMap,
};
use stopgame_core::values::{inner_optimizer, Side, ValueFamilies};

#[derive(Clone, Debug)]
struct Shape {
    depth: usize,
    branches: Vec<usize>,
    weights: Vec<i64>,
    values: Vec<(i64, i64)>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (
        1usize..=2,
        prop::collection::vec(1usize..=3, 4),
        prop::collection::vec(1i64..=4, 12),
        prop::collection::vec((-6i64..=6, 1i64..=4), 200),
    )
        .prop_map(|(depth, branches, weights, values)| Shape {
            depth,
            branches,
            weights,
            values,
        })
}

fn build(shape: &Shape) -> (FilteredSpace, Payoff<Rational>) {
    let grid: Vec<Rational> = (0..=shape.depth).map(|k| rat(k as i64, shape.depth as i64)).collect();
    let mut nodes = vec![NodeSpec {
        id: 0,
        depth: 0,
        parent: None,
        p: None,
    }];
    let (mut b, mut w) = (0, 0);
    let mut frontier = vec![0];
    for depth in 1..=shape.depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let k = shape.branches[b % shape.branches.len()];
            b += 1;
            let ws: Vec<i64> = (0..k)
                .map(|i| shape.weights[(w + i) % shape.weights.len()])
                .collect();
            w += k;
            let total: i64 = ws.iter().sum();
            for wi in ws {
                let id = nodes.len();
                nodes.push(NodeSpec {
                    id,
                    depth,
                    parent: Some(parent),
                    p: Some(rat(wi, total)),
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    let space = FilteredSpace::build(&SpaceSpec { grid, nodes }).unwrap();
    let mut i = 0;
    let u = Payoff::from_fn(&space, PayoffKind::Table, |_, _, _| {
        let (n, d) = shape.values[i % shape.values.len()];
        i += 1;
        rat(n, d)
    });
    (space, u)
}

fn specs(fam: &ValueFamilies<Rational>) -> Vec<DynkinSpec<Rational>> {
    let mut out = Vec::new();
    for lower in [&fam.v1, &fam.v1_strict] {
        for upper in [&fam.v2, &fam.v2_strict] {
            for tie in [Tie::Low, Tie::High] {
                out.push(DynkinSpec::new(lower, upper, tie));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditioning_and_lattice(shape in shape()) {
        let (space, u) = build(&shape);
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        let x = u.diagonal(&space, &StoppingTime::at_horizon(&space));
        for sigma in set.iter() {
            let cx = conditional_expectation(&space, &x, sigma);
            prop_assert_eq!(space.expectation(&cx), space.expectation(&x));
            for node in sigma.stop_nodes() {
                let range = space.leaf_range(node);
                prop_assert!(range.clone().all(|l| cx.0[l] == cx.0[range.start]));
            }
            for tau in set.iter() {
                let m = sigma.meet(&space, tau);
                let j = sigma.join(&space, tau);
                prop_assert!(set.id_of(&m).is_some() && set.id_of(&j).is_some());
                if tau.strictly_after(&space, sigma) {
                    prop_assert!(tau.is_at_or_after(sigma));
                    for l in 0..space.leaf_count() {
                        prop_assert!(tau.value(l) > sigma.value(l) || tau.value(l) == space.last_index());
                    }
                }
            }
        }
    }

    #[test]
    fn payoff_bound_and_measurability(shape in shape()) {
        let (space, u) = build(&shape);
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        for rho in set.iter() {
            for tau in set.iter() {
                let RandomVariable(v) = u.eval(&space, rho, tau);
                prop_assert!(v.iter().all(|x| x.abs() <= *u.bound()));
                for l in 0..space.leaf_count() {
                    let node = if rho.value(l) >= tau.value(l) { rho.stop_node(l) } else { tau.stop_node(l) };
                    let range = space.leaf_range(node);
                    prop_assert!(range.clone().all(|k| v[k] == v[l]));
                }
            }
        }
    }

    #[test]
    fn families_and_optimizers(shape in shape()) {
        let (space, u) = build(&shape);
        let fam = ValueFamilies::compute(&space, &u);
        let diag = u.diagonal_nodes(&space);
        for n in 0..space.len() {
            prop_assert!(fam.v1.values[n] <= diag[n] && diag[n] <= fam.v2.values[n]);
            prop_assert_eq!(&fam.v1.values[n], &diag[n].clone().min(fam.v1_strict.values[n].clone()));
            prop_assert_eq!(&fam.v2.values[n], &diag[n].clone().max(fam.v2_strict.values[n].clone()));
        }
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        for base in set.iter() {
            for (side, strict, family) in [
                (Side::Lower, false, &fam.v1),
                (Side::Lower, true, &fam.v1_strict),
                (Side::Upper, false, &fam.v2),
                (Side::Upper, true, &fam.v2_strict),
            ] {
                let opt = inner_optimizer(&space, &u, side, strict, base);
                prop_assert!(opt.is_at_or_after(base));
                if strict {
                    prop_assert!(opt.strictly_after(&space, base));
                }
                let x = match side {
                    Side::Lower => u.eval(&space, &opt, base),
                    Side::Upper => u.eval(&space, base, &opt),
                };
                let cx = conditional_expectation(&space, &x, base);
                for l in 0..space.leaf_count() {
                    prop_assert_eq!(&cx.0[l], family.at(base, l));
                }
            }
        }
    }

    #[test]
    fn dynkin_invariants(shape in shape()) {
        let (space, u) = build(&shape);
        let fam = ValueFamilies::compute(&space, &u);
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        for spec in specs(&fam) {
            let up = open_loop(&space, &set, &spec, Order::InfSup).value;
            let down = open_loop(&space, &set, &spec, Order::SupInf).value;
            prop_assert!(down <= up);
            if !spec.is_ordered() {
                prop_assert!(closed_loop(&space, &spec).is_err());
                continue;
            }
            let sol = closed_loop(&space, &spec).unwrap();
            prop_assert_eq!(&sol.root_value, &up);
            prop_assert_eq!(&sol.root_value, &down);
            for n in 0..space.len() {
                prop_assert!(spec.lower.values[n] <= sol.values[n] && sol.values[n] <= spec.upper.values[n]);
            }
            saddle(&space, &set, &spec).unwrap();
            let jj = jj_decomposition(&space, &spec, None).unwrap();
            prop_assert_eq!(&jj.value, &sol.root_value);
            let probs = space.branch_probs::<Rational>();
            for n in 0..space.len() {
                prop_assert!(jj.j[n] >= rat(0, 1) && jj.j_prime[n] >= rat(0, 1));
                if !space.node(n).children.is_empty() {
                    prop_assert!(jj.j[n] >= space.continuation(&probs, n, &jj.j));
                    prop_assert!(jj.j_prime[n] >= space.continuation(&probs, n, &jj.j_prime));
                }
            }
            let c = rat(-5, 3);
            prop_assert_eq!(closed_loop(&space, &spec.shifted(&c)).unwrap().root_value, sol.root_value.clone() + c);
            if spec.tie == Tie::Low {
                let high = DynkinSpec { tie: Tie::High, ..spec.clone() };
                prop_assert!(closed_loop(&space, &high).unwrap().root_value >= sol.root_value);
            }
        }
    }

    #[test]
    fn constructions_have_their_type(shape in shape()) {
        let (space, u) = build(&shape);
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        for anchor in set.iter() {
            for (strict, ty) in [(true, NonAnticipativity::TypeI), (false, NonAnticipativity::TypeII)] {
                for map in [build_rho_map(&space, &u, anchor, strict), build_tau_map(&space, &u, anchor, strict)] {
                    let table = map.to_table(&space, &set).unwrap();
                    prop_assert_eq!(check_nonanticipativity(&space, &set, &table, ty).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn map_enumeration_and_best_responses(shape in shape()) {
        let (space, u) = build(&shape);
        prop_assume!(count_stopping_times(&space) <= 5);
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        let type_i = enumerate_strategy_maps(&set, NonAnticipativity::TypeI, 1_000_000).unwrap();
        let type_ii = enumerate_strategy_maps(&set, NonAnticipativity::TypeII, 1_000_000).unwrap();
        for m in &type_i {
            prop_assert!(type_ii.contains(m));
        }
        for m in &type_ii {
            prop_assert_eq!(check_nonanticipativity(&space, &set, m, NonAnticipativity::TypeII).unwrap(), None);
            let map = StrategyMap::from_table(m.clone());
            let br = best_response_to_map(&space, &set, &u, &map, None).unwrap();
            let (sup, _) = strategy_game_value(&space, &set, &u, &map, Player::Rho).unwrap();
            prop_assert!(br.value <= sup);
        }
    }

    #[test]
    fn sandwich_and_strict_construction(shape in shape()) {
        let (space, u) = build(&shape);
        prop_assume!(count_stopping_times(&space) <= 5);
        let r = sandwich_report(&space, &u, Caps::default()).unwrap();
        for a in &r.assertions {
            prop_assert!(a.pass, "{} fails: {} vs {}", a.statement(), a.lhs, a.rhs);
        }
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        let s1 = find_dvalue(&r.dvalues, "V1+", "V2", Tie::High, Order::InfSup);
        let map = build_rho_map(&space, &u, set.get(s1.optimizer), true);
        let (value, _) = strategy_game_value(&space, &set, &u, &map, Player::Rho).unwrap();
        prop_assert_eq!(value, s1.value.clone());
    }
}
