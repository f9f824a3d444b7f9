//! Exhaustive ground truth on small spaces.

use serde::Serialize;

use crate::dynkin::{open_loop, DynkinSpec, Order, Tie};
use crate::error::{Error, Result};
use crate::payoff::Payoff;
use crate::scalar::{max_of, Scalar};
use crate::space::{FilteredSpace, NodeId};
use crate::stopping::{Label, StoppingTime, StoppingTimeSet};
use crate::strategy::{pair_violation, NonAnticipativity, PayoffMatrix, Player};
use crate::values::ValueFamilies;

pub const DEFAULT_STOPPING_TIME_CAP: usize = 1000;
pub const DEFAULT_MAP_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub stopping_times: usize,
    pub maps: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            stopping_times: DEFAULT_STOPPING_TIME_CAP,
            maps: DEFAULT_MAP_CAP,
        }
    }
}

/// Number of stopping times, saturating at `usize::MAX`.
pub fn count_stopping_times(space: &FilteredSpace) -> usize {
    let mut count = vec![1usize; space.len()];
    for id in (0..space.len()).rev() {
        let children = &space.node(id).children;
        if !children.is_empty() {
            let prod = children
                .iter()
                .fold(1usize, |acc, &c| acc.saturating_mul(count[c]));
            count[id] = prod.saturating_add(1);
        }
    }
    count[0]
}

/// All stopping times in a fixed order: at every node, "stop here" comes
/// before the continuation choices, which vary fastest in the last child.
pub fn enumerate_stopping_times(space: &FilteredSpace, cap: usize) -> Result<StoppingTimeSet> {
    let needed = count_stopping_times(space);
    if needed > cap {
        return Err(Error::Capacity {
            what: "stopping times",
            needed,
            cap,
        });
    }
    let mut options: Vec<Vec<Vec<NodeId>>> = vec![Vec::new(); space.len()];
    for id in (0..space.len()).rev() {
        let mut here = vec![vec![id]];
        let children = &space.node(id).children;
        if !children.is_empty() {
            let mut combos: Vec<Vec<NodeId>> = vec![Vec::new()];
            for &c in children {
                combos = combos
                    .iter()
                    .flat_map(|prefix| {
                        options[c].iter().map(move |opt| {
                            let mut v = prefix.clone();
                            v.extend_from_slice(opt);
                            v
                        })
                    })
                    .collect();
            }
            here.extend(combos);
        }
        options[id] = here;
    }
    let times = options[0]
        .iter()
        .map(|stops| {
            let mut labels = vec![Label::Continue; space.len()];
            for &s in stops {
                labels[s] = Label::Stop;
            }
            StoppingTime::validate(space, &labels)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StoppingTimeSet::new(times))
}

/// Every table-backed map of the given type, by depth-first assignment with
/// pairwise pruning. Tables come out in lexicographic order.
///
/// Besides the `cap` on maps, the search visits at most `cap * n` partial
/// tables, so trees with many stopping times fail fast with a capacity
/// error instead of searching dead ends.
pub fn enumerate_strategy_maps(
    set: &StoppingTimeSet,
    ty: NonAnticipativity,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    struct Search<'a> {
        depths: Vec<&'a [usize]>,
        ty: NonAnticipativity,
        cap: usize,
        budget: usize,
        visited: usize,
        table: Vec<usize>,
        out: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        fn dfs(&mut self) -> Result<()> {
            let i = self.table.len();
            let n = self.depths.len();
            if i == n {
                if self.out.len() == self.cap {
                    return Err(Error::Capacity {
                        what: "strategy maps",
                        needed: self.cap + 1,
                        cap: self.cap,
                    });
                }
                self.out.push(self.table.clone());
                return Ok(());
            }
            for c in 0..n {
                self.visited += 1;
                if self.visited > self.budget {
                    return Err(Error::Capacity {
                        what: "strategy map search steps",
                        needed: self.visited,
                        cap: self.budget,
                    });
                }
                let d = &self.depths;
                let fits = (0..i).all(|j| pair_violation(self.ty, d[i], d[j], d[c], d[self.table[j]]).is_none());
                if fits {
                    self.table.push(c);
                    self.dfs()?;
                    self.table.pop();
                }
            }
            Ok(())
        }
    }

    let n = set.len();
    let mut search = Search {
        depths: set.iter().map(StoppingTime::leaf_depths).collect(),
        ty,
        cap,
        budget: cap.saturating_mul(n.max(1)),
        visited: 0,
        table: Vec::with_capacity(n),
        out: Vec::new(),
    };
    search.dfs()?;
    Ok(search.out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// Optimal map as a table of stopping-time ids.
    pub map: Vec<usize>,
    /// First optimal opponent stopping time against that map.
    pub response: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameValues<S> {
    /// `inf over Type I rho-maps of sup over tau`.
    pub a_upper: S,
    /// `sup over Type I tau-maps of inf over rho`.
    pub a_lower: S,
    /// `inf over Type II rho-maps of sup over tau`.
    pub b_upper: S,
    /// `sup over Type II tau-maps of inf over rho`.
    pub b_lower: S,
    pub a_upper_witness: Witness,
    pub a_lower_witness: Witness,
    pub b_upper_witness: Witness,
    pub b_lower_witness: Witness,
    pub type_i_maps: usize,
    pub type_ii_maps: usize,
}

impl<S: Scalar> GameValues<S> {
    /// Re-evaluate every witness against the payoff matrix.
    pub fn witnesses_hold(&self, matrix: &PayoffMatrix<S>) -> bool {
        [
            (&self.a_upper, &self.a_upper_witness, Player::Rho),
            (&self.a_lower, &self.a_lower_witness, Player::Tau),
            (&self.b_upper, &self.b_upper_witness, Player::Rho),
            (&self.b_lower, &self.b_lower_witness, Player::Tau),
        ]
        .iter()
        .all(|(v, w, p)| {
            let (value, response) = matrix.map_value(&w.map, *p);
            value.approx_eq(v) && response == w.response
        })
    }
}

fn optimize<S: Scalar>(matrix: &PayoffMatrix<S>, maps: &[Vec<usize>], player: Player) -> (S, Witness) {
    let mut best: Option<(S, Witness)> = None;
    for map in maps {
        let (v, response) = matrix.map_value(map, player);
        let better = match (&best, player) {
            (None, _) => true,
            (Some((b, _)), Player::Rho) => !b.approx_le(&v),
            (Some((b, _)), Player::Tau) => !v.approx_le(b),
        };
        if better {
            best = Some((
                v,
                Witness {
                    map: map.clone(),
                    response,
                },
            ));
        }
    }
    best.expect("the constant maps are always non-anticipative")
}

/// Exact `A_upper`, `A_lower`, `B_upper`, `B_lower` by enumerating all maps.
pub fn brute_game_values<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    caps: Caps,
) -> Result<GameValues<S>> {
    let set = enumerate_stopping_times(space, caps.stopping_times)?;
    let matrix = PayoffMatrix::new(space, &set, u);
    game_values_from(&set, &matrix, caps)
}

pub fn game_values_from<S: Scalar>(
    set: &StoppingTimeSet,
    matrix: &PayoffMatrix<S>,
    caps: Caps,
) -> Result<GameValues<S>> {
    let type_i = enumerate_strategy_maps(set, NonAnticipativity::TypeI, caps.maps)?;
    let type_ii = enumerate_strategy_maps(set, NonAnticipativity::TypeII, caps.maps)?;
    let (a_upper, a_upper_witness) = optimize(matrix, &type_i, Player::Rho);
    let (a_lower, a_lower_witness) = optimize(matrix, &type_i, Player::Tau);
    let (b_upper, b_upper_witness) = optimize(matrix, &type_ii, Player::Rho);
    let (b_lower, b_lower_witness) = optimize(matrix, &type_ii, Player::Tau);
    Ok(GameValues {
        a_upper,
        a_lower,
        b_upper,
        b_lower,
        a_upper_witness,
        a_lower_witness,
        b_upper_witness,
        b_lower_witness,
        type_i_maps: type_i.len(),
        type_ii_maps: type_ii.len(),
    })
}

/// One open-loop value of the converted game.
#[derive(Clone, Debug, PartialEq)]
pub struct DValue<S> {
    pub lower: &'static str,
    pub upper: &'static str,
    pub tie: Tie,
    pub order: Order,
    pub value: S,
    /// Enumeration id of the outer player's first optimal stopping time.
    pub optimizer: usize,
}

impl<S> DValue<S> {
    pub fn name(&self) -> String {
        let tie = match self.tie {
            Tie::Low => "low",
            Tie::High => "high",
        };
        let order = match self.order {
            Order::InfSup => "inf_sup",
            Order::SupInf => "sup_inf",
        };
        format!("{order}({},{},{tie})", self.lower, self.upper)
    }
}

/// Open-loop values for every combination of families, tie and order.
pub fn all_dvalues<S: Scalar>(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    fam: &ValueFamilies<S>,
) -> Vec<DValue<S>> {
    let mut out = Vec::new();
    for lower in [&fam.v1, &fam.v1_strict] {
        for upper in [&fam.v2, &fam.v2_strict] {
            for tie in [Tie::Low, Tie::High] {
                let spec = DynkinSpec::new(lower, upper, tie);
                for order in [Order::InfSup, Order::SupInf] {
                    let ol = open_loop(space, set, &spec, order);
                    out.push(DValue {
                        lower: lower.label(),
                        upper: upper.label(),
                        tie,
                        order,
                        value: ol.value,
                        optimizer: ol.optimizer,
                    });
                }
            }
        }
    }
    out
}

pub fn find_dvalue<'a, S>(
    dvalues: &'a [DValue<S>],
    lower: &str,
    upper: &str,
    tie: Tie,
    order: Order,
) -> &'a DValue<S> {
    dvalues
        .iter()
        .find(|d| d.lower == lower && d.upper == upper && d.tie == tie && d.order == order)
        .expect("all combinations are computed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assertion<S> {
    pub id: &'static str,
    pub lhs_name: &'static str,
    pub rhs_name: String,
    pub relation: Relation,
    pub lhs: S,
    pub rhs: S,
    pub pass: bool,
    /// Holds with equality.
    pub binds: bool,
}

impl<S: Scalar> Assertion<S> {
    fn new(id: &'static str, lhs_name: &'static str, relation: Relation, lhs: &S, rhs_name: String, rhs: &S) -> Self {
        let pass = match relation {
            Relation::Le => lhs.approx_le(rhs),
            Relation::Ge => rhs.approx_le(lhs),
        };
        Assertion {
            id,
            lhs_name,
            rhs_name,
            relation,
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            pass,
            binds: lhs.approx_eq(rhs),
        }
    }

    pub fn statement(&self) -> String {
        let rel = match self.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        };
        format!("{} {rel} {}", self.lhs_name, self.rhs_name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport<S> {
    pub stopping_times: usize,
    pub families: ValueFamilies<S>,
    pub game: GameValues<S>,
    pub dvalues: Vec<DValue<S>>,
    /// `max over sigma of E[U(sigma, sigma)]`.
    pub diagonal_max: S,
    pub assertions: Vec<Assertion<S>>,
}

impl<S: Scalar> SandwichReport<S> {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// Status per assertion id; an id passes when all its checks pass.
    pub fn statuses(&self) -> Vec<(&'static str, bool)> {
        let mut out: Vec<(&'static str, bool)> = Vec::new();
        for a in &self.assertions {
            match out.iter_mut().find(|(id, _)| *id == a.id) {
                Some(entry) => entry.1 &= a.pass,
                None => out.push((a.id, a.pass)),
            }
        }
        out
    }

    pub fn assertion(&self, id: &str) -> impl Iterator<Item = &Assertion<S>> {
        let id = id.to_string();
        self.assertions.iter().filter(move |a| a.id == id)
    }

    /// Spread of all game values and open-loop values.
    pub fn spread(&self) -> S {
        let mut all: Vec<S> = vec![
            self.game.a_upper.clone(),
            self.game.a_lower.clone(),
            self.game.b_upper.clone(),
            self.game.b_lower.clone(),
        ];
        all.extend(self.dvalues.iter().map(|d| d.value.clone()));
        spread(&all)
    }
}

pub fn spread<S: Scalar>(values: &[S]) -> S {
    let hi = values.iter().cloned().reduce(max_of).unwrap_or_else(S::zero);
    let lo = values.iter().cloned().reduce(crate::scalar::min_of).unwrap_or_else(S::zero);
    hi - lo
}

/// Brute values, all open-loop values, and the one-sided bounds S1 to S6.
pub fn sandwich_report<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    caps: Caps,
) -> Result<SandwichReport<S>> {
    let set = enumerate_stopping_times(space, caps.stopping_times)?;
    let matrix = PayoffMatrix::new(space, &set, u);
    let game = game_values_from(&set, &matrix, caps)?;
    let families = ValueFamilies::compute(space, u);
    let dvalues = all_dvalues(space, &set, &families);
    let diagonal_max = (0..set.len())
        .map(|i| matrix.get(i, i).clone())
        .reduce(max_of)
        .expect("enumeration is never empty");

    let d = |lower, upper, tie, order| find_dvalue(&dvalues, lower, upper, tie, order);
    let s1 = d("V1+", "V2", Tie::High, Order::InfSup);
    let s2 = d("V1", "V2+", Tie::Low, Order::SupInf);
    let s3 = d("V1", "V2", Tie::High, Order::InfSup);
    let s4 = d("V1", "V2", Tie::Low, Order::SupInf);
    let assertions = vec![
        Assertion::new("S1", "A_upper", Relation::Le, &game.a_upper, s1.name(), &s1.value),
        Assertion::new("S2", "A_upper", Relation::Ge, &game.a_upper, s2.name(), &s2.value),
        Assertion::new("S2", "B_upper", Relation::Ge, &game.b_upper, s2.name(), &s2.value),
        Assertion::new("S3", "B_upper", Relation::Le, &game.b_upper, s3.name(), &s3.value),
        Assertion::new("S4", "B_lower", Relation::Ge, &game.b_lower, s4.name(), &s4.value),
        Assertion::new("S5", "A_lower", Relation::Ge, &game.a_lower, s2.name(), &s2.value),
        Assertion::new("S6", "A_lower", Relation::Le, &game.a_lower, "max_diag".into(), &diagonal_max),
    ];
    Ok(SandwichReport {
        stopping_times: set.len(),
        families,
        game,
        dvalues,
        diagonal_max,
        assertions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::{rat, Rational};
    use crate::strategy::{check_nonanticipativity, fixed_point_check};

    #[test]
    fn stopping_time_counts() {
        assert_eq!(enumerate_stopping_times(&fixtures::binary(1), 1000).unwrap().len(), 2);
        assert_eq!(enumerate_stopping_times(&fixtures::binary(2), 1000).unwrap().len(), 5);
        assert_eq!(enumerate_stopping_times(&fixtures::binary(3), 1000).unwrap().len(), 26);
        assert_eq!(enumerate_stopping_times(&fixtures::single_node(), 1000).unwrap().len(), 1);
        assert_eq!(enumerate_stopping_times(&fixtures::cex(), 1000).unwrap().len(), 3);
        assert_eq!(count_stopping_times(&fixtures::binary(4)), 677);
    }

    #[test]
    fn stopping_time_cap() {
        let err = enumerate_stopping_times(&fixtures::binary(3), 25).unwrap_err();
        assert_eq!(
            err,
            Error::Capacity {
                what: "stopping times",
                needed: 26,
                cap: 25
            }
        );
    }

    #[test]
    fn enumeration_is_duplicate_free_and_ordered() {
        let space = fixtures::binary(3);
        let set = enumerate_stopping_times(&space, 1000).unwrap();
        for (i, t) in set.iter().enumerate() {
            assert_eq!(set.id_of(t), Some(i));
        }
        assert_eq!(set.get(0), &StoppingTime::at_root(&space));
        assert_eq!(set.get(1), &StoppingTime::constant(&space, 1));
        assert_eq!(set.get(set.len() - 1), &StoppingTime::at_horizon(&space));
    }

    #[test]
    fn maps_on_counterexample() {
        let space = fixtures::cex();
        let set = enumerate_stopping_times(&space, 100).unwrap();
        let type_i = enumerate_strategy_maps(&set, NonAnticipativity::TypeI, 1000).unwrap();
        let type_ii = enumerate_strategy_maps(&set, NonAnticipativity::TypeII, 1000).unwrap();
        let identity: Vec<usize> = (0..3).collect();
        assert!(type_ii.contains(&identity));
        assert!(!type_i.contains(&identity));
        for m in &type_i {
            assert!(type_ii.contains(m));
        }
        // The enumeration is exactly the set of maps passing the checker.
        let mut all = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    all.push(vec![a, b, c]);
                }
            }
        }
        for ty in [NonAnticipativity::TypeI, NonAnticipativity::TypeII] {
            let expected: Vec<_> = all
                .iter()
                .filter(|m| check_nonanticipativity(&space, &set, m, ty).unwrap().is_none())
                .cloned()
                .collect();
            let got = enumerate_strategy_maps(&set, ty, 1000).unwrap();
            assert_eq!(got, expected);
        }
        for m in &type_i {
            assert_eq!(fixed_point_check(&space, &set, m).unwrap(), None);
        }
    }

    #[test]
    fn map_cap() {
        let set = enumerate_stopping_times(&fixtures::cex(), 100).unwrap();
        let err = enumerate_strategy_maps(&set, NonAnticipativity::TypeII, 2).unwrap_err();
        assert!(err.is_capacity());
    }

    #[test]
    fn counterexample_values() {
        let space = fixtures::cex();
        let u = fixtures::cex_payoff();
        let g = brute_game_values(&space, &u, Caps::default()).unwrap();
        assert_eq!(
            (g.a_upper.clone(), g.a_lower.clone(), g.b_upper.clone(), g.b_lower.clone()),
            (rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1))
        );
        let set = enumerate_stopping_times(&space, 100).unwrap();
        assert!(g.witnesses_hold(&PayoffMatrix::new(&space, &set, &u)));
    }

    #[test]
    fn constant_payoff_values() {
        for space in [fixtures::cex(), fixtures::binary(2)] {
            let u = Payoff::constant(&space, rat(3, 2));
            let r = sandwich_report(&space, &u, Caps::default()).unwrap();
            for v in [&r.game.a_upper, &r.game.a_lower, &r.game.b_upper, &r.game.b_lower] {
                assert_eq!(v, &rat(3, 2));
            }
            assert!(r.assertions.iter().all(|a| a.pass && a.binds));
        }
    }

    #[test]
    fn time_gap_values() {
        let space = fixtures::uniform_chain(2);
        let g = brute_game_values::<Rational>(&space, &Payoff::abs_time_diff(&space), Caps::default()).unwrap();
        assert_eq!(g.a_upper, rat(1, 2));
        assert_eq!(g.a_lower, rat(0, 1));
    }

    #[test]
    fn counterexample_sandwich() {
        let r = sandwich_report(&fixtures::cex(), &fixtures::cex_payoff(), Caps::default()).unwrap();
        assert!(r.all_pass());
        let s1: Vec<_> = r.assertion("S1").collect();
        assert!(s1[0].binds && s1[0].rhs == rat(1, 1));
        let s6: Vec<_> = r.assertion("S6").collect();
        assert!(s6[0].binds && s6[0].rhs == rat(0, 1));
        assert_eq!(r.statuses().len(), 6);
    }

    #[test]
    fn float_mode_matches_exact() {
        let (space, u) = fixtures::seeded_instance(1, 5);
        let exact = sandwich_report(&space, &u, Caps::default()).unwrap();
        let float = sandwich_report(&space, &u.to_float(), Caps::default()).unwrap();
        let pairs = [
            (&exact.game.a_upper, float.game.a_upper),
            (&exact.game.b_lower, float.game.b_lower),
        ];
        for (e, f) in pairs {
            assert!((e.to_f64() - f).abs() < 1e-9);
        }
        let _: Rational = exact.diagonal_max;
    }
}
