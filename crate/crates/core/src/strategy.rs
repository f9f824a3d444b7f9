//! Non-anticipative strategy maps from stopping times to stopping times.

use std::fmt;

use serde::Serialize;

use crate::dynkin::{open_loop, DynkinSpec, Order, Tie};
use crate::error::{Error, Result};
use crate::payoff::Payoff;
use crate::scalar::Scalar;
use crate::space::{FilteredSpace, NodeId};
use crate::stopping::{StoppingTime, StoppingTimeSet};
use crate::values::{inner_policy, solve_inner, InnerPolicy, Side, ValueFamilies};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NonAnticipativity {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl NonAnticipativity {
    pub fn name(self) -> &'static str {
        match self {
            NonAnticipativity::TypeI => "I",
            NonAnticipativity::TypeII => "II",
        }
    }

    /// The two clauses of the dichotomy at one leaf, where `meet` is the
    /// pathwise minimum of the arguments and `a`, `b` their images.
    pub fn clauses(self, meet: usize, a: usize, b: usize) -> (bool, bool) {
        match self {
            NonAnticipativity::TypeI => (a == b && a <= meet, a.min(b) > meet),
            NonAnticipativity::TypeII => (a == b && a < meet, a.min(b) >= meet),
        }
    }
}

/// Which player a map belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    /// The minimizer: the map answers each `tau` with `rho(tau)`.
    Rho,
    /// The maximizer: the map answers each `rho` with `tau(rho)`.
    Tau,
}

/// `anchor` on `{arg >= anchor}`, the inner optimizer of `arg` on
/// `{arg < anchor}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleMap {
    pub anchor: StoppingTime,
    pub policy: InnerPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backing {
    /// Image id for every stopping-time id of the enumeration.
    Table(Vec<usize>),
    Rule(RuleMap),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyMap {
    backing: Backing,
    declared: Option<NonAnticipativity>,
}

impl StrategyMap {
    pub fn from_table(table: Vec<usize>) -> Self {
        StrategyMap {
            backing: Backing::Table(table),
            declared: None,
        }
    }

    pub fn from_rule(anchor: StoppingTime, policy: InnerPolicy) -> Self {
        StrategyMap {
            backing: Backing::Rule(RuleMap { anchor, policy }),
            declared: None,
        }
    }

    pub fn identity(set: &StoppingTimeSet) -> Self {
        Self::from_table((0..set.len()).collect())
    }

    pub fn constant(set: &StoppingTimeSet, sigma: &StoppingTime) -> Result<Self> {
        let id = set
            .id_of(sigma)
            .ok_or_else(|| Error::Domain("stopping time is not in the enumeration".into()))?;
        Ok(Self::from_table(vec![id; set.len()]))
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    /// Type established by [`StrategyMap::certify`], if any.
    pub fn declared(&self) -> Option<NonAnticipativity> {
        self.declared
    }

    pub fn apply(&self, space: &FilteredSpace, set: &StoppingTimeSet, sigma: &StoppingTime) -> Result<StoppingTime> {
        match &self.backing {
            Backing::Table(table) => {
                check_total(set, table)?;
                let id = set
                    .id_of(sigma)
                    .ok_or_else(|| Error::Domain("argument is not in the enumeration".into()))?;
                Ok(set.get(table[id]).clone())
            }
            Backing::Rule(rule) => {
                let inner = rule.policy.optimizer(space, sigma);
                let depths: Vec<usize> = (0..space.leaf_count())
                    .map(|leaf| {
                        let a = rule.anchor.value(leaf);
                        if sigma.value(leaf) >= a {
                            a
                        } else {
                            inner.value(leaf)
                        }
                    })
                    .collect();
                StoppingTime::from_leaf_depths(space, &depths)
                    .map_err(|e| Error::Domain(format!("rule map output is not a stopping time: {e}")))
            }
        }
    }

    /// Image ids over the whole enumeration.
    pub fn to_table(&self, space: &FilteredSpace, set: &StoppingTimeSet) -> Result<Vec<usize>> {
        match &self.backing {
            Backing::Table(table) => {
                check_total(set, table)?;
                Ok(table.clone())
            }
            Backing::Rule(_) => set
                .iter()
                .map(|sigma| {
                    let image = self.apply(space, set, sigma)?;
                    set.id_of(&image)
                        .ok_or_else(|| Error::Domain("image is not in the enumeration".into()))
                })
                .collect(),
        }
    }

    /// Check the map and record its type on success.
    pub fn certify(
        mut self,
        space: &FilteredSpace,
        set: &StoppingTimeSet,
        ty: NonAnticipativity,
    ) -> Result<Self> {
        let table = self.to_table(space, set)?;
        if let Some(cx) = check_nonanticipativity(space, set, &table, ty)? {
            return Err(Error::invalid(None, cx.to_string()));
        }
        self.declared = Some(ty);
        Ok(self)
    }
}

fn check_total(set: &StoppingTimeSet, table: &[usize]) -> Result<()> {
    if table.len() != set.len() {
        return Err(Error::Domain(format!(
            "map table has {} entries for {} stopping times",
            table.len(),
            set.len()
        )));
    }
    if let Some(bad) = table.iter().find(|&&i| i >= set.len()) {
        return Err(Error::Domain(format!("map table refers to unknown stopping time {bad}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub ty: NonAnticipativity,
    pub sigma1: usize,
    pub sigma2: usize,
    pub leaf: usize,
    pub path: Vec<NodeId>,
    pub meet: usize,
    pub image1: usize,
    pub image2: usize,
    pub first_clause: bool,
    pub second_clause: bool,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Type {} violated by stopping times {} and {} on leaf {} (path {:?}): meet {}, images {} and {}",
            self.ty.name(),
            self.sigma1,
            self.sigma2,
            self.leaf,
            self.path,
            self.meet,
            self.image1,
            self.image2
        )
    }
}

/// First leaf where the pair of arguments with their images violates the
/// dichotomy.
pub(crate) fn pair_violation(
    ty: NonAnticipativity,
    arg1: &[usize],
    arg2: &[usize],
    img1: &[usize],
    img2: &[usize],
) -> Option<usize> {
    (0..arg1.len()).find(|&l| {
        let (c1, c2) = ty.clauses(arg1[l].min(arg2[l]), img1[l], img2[l]);
        !(c1 || c2)
    })
}

/// Pairwise, leafwise check of a table-backed map.
pub fn check_nonanticipativity(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    table: &[usize],
    ty: NonAnticipativity,
) -> Result<Option<Counterexample>> {
    check_total(set, table)?;
    let depth = |i: usize| set.get(i).leaf_depths();
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            if let Some(leaf) = pair_violation(ty, depth(i), depth(j), depth(table[i]), depth(table[j])) {
                let (meet, a, b) = (
                    depth(i)[leaf].min(depth(j)[leaf]),
                    depth(table[i])[leaf],
                    depth(table[j])[leaf],
                );
                let (first_clause, second_clause) = ty.clauses(meet, a, b);
                return Ok(Some(Counterexample {
                    ty,
                    sigma1: i,
                    sigma2: j,
                    leaf,
                    path: space.leaf_path(leaf).to_vec(),
                    meet,
                    image1: a,
                    image2: b,
                    first_clause,
                    second_clause,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointViolation {
    /// Id of `map(T)`.
    pub first: usize,
    /// Id of `map(map(T))`.
    pub second: usize,
}

/// Checks `map(map(T)) = map(T)`.
pub fn fixed_point_check(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    table: &[usize],
) -> Result<Option<FixedPointViolation>> {
    check_total(set, table)?;
    let horizon = set
        .id_of(&StoppingTime::at_horizon(space))
        .ok_or_else(|| Error::Domain("enumeration lacks the horizon".into()))?;
    let first = table[horizon];
    let second = table[first];
    Ok((first != second).then_some(FixedPointViolation { first, second }))
}

/// `E[U(rho_i, tau_j)]` for every pair of enumerated stopping times.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> PayoffMatrix<S> {
    pub fn new(space: &FilteredSpace, set: &StoppingTimeSet, u: &Payoff<S>) -> Self {
        let weights = space.leaf_weights::<S>();
        let rows = set
            .iter()
            .map(|rho| {
                set.iter()
                    .map(|tau| {
                        (0..space.leaf_count()).fold(S::zero(), |acc, leaf| {
                            let node = if rho.value(leaf) >= tau.value(leaf) {
                                rho.stop_node(leaf)
                            } else {
                                tau.stop_node(leaf)
                            };
                            acc + weights[leaf].clone()
                                * u.get(rho.value(leaf), tau.value(leaf), node).clone()
                        })
                    })
                    .collect()
            })
            .collect();
        PayoffMatrix { rows }
    }

    pub fn get(&self, rho: usize, tau: usize) -> &S {
        &self.rows[rho][tau]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Value of a map for `player` against every plain stopping time of the
    /// opponent, with the first optimal opponent response.
    pub fn map_value(&self, table: &[usize], player: Player) -> (S, usize) {
        let mut best: Option<(S, usize)> = None;
        for (arg, &img) in table.iter().enumerate() {
            let v = match player {
                Player::Rho => self.rows[img][arg].clone(),
                Player::Tau => self.rows[arg][img].clone(),
            };
            let better = match (&best, player) {
                (None, _) => true,
                (Some((b, _)), Player::Rho) => !v.approx_le(b),
                (Some((b, _)), Player::Tau) => !b.approx_le(&v),
            };
            if better {
                best = Some((v, arg));
            }
        }
        best.expect("enumeration is never empty")
    }
}

/// `sup over tau of E[U(map(tau), tau)]` for a rho-map, or
/// `inf over rho of E[U(rho, map(rho))]` for a tau-map, with the first
/// optimal opponent stopping time.
pub fn strategy_game_value<S: Scalar>(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    u: &Payoff<S>,
    map: &StrategyMap,
    player: Player,
) -> Result<(S, usize)> {
    let table = map.to_table(space, set)?;
    Ok(PayoffMatrix::new(space, set, u).map_value(&table, player))
}

/// Anchored construction for `player`, with inner optimizers allowed to
/// stop within `slack` of optimal.
pub fn build_map_with_slack<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    player: Player,
    anchor: &StoppingTime,
    strict_inner: bool,
    slack: &S,
) -> StrategyMap {
    let side = match player {
        Player::Rho => Side::Lower,
        Player::Tau => Side::Upper,
    };
    let policy = solve_inner(space, u, side, strict_inner, slack).1;
    StrategyMap::from_rule(anchor.clone(), policy)
}

/// `rho(tau) = anchor` on `{tau >= anchor}`, the lower inner optimizer of
/// `tau` on `{tau < anchor}`.
pub fn build_rho_map<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    anchor: &StoppingTime,
    strict_inner: bool,
) -> StrategyMap {
    StrategyMap::from_rule(anchor.clone(), inner_policy(space, u, Side::Lower, strict_inner))
}

/// Mirror of [`build_rho_map`] with upper inner optimizers.
pub fn build_tau_map<S: Scalar>(
    space: &FilteredSpace,
    u: &Payoff<S>,
    anchor: &StoppingTime,
    strict_inner: bool,
) -> StrategyMap {
    StrategyMap::from_rule(anchor.clone(), inner_policy(space, u, Side::Upper, strict_inner))
}

/// On an even uniform chain: `tau(rho) = T` where `rho <= T/2` and `T/2`
/// where `rho > T/2`.
pub fn half_switch_map(space: &FilteredSpace, set: &StoppingTimeSet) -> Result<StrategyMap> {
    let last = space.last_index();
    if space.leaf_count() != 1 || !last.is_multiple_of(2) || last == 0 {
        return Err(Error::Domain("half-switch map needs a deterministic chain with an even number of steps".into()));
    }
    let half = last / 2;
    let table = set
        .iter()
        .map(|sigma| {
            let target = if sigma.value(0) <= half { last } else { half };
            set.id_of(&StoppingTime::constant(space, target)).unwrap()
        })
        .collect();
    Ok(StrategyMap::from_table(table))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse<S> {
    pub anchor: StoppingTime,
    pub tau: StoppingTime,
    /// `E[U(map(tau), tau)]`.
    pub value: S,
}

/// The maximizer's response to a rho-map: the anchor where it stops no
/// later than the map's answer, otherwise the strict upper optimizer after
/// the map's answer to the anchor.
///
/// Without an explicit anchor, the first sup-inf optimizer of the
/// `(V1, V2+, low)` game is used.
pub fn best_response_to_map<S: Scalar>(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    u: &Payoff<S>,
    map: &StrategyMap,
    anchor: Option<&StoppingTime>,
) -> Result<BestResponse<S>> {
    let anchor = match anchor {
        Some(a) => a.clone(),
        None => {
            let fam = ValueFamilies::compute(space, u);
            let spec = DynkinSpec::new(&fam.v1, &fam.v2_strict, Tie::Low);
            set.get(open_loop(space, set, &spec, Order::SupInf).optimizer).clone()
        }
    };
    let answer = map.apply(space, set, &anchor)?;
    let upper = inner_policy(space, u, Side::Upper, true).optimizer(space, &answer);
    let depths: Vec<usize> = (0..space.leaf_count())
        .map(|leaf| {
            if anchor.value(leaf) <= answer.value(leaf) {
                anchor.value(leaf)
            } else {
                upper.value(leaf)
            }
        })
        .collect();
    let tau = StoppingTime::from_leaf_depths(space, &depths).map_err(|e| Error::CaseIdentity {
        leaf: 0,
        detail: format!("response is not a stopping time: {e}"),
    })?;
    let reply = map.apply(space, set, &tau)?;
    for leaf in 0..space.leaf_count() {
        let ok = if anchor.value(leaf) <= answer.value(leaf) {
            reply.value(leaf) >= anchor.value(leaf) && tau.value(leaf) == anchor.value(leaf)
        } else {
            answer.value(leaf) == reply.value(leaf)
        };
        if !ok {
            return Err(Error::CaseIdentity {
                leaf,
                detail: format!(
                    "anchor {}, map(anchor) {}, response {}, map(response) {}",
                    anchor.value(leaf),
                    answer.value(leaf),
                    tau.value(leaf),
                    reply.value(leaf)
                ),
            });
        }
    }
    let value = space.expectation(&u.eval(space, &reply, &tau));
    Ok(BestResponse { anchor, tau, value })
}
