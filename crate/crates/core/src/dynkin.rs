//! The converted Dynkin game.
//!
//! The minimizer picks `rho`, the maximizer picks `tau`. When the maximizer
//! stops first the payoff is the lower family at `tau`, otherwise the upper
//! family at `rho`. Simultaneous stopping pays the lower family under
//! [`Tie::Low`] and the upper family under [`Tie::High`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{clamp, max_of, Scalar};
use crate::space::FilteredSpace;
use crate::stopping::{Label, StoppingTime, StoppingTimeSet};
use crate::values::NodeValueFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tie {
    /// `{tau <= rho}` pays the lower family.
    Low,
    /// `{tau < rho}` pays the lower family, `{tau >= rho}` the upper one.
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    InfSup,
    SupInf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynkinSpec<S> {
    pub lower: NodeValueFamily<S>,
    pub upper: NodeValueFamily<S>,
    pub tie: Tie,
}

impl<S: Scalar> DynkinSpec<S> {
    pub fn new(lower: &NodeValueFamily<S>, upper: &NodeValueFamily<S>, tie: Tie) -> Self {
        DynkinSpec {
            lower: lower.clone(),
            upper: upper.clone(),
            tie,
        }
    }

    /// First node where `lower > upper`, if any.
    pub fn ordering_violation(&self) -> Option<usize> {
        self.lower
            .values
            .iter()
            .zip(&self.upper.values)
            .position(|(l, u)| !l.approx_le(u))
    }

    pub fn is_ordered(&self) -> bool {
        self.ordering_violation().is_none()
    }

    pub fn shifted(&self, c: &S) -> Self {
        DynkinSpec {
            lower: self.lower.shifted(c),
            upper: self.upper.shifted(c),
            tie: self.tie,
        }
    }

    /// Leaf-wise payoff of a pair of stopping times.
    pub fn pair_payoff(&self, space: &FilteredSpace, rho: &StoppingTime, tau: &StoppingTime) -> S {
        let weights = space.leaf_weights::<S>();
        self.pair_payoff_weighted(&weights, rho, tau)
    }

    fn pair_payoff_weighted(&self, weights: &[S], rho: &StoppingTime, tau: &StoppingTime) -> S {
        weights.iter().enumerate().fold(S::zero(), |acc, (leaf, w)| {
            let (r, t) = (rho.value(leaf), tau.value(leaf));
            let lower_pays = match self.tie {
                Tie::Low => t <= r,
                Tie::High => t < r,
            };
            let v = if lower_pays {
                self.lower.at(tau, leaf)
            } else {
                self.upper.at(rho, leaf)
            };
            acc + w.clone() * v.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StopRegion {
    Continue,
    /// The maximizer stops (lower family binds).
    Lower,
    /// The minimizer stops (upper family binds).
    Upper,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynkinSolution<S> {
    pub values: Vec<S>,
    pub root_value: S,
    pub tau_star: StoppingTime,
    pub rho_star: StoppingTime,
    pub regions: Vec<StopRegion>,
}

/// Backward induction `value = clamp(continuation, [lower, upper])`.
/// Requires `lower <= upper` at every node.
pub fn closed_loop<S: Scalar>(space: &FilteredSpace, spec: &DynkinSpec<S>) -> Result<DynkinSolution<S>> {
    if let Some(node) = spec.ordering_violation() {
        return Err(Error::Ordering { node });
    }
    let probs = space.branch_probs::<S>();
    let (lower, upper) = (&spec.lower.values, &spec.upper.values);
    let mut values = vec![S::zero(); space.len()];
    for id in (0..space.len()).rev() {
        values[id] = if space.node(id).children.is_empty() {
            match spec.tie {
                Tie::Low => lower[id].clone(),
                Tie::High => upper[id].clone(),
            }
        } else {
            clamp(space.continuation(&probs, id, &values), &lower[id], &upper[id])
        };
    }
    let mut regions = Vec::with_capacity(space.len());
    let mut tau_labels = Vec::with_capacity(space.len());
    let mut rho_labels = Vec::with_capacity(space.len());
    for id in 0..space.len() {
        let leaf = space.node(id).children.is_empty();
        let tau_stops = leaf || values[id].approx_eq(&lower[id]);
        let rho_stops = leaf || values[id].approx_eq(&upper[id]);
        regions.push(match (tau_stops, rho_stops) {
            (true, true) => StopRegion::Both,
            (true, false) => StopRegion::Lower,
            (false, true) => StopRegion::Upper,
            (false, false) => StopRegion::Continue,
        });
        let label = |b: bool| if b { Label::Stop } else { Label::Continue };
        tau_labels.push(label(tau_stops));
        rho_labels.push(label(rho_stops));
    }
    Ok(DynkinSolution {
        root_value: values[0].clone(),
        values,
        tau_star: StoppingTime::validate(space, &tau_labels)?,
        rho_star: StoppingTime::validate(space, &rho_labels)?,
        regions,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpenLoopValue<S> {
    pub value: S,
    /// Id (in the enumeration) of the outer player's first optimal choice:
    /// the minimizer's `rho` for inf-sup, the maximizer's `tau` for sup-inf.
    pub optimizer: usize,
}

/// `E[payoff(rho_i, tau_j)]` for every enumerated pair.
pub fn payoff_matrix<S: Scalar>(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    spec: &DynkinSpec<S>,
) -> Vec<Vec<S>> {
    let weights = space.leaf_weights::<S>();
    set.iter()
        .map(|rho| {
            set.iter()
                .map(|tau| spec.pair_payoff_weighted(&weights, rho, tau))
                .collect()
        })
        .collect()
}

/// Exact enumeration of the open-loop game over all stopping-time pairs.
pub fn open_loop<S: Scalar>(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    spec: &DynkinSpec<S>,
    order: Order,
) -> OpenLoopValue<S> {
    let m = payoff_matrix(space, set, spec);
    open_loop_from_matrix(&m, order)
}

pub fn open_loop_from_matrix<S: Scalar>(m: &[Vec<S>], order: Order) -> OpenLoopValue<S> {
    let k = m.len();
    let pick = |vals: &mut dyn Iterator<Item = S>, better: &dyn Fn(&S, &S) -> bool| {
        let mut best: Option<(usize, S)> = None;
        for (i, v) in vals.enumerate() {
            if best.as_ref().is_none_or(|(_, b)| better(&v, b)) {
                best = Some((i, v));
            }
        }
        best.unwrap()
    };
    let less = |a: &S, b: &S| !b.approx_le(a);
    let greater = |a: &S, b: &S| !a.approx_le(b);
    let (optimizer, value) = match order {
        Order::InfSup => pick(
            &mut (0..k).map(|i| pick(&mut m[i].iter().cloned(), &greater).1),
            &less,
        ),
        Order::SupInf => pick(
            &mut (0..k).map(|j| pick(&mut (0..k).map(|i| m[i][j].clone()), &less).1),
            &greater,
        ),
    };
    OpenLoopValue { value, optimizer }
}

/// Game value that uses the closed loop when the families are ordered and
/// the open loop otherwise.
pub fn game_value<S: Scalar>(
    space: &FilteredSpace,
    set: Option<&StoppingTimeSet>,
    spec: &DynkinSpec<S>,
    order: Order,
) -> Result<S> {
    if spec.is_ordered() {
        return Ok(closed_loop(space, spec)?.root_value);
    }
    match set {
        Some(set) => Ok(open_loop(space, set, spec, order).value),
        None => Err(Error::Ordering {
            node: spec.ordering_violation().unwrap(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleCertificate<S> {
    pub rho_star: StoppingTime,
    pub tau_star: StoppingTime,
    pub value: S,
    /// `max over tau of E[R(rho*, tau)]`.
    pub best_tau_deviation: S,
    /// `min over rho of E[R(rho, tau*)]`.
    pub best_rho_deviation: S,
}

/// Extract the closed-loop saddle and verify it against every deviation.
pub fn saddle<S: Scalar>(
    space: &FilteredSpace,
    set: &StoppingTimeSet,
    spec: &DynkinSpec<S>,
) -> Result<SaddleCertificate<S>> {
    let sol = closed_loop(space, spec)?;
    let weights = space.leaf_weights::<S>();
    let value = spec.pair_payoff_weighted(&weights, &sol.rho_star, &sol.tau_star);
    let best_tau_deviation = set
        .iter()
        .map(|tau| spec.pair_payoff_weighted(&weights, &sol.rho_star, tau))
        .fold(value.clone(), max_of);
    let best_rho_deviation = set
        .iter()
        .map(|rho| spec.pair_payoff_weighted(&weights, rho, &sol.tau_star))
        .fold(value.clone(), crate::scalar::min_of);
    if !best_tau_deviation.approx_eq(&value) || !best_rho_deviation.approx_eq(&value) {
        return Err(Error::Saddle(format!(
            "value {value}, best tau deviation {best_tau_deviation}, best rho deviation {best_rho_deviation}"
        )));
    }
    if !value.approx_eq(&sol.root_value) {
        return Err(Error::Saddle(format!(
            "saddle pair pays {value} but the closed-loop value is {}",
            sol.root_value
        )));
    }
    Ok(SaddleCertificate {
        rho_star: sol.rho_star,
        tau_star: sol.tau_star,
        value,
        best_tau_deviation,
        best_rho_deviation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JjDecomposition<S> {
    /// `J` of the normalized game, per node.
    pub j: Vec<S>,
    /// `J'` of the normalized game, per node.
    pub j_prime: Vec<S>,
    /// Martingale `M(n) = E[terminal payoff | n]` subtracted from both
    /// families so that the terminal payoff vanishes.
    pub shift: Vec<S>,
    /// `J(root) - J'(root) + M(root)`.
    pub value: S,
    pub iterations: usize,
}

/// Picard iteration for the pair of nonnegative supermartingales
/// `J = R(J' + X)`, `J' = R(J - Y)` where `R` is the Snell (sup) envelope.
///
/// The families are first normalized: both are replaced at the leaves by
/// the tie payoff and then reduced by the martingale generated by that
/// payoff. This leaves the game unchanged up to the constant `M(root)` and
/// makes the terminal payoff zero, which is what lets the iteration reach a
/// fixed point.
pub fn jj_decomposition<S: Scalar>(
    space: &FilteredSpace,
    spec: &DynkinSpec<S>,
    max_iterations: Option<usize>,
) -> Result<JjDecomposition<S>> {
    if let Some(node) = spec.ordering_violation() {
        return Err(Error::Ordering { node });
    }
    let n = space.len();
    let cap = max_iterations.unwrap_or(10 * n).max(1);
    let probs = space.branch_probs::<S>();
    let is_leaf = |id: usize| space.node(id).children.is_empty();

    let mut shift = vec![S::zero(); n];
    for id in (0..n).rev() {
        shift[id] = if is_leaf(id) {
            match spec.tie {
                Tie::Low => spec.lower.values[id].clone(),
                Tie::High => spec.upper.values[id].clone(),
            }
        } else {
            space.continuation(&probs, id, &shift)
        };
    }
    let norm = |fam: &[S]| -> Vec<S> {
        (0..n)
            .map(|id| {
                if is_leaf(id) {
                    S::zero()
                } else {
                    fam[id].clone() - shift[id].clone()
                }
            })
            .collect()
    };
    let x = norm(&spec.lower.values);
    let y = norm(&spec.upper.values);

    let snell = |obstacle: &dyn Fn(usize) -> S| -> Vec<S> {
        let mut out = vec![S::zero(); n];
        for id in (0..n).rev() {
            let ob = obstacle(id);
            out[id] = if is_leaf(id) {
                ob
            } else {
                max_of(ob, space.continuation(&probs, id, &out))
            };
        }
        out
    };

    let mut j = vec![S::zero(); n];
    let mut jp = vec![S::zero(); n];
    for iteration in 1..=cap {
        let next_j = snell(&|id| jp[id].clone() + x[id].clone());
        let next_jp = snell(&|id| j[id].clone() - y[id].clone());
        let residual = next_j
            .iter()
            .zip(&j)
            .chain(next_jp.iter().zip(&jp))
            .fold(S::zero(), |r, (a, b)| max_of(r, (a.clone() - b.clone()).abs()));
        j = next_j;
        jp = next_jp;
        let converged = if S::EXACT {
            residual.is_zero()
        } else {
            residual.to_f64() < 1e-12
        };
        if converged {
            let value = j[0].clone() - jp[0].clone() + shift[0].clone();
            return Ok(JjDecomposition {
                j,
                j_prime: jp,
                shift,
                value,
                iterations: iteration,
            });
        }
        if iteration == cap {
            return Err(Error::NonConvergence {
                iterations: cap,
                residual: residual.to_string(),
            });
        }
    }
    unreachable!("loop returns on the last iteration")
}
