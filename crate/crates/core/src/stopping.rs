//! Stopping times as adapted STOP/CONTINUE node labelings.

use std::collections::HashMap;


use crate::error::{Error, Result};
use crate::space::{FilteredSpace, NodeId, RandomVariable};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Stop,
    Continue,
}

/// A stopping time in canonical form: every descendant of a STOP node is
/// labeled CONTINUE, so two stopping times are equal iff their labels are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StoppingTime {
    stop: Vec<bool>,
    leaf_node: Vec<NodeId>,
    leaf_depth: Vec<usize>,
}

impl StoppingTime {
    /// Canonicalize a labeling. Fails if some path never stops.
    pub fn validate(space: &FilteredSpace, labels: &[Label]) -> Result<Self> {
        if labels.len() != space.len() {
            return Err(Error::invalid(
                None,
                format!("{} labels for {} nodes", labels.len(), space.len()),
            ));
        }
        let mut covered = vec![false; space.len()];
        let mut stop = vec![false; space.len()];
        for node in space.nodes() {
            let above = node
                .parent
                .map(|p| covered[p] || stop[p])
                .unwrap_or(false);
            covered[node.id] = above;
            if !above {
                stop[node.id] = labels[node.id] == Label::Stop;
                if node.children.is_empty() && !stop[node.id] {
                    return Err(Error::invalid(
                        node.id,
                        "path reaches the horizon without a STOP label",
                    ));
                }
            }
        }
        Ok(Self::from_canonical(space, stop))
    }

    fn from_canonical(space: &FilteredSpace, stop: Vec<bool>) -> Self {
        let mut leaf_node = Vec::with_capacity(space.leaf_count());
        let mut leaf_depth = Vec::with_capacity(space.leaf_count());
        for leaf in 0..space.leaf_count() {
            let d = space
                .leaf_path(leaf)
                .iter()
                .position(|&n| stop[n])
                .expect("canonical stopping time stops on every path");
            leaf_node.push(space.path_node(leaf, d));
            leaf_depth.push(d);
        }
        StoppingTime {
            stop,
            leaf_node,
            leaf_depth,
        }
    }

    /// Build from the stopping index on every leaf, checking adaptedness:
    /// all leaves below the chosen stop node must agree on the index.
    pub fn from_leaf_depths(space: &FilteredSpace, depths: &[usize]) -> Result<Self> {
        if depths.len() != space.leaf_count() {
            return Err(Error::invalid(None, "one stopping index per leaf expected"));
        }
        let mut stop = vec![false; space.len()];
        for (leaf, &d) in depths.iter().enumerate() {
            if d > space.last_index() {
                return Err(Error::invalid(None, format!("stopping index {d} past the horizon")));
            }
            let node = space.path_node(leaf, d);
            if space.leaf_range(node).any(|other| depths[other] != d) {
                return Err(Error::invalid(
                    node,
                    "stopping decision depends on information after the stop",
                ));
            }
            stop[node] = true;
        }
        Ok(Self::from_canonical(space, stop))
    }

    /// Stop at grid index `k` on every path.
    pub fn constant(space: &FilteredSpace, k: usize) -> Self {
        let k = k.min(space.last_index());
        Self::from_leaf_depths(space, &vec![k; space.leaf_count()]).unwrap()
    }

    pub fn at_root(space: &FilteredSpace) -> Self {
        Self::constant(space, 0)
    }

    pub fn at_horizon(space: &FilteredSpace) -> Self {
        Self::constant(space, space.last_index())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.stop
            .iter()
            .map(|&s| if s { Label::Stop } else { Label::Continue })
            .collect()
    }

    pub fn stop_flags(&self) -> &[bool] {
        &self.stop
    }

    pub fn is_stop(&self, node: NodeId) -> bool {
        self.stop[node]
    }

    /// Grid index at which the leaf's path stops.
    pub fn value(&self, leaf: usize) -> usize {
        self.leaf_depth[leaf]
    }

    pub fn leaf_depths(&self) -> &[usize] {
        &self.leaf_depth
    }

    /// Node at which the leaf's path stops.
    pub fn stop_node(&self, leaf: usize) -> NodeId {
        self.leaf_node[leaf]
    }

    /// Stop nodes (the atoms of the stopped sigma-algebra).
    pub fn stop_nodes(&self) -> Vec<NodeId> {
        (0..self.stop.len()).filter(|&i| self.stop[i]).collect()
    }

    pub fn meet(&self, space: &FilteredSpace, other: &Self) -> Self {
        let d: Vec<_> = self
            .leaf_depth
            .iter()
            .zip(&other.leaf_depth)
            .map(|(a, b)| *a.min(b))
            .collect();
        Self::from_leaf_depths(space, &d).expect("pathwise minimum is a stopping time")
    }

    pub fn join(&self, space: &FilteredSpace, other: &Self) -> Self {
        let d: Vec<_> = self
            .leaf_depth
            .iter()
            .zip(&other.leaf_depth)
            .map(|(a, b)| *a.max(b))
            .collect();
        Self::from_leaf_depths(space, &d).expect("pathwise maximum is a stopping time")
    }

    /// Pathwise `self >= other`.
    pub fn is_at_or_after(&self, other: &Self) -> bool {
        self.leaf_depth
            .iter()
            .zip(&other.leaf_depth)
            .all(|(a, b)| a >= b)
    }

    /// Membership of `self` in the strict-future set of `base`: on every
    /// leaf `base < self`, or both equal the horizon.
    pub fn strictly_after(&self, space: &FilteredSpace, base: &Self) -> bool {
        let last = space.last_index();
        self.leaf_depth
            .iter()
            .zip(&base.leaf_depth)
            .all(|(&r, &t)| t < r || (t == last && r == last))
    }
}

/// `E[X | F_sigma]` as a leaf-indexed random variable.
pub fn conditional_expectation<S: Scalar>(
    space: &FilteredSpace,
    x: &RandomVariable<S>,
    sigma: &StoppingTime,
) -> RandomVariable<S> {
    let weights = space.leaf_weights::<S>();
    let mut out = vec![S::zero(); space.leaf_count()];
    for node in sigma.stop_nodes() {
        let range = space.leaf_range(node);
        let mass = range
            .clone()
            .fold(S::zero(), |acc, l| acc + weights[l].clone());
        let total = range
            .clone()
            .fold(S::zero(), |acc, l| acc + weights[l].clone() * x.0[l].clone());
        debug_assert!(!mass.is_zero());
        let avg = total / mass;
        for l in range {
            out[l] = avg.clone();
        }
    }
    RandomVariable(out)
}

/// A complete, duplicate-free list of stopping times with id lookup.
#[derive(Clone, Debug)]
pub struct StoppingTimeSet {
    times: Vec<StoppingTime>,
    index: HashMap<Vec<bool>, usize>,
}

impl StoppingTimeSet {
    pub fn new(times: Vec<StoppingTime>) -> Self {
        let index = times
            .iter()
            .enumerate()
            .map(|(i, t)| (t.stop.clone(), i))
            .collect();
        StoppingTimeSet { times, index }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, id: usize) -> &StoppingTime {
        &self.times[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &StoppingTime> {
        self.times.iter()
    }

    pub fn id_of(&self, t: &StoppingTime) -> Option<usize> {
        self.index.get(&t.stop).copied()
    }

    pub fn as_slice(&self) -> &[StoppingTime] {
        &self.times
    }
}
