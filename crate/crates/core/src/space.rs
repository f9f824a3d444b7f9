//! Finite filtered probability spaces encoded as event trees.
//!
//! Atoms of the sigma-algebra at grid index `k` are the depth-`k` nodes.
//! Nodes are renumbered breadth first (children ordered by their instance
//! id), so every depth occupies a contiguous id range and the leaves below
//! any node form a contiguous range of leaf indices.

use std::collections::VecDeque;
use std::ops::Range;

use num::{One, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{rational_from_json, Rational, Scalar};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<Rational>,
}

impl TimeGrid {
    /// Strictly increasing, non-negative, non-empty, with a positive horizon.
    pub fn new(times: Vec<Rational>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid(None, "time grid is empty"));
        }
        if times[0] < Rational::zero() {
            return Err(Error::invalid(None, "time grid starts below zero"));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                None,
                format!("time grid not strictly increasing at {} -> {}", w[0], w[1]),
            ));
        }
        if times.last().unwrap() <= &Rational::zero() {
            return Err(Error::invalid(None, "horizon must be positive"));
        }
        Ok(TimeGrid { times })
    }

    /// `{0, T/n, ..., T}`.
    pub fn uniform(horizon: Rational, steps: usize) -> Result<Self> {
        let n = Rational::from_integer((steps.max(1) as i64).into());
        let times = (0..=steps)
            .map(|k| &horizon * Rational::from_integer((k as i64).into()) / &n)
            .collect();
        Self::new(times)
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn time(&self, k: usize) -> &Rational {
        &self.times[k]
    }

    /// Index of the horizon, i.e. the depth of every leaf.
    pub fn last_index(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> &Rational {
        self.times.last().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub depth: usize,
    pub parent: Option<NodeId>,
    /// Transition probability from the parent (1 for the root).
    pub prob: Rational,
    pub children: Vec<NodeId>,
    /// Id the node carried in the instance description.
    pub source_id: usize,
}

/// One node of an instance description before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub p: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceSpec {
    pub grid: Vec<Rational>,
    pub nodes: Vec<NodeSpec>,
}

impl SpaceSpec {
    /// Parse the `grid`/`nodes` part of an instance document.
    pub fn from_json(doc: &Value) -> Result<Self> {
        let grid = doc
            .get("grid")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("instance needs a \"grid\" array".into()))?
            .iter()
            .map(rational_from_json)
            .collect::<Result<Vec<_>>>()?;
        let nodes = doc
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("instance needs a \"nodes\" array".into()))?
            .iter()
            .map(|n| {
                let field = |k: &str| n.get(k).and_then(Value::as_u64).map(|v| v as usize);
                let id = field("id").ok_or_else(|| Error::Parse(format!("node without id: {n}")))?;
                let depth = field("depth")
                    .ok_or_else(|| Error::Parse(format!("node {id} without depth")))?;
                let parent = match n.get("parent") {
                    None | Some(Value::Null) => None,
                    Some(v) => Some(v.as_u64().ok_or_else(|| {
                        Error::Parse(format!("node {id}: parent must be an integer"))
                    })? as usize),
                };
                let p = n.get("p").map(rational_from_json).transpose()?;
                Ok(NodeSpec {
                    id,
                    depth,
                    parent,
                    p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpaceSpec { grid, nodes })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilteredSpace {
    grid: TimeGrid,
    nodes: Vec<Node>,
    leaves: Vec<NodeId>,
    /// Probability of reaching each node from the root.
    reach: Vec<Rational>,
    /// Node at each depth along the path to each leaf.
    leaf_paths: Vec<Vec<NodeId>>,
    /// Leaf indices below each node.
    leaf_ranges: Vec<Range<usize>>,
    /// Node id of the first node at each depth.
    depth_starts: Vec<usize>,
}

impl FilteredSpace {
    /// Validate an instance description and number its nodes breadth first.
    pub fn build(spec: &SpaceSpec) -> Result<Self> {
        let grid = TimeGrid::new(spec.grid.clone())?;
        let n = spec.nodes.len();
        if n == 0 {
            return Err(Error::invalid(None, "no nodes"));
        }
        let mut by_id: Vec<Option<&NodeSpec>> = vec![None; n];
        for node in &spec.nodes {
            if node.id >= n {
                return Err(Error::invalid(
                    node.id,
                    format!("ids must be 0..{n} (contiguous)"),
                ));
            }
            if by_id[node.id].replace(node).is_some() {
                return Err(Error::invalid(node.id, "duplicate id"));
            }
        }
        let by_id: Vec<&NodeSpec> = by_id.into_iter().map(Option::unwrap).collect();

        let roots: Vec<_> = by_id.iter().filter(|s| s.parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::invalid(
                None,
                format!("expected exactly one root, found {}", roots.len()),
            ));
        }
        let root = roots[0].id;
        if by_id[root].depth != 0 {
            return Err(Error::invalid(root, "root must have depth 0"));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in &by_id {
            let Some(parent) = s.parent else { continue };
            if parent >= n {
                return Err(Error::invalid(s.id, format!("dangling parent {parent}")));
            }
            if s.depth != by_id[parent].depth + 1 {
                return Err(Error::invalid(
                    s.id,
                    format!(
                        "depth {} but parent {} has depth {}",
                        s.depth, parent, by_id[parent].depth
                    ),
                ));
            }
            let p = s
                .p
                .clone()
                .ok_or_else(|| Error::invalid(s.id, "missing branch probability"))?;
            if p <= Rational::zero() || p > Rational::one() {
                return Err(Error::invalid(
                    s.id,
                    format!("branch probability {p} outside (0, 1]"),
                ));
            }
            children[parent].push(s.id);
        }
        for kids in &mut children {
            kids.sort_unstable();
        }

        // Breadth-first renumbering; also catches cycles and unreachable nodes.
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        let mut seen = vec![false; n];
        seen[root] = true;
        while let Some(id) = queue.pop_front() {
            order.push(id);
            for &c in &children[id] {
                if seen[c] {
                    return Err(Error::invalid(c, "node reachable twice"));
                }
                seen[c] = true;
                queue.push_back(c);
            }
        }
        if order.len() != n {
            let orphan = (0..n).find(|&i| !seen[i]).unwrap();
            return Err(Error::invalid(orphan, "not reachable from the root"));
        }
        let mut new_id = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }

        let last = grid.last_index();
        let mut nodes = Vec::with_capacity(n);
        for (new, &old) in order.iter().enumerate() {
            let s = by_id[old];
            if s.depth > last {
                return Err(Error::invalid(
                    old,
                    format!("depth {} beyond the last grid index {last}", s.depth),
                ));
            }
            if children[old].is_empty() && s.depth != last {
                return Err(Error::invalid(
                    old,
                    format!("leaf at depth {} but the horizon index is {last}", s.depth),
                ));
            }
            if !children[old].is_empty() {
                let total: Rational = children[old]
                    .iter()
                    .map(|&c| by_id[c].p.clone().unwrap())
                    .sum();
                if total != Rational::one() {
                    return Err(Error::invalid(
                        old,
                        format!("children probabilities sum to {total}, not 1"),
                    ));
                }
            }
            nodes.push(Node {
                id: new,
                depth: s.depth,
                parent: s.parent.map(|p| new_id[p]),
                prob: s.p.clone().filter(|_| s.parent.is_some()).unwrap_or_else(Rational::one),
                children: children[old].iter().map(|&c| new_id[c]).collect(),
                source_id: old,
            });
        }
        Ok(Self::finish(grid, nodes))
    }

    fn finish(grid: TimeGrid, nodes: Vec<Node>) -> Self {
        let n = nodes.len();
        let mut reach = vec![Rational::one(); n];
        for i in 1..n {
            let p = nodes[i].parent.unwrap();
            reach[i] = &reach[p] * &nodes[i].prob;
        }
        let leaves: Vec<NodeId> = (0..n).filter(|&i| nodes[i].children.is_empty()).collect();
        let leaf_paths = leaves
            .iter()
            .map(|&leaf| {
                let mut path = vec![leaf];
                let mut cur = leaf;
                while let Some(p) = nodes[cur].parent {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                path
            })
            .collect();
        let mut leaf_ranges = vec![0..0; n];
        for (li, &leaf) in leaves.iter().enumerate() {
            leaf_ranges[leaf] = li..li + 1;
        }
        for i in (0..n).rev() {
            if let (Some(first), Some(last)) = (nodes[i].children.first(), nodes[i].children.last())
            {
                leaf_ranges[i] = leaf_ranges[*first].start..leaf_ranges[*last].end;
            }
        }
        let depth_count = grid.last_index() + 1;
        let mut depth_starts = vec![n; depth_count + 1];
        for node in nodes.iter().rev() {
            depth_starts[node.depth] = node.id;
        }
        depth_starts[depth_count] = n;
        for d in (0..depth_count).rev() {
            depth_starts[d] = depth_starts[d].min(depth_starts[d + 1]);
        }
        FilteredSpace {
            grid,
            nodes,
            leaves,
            reach,
            leaf_paths,
            leaf_ranges,
            depth_starts,
        }
    }

    /// Every node branches with the same probabilities until the horizon.
    pub fn uniform_tree(grid: TimeGrid, branch_probs: &[Rational]) -> Result<Self> {
        let mut nodes = vec![NodeSpec {
            id: 0,
            depth: 0,
            parent: None,
            p: None,
        }];
        let mut frontier = vec![0usize];
        for depth in 1..=grid.last_index() {
            let mut next = Vec::new();
            for &parent in &frontier {
                for p in branch_probs {
                    let id = nodes.len();
                    nodes.push(NodeSpec {
                        id,
                        depth,
                        parent: Some(parent),
                        p: Some(p.clone()),
                    });
                    next.push(id);
                }
            }
            frontier = next;
        }
        Self::build(&SpaceSpec {
            grid: grid.times().to_vec(),
            nodes,
        })
    }

    /// A single deterministic path through the grid.
    pub fn chain(grid: TimeGrid) -> Result<Self> {
        Self::uniform_tree(grid, &[Rational::one()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id].depth
    }

    pub fn last_index(&self) -> usize {
        self.grid.last_index()
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Node at `depth` on the path to leaf index `leaf`.
    pub fn path_node(&self, leaf: usize, depth: usize) -> NodeId {
        self.leaf_paths[leaf][depth]
    }

    pub fn leaf_path(&self, leaf: usize) -> &[NodeId] {
        &self.leaf_paths[leaf]
    }

    pub fn leaf_range(&self, id: NodeId) -> Range<usize> {
        self.leaf_ranges[id].clone()
    }

    /// Ancestor of `id` at `depth` (the node itself when depths agree).
    pub fn ancestor(&self, id: NodeId, depth: usize) -> NodeId {
        debug_assert!(depth <= self.depth(id));
        self.leaf_paths[self.leaf_ranges[id].start][depth]
    }

    pub fn nodes_at_depth(&self, depth: usize) -> Range<NodeId> {
        self.depth_starts[depth]..self.depth_starts[depth + 1]
    }

    /// Probability of reaching the node from the root.
    pub fn reach_prob(&self, id: NodeId) -> &Rational {
        &self.reach[id]
    }

    /// Leaf path probabilities in the requested arithmetic.
    pub fn leaf_weights<S: Scalar>(&self) -> Vec<S> {
        self.leaves
            .iter()
            .map(|&l| S::from_rational(&self.reach[l]))
            .collect()
    }

    /// Branch probabilities in the requested arithmetic.
    pub fn branch_probs<S: Scalar>(&self) -> Vec<S> {
        self.nodes.iter().map(|n| S::from_rational(&n.prob)).collect()
    }

    /// `Σ p_c x_c` over the children of `id`.
    pub fn continuation<S: Scalar>(&self, probs: &[S], id: NodeId, values: &[S]) -> S {
        self.nodes[id]
            .children
            .iter()
            .fold(S::zero(), |acc, &c| acc + probs[c].clone() * values[c].clone())
    }

    /// Nodes of the subtree rooted at `id` in breadth-first order.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let range = self.leaf_range(id);
        let mut out = Vec::new();
        for depth in self.depth(id)..=self.last_index() {
            for node in self.nodes_at_depth(depth) {
                let lr = &self.leaf_ranges[node];
                if lr.start >= range.start && lr.end <= range.end {
                    out.push(node);
                }
            }
        }
        out
    }

    /// Whether `desc` lies in the subtree rooted at `anc`.
    pub fn is_descendant(&self, anc: NodeId, desc: NodeId) -> bool {
        self.depth(desc) >= self.depth(anc) && self.ancestor(desc, self.depth(anc)) == anc
    }

    /// `Σ_leaves P(leaf) X(leaf)`.
    pub fn expectation<S: Scalar>(&self, x: &RandomVariable<S>) -> S {
        self.leaves
            .iter()
            .zip(&x.0)
            .fold(S::zero(), |acc, (&l, v)| {
                acc + S::from_rational(&self.reach[l]) * v.clone()
            })
    }

    /// Map a per-node array indexed by instance ids onto breadth-first ids.
    pub fn from_source_order<T: Clone>(&self, values: &[T]) -> Vec<T> {
        self.nodes
            .iter()
            .map(|n| values[n.source_id].clone())
            .collect()
    }

    /// Translate an instance id to the breadth-first id.
    pub fn from_source_id(&self, source: usize) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.source_id == source)
    }
}

/// One value per leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomVariable<S>(pub Vec<S>);

impl<S: Scalar> RandomVariable<S> {
    pub fn constant(space: &FilteredSpace, c: S) -> Self {
        RandomVariable(vec![c; space.leaf_count()])
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }
}

/// One value per node; adaptedness holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedProcess<S>(pub Vec<S>);

impl<S: Scalar> AdaptedProcess<S> {
    /// Per-node values in breadth-first order. A table that only covers the
    /// nodes up to some depth is extended constantly along each path.
    pub fn new(space: &FilteredSpace, values: Vec<S>) -> Result<Self> {
        if values.len() == space.len() {
            return Ok(AdaptedProcess(values));
        }
        let maturity = (0..=space.last_index())
            .find(|&d| space.nodes_at_depth(d).end == values.len())
            .ok_or_else(|| {
                Error::invalid(
                    None,
                    format!(
                        "process has {} values; expected {} or a full prefix of depths",
                        values.len(),
                        space.len()
                    ),
                )
            })?;
        let full = (0..space.len())
            .map(|id| {
                let d = space.depth(id).min(maturity);
                values[space.ancestor(id, d)].clone()
            })
            .collect();
        Ok(AdaptedProcess(full))
    }

    /// Deterministic process given per grid index.
    pub fn from_grid_fn(space: &FilteredSpace, f: impl Fn(usize) -> S) -> Self {
        AdaptedProcess(space.nodes().iter().map(|n| f(n.depth)).collect())
    }

    pub fn at(&self, id: NodeId) -> &S {
        &self.0[id]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::rat;

    #[test]
    fn single_node_space() {
        let space = fixtures::single_node();
        assert_eq!(space.len(), 1);
        assert_eq!(space.leaf_count(), 1);
        assert_eq!(space.last_index(), 0);
    }

    #[test]
    fn counterexample_chain() {
        let space = fixtures::cex();
        assert_eq!(space.len(), 3);
        assert_eq!(space.leaf_count(), 1);
        assert_eq!(space.grid().times(), &[rat(0, 1), rat(1, 2), rat(1, 1)]);
    }

    #[test]
    fn binary_depth_two() {
        let space = fixtures::binary(2);
        assert_eq!(space.len(), 7);
        assert_eq!(space.leaf_count(), 4);
        assert_eq!(space.nodes_at_depth(1), 1..3);
        assert_eq!(space.leaf_range(1), 0..2);
        assert_eq!(space.ancestor(5, 1), 2);
        assert_eq!(space.subtree(2), vec![2, 5, 6]);
        let total: Rational = space.leaves().iter().map(|&l| space.reach_prob(l).clone()).sum();
        assert_eq!(total, rat(1, 1));
    }

    #[test]
    fn renumbers_breadth_first() {
        let json = serde_json::json!({
            "grid": [0, 1, 2],
            "nodes": [
                {"id": 0, "depth": 2, "parent": 3, "p": "1"},
                {"id": 1, "depth": 1, "parent": 2, "p": "1/3"},
                {"id": 2, "depth": 0},
                {"id": 3, "depth": 1, "parent": 2, "p": "2/3"},
                {"id": 4, "depth": 2, "parent": 1, "p": 1}
            ]
        });
        let space = FilteredSpace::build(&SpaceSpec::from_json(&json).unwrap()).unwrap();
        let sources: Vec<_> = space.nodes().iter().map(|n| n.source_id).collect();
        assert_eq!(sources, vec![2, 1, 3, 4, 0]);
        assert_eq!(space.node(2).prob, rat(2, 3));
        assert_eq!(space.reach_prob(4), &rat(2, 3));
    }

    fn spec(nodes: serde_json::Value) -> SpaceSpec {
        SpaceSpec::from_json(&serde_json::json!({"grid": [0, 0.5, 1], "nodes": nodes})).unwrap()
    }

    #[test]
    fn rejects_bad_probability_sum() {
        let s = spec(serde_json::json!([
            {"id": 0, "depth": 0},
            {"id": 1, "depth": 1, "parent": 0, "p": "1/2"},
            {"id": 2, "depth": 2, "parent": 1, "p": "1"}
        ]));
        let err = FilteredSpace::build(&s).unwrap_err();
        assert_eq!(
            err,
            Error::Validation {
                node: Some(0),
                reason: "children probabilities sum to 1/2, not 1".into()
            }
        );
    }

    #[test]
    fn rejects_depth_mismatch_and_dangling_parent() {
        let s = spec(serde_json::json!([
            {"id": 0, "depth": 0},
            {"id": 1, "depth": 2, "parent": 0, "p": "1"}
        ]));
        assert!(matches!(
            FilteredSpace::build(&s),
            Err(Error::Validation { node: Some(1), .. })
        ));
        let s = spec(serde_json::json!([
            {"id": 0, "depth": 0},
            {"id": 1, "depth": 1, "parent": 7, "p": "1"}
        ]));
        assert!(matches!(
            FilteredSpace::build(&s),
            Err(Error::Validation { node: Some(1), .. })
        ));
    }

    #[test]
    fn rejects_short_leaf_and_zero_probability() {
        let s = spec(serde_json::json!([
            {"id": 0, "depth": 0},
            {"id": 1, "depth": 1, "parent": 0, "p": "1"}
        ]));
        assert!(matches!(
            FilteredSpace::build(&s),
            Err(Error::Validation { node: Some(1), .. })
        ));
        let s = spec(serde_json::json!([
            {"id": 0, "depth": 0},
            {"id": 1, "depth": 1, "parent": 0, "p": "0"},
            {"id": 2, "depth": 1, "parent": 0, "p": "1"},
            {"id": 3, "depth": 2, "parent": 1, "p": "1"},
            {"id": 4, "depth": 2, "parent": 2, "p": "1"}
        ]));
        assert!(matches!(
            FilteredSpace::build(&s),
            Err(Error::Validation { node: Some(1), .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let b2 = fixtures::binary(2);
        let x = RandomVariable(vec![rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1)]);
        assert_eq!(b2.expectation(&x), rat(1, 2));
        assert_eq!(
            b2.expectation(&RandomVariable::constant(&b2, rat(7, 3))),
            rat(7, 3)
        );
        let cex = fixtures::cex();
        assert_eq!(cex.expectation(&RandomVariable(vec![rat(-5, 2)])), rat(-5, 2));
    }

    #[test]
    fn maturity_extension() {
        let b2 = fixtures::binary(2);
        let f = AdaptedProcess::new(&b2, vec![rat(0, 1), rat(1, 1), rat(2, 1)]).unwrap();
        assert_eq!(f.0[3..], [rat(1, 1), rat(1, 1), rat(2, 1), rat(2, 1)]);
        assert!(AdaptedProcess::new(&b2, vec![rat(0, 1), rat(1, 1)]).is_err());
    }
}
