// SPDX-License-Identifier: Apache-2.0
//! DAGs, d-separation and hard interventions.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};

/// Node limit for the exhaustive (conditional) d-separation family.
pub const EXHAUSTIVE_FAMILY_GUARD: usize = 8;

/// Either the empty target or a single node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InterventionTarget(Option<usize>);

impl InterventionTarget {
    pub const EMPTY: InterventionTarget = InterventionTarget(None);

    pub fn node(v: usize) -> Self {
        InterventionTarget(Some(v))
    }

    pub fn get(self) -> Option<usize> {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0.is_none()
    }
}

impl std::fmt::Display for InterventionTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            None => write!(f, "{{}}"),
            Some(v) => write!(f, "{{{v}}}"),
        }
    }
}

/// `∅` followed by every single node of `0..count`.
pub fn complete_targets(count: usize) -> Vec<InterventionTarget> {
    std::iter::once(InterventionTarget::EMPTY).chain((0..count).map(InterventionTarget::node)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeKind {
    Parents,
    Children,
    Ancestors,
    Descendants,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Normal,
    Covered,
    Isolated,
}

/// A directed acyclic graph over nodes `0..node_count`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "DagJson", into = "DagJson")]
pub struct Dag {
    node_count: usize,
    parents: Vec<NodeSet>,
    children: Vec<NodeSet>,
}

#[derive(Serialize, Deserialize)]
struct DagJson {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<DagJson> for Dag {
    type Error = Error;

    fn try_from(raw: DagJson) -> Result<Self> {
        Dag::from_edges(raw.node_count, &raw.edges)
    }
}

impl From<Dag> for DagJson {
    fn from(g: Dag) -> Self {
        DagJson { node_count: g.node_count, edges: g.edges() }
    }
}

impl std::fmt::Debug for Dag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dag({}; ", self.node_count)?;
        for (i, (a, b)) in self.edges().into_iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        write!(f, ")")
    }
}

impl Dag {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count > MAX_NODES {
            return Err(Error::TooManyNodes(node_count));
        }
        Ok(Dag { node_count, parents: vec![NodeSet::EMPTY; node_count], children: vec![NodeSet::EMPTY; node_count] })
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Dag::new(node_count)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.node_count)
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.node_count {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: v, count: self.node_count })
        }
    }

    fn check_set(&self, s: NodeSet) -> Result<()> {
        match s.difference(self.nodes()).first() {
            Some(v) => Err(Error::NodeOutOfRange { node: v, count: self.node_count }),
            None => Ok(()),
        }
    }

    /// Adds `a -> b`. Adding an existing edge is a no-op.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        if self.has_edge(a, b) {
            return Ok(());
        }
        if self.reach_down(NodeSet::singleton(b)).contains(a) {
            return Err(Error::Cycle(a, b));
        }
        self.parents[b].insert(a);
        self.children[a].insert(b);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if !self.has_edge(a, b) {
            return Err(Error::EdgeAbsent(a, b));
        }
        self.parents[b].remove(a);
        self.children[a].remove(b);
        Ok(())
    }

    /// Reverses `a -> b`, failing if the result would be cyclic.
    pub fn reverse_edge(&self, a: usize, b: usize) -> Result<Dag> {
        let mut g = self.clone();
        g.remove_edge(a, b)?;
        g.add_edge(b, a)?;
        Ok(g)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.node_count && b < self.node_count && self.children[a].contains(b)
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count).flat_map(|a| self.children[a].iter().map(move |b| (a, b))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(|c| c.len()).sum()
    }

    pub fn parents(&self, v: usize) -> NodeSet {
        self.parents[v]
    }

    pub fn children(&self, v: usize) -> NodeSet {
        self.children[v]
    }

    /// Nodes reachable from `start` along directed edges, `start` included.
    fn reach_down(&self, start: NodeSet) -> NodeSet {
        let mut seen = start;
        let mut frontier = start;
        while !frontier.is_empty() {
            let mut next = NodeSet::EMPTY;
            for v in frontier {
                next = next.union(self.children[v]);
            }
            frontier = next.difference(seen);
            seen = seen.union(next);
        }
        seen
    }

    /// Nodes reaching some node of `start`, `start` included.
    fn reach_up(&self, start: NodeSet) -> NodeSet {
        let mut seen = start;
        let mut frontier = start;
        while !frontier.is_empty() {
            let mut next = NodeSet::EMPTY;
            for v in frontier {
                next = next.union(self.parents[v]);
            }
            frontier = next.difference(seen);
            seen = seen.union(next);
        }
        seen
    }

    pub fn ancestors(&self, v: usize) -> NodeSet {
        self.reach_up(NodeSet::singleton(v)).without(v)
    }

    pub fn descendants(&self, v: usize) -> NodeSet {
        self.reach_down(NodeSet::singleton(v)).without(v)
    }

    /// Ancestors of every node in `s`, with `s` itself included.
    pub fn ancestral_closure(&self, s: NodeSet) -> NodeSet {
        self.reach_up(s)
    }

    /// Relatives of `node`. With `closure` the node itself is included.
    pub fn relatives(&self, node: usize, kind: RelativeKind, closure: bool) -> Result<NodeSet> {
        self.check(node)?;
        let base = match kind {
            RelativeKind::Parents => self.parents[node],
            RelativeKind::Children => self.children[node],
            RelativeKind::Ancestors => self.ancestors(node),
            RelativeKind::Descendants => self.descendants(node),
        };
        Ok(if closure { base.with(node) } else { base })
    }

    pub fn sources(&self) -> NodeSet {
        (0..self.node_count).filter(|&v| self.parents[v].is_empty()).collect()
    }

    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut queue: VecDeque<usize> = (0..self.node_count).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for c in self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        order
    }

    /// Nodes with an active path from some node of `a` given `c`.
    ///
    /// Bayes-ball style reachability over (node, direction) states. `a` must
    /// be disjoint from `c`. The returned set excludes conditioned nodes.
    pub fn reachable(&self, a: NodeSet, c: NodeSet) -> NodeSet {
        let anc_c = self.reach_up(c);
        // up[v]: reached v from a child; down[v]: reached v from a parent.
        let mut up = NodeSet::EMPTY;
        let mut down = NodeSet::EMPTY;
        let mut stack: Vec<(usize, bool)> = a.iter().map(|v| (v, true)).collect();
        let mut out = NodeSet::EMPTY;
        while let Some((v, from_child)) = stack.pop() {
            let seen = if from_child { &mut up } else { &mut down };
            if seen.contains(v) {
                continue;
            }
            seen.insert(v);
            let observed = c.contains(v);
            if !observed {
                out.insert(v);
            }
            if from_child {
                if !observed {
                    stack.extend(self.parents[v].iter().map(|p| (p, true)));
                    stack.extend(self.children[v].iter().map(|ch| (ch, false)));
                }
            } else {
                if !observed {
                    stack.extend(self.children[v].iter().map(|ch| (ch, false)));
                }
                if anc_c.contains(v) {
                    stack.extend(self.parents[v].iter().map(|p| (p, true)));
                }
            }
        }
        out
    }

    pub fn d_separated(&self, a: NodeSet, b: NodeSet, c: NodeSet) -> Result<bool> {
        self.check_set(a.union(b).union(c))?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySet);
        }
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return Err(Error::OverlappingSets);
        }
        Ok(self.reachable(a, c).is_disjoint(b))
    }

    /// Marginal d-connection: true iff `a` and `b` share an ancestor (or one
    /// is an ancestor of the other).
    pub fn marginally_connected(&self, a: usize, b: usize) -> bool {
        a == b || !self.reach_up(NodeSet::singleton(a)).is_disjoint(self.reach_up(NodeSet::singleton(b)))
    }

    /// The intervention graph: every incoming edge of the target is removed.
    pub fn intervene(&self, target: InterventionTarget) -> Result<Dag> {
        let mut g = self.clone();
        if let Some(t) = target.get() {
            self.check(t)?;
            for p in self.parents[t] {
                g.children[p].remove(t);
            }
            g.parents[t] = NodeSet::EMPTY;
        }
        Ok(g)
    }

    pub fn edge_class(&self, a: usize, b: usize) -> Result<EdgeClass> {
        if !self.has_edge(a, b) {
            return Err(Error::EdgeAbsent(a, b));
        }
        let pa_a = self.parents[a];
        let pa_b = self.parents[b];
        Ok(if pa_a.is_empty() && pa_b == NodeSet::singleton(a) {
            EdgeClass::Isolated
        } else if pa_a.with(a) == pa_b {
            EdgeClass::Covered
        } else {
            EdgeClass::Normal
        })
    }

    pub fn isolated_edges(&self) -> Vec<(usize, usize)> {
        self.edges().into_iter().filter(|&(a, b)| matches!(self.edge_class(a, b), Ok(EdgeClass::Isolated))).collect()
    }

    /// Unordered adjacencies as `(min, max)` pairs.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Unshielded colliders `a -> c <- b` as `(a, b, c)` with `a < b`.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for c in 0..self.node_count {
            let pa = self.parents[c].to_vec();
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !self.is_adjacent(a, b) {
                        out.insert((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// Singleton d-separation statements over `universe`.
    ///
    /// With `marginal_only` only `C = ∅` is considered; otherwise every
    /// conditioning set inside the universe is enumerated, which is guarded
    /// to universes of at most [`EXHAUSTIVE_FAMILY_GUARD`] nodes.
    pub fn dsep_family(&self, universe: NodeSet, marginal_only: bool) -> Result<DsepFamily> {
        self.check_set(universe)?;
        if !marginal_only && universe.len() > EXHAUSTIVE_FAMILY_GUARD {
            return Err(Error::GuardExceeded {
                what: "exhaustive d-separation family",
                size: universe.len(),
                limit: EXHAUSTIVE_FAMILY_GUARD,
            });
        }
        let mut entries = BTreeSet::new();
        let nodes = universe.to_vec();
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if marginal_only {
                    if !self.marginally_connected(a, b) {
                        entries.insert((a, b, NodeSet::EMPTY));
                    }
                    continue;
                }
                let rest = universe.without(a).without(b);
                for cset in rest.subsets() {
                    if !self.reachable(NodeSet::singleton(a), cset).contains(b) {
                        entries.insert((a, b, cset));
                    }
                }
            }
        }
        Ok(DsepFamily { universe, entries })
    }
}

/// A canonical set of statements `⟨{a}, {b}, C⟩` with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DsepFamily {
    universe: NodeSet,
    entries: BTreeSet<(usize, usize, NodeSet)>,
}

impl DsepFamily {
    pub fn universe(&self) -> NodeSet {
        self.universe
    }

    pub fn entries(&self) -> &BTreeSet<(usize, usize, NodeSet)> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize, c: NodeSet) -> bool {
        self.entries.contains(&(a.min(b), a.max(b), c))
    }

    pub fn is_subset(&self, other: &DsepFamily) -> bool {
        self.entries.is_subset(&other.entries)
    }
}
