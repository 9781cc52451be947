// SPDX-License-Identifier: Apache-2.0
//! Undirected dependency graphs over observed nodes and their clique families.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InterventionTarget, MeasurementModel};
use crate::nodeset::{sort_lex, NodeSet, MAX_NODES};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "UdgJson", into = "UdgJson")]
pub struct Udg {
    n: usize,
    adj: Vec<NodeSet>,
}

#[derive(Serialize, Deserialize)]
struct UdgJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<UdgJson> for Udg {
    type Error = Error;

    fn try_from(raw: UdgJson) -> Result<Self> {
        let mut u = Udg::new(raw.n)?;
        for (i, j) in raw.edges {
            u.add_edge(i, j)?;
        }
        Ok(u)
    }
}

impl From<Udg> for UdgJson {
    fn from(u: Udg) -> Self {
        UdgJson { n: u.n, edges: u.edges() }
    }
}

impl std::fmt::Debug for Udg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Udg({}; {:?})", self.n, self.edges())
    }
}

impl Udg {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_NODES {
            return Err(Error::TooManyNodes(n));
        }
        Ok(Udg { n, adj: vec![NodeSet::EMPTY; n] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut u = Udg::new(n)?;
        for v in 0..n {
            u.adj[v] = NodeSet::full(n).without(v);
        }
        Ok(u)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        for v in [i, j] {
            if v >= self.n {
                return Err(Error::NodeOutOfRange { node: v, count: self.n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        self.adj[i].insert(j);
        self.adj[j].insert(i);
        Ok(())
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.adj[i].contains(j)
    }

    pub fn neighbors(&self, v: usize) -> NodeSet {
        self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|i| self.adj[i].iter().filter(move |&j| j > i).map(move |j| (i, j))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn is_clique(&self, s: NodeSet) -> bool {
        s.iter().all(|v| s.without(v).is_subset(self.adj[v]))
    }

    /// Maximal cliques in lexicographic order (Bron–Kerbosch with pivoting).
    pub fn maximal_cliques(&self) -> Vec<NodeSet> {
        let mut out = Vec::new();
        self.bron_kerbosch(NodeSet::EMPTY, NodeSet::full(self.n), NodeSet::EMPTY, &mut out);
        sort_lex(&mut out);
        out
    }

    fn bron_kerbosch(&self, r: NodeSet, mut p: NodeSet, mut x: NodeSet, out: &mut Vec<NodeSet>) {
        if p.is_empty() {
            if x.is_empty() {
                out.push(r);
            }
            return;
        }
        let pivot = p.union(x).iter().max_by_key(|&u| p.intersection(self.adj[u]).len()).expect("p is nonempty");
        for v in p.difference(self.adj[pivot]) {
            let nv = self.adj[v];
            self.bron_kerbosch(r.with(v), p.intersection(nv), x.intersection(nv), out);
            p.remove(v);
            x.insert(v);
        }
    }
}

/// Dependency graph of the observed nodes in `intervene(g, target)`.
pub fn udg_from_graph(g: &MeasurementModel, target: InterventionTarget) -> Result<Udg> {
    let gi = g.intervene(target)?;
    let mut u = Udg::new(g.n())?;
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if gi.observed_connected(i, j) {
                u.add_edge(i, j)?;
            }
        }
    }
    Ok(u)
}

/// Oracle dependency graphs for each target, in target order, not deduplicated.
pub fn oracle_udgs(g: &MeasurementModel, targets: &[InterventionTarget]) -> Result<Vec<Udg>> {
    targets.iter().map(|&t| udg_from_graph(g, t)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyEntry {
    pub udg: Udg,
    pub cliques: Vec<NodeSet>,
}

/// Distinct dependency graphs with their maximal cliques, plus the union Ω.
///
/// Entries are sorted by graph so the family does not depend on input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueFamily {
    n: usize,
    entries: Vec<FamilyEntry>,
    omega: Vec<NodeSet>,
}

impl CliqueFamily {
    pub fn new(udgs: &[Udg]) -> Result<Self> {
        let n = match udgs.first() {
            Some(u) => u.n,
            None => return Err(Error::InvalidData("empty list of dependency graphs".into())),
        };
        if let Some(bad) = udgs.iter().find(|u| u.n != n) {
            return Err(Error::SizeMismatch(n, bad.n));
        }
        let distinct: BTreeSet<&Udg> = udgs.iter().collect();
        let entries: Vec<FamilyEntry> =
            distinct.into_iter().map(|u| FamilyEntry { udg: u.clone(), cliques: u.maximal_cliques() }).collect();
        let omega_set: BTreeSet<NodeSet> = entries.iter().flat_map(|e| e.cliques.iter().copied()).collect();
        let mut omega: Vec<NodeSet> = omega_set.into_iter().collect();
        sort_lex(&mut omega);
        Ok(CliqueFamily { n, entries, omega })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[FamilyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn omega(&self) -> &[NodeSet] {
        &self.omega
    }

    pub fn udgs(&self) -> impl Iterator<Item = &Udg> {
        self.entries.iter().map(|e| &e.udg)
    }
}

/// Shorthand for [`CliqueFamily::new`].
pub fn clique_family(udgs: &[Udg]) -> Result<CliqueFamily> {
    CliqueFamily::new(udgs)
}
