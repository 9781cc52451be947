// SPDX-License-Identifier: Apache-2.0
//! Measurement models: a latent DAG plus latent-to-observed edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::nodeset::{NodeSet, MAX_NODES};

pub use crate::graph::{complete_targets, InterventionTarget};

/// Latents `0..m` and observed `0..n` live in separate index spaces. The
/// joint DAG from [`MeasurementModel::joint_dag`] places latents first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct MeasurementModel {
    latent: Dag,
    n: usize,
    covers: Vec<NodeSet>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    m: usize,
    n: usize,
    latent_edges: Vec<(usize, usize)>,
    bipartite_edges: Vec<(usize, usize)>,
}

impl TryFrom<ModelJson> for MeasurementModel {
    type Error = Error;

    fn try_from(raw: ModelJson) -> Result<Self> {
        MeasurementModel::new(raw.m, raw.n, &raw.latent_edges, &raw.bipartite_edges)
    }
}

impl From<MeasurementModel> for ModelJson {
    fn from(g: MeasurementModel) -> Self {
        ModelJson { m: g.m(), n: g.n, latent_edges: g.latent.edges(), bipartite_edges: g.bipartite_edges() }
    }
}

impl MeasurementModel {
    pub fn new(
        m: usize,
        n: usize,
        latent_edges: &[(usize, usize)],
        bipartite_edges: &[(usize, usize)],
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidModel("m and n must be positive".into()));
        }
        if m + n > MAX_NODES {
            return Err(Error::TooManyNodes(m + n));
        }
        let latent = Dag::from_edges(m, latent_edges)?;
        let mut covers = vec![NodeSet::EMPTY; m];
        for &(h, x) in bipartite_edges {
            if h >= m {
                return Err(Error::NodeOutOfRange { node: h, count: m });
            }
            if x >= n {
                return Err(Error::NodeOutOfRange { node: x, count: n });
            }
            covers[h].insert(x);
        }
        Self::from_parts(latent, n, covers)
    }

    pub fn from_parts(latent: Dag, n: usize, covers: Vec<NodeSet>) -> Result<Self> {
        if covers.len() != latent.node_count() {
            return Err(Error::SizeMismatch(covers.len(), latent.node_count()));
        }
        let all = covers.iter().fold(NodeSet::EMPTY, |acc, c| acc.union(*c));
        if let Some(x) = all.difference(NodeSet::full(n)).first() {
            return Err(Error::NodeOutOfRange { node: x, count: n });
        }
        if let Some(x) = NodeSet::full(n).difference(all).first() {
            return Err(Error::InvalidModel(format!("observed node {x} has no latent parent")));
        }
        Ok(MeasurementModel { latent, n, covers })
    }

    pub fn m(&self) -> usize {
        self.latent.node_count()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn latent_dag(&self) -> &Dag {
        &self.latent
    }

    pub fn covers(&self) -> &[NodeSet] {
        &self.covers
    }

    pub fn cover(&self, h: usize) -> NodeSet {
        self.covers[h]
    }

    /// Latent parents of observed node `x`.
    pub fn observed_parents(&self, x: usize) -> NodeSet {
        (0..self.m()).filter(|&h| self.covers[h].contains(x)).collect()
    }

    pub fn bipartite_edges(&self) -> Vec<(usize, usize)> {
        (0..self.m()).flat_map(|h| self.covers[h].iter().map(move |x| (h, x))).collect()
    }

    pub fn with_latent(&self, latent: Dag) -> Result<Self> {
        Self::from_parts(latent, self.n, self.covers.clone())
    }

    pub fn with_covers(&self, covers: Vec<NodeSet>) -> Result<Self> {
        Self::from_parts(self.latent.clone(), self.n, covers)
    }

    /// Joint DAG over latents `0..m` followed by observed `m..m+n`.
    pub fn joint_dag(&self) -> Dag {
        let m = self.m();
        let mut g = Dag::new(m + self.n).expect("size checked at construction");
        for (a, b) in self.latent.edges() {
            g.add_edge(a, b).expect("latent dag is acyclic");
        }
        for (h, x) in self.bipartite_edges() {
            g.add_edge(h, m + x).expect("observed nodes are sinks");
        }
        g
    }

    /// Observed-node indices inside [`Self::joint_dag`].
    pub fn observed_universe(&self) -> NodeSet {
        NodeSet::full(self.m() + self.n).difference(NodeSet::full(self.m()))
    }

    pub fn intervene(&self, target: InterventionTarget) -> Result<Self> {
        if let Some(t) = target.get() {
            if t >= self.m() {
                return Err(Error::NodeOutOfRange { node: t, count: self.m() });
            }
        }
        self.with_latent(self.latent.intervene(target)?)
    }

    /// Children of `h` that have no other latent parent.
    pub fn pure_children(&self, h: usize) -> NodeSet {
        self.covers[h].iter().filter(|&x| self.observed_parents(x).len() == 1).collect()
    }

    pub fn has_pure_children(&self) -> bool {
        (0..self.m()).all(|h| !self.pure_children(h).is_empty())
    }

    /// Graph-level part (c) of the graphical conditions: whenever two
    /// latents are marginally d-separated in an intervention graph, some
    /// pair of their children is too.
    pub fn satisfies_latent_signature(&self, targets: &[InterventionTarget]) -> Result<bool> {
        for &t in targets {
            let g = self.intervene(t)?;
            let dag = g.latent_dag();
            for i in 0..self.m() {
                for j in i + 1..self.m() {
                    if dag.marginally_connected(i, j) {
                        continue;
                    }
                    let witnessed = self.covers[i]
                        .iter()
                        .any(|xi| self.covers[j].iter().any(|xj| xi != xj && !g.observed_connected(xi, xj)));
                    if !witnessed {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Marginal d-connection between observed nodes: they share a latent
    /// ancestor through their parents.
    pub fn observed_connected(&self, xi: usize, xj: usize) -> bool {
        if xi == xj {
            return true;
        }
        let up_i = self.latent.ancestral_closure(self.observed_parents(xi));
        let up_j = self.latent.ancestral_closure(self.observed_parents(xj));
        !up_i.is_disjoint(up_j)
    }
}
