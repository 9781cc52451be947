// SPDX-License-Identifier: Apache-2.0
//! Markov and isolated equivalence, family-set comparisons and maximality.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{complete_targets, Dag, DsepFamily, EdgeClass, InterventionTarget, EXHAUSTIVE_FAMILY_GUARD};
use crate::model::MeasurementModel;
use crate::nodeset::NodeSet;
use crate::udg::{udg_from_graph, Udg};

/// Largest latent count accepted by [`maximality_check`].
pub const MAXIMALITY_GUARD: usize = 8;

fn same_size(g1: &Dag, g2: &Dag) -> Result<()> {
    if g1.node_count() == g2.node_count() {
        Ok(())
    } else {
        Err(Error::SizeMismatch(g1.node_count(), g2.node_count()))
    }
}

/// Same skeleton and same unshielded colliders.
pub fn markov_equivalent(g1: &Dag, g2: &Dag) -> Result<bool> {
    same_size(g1, g2)?;
    Ok(g1.skeleton() == g2.skeleton() && g1.v_structures() == g2.v_structures())
}

/// Every DAG reachable from `g` by reversing isolated edges, sorted.
pub fn iec_class(g: &Dag) -> Vec<Dag> {
    let mut seen: HashSet<Dag> = HashSet::from([g.clone()]);
    let mut queue = VecDeque::from([g.clone()]);
    while let Some(cur) = queue.pop_front() {
        for (a, b) in cur.isolated_edges() {
            let next = cur.reverse_edge(a, b).expect("reversing an isolated edge keeps acyclicity");
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<Dag> = seen.into_iter().collect();
    out.sort();
    out
}

pub fn iec_equivalent(g1: &Dag, g2: &Dag) -> Result<bool> {
    same_size(g1, g2)?;
    if g1 == g2 {
        return Ok(true);
    }
    if g1.skeleton() != g2.skeleton() {
        return Ok(false);
    }
    Ok(iec_class(g1).binary_search(g2).is_ok())
}

/// Deduplicated per-target d-separation families over `universe`.
pub fn interventional_family_set(
    g: &Dag,
    targets: &[InterventionTarget],
    universe: NodeSet,
    marginal_only: bool,
) -> Result<BTreeSet<DsepFamily>> {
    targets.iter().map(|&t| g.intervene(t)?.dsep_family(universe, marginal_only)).collect()
}

/// Measurement-model form: the set of distinct observed dependency graphs.
/// Two models agree on this iff their marginal observed families agree.
pub fn model_family_set(g: &MeasurementModel, targets: &[InterventionTarget]) -> Result<BTreeSet<Udg>> {
    targets.iter().map(|&t| udg_from_graph(g, t)).collect()
}

/// Target for the reversed graph that reproduces `target` on the original,
/// for an isolated edge `a -> b`. Intervening on `a` in the original leaves
/// it unchanged, as does intervening on `b` after the reversal; intervening
/// on `b` in the original cuts the edge, as does intervening on `a` after.
pub fn remap_target(target: InterventionTarget, edge: (usize, usize)) -> InterventionTarget {
    let (a, b) = edge;
    match target.get() {
        Some(v) if v == a => InterventionTarget::node(b),
        Some(v) if v == b => InterventionTarget::node(a),
        _ => target,
    }
}

/// Reverses the isolated `edge` and checks that every target's full
/// singleton d-separation family is reproduced by its remapped target.
pub fn theorem_remap_check(g1: &Dag, edge: (usize, usize), targets: &[InterventionTarget]) -> Result<bool> {
    let (a, b) = edge;
    if g1.edge_class(a, b)? != EdgeClass::Isolated {
        return Err(Error::NotIsolated(a, b));
    }
    guard_exhaustive(g1)?;
    let g2 = g1.reverse_edge(a, b)?;
    for &t in targets {
        let f1 = g1.intervene(t)?.dsep_family(g1.nodes(), false)?;
        let f2 = g2.intervene(remap_target(t, edge))?.dsep_family(g2.nodes(), false)?;
        if f1 != f2 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn guard_exhaustive(g: &Dag) -> Result<()> {
    if g.node_count() > EXHAUSTIVE_FAMILY_GUARD {
        return Err(Error::GuardExceeded {
            what: "exhaustive d-separation family",
            size: g.node_count(),
            limit: EXHAUSTIVE_FAMILY_GUARD,
        });
    }
    Ok(())
}

/// Full singleton d-separation family for `∅` and every single-node target.
pub fn target_families(g: &Dag) -> Result<Vec<(InterventionTarget, DsepFamily)>> {
    guard_exhaustive(g)?;
    complete_targets(g.node_count())
        .into_iter()
        .map(|t| Ok((t, g.intervene(t)?.dsep_family(g.nodes(), false)?)))
        .collect()
}

/// First single-node target of `g1` whose family no target of `g2` matches.
pub fn distinguishing_target_from(
    f1: &[(InterventionTarget, DsepFamily)],
    f2: &[(InterventionTarget, DsepFamily)],
) -> Option<InterventionTarget> {
    f1.iter().filter(|(t, _)| !t.is_empty()).find(|(_, fam)| f2.iter().all(|(_, other)| other != fam)).map(|(t, _)| *t)
}

pub fn distinguishing_target(g1: &Dag, g2: &Dag) -> Result<Option<InterventionTarget>> {
    same_size(g1, g2)?;
    Ok(distinguishing_target_from(&target_families(g1)?, &target_families(g2)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeAddition {
    Bipartite { latent: usize, observed: usize },
    Latent { from: usize, to: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalityReport {
    /// No single-edge addition preserves the family set.
    pub maximal: bool,
    pub violations: Vec<EdgeAddition>,
}

impl MaximalityReport {
    pub fn first_violation(&self) -> Option<EdgeAddition> {
        self.violations.first().copied()
    }
}

/// Single-edge maximality: adds each absent bipartite edge and each absent
/// latent edge that keeps the latent graph acyclic. An addition is a
/// violation when the enlarged model still meets the latent signature
/// condition and induces the same set of observed dependency graphs.
pub fn maximality_check(g: &MeasurementModel, targets: &[InterventionTarget]) -> Result<MaximalityReport> {
    if g.m() > MAXIMALITY_GUARD {
        return Err(Error::GuardExceeded { what: "maximality check", size: g.m(), limit: MAXIMALITY_GUARD });
    }
    let base = model_family_set(g, targets)?;
    let same = |h: &MeasurementModel| -> Result<bool> {
        Ok(h.satisfies_latent_signature(targets)? && model_family_set(h, targets)? == base)
    };
    let mut violations = Vec::new();
    for latent in 0..g.m() {
        for observed in NodeSet::full(g.n()).difference(g.cover(latent)) {
            let mut covers = g.covers().to_vec();
            covers[latent].insert(observed);
            if same(&g.with_covers(covers)?)? {
                violations.push(EdgeAddition::Bipartite { latent, observed });
            }
        }
    }
    let dag = g.latent_dag();
    for from in 0..g.m() {
        for to in 0..g.m() {
            if from == to || dag.is_adjacent(from, to) {
                continue;
            }
            let mut bigger = dag.clone();
            if bigger.add_edge(from, to).is_err() {
                continue;
            }
            if same(&g.with_latent(bigger)?)? {
                violations.push(EdgeAddition::Latent { from, to });
            }
        }
    }
    Ok(MaximalityReport { maximal: violations.is_empty(), violations })
}
