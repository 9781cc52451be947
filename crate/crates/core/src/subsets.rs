// SPDX-License-Identifier: Apache-2.0
//! Valid, maximal valid, replaceable, fractured and imaginary subsets.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::MeasurementModel;
use crate::nodeset::{sort_lex, NodeSet};
use crate::udg::{CliqueFamily, Udg};

/// Default cap on the number of maximal valid subsets searched exhaustively.
pub const DEFAULT_SEARCH_GUARD: usize = 20;

/// Contained in some maximal clique of every distribution.
pub fn is_valid(x: NodeSet, fam: &CliqueFamily) -> bool {
    !x.is_empty() && fam.entries().iter().all(|e| e.cliques.iter().any(|c| x.is_subset(*c)))
}

/// Intersection of every Ω clique containing `x`, or `None` if none does.
pub fn clique_closure(x: NodeSet, fam: &CliqueFamily) -> Option<NodeSet> {
    fam.omega().iter().filter(|c| x.is_subset(**c)).copied().reduce(NodeSet::intersection)
}

/// `x` is valid and no valid strict superset sits inside every Ω clique
/// containing `x`. Since the closure of a valid set is itself valid, this is
/// the same as `x` being its own closure.
pub fn is_maximal_valid(x: NodeSet, fam: &CliqueFamily) -> bool {
    is_valid(x, fam) && clique_closure(x, fam) == Some(x)
}

/// All maximal valid subsets, lexicographically ordered.
///
/// Every closure is an intersection of Ω cliques, so the candidates are the
/// intersection-closed hull of Ω, computed by a pairwise fixpoint.
pub fn maximal_valid_subsets(fam: &CliqueFamily) -> Vec<NodeSet> {
    let mut hull: BTreeSet<NodeSet> = fam.omega().iter().copied().collect();
    let mut frontier: Vec<NodeSet> = hull.iter().copied().collect();
    while !frontier.is_empty() {
        let snapshot: Vec<NodeSet> = hull.iter().copied().collect();
        let mut next = Vec::new();
        for a in &frontier {
            for b in &snapshot {
                let c = a.intersection(*b);
                if !c.is_empty() && hull.insert(c) {
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<NodeSet> = hull.into_iter().filter(|&s| is_maximal_valid(s, fam)).collect();
    sort_lex(&mut out);
    out
}

fn require_member(x: NodeSet, maximals: &[NodeSet]) -> Result<()> {
    if maximals.contains(&x) {
        Ok(())
    } else {
        Err(Error::NotMaximalValid(x.to_string()))
    }
}

/// Every maximal valid strict superset of `x`, lexicographically ordered.
pub fn replaceable_witnesses(x: NodeSet, maximals: &[NodeSet]) -> Result<Vec<NodeSet>> {
    require_member(x, maximals)?;
    let mut supers: Vec<NodeSet> = maximals.iter().copied().filter(|s| x.is_strict_subset(*s)).collect();
    sort_lex(&mut supers);
    Ok(supers)
}

pub fn is_replaceable(x: NodeSet, maximals: &[NodeSet]) -> Result<bool> {
    require_member(x, maximals)?;
    Ok(maximals.iter().any(|s| x.is_strict_subset(*s)))
}

/// Cliques equal to the union of the members of `s` they contain.
pub fn shattered_cliques(s: &[NodeSet], cliques: &[NodeSet]) -> Vec<NodeSet> {
    cliques
        .iter()
        .copied()
        .filter(|&c| {
            let u = s.iter().filter(|m| m.is_subset(c)).fold(NodeSet::EMPTY, |acc, m| acc.union(*m));
            u == c && !c.is_empty()
        })
        .collect()
}

/// Whether the cliques of `udg` shattered by `s` cover every edge and every
/// vertex of `udg`.
///
/// A clique shattered by a subcollection contains, for each of its edges
/// `(a, b)`, members `S1 ∋ a` and `S2 ∋ b` whose union is again a shattered
/// clique, so it suffices to look at pairwise unions.
pub fn shattered_cover(s: &[NodeSet], udg: &Udg) -> bool {
    let members: Vec<NodeSet> = s.iter().copied().filter(|m| udg.is_clique(*m)).collect();
    let covered = members.iter().fold(NodeSet::EMPTY, |acc, m| acc.union(*m));
    covered == NodeSet::full(udg.n()) && udg.edges().into_iter().all(|(a, b)| edge_shattered(&members, udg, a, b))
}

/// Edges of `udg` lying in no clique shattered by `s`.
pub fn uncovered_edges(s: &[NodeSet], udg: &Udg) -> usize {
    let members: Vec<NodeSet> = s.iter().copied().filter(|m| udg.is_clique(*m)).collect();
    udg.edges().into_iter().filter(|&(a, b)| !edge_shattered(&members, udg, a, b)).count()
}

fn edge_shattered(members: &[NodeSet], udg: &Udg, a: usize, b: usize) -> bool {
    members
        .iter()
        .filter(|m| m.contains(a))
        .any(|s1| members.iter().filter(|m| m.contains(b)).any(|s2| udg.is_clique(s1.union(*s2))))
}

fn complete_unchecked(s: &[NodeSet], fam: &CliqueFamily) -> bool {
    fam.udgs().all(|u| shattered_cover(s, u))
}

/// A collection of maximal valid subsets whose shattered cliques cover
/// every distribution's dependency graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompleteCollection {
    pub members: Vec<NodeSet>,
}

pub fn is_complete_collection(s: &[NodeSet], fam: &CliqueFamily) -> Result<bool> {
    if let Some(bad) = s.iter().find(|m| !is_maximal_valid(**m, fam)) {
        return Err(Error::NotMaximalValid(bad.to_string()));
    }
    Ok(complete_unchecked(s, fam))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FracturedReport {
    pub fractured: bool,
    pub witness: Option<CompleteCollection>,
}

/// Decides whether `x` is fractured and returns a verified witness.
///
/// Completeness only gets easier as members are added, so a complete
/// collection avoiding `x` exists iff the collection of every maximal valid
/// subset not inside `x` is complete. The witness is then pruned greedily to
/// an inclusion-minimal collection.
pub fn fractured_report(x: NodeSet, fam: &CliqueFamily, maximals: &[NodeSet]) -> Result<FracturedReport> {
    require_member(x, maximals)?;
    let mut pool: Vec<NodeSet> = maximals.iter().copied().filter(|s| !s.is_subset(x)).collect();
    if !complete_unchecked(&pool, fam) {
        return Ok(FracturedReport { fractured: false, witness: None });
    }
    let mut i = 0;
    while i < pool.len() {
        let removed = pool.remove(i);
        if !complete_unchecked(&pool, fam) {
            pool.insert(i, removed);
            i += 1;
        }
    }
    debug_assert!(pool.iter().all(|s| !s.is_subset(x)));
    Ok(FracturedReport { fractured: true, witness: Some(CompleteCollection { members: pool }) })
}

/// Smallest complete collection over `maximals`, searched by increasing
/// cardinality. Ties at the minimum cardinality resolve to the
/// lexicographically first combination.
pub fn minimum_complete_collection(
    fam: &CliqueFamily,
    maximals: &[NodeSet],
    guard: usize,
) -> Result<Option<CompleteCollection>> {
    if maximals.len() > guard {
        return Err(Error::Undecided(format!(
            "{} maximal valid subsets exceed the search guard of {guard}",
            maximals.len()
        )));
    }
    let full = NodeSet::full(fam.n());
    for k in 1..=maximals.len() {
        for combo in maximals.iter().copied().combinations(k) {
            let union = combo.iter().fold(NodeSet::EMPTY, |acc, s| acc.union(*s));
            if union == full && complete_unchecked(&combo, fam) {
                return Ok(Some(CompleteCollection { members: combo }));
            }
        }
    }
    Ok(None)
}

/// Noise-tolerant variant of [`minimum_complete_collection`] for estimated
/// graphs: the fewest maximal valid subsets covering every vertex, and among
/// those the collection leaving the fewest graph edges outside shattered
/// cliques. On exact input with pure children this selects the same
/// collection, since the complete one leaves nothing uncovered.
pub fn nearest_complete_collection(
    fam: &CliqueFamily,
    maximals: &[NodeSet],
    guard: usize,
) -> Result<Option<Vec<NodeSet>>> {
    if maximals.len() > guard {
        return Err(Error::Undecided(format!(
            "{} maximal valid subsets exceed the search guard of {guard}",
            maximals.len()
        )));
    }
    let full = NodeSet::full(fam.n());
    for k in 1..=maximals.len() {
        let best = maximals
            .iter()
            .copied()
            .combinations(k)
            .filter(|combo| combo.iter().fold(NodeSet::EMPTY, |acc, s| acc.union(*s)) == full)
            .map(|combo| (fam.udgs().map(|u| uncovered_edges(&combo, u)).sum::<usize>(), combo))
            .min_by_key(|(deficit, _)| *deficit);
        if let Some((_, members)) = best {
            return Ok(Some(members));
        }
    }
    Ok(None)
}

/// No latent's child set contains `x`. Needs the ground truth.
pub fn is_imaginary(x: NodeSet, truth: &MeasurementModel) -> bool {
    covering_latent(x, truth).is_none()
}

pub fn covering_latent(x: NodeSet, truth: &MeasurementModel) -> Option<usize> {
    truth.covers().iter().position(|c| x.is_subset(*c))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetReport {
    pub subset: NodeSet,
    pub valid: bool,
    pub maximal_valid: bool,
    pub replaceable: bool,
    pub fractured: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imaginary: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replaceable_witnesses: Vec<NodeSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractured_witness: Option<CompleteCollection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covering_latent: Option<usize>,
}

/// Classifies `x`. The replaceable and fractured flags are only meaningful
/// for maximal valid subsets and are false otherwise.
pub fn subset_report(
    x: NodeSet,
    fam: &CliqueFamily,
    maximals: &[NodeSet],
    truth: Option<&MeasurementModel>,
) -> Result<SubsetReport> {
    let valid = is_valid(x, fam);
    let maximal_valid = maximals.contains(&x);
    let (replaceable_witnesses, fractured) = if maximal_valid {
        (replaceable_witnesses(x, maximals)?, fractured_report(x, fam, maximals)?)
    } else {
        (Vec::new(), FracturedReport { fractured: false, witness: None })
    };
    let covering = truth.and_then(|t| covering_latent(x, t));
    Ok(SubsetReport {
        subset: x,
        valid,
        maximal_valid,
        replaceable: !replaceable_witnesses.is_empty(),
        fractured: fractured.fractured,
        imaginary: truth.filter(|_| maximal_valid).map(|_| covering.is_none()),
        replaceable_witnesses,
        fractured_witness: fractured.witness,
        covering_latent: covering,
    })
}

/// Reports for every maximal valid subset.
pub fn analyze(fam: &CliqueFamily, truth: Option<&MeasurementModel>) -> Result<Vec<SubsetReport>> {
    let maximals = maximal_valid_subsets(fam);
    maximals.iter().map(|&x| subset_report(x, fam, &maximals, truth)).collect()
}
