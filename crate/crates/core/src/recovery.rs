// SPDX-License-Identifier: Apache-2.0
//! Bipartite recovery, latent marginal families, skeleton and orientation.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equivalence::iec_class;
use crate::error::{Error, Result};
use crate::model::MeasurementModel;
use crate::nodeset::{sort_lex, NodeSet};
use crate::subsets::{is_replaceable, maximal_valid_subsets, minimum_complete_collection, nearest_complete_collection};
use crate::udg::{CliqueFamily, Udg};

pub type LatentPair = (usize, usize);

fn pair(a: usize, b: usize) -> LatentPair {
    (a.min(b), a.max(b))
}

/// Which sufficient condition the bipartite step relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Non-replaceable maximal valid subsets.
    NoImaginary,
    /// Minimum-cardinality complete collection.
    PureChild,
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_imaginary" | "no-imaginary" => Ok(Route::NoImaginary),
            "pure_child" | "pure-child" => Ok(Route::PureChild),
            other => Err(Error::InvalidConfig(format!("unknown route '{other}'"))),
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::NoImaginary => "no_imaginary",
            Route::PureChild => "pure_child",
        })
    }
}

/// Every non-replaceable maximal valid subset.
pub fn recover_bipartite_no_imaginary(fam: &CliqueFamily) -> Vec<NodeSet> {
    let maximals = maximal_valid_subsets(fam);
    maximals.iter().copied().filter(|&x| !is_replaceable(x, &maximals).expect("x comes from maximals")).collect()
}

/// The smallest complete collection of maximal valid subsets.
pub fn recover_bipartite_pure_child(fam: &CliqueFamily, guard: usize) -> Result<Vec<NodeSet>> {
    let maximals = maximal_valid_subsets(fam);
    match minimum_complete_collection(fam, &maximals, guard)? {
        Some(c) => Ok(c.members),
        None => Err(Error::Undecided("no complete collection exists".into())),
    }
}

/// [`recover_bipartite_pure_child`] for estimated graphs; see
/// [`nearest_complete_collection`].
pub fn recover_bipartite_pure_child_tolerant(fam: &CliqueFamily, guard: usize) -> Result<Vec<NodeSet>> {
    let maximals = maximal_valid_subsets(fam);
    nearest_complete_collection(fam, &maximals, guard)?
        .ok_or_else(|| Error::Undecided("maximal valid subsets do not cover every node".into()))
}

/// Per distribution, the latent pairs that are marginally d-separated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarginalLatentFamily {
    pub m: usize,
    pub entries: Vec<BTreeSet<LatentPair>>,
}

impl MarginalLatentFamily {
    /// Deduplicates and sorts the entries.
    pub fn new(m: usize, entries: impl IntoIterator<Item = BTreeSet<LatentPair>>) -> Self {
        let distinct: BTreeSet<BTreeSet<LatentPair>> = entries.into_iter().collect();
        MarginalLatentFamily { m, entries: distinct.into_iter().collect() }
    }
}

/// Pair `(i, j)` is in a distribution's entry iff no maximal clique of that
/// distribution contains `covers[i] ∪ covers[j]`.
pub fn latent_marginal_family(fam: &CliqueFamily, covers: &[NodeSet]) -> MarginalLatentFamily {
    let m = covers.len();
    let entries = fam.entries().iter().map(|e| {
        let mut set = BTreeSet::new();
        for i in 0..m {
            for j in i + 1..m {
                let u = covers[i].union(covers[j]);
                if !e.cliques.iter().any(|c| u.is_subset(*c)) {
                    set.insert((i, j));
                }
            }
        }
        set
    });
    MarginalLatentFamily::new(m, entries)
}

/// Pairs found in exactly one entry, after the one-distinct-entry check.
fn singly_occurring(mfam: &MarginalLatentFamily) -> Option<Vec<BTreeSet<LatentPair>>> {
    if mfam.entries.len() <= 1 {
        return None;
    }
    let mut counts: BTreeMap<LatentPair, usize> = BTreeMap::new();
    for e in &mfam.entries {
        for &p in e {
            *counts.entry(p).or_default() += 1;
        }
    }
    Some(mfam.entries.iter().map(|e| e.iter().copied().filter(|p| counts[p] == 1).collect()).collect())
}

/// Skeleton of the latent graph.
pub fn algorithm1_skeleton(mfam: &MarginalLatentFamily) -> BTreeSet<LatentPair> {
    match singly_occurring(mfam) {
        None => BTreeSet::new(),
        Some(entries) => entries.into_iter().flatten().collect(),
    }
}

/// Partially directed latent graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatentPdag {
    pub m: usize,
    pub directed: BTreeSet<(usize, usize)>,
    pub undirected: BTreeSet<LatentPair>,
    pub inferred_targets: BTreeSet<usize>,
}

impl LatentPdag {
    pub fn empty(m: usize) -> Self {
        LatentPdag { m, ..Default::default() }
    }

    pub fn skeleton(&self) -> BTreeSet<LatentPair> {
        self.directed.iter().map(|&(a, b)| pair(a, b)).chain(self.undirected.iter().copied()).collect()
    }

    /// Relabels latents by `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> LatentPdag {
        LatentPdag {
            m: self.m,
            directed: self.directed.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
            undirected: self.undirected.iter().map(|&(a, b)| pair(perm[a], perm[b])).collect(),
            inferred_targets: self.inferred_targets.iter().map(|&t| perm[t]).collect(),
        }
    }
}

/// Skeleton plus orientations from collider and propagation steps.
pub fn algorithm2_orient(mfam: &MarginalLatentFamily) -> Result<LatentPdag> {
    let mut out = LatentPdag::empty(mfam.m);
    let Some(entries) = singly_occurring(mfam) else {
        return Ok(out);
    };
    let mut entries: Vec<BTreeSet<LatentPair>> = entries.into_iter().filter(|e| !e.is_empty()).collect();

    // Colliders: the pairs of a multi-pair entry share the intervened node.
    let mut singles = Vec::new();
    for e in entries.drain(..) {
        if e.len() == 1 {
            singles.push(*e.first().expect("len 1"));
            continue;
        }
        let common =
            e.iter().map(|&(a, b)| NodeSet::from([a, b])).reduce(NodeSet::intersection).expect("nonempty entry");
        let hub = match (common.len(), common.first()) {
            (1, Some(h)) => h,
            _ => return Err(Error::InconsistentInput(format!("entry {e:?} has no latent shared by all pairs"))),
        };
        out.inferred_targets.insert(hub);
        for &(a, b) in &e {
            let other = if a == hub { b } else { a };
            out.directed.insert((other, hub));
        }
    }

    // Propagation: a singleton entry touching a known target was caused by
    // intervening on its other endpoint.
    let mut changed = true;
    while changed {
        changed = false;
        let mut rest = Vec::with_capacity(singles.len());
        for (h1, h2) in singles.drain(..) {
            if out.inferred_targets.contains(&h1) {
                out.directed.insert((h1, h2));
                out.inferred_targets.insert(h2);
                changed = true;
            } else if out.inferred_targets.contains(&h2) {
                out.directed.insert((h2, h1));
                out.inferred_targets.insert(h1);
                changed = true;
            } else {
                rest.push((h1, h2));
            }
        }
        singles = rest;
    }
    out.undirected.extend(singles);
    Ok(out)
}

/// Recovered covers (one per latent) and the latent graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RecoveredModel {
    pub covers: Vec<NodeSet>,
    pub pdag: LatentPdag,
}

#[derive(Serialize, Deserialize)]
struct RecoveredJson {
    covers: Vec<NodeSet>,
    directed: Vec<(usize, usize)>,
    undirected: Vec<(usize, usize)>,
    m: usize,
}

impl Serialize for RecoveredModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RecoveredJson {
            covers: self.covers.clone(),
            directed: self.pdag.directed.iter().copied().collect(),
            undirected: self.pdag.undirected.iter().copied().collect(),
            m: self.m(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RecoveredModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RecoveredJson::deserialize(d)?;
        if raw.m != raw.covers.len() {
            return Err(serde::de::Error::custom("m does not match the number of covers"));
        }
        let m = raw.m;
        if raw.directed.iter().chain(&raw.undirected).any(|&(a, b)| a >= m || b >= m || a == b) {
            return Err(serde::de::Error::custom("latent edge out of range"));
        }
        Ok(RecoveredModel {
            covers: raw.covers,
            pdag: LatentPdag {
                m,
                directed: raw.directed.into_iter().collect(),
                undirected: raw.undirected.into_iter().map(|(a, b)| pair(a, b)).collect(),
                inferred_targets: BTreeSet::new(),
            },
        })
    }
}

impl RecoveredModel {
    pub fn m(&self) -> usize {
        self.covers.len()
    }

    /// Orders latents by their covers and relabels the graph to match.
    pub fn canonical(covers: Vec<NodeSet>, pdag: LatentPdag) -> RecoveredModel {
        let mut idx: Vec<usize> = (0..covers.len()).collect();
        idx.sort_by(|&a, &b| covers[a].lex_cmp(&covers[b]));
        let mut perm = vec![0; covers.len()];
        for (new, &old) in idx.iter().enumerate() {
            perm[old] = new;
        }
        RecoveredModel { covers: idx.iter().map(|&i| covers[i]).collect(), pdag: pdag.relabel(&perm) }
    }

    /// The ground truth as the pipeline can at best report it: edges whose
    /// direction differs somewhere in the isolated equivalence class of the
    /// latent graph are undirected.
    pub fn from_truth(truth: &MeasurementModel) -> RecoveredModel {
        let latent = truth.latent_dag();
        let class = iec_class(latent);
        let mut pdag = LatentPdag::empty(truth.m());
        for (a, b) in latent.edges() {
            if class.iter().all(|g| g.has_edge(a, b)) {
                pdag.directed.insert((a, b));
            } else {
                pdag.undirected.insert(pair(a, b));
            }
        }
        RecoveredModel::canonical(truth.covers().to_vec(), pdag)
    }
}

/// Intermediate products of [`full_pipeline`], kept for diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineTrace {
    pub family: CliqueFamily,
    pub marginal: MarginalLatentFamily,
    pub recovered: RecoveredModel,
}

pub fn full_pipeline_traced(udgs: &[Udg], route: Route, guard: usize) -> Result<PipelineTrace> {
    let family = CliqueFamily::new(udgs)?;
    let mut covers = match route {
        Route::NoImaginary => recover_bipartite_no_imaginary(&family),
        Route::PureChild => recover_bipartite_pure_child(&family, guard)?,
    };
    sort_lex(&mut covers);
    let marginal = latent_marginal_family(&family, &covers);
    let pdag = algorithm2_orient(&marginal)?;
    let recovered = RecoveredModel { covers, pdag };
    Ok(PipelineTrace { family, marginal, recovered })
}

/// Clique family, bipartite route, latent marginal family, orientation.
pub fn full_pipeline(udgs: &[Udg], route: Route, guard: usize) -> Result<RecoveredModel> {
    Ok(full_pipeline_traced(udgs, route, guard)?.recovered)
}
