// SPDX-License-Identifier: Apache-2.0
//! Random measurement models, quadratic SEM sampling and SHD.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::independence::SampleMatrix;
use crate::model::{InterventionTarget, MeasurementModel};
use crate::nodeset::{NodeSet, MAX_NODES};
use crate::recovery::RecoveredModel;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from a seed and two counters.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ a) ^ b.rotate_left(32))
}

pub fn rng_for(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PureChild,
    SingleSource,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure_child" | "pure-child" => Ok(Regime::PureChild),
            "single_source" | "single-source" => Ok(Regime::SingleSource),
            other => Err(Error::InvalidConfig(format!("unknown regime '{other}'"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::PureChild => "pure_child",
            Regime::SingleSource => "single_source",
        })
    }
}

pub const DEFAULT_LATENT_EDGE_DENSITY: f64 = 0.5;
pub const DEFAULT_BIPARTITE_EXTRA_DENSITY: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub m: usize,
    pub n: usize,
    pub regime: Regime,
    pub latent_edge_density: f64,
    pub bipartite_extra_density: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(m: usize, n: usize, regime: Regime, seed: u64) -> Self {
        GeneratorConfig {
            m,
            n,
            regime,
            latent_edge_density: DEFAULT_LATENT_EDGE_DENSITY,
            bipartite_extra_density: DEFAULT_BIPARTITE_EXTRA_DENSITY,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n < self.m {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= m <= n for a pure child per latent, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.m + self.n > MAX_NODES {
            return Err(Error::TooManyNodes(self.m + self.n));
        }
        for (name, p) in [
            ("latent_edge_density", self.latent_edge_density),
            ("bipartite_extra_density", self.bipartite_extra_density),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Random measurement model. Every latent gets one dedicated pure child;
/// the other observed nodes take each latent as a parent with
/// `bipartite_extra_density`, with at least one parent forced. Latent
/// edges follow a random order. In the single-source regime every latent
/// after the first receives at least one parent, so only the first is a
/// source.
pub fn gen_random_mm(cfg: &GeneratorConfig) -> Result<MeasurementModel> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (m, n) = (cfg.m, cfg.n);

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let mut latent = Dag::new(m)?;
    for k in 1..m {
        let to = order[k];
        let mut any = false;
        for &from in &order[..k] {
            if rng.random_bool(cfg.latent_edge_density) {
                latent.add_edge(from, to)?;
                any = true;
            }
        }
        if cfg.regime == Regime::SingleSource && !any {
            let from = order[rng.random_range(0..k)];
            latent.add_edge(from, to)?;
        }
    }

    let mut observed: Vec<usize> = (0..n).collect();
    observed.shuffle(&mut rng);
    let mut covers = vec![NodeSet::EMPTY; m];
    for (h, &x) in observed[..m].iter().enumerate() {
        covers[h].insert(x);
    }
    for &x in &observed[m..] {
        let mut any = false;
        for cover in covers.iter_mut() {
            if rng.random_bool(cfg.bipartite_extra_density) {
                cover.insert(x);
                any = true;
            }
        }
        if !any {
            covers[rng.random_range(0..m)].insert(x);
        }
    }
    MeasurementModel::from_parts(latent, n, covers)
}

/// Quadratic structural equations `V = Σ c·pa² + ε` over the joint DAG.
#[derive(Clone, Debug, PartialEq)]
pub struct SemSpec {
    pub graph: MeasurementModel,
    /// Coefficient per joint-DAG edge (latents first, then observed).
    pub coefficients: BTreeMap<(usize, usize), f64>,
    pub noise_scale: f64,
    pub intervention_mean: f64,
    pub intervention_scale: f64,
}

const COEF_STREAM: u64 = u64::MAX;

impl SemSpec {
    /// Coefficients uniform in [0.5, 1.5] with a random sign; standard
    /// normal noise; intervened nodes drawn from N(2, 1).
    pub fn random(graph: MeasurementModel, seed: u64) -> SemSpec {
        let mut rng = rng_for(seed, COEF_STREAM, 0);
        let coefficients = graph
            .joint_dag()
            .edges()
            .into_iter()
            .map(|e| {
                let mag: f64 = rng.random_range(0.5..=1.5);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (e, sign * mag)
            })
            .collect();
        SemSpec { graph, coefficients, noise_scale: 1.0, intervention_mean: 2.0, intervention_scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.noise_scale, self.intervention_scale].iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::InvalidConfig("noise and intervention scales must be positive".into()));
        }
        Ok(())
    }
}

fn target_stream(t: InterventionTarget) -> u64 {
    t.get().map_or(0, |v| v as u64 + 1)
}

/// Ancestral sampling of the observed columns under a hard intervention.
///
/// Each node draws from its own generator keyed by `(seed, target, node)`,
/// so results do not depend on evaluation order.
pub fn sem_sample(spec: &SemSpec, target: InterventionTarget, count: usize, seed: u64) -> Result<SampleMatrix> {
    let mut columns = sem_sample_joint(spec, target, count, seed)?.into_columns();
    SampleMatrix::from_columns(columns.split_off(spec.graph.m()))
}

/// Like [`sem_sample`] but returns every joint-DAG column, latents first.
pub fn sem_sample_joint(spec: &SemSpec, target: InterventionTarget, count: usize, seed: u64) -> Result<SampleMatrix> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    let joint = spec.graph.intervene(target)?.joint_dag();
    let noise = Normal::new(0.0, spec.noise_scale).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let shock = Normal::new(spec.intervention_mean, spec.intervention_scale)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); joint.node_count()];
    for v in joint.topological_order() {
        let mut rng = rng_for(seed, target_stream(target), v as u64);
        let col: Vec<f64> = if target.get() == Some(v) {
            (0..count).map(|_| shock.sample(&mut rng)).collect()
        } else {
            let parents: Vec<(usize, f64)> = joint.parents(v).iter().map(|p| (p, spec.coefficients[&(p, v)])).collect();
            (0..count)
                .map(|r| {
                    let drive: f64 = parents.iter().map(|&(p, c)| c * values[p][r] * values[p][r]).sum();
                    drive + noise.sample(&mut rng)
                })
                .collect()
        };
        values[v] = col;
    }
    SampleMatrix::from_columns(values)
}

/// Exact search is used up to this many latents; beyond it latents are
/// matched on cover cost alone.
pub const SHD_EXACT_LIMIT: usize = 10;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    None,
    Forward,
    Backward,
    Undirected,
}

struct Padded {
    covers: Vec<NodeSet>,
    // status[i][j] describes the pair (i, j) as seen from i.
    status: Vec<Vec<Status>>,
}

impl Padded {
    fn new(r: &RecoveredModel, k: usize) -> Padded {
        let mut covers = r.covers.clone();
        covers.resize(k, NodeSet::EMPTY);
        let mut status = vec![vec![Status::None; k]; k];
        for &(a, b) in &r.pdag.directed {
            status[a][b] = Status::Forward;
            status[b][a] = Status::Backward;
        }
        for &(a, b) in &r.pdag.undirected {
            status[a][b] = Status::Undirected;
            status[b][a] = Status::Undirected;
        }
        Padded { covers, status }
    }
}

/// Structural Hamming distance between two recovered models.
///
/// Bipartite edges count their symmetric difference; each latent pair costs
/// one when its status (absent, either direction, undirected) differs.
/// Latent labels are matched to minimize the total, padding the smaller
/// model with childless latents.
pub fn shd(a: &RecoveredModel, b: &RecoveredModel) -> usize {
    let k = a.m().max(b.m());
    let pa = Padded::new(a, k);
    let pb = Padded::new(b, k);
    let cover_cost: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| pa.covers[i].difference(pb.covers[j]).len() + pb.covers[j].difference(pa.covers[i]).len())
                .collect()
        })
        .collect();
    let seed = cover_matching(&cover_cost);
    let seed_cost = total_cost(&pa, &pb, &cover_cost, &seed);
    if k > SHD_EXACT_LIMIT {
        return seed_cost;
    }
    let mut best = seed_cost;
    let mut perm = Vec::with_capacity(k);
    search(&pa, &pb, &cover_cost, &mut perm, 0, NodeSet::EMPTY, &mut best);
    best
}

/// SHD against the canonicalized ground truth.
pub fn shd_to_truth(recovered: &RecoveredModel, truth: &MeasurementModel) -> usize {
    shd(recovered, &RecoveredModel::from_truth(truth))
}

fn total_cost(pa: &Padded, pb: &Padded, cover_cost: &[Vec<usize>], perm: &[usize]) -> usize {
    let k = perm.len();
    let mut cost: usize = (0..k).map(|i| cover_cost[i][perm[i]]).sum();
    for i in 0..k {
        for j in i + 1..k {
            if pa.status[i][j] != pb.status[perm[i]][perm[j]] {
                cost += 1;
            }
        }
    }
    cost
}

fn search(
    pa: &Padded,
    pb: &Padded,
    cover_cost: &[Vec<usize>],
    perm: &mut Vec<usize>,
    cost: usize,
    used: NodeSet,
    best: &mut usize,
) {
    let i = perm.len();
    let k = cover_cost.len();
    if i == k {
        *best = (*best).min(cost);
        return;
    }
    for j in NodeSet::full(k).difference(used) {
        let mut c = cost + cover_cost[i][j];
        for (prev, &pj) in perm.iter().enumerate() {
            if pa.status[prev][i] != pb.status[pj][j] {
                c += 1;
            }
        }
        if c < *best {
            perm.push(j);
            search(pa, pb, cover_cost, perm, c, used.with(j), best);
            perm.pop();
        }
    }
}

/// Minimum-cost perfect matching on a square cost matrix, by DP over
/// subsets of the right-hand side. Returns `perm[i] = j`.
fn cover_matching(cost: &[Vec<usize>]) -> Vec<usize> {
    let k = cost.len();
    if k > 20 {
        // Too large for the subset DP; fall back to the identity.
        return (0..k).collect();
    }
    let states = 1usize << k;
    let mut dp = vec![usize::MAX; states];
    let mut choice = vec![0usize; states];
    dp[0] = 0;
    for mask in 0..states {
        if dp[mask] == usize::MAX {
            continue;
        }
        let i = mask.count_ones() as usize;
        if i == k {
            continue;
        }
        for (j, &c) in cost[i].iter().enumerate() {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                if dp[mask] + c < dp[next] {
                    dp[next] = dp[mask] + c;
                    choice[next] = j;
                }
            }
        }
    }
    let mut perm = vec![0; k];
    let mut mask = states - 1;
    for i in (0..k).rev() {
        let j = choice[mask];
        perm[i] = j;
        mask &= !(1 << j);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::LatentPdag;

    fn model(covers: &[&[usize]], directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> RecoveredModel {
        let mut pdag = LatentPdag::empty(covers.len());
        pdag.directed = directed.iter().copied().collect();
        pdag.undirected = undirected.iter().copied().collect();
        RecoveredModel { covers: covers.iter().map(|c| c.iter().copied().collect()).collect(), pdag }
    }

    #[test]
    fn generator_guarantees() {
        for seed in 0..50 {
            let g = gen_random_mm(&GeneratorConfig::new(3, 6, Regime::PureChild, seed)).unwrap();
            assert!(g.has_pure_children());
            let s = gen_random_mm(&GeneratorConfig::new(4, 8, Regime::SingleSource, seed)).unwrap();
            assert_eq!(s.latent_dag().sources().len(), 1);
            assert!(s.has_pure_children());
        }
        assert!(gen_random_mm(&GeneratorConfig::new(3, 2, Regime::PureChild, 0)).is_err());
        let mut bad = GeneratorConfig::new(2, 4, Regime::PureChild, 0);
        bad.latent_edge_density = 1.5;
        assert!(gen_random_mm(&bad).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = gen_random_mm(&GeneratorConfig::new(2, 5, Regime::PureChild, 9)).unwrap();
        let spec = SemSpec::random(g, 9);
        let a = sem_sample(&spec, InterventionTarget::node(1), 100, 4).unwrap();
        let b = sem_sample(&spec, InterventionTarget::node(1), 100, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cols(), 5);
        let c = sem_sample(&spec, InterventionTarget::EMPTY, 100, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shd_basics() {
        let a = model(&[&[0, 1], &[2]], &[(0, 1)], &[]);
        assert_eq!(shd(&a, &a), 0);
        let reversed = model(&[&[0, 1], &[2]], &[(1, 0)], &[]);
        assert_eq!(shd(&a, &reversed), 1);
        let undirected = model(&[&[0, 1], &[2]], &[], &[(0, 1)]);
        assert_eq!(shd(&a, &undirected), 1);
        // Same structure with latents listed in the other order.
        let relabeled = model(&[&[2], &[0, 1]], &[(1, 0)], &[]);
        assert_eq!(shd(&a, &relabeled), 0);
        // An extra latent with one child and no edges.
        let extra = model(&[&[0, 1], &[2], &[3]], &[(0, 1)], &[]);
        assert_eq!(shd(&a, &extra), 1);
        assert_eq!(shd(&extra, &a), 1);
    }

    #[test]
    fn matching_dp_is_optimal() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let perm = cover_matching(&cost);
        let total: usize = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5);
    }
}
