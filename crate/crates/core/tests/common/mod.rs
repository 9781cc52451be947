// SPDX-License-Identifier: Apache-2.0
//! Brute-force oracles shared by the integration tests. They work from the
//! raw edge lists and definitions, without calling the library's algorithms.

#![allow(dead_code)]

use latentgraph::udg::CliqueFamily;
use latentgraph::{Dag, InterventionTarget, MeasurementModel, NodeSet, Udg};
use rand::Rng;

pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    Dag::from_edges(n, &edges).unwrap()
}

fn descendants_inclusive(edges: &[(usize, usize)], v: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut i = 0;
    while i < out.len() {
        let cur = out[i];
        for &(a, b) in edges {
            if a == cur && !out.contains(&b) {
                out.push(b);
            }
        }
        i += 1;
    }
    out
}

/// d-separation by enumerating every simple path in the skeleton.
pub fn dsep_by_paths(g: &Dag, a: usize, b: usize, c: &[usize]) -> bool {
    let edges = g.edges();
    let n = g.node_count();
    let mut path = vec![a];
    let mut on_path = vec![false; n];
    on_path[a] = true;
    !any_active(&edges, n, b, c, &mut path, &mut on_path)
}

fn any_active(
    edges: &[(usize, usize)],
    n: usize,
    target: usize,
    c: &[usize],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
) -> bool {
    let last = *path.last().unwrap();
    if last == target {
        return path_active(edges, c, path);
    }
    for next in 0..n {
        let adjacent = edges.iter().any(|&(x, y)| (x == last && y == next) || (x == next && y == last));
        if adjacent && !on_path[next] {
            path.push(next);
            on_path[next] = true;
            let found = any_active(edges, n, target, c, path, on_path);
            on_path[next] = false;
            path.pop();
            if found {
                return true;
            }
        }
    }
    false
}

fn path_active(edges: &[(usize, usize)], c: &[usize], path: &[usize]) -> bool {
    for w in path.windows(3) {
        let (prev, mid, next) = (w[0], w[1], w[2]);
        let collider = edges.contains(&(prev, mid)) && edges.contains(&(next, mid));
        if collider {
            if !descendants_inclusive(edges, mid).iter().any(|d| c.contains(d)) {
                return false;
            }
        } else if c.contains(&mid) {
            return false;
        }
    }
    true
}

/// Maximal valid subsets straight from the definition, over all 2^n subsets.
pub fn brute_maximal_valid(fam: &CliqueFamily) -> Vec<NodeSet> {
    let n = fam.n();
    let valid = |x: NodeSet| !x.is_empty() && fam.entries().iter().all(|e| e.cliques.iter().any(|c| x.is_subset(*c)));
    let mut out = Vec::new();
    for bits in 1u64..(1 << n) {
        let x = NodeSet::from_bits(bits);
        if !valid(x) {
            continue;
        }
        let containing: Vec<NodeSet> = fam.omega().iter().copied().filter(|c| x.is_subset(*c)).collect();
        let dominated = (1u64..(1 << n))
            .map(NodeSet::from_bits)
            .any(|y| x.is_strict_subset(y) && valid(y) && containing.iter().all(|c| y.is_subset(*c)));
        if !dominated {
            out.push(x);
        }
    }
    out.sort_by(NodeSet::lex_cmp);
    out
}

fn is_clique(u: &Udg, s: NodeSet) -> bool {
    s.iter().all(|a| s.iter().all(|b| a == b || u.has_edge(a, b)))
}

/// Completeness from the definition: every clique (not only maximal ones)
/// that equals the union of some subcollection is shattered; the shattered
/// cliques must cover all edges and vertices of every graph.
pub fn brute_complete(s: &[NodeSet], fam: &CliqueFamily) -> bool {
    fam.entries().iter().all(|e| {
        let u = &e.udg;
        let n = u.n();
        let mut shattered = Vec::new();
        for mask in 1u64..(1 << s.len()) {
            let union = (0..s.len()).filter(|i| mask & (1 << i) != 0).fold(NodeSet::EMPTY, |acc, i| acc.union(s[i]));
            if is_clique(u, union) {
                shattered.push(union);
            }
        }
        let vertices = (0..n).all(|v| shattered.iter().any(|c| c.contains(v)));
        let edges = u.edges().into_iter().all(|(a, b)| shattered.iter().any(|c| c.contains(a) && c.contains(b)));
        vertices && edges
    })
}

/// Fractured by exhaustive search over subcollections avoiding `x`.
pub fn brute_fractured(x: NodeSet, fam: &CliqueFamily, maximals: &[NodeSet]) -> bool {
    let pool: Vec<NodeSet> = maximals.iter().copied().filter(|s| !s.is_subset(x)).collect();
    (1u64..(1 << pool.len())).any(|mask| {
        let sub: Vec<NodeSet> = (0..pool.len()).filter(|i| mask & (1 << i) != 0).map(|i| pool[i]).collect();
        brute_complete(&sub, fam)
    })
}

/// Random measurement model: each observed node gets one to `max_parents`
/// latent parents.
pub fn random_model(rng: &mut impl Rng, m: usize, n: usize, p: f64, max_parents: usize) -> MeasurementModel {
    let latent = random_dag(rng, m, p);
    let mut covers = vec![NodeSet::EMPTY; m];
    for x in 0..n {
        let k = rng.random_range(1..=max_parents.min(m));
        let mut chosen = NodeSet::EMPTY;
        while chosen.len() < k {
            chosen.insert(rng.random_range(0..m));
        }
        for h in chosen.iter() {
            covers[h].insert(x);
        }
    }
    MeasurementModel::from_parts(latent, n, covers).unwrap()
}

/// Observed dependency graph straight from the joint DAG via path enumeration.
pub fn brute_udg(g: &MeasurementModel, target: InterventionTarget) -> Udg {
    let joint = g.intervene(target).unwrap().joint_dag();
    let m = g.m();
    let mut u = Udg::new(g.n()).unwrap();
    for a in 0..g.n() {
        for b in a + 1..g.n() {
            if !dsep_by_paths(&joint, m + a, m + b, &[]) {
                u.add_edge(a, b).unwrap();
            }
        }
    }
    u
}

pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: Some(Box::new(proptest::test_runner::FileFailurePersistence::Off)),
        ..Default::default()
    }
}

/// Every labeled DAG on `n` nodes: each unordered pair is absent or oriented
/// one of two ways, cyclic choices dropped.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(a, b) in &pairs {
            match code % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            code /= 3;
        }
        if let Ok(g) = Dag::from_edges(n, &edges) {
            out.push(g);
        }
    }
    out
}
