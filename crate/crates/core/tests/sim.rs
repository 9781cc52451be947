// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeSet;

use itertools::Itertools;
use latentgraph::graph::complete_targets;
use latentgraph::independence::{chatterjee_xi, permutation_threshold, symmetric_xi};
use latentgraph::recovery::{LatentPdag, RecoveredModel};
use latentgraph::sim::*;
use latentgraph::{InterventionTarget, NodeSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_recovered(rng: &mut impl Rng, m: usize, n: usize) -> RecoveredModel {
    let covers: Vec<NodeSet> = (0..m).map(|_| NodeSet::from_bits(rng.random_range(0..1u64 << n))).collect();
    let mut pdag = LatentPdag::empty(m);
    for a in 0..m {
        for b in a + 1..m {
            match rng.random_range(0..4) {
                1 => {
                    pdag.directed.insert((a, b));
                }
                2 => {
                    pdag.directed.insert((b, a));
                }
                3 => {
                    pdag.undirected.insert((a, b));
                }
                _ => {}
            }
        }
    }
    RecoveredModel { covers, pdag }
}

/// SHD by trying every bijection after padding, written from the definition.
fn brute_shd(a: &RecoveredModel, b: &RecoveredModel) -> usize {
    let k = a.m().max(b.m());
    let cover = |r: &RecoveredModel, i: usize| r.covers.get(i).copied().unwrap_or(NodeSet::EMPTY);
    let status = |r: &RecoveredModel, i: usize, j: usize| -> u8 {
        if r.pdag.directed.contains(&(i, j)) {
            1
        } else if r.pdag.directed.contains(&(j, i)) {
            2
        } else if r.pdag.undirected.contains(&(i.min(j), i.max(j))) {
            3
        } else {
            0
        }
    };
    (0..k)
        .permutations(k)
        .map(|p| {
            let mut cost = 0;
            for i in 0..k {
                let (x, y) = (cover(a, i), cover(b, p[i]));
                cost += x.difference(y).len() + y.difference(x).len();
                for j in i + 1..k {
                    cost += usize::from(status(a, i, j) != status(b, p[i], p[j]));
                }
            }
            cost
        })
        .min()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(common::proptest_config(200))]

    #[test]
    fn shd_is_the_minimum_over_bijections(seed in any::<u64>(), ma in 0usize..=4, mb in 0usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_recovered(&mut rng, ma, 5);
        let b = random_recovered(&mut rng, mb, 5);
        prop_assert_eq!(shd(&a, &b), brute_shd(&a, &b));
    }

    #[test]
    fn shd_is_a_metric(seed in any::<u64>(), m in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_recovered(&mut rng, m, 5);
        let b = random_recovered(&mut rng, m, 5);
        let mc = rng.random_range(1..=4);
        let c = random_recovered(&mut rng, mc, 5);
        prop_assert_eq!(shd(&a, &a), 0);
        prop_assert_eq!(shd(&a, &b), shd(&b, &a));
        prop_assert!(shd(&a, &c) <= shd(&a, &b) + shd(&b, &c));
        let perm: Vec<usize> = (0..m).rev().collect();
        let relabeled = RecoveredModel {
            covers: (0..m).map(|i| a.covers[perm.iter().position(|&p| p == i).unwrap()]).collect(),
            pdag: a.pdag.relabel(&perm),
        };
        prop_assert_eq!(shd(&a, &relabeled), 0);
    }
}

#[test]
fn generator_guarantees() {
    for seed in 0..200 {
        for regime in [Regime::PureChild, Regime::SingleSource] {
            let g = gen_random_mm(&GeneratorConfig::new(4, 8, regime, seed)).unwrap();
            assert_eq!((g.m(), g.n()), (4, 8));
            for h in 0..4 {
                assert!(!g.pure_children(h).is_empty(), "seed {seed}: H{h} lacks a pure child");
            }
            for x in 0..8 {
                assert!(!g.observed_parents(x).is_empty());
            }
            if regime == Regime::SingleSource {
                assert_eq!(g.latent_dag().sources().len(), 1, "seed {seed}");
            }
        }
    }
    assert!(gen_random_mm(&GeneratorConfig::new(5, 4, Regime::PureChild, 0)).is_err());
}

#[test]
fn generator_latent_signature_rate() {
    let targets = complete_targets(4);
    let mut violations = 0;
    for seed in 0..300 {
        let g = gen_random_mm(&GeneratorConfig::new(4, 8, Regime::PureChild, seed)).unwrap();
        violations += usize::from(!g.satisfies_latent_signature(&targets).unwrap());
    }
    eprintln!("latent signature violations: {violations}/300");
    // Pure children give every latent a distinct signature.
    assert_eq!(violations, 0);
}

#[test]
fn sampling_is_deterministic_and_target_specific() {
    let g = gen_random_mm(&GeneratorConfig::new(3, 6, Regime::PureChild, 4)).unwrap();
    let spec = SemSpec::random(g.clone(), 9);
    assert_eq!(spec, SemSpec::random(g, 9));
    let a = sem_sample(&spec, InterventionTarget::EMPTY, 200, 1).unwrap();
    let b = sem_sample(&spec, InterventionTarget::EMPTY, 200, 1).unwrap();
    let c = sem_sample(&spec, InterventionTarget::node(0), 200, 1).unwrap();
    let d = sem_sample(&spec, InterventionTarget::EMPTY, 200, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
    assert_eq!((a.rows(), a.cols()), (200, 6));
    for coef in spec.coefficients.values() {
        assert!((0.5..=1.5).contains(&coef.abs()));
    }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn intervened_latent_has_shifted_marginal() {
    let g = latentgraph::MeasurementModel::new(2, 2, &[(0, 1)], &[(0, 0), (1, 1)]).unwrap();
    let spec = SemSpec::random(g, 3);
    let joint = sem_sample_joint(&spec, InterventionTarget::node(1), 20_000, 5).unwrap();
    let (mean, var) = mean_var(joint.column(1));
    assert!((mean - 2.0).abs() < 0.05 && (var - 1.0).abs() < 0.05, "{mean} {var}");
    let (mean, var) = mean_var(joint.column(0));
    assert!(mean.abs() < 0.05 && (var - 1.0).abs() < 0.05, "{mean} {var}");
    // Observational: the child is driven by the square of its parent.
    let obs = sem_sample_joint(&spec, InterventionTarget::EMPTY, 20_000, 5).unwrap();
    let c = spec.coefficients[&(0, 1)];
    let (mean, _) = mean_var(obs.column(1));
    assert!((mean - c).abs() < 0.1, "{mean} vs {c}");
}

#[test]
fn hard_intervention_cuts_dependence() {
    let g = latentgraph::MeasurementModel::new(2, 2, &[(0, 1)], &[(0, 0), (1, 1)]).unwrap();
    let count = 2000;
    let cut = permutation_threshold(count, 199, 0.05, 77).unwrap();
    let mut detected_obs = 0;
    let mut detected_int = 0;
    for seed in 0..50 {
        let spec = SemSpec::random(g.clone(), seed);
        let obs = sem_sample_joint(&spec, InterventionTarget::EMPTY, count, seed).unwrap();
        let int = sem_sample_joint(&spec, InterventionTarget::node(1), count, seed).unwrap();
        detected_obs += usize::from(symmetric_xi(obs.column(0), obs.column(1)).unwrap() > cut);
        detected_int += usize::from(symmetric_xi(int.column(0), int.column(1)).unwrap() > cut);
    }
    assert_eq!(detected_obs, 50);
    // Nominal false positive rate is 5%; allow generous slack.
    assert!(detected_int <= 8, "{detected_int} false detections");
    assert!(chatterjee_xi(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() < 1.0);
}

#[test]
fn shd_counts_each_kind_of_error() {
    let truth = latentgraph::MeasurementModel::new(2, 3, &[(0, 1)], &[(0, 0), (0, 1), (1, 2)]).unwrap();
    let want = RecoveredModel::from_truth(&truth);
    assert_eq!(want.pdag.undirected, BTreeSet::from([(0, 1)]));
    let mut r = want.clone();
    r.pdag.undirected.clear();
    assert_eq!(shd(&r, &want), 1);
    r.covers[1] = NodeSet::from([1, 2]);
    assert_eq!(shd(&r, &want), 2);
    let mut extra = want.clone();
    extra.covers.push(NodeSet::from([2]));
    assert_eq!(shd(&extra, &want), 1);
}
