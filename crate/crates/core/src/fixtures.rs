// SPDX-License-Identifier: Apache-2.0
//! Small hand-built models used in tests, examples and the CLI.
//!
//! Indices are 0-based: latent `H1` is 0, observed `X1` is 0.

use crate::graph::{Dag, InterventionTarget};
use crate::model::MeasurementModel;

fn mm(m: usize, n: usize, latent: &[(usize, usize)], bipartite: &[(usize, usize)]) -> MeasurementModel {
    MeasurementModel::new(m, n, latent, bipartite).expect("fixture is well formed")
}

/// Four latents, six observed. `H2 -> H4` is isolated and `{X5, X6}` is an
/// imaginary subset.
pub fn running_example() -> MeasurementModel {
    mm(4, 6, &[(1, 3), (3, 2)], &[(0, 0), (0, 1), (0, 3), (1, 0), (1, 1), (1, 4), (2, 2), (2, 4), (3, 5)])
}

/// `H1 -> H2` with overlapping covers `{X1, X2}` and `{X2, X3}`; `{X2}` is a
/// replaceable maximal valid subset.
pub fn replaceable_example() -> MeasurementModel {
    mm(2, 3, &[(0, 1)], &[(0, 0), (0, 1), (1, 1), (1, 2)])
}

/// Five latents where the cover `{X5, X6, X7}` of `H5` is fractured.
#[rustfmt::skip]
pub fn fractured_cover_example() -> MeasurementModel {
    mm(
        5,
        7,
        &[(1, 4), (0, 4), (4, 2), (4, 3)],
        &[
            (0, 0), (0, 4), (0, 5),
            (1, 1), (1, 4), (1, 5),
            (2, 2), (2, 4), (2, 6),
            (3, 3), (3, 5), (3, 6),
            (4, 4), (4, 5), (4, 6),
        ],
    )
}

/// Pure children for every latent, yet `{X5, X6}` is imaginary.
pub fn pure_child_imaginary_example() -> MeasurementModel {
    mm(4, 6, &[(0, 1), (2, 3)], &[(0, 0), (0, 4), (1, 1), (1, 5), (2, 2), (2, 4), (3, 3), (3, 5)])
}

/// Collider `H1 -> H2 <- H3` with chained covers; no fractured subsets.
pub fn no_fractured_example() -> MeasurementModel {
    mm(3, 4, &[(0, 1), (2, 1)], &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3)])
}

/// Two models with identical observed families under complete targets.
/// The first misses `H3 -> H1` and is not maximal; the second is.
pub fn maximality_pair() -> (MeasurementModel, MeasurementModel) {
    let bip = [(0, 0), (1, 1), (2, 2), (3, 3)];
    let a = mm(4, 4, &[(1, 0), (3, 0), (1, 2), (2, 3)], &bip);
    let b = mm(4, 4, &[(1, 0), (3, 0), (1, 2), (2, 3), (2, 0)], &bip);
    (a, b)
}

/// One latent with two children versus a two-latent chain with one child
/// each. They differ only if intervening on the second latent produces an
/// observable independence.
pub fn faithfulness_pair() -> (MeasurementModel, MeasurementModel) {
    let a = mm(1, 2, &[], &[(0, 0), (0, 1)]);
    let b = mm(2, 2, &[(0, 1)], &[(0, 0), (1, 1)]);
    (a, b)
}

/// A three-latent chain with cyclically shared children versus a single
/// latent over all three; the first breaks the latent signature condition.
pub fn latent_signature_pair() -> (MeasurementModel, MeasurementModel) {
    let a = mm(3, 3, &[(0, 1), (1, 2)], &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]);
    let b = mm(1, 3, &[], &[(0, 0), (0, 1), (0, 2)]);
    (a, b)
}

/// Two models that agree under the incomplete target family `{∅, {H2}}`.
pub fn incomplete_targets_pair() -> (MeasurementModel, MeasurementModel, Vec<InterventionTarget>) {
    let a = mm(3, 3, &[(0, 1), (1, 2)], &[(0, 0), (1, 1), (2, 2)]);
    let b = mm(2, 3, &[(0, 1)], &[(0, 0), (1, 1), (1, 2)]);
    (a, b, vec![InterventionTarget::EMPTY, InterventionTarget::node(1)])
}

/// Triangle `X3 -> X1`, `X3 -> X2` with the `X1 - X2` edge oriented either
/// way. Markov equivalent, not isolated equivalent.
pub fn triangle_pair() -> (Dag, Dag) {
    let g1 = Dag::from_edges(3, &[(2, 0), (2, 1), (0, 1)]).expect("acyclic");
    let g2 = Dag::from_edges(3, &[(2, 0), (2, 1), (1, 0)]).expect("acyclic");
    (g1, g2)
}
