// SPDX-License-Identifier: Apache-2.0
//! Identification of latent causal graphs in measurement models from
//! unlabeled single-node hard interventions.
//!
//! The crate works in two front ends. In oracle mode the undirected
//! dependency graphs come straight from d-separation on a known model; in
//! sample mode they are estimated with a symmetrized Chatterjee test. Both
//! feed the same recovery pipeline: clique family, bipartite recovery,
//! latent marginal family, then skeleton and orientation.

pub mod equivalence;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod graph;
pub mod independence;
pub mod model;
pub mod nodeset;
pub mod recovery;
pub mod sim;
pub mod subsets;
pub mod udg;

pub use error::{Error, Result};
pub use graph::{Dag, DsepFamily, EdgeClass, RelativeKind};
pub use model::{InterventionTarget, MeasurementModel};
pub use nodeset::NodeSet;
pub use recovery::{LatentPdag, MarginalLatentFamily, RecoveredModel, Route};
pub use udg::{CliqueFamily, Udg};
