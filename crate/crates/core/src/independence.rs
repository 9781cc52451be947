// SPDX-License-Identifier: Apache-2.0
//! Chatterjee's rank coefficient and the sample-based dependency graph.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::udg::Udg;

pub const MIN_SAMPLES: usize = 20;
pub const DEFAULT_PERMUTATIONS: usize = 199;
pub const DEFAULT_LEVEL: f64 = 0.05;

/// Column-major sample matrix over observed nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    columns: Vec<Vec<f64>>,
}

impl SampleMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::SizeMismatch(rows, bad.len()));
        }
        Ok(SampleMatrix { rows, columns })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Vec<f64>> {
        self.columns
    }

    /// Writes a header `X0..X{n-1}` then one row per sample.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record((0..self.cols()).map(|j| format!("X{j}"))).map_err(|e| Error::csv(path, e))?;
        for i in 0..self.rows {
            w.write_record(self.columns.iter().map(|c| c[i].to_string())).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let cols = r.headers().map_err(|e| Error::csv(path, e))?.len();
        let mut columns = vec![Vec::new(); cols];
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidData(format!("{}: row {}: '{field}' is not a number", path.display(), line + 1))
                })?;
                columns[j].push(v);
            }
        }
        Self::from_columns(columns)
    }
}

/// Per-column sort order and ranks, so each coefficient costs O(N).
struct RankedColumn {
    // Row indices sorted by value, ties kept in row order.
    order: Vec<usize>,
    // rank[i] = #{j : v_j <= v_i}
    rank: Vec<usize>,
    degenerate: bool,
}

impl RankedColumn {
    fn new(v: &[f64]) -> Result<Self> {
        if v.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidData("NaN in sample column".into()));
        }
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut rank = vec![0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            for &row in &order[i..=j] {
                rank[row] = j + 1;
            }
            i = j + 1;
        }
        let degenerate = v.first().is_none_or(|&first| v.iter().all(|&x| x == first));
        Ok(RankedColumn { order, rank, degenerate })
    }
}

fn xi_ranked(x: &RankedColumn, y: &RankedColumn) -> f64 {
    let n = x.order.len() as f64;
    let total: usize = x.order.windows(2).map(|w| y.rank[w[0]].abs_diff(y.rank[w[1]])).sum();
    1.0 - 3.0 * total as f64 / (n * n - 1.0)
}

/// ξ(x, y): sort pairs by x (stable), rank y, and sum rank jumps.
pub fn chatterjee_xi(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidData("need at least two samples".into()));
    }
    Ok(xi_ranked(&RankedColumn::new(x)?, &RankedColumn::new(y)?))
}

/// max(ξ(x, y), ξ(y, x)).
pub fn symmetric_xi(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(chatterjee_xi(x, y)?.max(chatterjee_xi(y, x)?))
}

/// Permutation cutoff for the symmetrized statistic at sample size `count`.
///
/// The null is distribution-free for continuous data, so one calibration per
/// sample size serves every pair. An observed statistic rejects independence
/// when it exceeds the returned value, i.e. when fewer than
/// `floor(level * (permutations + 1))` null draws reach it.
pub fn permutation_threshold(count: usize, permutations: usize, level: f64, seed: u64) -> Result<f64> {
    if count < 2 {
        return Err(Error::InvalidData("need at least two samples".into()));
    }
    if !(0.0..1.0).contains(&level) || permutations == 0 {
        return Err(Error::InvalidConfig("level must be in [0,1) and permutations > 0".into()));
    }
    let k = ((level * (permutations + 1) as f64).floor() as usize).max(1);
    if k > permutations {
        return Err(Error::InvalidConfig("too few permutations for level".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..count).map(|i| i as f64).collect();
    let x = RankedColumn::new(&base)?;
    let mut perm = base.clone();
    let mut null: Vec<f64> = (0..permutations)
        .map(|_| {
            perm.shuffle(&mut rng);
            let y = RankedColumn::new(&perm).expect("finite values");
            xi_ranked(&x, &y).max(xi_ranked(&y, &x))
        })
        .collect();
    null.sort_by(|a, b| b.total_cmp(a));
    Ok(null[k - 1])
}

/// Empirical dependency graph plus the columns flagged as constant.
#[derive(Clone, Debug)]
pub struct SampleUdg {
    pub udg: Udg,
    pub degenerate: Vec<usize>,
}

/// Edge `(i, j)` iff the symmetrized statistic exceeds `threshold`.
/// Constant columns are treated as independent of everything.
pub fn udg_from_samples(data: &SampleMatrix, threshold: f64) -> Result<SampleUdg> {
    if data.rows() < MIN_SAMPLES {
        return Err(Error::InvalidData(format!("{} samples, need at least {MIN_SAMPLES}", data.rows())));
    }
    let ranked: Vec<RankedColumn> = data.columns.iter().map(|c| RankedColumn::new(c)).collect::<Result<_>>()?;
    let mut udg = Udg::new(data.cols())?;
    for i in 0..ranked.len() {
        for j in i + 1..ranked.len() {
            if ranked[i].degenerate || ranked[j].degenerate {
                continue;
            }
            let stat = xi_ranked(&ranked[i], &ranked[j]).max(xi_ranked(&ranked[j], &ranked[i]));
            if stat > threshold {
                udg.add_edge(i, j)?;
            }
        }
    }
    let degenerate = (0..ranked.len()).filter(|&j| ranked[j].degenerate).collect();
    Ok(SampleUdg { udg, degenerate })
}
