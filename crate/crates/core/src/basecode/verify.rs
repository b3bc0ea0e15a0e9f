use std::fmt;

use super::{BaseCode, BaseCodeParams};
use crate::error::{Error, Result};
use crate::linalg::{BlockSpec, MatrixGF};
use crate::par::{subsets, Exec};

/// Which check a failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// A `t x t` block sub-matrix of the coding grid is singular.
    SubBlockSingular,
    /// The stacked `S_{i,k+l} A_{l,i}` of node `i` is not of rank `N`.
    UsefulDataRank,
    /// The stacked `[S_{i,j}; S_{i,k+l} A_{l,j}]` is not of rank `N/r`.
    InterferenceRank,
    /// Lifted counterpart of `UsefulDataRank` on the transformed code.
    LiftedUsefulDataRank,
    /// Lifted counterpart of `InterferenceRank` on the transformed code.
    LiftedInterferenceRank,
    /// Stepwise encoding disagrees with the block-matrix product.
    EncodeMismatch,
    /// A theta pair does not satisfy `{theta(j,l), theta(l,j)} = {1, a}` with `a != 1`.
    ThetaPair,
    /// Permutation family is malformed or lacks a required symmetry.
    PermutationFamily,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::SubBlockSingular => "sub-block-singular",
            Condition::UsefulDataRank => "useful-data-rank",
            Condition::InterferenceRank => "interference-rank",
            Condition::LiftedUsefulDataRank => "lifted-useful-data-rank",
            Condition::LiftedInterferenceRank => "lifted-interference-rank",
            Condition::EncodeMismatch => "encode-mismatch",
            Condition::ThetaPair => "theta-pair",
            Condition::PermutationFamily => "permutation-family",
        };
        f.write_str(s)
    }
}

/// Indices that pin down where a check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    SubBlock { rows: Vec<usize>, cols: Vec<usize> },
    Node { node: usize, rank: usize },
    Pair { node: usize, helper: usize, rank: usize },
    Sample { sample: usize, parity: usize },
    Theta { j: usize, l: usize },
    Message(String),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::SubBlock { rows, cols } => write!(f, "rows={rows:?} cols={cols:?}"),
            Witness::Node { node, rank } => write!(f, "node={node} rank={rank}"),
            Witness::Pair { node, helper, rank } => {
                write!(f, "node={node} helper={helper} rank={rank}")
            }
            Witness::Sample { sample, parity } => write!(f, "sample={sample} parity={parity}"),
            Witness::Theta { j, l } => write!(f, "j={j} l={l}"),
            Witness::Message(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub condition: Condition,
    pub witness: Witness,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.witness)
    }
}

/// Nonzero-column counts of every repair matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessReport {
    /// `counts[i][j]`, `None` on the diagonal.
    pub counts: Vec<Vec<Option<usize>>>,
    /// Whether every helper of systematic node `i` reads exactly `N/r` symbols.
    pub optimal: Vec<bool>,
}

/// Outcome of one or more verifiers. A flag is `None` when its check did not
/// run (or does not apply).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub mds_ok: Option<bool>,
    pub repair_ok: Option<bool>,
    pub structure_ok: Option<bool>,
    pub access: Option<AccessReport>,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    /// True when every check that ran passed.
    pub fn passed(&self) -> bool {
        [self.mds_ok, self.repair_ok, self.structure_ok]
            .iter()
            .all(|f| f.unwrap_or(true))
    }

    pub fn merge(&mut self, other: VerifyReport) {
        fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
            match (a, b) {
                (Some(x), Some(y)) => Some(x && y),
                (x, None) => x,
                (None, y) => y,
            }
        }
        self.mds_ok = and(self.mds_ok, other.mds_ok);
        self.repair_ok = and(self.repair_ok, other.repair_ok);
        self.structure_ok = and(self.structure_ok, other.structure_ok);
        if other.access.is_some() {
            self.access = other.access;
        }
        self.failures.extend(other.failures);
    }

    pub fn failures_of(&self, condition: Condition) -> impl Iterator<Item = &Failure> {
        self.failures.iter().filter(move |f| f.condition == condition)
    }
}

/// Every singular `t x t` block sub-matrix of a block grid, for
/// `1 <= t <= min(rows, cols)`.
pub fn sub_block_failures(grid: &[Vec<MatrixGF>], exec: Exec) -> Vec<Failure> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    let Some(first) = grid.first().and_then(|r| r.first()) else {
        return Vec::new();
    };
    let size = first.rows();
    let field = first.field().clone();
    let mut cases = Vec::new();
    for t in 1..=rows.min(cols) {
        let row_sets = subsets(rows, t);
        let col_sets = subsets(cols, t);
        for rs in &row_sets {
            for cs in &col_sets {
                cases.push((rs.clone(), cs.clone()));
            }
        }
    }
    exec.map(&cases, |(rs, cs)| {
        let t = rs.len();
        let spec = BlockSpec::square(t, size).expect("positive");
        let blocks: Vec<Vec<Option<MatrixGF>>> = rs
            .iter()
            .map(|&i| cs.iter().map(|&j| Some(grid[i][j].clone())).collect())
            .collect();
        let m = MatrixGF::block_compose(&field, &spec, &blocks).expect("uniform grid");
        (m.rank() < t * size).then(|| Failure {
            condition: Condition::SubBlockSingular,
            witness: Witness::SubBlock {
                rows: rs.clone(),
                cols: cs.clone(),
            },
        })
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Checks that every `t x t` block sub-matrix of the coding grid is nonsingular.
pub fn verify_mds(code: &BaseCode) -> VerifyReport {
    verify_mds_with(code, Exec::default())
}

pub fn verify_mds_with(code: &BaseCode, exec: Exec) -> VerifyReport {
    let failures = sub_block_failures(code.coding_grid(), exec);
    VerifyReport {
        mds_ok: Some(failures.is_empty()),
        failures,
        ..Default::default()
    }
}

/// Checks the two repair rank conditions: the useful-data stack of node `i`
/// has rank `N`, and for every other systematic `j` the interference stack
/// (together with `S_{i,j}` itself) has rank exactly `N/r`.
pub fn verify_repair(code: &BaseCode) -> Result<VerifyReport> {
    let rep = code.repair().ok_or(Error::MissingRepairMatrices)?;
    let BaseCodeParams { k, r, n, .. } = *code.params();
    let rows = n / r;
    let mut failures = Vec::new();
    for i in 0..k {
        let s = |j: usize| rep.get(i, j).expect("validated");
        let useful: Vec<MatrixGF> = (0..r)
            .map(|l| s(k + l).mul(code.coding(l, i)))
            .collect::<Result<_>>()?;
        let rank = MatrixGF::vstack(&useful.iter().collect::<Vec<_>>())?.rank();
        if rank != n {
            failures.push(Failure {
                condition: Condition::UsefulDataRank,
                witness: Witness::Node { node: i, rank },
            });
        }
        for j in (0..k).filter(|&j| j != i) {
            let mut parts = vec![s(j).clone()];
            for l in 0..r {
                parts.push(s(k + l).mul(code.coding(l, j))?);
            }
            let rank = MatrixGF::vstack(&parts.iter().collect::<Vec<_>>())?.rank();
            let own = s(j).rank();
            if rank != rows || own != rows {
                failures.push(Failure {
                    condition: Condition::InterferenceRank,
                    witness: Witness::Pair {
                        node: i,
                        helper: j,
                        rank,
                    },
                });
            }
        }
    }
    Ok(VerifyReport {
        repair_ok: Some(failures.is_empty()),
        failures,
        ..Default::default()
    })
}

/// Counts accessed symbols (nonzero columns) of every repair matrix.
pub fn verify_access(code: &BaseCode) -> Result<VerifyReport> {
    let rep = code.repair().ok_or(Error::MissingRepairMatrices)?;
    let BaseCodeParams { k, r, n, .. } = *code.params();
    let counts: Vec<Vec<Option<usize>>> = (0..k)
        .map(|i| {
            (0..k + r)
                .map(|j| rep.get(i, j).map(MatrixGF::nonzero_columns))
                .collect()
        })
        .collect();
    let optimal = counts
        .iter()
        .map(|row| row.iter().flatten().all(|&c| c == n / r))
        .collect();
    Ok(VerifyReport {
        access: Some(AccessReport { counts, optimal }),
        ..Default::default()
    })
}

/// MDS check plus, when repair matrices are present, the repair and access
/// checks.
pub fn verify_all(code: &BaseCode) -> VerifyReport {
    let mut report = verify_mds(code);
    if code.repair().is_some() {
        report.merge(verify_repair(code).expect("repair present"));
        report.merge(verify_access(code).expect("repair present"));
    }
    report
}
