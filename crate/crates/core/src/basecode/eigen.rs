//! A small built-in family of base codes with optimal systematic repair.
//!
//! Shape: `k = r + 1`, `N = r`, so each repair matrix is a single row vector.
//! The vectors `S_0..S_{k-1}` are the unit vectors plus the all-ones vector,
//! any `r` of which are linearly independent. Every coding matrix `A_{l,j}`
//! has `{S_i : i != j}` as left eigenvectors, which makes the interference of
//! `f_j` on node `i`'s repair collapse onto `S_i f_j`.
//!
//! The eigenvalue of `A_{l,j}` on `S_i` is drawn from an `r x r` table per
//! node `i` (rows `l`, columns `j != i`). Every square sub-table must be
//! nonsingular, else the code cannot be MDS, so tables are resampled until
//! they are before the full verifiers run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{verify_mds_with, verify_repair, BaseCode, BaseCodeParams, RepairMatrices};
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::MatrixGF;
use crate::par::{subsets, Exec};

/// Random eigenvalue assignments tried before giving up.
pub const EIGEN_SEARCH_BUDGET: usize = 10_000;

fn repair_vector(r: usize, i: usize) -> Vec<Elem> {
    if i < r {
        (0..r).map(|c| Elem::from(c == i)).collect()
    } else {
        vec![1; r]
    }
}

/// Builds a `(2r+1, r+1)` base code over GF(q) with node capacity `r` and
/// uniform repair matrices, searching eigenvalues until both the MDS and the
/// repair verifiers pass.
pub fn make_eigen_base(r: usize, q: u32, seed: u64) -> Result<BaseCode> {
    let field = Field::with_order(q)?;
    let k = r + 1;
    let params = BaseCodeParams::new(k, r, r, field.clone())?;
    let s: Vec<MatrixGF> = (0..k)
        .map(|i| MatrixGF::from_rows(&field, &[repair_vector(r, i)]))
        .collect::<Result<_>>()?;
    // Eigenbasis of node j: rows S_i for i != j.
    let bases: Vec<(MatrixGF, MatrixGF)> = (0..k)
        .map(|j| {
            let rows: Vec<Vec<Elem>> = (0..k)
                .filter(|&i| i != j)
                .map(|i| repair_vector(r, i))
                .collect();
            let v = MatrixGF::from_rows(&field, &rows)?;
            let v_inv = v.inverse()?;
            Ok((v, v_inv))
        })
        .collect::<Result<_>>()?;
    let repair = RepairMatrices::uniform(s, k + r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = 0;
    for _ in 0..EIGEN_SEARCH_BUDGET {
        let tables: Vec<MatrixGF> = (0..k)
            .map(|_| superregular_table(&field, r, &mut rng, &mut draws))
            .collect::<Option<_>>()
            .ok_or(Error::SearchExhausted(EIGEN_SEARCH_BUDGET))?;
        // Eigenvalue of A_{l,j} on S_i.
        let eigenvalue = |l: usize, j: usize, i: usize| {
            let col = if j < i { j } else { j - 1 };
            tables[i].get(l, col)
        };
        // Node j's useful data is nonsingular only if its eigenvalues do not
        // collapse across parities.
        let useful_ok = (0..k).all(|j| {
            let rows: Vec<Vec<Elem>> = (0..r)
                .map(|l| (0..k).filter(|&i| i != j).map(|i| eigenvalue(l, j, i)).collect())
                .collect();
            MatrixGF::from_rows(&field, &rows).is_ok_and(|m| m.rank() == r)
        });
        if !useful_ok {
            continue;
        }
        let coding = (0..r)
            .map(|l| {
                bases
                    .iter()
                    .enumerate()
                    .map(|(j, (v, v_inv))| {
                        let eig: Vec<Elem> =
                            (0..k).filter(|&i| i != j).map(|i| eigenvalue(l, j, i)).collect();
                        v_inv.mul(&MatrixGF::diagonal(&field, &eig))?.mul(v)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let code = BaseCode::new(params.clone(), coding, Some(repair.clone()))?;
        if verify_repair(&code)?.passed() && verify_mds_with(&code, Exec::Sequential).passed() {
            return Ok(code);
        }
    }
    Err(Error::SearchExhausted(EIGEN_SEARCH_BUDGET))
}

/// Random `size x size` table with nonzero entries whose square sub-tables
/// are all nonsingular. `None` once `draws` reaches the search budget.
fn superregular_table(
    field: &Field,
    size: usize,
    rng: &mut ChaCha8Rng,
    draws: &mut usize,
) -> Option<MatrixGF> {
    let q = field.order();
    while *draws < EIGEN_SEARCH_BUDGET * 10 {
        *draws += 1;
        let data: Vec<Elem> = (0..size * size).map(|_| rng.gen_range(1..q)).collect();
        let table = MatrixGF::from_vec(field, size, size, data).expect("in field");
        let ok = (2..=size).all(|t| {
            subsets(size, t).iter().all(|rows| {
                subsets(size, t)
                    .iter()
                    .all(|cols| table.select_rows(rows).select_columns(cols).rank() == t)
            })
        });
        if ok {
            return Some(table);
        }
    }
    None
}

/// Replaces `S_{i,j}` by `scalars[i][j] * S_{i,j}`. Zero scalars are rejected.
pub fn scale_repair_matrices(code: &BaseCode, scalars: &[Vec<Elem>]) -> Result<BaseCode> {
    let rep = code.repair().ok_or(Error::MissingRepairMatrices)?;
    let BaseCodeParams { k, r, .. } = *code.params();
    let field = code.field();
    let mut grid = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k + r);
        for j in 0..k + r {
            if j == i {
                row.push(None);
                continue;
            }
            let c = *scalars
                .get(i)
                .and_then(|s| s.get(j))
                .ok_or_else(|| Error::DimensionMismatch(format!("no scalar for ({i},{j})")))?;
            if c == 0 || !field.contains(c) {
                return Err(Error::InvalidParams(format!("scalar {c} at ({i},{j})")));
            }
            row.push(Some(rep.get(i, j).expect("validated").scale(c)));
        }
        grid.push(row);
    }
    code.with_repair(Some(RepairMatrices::per_helper(grid)))
}

/// Per-helper variant of a uniform code: `S_{i,j} = c_{i,j} S_i` with random
/// nonzero scalars, not all equal. Needs q >= 3 to have two distinct scalars.
pub fn perturb_repair_scalars(code: &BaseCode, seed: u64) -> Result<BaseCode> {
    let BaseCodeParams { k, r, .. } = *code.params();
    let q = code.field().order();
    if q < 3 {
        return Err(Error::BinaryField);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scalars: Vec<Vec<Elem>> = (0..k)
        .map(|_| (0..k + r).map(|_| rng.gen_range(1..q)).collect())
        .collect();
    // Force non-uniformity on node 0: its first two helpers get different scalars.
    let (h0, h1) = (1, 2);
    if scalars[0][h0] == scalars[0][h1] {
        scalars[0][h1] = if scalars[0][h0] == 1 { 2 } else { 1 };
    }
    scale_repair_matrices(code, &scalars)
}
