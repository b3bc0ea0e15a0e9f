//! Base codes: `(k+r, k)` MDS storage codes whose systematic nodes may be
//! repairable with optimal bandwidth.
//!
//! Parity node `i` stores `f_{k+i} = sum_j A_{i,j} f_j` with `N x N` coding
//! matrices `A_{i,j}`. When repair matrices are present, systematic node `i`
//! is rebuilt from `S_{i,j} f_j` (an `N/r`-symbol download) from every other
//! node `j`.

mod descriptor;
mod eigen;
mod verify;

pub use descriptor::{load_descriptor, save_descriptor};
pub(crate) use descriptor::{parse_base, parse_err, parse_int, write_base, Lines};
pub use eigen::{make_eigen_base, perturb_repair_scalars, scale_repair_matrices, EIGEN_SEARCH_BUDGET};
pub use verify::{
    sub_block_failures, verify_access, verify_all, verify_mds, verify_mds_with, verify_repair,
    AccessReport, Condition, Failure, VerifyReport, Witness,
};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::MatrixGF;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseCodeParams {
    /// Systematic node count.
    pub k: usize,
    /// Parity node count.
    pub r: usize,
    /// Node capacity in symbols.
    pub n: usize,
    pub field: Field,
}

impl BaseCodeParams {
    pub fn new(k: usize, r: usize, n: usize, field: Field) -> Result<Self> {
        if k < 1 || r < 2 || n < 1 {
            return Err(Error::InvalidParams(format!(
                "need k >= 1, r >= 2, N >= 1 (got k={k}, r={r}, N={n})"
            )));
        }
        Ok(Self { k, r, n, field })
    }

    pub fn node_count(&self) -> usize {
        self.k + self.r
    }

    /// Rows of a repair matrix, `N / r`.
    pub fn repair_rows(&self) -> usize {
        self.n / self.r
    }
}

/// Repair matrices `S_{i,j}` for every systematic node `i` and helper
/// `j != i`. Always stored per helper; `uniform` records whether
/// `S_{i,j} = S_i` for all helpers of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairMatrices {
    matrices: Vec<Vec<Option<MatrixGF>>>,
    uniform: bool,
}

impl RepairMatrices {
    /// One `N/r x N` matrix per systematic node, shared by all helpers.
    pub fn uniform(per_node: Vec<MatrixGF>, node_count: usize) -> Self {
        let matrices = per_node
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (0..node_count)
                    .map(|j| (j != i).then(|| s.clone()))
                    .collect()
            })
            .collect();
        Self {
            matrices,
            uniform: true,
        }
    }

    /// Per-helper matrices indexed `[i][j]`; the `[i][i]` entries are ignored.
    pub fn per_helper(mut matrices: Vec<Vec<Option<MatrixGF>>>) -> Self {
        for (i, row) in matrices.iter_mut().enumerate() {
            if let Some(slot) = row.get_mut(i) {
                *slot = None;
            }
        }
        let uniform = matrices.iter().all(|row| {
            let mut present = row.iter().flatten();
            match present.next() {
                Some(first) => present.all(|s| s == first),
                None => true,
            }
        });
        Self { matrices, uniform }
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&MatrixGF> {
        self.matrices.get(i)?.get(j)?.as_ref()
    }

    /// `S_i` of a uniform family.
    pub fn shared(&self, i: usize) -> Option<&MatrixGF> {
        if !self.uniform {
            return None;
        }
        self.matrices.get(i)?.iter().flatten().next()
    }
}

/// A `(k+r, k)` linear storage code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseCode {
    params: BaseCodeParams,
    coding: Vec<Vec<MatrixGF>>,
    repair: Option<RepairMatrices>,
}

impl BaseCode {
    /// `coding[i][j]` is `A_{i,j}` for parity `i` and systematic node `j`.
    pub fn new(
        params: BaseCodeParams,
        coding: Vec<Vec<MatrixGF>>,
        repair: Option<RepairMatrices>,
    ) -> Result<Self> {
        let BaseCodeParams { k, r, n, .. } = params;
        let field = &params.field;
        if coding.len() != r || coding.iter().any(|row| row.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "coding grid must be {r}x{k}"
            )));
        }
        for (i, row) in coding.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                if a.field() != field {
                    return Err(Error::FieldMismatch);
                }
                if a.rows() != n || a.cols() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "A({i},{j}) is {}x{}, expected {n}x{n}",
                        a.rows(),
                        a.cols()
                    )));
                }
            }
        }
        if let Some(rep) = &repair {
            if n % r != 0 {
                return Err(Error::InvalidParams(format!(
                    "repair matrices need r | N (r={r}, N={n})"
                )));
            }
            if rep.matrices.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "repair matrices given for {} systematic nodes, expected {k}",
                    rep.matrices.len()
                )));
            }
            for i in 0..k {
                for j in (0..k + r).filter(|&j| j != i) {
                    let s = rep.get(i, j).ok_or_else(|| {
                        Error::DimensionMismatch(format!("missing repair matrix S({i},{j})"))
                    })?;
                    if s.field() != field {
                        return Err(Error::FieldMismatch);
                    }
                    if s.rows() != n / r || s.cols() != n {
                        return Err(Error::DimensionMismatch(format!(
                            "S({i},{j}) is {}x{}, expected {}x{n}",
                            s.rows(),
                            s.cols(),
                            n / r
                        )));
                    }
                }
            }
        }
        Ok(Self {
            params,
            coding,
            repair,
        })
    }

    pub fn params(&self) -> &BaseCodeParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.params.field
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn r(&self) -> usize {
        self.params.r
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// `A_{i,j}`.
    pub fn coding(&self, i: usize, j: usize) -> &MatrixGF {
        &self.coding[i][j]
    }

    pub fn coding_grid(&self) -> &[Vec<MatrixGF>] {
        &self.coding
    }

    pub fn repair(&self) -> Option<&RepairMatrices> {
        self.repair.as_ref()
    }

    /// `S_{i,j}`, if repair matrices are present.
    pub fn repair_matrix(&self, i: usize, j: usize) -> Option<&MatrixGF> {
        self.repair.as_ref()?.get(i, j)
    }

    pub fn has_uniform_repair(&self) -> bool {
        self.repair.as_ref().is_some_and(RepairMatrices::is_uniform)
    }

    /// Same code with different (or no) repair matrices.
    pub fn with_repair(&self, repair: Option<RepairMatrices>) -> Result<Self> {
        Self::new(self.params.clone(), self.coding.clone(), repair)
    }

    /// Same code with one coding matrix replaced.
    pub fn with_coding(&self, i: usize, j: usize, a: MatrixGF) -> Result<Self> {
        let mut coding = self.coding.clone();
        coding[i][j] = a;
        Self::new(self.params.clone(), coding, self.repair.clone())
    }

    fn check_vectors<V: AsRef<[Elem]>>(&self, vs: &[V], count: usize) -> Result<()> {
        if vs.len() != count {
            return Err(Error::DimensionMismatch(format!(
                "expected {count} vectors, got {}",
                vs.len()
            )));
        }
        if let Some(v) = vs.iter().find(|v| v.as_ref().len() != self.params.n) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {}, expected {}",
                v.as_ref().len(),
                self.params.n
            )));
        }
        Ok(())
    }

    /// Parity contents `g_j = sum_i A_{j,i} f_i` for `j in [0, r)`.
    pub fn encode<V: AsRef<[Elem]>>(&self, systematic: &[V]) -> Result<Vec<Vec<Elem>>> {
        self.check_vectors(systematic, self.params.k)?;
        Ok((0..self.params.r)
            .map(|j| self.parity(j, systematic))
            .collect())
    }

    /// One parity `g_j`; lengths are not checked.
    pub(crate) fn parity<V: AsRef<[Elem]>>(&self, j: usize, systematic: &[V]) -> Vec<Elem> {
        let mut out = vec![0; self.params.n];
        for (i, f) in systematic.iter().enumerate() {
            self.coding[j][i].mul_vec_acc(f.as_ref(), &mut out);
        }
        out
    }

    /// What helper `j` sends when systematic node `i` is repaired: `S_{i,j} x`.
    pub fn helper_download(&self, i: usize, j: usize, content: &[Elem]) -> Result<Vec<Elem>> {
        let s = self
            .repair_matrix(i, j)
            .ok_or(Error::MissingRepairMatrices)?;
        s.mul_vec(content)
    }
}

/// Precomputed newcomer-side state for repairing systematic node `i` of a
/// base code from `S_{i,j}`-downloads.
///
/// The interference of `f_j` on parity download `l` is `S_{i,k+l} A_{l,j} f_j`.
/// Multiplying the systematic download `S_{i,j} f_j` by
/// `S_{i,k+l} A_{l,j} P_{i,j}`, with `P_{i,j}` a right inverse of `S_{i,j}`,
/// reproduces it exactly when the interference-alignment rank condition holds.
#[derive(Debug, Clone)]
pub struct SystematicRepair {
    node: usize,
    k: usize,
    r: usize,
    field: Field,
    // [l][j]: maps the download from systematic helper j to its interference
    // on parity download l. None at j == node.
    interference: Vec<Vec<Option<MatrixGF>>>,
    useful_inv: MatrixGF,
}

impl SystematicRepair {
    pub fn new(code: &BaseCode, node: usize) -> Result<Self> {
        let BaseCodeParams { k, r, .. } = *code.params();
        if node >= k {
            return Err(Error::IndexOutOfRange(format!("systematic node {node}")));
        }
        let rep = code.repair().ok_or(Error::MissingRepairMatrices)?;
        let s = |j: usize| rep.get(node, j).expect("validated at construction");
        let useful: Vec<MatrixGF> = (0..r)
            .map(|l| s(k + l).mul(code.coding(l, node)))
            .collect::<Result<_>>()?;
        let useful = MatrixGF::vstack(&useful.iter().collect::<Vec<_>>())?;
        let useful_inv = useful
            .inverse()
            .map_err(|_| Error::RankDeficient(node))?;
        let mut interference = Vec::with_capacity(r);
        for l in 0..r {
            let mut row = Vec::with_capacity(k);
            for j in 0..k {
                if j == node {
                    row.push(None);
                    continue;
                }
                let right = s(j).right_inverse().map_err(|_| Error::RankDeficient(node))?;
                row.push(Some(s(k + l).mul(code.coding(l, j))?.mul(&right)?));
            }
            interference.push(row);
        }
        Ok(Self {
            node,
            k,
            r,
            field: code.field().clone(),
            interference,
            useful_inv,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    /// `downloads[j]` is `S_{i,j} x_j` from node `j` (`k + r` entries; the
    /// failed node's entry is ignored).
    pub fn repair(&self, downloads: &[Option<&[Elem]>]) -> Result<Vec<Elem>> {
        let (k, r) = (self.k, self.r);
        if downloads.len() != k + r {
            return Err(Error::DimensionMismatch(format!(
                "expected {} download slots, got {}",
                k + r,
                downloads.len()
            )));
        }
        let get = |j: usize| {
            downloads[j].ok_or_else(|| {
                Error::DimensionMismatch(format!("missing download from helper {j}"))
            })
        };
        let mut stacked = Vec::with_capacity(self.useful_inv.rows());
        for l in 0..r {
            let mut d = get(k + l)?.to_vec();
            for j in (0..k).filter(|&j| j != self.node) {
                let t = self.interference[l][j].as_ref().expect("helper entry");
                let sj = get(j)?;
                if sj.len() != t.cols() || d.len() != t.rows() {
                    return Err(Error::DimensionMismatch("download length".into()));
                }
                let interference = t.mul_vec(sj)?;
                d = self.field.sub_vec(&d, &interference);
            }
            stacked.extend_from_slice(&d);
        }
        self.useful_inv.mul_vec(&stacked)
    }
}

/// Rebuilds systematic node `i` from the helpers' `S_{i,j}` downloads.
pub fn base_repair_systematic(
    code: &BaseCode,
    i: usize,
    downloads: &[Option<&[Elem]>],
) -> Result<Vec<Elem>> {
    SystematicRepair::new(code, i)?.repair(downloads)
}

/// Precomputed decoder for one choice of `k` available nodes.
#[derive(Debug, Clone)]
pub struct BaseDecoder {
    k: usize,
    n: usize,
    available: Vec<usize>,
    // systematic node -> position in `available`
    known: Vec<Option<usize>>,
    missing: Vec<usize>,
    // (position in `available`, parity index) for each parity used
    parities: Vec<(usize, usize)>,
    inverse: Option<MatrixGF>,
    // A_{p, i} for every used parity p and every known systematic i
    coding: Vec<Vec<MatrixGF>>,
    field: Field,
}

impl BaseDecoder {
    /// `available` lists node ids (`0..k` systematic, `k..k+r` parity).
    pub fn new(code: &BaseCode, available: &[usize]) -> Result<Self> {
        let BaseCodeParams { k, r, n, .. } = *code.params();
        let mut seen = vec![false; k + r];
        for &id in available {
            if id >= k + r {
                return Err(Error::IndexOutOfRange(format!("node {id}")));
            }
            seen[id] = true;
        }
        let distinct = seen.iter().filter(|&&s| s).count();
        if available.len() != k || distinct != k {
            return Err(Error::WrongCount {
                expected: k,
                got: distinct,
            });
        }
        let mut known = vec![None; k];
        let mut parities = Vec::new();
        for (pos, &id) in available.iter().enumerate() {
            if id < k {
                known[id] = Some(pos);
            } else {
                parities.push((pos, id - k));
            }
        }
        let missing: Vec<usize> = (0..k).filter(|&i| known[i].is_none()).collect();
        let field = code.field().clone();
        let inverse = if missing.is_empty() {
            None
        } else {
            let grid: Vec<Vec<&MatrixGF>> = parities
                .iter()
                .map(|&(_, p)| missing.iter().map(|&i| code.coding(p, i)).collect())
                .collect();
            let t = missing.len();
            let mut system = MatrixGF::zeros(&field, t * n, t * n);
            for (a, row) in grid.iter().enumerate() {
                for (b, m) in row.iter().enumerate() {
                    for x in 0..n {
                        for y in 0..n {
                            system.set(a * n + x, b * n + y, m.get(x, y));
                        }
                    }
                }
            }
            Some(system.inverse().map_err(|_| Error::SingularSelection)?)
        };
        let coding = parities
            .iter()
            .map(|&(_, p)| (0..k).map(|i| code.coding(p, i).clone()).collect())
            .collect();
        Ok(Self {
            k,
            n,
            available: available.to_vec(),
            known,
            missing,
            parities,
            inverse,
            coding,
            field,
        })
    }

    pub fn available(&self) -> &[usize] {
        &self.available
    }

    /// `contents[m]` belongs to node `available[m]`.
    pub fn decode<V: AsRef<[Elem]>>(&self, contents: &[V]) -> Result<Vec<Vec<Elem>>> {
        if contents.len() != self.k {
            return Err(Error::WrongCount {
                expected: self.k,
                got: contents.len(),
            });
        }
        if contents.iter().any(|c| c.as_ref().len() != self.n) {
            return Err(Error::DimensionMismatch("node content length".into()));
        }
        let mut out: Vec<Vec<Elem>> = self
            .known
            .iter()
            .map(|pos| pos.map_or_else(|| vec![0; self.n], |p| contents[p].as_ref().to_vec()))
            .collect();
        let Some(inverse) = &self.inverse else {
            return Ok(out);
        };
        let mut rhs = Vec::with_capacity(self.missing.len() * self.n);
        for (row, &(pos, _)) in self.coding.iter().zip(&self.parities) {
            let mut acc = contents[pos].as_ref().to_vec();
            let mut interference = vec![0; self.n];
            for (i, p) in self.known.iter().enumerate() {
                if let Some(p) = p {
                    row[i].mul_vec_acc(contents[*p].as_ref(), &mut interference);
                }
            }
            acc = self.field.sub_vec(&acc, &interference);
            rhs.extend_from_slice(&acc);
        }
        let solved = inverse.mul_vec(&rhs)?;
        for (b, &i) in self.missing.iter().enumerate() {
            out[i].copy_from_slice(&solved[b * self.n..(b + 1) * self.n]);
        }
        Ok(out)
    }
}

/// Recovers all systematic vectors from any `k` node contents.
pub fn base_decode(code: &BaseCode, available: &[(usize, Vec<Elem>)]) -> Result<Vec<Vec<Elem>>> {
    let ids: Vec<usize> = available.iter().map(|(id, _)| *id).collect();
    let contents: Vec<&[Elem]> = available.iter().map(|(_, c)| c.as_slice()).collect();
    BaseDecoder::new(code, &ids)?.decode(&contents)
}

#[cfg(test)]
mod tests;
