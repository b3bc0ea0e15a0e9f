//! The transformation from a base code to the MSR code.
//!
//! `r` instances of the base code are stored side by side (node capacity
//! `rN`, instance `l` at symbols `[lN, (l+1)N)`). Within instance `l` the
//! base parities are permuted, `h_j^(l) = g_{p_l(j)}^(l)`, and parity node `j`
//! stores
//!
//! ```text
//! f_{k+j}^(j) = h_j^(j)
//! f_{k+j}^(l) = theta(j,l) h_j^(l) + h_l^(j)      (l != j)
//! ```

mod blueprint;
mod bundle;
mod check;
mod matrices;
mod perm;
mod theta;

use std::ops::Range;
use std::sync::OnceLock;

pub use blueprint::{Blueprint, Coeff, Term};
pub use bundle::{load_bundle, parse_bundle, save_bundle, BundleParts};
pub use check::{check_full, check_full_with_grid, CHECK_SAMPLES};
pub use matrices::{build_b, RepairMatrixSet};
pub use perm::PermutationFamily;
pub use theta::{Orientation, PairSolver, ThetaTable};

use crate::basecode::{verify_mds, verify_repair, BaseCode, BaseCodeParams};
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::MatrixGF;

/// The transformed code. `B` and `R` are built on first use.
#[derive(Debug, Clone)]
pub struct MsrCode {
    base: BaseCode,
    perms: PermutationFamily,
    theta: ThetaTable,
    b_grid: OnceLock<Vec<Vec<MatrixGF>>>,
    repair_set: OnceLock<Option<RepairMatrixSet>>,
}

/// Transforms a verified base code. The base is re-verified here (MDS, and
/// the repair rank conditions when repair matrices are present).
pub fn transform(base: BaseCode, perms: PermutationFamily, theta: ThetaTable) -> Result<MsrCode> {
    let msr = MsrCode::new_unverified(base, perms, theta)?;
    let mds = verify_mds(&msr.base);
    if let Some(f) = mds.failures.first() {
        return Err(Error::UnverifiedBase(f.to_string()));
    }
    if msr.base.repair().is_some() {
        let rep = verify_repair(&msr.base)?;
        if let Some(f) = rep.failures.first() {
            return Err(Error::UnverifiedBase(f.to_string()));
        }
    }
    Ok(msr)
}

impl MsrCode {
    /// Structural checks only (field, shapes, permutation symmetry); the base
    /// code is taken as is. Used for negative controls.
    pub fn new_unverified(
        base: BaseCode,
        perms: PermutationFamily,
        theta: ThetaTable,
    ) -> Result<Self> {
        if base.field().order() == 2 {
            return Err(Error::BinaryField);
        }
        let r = base.r();
        if perms.r() != r || theta.r() != r {
            return Err(Error::DimensionMismatch(format!(
                "base has r={r}, permutations r={}, theta r={}",
                perms.r(),
                theta.r()
            )));
        }
        if theta.field() != base.field() {
            return Err(Error::FieldMismatch);
        }
        if let Some(rep) = base.repair() {
            if !rep.is_uniform() && !perms.is_symmetric() {
                return Err(Error::AsymmetricPermsWithPerHelperRepair);
            }
        }
        Ok(Self {
            base,
            perms,
            theta,
            b_grid: OnceLock::new(),
            repair_set: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &BaseCode {
        &self.base
    }

    pub fn perms(&self) -> &PermutationFamily {
        &self.perms
    }

    pub fn theta(&self) -> &ThetaTable {
        &self.theta
    }

    pub fn field(&self) -> &Field {
        self.base.field()
    }

    pub fn params(&self) -> &BaseCodeParams {
        self.base.params()
    }

    pub fn k(&self) -> usize {
        self.base.k()
    }

    pub fn r(&self) -> usize {
        self.base.r()
    }

    /// Base node capacity `N`.
    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Node capacity `rN`.
    pub fn capacity(&self) -> usize {
        self.r() * self.n()
    }

    pub fn node_count(&self) -> usize {
        self.k() + self.r()
    }

    /// Whether systematic nodes can be repaired with optimal bandwidth.
    pub fn has_systematic_repair(&self) -> bool {
        self.base.repair().is_some()
    }

    /// Symbols of instance `l` inside a node's content.
    pub fn instance_range(&self, l: usize) -> Range<usize> {
        let n = self.n();
        l * n..(l + 1) * n
    }

    /// Block grid `B_{i,j}` (r x k blocks of `rN x rN`).
    pub fn b_grid(&self) -> &[Vec<MatrixGF>] {
        self.b_grid.get_or_init(|| build_b(self))
    }

    /// Repair matrices `R_{i,j}` of the systematic nodes.
    pub fn repair_matrices(&self) -> Result<&RepairMatrixSet> {
        self.repair_set
            .get_or_init(|| RepairMatrixSet::build(self).ok())
            .as_ref()
            .ok_or(Error::MissingRepairMatrices)
    }

    /// `R_{k+i,j}`: the `N x rN` selector of instance block `i`, identical
    /// for every helper `j`.
    pub fn parity_repair_matrix(&self, i: usize) -> MatrixGF {
        let field = self.field();
        let mut m = MatrixGF::zeros(field, self.n(), self.capacity());
        for (row, col) in self.instance_range(i).enumerate() {
            m.set(row, col, 1);
        }
        m
    }

    /// Base parities `g^(l)` of every instance, from the systematic contents.
    pub(crate) fn base_parities<V: AsRef<[Elem]>>(&self, systematic: &[V]) -> Vec<Vec<Vec<Elem>>> {
        (0..self.r())
            .map(|l| {
                let range = self.instance_range(l);
                let inst: Vec<&[Elem]> =
                    systematic.iter().map(|f| &f.as_ref()[range.clone()]).collect();
                (0..self.r()).map(|s| self.base.parity(s, &inst)).collect()
            })
            .collect()
    }

    /// Stepwise encoder.
    pub fn encode<V: AsRef<[Elem]>>(&self, systematic: &[V]) -> Result<MsrCodeword> {
        let (k, r, cap) = (self.k(), self.r(), self.capacity());
        if systematic.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "expected {k} systematic nodes, got {}",
                systematic.len()
            )));
        }
        if let Some(bad) = systematic.iter().position(|f| f.as_ref().len() != cap) {
            return Err(Error::DimensionMismatch(format!(
                "systematic node {bad} holds {} symbols, expected {cap}",
                systematic[bad].as_ref().len()
            )));
        }
        let g = self.base_parities(systematic);
        // h[l][j] = g_{p_l(j)}^(l)
        let h: Vec<Vec<&[Elem]>> = (0..r)
            .map(|l| (0..r).map(|j| g[l][self.perms.apply(l, j)].as_slice()).collect())
            .collect();
        let field = self.field();
        let mut nodes: Vec<Vec<Elem>> = systematic.iter().map(|f| f.as_ref().to_vec()).collect();
        for j in 0..r {
            let mut content = Vec::with_capacity(cap);
            for l in 0..r {
                if l == j {
                    content.extend_from_slice(h[j][j]);
                } else {
                    let mut cell = h[j][l].to_vec();
                    field.axpy(&mut cell, self.theta.get(j, l), h[l][j]);
                    content.extend_from_slice(&cell);
                }
            }
            nodes.push(content);
        }
        Ok(MsrCodeword { nodes, r })
    }

    /// `f_{k+j} = sum_i B_{j,i} f_i` for every parity `j`.
    pub fn encode_with_grid<V: AsRef<[Elem]>>(
        &self,
        grid: &[Vec<MatrixGF>],
        systematic: &[V],
    ) -> Result<Vec<Vec<Elem>>> {
        grid.iter()
            .map(|row| {
                let mut out = vec![0; self.capacity()];
                for (b, f) in row.iter().zip(systematic) {
                    if f.as_ref().len() != b.cols() {
                        return Err(Error::DimensionMismatch("systematic length".into()));
                    }
                    b.mul_vec_acc(f.as_ref(), &mut out);
                }
                Ok(out)
            })
            .collect()
    }

    /// Symbolic layout of the parities under this code's permutations and
    /// theta orientation.
    pub fn blueprint(&self) -> Blueprint {
        Blueprint::new(&self.perms, self.theta.orientation())
    }
}

/// Contents of all `k + r` nodes, each `rN` symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsrCodeword {
    nodes: Vec<Vec<Elem>>,
    r: usize,
}

impl MsrCodeword {
    pub fn nodes(&self) -> &[Vec<Elem>] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Vec<Elem>> {
        self.nodes
    }

    pub fn node(&self, id: usize) -> &[Elem] {
        &self.nodes[id]
    }

    pub fn systematic(&self) -> &[Vec<Elem>] {
        &self.nodes[..self.nodes.len() - self.r]
    }

    pub fn parity(&self, j: usize) -> &[Elem] {
        &self.nodes[self.nodes.len() - self.r + j]
    }

    /// Instance `l` of node `id`.
    pub fn instance(&self, id: usize, l: usize) -> &[Elem] {
        let n = self.nodes[id].len() / self.r;
        &self.nodes[id][l * n..(l + 1) * n]
    }
}
