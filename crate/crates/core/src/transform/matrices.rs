//! Matrix view of the transformed code: parity `i` is `sum_j B_{i,j} f_j`,
//! and helper `j` sends `R_{i,j} f_j` when systematic node `i` fails.

use super::MsrCode;
use crate::error::{Error, Result};
use crate::linalg::{BlockSpec, MatrixGF};

/// `B_{i,j}` for every parity `i` and systematic `j`, from the closed form
///
/// ```text
/// (l,s) block = A_{p_i(i),j}               l = s = i
///               A_{p_i(l),j}               s = i != l
///               theta(i,l) A_{p_l(i),j}    l = s != i
///               0                          otherwise
/// ```
pub fn build_b(msr: &MsrCode) -> Vec<Vec<MatrixGF>> {
    let (k, r, n) = (msr.k(), msr.r(), msr.n());
    let field = msr.field();
    let spec = BlockSpec::square(r, n).expect("positive dimensions");
    let perms = msr.perms();
    let base = msr.base();
    (0..r)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let blocks: Vec<Vec<Option<MatrixGF>>> = (0..r)
                        .map(|l| {
                            (0..r)
                                .map(|s| {
                                    if s == i {
                                        Some(base.coding(perms.apply(i, l), j).clone())
                                    } else if l == s {
                                        let theta = msr.theta().get(i, l);
                                        Some(base.coding(perms.apply(l, i), j).scale(theta))
                                    } else {
                                        None
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    MatrixGF::block_compose(field, &spec, &blocks).expect("consistent blocks")
                })
                .collect()
        })
        .collect()
}

/// `R_{i,j}` for every systematic node `i` and helper `j != i`.
///
/// Each `R_{i,j}` is block diagonal with one `N/r x N` block per instance;
/// the per-instance blocks are kept so helpers can apply them without
/// touching the zero blocks.
#[derive(Debug, Clone)]
pub struct RepairMatrixSet {
    // [i][j] -> r per-instance blocks; None on the diagonal
    components: Vec<Vec<Option<Vec<MatrixGF>>>>,
    full: Vec<Vec<Option<MatrixGF>>>,
}

impl RepairMatrixSet {
    /// Uniform base: every block is `S_i`. Per-helper base: systematic
    /// helpers repeat `S_{i,j}`, parity helper `k+j` uses
    /// `S_{i,k+p_l(j)}` in instance `l`.
    pub fn build(msr: &MsrCode) -> Result<Self> {
        let (k, r) = (msr.k(), msr.r());
        let rep = msr.base().repair().ok_or(Error::MissingRepairMatrices)?;
        let field = msr.field();
        let mut components = Vec::with_capacity(k);
        let mut full = Vec::with_capacity(k);
        for i in 0..k {
            let mut comp_row = Vec::with_capacity(k + r);
            let mut full_row = Vec::with_capacity(k + r);
            for j in 0..k + r {
                if j == i {
                    comp_row.push(None);
                    full_row.push(None);
                    continue;
                }
                let blocks: Vec<MatrixGF> = (0..r)
                    .map(|l| {
                        let source = if j < k {
                            j
                        } else {
                            k + msr.perms().apply(l, j - k)
                        };
                        rep.get(i, source).expect("validated").clone()
                    })
                    .collect();
                let refs: Vec<&MatrixGF> = blocks.iter().collect();
                full_row.push(Some(MatrixGF::block_diag(field, &refs)));
                comp_row.push(Some(blocks));
            }
            components.push(comp_row);
            full.push(full_row);
        }
        Ok(Self { components, full })
    }

    /// `R_{i,j}`; `None` when `j == i`.
    pub fn get(&self, i: usize, j: usize) -> Option<&MatrixGF> {
        self.full.get(i)?.get(j)?.as_ref()
    }

    /// Per-instance blocks of `R_{i,j}`.
    pub fn blocks(&self, i: usize, j: usize) -> Option<&[MatrixGF]> {
        self.components.get(i)?.get(j)?.as_deref()
    }
}
