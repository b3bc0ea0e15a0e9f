use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MsrCode;
use crate::basecode::{sub_block_failures, Condition, Failure, VerifyReport, Witness};
use crate::gf::Elem;
use crate::linalg::MatrixGF;
use crate::par::Exec;

/// Random inputs compared between the stepwise and the matrix encoder.
pub const CHECK_SAMPLES: usize = 16;

/// Full structural check of a transformed code against its own `B` grid.
pub fn check_full(msr: &MsrCode) -> VerifyReport {
    check_full_with_grid(msr, msr.b_grid(), Exec::default())
}

/// Same checks against an arbitrary grid (for instance a tampered copy).
///
/// * encoding: stepwise encode equals `sum_j B_{i,j} f_j` on seeded inputs
/// * lifted repair ranks: stacked `R_{i,k+l} B_{l,i}` has rank `rN`, and
///   `[R_{i,j}; R_{i,k+l} B_{l,j} ...]` has rank `N`
/// * every `t x t` block sub-matrix of the grid is nonsingular
/// * theta pairs and permutation symmetry
pub fn check_full_with_grid(msr: &MsrCode, grid: &[Vec<MatrixGF>], exec: Exec) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut structure = Vec::new();

    let field = msr.field();
    let q = field.order();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for sample in 0..CHECK_SAMPLES {
        let data: Vec<Vec<Elem>> = (0..msr.k())
            .map(|_| (0..msr.capacity()).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        let stepwise = msr.encode(&data).expect("shapes match");
        let by_matrix = msr.encode_with_grid(grid, &data);
        for parity in 0..msr.r() {
            let ok = by_matrix
                .as_ref()
                .is_ok_and(|m| m[parity] == stepwise.parity(parity));
            if !ok {
                structure.push(Failure {
                    condition: Condition::EncodeMismatch,
                    witness: Witness::Sample { sample, parity },
                });
            }
        }
    }

    for (j, l) in msr.theta().violations() {
        structure.push(Failure {
            condition: Condition::ThetaPair,
            witness: Witness::Theta { j, l },
        });
    }
    if let Some(rep) = msr.base().repair() {
        if !rep.is_uniform() && !msr.perms().is_symmetric() {
            structure.push(Failure {
                condition: Condition::PermutationFamily,
                witness: Witness::Message("per-helper repair needs p_i(j) = p_j(i)".into()),
            });
        }
    }
    report.structure_ok = Some(structure.is_empty());
    report.failures.extend(structure);

    if let Ok(set) = msr.repair_matrices() {
        let (k, r, n) = (msr.k(), msr.r(), msr.n());
        let mut lifted = Vec::new();
        for i in 0..k {
            let r_of = |j: usize| set.get(i, j).expect("helper");
            let useful: Vec<MatrixGF> = (0..r)
                .map(|l| r_of(k + l).mul(&grid[l][i]).expect("shapes"))
                .collect();
            let rank = MatrixGF::vstack(&useful.iter().collect::<Vec<_>>())
                .expect("shapes")
                .rank();
            if rank != r * n {
                lifted.push(Failure {
                    condition: Condition::LiftedUsefulDataRank,
                    witness: Witness::Node { node: i, rank },
                });
            }
            for j in (0..k).filter(|&j| j != i) {
                let mut parts = vec![r_of(j).clone()];
                for l in 0..r {
                    parts.push(r_of(k + l).mul(&grid[l][j]).expect("shapes"));
                }
                let rank = MatrixGF::vstack(&parts.iter().collect::<Vec<_>>())
                    .expect("shapes")
                    .rank();
                if rank != n {
                    lifted.push(Failure {
                        condition: Condition::LiftedInterferenceRank,
                        witness: Witness::Pair {
                            node: i,
                            helper: j,
                            rank,
                        },
                    });
                }
            }
        }
        report.repair_ok = Some(lifted.is_empty());
        report.failures.extend(lifted);
    }

    let mds = sub_block_failures(grid, exec);
    report.mds_ok = Some(mds.is_empty());
    report.failures.extend(mds);
    report
}
