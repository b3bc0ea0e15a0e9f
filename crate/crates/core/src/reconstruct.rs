//! Data reconstruction from any `k` nodes of the transformed code.
//!
//! With `I` the missing systematic nodes and `J` the connected parities
//! (`|I| = |J| = t`), the data comes back in three phases:
//!
//! 1. inside `J`, every pair of mixed symbols `f_{k+a}^(b)`, `f_{k+b}^(a)` is
//!    split into `h_a^(b)` and `h_b^(a)`;
//! 2. each instance `s` in `J` now has `t` base parities and is decoded by
//!    the base code;
//! 3. for the other instances `l`, the known `h_l^(a)` is stripped from
//!    `f_{k+a}^(l)` and the remainder divided by `theta(a,l)`, after which
//!    instance `l` is decoded too.

use crate::basecode::BaseDecoder;
use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::linalg::MatrixGF;
use crate::transform::{MsrCode, PairSolver};

/// Decoding schedule for one choice of `k` nodes.
#[derive(Debug, Clone)]
pub struct ReconstructionPlan<'a> {
    msr: &'a MsrCode,
    available: Vec<usize>,
    // node id -> position in `available`
    position: Vec<Option<usize>>,
    missing: Vec<usize>,
    connected: Vec<usize>,
    pairs: Vec<(usize, usize, PairSolver)>,
    decoders: Vec<BaseDecoder>,
    // theta(a, l)^-1 indexed [a][l]
    theta_inv: Vec<Vec<Elem>>,
}

impl<'a> ReconstructionPlan<'a> {
    pub fn new(msr: &'a MsrCode, available: &[usize]) -> Result<Self> {
        let (k, r) = (msr.k(), msr.r());
        let mut position = vec![None; k + r];
        for (pos, &id) in available.iter().enumerate() {
            if id >= k + r {
                return Err(Error::IndexOutOfRange(format!("node {id}")));
            }
            position[id] = Some(pos);
        }
        let distinct = position.iter().flatten().count();
        if available.len() != k || distinct != k {
            return Err(Error::WrongCount {
                expected: k,
                got: distinct,
            });
        }
        let missing: Vec<usize> = (0..k).filter(|&i| position[i].is_none()).collect();
        let connected: Vec<usize> = (0..r).filter(|&j| position[k + j].is_some()).collect();
        let known: Vec<usize> = (0..k).filter(|&i| position[i].is_some()).collect();

        let mut pairs = Vec::new();
        for (x, &a) in connected.iter().enumerate() {
            for &b in &connected[x + 1..] {
                pairs.push((a, b, msr.theta().pair(a, b)?));
            }
        }
        let decoders = (0..r)
            .map(|s| {
                let mut ids = known.clone();
                ids.extend(connected.iter().map(|&j| k + msr.perms().apply(s, j)));
                BaseDecoder::new(msr.base(), &ids)
                    .map_err(|e| Error::ContractBreach(format!("instance {s}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let field = msr.field();
        let theta_inv = (0..r)
            .map(|a| {
                (0..r)
                    .map(|l| if a == l { Ok(1) } else { field.inv(msr.theta().get(a, l)) })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::ThetaSingular)?;
        Ok(Self {
            msr,
            available: available.to_vec(),
            position,
            missing,
            connected,
            pairs,
            decoders,
            theta_inv,
        })
    }

    pub fn available(&self) -> &[usize] {
        &self.available
    }

    /// Systematic nodes that are not connected (`I`).
    pub fn missing(&self) -> &[usize] {
        &self.missing
    }

    /// Connected parity indices (`J`).
    pub fn connected(&self) -> &[usize] {
        &self.connected
    }

    /// `contents[m]` belongs to node `available[m]`. Returns the `k`
    /// systematic node contents.
    pub fn reconstruct<V: AsRef<[Elem]>>(&self, contents: &[V]) -> Result<Vec<Vec<Elem>>> {
        let msr = self.msr;
        let (k, r, cap) = (msr.k(), msr.r(), msr.capacity());
        if contents.len() != k {
            return Err(Error::WrongCount {
                expected: k,
                got: contents.len(),
            });
        }
        if contents.iter().any(|c| c.as_ref().len() != cap) {
            return Err(Error::DimensionMismatch("node content length".into()));
        }
        let node = |id: usize| contents[self.position[id].expect("connected")].as_ref();
        let inst = |id: usize, l: usize| &node(id)[msr.instance_range(l)];
        if self.missing.is_empty() {
            return Ok((0..k).map(|i| node(i).to_vec()).collect());
        }
        let field = msr.field();
        let perms = msr.perms();
        let known: Vec<usize> = (0..k).filter(|&i| self.position[i].is_some()).collect();

        // h[l][j] = h_j^(l), filled for j in J
        let mut h: Vec<Vec<Option<Vec<Elem>>>> = vec![vec![None; r]; r];
        for &a in &self.connected {
            h[a][a] = Some(inst(k + a, a).to_vec());
        }
        for (a, b, solver) in &self.pairs {
            let (u, v) = solver.solve(inst(k + a, *b), inst(k + b, *a));
            h[*b][*a] = Some(u);
            h[*a][*b] = Some(v);
        }

        let mut instances: Vec<Option<Vec<Vec<Elem>>>> = vec![None; r];
        let decode = |l: usize, h_l: &[Option<Vec<Elem>>]| -> Result<Vec<Vec<Elem>>> {
            let mut inputs: Vec<&[Elem]> = known.iter().map(|&i| inst(i, l)).collect();
            for &j in &self.connected {
                inputs.push(h_l[j].as_deref().expect("recovered"));
            }
            self.decoders[l]
                .decode(&inputs)
                .map_err(|e| Error::ContractBreach(format!("instance {l}: {e}")))
        };
        for &s in &self.connected {
            instances[s] = Some(decode(s, &h[s])?);
        }

        for l in (0..r).filter(|l| !self.connected.contains(l)) {
            for &a in &self.connected {
                let decoded = instances[a].as_ref().expect("phase two");
                // h_l^(a) = g_{p_a(l)}^(a)
                let known_part = msr.base().parity(perms.apply(a, l), decoded);
                let mixed = field.sub_vec(inst(k + a, l), &known_part);
                h[l][a] = Some(field.scale(self.theta_inv[a][l], &mixed));
            }
            instances[l] = Some(decode(l, &h[l])?);
        }

        let mut out = vec![Vec::with_capacity(cap); k];
        for per_instance in instances {
            for (i, part) in per_instance.expect("all instances").into_iter().enumerate() {
                out[i].extend(part);
            }
        }
        Ok(out)
    }
}

/// Decodes `(node id, content)` pairs through the three-phase procedure.
pub fn reconstruct(msr: &MsrCode, nodes: &[(usize, Vec<Elem>)]) -> Result<Vec<Vec<Elem>>> {
    let ids: Vec<usize> = nodes.iter().map(|(id, _)| *id).collect();
    let contents: Vec<&[Elem]> = nodes.iter().map(|(_, c)| c.as_slice()).collect();
    ReconstructionPlan::new(msr, &ids)?.reconstruct(&contents)
}

/// Independent decoder: stacks the generator rows (`I` for systematic nodes,
/// `[B_{j,0} .. B_{j,k-1}]` for parity `j`) of the given nodes and solves
/// the `krN x krN` system in one go.
pub fn oracle_reconstruct(msr: &MsrCode, nodes: &[(usize, Vec<Elem>)]) -> Result<Vec<Vec<Elem>>> {
    let (k, r, cap) = (msr.k(), msr.r(), msr.capacity());
    let mut seen = vec![false; k + r];
    for (id, content) in nodes {
        if *id >= k + r {
            return Err(Error::IndexOutOfRange(format!("node {id}")));
        }
        if content.len() != cap {
            return Err(Error::DimensionMismatch("node content length".into()));
        }
        seen[*id] = true;
    }
    let distinct = seen.iter().filter(|&&s| s).count();
    if nodes.len() != k || distinct != k {
        return Err(Error::WrongCount {
            expected: k,
            got: distinct,
        });
    }
    let field = msr.field();
    let grid = msr.b_grid();
    let size = k * cap;
    let mut system = MatrixGF::zeros(field, size, size);
    let mut rhs = Vec::with_capacity(size);
    for (m, (id, content)) in nodes.iter().enumerate() {
        let row0 = m * cap;
        if *id < k {
            for x in 0..cap {
                system.set(row0 + x, id * cap + x, 1);
            }
        } else {
            for (j, b) in grid[id - k].iter().enumerate() {
                for x in 0..cap {
                    for y in 0..cap {
                        system.set(row0 + x, j * cap + y, b.get(x, y));
                    }
                }
            }
        }
        rhs.extend_from_slice(content);
    }
    let solution = system.solve(&rhs).map_err(|_| Error::SingularSystem)?;
    Ok(solution.chunks(cap).map(<[Elem]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::basecode::make_eigen_base;
    use crate::par::{subsets, Exec};
    use crate::transform::{transform, PermutationFamily, ThetaTable};

    fn build(r: usize, q: u32) -> MsrCode {
        let base = make_eigen_base(r, q, 11).unwrap();
        let theta = ThetaTable::new(base.field(), r, ThetaTable::default_a(base.field())).unwrap();
        transform(base, PermutationFamily::cyclic(r), theta).unwrap()
    }

    fn random_nodes(msr: &MsrCode, seed: u64) -> (Vec<Vec<Elem>>, Vec<Vec<Elem>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = msr.field().order();
        let data: Vec<Vec<Elem>> = (0..msr.k())
            .map(|_| (0..msr.capacity()).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        let nodes = msr.encode(&data).unwrap().into_nodes();
        (data, nodes)
    }

    fn pick(nodes: &[Vec<Elem>], ids: &[usize]) -> Vec<(usize, Vec<Elem>)> {
        ids.iter().map(|&id| (id, nodes[id].clone())).collect()
    }

    fn sweep(msr: &MsrCode, seed: u64) {
        let (data, nodes) = random_nodes(msr, seed);
        let ok = Exec::default().map(&subsets(msr.node_count(), msr.k()), |ids| {
            let chosen = pick(&nodes, ids);
            let fast = reconstruct(msr, &chosen).unwrap();
            let slow = oracle_reconstruct(msr, &chosen).unwrap();
            fast == data && slow == data
        });
        assert!(ok.iter().all(|&o| o));
    }

    #[test]
    fn all_subsets_agree_with_oracle() {
        sweep(&build(2, 5), 1);
        sweep(&build(3, 7), 2);
        sweep(&build(2, 16), 3);
    }

    #[test]
    fn systematic_nodes_pass_through() {
        let msr = build(3, 7);
        let (data, nodes) = random_nodes(&msr, 4);
        let plan = ReconstructionPlan::new(&msr, &[0, 1, 2, 3]).unwrap();
        assert!(plan.missing().is_empty() && plan.connected().is_empty());
        assert_eq!(plan.reconstruct(&nodes[..4]).unwrap(), data);
    }

    #[test]
    fn plan_sets_match_walkthrough_shape() {
        // (7,4) analogue of connecting nodes 2..: systematic 2, 3 and parities 0, 1.
        let msr = build(3, 7);
        let plan = ReconstructionPlan::new(&msr, &[5, 2, 4, 3]).unwrap();
        assert_eq!(plan.missing(), &[0, 1]);
        assert_eq!(plan.connected(), &[0, 1]);
        let (data, nodes) = random_nodes(&msr, 5);
        let contents: Vec<&[Elem]> = [5, 2, 4, 3].iter().map(|&id| nodes[id].as_slice()).collect();
        assert_eq!(plan.reconstruct(&contents).unwrap(), data);
    }

    #[test]
    fn zero_data() {
        let msr = build(2, 5);
        let zero = vec![vec![0; 4]; 5];
        let chosen = pick(&zero, &[2, 3, 4]);
        assert_eq!(reconstruct(&msr, &chosen).unwrap(), vec![vec![0; 4]; 3]);
        assert_eq!(oracle_reconstruct(&msr, &chosen).unwrap(), vec![vec![0; 4]; 3]);
    }

    #[test]
    fn errors() {
        let msr = build(2, 5);
        let zero = vec![vec![0; 4]; 5];
        assert!(matches!(
            reconstruct(&msr, &pick(&zero, &[0, 1])),
            Err(Error::WrongCount { expected: 3, got: 2 })
        ));
        assert!(matches!(
            reconstruct(&msr, &pick(&zero, &[0, 1, 1])),
            Err(Error::WrongCount { .. })
        ));
        assert!(matches!(
            oracle_reconstruct(&msr, &pick(&zero, &[0, 0, 1])),
            Err(Error::WrongCount { .. })
        ));
        assert!(matches!(
            ReconstructionPlan::new(&msr, &[0, 1, 9]),
            Err(Error::IndexOutOfRange(_))
        ));
        let short = vec![(0, vec![0; 3]), (1, vec![0; 4]), (2, vec![0; 4])];
        assert!(matches!(reconstruct(&msr, &short), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn non_mds_base_breaches_contract() {
        let good = make_eigen_base(2, 5, 11).unwrap();
        let f = good.field();
        let twin = good
            .with_coding(1, 0, good.coding(0, 0).clone())
            .and_then(|c| c.with_coding(1, 2, good.coding(0, 2).clone()))
            .and_then(|c| c.with_repair(None))
            .unwrap();
        let theta = ThetaTable::new(f, 2, 4).unwrap();
        let msr = MsrCode::new_unverified(twin, PermutationFamily::cyclic(2), theta).unwrap();
        // Both parities weigh f_0 and f_2 identically, so {1, 3, 4} cannot separate them.
        assert!(matches!(
            ReconstructionPlan::new(&msr, &[3, 4, 1]),
            Err(Error::ContractBreach(_))
        ));
        let zero = vec![vec![0; 4]; 5];
        assert_eq!(
            oracle_reconstruct(&msr, &pick(&zero, &[3, 4, 1])),
            Err(Error::SingularSystem)
        );
    }
}
