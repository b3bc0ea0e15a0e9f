//! Single-node repair of the transformed code with download and access
//! accounting.
//!
//! A failed systematic node `i` receives `R_{i,j} f_j` (`N` symbols) from
//! every other node. Parity downloads arrive mixed in pairs; each pair is
//! split with the theta system, after which every instance is repaired by the
//! base code's own procedure. A failed parity node receives the instance
//! block that matches its index from every other node and re-encodes.

use std::fmt;

use crate::basecode::SystematicRepair;
use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::transform::{MsrCode, PairSolver};

/// Accounting of one repair, or of the same repair summed over stripes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairTrace {
    pub node: usize,
    pub helpers: Vec<usize>,
    /// Symbols sent by each helper.
    pub downloaded: Vec<usize>,
    /// Symbols read from disk by each helper.
    pub accessed: Vec<usize>,
    /// Optimal download per helper (`N` per stripe).
    pub optimal_per_helper: usize,
    pub stripes: usize,
}

impl RepairTrace {
    pub fn total(&self) -> usize {
        self.downloaded.iter().sum()
    }

    pub fn total_accessed(&self) -> usize {
        self.accessed.iter().sum()
    }

    /// `(k + r - 1) * N` per stripe.
    pub fn optimal_total(&self) -> usize {
        self.helpers.len() * self.optimal_per_helper
    }

    pub fn is_optimal(&self) -> bool {
        self.downloaded.iter().all(|&d| d == self.optimal_per_helper)
    }

    pub fn is_access_optimal(&self) -> bool {
        self.accessed.iter().all(|&a| a == self.optimal_per_helper)
    }

    /// Downloaded over optimal.
    pub fn ratio(&self) -> f64 {
        self.total() as f64 / self.optimal_total() as f64
    }

    /// Adds another stripe's trace of the same repair.
    pub fn absorb(&mut self, other: &RepairTrace) {
        assert_eq!(self.node, other.node, "traces of different nodes");
        assert_eq!(self.helpers, other.helpers, "traces with different helpers");
        for (d, o) in self.downloaded.iter_mut().zip(&other.downloaded) {
            *d += o;
        }
        for (a, o) in self.accessed.iter_mut().zip(&other.accessed) {
            *a += o;
        }
        self.optimal_per_helper += other.optimal_per_helper;
        self.stripes += other.stripes;
    }

    fn scaled(&self, stripes: usize) -> RepairTrace {
        RepairTrace {
            node: self.node,
            helpers: self.helpers.clone(),
            downloaded: self.downloaded.iter().map(|d| d * stripes).collect(),
            accessed: self.accessed.iter().map(|a| a * stripes).collect(),
            optimal_per_helper: self.optimal_per_helper * stripes,
            stripes: self.stripes * stripes,
        }
    }
}

/// `repair node=<id> helpers=<d> per_helper=<N> total=<T> optimal=<bool> access_optimal=<bool>`.
/// `per_helper` is the largest single-helper download.
impl fmt::Display for RepairTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "repair node={} helpers={} per_helper={} total={} optimal={} access_optimal={}",
            self.node,
            self.helpers.len(),
            self.downloaded.iter().max().copied().unwrap_or(0),
            self.total(),
            self.is_optimal(),
            self.is_access_optimal()
        )
    }
}

#[derive(Debug, Clone)]
enum Strategy {
    Systematic {
        base: SystematicRepair,
        // (a, b, solver) for parity pairs a < b
        pairs: Vec<(usize, usize, PairSolver)>,
    },
    Parity,
}

/// Precomputed repair of one node, reusable across stripes.
#[derive(Debug, Clone)]
pub struct RepairPlan<'a> {
    msr: &'a MsrCode,
    node: usize,
    strategy: Strategy,
    template: RepairTrace,
}

impl<'a> RepairPlan<'a> {
    pub fn new(msr: &'a MsrCode, node: usize) -> Result<Self> {
        let (k, r, n) = (msr.k(), msr.r(), msr.n());
        if node >= k + r {
            return Err(Error::IndexOutOfRange(format!("node {node}")));
        }
        let helpers: Vec<usize> = (0..k + r).filter(|&h| h != node).collect();
        let (strategy, accessed) = if node < k {
            let set = msr.repair_matrices()?;
            let base = SystematicRepair::new(msr.base(), node)?;
            let mut pairs = Vec::new();
            for a in 0..r {
                for b in a + 1..r {
                    pairs.push((a, b, msr.theta().pair(a, b)?));
                }
            }
            let accessed = helpers
                .iter()
                .map(|&h| set.get(node, h).expect("helper").nonzero_columns())
                .collect();
            (Strategy::Systematic { base, pairs }, accessed)
        } else {
            (Strategy::Parity, vec![n; helpers.len()])
        };
        let template = RepairTrace {
            node,
            downloaded: vec![n; helpers.len()],
            helpers,
            accessed,
            optimal_per_helper: n,
            stripes: 1,
        };
        Ok(Self {
            msr,
            node,
            strategy,
            template,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn helpers(&self) -> &[usize] {
        &self.template.helpers
    }

    /// Trace of one stripe.
    pub fn trace(&self) -> RepairTrace {
        self.template.clone()
    }

    /// Trace of `stripes` stripes.
    pub fn trace_for(&self, stripes: usize) -> RepairTrace {
        self.template.scaled(stripes)
    }

    /// What `helper` sends, computed from its stored content.
    pub fn helper_payload(&self, helper: usize, content: &[Elem]) -> Result<Vec<Elem>> {
        let msr = self.msr;
        if helper == self.node || helper >= msr.node_count() {
            return Err(Error::IndexOutOfRange(format!("helper {helper}")));
        }
        if content.len() != msr.capacity() {
            return Err(Error::DimensionMismatch(format!(
                "helper {helper} holds {} symbols, expected {}",
                content.len(),
                msr.capacity()
            )));
        }
        match self.strategy {
            Strategy::Systematic { .. } => {
                let blocks = msr
                    .repair_matrices()?
                    .blocks(self.node, helper)
                    .expect("helper");
                let mut out = Vec::with_capacity(msr.n());
                for (l, s) in blocks.iter().enumerate() {
                    out.extend(s.mul_vec(&content[msr.instance_range(l)])?);
                }
                Ok(out)
            }
            Strategy::Parity => {
                let j = self.node - msr.k();
                Ok(content[msr.instance_range(j)].to_vec())
            }
        }
    }

    /// Rebuilds the failed node from `payloads` (indexed by node id; the
    /// failed node's slot is ignored).
    pub fn regenerate(&self, payloads: &[Option<Vec<Elem>>]) -> Result<Vec<Elem>> {
        let msr = self.msr;
        let (k, r, n) = (msr.k(), msr.r(), msr.n());
        if payloads.len() != k + r {
            return Err(Error::DimensionMismatch(format!(
                "expected {} payload slots, got {}",
                k + r,
                payloads.len()
            )));
        }
        let mut got = Vec::with_capacity(k + r);
        for (id, p) in payloads.iter().enumerate() {
            if id == self.node {
                got.push(&[][..]);
                continue;
            }
            let p = p
                .as_deref()
                .ok_or_else(|| Error::DimensionMismatch(format!("no payload from helper {id}")))?;
            if p.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "helper {id} sent {} symbols, expected {n}",
                    p.len()
                )));
            }
            got.push(p);
        }
        match &self.strategy {
            Strategy::Systematic { base, pairs } => {
                self.regenerate_systematic(base, pairs, &got)
            }
            Strategy::Parity => self.regenerate_parity(&got),
        }
    }

    fn regenerate_systematic(
        &self,
        base: &SystematicRepair,
        pairs: &[(usize, usize, PairSolver)],
        got: &[&[Elem]],
    ) -> Result<Vec<Elem>> {
        let msr = self.msr;
        let (k, r) = (msr.k(), msr.r());
        let width = msr.n() / r;
        let perms = msr.perms();
        let part = |id: usize, l: usize| &got[id][l * width..(l + 1) * width];
        // parity_dl[l][m]: S_{i,k+m} g_m^(l)
        let mut parity_dl: Vec<Vec<Vec<Elem>>> = vec![vec![Vec::new(); r]; r];
        for l in 0..r {
            parity_dl[l][perms.apply(l, l)] = part(k + l, l).to_vec();
        }
        for (a, b, solver) in pairs {
            let (a, b) = (*a, *b);
            let (u, v) = solver.solve(part(k + a, b), part(k + b, a));
            parity_dl[b][perms.apply(b, a)] = u;
            parity_dl[a][perms.apply(a, b)] = v;
        }
        let mut out = Vec::with_capacity(msr.capacity());
        for (l, parity_l) in parity_dl.iter().enumerate() {
            let slots: Vec<Option<&[Elem]>> = (0..k + r)
                .map(|id| {
                    if id == self.node {
                        None
                    } else if id < k {
                        Some(part(id, l))
                    } else {
                        Some(parity_l[id - k].as_slice())
                    }
                })
                .collect();
            out.extend(base.repair(&slots)?);
        }
        Ok(out)
    }

    fn regenerate_parity(&self, got: &[&[Elem]]) -> Result<Vec<Elem>> {
        let msr = self.msr;
        let (k, r) = (msr.k(), msr.r());
        let j = self.node - k;
        let field = msr.field();
        let theta = msr.theta();
        let perms = msr.perms();
        let g: Vec<Vec<Elem>> = (0..r).map(|s| msr.base().parity(s, &got[..k])).collect();
        // h_s^(j)
        let h: Vec<&[Elem]> = (0..r).map(|s| g[perms.apply(j, s)].as_slice()).collect();
        let mut out = Vec::with_capacity(msr.capacity());
        for l in 0..r {
            if l == j {
                out.extend_from_slice(h[j]);
                continue;
            }
            // h_j^(l) = f_{k+l}^(j) - theta(l,j) h_l^(j)
            let mut hjl = got[k + l].to_vec();
            field.axpy(&mut hjl, field.neg(theta.get(l, j)), h[l]);
            let mut cell = h[l].to_vec();
            field.axpy(&mut cell, theta.get(j, l), &hjl);
            out.extend(cell);
        }
        Ok(out)
    }

    /// Runs the whole exchange: every surviving node computes its payload
    /// and the newcomer regenerates.
    pub fn repair(&self, nodes: &[Option<&[Elem]>]) -> Result<(Vec<Elem>, RepairTrace)> {
        let msr = self.msr;
        if nodes.len() != msr.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} node slots, got {}",
                msr.node_count(),
                nodes.len()
            )));
        }
        let payloads = nodes
            .iter()
            .enumerate()
            .map(|(id, content)| {
                if id == self.node {
                    return Ok(None);
                }
                let content = content.ok_or_else(|| {
                    Error::TooManyFailures(nodes.iter().filter(|n| n.is_none()).count())
                })?;
                self.helper_payload(id, content).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut trace = self.trace();
        for (slot, &h) in trace.helpers.iter().enumerate() {
            trace.downloaded[slot] = payloads[h].as_ref().map_or(0, Vec::len);
        }
        Ok((self.regenerate(&payloads)?, trace))
    }
}

/// Repairs systematic node `i`.
pub fn repair_systematic(
    msr: &MsrCode,
    i: usize,
    nodes: &[Option<&[Elem]>],
) -> Result<(Vec<Elem>, RepairTrace)> {
    if i >= msr.k() {
        return Err(Error::IndexOutOfRange(format!("systematic node {i}")));
    }
    RepairPlan::new(msr, i)?.repair(nodes)
}

/// Repairs parity node `j` (node id `k + j`). Works without base repair
/// matrices.
pub fn repair_parity(
    msr: &MsrCode,
    j: usize,
    nodes: &[Option<&[Elem]>],
) -> Result<(Vec<Elem>, RepairTrace)> {
    if j >= msr.r() {
        return Err(Error::IndexOutOfRange(format!("parity node {j}")));
    }
    RepairPlan::new(msr, msr.k() + j)?.repair(nodes)
}

/// Repairs any node by id.
pub fn repair_node(
    msr: &MsrCode,
    id: usize,
    nodes: &[Option<&[Elem]>],
) -> Result<(Vec<Elem>, RepairTrace)> {
    RepairPlan::new(msr, id)?.repair(nodes)
}

#[cfg(test)]
mod tests;
