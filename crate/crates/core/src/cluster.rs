//! In-memory storage cluster: stripes of data spread over `k + r` nodes,
//! failure injection, repair, degraded reads and bandwidth metrics.
//!
//! Stripe `s` holds `k * rN` source symbols; systematic node `i` stores
//! symbols `[i rN, (i+1) rN)` of it, and every node keeps its stripes back to
//! back (`stripes * rN` symbols).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::par::Exec;
use crate::reconstruct::ReconstructionPlan;
use crate::repair::{RepairPlan, RepairTrace};
use crate::transform::MsrCode;

/// Encodes `source` (`stripes * k * rN` symbols) into `k + r` node contents.
pub fn encode_stripes(msr: &MsrCode, source: &[Elem], exec: Exec) -> Result<Vec<Vec<Elem>>> {
    let (k, cap) = (msr.k(), msr.capacity());
    let stripe_len = k * cap;
    if !source.len().is_multiple_of(stripe_len) {
        return Err(Error::DimensionMismatch(format!(
            "source length {} is not a multiple of the stripe size {stripe_len}",
            source.len()
        )));
    }
    let stripes = source.len() / stripe_len;
    let encoded = exec.map_range(stripes, |s| {
        let stripe = &source[s * stripe_len..(s + 1) * stripe_len];
        let parts: Vec<&[Elem]> = stripe.chunks(cap).collect();
        msr.encode(&parts).map(|cw| cw.into_nodes())
    });
    let mut nodes = vec![Vec::with_capacity(stripes * cap); msr.node_count()];
    for cw in encoded {
        for (node, part) in nodes.iter_mut().zip(cw?) {
            node.extend(part);
        }
    }
    Ok(nodes)
}

/// Repairs one node over every stripe. `nodes[id]` is `None` for the failed
/// node; all others must be present.
pub fn repair_stripes(
    plan: &RepairPlan<'_>,
    cap: usize,
    nodes: &[Option<&[Elem]>],
    exec: Exec,
) -> Result<(Vec<Elem>, RepairTrace)> {
    let len = nodes
        .iter()
        .flatten()
        .map(|n| n.len())
        .next()
        .unwrap_or(0);
    let stripes = len / cap;
    let results = exec.map_range(stripes, |s| {
        let view: Vec<Option<&[Elem]>> = nodes
            .iter()
            .map(|n| n.map(|c| &c[s * cap..(s + 1) * cap]))
            .collect();
        plan.repair(&view)
    });
    let mut content = Vec::with_capacity(len);
    let mut total = plan.trace_for(0);
    for r in results {
        let (part, trace) = r?;
        content.extend(part);
        total.absorb(&trace);
    }
    Ok((content, total))
}

/// Reads every stripe back from the `k` nodes of `plan`; `contents[m]`
/// belongs to `plan.available()[m]`.
pub fn read_stripes<V: AsRef<[Elem]> + Sync>(
    plan: &ReconstructionPlan<'_>,
    cap: usize,
    contents: &[V],
    exec: Exec,
) -> Result<Vec<Elem>> {
    let len = contents.first().map_or(0, |c| c.as_ref().len());
    let stripes = len / cap;
    let decoded = exec.map_range(stripes, |s| {
        let view: Vec<&[Elem]> = contents
            .iter()
            .map(|c| &c.as_ref()[s * cap..(s + 1) * cap])
            .collect();
        plan.reconstruct(&view)
    });
    let mut out = Vec::with_capacity(len * contents.len());
    for d in decoded {
        for part in d? {
            out.extend(part);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Alive,
    Failed,
}

/// Per-node repair counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeMetrics {
    pub repairs: usize,
    pub downloaded: usize,
    pub accessed: usize,
    pub optimal: usize,
}

/// Cumulative counters of a cluster.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub repairs: usize,
    pub downloaded: usize,
    pub accessed: usize,
    pub optimal: usize,
    /// Download-everything baseline: `k * rN` per stripe and repair.
    pub naive: usize,
    pub reads: usize,
    pub degraded_reads: usize,
    pub per_node: Vec<NodeMetrics>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone)]
pub struct ClusterState {
    msr: MsrCode,
    stripes: usize,
    nodes: Vec<Option<Vec<Elem>>>,
    source: Vec<Elem>,
    metrics: Metrics,
    exec: Exec,
}

/// Cluster filled with seeded random field symbols.
pub fn cluster_new(msr: &MsrCode, stripes: usize, seed: u64) -> ClusterState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = msr.field().order();
    let source = (0..stripes * msr.k() * msr.capacity())
        .map(|_| rng.gen_range(0..q))
        .collect();
    ClusterState::from_source(msr, source).expect("whole stripes")
}

impl ClusterState {
    /// Cluster holding `source`, which must fill whole stripes.
    pub fn from_source(msr: &MsrCode, source: Vec<Elem>) -> Result<Self> {
        let exec = Exec::default();
        let nodes = encode_stripes(msr, &source, exec)?;
        let stripes = source.len() / (msr.k() * msr.capacity());
        Ok(Self {
            msr: msr.clone(),
            stripes,
            nodes: nodes.into_iter().map(Some).collect(),
            source,
            metrics: Metrics {
                per_node: vec![NodeMetrics::default(); msr.node_count()],
                ..Metrics::default()
            },
            exec,
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn msr(&self) -> &MsrCode {
        &self.msr
    }

    pub fn stripes(&self) -> usize {
        self.stripes
    }

    pub fn status(&self, id: usize) -> NodeStatus {
        if self.nodes[id].is_some() {
            NodeStatus::Alive
        } else {
            NodeStatus::Failed
        }
    }

    pub fn failed(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&id| self.nodes[id].is_none())
            .collect()
    }

    /// Stored symbols of a live node.
    pub fn node(&self, id: usize) -> Option<&[Elem]> {
        self.nodes.get(id)?.as_deref()
    }

    pub fn source(&self) -> &[Elem] {
        &self.source
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.nodes.len() {
            return Err(Error::IndexOutOfRange(format!("node {id}")));
        }
        Ok(())
    }

    /// Drops a node's content.
    pub fn fail(&mut self, id: usize) -> Result<()> {
        self.check_id(id)?;
        if self.nodes[id].take().is_none() {
            return Err(Error::AlreadyFailed(id));
        }
        Ok(())
    }

    /// Repairs `id`, which must be the only failed node.
    pub fn repair_node(&mut self, id: usize) -> Result<RepairTrace> {
        self.check_id(id)?;
        if self.nodes[id].is_some() {
            return Err(Error::NotFailed(id));
        }
        let failed = self.failed().len();
        if failed > 1 {
            return Err(Error::TooManyFailures(failed));
        }
        let plan = RepairPlan::new(&self.msr, id)?;
        let view: Vec<Option<&[Elem]>> = self.nodes.iter().map(|n| n.as_deref()).collect();
        let (content, trace) = repair_stripes(&plan, self.msr.capacity(), &view, self.exec)?;
        self.nodes[id] = Some(content);

        let m = &mut self.metrics;
        m.repairs += 1;
        m.downloaded += trace.total();
        m.accessed += trace.total_accessed();
        m.optimal += trace.optimal_total();
        m.naive += self.stripes * self.msr.k() * self.msr.capacity();
        let node = &mut m.per_node[id];
        node.repairs += 1;
        node.downloaded += trace.total();
        node.accessed += trace.total_accessed();
        node.optimal += trace.optimal_total();
        Ok(trace)
    }

    fn read_plan(&self) -> Result<Option<ReconstructionPlan<'_>>> {
        let (k, r) = (self.msr.k(), self.msr.r());
        let failed = self.failed();
        if failed.len() > r {
            return Err(Error::TooManyFailures(failed.len()));
        }
        if failed.iter().all(|&id| id >= k) {
            return Ok(None);
        }
        let alive: Vec<usize> = (0..k + r).filter(|&id| self.nodes[id].is_some()).take(k).collect();
        Ok(Some(ReconstructionPlan::new(&self.msr, &alive)?))
    }

    /// Source symbols of one stripe, decoded from live nodes.
    pub fn degrade_read(&mut self, stripe: usize) -> Result<Vec<Elem>> {
        if stripe >= self.stripes {
            return Err(Error::IndexOutOfRange(format!("stripe {stripe}")));
        }
        let cap = self.msr.capacity();
        let range = stripe * cap..(stripe + 1) * cap;
        let out = match self.read_plan()? {
            None => {
                let mut out = Vec::with_capacity(self.msr.k() * cap);
                for node in &self.nodes[..self.msr.k()] {
                    out.extend_from_slice(&node.as_ref().expect("alive")[range.clone()]);
                }
                out
            }
            Some(plan) => {
                let contents: Vec<&[Elem]> = plan
                    .available()
                    .iter()
                    .map(|&id| &self.nodes[id].as_ref().expect("alive")[range.clone()])
                    .collect();
                let parts = plan.reconstruct(&contents)?;
                self.metrics.degraded_reads += 1;
                parts.concat()
            }
        };
        self.metrics.reads += 1;
        Ok(out)
    }

    /// All source symbols, decoded from live nodes.
    pub fn read_all(&self) -> Result<Vec<Elem>> {
        let k = self.msr.k();
        match self.read_plan()? {
            None => {
                let cap = self.msr.capacity();
                let mut out = Vec::with_capacity(self.source.len());
                for s in 0..self.stripes {
                    for node in &self.nodes[..k] {
                        out.extend_from_slice(&node.as_ref().expect("alive")[s * cap..(s + 1) * cap]);
                    }
                }
                Ok(out)
            }
            Some(plan) => {
                let contents: Vec<&[Elem]> = plan
                    .available()
                    .iter()
                    .map(|&id| self.nodes[id].as_deref().expect("alive"))
                    .collect();
                read_stripes(&plan, self.msr.capacity(), &contents, self.exec)
            }
        }
    }

    /// Human-readable metrics.
    pub fn metrics_report(&self) -> String {
        let m = &self.metrics;
        let mut out = String::new();
        let _ = writeln!(out, "stripes: {}", self.stripes);
        let _ = writeln!(out, "repairs: {}", m.repairs);
        let _ = writeln!(out, "downloaded symbols: {}", m.downloaded);
        let _ = writeln!(out, "accessed symbols: {}", m.accessed);
        let _ = writeln!(out, "optimal symbols: {}", m.optimal);
        let _ = writeln!(out, "naive symbols: {}", m.naive);
        let _ = writeln!(out, "bandwidth ratio: {:.6}", ratio(m.downloaded, m.optimal));
        let _ = writeln!(out, "naive ratio: {:.6}", ratio(m.downloaded, m.naive));
        let _ = writeln!(out, "reads: {} (degraded {})", m.reads, m.degraded_reads);
        for (id, n) in m.per_node.iter().enumerate() {
            let _ = writeln!(
                out,
                "node {id}: repairs={} downloaded={} accessed={} ratio={:.6} access_ratio={:.6}",
                n.repairs,
                n.downloaded,
                n.accessed,
                ratio(n.downloaded, n.optimal),
                ratio(n.accessed, n.optimal)
            );
        }
        out
    }

    /// Machine-readable `key=value` metrics, one per line.
    pub fn metrics_kv(&self) -> String {
        let m = &self.metrics;
        let mut out = String::new();
        let _ = writeln!(out, "stripes={}", self.stripes);
        let _ = writeln!(out, "repairs={}", m.repairs);
        let _ = writeln!(out, "downloaded={}", m.downloaded);
        let _ = writeln!(out, "accessed={}", m.accessed);
        let _ = writeln!(out, "optimal={}", m.optimal);
        let _ = writeln!(out, "naive={}", m.naive);
        let _ = writeln!(out, "ratio={:.6}", ratio(m.downloaded, m.optimal));
        let _ = writeln!(out, "naive_ratio={:.6}", ratio(m.downloaded, m.naive));
        let _ = writeln!(out, "reads={}", m.reads);
        let _ = writeln!(out, "degraded_reads={}", m.degraded_reads);
        for (id, n) in m.per_node.iter().enumerate() {
            let _ = writeln!(out, "node.{id}.repairs={}", n.repairs);
            let _ = writeln!(out, "node.{id}.downloaded={}", n.downloaded);
            let _ = writeln!(out, "node.{id}.accessed={}", n.accessed);
            let _ = writeln!(out, "node.{id}.ratio={:.6}", ratio(n.downloaded, n.optimal));
            let _ = writeln!(out, "node.{id}.access_ratio={:.6}", ratio(n.accessed, n.optimal));
        }
        out
    }

    /// Runs `fail <id>`, `repair <id>` and `read <stripe>` lines (`#`
    /// comments allowed) and returns one output line per operation.
    pub fn run_script(&mut self, script: &str) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for (no, line) in script.lines().enumerate() {
            let line_no = no + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = body.split_whitespace().collect();
            let arg = match tokens.as_slice() {
                [_, v] => v.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("`{v}` is not a non-negative integer"),
                })?,
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected `<op> <integer>`".into(),
                    })
                }
            };
            match tokens[0] {
                "fail" => {
                    self.fail(arg)?;
                    out.push(format!("fail node={arg}"));
                }
                "repair" => {
                    let trace = self.repair_node(arg)?;
                    out.push(trace.to_string());
                }
                "read" => {
                    let data = self.degrade_read(arg)?;
                    let stripe_len = self.msr.k() * self.msr.capacity();
                    let ok = data == self.source[arg * stripe_len..(arg + 1) * stripe_len];
                    out.push(format!(
                        "read stripe={arg} failed={} ok={ok}",
                        self.failed().len()
                    ));
                }
                op => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown operation `{op}`"),
                    })
                }
            }
        }
        Ok(out)
    }
}
