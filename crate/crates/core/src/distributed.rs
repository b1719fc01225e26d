//! Decentralized consensus: minimize Σ g_i(x_i) subject to x_1 = … = x_n
//! over a connected graph, with agreement encoded by the graph Laplacian.
//!
//! Nodes are simulated in synchronous rounds. Each application of L is one
//! round of neighbor communication; prox evaluations are local.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::operators::{Laplacian, LinearMap, DEFAULT_NORM_TOL};
use crate::prox::ProxFunction;
use crate::vector::{axpy, lincomb, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    nodes: usize,
    dim: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Validates a simple graph with positive edge weights.
    pub fn new(nodes: usize, dim: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if nodes == 0 || dim == 0 {
            return Err(Error::InvalidInput("graph needs at least one node and d ≥ 1".into()));
        }
        let mut seen = HashSet::new();
        for &(i, j, w) in &edges {
            if i >= nodes || j >= nodes {
                return Err(Error::InvalidInput(format!("edge ({i}, {j}) out of range for {nodes} nodes")));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at node {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("edge ({i}, {j}) has non-positive weight {w}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidInput(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Graph { nodes, dim, edges })
    }

    pub fn unweighted(nodes: usize, dim: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(nodes, dim, edges.iter().map(|&(i, j)| (i, j, 1.0)).collect())
    }

    pub fn path(nodes: usize, dim: usize) -> Result<Self> {
        let e: Vec<_> = (1..nodes).map(|i| (i - 1, i)).collect();
        Self::unweighted(nodes, dim, &e)
    }

    pub fn complete(nodes: usize, dim: usize) -> Result<Self> {
        let e: Vec<_> = (0..nodes).flat_map(|i| (i + 1..nodes).map(move |j| (i, j))).collect();
        Self::unweighted(nodes, dim, &e)
    }

    /// Node 0 joined to nodes 1..n.
    pub fn star(nodes: usize, dim: usize) -> Result<Self> {
        let e: Vec<_> = (1..nodes).map(|j| (0, j)).collect();
        Self::unweighted(nodes, dim, &e)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.nodes];
        for &(i, j, _) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.nodes
    }
}

/// Weighted Laplacian of a connected graph, acting blockwise on ℝ^{n·d}.
pub fn laplacian(graph: &Graph) -> Result<LinearMap> {
    if !graph.is_connected() {
        return Err(Error::Configuration("graph is not connected".into()));
    }
    let mut neighbors = vec![Vec::new(); graph.nodes];
    for &(i, j, w) in &graph.edges {
        neighbors[i].push((j, w));
        neighbors[j].push((i, w));
    }
    Ok(LinearMap::Laplacian(Laplacian {
        nodes: graph.nodes,
        block: graph.dim,
        neighbors,
    }))
}

#[derive(Debug, Clone)]
pub struct ConsensusProblem {
    pub graph: Graph,
    pub local: Vec<ProxFunction>,
}

impl ConsensusProblem {
    pub fn new(graph: Graph, local: Vec<ProxFunction>) -> Result<Self> {
        if local.len() != graph.nodes {
            return Err(Error::DimensionMismatch {
                context: "per-node functions",
                expected: graph.nodes,
                found: local.len(),
            });
        }
        if let Some(g) = local.iter().find(|g| g.dim() != graph.dim) {
            return Err(Error::DimensionMismatch {
                context: "per-node function dimension",
                expected: graph.dim,
                found: g.dim(),
            });
        }
        Ok(ConsensusProblem { graph, local })
    }

    /// g(x) = Σ g_i(x_i) on the stacked node-major vector.
    pub fn joint(&self) -> ProxFunction {
        ProxFunction::Separable(self.local.clone())
    }

    pub fn total_dim(&self) -> usize {
        self.graph.nodes * self.graph.dim
    }
}

/// max_i ‖x_i − mean(x)‖ over node blocks of size `d`.
pub fn consensus_gap(x: &[f64], d: usize) -> f64 {
    let n = x.len() / d;
    let mut mean = vec![0.0; d];
    for block in x.chunks(d) {
        axpy(1.0 / n as f64, block, &mut mean);
    }
    x.chunks(d)
        .map(|b| norm(&lincomb(1.0, b, -1.0, &mean)))
        .fold(0.0, f64::max)
}

/// Counts applications of the wrapped map; each is one communication round.
#[derive(Debug)]
pub struct CountingMap<'a> {
    map: &'a LinearMap,
    count: usize,
}

impl<'a> CountingMap<'a> {
    pub fn new(map: &'a LinearMap) -> Self {
        CountingMap { map, count: 0 }
    }

    pub fn apply(&mut self, x: &[f64]) -> Vec<f64> {
        self.count += 1;
        self.map.mul(x)
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusRecord {
    pub k: usize,
    pub gap_x: f64,
    pub gap_s: f64,
    /// Σ g_i evaluated at the running average s^k.
    pub objective_s: f64,
    pub comm_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusTrace {
    pub records: Vec<ConsensusRecord>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub comm_count: usize,
    pub laplacian_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOptions {
    pub max_iters: usize,
    pub record_every: usize,
    pub x0: Option<Vec<f64>>,
    /// Stop once the consensus gap of x^k drops to this value.
    pub gap_tol: Option<f64>,
}

impl Default for ConsensusOptions {
    fn default() -> Self {
        ConsensusOptions {
            max_iters: 1000,
            record_every: 1,
            x0: None,
            gap_tol: None,
        }
    }
}

struct Setup {
    l: LinearMap,
    norm: f64,
    g: ProxFunction,
    x0: Vec<f64>,
}

fn setup(cp: &ConsensusProblem, opts: &ConsensusOptions) -> Result<Setup> {
    let l = laplacian(&cp.graph)?;
    let norm = l.norm().value * (1.0 + DEFAULT_NORM_TOL);
    let x0 = opts.x0.clone().unwrap_or_else(|| vec![0.0; cp.total_dim()]);
    if x0.len() != cp.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "consensus initial point",
            expected: cp.total_dim(),
            found: x0.len(),
        });
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidInput("record_every must be at least 1".into()));
    }
    Ok(Setup {
        l,
        norm,
        g: cp.joint(),
        x0,
    })
}

fn check_positive(lambda: f64, tau: f64) -> Result<()> {
    if lambda > 0.0 && tau > 0.0 && lambda.is_finite() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("lambda and tau must be positive (got {lambda}, {tau})")))
    }
}

struct Recorder<'a> {
    cp: &'a ConsensusProblem,
    opts: &'a ConsensusOptions,
    records: Vec<ConsensusRecord>,
}

impl Recorder<'_> {
    /// Records iteration k when due; returns true once the gap target is met.
    fn observe(&mut self, k: usize, x: &[f64], s: &[f64], comm: usize) -> bool {
        let d = self.cp.graph.dim;
        let gap_x = consensus_gap(x, d);
        let done = self.opts.gap_tol.is_some_and(|t| gap_x <= t);
        if k.is_multiple_of(self.opts.record_every) || k == self.opts.max_iters || done {
            self.records.push(ConsensusRecord {
                k,
                gap_x,
                gap_s: consensus_gap(s, d),
                objective_s: self.cp.joint().value(s),
                comm_count: comm,
            });
        }
        done
    }
}

/// Primal scheme on √L x = 0 using only L = (√L)ᵀ√L:
/// x ← prox_{τg}(x − λL(x + k s)), one communication per iteration.
/// Requires λ‖L‖ < 1.
pub fn run_consensus(cp: &ConsensusProblem, lambda: f64, tau: f64, opts: &ConsensusOptions) -> Result<ConsensusTrace> {
    check_positive(lambda, tau)?;
    let st = setup(cp, opts)?;
    let value = lambda * st.norm;
    if value >= 1.0 {
        return Err(Error::StepSize {
            condition: "lambda*|L| < 1",
            value,
        });
    }
    let mut l = CountingMap::new(&st.l);
    let mut x = st.x0.clone();
    let mut s = st.x0;
    let mut rec = Recorder {
        cp,
        opts,
        records: Vec::new(),
    };
    rec.observe(0, &x, &s, 0);
    for k in 0..opts.max_iters {
        let kf = k as f64;
        let w = l.apply(&lincomb(1.0, &x, kf, &s));
        let mut z = x;
        axpy(-lambda, &w, &mut z);
        x = st.g.prox(tau, &z);
        s = lincomb(1.0 / (kf + 1.0), &x, kf / (kf + 1.0), &s);
        if rec.observe(k + 1, &x, &s, l.count()) {
            break;
        }
    }
    Ok(ConsensusTrace {
        records: rec.records,
        x,
        s,
        comm_count: l.count(),
        laplacian_norm: st.norm,
    })
}

/// PDHG on Lx = 0 with σ = λ/τ: y ← y + σLx̄, x ← prox_{τg}(x − τLy).
/// Two communications per iteration; requires λ‖L‖² < 1.
pub fn run_consensus_pdhg_baseline(
    cp: &ConsensusProblem,
    lambda: f64,
    tau: f64,
    opts: &ConsensusOptions,
) -> Result<ConsensusTrace> {
    check_positive(lambda, tau)?;
    let st = setup(cp, opts)?;
    let value = lambda * st.norm * st.norm;
    if value >= 1.0 {
        return Err(Error::StepSize {
            condition: "lambda*|L|^2 < 1",
            value,
        });
    }
    let sigma = lambda / tau;
    let mut l = CountingMap::new(&st.l);
    let mut x = st.x0.clone();
    let mut x_prev = st.x0.clone();
    let mut s = st.x0;
    let mut y = vec![0.0; x.len()];
    let mut rec = Recorder {
        cp,
        opts,
        records: Vec::new(),
    };
    rec.observe(0, &x, &s, 0);
    for k in 0..opts.max_iters {
        let kf = k as f64;
        let xbar = lincomb(2.0, &x, -1.0, &x_prev);
        axpy(sigma, &l.apply(&xbar), &mut y);
        let mut z = x.clone();
        axpy(-tau, &l.apply(&y), &mut z);
        x_prev = x;
        x = st.g.prox(tau, &z);
        s = lincomb(1.0 / (kf + 1.0), &x, kf / (kf + 1.0), &s);
        if rec.observe(k + 1, &x, &s, l.count()) {
            break;
        }
    }
    Ok(ConsensusTrace {
        records: rec.records,
        x,
        s,
        comm_count: l.count(),
        laplacian_norm: st.norm,
    })
}
