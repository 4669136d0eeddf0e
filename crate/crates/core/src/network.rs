//! Multiple-access networks, their equivalent point-to-point networks, max-flow,
//! and random linear network codes.
//!
//! A [`MacNetwork`] has ordinary nodes, MACs, point-to-point links between
//! nodes, node-to-MAC input edges and MAC-to-node output edges. Node ids and MAC
//! ids live in separate namespaces; edge ids are unique across all three edge
//! sets. [`equivalent_p2p`] replaces every MAC by a relay node whose input and
//! output edges carry the MAC's linear processing rate.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::gf::{FieldMatrix, GfError, PrimeField};
use crate::infotheory::{binary_entropy, InfoError, Pmf};
use crate::linear_coding::{ml_decode_additive, select_by_union_bound, CodingError, LinearCode};
use crate::math::{floor, log2, powi};

pub type NodeId = u32;
pub type MacId = u32;
pub type EdgeId = u32;

/// Default max-flow capacity quantum.
pub const DEFAULT_QUANTUM: f64 = 1.0 / 1024.0;
/// Default number of whole-code draws for [`construct_network_code`].
pub const DEFAULT_MAX_ATTEMPTS: usize = 32;
/// Redraws allowed per edge before a flow-guided attempt is abandoned.
pub const LOCAL_REDRAW_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("network failed validation with {} violation(s)", .0.len())]
    ValidationFailed(Vec<Violation>),
    #[error("edge {0} has a negative or non-finite capacity")]
    NonFiniteCapacity(EdgeId),
    #[error("capacity quantum must be positive and finite")]
    InvalidQuantum,
    #[error("network code construction needs an acyclic graph")]
    AcyclicityRequired,
    #[error("no full-rank code found in {attempts} attempts")]
    AttemptsExhausted { attempts: usize },
    #[error("rate {rate} exceeds the max-flow {maxflow} to receiver {receiver}")]
    RateExceedsMaxFlow { rate: usize, maxflow: u64, receiver: NodeId },
    #[error("field size {q} must exceed the number of receivers {receivers}")]
    FieldTooSmall { q: u32, receivers: usize },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

// ---------------------------------------------------------------------------
// Model

#[derive(Debug, Clone, PartialEq)]
pub enum MacKind {
    /// `y = Σ x_i + z`, `z ~ N(0, noise)`, each input at power `power`.
    Gaussian { noise: f64, power: f64 },
    /// `y = Σ α_i x_i + z` over `F_q`; `coefficients` follow the input edges in
    /// increasing edge id, and an empty list means all ones.
    FiniteField { q: u32, coefficients: Vec<u32>, noise: Pmf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacSpec {
    pub id: MacId,
    pub kind: MacKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Link {
    /// Noiseless pipe carrying `capacity` bits per use.
    BitPipe { capacity: f64 },
    /// AWGN link.
    Gaussian { noise: f64, power: f64 },
    /// Additive-noise link over `F_q`.
    FiniteField { q: u32, noise: Pmf },
}

impl Link {
    /// Point-to-point capacity in bits per use.
    pub fn capacity(&self) -> f64 {
        match self {
            Link::BitPipe { capacity } => *capacity,
            Link::Gaussian { noise, power } => 0.5 * log2(1.0 + power / noise),
            Link::FiniteField { q, noise } => (log2(f64::from(*q)) - noise.entropy()).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub link: Link,
}

/// Node-to-MAC input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacInput {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: MacId,
}

/// MAC-to-node output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacOutput {
    pub id: EdgeId,
    pub from: MacId,
    pub to: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacNetwork {
    pub nodes: Vec<NodeId>,
    pub source: NodeId,
    pub receivers: Vec<NodeId>,
    pub macs: Vec<MacSpec>,
    pub edges_nn: Vec<NodeEdge>,
    pub edges_nm: Vec<MacInput>,
    pub edges_mn: Vec<MacOutput>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub location: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.location, self.rule)
    }
}

fn pmf_ok(noise: &Pmf, q: u32) -> bool {
    noise.len() == q as usize
}

impl MacNetwork {
    pub fn mac_inputs(&self, mac: MacId) -> Vec<&MacInput> {
        let mut v: Vec<&MacInput> = self.edges_nm.iter().filter(|e| e.to == mac).collect();
        v.sort_by_key(|e| e.id);
        v
    }

    /// Every violated structural rule; empty when the network is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |rule: &'static str, location: String| out.push(Violation { rule, location });

        let mut nodes = BTreeSet::new();
        for &n in &self.nodes {
            if n == 0 {
                push("ids must be positive integers", format!("node {n}"));
            }
            if !nodes.insert(n) {
                push("duplicate node id", format!("node {n}"));
            }
        }
        let mut macs = BTreeSet::new();
        for m in &self.macs {
            if m.id == 0 {
                push("ids must be positive integers", format!("mac {}", m.id));
            }
            if !macs.insert(m.id) {
                push("duplicate mac id", format!("mac {}", m.id));
            }
        }
        let mut edges = BTreeSet::new();
        let all_ids = self
            .edges_nn
            .iter()
            .map(|e| e.id)
            .chain(self.edges_nm.iter().map(|e| e.id))
            .chain(self.edges_mn.iter().map(|e| e.id));
        for id in all_ids {
            if id == 0 {
                push("ids must be positive integers", format!("edge {id}"));
            }
            if !edges.insert(id) {
                push("duplicate edge id", format!("edge {id}"));
            }
        }

        if !nodes.contains(&self.source) {
            push("source is not a node", format!("source {}", self.source));
        }
        if self.receivers.is_empty() {
            push("at least one receiver is required", String::from("receivers"));
        }
        let mut seen = BTreeSet::new();
        for &r in &self.receivers {
            if !nodes.contains(&r) {
                push("receiver is not a node", format!("receiver {r}"));
            }
            if r == self.source {
                push("receiver coincides with the source", format!("receiver {r}"));
            }
            if !seen.insert(r) {
                push("duplicate receiver", format!("receiver {r}"));
            }
        }

        for e in &self.edges_nn {
            if !nodes.contains(&e.from) || !nodes.contains(&e.to) {
                push("dangling endpoint", format!("edge {} ({} -> {})", e.id, e.from, e.to));
            }
            let ok = match &e.link {
                Link::BitPipe { capacity } => capacity.is_finite() && *capacity >= 0.0,
                Link::Gaussian { noise, power } => *noise > 0.0 && *power >= 0.0 && noise.is_finite() && power.is_finite(),
                Link::FiniteField { q, noise } => PrimeField::new(*q).is_ok() && pmf_ok(noise, *q),
            };
            if !ok {
                push("invalid link parameters", format!("edge {}", e.id));
            }
        }
        for e in &self.edges_nm {
            if !nodes.contains(&e.from) || !macs.contains(&e.to) {
                push("dangling endpoint", format!("edge {} (node {} -> mac {})", e.id, e.from, e.to));
            }
        }
        for e in &self.edges_mn {
            if !macs.contains(&e.from) || !nodes.contains(&e.to) {
                push("dangling endpoint", format!("edge {} (mac {} -> node {})", e.id, e.from, e.to));
            }
        }

        for m in &self.macs {
            let outputs = self.edges_mn.iter().filter(|e| e.from == m.id).count();
            if outputs != 1 {
                push("a MAC output must be observed by exactly one node", format!("mac {} has {outputs} output edges", m.id));
            }
            let inputs = self.mac_inputs(m.id).len();
            if inputs == 0 {
                push("a MAC needs at least one input", format!("mac {}", m.id));
            }
            match &m.kind {
                MacKind::Gaussian { noise, power } => {
                    if !(*noise > 0.0 && noise.is_finite() && *power > 0.0 && power.is_finite()) {
                        push("invalid MAC parameters", format!("mac {}", m.id));
                    }
                }
                MacKind::FiniteField { q, coefficients, noise } => {
                    let field_ok = PrimeField::new(*q).is_ok();
                    let coeff_ok = coefficients.is_empty()
                        || (coefficients.len() == inputs && coefficients.iter().all(|&a| a != 0 && a < *q));
                    if !field_ok || !coeff_ok || !pmf_ok(noise, *q) {
                        push("invalid MAC parameters", format!("mac {}", m.id));
                    }
                }
            }
        }
        out
    }

    /// Node, MAC and link counts of the equivalent network.
    pub fn counts(&self, p2p: &P2PNetwork) -> crate::rates::NetworkCounts {
        crate::rates::NetworkCounts {
            nodes: self.nodes.len(),
            macs: self.macs.len(),
            links: p2p.edges.len(),
            max_capacity: p2p.edges.iter().map(|e| e.capacity).fold(0.0, f64::max),
        }
    }
}

// ---------------------------------------------------------------------------
// Equivalent point-to-point network

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2PEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct P2PNetwork {
    pub nodes: Vec<NodeId>,
    pub source: NodeId,
    pub receivers: Vec<NodeId>,
    pub edges: Vec<P2PEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalent {
    pub network: P2PNetwork,
    /// `(mac id, node id)` of every relabelled MAC.
    pub mac_relabel: Vec<(MacId, NodeId)>,
    /// Linear processing rate assigned to each MAC's edges.
    pub mac_rates: Vec<(MacId, f64)>,
    /// MACs whose linear processing rate was negative and clamped to zero.
    pub clamped: Vec<MacId>,
}

/// Linear processing rate of a MAC with `inputs` users.
pub fn linear_processing_rate(kind: &MacKind, inputs: usize) -> (f64, bool) {
    match kind {
        MacKind::Gaussian { noise, power } => {
            let r = 0.5 * log2(1.0 / inputs as f64 + power / noise);
            if r < 0.0 {
                (0.0, true)
            } else {
                (r, false)
            }
        }
        MacKind::FiniteField { q, noise, .. } => ((log2(f64::from(*q)) - noise.entropy()).max(0.0), false),
    }
}

/// Replace each MAC by a relay node; MAC edges get the linear processing rate and
/// links get their point-to-point capacity. MACs are renumbered as fresh node
/// ids above the largest existing node id, in increasing MAC id order.
pub fn equivalent_p2p(net: &MacNetwork) -> Result<Equivalent, NetworkError> {
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(NetworkError::ValidationFailed(violations));
    }
    let mut next = net.nodes.iter().copied().max().unwrap_or(0);
    let mut macs: Vec<&MacSpec> = net.macs.iter().collect();
    macs.sort_by_key(|m| m.id);
    let mut relabel = BTreeMap::new();
    let mut mac_rates = Vec::new();
    let mut clamped = Vec::new();
    let mut rate_of = BTreeMap::new();
    for m in macs {
        next += 1;
        relabel.insert(m.id, next);
        let (r, c) = linear_processing_rate(&m.kind, net.mac_inputs(m.id).len());
        if c {
            clamped.push(m.id);
        }
        mac_rates.push((m.id, r));
        rate_of.insert(m.id, r);
    }
    let mut nodes = net.nodes.clone();
    nodes.extend(relabel.values().copied());
    let mut edges: Vec<P2PEdge> = net
        .edges_nn
        .iter()
        .map(|e| P2PEdge { id: e.id, from: e.from, to: e.to, capacity: e.link.capacity() })
        .collect();
    edges.extend(net.edges_nm.iter().map(|e| P2PEdge { id: e.id, from: e.from, to: relabel[&e.to], capacity: rate_of[&e.to] }));
    edges.extend(net.edges_mn.iter().map(|e| P2PEdge { id: e.id, from: relabel[&e.from], to: e.to, capacity: rate_of[&e.from] }));
    edges.sort_by_key(|e| e.id);
    Ok(Equivalent {
        network: P2PNetwork { nodes, source: net.source, receivers: net.receivers.clone(), edges },
        mac_relabel: relabel.into_iter().collect(),
        mac_rates,
        clamped,
    })
}

// ---------------------------------------------------------------------------
// Max-flow

#[derive(Debug, Clone)]
struct FlowGraph {
    head: Vec<usize>,
    cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds `u -> v`; the forward arc is `2e`, its reverse `2e + 1`.
    fn add_edge(&mut self, u: usize, v: usize, c: u64) {
        self.adj[u].push(self.head.len());
        self.head.push(v);
        self.cap.push(c);
        self.adj[v].push(self.head.len());
        self.head.push(u);
        self.cap.push(0);
    }

    /// Edmonds–Karp; leaves the residual capacities in place.
    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        if s == t {
            return 0;
        }
        let n = self.adj.len();
        let mut total = 0u64;
        loop {
            let mut via = vec![usize::MAX; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.head[a];
                    if !seen[v] && self.cap[a] > 0 {
                        seen[v] = true;
                        via[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = u64::MAX;
            let mut v = t;
            while v != s {
                let a = via[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.head[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = via[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.head[a ^ 1];
            }
            total += bottleneck;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastFlow {
    /// `(receiver, max-flow)` in bits per use.
    pub per_receiver: Vec<(NodeId, f64)>,
    /// Minimum over receivers.
    pub bound: f64,
    pub quantum: f64,
    /// Capacity discarded by flooring every edge to a multiple of the quantum.
    pub rounding_loss: f64,
}

impl P2PNetwork {
    fn index(&self) -> BTreeMap<NodeId, usize> {
        self.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect()
    }

    fn quantized(&self, quantum: f64) -> Result<(Vec<u64>, f64), NetworkError> {
        if !(quantum > 0.0 && quantum.is_finite()) {
            return Err(NetworkError::InvalidQuantum);
        }
        let mut loss = 0.0;
        let mut caps = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            if !(e.capacity.is_finite() && e.capacity >= 0.0) {
                return Err(NetworkError::NonFiniteCapacity(e.id));
            }
            let units = e.capacity / quantum;
            // absorb representation error so that e.g. 1.0 / (1/1024) is exactly 1024
            let whole = floor(units + 1e-9 * units.max(1.0));
            caps.push(whole as u64);
            loss += (e.capacity - whole * quantum).max(0.0);
        }
        Ok((caps, loss))
    }

    /// Max-flow from the source to `sink` on capacities floored to multiples of
    /// `quantum`, returned in bits per use.
    pub fn max_flow(&self, sink: NodeId, quantum: f64) -> Result<f64, NetworkError> {
        let (caps, _) = self.quantized(quantum)?;
        let idx = self.index();
        let s = *idx.get(&self.source).ok_or(NetworkError::UnknownNode(self.source))?;
        let t = *idx.get(&sink).ok_or(NetworkError::UnknownNode(sink))?;
        let mut g = FlowGraph::new(self.nodes.len());
        for (e, &c) in self.edges.iter().zip(&caps) {
            let u = *idx.get(&e.from).ok_or(NetworkError::UnknownNode(e.from))?;
            let v = *idx.get(&e.to).ok_or(NetworkError::UnknownNode(e.to))?;
            g.add_edge(u, v, c);
        }
        Ok(g.max_flow(s, t) as f64 * quantum)
    }
}

/// Per-receiver max-flow and the multicast bound (their minimum).
pub fn multicast_maxflow(p2p: &P2PNetwork, quantum: f64) -> Result<MulticastFlow, NetworkError> {
    let (_, rounding_loss) = p2p.quantized(quantum)?;
    let mut per_receiver = Vec::with_capacity(p2p.receivers.len());
    for &r in &p2p.receivers {
        per_receiver.push((r, p2p.max_flow(r, quantum)?));
    }
    let bound = per_receiver.iter().map(|&(_, f)| f).fold(f64::INFINITY, f64::min);
    Ok(MulticastFlow { per_receiver, bound: if bound.is_finite() { bound } else { 0.0 }, quantum, rounding_loss })
}

// ---------------------------------------------------------------------------
// Algebraic network codes

/// One unit-capacity pipe of the expanded graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitEdge {
    pub from: NodeId,
    pub to: NodeId,
    /// Edge of the original network this pipe was split from.
    pub parent: EdgeId,
}

/// What a coefficient multiplies: a source symbol or the symbol on an earlier pipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefInput {
    Symbol(usize),
    Pipe(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverDecoder {
    pub node: NodeId,
    /// Pipes whose symbols the receiver solves from.
    pub pipes: Vec<usize>,
    /// Rows are the global coding vectors of `pipes`; observations `y = A x`.
    pub transfer: FieldMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Redraw individual pipes while keeping every receiver's flow paths full rank.
    FlowGuided,
    /// Draw every coefficient at once and start over when any receiver is rank deficient.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicNetworkCode {
    pub field: PrimeField,
    /// Source symbols per use of the network.
    pub rate: usize,
    pub source: NodeId,
    pub pipes: Vec<UnitEdge>,
    /// Pipes in propagation order.
    pub order: Vec<usize>,
    pub coefficients: Vec<Vec<(CoefInput, u32)>>,
    /// Global coding vector of each pipe.
    pub kernels: Vec<Vec<u32>>,
    pub receivers: Vec<ReceiverDecoder>,
    pub attempts: usize,
    /// Per-pipe redraws (flow-guided strategy only).
    pub local_redraws: usize,
    pub strategy: Strategy,
}

impl AlgebraicNetworkCode {
    /// Symbol carried by every pipe for the given source symbols.
    pub fn propagate(&self, symbols: &[u32]) -> Result<Vec<u32>, NetworkError> {
        if symbols.len() != self.rate {
            return Err(NetworkError::Domain("need one symbol per unit of rate"));
        }
        let f = self.field;
        let mut values = vec![0u32; self.pipes.len()];
        for &e in &self.order {
            let mut acc = 0;
            for &(input, c) in &self.coefficients[e] {
                let x = match input {
                    CoefInput::Symbol(i) => f.check(symbols[i])?,
                    CoefInput::Pipe(p) => values[p],
                };
                acc = f.add(acc, f.mul(c, x));
            }
            values[e] = acc;
        }
        Ok(values)
    }

    /// Source symbols recovered by receiver `r` from the pipe symbols.
    pub fn decode(&self, r: usize, values: &[u32]) -> Result<Vec<u32>, NetworkError> {
        let dec = self.receivers.get(r).ok_or(NetworkError::Domain("receiver index out of range"))?;
        let y: Vec<u32> = dec.pipes.iter().map(|&p| values[p]).collect();
        Ok(dec.transfer.solve(&y)?)
    }
}

struct UnitGraph {
    nodes: Vec<NodeId>,
    idx: BTreeMap<NodeId, usize>,
    pipes: Vec<UnitEdge>,
    topo_pipes: Vec<usize>,
    in_pipes: Vec<Vec<usize>>,
}

impl UnitGraph {
    fn build(p2p: &P2PNetwork, unit: f64) -> Result<Self, NetworkError> {
        let (caps, _) = p2p.quantized(unit)?;
        let idx = p2p.index();
        let mut pipes = Vec::new();
        for (e, &c) in p2p.edges.iter().zip(&caps) {
            for n in [e.from, e.to] {
                if !idx.contains_key(&n) {
                    return Err(NetworkError::UnknownNode(n));
                }
            }
            for _ in 0..c {
                pipes.push(UnitEdge { from: e.from, to: e.to, parent: e.id });
            }
        }
        // Kahn's algorithm over nodes; pipes inherit the order of their tail node
        let n = p2p.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut in_pipes: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, p) in pipes.iter().enumerate() {
            indeg[idx[&p.to]] += 1;
            out[idx[&p.from]].push(i);
            in_pipes[idx[&p.to]].push(i);
        }
        let mut ready: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut topo_pipes = Vec::with_capacity(pipes.len());
        let mut visited = 0;
        while let Some(v) = ready.pop_front() {
            visited += 1;
            for &e in &out[v] {
                topo_pipes.push(e);
                let w = idx[&pipes[e].to];
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push_back(w);
                }
            }
        }
        if visited != n {
            return Err(NetworkError::AcyclicityRequired);
        }
        Ok(Self { nodes: p2p.nodes.clone(), idx, pipes, topo_pipes, in_pipes })
    }

    fn inputs(&self, pipe: usize, source: NodeId, rate: usize) -> Vec<CoefInput> {
        let tail = self.pipes[pipe].from;
        let mut v: Vec<CoefInput> = self.in_pipes[self.idx[&tail]].iter().map(|&p| CoefInput::Pipe(p)).collect();
        if tail == source {
            v.extend((0..rate).map(CoefInput::Symbol));
        }
        v
    }

    /// `rate` pipe-disjoint paths from `source` to `sink`, each a list of pipes.
    fn disjoint_paths(&self, source: NodeId, sink: NodeId, rate: usize) -> Result<Vec<Vec<usize>>, NetworkError> {
        let mut g = FlowGraph::new(self.nodes.len());
        for p in &self.pipes {
            g.add_edge(self.idx[&p.from], self.idx[&p.to], 1);
        }
        let flow = g.max_flow(self.idx[&source], self.idx[&sink]);
        if flow < rate as u64 {
            return Err(NetworkError::RateExceedsMaxFlow { rate, maxflow: flow, receiver: sink });
        }
        // a pipe carries flow when its forward arc is saturated
        let mut used: Vec<bool> = (0..self.pipes.len()).map(|e| g.cap[2 * e] == 0).collect();
        let mut paths = Vec::with_capacity(rate);
        for _ in 0..rate {
            let mut path = Vec::new();
            let mut at = source;
            while at != sink {
                let next = (0..self.pipes.len())
                    .find(|&e| used[e] && self.pipes[e].from == at)
                    .expect("flow conservation gives an outgoing flow pipe");
                used[next] = false;
                path.push(next);
                at = self.pipes[next].to;
            }
            paths.push(path);
        }
        Ok(paths)
    }
}

fn combine(field: PrimeField, rate: usize, coeffs: &[(CoefInput, u32)], kernels: &[Vec<u32>]) -> Vec<u32> {
    let mut k = vec![0u32; rate];
    for &(input, c) in coeffs {
        match input {
            CoefInput::Symbol(i) => k[i] = field.add(k[i], c),
            CoefInput::Pipe(p) => {
                for (a, &b) in k.iter_mut().zip(&kernels[p]) {
                    *a = field.add(*a, field.mul(c, b));
                }
            }
        }
    }
    k
}

fn full_rank(field: PrimeField, rows: &[&[u32]]) -> bool {
    let rate = rows.first().map_or(0, |r| r.len());
    rows.len() >= rate && FieldMatrix::from_rows(field, rows).map(|m| m.rank() == rate).unwrap_or(false)
}

/// Rows of `pipes` that form a basis, greedily in the given order.
fn pick_basis(field: PrimeField, rate: usize, pipes: &[usize], kernels: &[Vec<u32>]) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for &p in pipes {
        let mut rows: Vec<&[u32]> = chosen.iter().map(|&c| kernels[c].as_slice()).collect();
        rows.push(&kernels[p]);
        let m = FieldMatrix::from_rows(field, &rows).ok()?;
        if m.rank() == rows.len() {
            chosen.push(p);
            if chosen.len() == rate {
                return Some(chosen);
            }
        }
    }
    None
}

fn decoder(field: PrimeField, node: NodeId, pipes: Vec<usize>, kernels: &[Vec<u32>]) -> Result<ReceiverDecoder, NetworkError> {
    let rows: Vec<&[u32]> = pipes.iter().map(|&p| kernels[p].as_slice()).collect();
    let transfer = FieldMatrix::from_rows(field, &rows)?;
    Ok(ReceiverDecoder { node, pipes, transfer })
}

/// Random linear network code carrying `rate` symbols of `F_q` per use.
///
/// Capacities are split into pipes of capacity `unit`. Coefficients are uniform
/// on `F_q` including zero. With [`Strategy::FlowGuided`], pipes are assigned in
/// topological order and a pipe is redrawn (up to [`LOCAL_REDRAW_BUDGET`]
/// times) whenever it would make some receiver's set of flow-path frontier
/// vectors rank deficient. With [`Strategy::Global`], the whole code is redrawn
/// until every receiver sees a full-rank transfer matrix.
pub fn construct_network_code<R: Rng + ?Sized>(
    p2p: &P2PNetwork,
    field: PrimeField,
    rate: usize,
    unit: f64,
    strategy: Strategy,
    max_attempts: usize,
    rng: &mut R,
) -> Result<AlgebraicNetworkCode, NetworkError> {
    if rate == 0 {
        return Err(NetworkError::Domain("rate must be at least 1"));
    }
    if field.order() as usize <= p2p.receivers.len() {
        return Err(NetworkError::FieldTooSmall { q: field.order(), receivers: p2p.receivers.len() });
    }
    let g = UnitGraph::build(p2p, unit)?;
    let paths: Vec<Vec<Vec<usize>>> =
        p2p.receivers.iter().map(|&r| g.disjoint_paths(p2p.source, r, rate)).collect::<Result<_, _>>()?;
    let inputs: Vec<Vec<CoefInput>> = (0..g.pipes.len()).map(|e| g.inputs(e, p2p.source, rate)).collect();
    let mut local_redraws = 0;

    for attempt in 1..=max_attempts.max(1) {
        let mut coefficients: Vec<Vec<(CoefInput, u32)>> = vec![Vec::new(); g.pipes.len()];
        let mut kernels: Vec<Vec<u32>> = vec![vec![0; rate]; g.pipes.len()];
        let draw = |e: usize, rng: &mut R| -> Vec<(CoefInput, u32)> {
            inputs[e].iter().map(|&i| (i, field.random_element(rng))).collect()
        };
        let built = match strategy {
            Strategy::Global => {
                for &e in &g.topo_pipes {
                    coefficients[e] = draw(e, rng);
                    kernels[e] = combine(field, rate, &coefficients[e], &kernels);
                }
                p2p.receivers
                    .iter()
                    .map(|&r| {
                        let into: Vec<usize> = g.in_pipes[g.idx[&r]].clone();
                        pick_basis(field, rate, &into, &kernels)
                    })
                    .collect::<Option<Vec<_>>>()
            }
            Strategy::FlowGuided => {
                // frontier[r][i]: current last pipe (or unit vector) of path i towards receiver r
                let mut frontier: Vec<Vec<Vec<u32>>> = p2p
                    .receivers
                    .iter()
                    .map(|_| (0..rate).map(|i| (0..rate).map(|j| u32::from(i == j)).collect()).collect())
                    .collect();
                let mut slot: Vec<Vec<Option<usize>>> = vec![vec![None; g.pipes.len()]; p2p.receivers.len()];
                for (r, ps) in paths.iter().enumerate() {
                    for (i, path) in ps.iter().enumerate() {
                        for &e in path {
                            slot[r][e] = Some(i);
                        }
                    }
                }
                let mut ok = true;
                for &e in &g.topo_pipes {
                    let mut tries = 0;
                    loop {
                        coefficients[e] = draw(e, rng);
                        let k = combine(field, rate, &coefficients[e], &kernels);
                        let good = (0..p2p.receivers.len()).all(|r| match slot[r][e] {
                            None => true,
                            Some(i) => {
                                let rows: Vec<&[u32]> =
                                    (0..rate).map(|j| if j == i { k.as_slice() } else { frontier[r][j].as_slice() }).collect();
                                full_rank(field, &rows)
                            }
                        });
                        if good {
                            for r in 0..p2p.receivers.len() {
                                if let Some(i) = slot[r][e] {
                                    frontier[r][i] = k.clone();
                                }
                            }
                            kernels[e] = k;
                            break;
                        }
                        tries += 1;
                        local_redraws += 1;
                        if tries >= LOCAL_REDRAW_BUDGET {
                            ok = false;
                            break;
                        }
                    }
                    if !ok {
                        break;
                    }
                }
                ok.then(|| paths.iter().map(|ps| ps.iter().map(|p| *p.last().expect("non-empty path")).collect()).collect())
            }
        };
        if let Some(chosen) = built {
            let receivers = p2p
                .receivers
                .iter()
                .zip(chosen)
                .map(|(&r, pipes)| decoder(field, r, pipes, &kernels))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(AlgebraicNetworkCode {
                field,
                rate,
                source: p2p.source,
                pipes: g.pipes.clone(),
                order: g.topo_pipes.clone(),
                coefficients,
                kernels,
                receivers,
                attempts: attempt,
                local_redraws,
                strategy,
            });
        }
    }
    Err(NetworkError::AttemptsExhausted { attempts: max_attempts.max(1) })
}

// ---------------------------------------------------------------------------
// Reference networks

/// Node ids shared by the butterfly constructors: source 1, left relay 2, right
/// relay 3, centre node 4, left receiver 5, right receiver 6; MAC id 1.
pub mod butterfly_ids {
    use super::NodeId;
    pub const SOURCE: NodeId = 1;
    pub const LEFT: NodeId = 2;
    pub const RIGHT: NodeId = 3;
    pub const CENTRE: NodeId = 4;
    pub const LEFT_RECEIVER: NodeId = 5;
    pub const RIGHT_RECEIVER: NodeId = 6;
}

fn butterfly_with(side: impl Fn() -> Link, mac: MacKind) -> MacNetwork {
    use butterfly_ids::*;
    let nn = |id, from, to| NodeEdge { id, from, to, link: side() };
    MacNetwork {
        nodes: vec![SOURCE, LEFT, RIGHT, CENTRE, LEFT_RECEIVER, RIGHT_RECEIVER],
        source: SOURCE,
        receivers: vec![LEFT_RECEIVER, RIGHT_RECEIVER],
        macs: vec![MacSpec { id: 1, kind: mac }],
        edges_nn: vec![
            nn(1, SOURCE, LEFT),
            nn(2, SOURCE, RIGHT),
            nn(3, LEFT, LEFT_RECEIVER),
            nn(4, RIGHT, RIGHT_RECEIVER),
            nn(8, CENTRE, LEFT_RECEIVER),
            nn(9, CENTRE, RIGHT_RECEIVER),
        ],
        edges_nm: vec![MacInput { id: 5, from: LEFT, to: 1 }, MacInput { id: 6, from: RIGHT, to: 1 }],
        edges_mn: vec![MacOutput { id: 7, from: 1, to: CENTRE }],
    }
}

/// Butterfly with capacity-`c` bit pipes and a mod-2 adder MAC with
/// Bernoulli(`p`) noise in the centre.
pub fn binary_butterfly(c: f64, p: f64) -> Result<MacNetwork, NetworkError> {
    let noise = Pmf::bernoulli(p)?;
    Ok(butterfly_with(|| Link::BitPipe { capacity: c }, MacKind::FiniteField { q: 2, coefficients: vec![], noise }))
}

/// Butterfly whose links and centre MAC are all AWGN with power `p` and noise `n`.
pub fn gaussian_butterfly(p: f64, n: f64) -> MacNetwork {
    butterfly_with(|| Link::Gaussian { noise: n, power: p }, MacKind::Gaussian { noise: n, power: p })
}

/// The classic unit-capacity butterfly with the MAC replaced by node 7.
pub fn unit_butterfly() -> P2PNetwork {
    let eq = equivalent_p2p(&binary_butterfly(1.0, 0.0).expect("valid probability")).expect("valid network");
    eq.network
}

// ---------------------------------------------------------------------------
// End-to-end butterfly runs

/// Layout of one binary butterfly block.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryButterfly {
    pub c: f64,
    pub p: f64,
    /// Channel uses per block.
    pub n: usize,
    /// Message bits per block.
    pub bits: usize,
    /// Bits sent down each side path.
    pub side_bits: usize,
    /// Bits whose XOR crosses the MAC.
    pub mac_bits: usize,
    /// MAC code (`mac_bits × n`), absent when nothing crosses the MAC.
    pub code: Option<LinearCode>,
    /// Union bound of the chosen MAC code.
    pub code_union_bound: f64,
    noise: Pmf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyTrial {
    pub delivered_bits: usize,
    /// Block error at the left and right receiver.
    pub errors: [bool; 2],
}

impl ButterflyTrial {
    pub fn multicast_error(&self) -> bool {
        self.errors[0] || self.errors[1]
    }
}

impl BinaryButterfly {
    /// Split a block carrying `⌊rate_fraction · n · (C + min(C, 1 − h_B(p)))⌋` bits:
    /// each side pipe carries `min(⌊nC⌋, bits)` and the rest crosses the MAC as
    /// an XOR. The MAC code is the best of `candidates` random `mac_bits × n`
    /// codes by union bound.
    pub fn new<R: Rng + ?Sized>(
        c: f64,
        p: f64,
        n: usize,
        rate_fraction: f64,
        candidates: usize,
        code_rng: &mut R,
    ) -> Result<Self, NetworkError> {
        if !(rate_fraction > 0.0 && rate_fraction <= 1.0) {
            return Err(NetworkError::Domain("rate fraction must lie in (0, 1]"));
        }
        if !(c >= 0.0 && c.is_finite()) || n == 0 {
            return Err(NetworkError::Domain("need a finite capacity and n >= 1"));
        }
        let capacity = c + c.min(1.0 - binary_entropy(p)?);
        let bits = floor(rate_fraction * n as f64 * capacity + 1e-9) as usize;
        let pipe = floor(n as f64 * c + 1e-9) as usize;
        let side_bits = pipe.min(bits);
        let mac_bits = bits - side_bits;
        let noise = Pmf::bernoulli(p)?;
        let (code, code_union_bound) = if mac_bits > 0 {
            let (code, bound) = select_by_union_bound(PrimeField::new(2)?, mac_bits, n, &noise, candidates, code_rng)?;
            (Some(code), bound)
        } else {
            (None, 0.0)
        };
        Ok(Self { c, p, n, bits, side_bits, mac_bits, code, code_union_bound, noise })
    }

    /// One block: random message, both side paths, the MAC carrying the XOR of
    /// the overlapping chunks, and reconstruction at both receivers.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ButterflyTrial, NetworkError> {
        let (b, l1, l2) = (self.bits, self.side_bits, self.mac_bits);
        let msg: Vec<u32> = (0..b).map(|_| u32::from(rng.random_bool(0.5))).collect();
        // b = [b11 b12] = [b21 b22] with |b11| = |b22| = l1 and |b12| = |b21| = l2
        let b11 = &msg[..l1];
        let b22 = &msg[l2..];
        let b21 = &msg[..l2];
        let b12 = &msg[l1..];
        let u_hat = match &self.code {
            None => Vec::new(),
            Some(code) => {
                let x1 = code.encode(b21)?;
                let x2 = code.encode(b12)?;
                let y: Vec<u32> = x1.iter().zip(&x2).map(|(a, b)| a ^ b ^ self.noise.sample(rng) as u32).collect();
                ml_decode_additive(code, &y, &self.noise)?
            }
        };
        let xor = |a: &[u32], b: &[u32]| a.iter().zip(b).map(|(x, y)| x ^ y).collect::<Vec<u32>>();
        // left: knows b11 (hence b21) and recovers b12 = u ⊕ b21
        let mut left = b11.to_vec();
        left.extend(xor(&u_hat, &b11[..l2]));
        // right: knows b22 (hence b12, its last l2 bits) and recovers b21 = u ⊕ b12
        let mut right = xor(&u_hat, &b22[l1 - l2..]);
        right.extend_from_slice(b22);
        Ok(ButterflyTrial { delivered_bits: b, errors: [left != msg, right != msg] })
    }
}

/// One block of the binary butterfly with a fresh layout and code.
pub fn binary_butterfly_multicast_trial<R: Rng + ?Sized>(
    c: f64,
    p: f64,
    n: usize,
    rate_fraction: f64,
    rng: &mut R,
) -> Result<ButterflyTrial, NetworkError> {
    BinaryButterfly::new(c, p, n, rate_fraction, 1, rng)?.trial(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianButterflyTrace {
    /// Distortion of the sum across the MAC, `2σ²(2N/(N+2P))^ℓ`.
    pub d: f64,
    /// After requantization for the downstream links.
    pub d_quantized: f64,
    /// Source received directly on a side path.
    pub d_direct: f64,
    /// Source derived from the sum and the other source.
    pub d_derived: f64,
    /// `(1/ℓ) log(σ²/d_derived)`: two sources at the worst distortion.
    pub source_rate: f64,
    /// Spare side-path rate used for a common message.
    pub common_rate: f64,
    pub final_rate: f64,
}

/// Distortion bookkeeping of the structured Gaussian butterfly scheme.
pub fn gaussian_butterfly_rate_trace(p: f64, n: f64, sigma_s2: f64, ell: usize) -> Result<GaussianButterflyTrace, NetworkError> {
    if !(p > 0.0 && n > 0.0 && sigma_s2 > 0.0) || ell == 0 {
        return Err(NetworkError::Domain("need positive power, noise and variance, and ell >= 1"));
    }
    let rho = 2.0 * n / (n + 2.0 * p);
    let d = 2.0 * sigma_s2 * powi(rho, ell as i32);
    let d_derived = 4.5 * d;
    // log domain: d underflows long before the rate converges
    let source_rate = -log2(9.0) / ell as f64 - log2(rho);
    let s = p / n;
    let common_rate = 0.5 * log2(1.0 + s) - 0.5 * log2(0.5 + s);
    Ok(GaussianButterflyTrace {
        d,
        d_quantized: 2.0 * d,
        d_direct: 0.5 * d,
        d_derived,
        source_rate,
        common_rate,
        final_rate: source_rate + common_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn butterfly_validates_and_bad_networks_do_not() {
        assert!(binary_butterfly(1.0, 0.11).unwrap().validate().is_empty());
        let mut two_out = binary_butterfly(1.0, 0.11).unwrap();
        two_out.edges_mn.push(MacOutput { id: 10, from: 1, to: 5 });
        let v = two_out.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("exactly one node"));
        let mut dangling = binary_butterfly(1.0, 0.11).unwrap();
        dangling.edges_nn.push(NodeEdge { id: 11, from: 2, to: 99, link: Link::BitPipe { capacity: 1.0 } });
        assert!(dangling.validate().iter().any(|v| v.rule == "dangling endpoint"));
        let mut dup = binary_butterfly(1.0, 0.11).unwrap();
        dup.edges_nm[0].id = 1;
        assert!(dup.validate().iter().any(|v| v.rule == "duplicate edge id"));
        assert!(matches!(equivalent_p2p(&dup), Err(NetworkError::ValidationFailed(_))));
    }

    #[test]
    fn equivalent_network_of_binary_butterfly() {
        let net = binary_butterfly(1.0, 0.11).unwrap();
        let eq = equivalent_p2p(&net).unwrap();
        assert_eq!(eq.network.nodes.len(), 7);
        assert_eq!(eq.network.edges.len(), 9);
        assert_eq!(eq.mac_relabel, [(1, 7)]);
        let h = binary_entropy(0.11).unwrap();
        for e in &eq.network.edges {
            let expected = if (5..=7).contains(&e.id) { 1.0 - h } else { 1.0 };
            assert!((e.capacity - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_butterfly_gets_linear_processing_rate() {
        let eq = equivalent_p2p(&gaussian_butterfly(3.0, 1.0)).unwrap();
        let mac_edge = eq.network.edges.iter().find(|e| e.id == 7).unwrap();
        assert!((mac_edge.capacity - 0.5 * 3.5f64.log2()).abs() < 1e-15);
        let side = eq.network.edges.iter().find(|e| e.id == 1).unwrap();
        assert!((side.capacity - 1.0).abs() < 1e-15);
        let low = equivalent_p2p(&gaussian_butterfly(0.2, 1.0)).unwrap();
        assert_eq!(low.clamped, [1]);
    }

    #[test]
    fn maxflow_examples() {
        let unit = unit_butterfly();
        let f = multicast_maxflow(&unit, 1.0).unwrap();
        assert_eq!(f.per_receiver, [(5, 2.0), (6, 2.0)]);
        let line = P2PNetwork {
            nodes: vec![1, 2, 3],
            source: 1,
            receivers: vec![3],
            edges: vec![P2PEdge { id: 1, from: 1, to: 2, capacity: 0.75 }, P2PEdge { id: 2, from: 2, to: 3, capacity: 2.0 }],
        };
        assert_eq!(multicast_maxflow(&line, DEFAULT_QUANTUM).unwrap().bound, 0.75);
        let mut bad = line.clone();
        bad.edges[0].capacity = f64::NAN;
        assert_eq!(multicast_maxflow(&bad, DEFAULT_QUANTUM), Err(NetworkError::NonFiniteCapacity(1)));
    }

    #[test]
    fn binary_butterfly_capacity_equals_maxflow() {
        for c in [0.25, 0.5, 1.0] {
            for p in [0.0, 0.11, 0.3] {
                let eq = equivalent_p2p(&binary_butterfly(c, p).unwrap()).unwrap();
                let f = multicast_maxflow(&eq.network, DEFAULT_QUANTUM).unwrap();
                let cap = c + c.min(1.0 - binary_entropy(p).unwrap());
                assert!((f.bound - cap).abs() <= 9.0 * DEFAULT_QUANTUM, "c={c} p={p}");
            }
        }
    }

    #[test]
    fn network_code_round_trip() {
        let unit = unit_butterfly();
        let f3 = PrimeField::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for strategy in [Strategy::FlowGuided, Strategy::Global] {
            let code = construct_network_code(&unit, f3, 2, 1.0, strategy, 500, &mut rng).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    let values = code.propagate(&[a, b]).unwrap();
                    for r in 0..2 {
                        assert_eq!(code.decode(r, &values).unwrap(), [a, b]);
                    }
                }
            }
        }
        let f2 = PrimeField::new(2).unwrap();
        assert!(matches!(
            construct_network_code(&unit, f2, 2, 1.0, Strategy::FlowGuided, 10, &mut rng),
            Err(NetworkError::FieldTooSmall { .. })
        ));
        assert!(matches!(
            construct_network_code(&unit, f3, 3, 1.0, Strategy::FlowGuided, 10, &mut rng),
            Err(NetworkError::RateExceedsMaxFlow { .. })
        ));
    }

    #[test]
    fn single_pipe_code() {
        let pipe = P2PNetwork {
            nodes: vec![1, 2],
            source: 1,
            receivers: vec![2],
            edges: vec![P2PEdge { id: 1, from: 1, to: 2, capacity: 1.0 }],
        };
        let f2 = PrimeField::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut total = 0;
        for _ in 0..200 {
            let code = construct_network_code(&pipe, f2, 1, 1.0, Strategy::Global, 64, &mut rng).unwrap();
            assert_eq!(code.coefficients[0][0].1, 1);
            total += code.attempts;
        }
        let mean = total as f64 / 200.0;
        assert!(mean < 2.5, "mean attempts {mean}");
    }

    #[test]
    fn cycles_are_rejected() {
        let cyc = P2PNetwork {
            nodes: vec![1, 2, 3],
            source: 1,
            receivers: vec![3],
            edges: vec![
                P2PEdge { id: 1, from: 1, to: 2, capacity: 1.0 },
                P2PEdge { id: 2, from: 2, to: 1, capacity: 1.0 },
                P2PEdge { id: 3, from: 2, to: 3, capacity: 1.0 },
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            construct_network_code(&cyc, PrimeField::new(2).unwrap(), 1, 1.0, Strategy::Global, 4, &mut rng),
            Err(NetworkError::AcyclicityRequired)
        );
    }

    #[test]
    fn noiseless_butterfly_never_errs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for rf in [0.3, 0.7, 1.0] {
            let bf = BinaryButterfly::new(1.0, 0.0, 12, rf, 4, &mut rng).unwrap();
            for _ in 0..20 {
                assert!(!bf.trial(&mut rng).unwrap().multicast_error());
            }
        }
        assert!(BinaryButterfly::new(1.0, 0.0, 12, 1.2, 4, &mut rng).is_err());
        let bf = BinaryButterfly::new(1.0, 0.11, 18, 0.9, 1, &mut rng).unwrap();
        assert_eq!((bf.bits, bf.side_bits, bf.mac_bits), (24, 18, 6));
    }

    #[test]
    fn gaussian_trace_examples() {
        let mut prev = f64::INFINITY;
        for ell in 1..20 {
            let t = gaussian_butterfly_rate_trace(1.0, 1.0, 1.0, ell).unwrap();
            assert!(t.d < prev);
            prev = t.d;
        }
        let limit = 0.5 * 2f64.log2() + 0.5 * 1.5f64.log2();
        let t = gaussian_butterfly_rate_trace(1.0, 1.0, 1.0, 10).unwrap();
        assert!((limit - t.final_rate - 9f64.log2() / 10.0).abs() < 1e-12);
        let far = gaussian_butterfly_rate_trace(1.0, 1.0, 1.0, 1 << 20).unwrap();
        assert!((far.final_rate - limit).abs() < 1e-5);
    }
}
