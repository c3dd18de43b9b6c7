//! Weighted graph ingestion and structural utilities.
//!
//! Nodes are remapped to dense `u32` ids in first-appearance order. Graphs are
//! simple after ingestion: self-loops are dropped (counted), parallel links are
//! merged by summing weights. Undirected links are stored once and exposed
//! through a symmetric adjacency.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::Real;

/// Dense node identifier.
pub type NodeId = u32;

/// Per-replacement retry budget during rewiring before giving up.
const REWIRE_RETRY_LIMIT: usize = 1000;

/// A simple weighted graph with dense node ids and stable labels.
#[derive(Debug, Clone)]
pub struct Graph<R: Real = f64> {
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
    /// Logical links: one entry per undirected link (smaller id first) or per
    /// directed arc, sorted by endpoint ids.
    links: Vec<(NodeId, NodeId, R)>,
    out_adj: Vec<Vec<(NodeId, R)>>,
    /// Present only for directed graphs; undirected adjacency is symmetric.
    in_adj: Option<Vec<Vec<(NodeId, R)>>>,
    directed: bool,
    total_weight: R,
    self_loops_dropped: usize,
}

impl<R: Real> Graph<R> {
    /// Builds a graph from labelled edges. `edges` entries are
    /// `(source, target, weight)`; weights must be positive and finite.
    pub fn from_edges<S: AsRef<str>>(directed: bool, edges: &[(S, S, f64)]) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut raw: Vec<(NodeId, NodeId, R)> = Vec::with_capacity(edges.len());
        for (line, (a, b, w)) in edges.iter().enumerate() {
            let ia = intern(&mut labels, &mut index, a.as_ref());
            let ib = intern(&mut labels, &mut index, b.as_ref());
            let w = check_weight::<R>(*w, line + 1)?;
            raw.push((ia, ib, w));
        }
        Ok(Self::assemble(labels, index, directed, raw))
    }

    /// Builds a graph over `n` nodes labelled `"0".."n-1"` from id pairs.
    /// Convenient for synthetic graphs in tests and benchmarks.
    pub fn from_numbered_edges(n: usize, directed: bool, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index: HashMap<String, NodeId> =
            labels.iter().enumerate().map(|(i, l)| (l.clone(), i as NodeId)).collect();
        let mut raw = Vec::with_capacity(edges.len());
        for (line, &(a, b, w)) in edges.iter().enumerate() {
            if a as usize >= n || b as usize >= n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) references a node >= {n}")));
            }
            raw.push((a, b, check_weight::<R>(w, line + 1)?));
        }
        Ok(Self::assemble(labels, index, directed, raw))
    }

    /// Parses whitespace-separated edge-list text.
    ///
    /// Each non-empty, non-`#` line holds `source target [weight]`; the weight
    /// defaults to 1. Blank lines and `#` comments are skipped. Errors carry
    /// 1-based line numbers.
    pub fn parse_edge_list(text: &str, directed: bool) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut raw: Vec<(NodeId, NodeId, R)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 2 && tokens.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 2 or 3 tokens, found {}", tokens.len()),
                });
            }
            let a = intern(&mut labels, &mut index, tokens[0]);
            let b = intern(&mut labels, &mut index, tokens[1]);
            let w = if tokens.len() == 3 {
                let parsed: f64 = tokens[2].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid weight token {:?}", tokens[2]),
                })?;
                check_weight::<R>(parsed, line_no)?
            } else {
                R::one()
            };
            raw.push((a, b, w));
        }
        Ok(Self::assemble(labels, index, directed, raw))
    }

    /// Canonical edge-list text: one `label label weight` line per link,
    /// sorted by labels (undirected pairs are also oriented by label), so the
    /// output does not depend on construction order or internal numbering.
    /// Parsing it back reconstructs the same labeled graph; nodes without
    /// links are not represented.
    pub fn serialize_edge_list(&self) -> String {
        let mut lines: Vec<(&str, &str, R)> = self
            .links
            .iter()
            .map(|&(a, b, w)| {
                let la = self.labels[a as usize].as_str();
                let lb = self.labels[b as usize].as_str();
                if !self.directed && la > lb {
                    (lb, la, w)
                } else {
                    (la, lb, w)
                }
            })
            .collect();
        lines.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut out = String::new();
        for (a, b, w) in lines {
            out.push_str(&format!("{a} {b} {w}\n"));
        }
        out
    }

    fn assemble(
        labels: Vec<String>,
        label_index: HashMap<String, NodeId>,
        directed: bool,
        raw: Vec<(NodeId, NodeId, R)>,
    ) -> Self {
        let mut merged: HashMap<(NodeId, NodeId), R> = HashMap::with_capacity(raw.len());
        let mut self_loops = 0usize;
        for (a, b, w) in raw {
            if a == b {
                self_loops += 1;
                continue;
            }
            let key = if directed || a < b { (a, b) } else { (b, a) };
            let slot = merged.entry(key).or_insert_with(R::zero);
            *slot = *slot + w;
        }
        let mut links: Vec<(NodeId, NodeId, R)> =
            merged.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        links.sort_unstable_by_key(|&(a, b, _)| (a, b));
        Self::from_parts(labels, label_index, directed, links, self_loops)
    }

    fn from_parts(
        labels: Vec<String>,
        label_index: HashMap<String, NodeId>,
        directed: bool,
        links: Vec<(NodeId, NodeId, R)>,
        self_loops_dropped: usize,
    ) -> Self {
        let n = labels.len();
        let mut out_adj: Vec<Vec<(NodeId, R)>> = vec![Vec::new(); n];
        let mut in_adj: Option<Vec<Vec<(NodeId, R)>>> = directed.then(|| vec![Vec::new(); n]);
        let mut total_weight = R::zero();
        for &(a, b, w) in &links {
            total_weight = total_weight + w;
            out_adj[a as usize].push((b, w));
            if let Some(in_adj) = in_adj.as_mut() {
                in_adj[b as usize].push((a, w));
            } else {
                out_adj[b as usize].push((a, w));
            }
        }
        for adj in &mut out_adj {
            adj.sort_unstable_by_key(|&(v, _)| v);
        }
        if let Some(in_adj) = in_adj.as_mut() {
            for adj in in_adj.iter_mut() {
                adj.sort_unstable_by_key(|&(v, _)| v);
            }
        }
        Graph {
            labels,
            label_index,
            links,
            out_adj,
            in_adj,
            directed,
            total_weight,
            self_loops_dropped,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of logical links (undirected links counted once).
    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Sum of logical link weights.
    pub fn total_weight(&self) -> R {
        self.total_weight
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u as usize]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.label_index.get(label).copied()
    }

    /// Logical links as `(source, target, weight)` in dense-id order.
    pub fn links(&self) -> &[(NodeId, NodeId, R)] {
        &self.links
    }

    /// Out-neighbors for directed graphs; all neighbors for undirected.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, R)] {
        &self.out_adj[u as usize]
    }

    /// In-neighbors for directed graphs; all neighbors for undirected.
    pub fn in_neighbors(&self, u: NodeId) -> &[(NodeId, R)] {
        match &self.in_adj {
            Some(in_adj) => &in_adj[u as usize],
            None => &self.out_adj[u as usize],
        }
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj[u as usize].len()
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        match &self.in_adj {
            Some(in_adj) => in_adj[u as usize].len(),
            None => self.out_adj[u as usize].len(),
        }
    }

    /// Unweighted total degree: neighbor count, or in-degree + out-degree for
    /// directed graphs.
    pub fn degree(&self, u: NodeId) -> usize {
        if self.directed {
            self.out_degree(u) + self.in_degree(u)
        } else {
            self.out_degree(u)
        }
    }

    /// Weighted out-strength (total strength for undirected graphs).
    pub fn out_strength(&self, u: NodeId) -> R {
        self.out_adj[u as usize].iter().map(|&(_, w)| w).sum()
    }

    pub fn in_strength(&self, u: NodeId) -> R {
        match &self.in_adj {
            Some(in_adj) => in_adj[u as usize].iter().map(|&(_, w)| w).sum(),
            None => self.out_strength(u),
        }
    }

    /// Strength: sum of incident weights; in + out for directed graphs.
    pub fn strength(&self, u: NodeId) -> R {
        if self.directed {
            self.out_strength(u) + self.in_strength(u)
        } else {
            self.out_strength(u)
        }
    }

    /// Rebuilds a graph with the same node set from a replacement link list.
    fn with_links(&self, links: Vec<(NodeId, NodeId, R)>) -> Self {
        let mut links = links;
        for l in &mut links {
            if !self.directed && l.0 > l.1 {
                std::mem::swap(&mut l.0, &mut l.1);
            }
        }
        links.sort_unstable_by_key(|&(a, b, _)| (a, b));
        Self::from_parts(
            self.labels.clone(),
            self.label_index.clone(),
            self.directed,
            links,
            self.self_loops_dropped,
        )
    }
}

fn intern(labels: &mut Vec<String>, index: &mut HashMap<String, NodeId>, label: &str) -> NodeId {
    if let Some(&id) = index.get(label) {
        return id;
    }
    let id = labels.len() as NodeId;
    labels.push(label.to_string());
    index.insert(label.to_string(), id);
    id
}

fn check_weight<R: Real>(w: f64, line: usize) -> Result<R> {
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::Parse {
            line,
            message: format!("link weight must be a positive finite number, found {w}"),
        });
    }
    Ok(crate::num::real(w))
}

/// First and second moments of the unweighted (total) degree distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub mean_degree: f64,
    pub mean_square_degree: f64,
}

/// Computes degree moments over all nodes (total degree for directed graphs).
pub fn degree_stats<R: Real>(g: &Graph<R>) -> Result<DegreeStats> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Degenerate("degree statistics of an empty graph".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for u in 0..n as NodeId {
        let k = g.degree(u) as f64;
        sum += k;
        sum_sq += k * k;
    }
    Ok(DegreeStats {
        mean_degree: sum / n as f64,
        mean_square_degree: sum_sq / n as f64,
    })
}

/// Epidemic threshold `⟨k⟩ / (⟨k²⟩ − ⟨k⟩)` from unweighted degree moments.
///
/// The value may exceed 1 on nearly regular sparse graphs and is reported
/// as-is; callers clamp when using it as a simulation probability. Errors when
/// `⟨k²⟩ = ⟨k⟩` (every degree 0 or 1), where the formula is undefined.
pub fn epidemic_threshold<R: Real>(g: &Graph<R>) -> Result<R> {
    let stats = degree_stats(g)?;
    let denom = stats.mean_square_degree - stats.mean_degree;
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "epidemic threshold undefined: ⟨k²⟩ equals ⟨k⟩ (all degrees are 0 or 1)".into(),
        ));
    }
    Ok(crate::num::real(stats.mean_degree / denom))
}

/// Link replacement strategy for [`rewire`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewireMode {
    /// Replace each selected link by a uniformly chosen ordered pair of
    /// distinct nodes (degrees not preserved).
    Uniform,
    /// Rewire selected links pairwise by double-edge swaps, preserving every
    /// node's degree sequence.
    DegreePreserving,
}

/// Rewires a fraction `r` of links uniformly at random; see
/// [`rewire_with_mode`] for the degree-preserving variant.
pub fn rewire<R: Real>(g: &Graph<R>, r: f64, seed: u64) -> Result<Graph<R>> {
    rewire_with_mode(g, r, seed, RewireMode::Uniform)
}

/// Rewires `⌊r·|E|⌋` links of a simple graph, deterministically for a seed.
///
/// `Uniform`: the selected links are each replaced by a link between a
/// uniformly chosen ordered pair of distinct nodes; replacements that would
/// create a self-loop or duplicate an existing link are resampled (bounded
/// retries). The replaced link's weight carries over to its replacement.
///
/// `DegreePreserving`: `⌈⌊r·|E|⌋ / 2⌉` double-edge swaps are applied with the
/// same rejection rules, preserving the degree sequence.
pub fn rewire_with_mode<R: Real>(g: &Graph<R>, r: f64, seed: u64, mode: RewireMode) -> Result<Graph<R>> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Invalid(format!("rewiring fraction must lie in [0, 1], found {r}")));
    }
    let link_total = g.link_count();
    let k = (r * link_total as f64).floor() as usize;
    if k == 0 {
        return Ok(g.clone());
    }
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Invalid("cannot rewire a graph with fewer than 2 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links: Vec<(NodeId, NodeId, R)> = g.links().to_vec();
    let mut present: HashSet<(NodeId, NodeId)> =
        links.iter().map(|&(a, b, _)| canonical(a, b, g.is_directed())).collect();

    match mode {
        RewireMode::Uniform => {
            let mut order: Vec<usize> = (0..link_total).collect();
            order.shuffle(&mut rng);
            for &idx in order.iter().take(k) {
                let (a, b, w) = links[idx];
                present.remove(&canonical(a, b, g.is_directed()));
                let mut placed = false;
                for _ in 0..REWIRE_RETRY_LIMIT {
                    let x = rng.gen_range(0..n as NodeId);
                    let y = rng.gen_range(0..n as NodeId);
                    if x == y {
                        continue;
                    }
                    let key = canonical(x, y, g.is_directed());
                    if present.contains(&key) {
                        continue;
                    }
                    present.insert(key);
                    links[idx] = (x, y, w);
                    placed = true;
                    break;
                }
                if !placed {
                    return Err(Error::RewiringExhausted { attempts: REWIRE_RETRY_LIMIT });
                }
            }
        }
        RewireMode::DegreePreserving => {
            if link_total < 2 {
                return Err(Error::Invalid("degree-preserving rewiring needs at least 2 links".into()));
            }
            let swaps = k.div_ceil(2);
            for _ in 0..swaps {
                let mut done = false;
                for _ in 0..REWIRE_RETRY_LIMIT {
                    let i = rng.gen_range(0..link_total);
                    let j = rng.gen_range(0..link_total);
                    if i == j {
                        continue;
                    }
                    let (a, b, w1) = links[i];
                    let (mut c, mut d, w2) = links[j];
                    // Links sharing an endpoint cannot produce a useful swap.
                    if a == c || a == d || b == c || b == d {
                        continue;
                    }
                    // For undirected links either orientation of the second
                    // link is a valid swap partner; pick one at random.
                    if !g.is_directed() && rng.gen::<bool>() {
                        std::mem::swap(&mut c, &mut d);
                    }
                    // Proposed swap: (a,b),(c,d) -> (a,d),(c,b).
                    if a == d || c == b {
                        continue;
                    }
                    let k1 = canonical(a, d, g.is_directed());
                    let k2 = canonical(c, b, g.is_directed());
                    let old1 = canonical(a, b, g.is_directed());
                    let old2 = canonical(c, d, g.is_directed());
                    if k1 == k2 {
                        continue;
                    }
                    if (present.contains(&k1) && k1 != old1 && k1 != old2)
                        || (present.contains(&k2) && k2 != old1 && k2 != old2)
                    {
                        continue;
                    }
                    present.remove(&old1);
                    present.remove(&old2);
                    present.insert(k1);
                    present.insert(k2);
                    links[i] = (a, d, w1);
                    links[j] = (c, b, w2);
                    done = true;
                    break;
                }
                if !done {
                    return Err(Error::RewiringExhausted { attempts: REWIRE_RETRY_LIMIT });
                }
            }
        }
    }
    Ok(g.with_links(links))
}

fn canonical(a: NodeId, b: NodeId, directed: bool) -> (NodeId, NodeId) {
    if directed || a < b {
        (a, b)
    } else {
        (b, a)
    }
}
