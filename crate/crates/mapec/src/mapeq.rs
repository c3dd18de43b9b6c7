//! Map equation codelengths and map equation centrality.
//!
//! The codelength of a partition is the expected number of bits an ideal
//! modular code spends per random-walker step: an index codebook picks
//! modules, and each module's codebook names its nodes and the exit event.
//! Map equation centrality scores a node by the bits saved when the code is
//! redesigned without that node's codeword while the flows stay untouched —
//! the node's marginal cost to everyone else.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{
    aggregate_partition_flows, Convention, FlowField, FlowModel, PartitionFlows,
};
use crate::graph::NodeId;
use crate::num::{plogp, Real};
use crate::partition::Partition;

/// One-level codelength: the entropy of the node visit rates.
pub fn codelength_one_level<R: Real>(f: &FlowField<R>) -> R {
    -f.visit_rates().iter().map(|&p| plogp(p)).sum::<R>()
}

/// Codelength of a partition at any nesting depth.
///
/// Module codebook usages include the exit codeword regardless of the
/// centrality convention; with all nodes in one module this reduces to the
/// one-level codelength.
pub fn codelength<R: Real>(f: &FlowField<R>, m: &Partition) -> Result<R> {
    let pf = aggregate_partition_flows(f, m, Convention::WithExit)?;
    Ok(codelength_of_flows(&pf))
}

/// Codelength of an already-aggregated flow field.
///
/// Uses enter, exit, and node rates directly, so the result does not depend
/// on the convention the aggregation was built with.
pub fn codelength_of_flows<R: Real>(pf: &PartitionFlows<R>) -> R {
    let modules = pf.modules();
    // Every non-leaf codebook (the root index and each internal module)
    // spends plogp(usage) − plogp(exit) − Σ plogp(child enters); usage is the
    // exit rate plus the children's enter rates. Leaf codebooks spend
    // plogp(nodes + exit) − plogp(exit) − Σ plogp(p_u).
    let mut child_enter_sum = vec![R::zero(); modules.len()];
    let mut child_enter_plogp = vec![R::zero(); modules.len()];
    let mut root_enter_sum = R::zero();
    let mut root_enter_plogp = R::zero();
    for module in modules {
        match module.parent {
            Some(parent) => {
                let i = parent as usize;
                child_enter_sum[i] = child_enter_sum[i] + module.enter;
                child_enter_plogp[i] = child_enter_plogp[i] + plogp(module.enter);
            }
            None => {
                root_enter_sum = root_enter_sum + module.enter;
                root_enter_plogp = root_enter_plogp + plogp(module.enter);
            }
        }
    }
    let mut total = plogp(root_enter_sum) - root_enter_plogp;
    for (i, module) in modules.iter().enumerate() {
        if module.is_leaf {
            total = total + plogp(module.node_rate_sum + module.exit) - plogp(module.exit);
        } else {
            total = total + plogp(module.exit + child_enter_sum[i])
                - plogp(module.exit)
                - child_enter_plogp[i];
        }
    }
    total - (0..pf.node_count() as NodeId).map(|u| plogp(pf.visit_rate(u))).sum::<R>()
}

/// Bits saved by silencing rate `silenced` out of a codebook with total
/// usage `usage`: −(usage − silenced) · log₂((usage − silenced) / usage).
fn silence_term<R: Real>(usage: R, silenced: R) -> R {
    if usage <= R::zero() {
        return R::zero();
    }
    let rest = usage - silenced;
    if rest <= R::zero() {
        return R::zero();
    }
    -rest * (rest / usage).log2()
}

/// Map equation centrality of a single node: the codelength saved by
/// silencing it, computed within its leaf module's codebook.
pub fn mec_node<R: Real>(pf: &PartitionFlows<R>, u: NodeId) -> Result<R> {
    if (u as usize) >= pf.node_count() {
        return Err(Error::Invalid(format!("node {u} is not covered by the partition flows")));
    }
    let usage = pf.modules()[pf.leaf_module_of(u) as usize].usage;
    Ok(silence_term(usage, pf.visit_rate(u)))
}

/// Joint map equation centrality of a node set: per leaf module touched by
/// the set, the bits saved by silencing the members' combined rate.
pub fn mec_set<R: Real>(pf: &PartitionFlows<R>, nodes: &[NodeId]) -> Result<R> {
    if nodes.is_empty() {
        return Err(Error::Invalid("joint centrality of an empty node set".into()));
    }
    let mut silenced: Vec<R> = vec![R::zero(); pf.modules().len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut seen = vec![false; pf.node_count()];
    for &u in nodes {
        if (u as usize) >= pf.node_count() {
            return Err(Error::Invalid(format!("node {u} is not covered by the partition flows")));
        }
        if seen[u as usize] {
            return Err(Error::Invalid(format!("node {u} listed twice in the node set")));
        }
        seen[u as usize] = true;
        let m = pf.leaf_module_of(u);
        if silenced[m as usize] == R::zero() {
            touched.push(m);
        }
        silenced[m as usize] = silenced[m as usize] + pf.visit_rate(u);
    }
    let mut total = R::zero();
    for &m in &touched {
        total = total + silence_term(pf.modules()[m as usize].usage, silenced[m as usize]);
    }
    Ok(total)
}

/// Map equation centrality for every node in one pass.
///
/// Scores are independent per node, so the pass parallelizes; the indexed
/// collect keeps the output order (and hence every bit of the result)
/// identical across thread counts.
pub fn mec_all<R: Real>(pf: &PartitionFlows<R>) -> CentralityVector<R> {
    let scores = (0..pf.node_count() as NodeId)
        .into_par_iter()
        .with_min_len(4096)
        .map(|u| {
            let usage = pf.modules()[pf.leaf_module_of(u) as usize].usage;
            silence_term(usage, pf.visit_rate(u))
        })
        .collect();
    CentralityVector {
        method: Method::MapEquation,
        model: Some(pf.model()),
        convention: Some(pf.convention()),
        scores,
    }
}

/// Centrality measure selector (map equation centrality plus baselines).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MapEquation,
    Degree,
    Betweenness,
    PageRank,
    ModularityVitality,
    CommunityHubBridge,
    CommunityBasedCentrality,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::MapEquation => "mec",
            Method::Degree => "dc",
            Method::Betweenness => "bc",
            Method::PageRank => "pr",
            Method::ModularityVitality => "mv",
            Method::CommunityHubBridge => "chb",
            Method::CommunityBasedCentrality => "cbc",
        }
    }
}

/// Per-node centrality scores tagged with their provenance: the measure, and
/// where applicable the flow model and codebook-usage convention.
#[derive(Debug, Clone)]
pub struct CentralityVector<R: Real = f64> {
    method: Method,
    model: Option<FlowModel>,
    convention: Option<Convention>,
    scores: Vec<R>,
}

impl<R: Real> CentralityVector<R> {
    pub fn new(method: Method, scores: Vec<R>) -> Self {
        CentralityVector { method, model: None, convention: None, scores }
    }

    pub fn with_model(mut self, model: FlowModel) -> Self {
        self.model = Some(model);
        self
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = Some(convention);
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn model(&self) -> Option<FlowModel> {
        self.model
    }

    pub fn convention(&self) -> Option<Convention> {
        self.convention
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[R] {
        &self.scores
    }

    pub fn score(&self, u: NodeId) -> R {
        self.scores[u as usize]
    }

    /// Nodes sorted by descending score; equal scores break ties by
    /// ascending node id, making rankings deterministic.
    pub fn ranking(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..self.scores.len() as NodeId).collect();
        order.sort_by(|&a, &b| {
            self.scores[b as usize]
                .partial_cmp(&self.scores[a as usize])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }

    /// The `k` highest-ranked nodes under the same ordering as `ranking`.
    pub fn top(&self, k: usize) -> Vec<NodeId> {
        let mut order = self.ranking();
        order.truncate(k);
        order
    }
}
