//! Stationary visit rates, recorded link flows, and per-partition aggregation.
//!
//! Three flow models are supported:
//!
//! * raw undirected flow — visit rates proportional to strength, no
//!   teleportation;
//! * recorded node teleportation — the PageRank kernel, with teleportation
//!   steps kept in the recorded flow;
//! * unrecorded link teleportation — teleportation lands on links
//!   proportionally to weight and is removed from the recorded flow, giving
//!   visit rates that stay strength-proportional on undirected graphs.
//!
//! Power iterations average each step with the identity kernel (a lazy walk),
//! which preserves the stationary distribution while guaranteeing
//! aperiodicity; the reported residual refers to the original kernel.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::num::{real, real_of_usize, Real};
use crate::partition::Partition;

/// Default teleportation rate for both teleportation models.
pub const DEFAULT_TELEPORT_RATE: f64 = 0.15;
/// Default L1 residual tolerance for power iterations.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Default iteration cap for power iterations.
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Flow model selector; `compute` dispatches with default solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowModel {
    RawUndirected,
    NodeTeleport { rate: f64 },
    LinkTeleport { rate: f64 },
}

impl FlowModel {
    pub fn compute<R: Real>(&self, g: &Graph<R>) -> Result<FlowField<R>> {
        match *self {
            FlowModel::RawUndirected => visit_rates_undirected(g),
            FlowModel::NodeTeleport { rate } => {
                visit_rates_node_teleport(g, rate, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
            }
            FlowModel::LinkTeleport { rate } => {
                visit_rates_link_teleport(g, rate, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)
            }
        }
    }
}

/// Stationary node visit rates plus the recorded flow decomposition.
///
/// Recorded flow on a graph arc `u -> v` is stored sparsely; recorded
/// teleportation additionally contributes `tele_src[u] / n` from every node
/// `u` to every node uniformly. Sparse and uniform parts together sum to 1.
#[derive(Debug, Clone)]
pub struct FlowField<R: Real = f64> {
    model: FlowModel,
    visit: Vec<R>,
    arc_flow: Vec<Vec<(NodeId, R)>>,
    tele_src: Vec<R>,
    tele_total: R,
}

impl<R: Real> FlowField<R> {
    pub fn node_count(&self) -> usize {
        self.visit.len()
    }

    pub fn model(&self) -> FlowModel {
        self.model
    }

    pub fn visit_rates(&self) -> &[R] {
        &self.visit
    }

    pub fn visit_rate(&self, u: NodeId) -> R {
        self.visit[u as usize]
    }

    /// Sparse recorded flow out of `u`, aligned with graph adjacency.
    pub fn arc_flows(&self, u: NodeId) -> &[(NodeId, R)] {
        &self.arc_flow[u as usize]
    }

    /// Recorded teleportation rate emitted by each node (uniform targets).
    pub fn teleport_sources(&self) -> &[R] {
        &self.tele_src
    }

    pub fn teleport_total(&self) -> R {
        self.tele_total
    }

    /// Total recorded flow: sparse arc flow plus uniform teleportation mass.
    pub fn total_flow(&self) -> R {
        let arcs: R = self.arc_flow.iter().flatten().map(|&(_, f)| f).sum();
        arcs + self.tele_total
    }

    /// In-flow marginal per node (sparse in-flow plus uniform teleportation).
    pub fn in_flow_marginals(&self) -> Vec<R> {
        let n = self.visit.len();
        let uniform_in = self.tele_total / real_of_usize(n);
        let mut marginal = vec![uniform_in; n];
        for flows in &self.arc_flow {
            for &(v, f) in flows {
                marginal[v as usize] = marginal[v as usize] + f;
            }
        }
        marginal
    }
}

/// Raw undirected flow: `p_u = s_u / Σ s_v`, each link carries
/// `w / (2 · total weight)` of flow per direction.
pub fn visit_rates_undirected<R: Real>(g: &Graph<R>) -> Result<FlowField<R>> {
    if g.is_directed() {
        return Err(Error::Invalid("raw flow requires an undirected graph".into()));
    }
    if g.node_count() == 0 {
        return Err(Error::Degenerate("flow on an empty graph".into()));
    }
    if g.link_count() == 0 {
        return Err(Error::Degenerate("raw flow undefined without links".into()));
    }
    let n = g.node_count();
    let two_w = g.total_weight() * real(2.0);
    let mut visit = Vec::with_capacity(n);
    let mut arc_flow = Vec::with_capacity(n);
    for u in 0..n as NodeId {
        visit.push(g.strength(u) / two_w);
        arc_flow.push(g.neighbors(u).iter().map(|&(v, w)| (v, w / two_w)).collect());
    }
    Ok(FlowField {
        model: FlowModel::RawUndirected,
        visit,
        arc_flow,
        tele_src: vec![R::zero(); n],
        tele_total: R::zero(),
    })
}

/// Recorded node teleportation (the PageRank kernel).
///
/// With probability `rate` a walker teleports to a uniformly random node
/// (including itself); dangling nodes teleport with probability 1.
/// Teleportation steps are recorded: they stay part of the flow used for
/// module enter/exit rates. `rate = 0` requires a strongly connected graph to
/// converge and then reproduces the raw stationary distribution.
pub fn visit_rates_node_teleport<R: Real>(
    g: &Graph<R>,
    rate: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FlowField<R>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Invalid(format!("teleportation rate must lie in [0, 1], found {rate}")));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Degenerate("flow on an empty graph".into()));
    }
    let tau: R = real(rate);
    let strengths: Vec<R> = (0..n as NodeId).map(|u| g.out_strength(u)).collect();
    let uniform = R::one() / real_of_usize(n);
    let mut p = vec![uniform; n];
    let mut image = vec![R::zero(); n];
    let mut residual = R::infinity();
    let mut converged = false;
    for _ in 0..max_iter {
        apply_node_teleport_kernel(g, &strengths, tau, uniform, &p, &mut image);
        residual = l1_distance(&p, &image);
        if residual.to_f64().unwrap_or(f64::INFINITY) < tol {
            converged = true;
            break;
        }
        let half = real::<R>(0.5);
        for (pv, iv) in p.iter_mut().zip(&image) {
            *pv = (*pv + *iv) * half;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    normalize(&mut p);

    let mut arc_flow = Vec::with_capacity(n);
    let mut tele_src = Vec::with_capacity(n);
    let one_minus_tau = R::one() - tau;
    for u in 0..n {
        if strengths[u] == R::zero() {
            tele_src.push(p[u]);
            arc_flow.push(Vec::new());
        } else {
            tele_src.push(tau * p[u]);
            let scale = p[u] * one_minus_tau / strengths[u];
            arc_flow.push(
                g.neighbors(u as NodeId).iter().map(|&(v, w)| (v, scale * w)).collect(),
            );
        }
    }
    let tele_total = tele_src.iter().copied().sum();
    Ok(FlowField {
        model: FlowModel::NodeTeleport { rate },
        visit: p,
        arc_flow,
        tele_src,
        tele_total,
    })
}

fn apply_node_teleport_kernel<R: Real>(
    g: &Graph<R>,
    strengths: &[R],
    tau: R,
    uniform: R,
    p: &[R],
    image: &mut [R],
) {
    let n = p.len();
    image.iter_mut().for_each(|x| *x = R::zero());
    let mut dangling_mass = R::zero();
    let one_minus_tau = R::one() - tau;
    for u in 0..n {
        if strengths[u] == R::zero() {
            dangling_mass = dangling_mass + p[u];
            continue;
        }
        let scale = p[u] * one_minus_tau / strengths[u];
        for &(v, w) in g.neighbors(u as NodeId) {
            image[v as usize] = image[v as usize] + scale * w;
        }
    }
    // Teleporting walkers (and all dangling mass) land uniformly.
    let background = (tau * (R::one() - dangling_mass) + dangling_mass) * uniform;
    for x in image.iter_mut() {
        *x = *x + background;
    }
}

/// Unrecorded link teleportation.
///
/// The auxiliary walk teleports, with probability `rate` (always, for
/// dangling nodes), onto a link chosen proportionally to weight, landing on
/// its target. Teleportation is then removed from the recorded flow, which is
/// renormalized; visit rates are the in-flow marginals of the recorded flow.
/// Requires `rate` in (0, 1).
pub fn visit_rates_link_teleport<R: Real>(
    g: &Graph<R>,
    rate: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FlowField<R>> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Invalid(format!(
            "link teleportation rate must lie strictly in (0, 1), found {rate}"
        )));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Degenerate("flow on an empty graph".into()));
    }
    if g.link_count() == 0 {
        return Err(Error::Degenerate("link teleportation undefined without links".into()));
    }
    let tau: R = real(rate);
    let strengths: Vec<R> = (0..n as NodeId).map(|u| g.out_strength(u)).collect();
    // Teleportation landing distribution: in-strength share per node.
    let mut landing: Vec<R> = (0..n as NodeId).map(|u| g.in_strength(u)).collect();
    normalize(&mut landing);

    let uniform = R::one() / real_of_usize(n);
    let mut alpha = vec![uniform; n];
    let mut image = vec![R::zero(); n];
    let mut residual = R::infinity();
    let mut converged = false;
    let one_minus_tau = R::one() - tau;
    for _ in 0..max_iter {
        image.iter_mut().for_each(|x| *x = R::zero());
        let mut dangling_mass = R::zero();
        for u in 0..n {
            if strengths[u] == R::zero() {
                dangling_mass = dangling_mass + alpha[u];
                continue;
            }
            let scale = alpha[u] * one_minus_tau / strengths[u];
            for &(v, w) in g.neighbors(u as NodeId) {
                image[v as usize] = image[v as usize] + scale * w;
            }
        }
        let tele_mass = tau * (R::one() - dangling_mass) + dangling_mass;
        for (x, t) in image.iter_mut().zip(&landing) {
            *x = *x + tele_mass * *t;
        }
        residual = l1_distance(&alpha, &image);
        if residual.to_f64().unwrap_or(f64::INFINITY) < tol {
            converged = true;
            break;
        }
        let half = real::<R>(0.5);
        for (av, iv) in alpha.iter_mut().zip(&image) {
            *av = (*av + *iv) * half;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    normalize(&mut alpha);

    // Recorded (non-teleport) flow, renormalized to a probability.
    let recorded_mass: R = alpha
        .iter()
        .enumerate()
        .filter(|&(u, _)| strengths[u] > R::zero())
        .map(|(_, &a)| a * one_minus_tau)
        .sum();
    if recorded_mass <= R::zero() {
        return Err(Error::Degenerate(
            "link teleportation leaves no recorded flow (all stationary mass is dangling)".into(),
        ));
    }
    let mut arc_flow = Vec::with_capacity(n);
    let mut visit = vec![R::zero(); n];
    for u in 0..n {
        if strengths[u] == R::zero() {
            arc_flow.push(Vec::new());
            continue;
        }
        let scale = alpha[u] * one_minus_tau / (strengths[u] * recorded_mass);
        let flows: Vec<(NodeId, R)> =
            g.neighbors(u as NodeId).iter().map(|&(v, w)| (v, scale * w)).collect();
        for &(v, f) in &flows {
            visit[v as usize] = visit[v as usize] + f;
        }
        arc_flow.push(flows);
    }
    Ok(FlowField {
        model: FlowModel::LinkTeleport { rate },
        visit,
        arc_flow,
        tele_src: vec![R::zero(); n],
        tele_total: R::zero(),
    })
}

fn l1_distance<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum()
}

fn normalize<R: Real>(v: &mut [R]) {
    let total: R = v.iter().copied().sum();
    if total > R::zero() {
        for x in v.iter_mut() {
            *x = *x / total;
        }
    }
}

/// Codebook-usage convention for module rates.
///
/// `WithExit` counts a module's exit rate into its usage `p_m` (the codebook
/// distribution includes the exit codeword). `NodeFlow` uses the plain sum of
/// member visit rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    WithExit,
    NodeFlow,
}

/// Flow rates of one module in a partition-flow aggregation.
#[derive(Debug, Clone)]
pub struct ModuleFlows<R: Real = f64> {
    pub parent: Option<u32>,
    /// 1 for top-level modules.
    pub depth: usize,
    pub is_leaf: bool,
    pub enter: R,
    pub exit: R,
    pub node_rate_sum: R,
    pub node_count: usize,
    /// Codebook usage under the aggregation's convention
    /// (`node_rate_sum` plus, under `WithExit`, the exit rate).
    pub usage: R,
}

/// Module-level flow rates for a partition, at every nesting level.
#[derive(Debug, Clone)]
pub struct PartitionFlows<R: Real = f64> {
    model: FlowModel,
    convention: Convention,
    /// Index codebook usage: total enter rate of top-level modules.
    q: R,
    modules: Vec<ModuleFlows<R>>,
    leaf_module: Vec<u32>,
    visit: Vec<R>,
}

impl<R: Real> PartitionFlows<R> {
    pub fn model(&self) -> FlowModel {
        self.model
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Total top-level enter rate (index codebook usage).
    pub fn index_rate(&self) -> R {
        self.q
    }

    pub fn modules(&self) -> &[ModuleFlows<R>] {
        &self.modules
    }

    pub fn node_count(&self) -> usize {
        self.visit.len()
    }

    pub fn visit_rate(&self, u: NodeId) -> R {
        self.visit[u as usize]
    }

    /// Module index (into [`Self::modules`]) of the node's leaf module.
    pub fn leaf_module_of(&self, u: NodeId) -> u32 {
        self.leaf_module[u as usize]
    }
}

/// Aggregates a flow field over a partition: enter/exit/node rates per module
/// at every level, plus codebook usages under `convention`.
pub fn aggregate_partition_flows<R: Real>(
    f: &FlowField<R>,
    m: &Partition,
    convention: Convention,
) -> Result<PartitionFlows<R>> {
    let n = f.node_count();
    if m.node_count() != n {
        return Err(Error::Invalid(format!(
            "partition covers {} nodes but the flow field has {}",
            m.node_count(),
            n
        )));
    }
    if n == 0 {
        return Err(Error::Degenerate("aggregation over an empty graph".into()));
    }

    // Intern every path prefix as a module; children always get larger ids
    // than their parents, so a reverse sweep propagates sums upward.
    let mut module_ids: std::collections::HashMap<Vec<u32>, u32> = std::collections::HashMap::new();
    let mut modules: Vec<ModuleFlows<R>> = Vec::new();
    let mut chains: Vec<Vec<u32>> = Vec::new();
    let mut leaf_module = Vec::with_capacity(n);
    for u in 0..n {
        let path = m.path(u as NodeId);
        let mut parent: Option<u32> = None;
        let mut chain = Vec::with_capacity(path.len());
        for depth in 1..=path.len() {
            let key = path[..depth].to_vec();
            let id = *module_ids.entry(key).or_insert_with(|| {
                modules.push(ModuleFlows {
                    parent,
                    depth,
                    is_leaf: depth == path.len(),
                    enter: R::zero(),
                    exit: R::zero(),
                    node_rate_sum: R::zero(),
                    node_count: 0,
                    usage: R::zero(),
                });
                (modules.len() - 1) as u32
            });
            chain.push(id);
            parent = Some(id);
        }
        let leaf = *chain.last().expect("paths are non-empty");
        leaf_module.push(leaf);
        if chains.len() <= leaf as usize {
            chains.resize(leaf as usize + 1, Vec::new());
        }
        chains[leaf as usize] = chain;
        let lm = &mut modules[leaf as usize];
        lm.node_rate_sum = lm.node_rate_sum + f.visit_rate(u as NodeId);
        lm.node_count += 1;
    }

    // Teleportation sources per leaf, before upward propagation.
    let mut tele_out = vec![R::zero(); modules.len()];
    let has_teleport = f.teleport_total() > R::zero();
    if has_teleport {
        for u in 0..n {
            let leaf = leaf_module[u] as usize;
            tele_out[leaf] = tele_out[leaf] + f.teleport_sources()[u];
        }
    }

    for id in (0..modules.len()).rev() {
        if let Some(parent) = modules[id].parent {
            let (rate, count, tele) = (modules[id].node_rate_sum, modules[id].node_count, tele_out[id]);
            let pm = &mut modules[parent as usize];
            pm.node_rate_sum = pm.node_rate_sum + rate;
            pm.node_count += count;
            tele_out[parent as usize] = tele_out[parent as usize] + tele;
        }
    }

    // Sparse arc flow crossing module boundaries at any level.
    for u in 0..n as NodeId {
        let cu = &chains[leaf_module[u as usize] as usize];
        for &(v, flow) in f.arc_flows(u) {
            let cv = &chains[leaf_module[v as usize] as usize];
            if cu.last() == cv.last() {
                continue;
            }
            let shared = cu.iter().zip(cv.iter()).take_while(|(a, b)| a == b).count();
            for &mid in &cu[shared..] {
                modules[mid as usize].exit = modules[mid as usize].exit + flow;
            }
            for &mid in &cv[shared..] {
                modules[mid as usize].enter = modules[mid as usize].enter + flow;
            }
        }
    }

    // Uniformly spread teleportation: a module's share is proportional to the
    // node counts inside and outside it.
    if has_teleport {
        let n_r = real_of_usize::<R>(n);
        let total = f.teleport_total();
        for (id, module) in modules.iter_mut().enumerate() {
            let inside = real_of_usize::<R>(module.node_count);
            let outside = n_r - inside;
            module.exit = module.exit + tele_out[id] * outside / n_r;
            module.enter = module.enter + (total - tele_out[id]) * inside / n_r;
        }
    }

    let mut q = R::zero();
    for module in modules.iter().filter(|m| m.parent.is_none()) {
        q = q + module.enter;
    }
    for module in modules.iter_mut() {
        module.usage = match convention {
            Convention::WithExit => module.node_rate_sum + module.exit,
            Convention::NodeFlow => module.node_rate_sum,
        };
    }

    Ok(PartitionFlows {
        model: f.model(),
        convention,
        q,
        modules,
        leaf_module,
        visit: f.visit_rates().to_vec(),
    })
}
