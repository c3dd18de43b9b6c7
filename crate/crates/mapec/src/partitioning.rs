//! Greedy two-level search for the shortest map equation codelength, plus
//! partition-level statistics (effective module count, mixing, modularity).
//!
//! The optimizer is Louvain-style: every node starts in its own module,
//! sweeps move nodes to the adjacent module (or back into an empty one) with
//! the largest codelength decrease, and converged levels are aggregated into
//! super-nodes before the sweeps repeat. Move gains are evaluated
//! incrementally in O(degree) from per-module enter, exit, and node rates —
//! including the uniform teleportation background, so recorded-teleportation
//! flows optimize the same objective they are scored with. The best of
//! `num_runs` independently seeded node-order shuffles wins.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::graph::{Graph, NodeId};
use crate::mapeq::{codelength, codelength_one_level};
use crate::num::{derive_seed, plogp, real_of_usize, Real};
use crate::partition::Partition;

/// Default number of seeded restarts.
pub const DEFAULT_NUM_RUNS: usize = 100;
/// Default cap on move sweeps per aggregation level.
pub const DEFAULT_MAX_SWEEPS: usize = 100;
/// Default minimum codelength gain (bits) to keep sweeping.
pub const DEFAULT_MIN_GAIN: f64 = 1e-10;

/// Accept a move only if it saves strictly more than this many bits; filters
/// floating-point noise between equivalent configurations.
const MOVE_EPSILON: f64 = 1e-16;

/// Safety cap on aggregation levels; reached depth is logarithmic in
/// practice.
const MAX_LEVELS: usize = 64;

/// Search-budget knobs for the greedy optimizer.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub num_runs: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Minimum total gain (bits) a sweep must achieve to continue.
    pub min_gain: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            num_runs: DEFAULT_NUM_RUNS,
            seed: 0,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            min_gain: DEFAULT_MIN_GAIN,
        }
    }
}

impl SearchConfig {
    pub fn with_runs(num_runs: usize, seed: u64) -> Self {
        SearchConfig { num_runs, seed, ..SearchConfig::default() }
    }
}

/// Searches for the two-level partition with the shortest codelength.
///
/// Runs `cfg.num_runs` seeded greedy searches (in parallel) and returns the
/// best partition with its exactly recomputed codelength. The result never
/// exceeds the one-level codelength: if every search ends worse, the trivial
/// one-module partition is returned instead. Zero-rate nodes stay in
/// singleton modules.
pub fn optimize_two_level<R: Real>(
    g: &Graph<R>,
    f: &FlowField<R>,
    cfg: &SearchConfig,
) -> Result<(Partition, R)> {
    let n = g.node_count();
    if n != f.node_count() {
        return Err(Error::Invalid(format!(
            "flow field covers {} nodes but the graph has {n}",
            f.node_count()
        )));
    }
    if n == 0 {
        return Err(Error::Degenerate("optimization over an empty graph".into()));
    }
    if cfg.num_runs == 0 {
        return Err(Error::Invalid("search needs at least one run".into()));
    }
    if cfg.min_gain < 0.0 {
        return Err(Error::Invalid("minimum gain must be non-negative".into()));
    }

    let runs: Vec<(f64, usize, Vec<u32>)> = (0..cfg.num_runs)
        .into_par_iter()
        .map(|run| {
            let assignment = single_run(f, cfg, run);
            let m = Partition::two_level(&assignment);
            let bits = codelength(f, &m)
                .expect("search assignments always cover the flow field")
                .to_f64()
                .unwrap_or(f64::INFINITY);
            (bits, run, assignment)
        })
        .collect();
    let (_, _, best) = runs
        .into_iter()
        .min_by(|a, b| {
            a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1))
        })
        .expect("at least one run");

    let partition = Partition::two_level(&best);
    let bits = codelength(f, &partition)?;
    let one_level_bits = codelength_one_level(f);
    if bits > one_level_bits {
        return Ok((Partition::one_level(n), one_level_bits));
    }
    Ok((partition, bits))
}

fn single_run<R: Real>(f: &FlowField<R>, cfg: &SearchConfig, run: usize) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, run as u64, 0));
    let mut level = Level::from_flow_field(f);
    let mut node_to_super: Vec<u32> = (0..f.node_count() as u32).collect();
    for _ in 0..MAX_LEVELS {
        let mut level_gain = 0.0;
        let mut scratch = Scratch::new(level.len());
        for _ in 0..cfg.max_sweeps {
            let mut order: Vec<u32> = (0..level.len() as u32).collect();
            order.shuffle(&mut rng);
            let gain = level.sweep(&order, &mut scratch);
            level_gain += gain;
            if gain < cfg.min_gain {
                break;
            }
        }
        if level_gain < cfg.min_gain {
            break;
        }
        let occupied = level.module_sizes.iter().filter(|&&s| s > 0).count();
        if occupied == level.len() {
            break;
        }
        let (next, mapping) = level.aggregate();
        for s in node_to_super.iter_mut() {
            *s = mapping[*s as usize];
        }
        level = next;
    }
    node_to_super.iter().map(|&s| level.module[s as usize]).collect()
}

/// Per-call scratch buffers for gathering a node's flow to adjacent modules.
struct Scratch<R: Real = f64> {
    to_module: Vec<R>,
    from_module: Vec<R>,
    seen: Vec<bool>,
    touched: Vec<u32>,
}

impl<R: Real> Scratch<R> {
    fn new(slots: usize) -> Self {
        Scratch {
            to_module: vec![R::zero(); slots],
            from_module: vec![R::zero(); slots],
            seen: vec![false; slots],
            touched: Vec::new(),
        }
    }

    fn mark(&mut self, m: u32) {
        if !self.seen[m as usize] {
            self.seen[m as usize] = true;
            self.touched.push(m);
        }
    }

    fn clear(&mut self) {
        for &m in &self.touched {
            self.to_module[m as usize] = R::zero();
            self.from_module[m as usize] = R::zero();
            self.seen[m as usize] = false;
        }
        self.touched.clear();
    }
}

/// One aggregation level: super-nodes with their recorded flows, and the
/// current module state updated move by move.
struct Level<R: Real = f64> {
    out_arcs: Vec<Vec<(u32, R)>>,
    in_arcs: Vec<Vec<(u32, R)>>,
    out_total: Vec<R>,
    in_total: Vec<R>,
    flow: Vec<R>,
    tele: Vec<R>,
    count: Vec<usize>,
    /// Module id per super-node; module slots coincide with initial
    /// super-node indices and may empty out during sweeps.
    module: Vec<u32>,
    module_enter: Vec<R>,
    module_exit: Vec<R>,
    module_flow: Vec<R>,
    module_tele: Vec<R>,
    module_count: Vec<usize>,
    module_sizes: Vec<u32>,
    empty_modules: Vec<u32>,
    /// Total original-node count, as a real, for the teleport background.
    n_total: R,
    tele_total: R,
    /// Current index rate: total enter rate incl. teleport background.
    q: R,
}

impl<R: Real> Level<R> {
    fn len(&self) -> usize {
        self.flow.len()
    }

    fn from_flow_field(f: &FlowField<R>) -> Self {
        let n = f.node_count();
        let out_arcs: Vec<Vec<(u32, R)>> =
            (0..n as NodeId).map(|u| f.arc_flows(u).to_vec()).collect();
        let flow = f.visit_rates().to_vec();
        let tele = f.teleport_sources().to_vec();
        let count = vec![1usize; n];
        Self::assemble(out_arcs, flow, tele, count, real_of_usize(n), f.teleport_total())
    }

    fn assemble(
        out_arcs: Vec<Vec<(u32, R)>>,
        flow: Vec<R>,
        tele: Vec<R>,
        count: Vec<usize>,
        n_total: R,
        tele_total: R,
    ) -> Self {
        let n = flow.len();
        let mut in_arcs: Vec<Vec<(u32, R)>> = vec![Vec::new(); n];
        for (u, arcs) in out_arcs.iter().enumerate() {
            for &(v, fl) in arcs {
                in_arcs[v as usize].push((u as u32, fl));
            }
        }
        let out_total: Vec<R> =
            out_arcs.iter().map(|arcs| arcs.iter().map(|&(_, fl)| fl).sum()).collect();
        let in_total: Vec<R> =
            in_arcs.iter().map(|arcs| arcs.iter().map(|&(_, fl)| fl).sum()).collect();
        let mut level = Level {
            module: (0..n as u32).collect(),
            module_enter: in_total.clone(),
            module_exit: out_total.clone(),
            module_flow: flow.clone(),
            module_tele: tele.clone(),
            module_count: count.clone(),
            module_sizes: vec![1; n],
            empty_modules: Vec::new(),
            out_arcs,
            in_arcs,
            out_total,
            in_total,
            flow,
            tele,
            count,
            n_total,
            tele_total,
            q: R::zero(),
        };
        level.q = (0..n).map(|m| level.true_rates(m as u32).0).sum();
        level
    }

    /// Enter and exit rates of a module including the uniform teleport
    /// background: teleporting walkers land anywhere, so a module leaks
    /// `tele_m · (n − n_m)/n` and receives `(T − tele_m) · n_m/n`.
    fn true_rates_of(&self, enter: R, exit: R, tele: R, count: usize) -> (R, R) {
        if self.tele_total == R::zero() {
            return (enter, exit);
        }
        let inside = real_of_usize::<R>(count);
        let outside = self.n_total - inside;
        (
            enter + (self.tele_total - tele) * inside / self.n_total,
            exit + tele * outside / self.n_total,
        )
    }

    fn true_rates(&self, m: u32) -> (R, R) {
        let i = m as usize;
        self.true_rates_of(
            self.module_enter[i],
            self.module_exit[i],
            self.module_tele[i],
            self.module_count[i],
        )
    }

    /// Module contribution to the variable part of the codelength.
    fn module_term(&self, enter_true: R, exit_true: R, flow: R) -> R {
        plogp(flow + exit_true) - plogp(enter_true) - plogp(exit_true)
    }

    /// Variable part of the codelength: everything except the constant
    /// −Σ plogp(p_u) over original nodes.
    #[cfg(test)]
    fn variable_bits(&self) -> R {
        let mut total = plogp(self.q);
        for m in 0..self.len() as u32 {
            if self.module_sizes[m as usize] == 0 {
                continue;
            }
            let (enter_true, exit_true) = self.true_rates(m);
            total = total + self.module_term(enter_true, exit_true, self.module_flow[m as usize]);
        }
        total
    }

    fn sweep(&mut self, order: &[u32], scratch: &mut Scratch<R>) -> f64 {
        let mut gain = 0.0;
        for &i in order {
            if self.flow[i as usize] == R::zero() && self.tele[i as usize] == R::zero() {
                continue;
            }
            gain += self.try_best_move(i, scratch);
        }
        gain
    }

    /// Moves `i` to the adjacent (or empty) module with the largest
    /// codelength decrease, if any decrease exceeds the acceptance epsilon.
    /// Returns the bits saved.
    fn try_best_move(&mut self, i: u32, scratch: &mut Scratch<R>) -> f64 {
        let a = self.module[i as usize];
        scratch.clear();
        for idx in 0..self.out_arcs[i as usize].len() {
            let (j, fl) = self.out_arcs[i as usize][idx];
            let m = self.module[j as usize];
            scratch.mark(m);
            scratch.to_module[m as usize] = scratch.to_module[m as usize] + fl;
        }
        for idx in 0..self.in_arcs[i as usize].len() {
            let (j, fl) = self.in_arcs[i as usize][idx];
            let m = self.module[j as usize];
            scratch.mark(m);
            scratch.from_module[m as usize] = scratch.from_module[m as usize] + fl;
        }

        let mut candidates: Vec<u32> =
            scratch.touched.iter().copied().filter(|&m| m != a).collect();
        candidates.sort_unstable();
        // Escape move: re-open an empty module (skip when already alone).
        if self.module_sizes[a as usize] > 1 {
            if let Some(&empty) = self.empty_modules.last() {
                candidates.push(empty);
            }
        }

        let mut best: Option<(f64, u32)> = None;
        for &b in &candidates {
            let delta = self
                .move_delta(
                    i,
                    a,
                    b,
                    scratch.to_module[a as usize],
                    scratch.from_module[a as usize],
                    scratch.to_module[b as usize],
                    scratch.from_module[b as usize],
                )
                .to_f64()
                .unwrap_or(0.0);
            if delta < -MOVE_EPSILON && best.map_or(true, |(d, _)| delta < d) {
                best = Some((delta, b));
            }
        }
        match best {
            Some((delta, b)) => {
                self.apply_move(
                    i,
                    a,
                    b,
                    scratch.to_module[a as usize],
                    scratch.from_module[a as usize],
                    scratch.to_module[b as usize],
                    scratch.from_module[b as usize],
                );
                -delta
            }
            None => 0.0,
        }
    }

    /// New module rates after taking node `i` out of `a` (towards `b`) or
    /// into `b`; `to_m`/`from_m` are `i`'s arc flows into and out of the
    /// module's remaining members.
    #[allow(clippy::too_many_arguments)]
    fn detached_rates(&self, i: u32, a: u32, to_a: R, from_a: R) -> (R, R, R, R, usize) {
        let ai = a as usize;
        let ii = i as usize;
        if self.module_sizes[ai] == 1 {
            // Hard zero for an emptied module: avoids floating-point drift.
            return (R::zero(), R::zero(), R::zero(), R::zero(), 0);
        }
        (
            self.module_enter[ai] - (self.in_total[ii] - from_a) + to_a,
            self.module_exit[ai] - (self.out_total[ii] - to_a) + from_a,
            self.module_flow[ai] - self.flow[ii],
            self.module_tele[ai] - self.tele[ii],
            self.module_count[ai] - self.count[ii],
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn attached_rates(&self, i: u32, b: u32, to_b: R, from_b: R) -> (R, R, R, R, usize) {
        let bi = b as usize;
        let ii = i as usize;
        (
            self.module_enter[bi] + (self.in_total[ii] - from_b) - to_b,
            self.module_exit[bi] + (self.out_total[ii] - to_b) - from_b,
            self.module_flow[bi] + self.flow[ii],
            self.module_tele[bi] + self.tele[ii],
            self.module_count[bi] + self.count[ii],
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn move_delta(&self, i: u32, a: u32, b: u32, to_a: R, from_a: R, to_b: R, from_b: R) -> R {
        let (a_enter_true, a_exit_true) = self.true_rates(a);
        let (b_enter_true, b_exit_true) = self.true_rates(b);
        let old = self.module_term(a_enter_true, a_exit_true, self.module_flow[a as usize])
            + self.module_term(b_enter_true, b_exit_true, self.module_flow[b as usize]);

        let (a_enter, a_exit, a_flow, a_tele, a_count) = self.detached_rates(i, a, to_a, from_a);
        let (b_enter, b_exit, b_flow, b_tele, b_count) = self.attached_rates(i, b, to_b, from_b);
        let (a_enter_new, a_exit_new) = self.true_rates_of(a_enter, a_exit, a_tele, a_count);
        let (b_enter_new, b_exit_new) = self.true_rates_of(b_enter, b_exit, b_tele, b_count);
        let new = self.module_term(a_enter_new, a_exit_new, a_flow)
            + self.module_term(b_enter_new, b_exit_new, b_flow);

        let q_new = self.q - a_enter_true - b_enter_true + a_enter_new + b_enter_new;
        plogp(q_new) - plogp(self.q) + new - old
    }

    #[allow(clippy::too_many_arguments)]
    fn apply_move(&mut self, i: u32, a: u32, b: u32, to_a: R, from_a: R, to_b: R, from_b: R) {
        let (a_enter_true, _) = self.true_rates(a);
        let (b_enter_true, _) = self.true_rates(b);

        let (a_enter, a_exit, a_flow, a_tele, a_count) = self.detached_rates(i, a, to_a, from_a);
        let (b_enter, b_exit, b_flow, b_tele, b_count) = self.attached_rates(i, b, to_b, from_b);
        let (a_enter_new, _) = self.true_rates_of(a_enter, a_exit, a_tele, a_count);
        let (b_enter_new, _) = self.true_rates_of(b_enter, b_exit, b_tele, b_count);
        self.q = self.q - a_enter_true - b_enter_true + a_enter_new + b_enter_new;

        let (ai, bi) = (a as usize, b as usize);
        self.module_enter[ai] = a_enter;
        self.module_exit[ai] = a_exit;
        self.module_flow[ai] = a_flow;
        self.module_tele[ai] = a_tele;
        self.module_count[ai] = a_count;
        self.module_enter[bi] = b_enter;
        self.module_exit[bi] = b_exit;
        self.module_flow[bi] = b_flow;
        self.module_tele[bi] = b_tele;
        self.module_count[bi] = b_count;

        if self.module_sizes[bi] == 0 {
            // Re-opened module: drop it from the free list.
            self.empty_modules.retain(|&m| m != b);
        }
        self.module_sizes[ai] -= 1;
        self.module_sizes[bi] += 1;
        if self.module_sizes[ai] == 0 {
            self.empty_modules.push(a);
        }
        self.module[i as usize] = b;
    }

    /// Collapses each occupied module into a super-node; internal arcs
    /// disappear, parallel arcs merge. Returns the new level and the mapping
    /// from old super-node index to new.
    fn aggregate(&self) -> (Level<R>, Vec<u32>) {
        let mut module_to_new: Vec<u32> = vec![u32::MAX; self.len()];
        let mut mapping: Vec<u32> = Vec::with_capacity(self.len());
        let mut next = 0u32;
        for i in 0..self.len() {
            let m = self.module[i] as usize;
            if module_to_new[m] == u32::MAX {
                module_to_new[m] = next;
                next += 1;
            }
            mapping.push(module_to_new[m]);
        }
        let k = next as usize;
        let mut flow = vec![R::zero(); k];
        let mut tele = vec![R::zero(); k];
        let mut count = vec![0usize; k];
        for i in 0..self.len() {
            let m = mapping[i] as usize;
            flow[m] = flow[m] + self.flow[i];
            tele[m] = tele[m] + self.tele[i];
            count[m] += self.count[i];
        }
        let mut merged: BTreeMap<(u32, u32), R> = BTreeMap::new();
        for (i, arcs) in self.out_arcs.iter().enumerate() {
            let a = mapping[i];
            for &(j, fl) in arcs {
                let b = mapping[j as usize];
                if a != b {
                    let slot = merged.entry((a, b)).or_insert_with(R::zero);
                    *slot = *slot + fl;
                }
            }
        }
        let mut out_arcs: Vec<Vec<(u32, R)>> = vec![Vec::new(); k];
        for (&(a, b), &fl) in &merged {
            out_arcs[a as usize].push((b, fl));
        }
        (Level::assemble(out_arcs, flow, tele, count, self.n_total, self.tele_total), mapping)
    }
}

/// Perplexity of the relative leaf-module sizes: the effective number of
/// modules, between 1 and the actual module count.
pub fn effective_num_modules(m: &Partition) -> f64 {
    let n = m.node_count() as f64;
    let entropy: f64 = m
        .leaf_sizes()
        .iter()
        .map(|&s| {
            let share = s as f64 / n;
            -share * share.log2()
        })
        .sum();
    entropy.exp2()
}

/// Fraction of links whose endpoints lie in different leaf modules
/// (unweighted count).
pub fn mixing<R: Real>(g: &Graph<R>, m: &Partition) -> Result<f64> {
    if g.node_count() != m.node_count() {
        return Err(Error::Invalid(format!(
            "partition covers {} nodes but the graph has {}",
            m.node_count(),
            g.node_count()
        )));
    }
    if g.link_count() == 0 {
        return Err(Error::Degenerate("mixing requires at least one link".into()));
    }
    let leaf = m.leaf_assignments();
    let cut = g
        .links()
        .iter()
        .filter(|&&(u, v, _)| leaf[u as usize] != leaf[v as usize])
        .count();
    Ok(cut as f64 / g.link_count() as f64)
}

/// Newman–Girvan modularity of the leaf clustering, on unweighted link
/// counts. Undirected: `Σ_m [e_m/L − (d_m/2L)²]`; directed:
/// `Σ_m [e_m/L − d_m^in·d_m^out/L²]`.
pub fn modularity<R: Real>(g: &Graph<R>, m: &Partition) -> Result<f64> {
    if g.node_count() != m.node_count() {
        return Err(Error::Invalid(format!(
            "partition covers {} nodes but the graph has {}",
            m.node_count(),
            g.node_count()
        )));
    }
    if g.link_count() == 0 {
        return Err(Error::Degenerate("modularity requires at least one link".into()));
    }
    let leaf = m.leaf_assignments();
    let k = m.leaf_count();
    let total = g.link_count() as f64;
    let mut internal = vec![0usize; k];
    if g.is_directed() {
        let mut din = vec![0usize; k];
        let mut dout = vec![0usize; k];
        for &(u, v, _) in g.links() {
            let (mu, mv) = (leaf[u as usize] as usize, leaf[v as usize] as usize);
            dout[mu] += 1;
            din[mv] += 1;
            if mu == mv {
                internal[mu] += 1;
            }
        }
        Ok((0..k)
            .map(|m| internal[m] as f64 / total - (din[m] * dout[m]) as f64 / (total * total))
            .sum())
    } else {
        let mut degree = vec![0usize; k];
        for &(u, v, _) in g.links() {
            let (mu, mv) = (leaf[u as usize] as usize, leaf[v as usize] as usize);
            degree[mu] += 1;
            degree[mv] += 1;
            if mu == mv {
                internal[mu] += 1;
            }
        }
        Ok((0..k)
            .map(|m| {
                let share = degree[m] as f64 / (2.0 * total);
                internal[m] as f64 / total - share * share
            })
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{visit_rates_node_teleport, visit_rates_undirected};

    fn toy8() -> Graph {
        let edges = [
            (0u32, 1u32, 1.0),
            (0, 2, 1.0),
            (0, 3, 1.0),
            (1, 3, 1.0),
            (2, 3, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (4, 6, 1.0),
            (5, 6, 1.0),
            (4, 7, 1.0),
        ];
        Graph::from_numbered_edges(8, false, &edges).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    /// Recomputes module state from scratch and compares against the
    /// incrementally maintained values.
    fn assert_level_consistent(level: &Level<f64>) {
        let n = level.len();
        let mut enter = vec![0.0; n];
        let mut exit = vec![0.0; n];
        let mut flow = vec![0.0; n];
        let mut tele = vec![0.0; n];
        let mut count = vec![0usize; n];
        let mut sizes = vec![0u32; n];
        for i in 0..n {
            let m = level.module[i] as usize;
            flow[m] += level.flow[i];
            tele[m] += level.tele[i];
            count[m] += level.count[i];
            sizes[m] += 1;
            for &(j, fl) in &level.out_arcs[i] {
                let mj = level.module[j as usize] as usize;
                if mj != m {
                    exit[m] += fl;
                    enter[mj] += fl;
                }
            }
        }
        let mut q = 0.0;
        for m in 0..n {
            assert_close(level.module_enter[m], enter[m], 1e-9);
            assert_close(level.module_exit[m], exit[m], 1e-9);
            assert_close(level.module_flow[m], flow[m], 1e-9);
            assert_close(level.module_tele[m], tele[m], 1e-9);
            assert_eq!(level.module_count[m], count[m]);
            assert_eq!(level.module_sizes[m], sizes[m]);
            q += level.true_rates_of(enter[m], exit[m], tele[m], count[m]).0;
        }
        assert_close(level.q, q, 1e-9);
    }

    #[test]
    fn incremental_moves_match_recomputation() {
        // Teleportation exercises the background bookkeeping in the deltas.
        let g = toy8();
        let f = visit_rates_node_teleport(&g, 0.15, 1e-12, 10_000).unwrap();
        let mut level = Level::from_flow_field(&f);
        let mut scratch = Scratch::new(level.len());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let mut order: Vec<u32> = (0..level.len() as u32).collect();
            order.shuffle(&mut rng);
            level.sweep(&order, &mut scratch);
            assert_level_consistent(&level);
        }
    }

    #[test]
    fn move_deltas_match_full_objective_difference() {
        let g = toy8();
        let f = visit_rates_node_teleport(&g, 0.2, 1e-12, 10_000).unwrap();
        let mut level = Level::from_flow_field(&f);
        let mut scratch = Scratch::new(level.len());
        // Walk nodes in order; verify each accepted move changes the full
        // objective by exactly the bits the sweep reports.
        for i in 0..level.len() as u32 {
            let before = level.variable_bits();
            let saved = level.try_best_move(i, &mut scratch);
            let after = level.variable_bits();
            assert_close(before - after, saved, 1e-12);
        }
    }

    #[test]
    fn optimizer_recovers_the_planted_toy_partition() {
        let g = toy8();
        let f = visit_rates_undirected(&g).unwrap();
        let (m, bits) = optimize_two_level(&g, &f, &SearchConfig::with_runs(10, 0)).unwrap();
        assert_eq!(m.leaf_assignments(), vec![0, 0, 0, 0, 1, 1, 1, 1]);
        assert_close(bits, 2.474197172768201, 1e-12);
    }

    #[test]
    fn optimizer_merges_a_single_clique() {
        let mut edges = Vec::new();
        for a in 0..5u32 {
            for b in (a + 1)..5 {
                edges.push((a, b, 1.0));
            }
        }
        let g: Graph = Graph::from_numbered_edges(5, false, &edges).unwrap();
        let f = visit_rates_undirected(&g).unwrap();
        let (m, bits) = optimize_two_level(&g, &f, &SearchConfig::with_runs(10, 1)).unwrap();
        assert_eq!(m.leaf_count(), 1);
        assert_close(bits, codelength_one_level(&f), 1e-12);
    }

    #[test]
    fn optimizer_splits_bridged_cliques() {
        let mut edges = Vec::new();
        for base in [0u32, 4u32] {
            for a in 0..4u32 {
                for b in (a + 1)..4 {
                    edges.push((base + a, base + b, 1.0));
                }
            }
        }
        edges.push((3, 4, 1.0));
        let g: Graph = Graph::from_numbered_edges(8, false, &edges).unwrap();
        let f = visit_rates_undirected(&g).unwrap();
        let (m, _) = optimize_two_level(&g, &f, &SearchConfig::with_runs(10, 0)).unwrap();
        assert_eq!(m.leaf_assignments(), vec![0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn optimizer_is_deterministic_for_a_fixed_seed() {
        let g = toy8();
        let f = visit_rates_node_teleport(&g, 0.15, 1e-12, 10_000).unwrap();
        let cfg = SearchConfig::with_runs(4, 42);
        let (m1, b1) = optimize_two_level(&g, &f, &cfg).unwrap();
        let (m2, b2) = optimize_two_level(&g, &f, &cfg).unwrap();
        assert_eq!(m1.leaf_assignments(), m2.leaf_assignments());
        assert_eq!(b1.to_bits(), b2.to_bits());
    }

    #[test]
    fn optimizer_never_beats_one_level_on_the_wrong_side() {
        // A path graph where any split competes closely with one module.
        let g: Graph =
            Graph::from_numbered_edges(4, false, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let f = visit_rates_undirected(&g).unwrap();
        let (_, bits) = optimize_two_level(&g, &f, &SearchConfig::with_runs(5, 3)).unwrap();
        assert!(bits <= codelength_one_level(&f) + 1e-12);
    }

    #[test]
    fn zero_rate_nodes_stay_in_singleton_modules() {
        // Node 4 is isolated: zero strength, zero visit rate under raw flow.
        let g: Graph = Graph::from_numbered_edges(
            5,
            false,
            &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
        )
        .unwrap();
        let f = visit_rates_undirected(&g).unwrap();
        let (m, _) = optimize_two_level(&g, &f, &SearchConfig::with_runs(5, 0)).unwrap();
        let leaf = m.leaf_assignments();
        assert!(leaf.iter().filter(|&&x| x == leaf[4]).count() == 1);
    }

    #[test]
    fn effective_modules_is_perplexity_of_sizes() {
        assert_close(effective_num_modules(&Partition::two_level(&[0, 0, 0, 0, 1, 1, 1, 1])), 2.0, 1e-12);
        assert_close(
            effective_num_modules(&Partition::two_level(&[0, 0, 0, 1, 1, 1, 1, 1])),
            1.9378192408783848,
            1e-12,
        );
        assert_close(effective_num_modules(&Partition::one_level(5)), 1.0, 1e-12);
    }

    #[test]
    fn mixing_counts_cut_links() {
        let g = toy8();
        assert_close(mixing(&g, &Partition::two_level(&[0, 0, 0, 0, 1, 1, 1, 1])).unwrap(), 0.1, 1e-12);
        assert_close(mixing(&g, &Partition::one_level(8)).unwrap(), 0.0, 1e-12);
        assert_close(
            mixing(&g, &Partition::two_level(&[0, 1, 2, 3, 4, 5, 6, 7])).unwrap(),
            1.0,
            1e-12,
        );
    }

    #[test]
    fn modularity_matches_direct_evaluation() {
        let g = toy8();
        let q = modularity(&g, &Partition::two_level(&[0, 0, 0, 0, 1, 1, 1, 1])).unwrap();
        assert_close(q, 0.395, 1e-12);
        assert_close(modularity(&g, &Partition::one_level(8)).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn modularity_of_singletons_on_a_triangle() {
        let g: Graph =
            Graph::from_numbered_edges(3, false, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let q = modularity(&g, &Partition::two_level(&[0, 1, 2])).unwrap();
        assert_close(q, -1.0 / 3.0, 1e-12);
    }

    #[test]
    fn directed_modularity_uses_in_and_out_degrees() {
        let g: Graph = Graph::from_numbered_edges(2, true, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_close(modularity(&g, &Partition::two_level(&[0, 1])).unwrap(), -0.5, 1e-12);
        assert_close(modularity(&g, &Partition::one_level(2)).unwrap(), 0.0, 1e-12);
    }
}
