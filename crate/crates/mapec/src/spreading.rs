//! Spreading processes and seed-set evaluation: linear threshold cascades,
//! discrete SIR epidemics, the imprecision function, and selection
//! perplexity.
//!
//! Both dynamics treat links as unweighted contacts. All randomness flows
//! through per-(node, repetition) seeded streams, so results are bit-exact
//! across runs and independent of how work is distributed over threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::num::{derive_seed, Real};
use crate::partition::Partition;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which links carry influence in a directed linear threshold cascade.
/// Undirected graphs ignore the distinction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LtDirection {
    /// A node watches its in-neighbors: influence flows along links.
    #[default]
    Incoming,
    /// A node watches its out-neighbors.
    Outgoing,
}

/// Final state of a linear threshold cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadOutcome {
    /// Final fraction of active nodes.
    pub activation_size: f64,
    /// Final number of active nodes.
    pub active_count: usize,
    /// Synchronous update rounds that activated at least one node.
    pub rounds: usize,
}

/// Synchronous linear threshold cascade with a uniform threshold.
///
/// Starting from the seed set, every round activates each inactive node
/// whose fraction of active (in-)neighbors is at least `t`; updates apply
/// simultaneously. Nodes without neighbors never activate (unless seeded).
/// The cascade reaches its fixed point in at most `n` rounds and is fully
/// deterministic.
pub fn linear_threshold<R: Real>(
    g: &Graph<R>,
    seeds: &[NodeId],
    t: f64,
) -> Result<SpreadOutcome> {
    linear_threshold_with(g, seeds, t, LtDirection::default())
}

/// Linear threshold cascade with an explicit influence direction.
pub fn linear_threshold_with<R: Real>(
    g: &Graph<R>,
    seeds: &[NodeId],
    t: f64,
    direction: LtDirection,
) -> Result<SpreadOutcome> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Invalid(format!("threshold must lie in (0, 1], found {t}")));
    }
    let n = g.node_count();
    let mut active = vec![false; n];
    for &s in seeds {
        if (s as usize) >= n {
            return Err(Error::Invalid(format!("seed node {s} is not in the graph")));
        }
        active[s as usize] = true;
    }

    let watched: Vec<&[(NodeId, R)]> = (0..n as NodeId)
        .map(|u| match direction {
            LtDirection::Incoming => g.in_neighbors(u),
            LtDirection::Outgoing => g.neighbors(u),
        })
        .collect();

    let mut rounds = 0;
    let mut newly: Vec<NodeId> = Vec::new();
    loop {
        newly.clear();
        for u in 0..n as NodeId {
            if active[u as usize] || watched[u as usize].is_empty() {
                continue;
            }
            let total = watched[u as usize].len();
            let on = watched[u as usize].iter().filter(|&&(v, _)| active[v as usize]).count();
            if on as f64 / total as f64 >= t {
                newly.push(u);
            }
        }
        if newly.is_empty() {
            break;
        }
        rounds += 1;
        for &u in &newly {
            active[u as usize] = true;
        }
    }

    let active_count = active.iter().filter(|&&a| a).count();
    Ok(SpreadOutcome {
        activation_size: if n == 0 { 0.0 } else { active_count as f64 / n as f64 },
        active_count,
        rounds,
    })
}

/// Monte Carlo settings for SIR spreading power.
#[derive(Debug, Clone)]
pub struct SirConfig {
    /// Per-contact infection probability.
    pub p: f64,
    /// Simulation repetitions per seed node.
    pub repetitions: usize,
    /// Base RNG seed; every (node, repetition) derives its own stream.
    pub seed: u64,
}

impl SirConfig {
    pub fn new(p: f64, repetitions: usize, seed: u64) -> Result<SirConfig> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Invalid(format!(
                "infection probability must lie in [0, 1], found {p}"
            )));
        }
        if repetitions == 0 {
            return Err(Error::Invalid("SIR needs at least one repetition".into()));
        }
        Ok(SirConfig { p, repetitions, seed })
    }
}

/// Expected number of recovered nodes (including the seed) when `u` starts a
/// discrete-time SIR epidemic: each infected node infects every susceptible
/// (out-)neighbor independently with probability `p`, then recovers for
/// good after exactly one step.
pub fn sir_spreading_power<R: Real>(g: &Graph<R>, u: NodeId, cfg: &SirConfig) -> Result<f64> {
    if (u as usize) >= g.node_count() {
        return Err(Error::Invalid(format!("seed node {u} is not in the graph")));
    }
    SirConfig::new(cfg.p, cfg.repetitions, cfg.seed)?;
    let mut stamp = vec![0u64; g.node_count()];
    let mut total = 0.0;
    for rep in 0..cfg.repetitions {
        total += sir_once(g, u, cfg, rep as u64, &mut stamp) as f64;
    }
    Ok(total / cfg.repetitions as f64)
}

/// SIR spreading power for every node, parallelized over seed nodes with
/// deterministic per-(node, repetition) RNG streams.
pub fn sir_spreading_powers<R: Real>(g: &Graph<R>, cfg: &SirConfig) -> Result<Vec<f64>> {
    SirConfig::new(cfg.p, cfg.repetitions, cfg.seed)?;
    (0..g.node_count() as NodeId)
        .into_par_iter()
        .map(|u| sir_spreading_power(g, u, cfg))
        .collect()
}

/// One epidemic; epoch stamps avoid reallocating per-repetition state.
/// Infection draws happen only against currently susceptible targets, in
/// frontier insertion order, so the stream usage is reproducible.
fn sir_once<R: Real>(
    g: &Graph<R>,
    seed_node: NodeId,
    cfg: &SirConfig,
    rep: u64,
    stamp: &mut [u64],
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, seed_node as u64, rep));
    // Stamps start at 0, so epoch rep+1 is fresh for every repetition;
    // "touched" means infected or recovered.
    let epoch = rep + 1;
    let touched = |stamp: &[u64], v: NodeId| stamp[v as usize] == epoch;

    let mut frontier = vec![seed_node];
    stamp[seed_node as usize] = epoch;
    let mut recovered = 0usize;
    let mut next: Vec<NodeId> = Vec::new();
    while !frontier.is_empty() {
        next.clear();
        for &v in &frontier {
            for &(w, _) in g.neighbors(v) {
                if touched(stamp, w) {
                    continue;
                }
                if cfg.p >= 1.0 || (cfg.p > 0.0 && rng.gen_bool(cfg.p)) {
                    stamp[w as usize] = epoch;
                    next.push(w);
                }
            }
        }
        // Recovery takes exactly one step: this round's infected are done.
        recovered += frontier.len();
        std::mem::swap(&mut frontier, &mut next);
    }
    recovered
}

/// Imprecision of a ranking against true spreading power at fraction `x`:
/// `1 − M_c(x) / M_SIR(x)`, comparing the mean power of the ranking's
/// top-⌈x·n⌉ nodes against the best-possible mean. Reported unclamped, so
/// power ties can push it slightly below zero.
pub fn imprecision(ranked: &[NodeId], power: &[f64], x: f64) -> Result<f64> {
    let n = power.len();
    if ranked.len() != n {
        return Err(Error::Invalid(format!(
            "ranking covers {} nodes but powers cover {n}",
            ranked.len()
        )));
    }
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Invalid(format!("fraction must lie in (0, 1], found {x}")));
    }
    let k = (x * n as f64).ceil() as usize;
    if k == 0 {
        return Err(Error::Invalid(format!("fraction {x} selects no nodes out of {n}")));
    }
    let by_ranking: f64 =
        ranked[..k].iter().map(|&u| power[u as usize]).sum::<f64>() / k as f64;
    let mut best: Vec<NodeId> = (0..n as NodeId).collect();
    best.sort_by(|&a, &b| {
        power[b as usize]
            .partial_cmp(&power[a as usize])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let by_power: f64 = best[..k].iter().map(|&u| power[u as usize]).sum::<f64>() / k as f64;
    if by_power == 0.0 {
        return Err(Error::Degenerate("top spreading powers are all zero".into()));
    }
    Ok(1.0 - by_ranking / by_power)
}

/// Perplexity of the selected nodes' spread over leaf modules:
/// `2^H(|m∩S|/|S|)`. 1 when all selected nodes share a module; the module
/// count when they spread evenly.
pub fn selection_perplexity(m: &Partition, selected: &[NodeId]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::Invalid("perplexity of an empty selection".into()));
    }
    let mut counts = vec![0usize; m.leaf_count()];
    let mut seen = vec![false; m.node_count()];
    for &u in selected {
        if (u as usize) >= m.node_count() {
            return Err(Error::Invalid(format!("node {u} is not covered by the partition")));
        }
        if seen[u as usize] {
            return Err(Error::Invalid(format!("node {u} listed twice in the selection")));
        }
        seen[u as usize] = true;
        counts[m.leaf_assignments()[u as usize] as usize] += 1;
    }
    let total = selected.len() as f64;
    let entropy: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let share = c as f64 / total;
            -share * share.log2()
        })
        .sum();
    Ok(entropy.exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn threshold_cascade_saturates_from_the_two_hubs() {
        let out = linear_threshold(&toy8(), &[3, 4], 0.5).unwrap();
        assert_close(out.activation_size, 1.0, 1e-15);
        assert_eq!(out.rounds, 2);
    }

    #[test]
    fn threshold_cascade_stalls_at_a_higher_threshold() {
        // At t = 0.6 only the leaf node follows the hubs: 3 of 8 active.
        let out = linear_threshold(&toy8(), &[3, 4], 0.6).unwrap();
        assert_close(out.activation_size, 0.375, 1e-15);
        assert_eq!(out.active_count, 3);
        assert_eq!(out.rounds, 1);
    }

    #[test]
    fn threshold_cascade_trivial_seed_sets() {
        let out = linear_threshold(&toy8(), &[], 0.5).unwrap();
        assert_close(out.activation_size, 0.0, 1e-15);
        assert_eq!(out.rounds, 0);
        let all: Vec<NodeId> = (0..8).collect();
        let out = linear_threshold(&toy8(), &all, 0.5).unwrap();
        assert_close(out.activation_size, 1.0, 1e-15);
        assert_eq!(out.rounds, 0);
    }

    #[test]
    fn threshold_cascade_is_monotone_in_the_seed_set() {
        let small = linear_threshold(&toy8(), &[3], 0.5).unwrap();
        let large = linear_threshold(&toy8(), &[3, 4], 0.5).unwrap();
        assert!(large.active_count >= small.active_count);
    }

    #[test]
    fn isolated_nodes_never_activate_but_count_as_seeds() {
        let g: Graph = Graph::from_numbered_edges(3, false, &[(0, 1, 1.0)]).unwrap();
        let out = linear_threshold(&g, &[0], 0.5).unwrap();
        assert_eq!(out.active_count, 2); // node 2 has no neighbors
        let seeded = linear_threshold(&g, &[2], 0.5).unwrap();
        assert_eq!(seeded.active_count, 1);
    }

    #[test]
    fn directed_cascade_follows_link_direction_by_default() {
        // 0 -> 1 -> 2: influence flows downstream from the seed.
        let g: Graph =
            Graph::from_numbered_edges(3, true, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let down = linear_threshold(&g, &[0], 0.5).unwrap();
        assert_eq!(down.active_count, 3);
        let up = linear_threshold(&g, &[2], 0.5).unwrap();
        assert_eq!(up.active_count, 1);
        let reversed = linear_threshold_with(&g, &[2], 0.5, LtDirection::Outgoing).unwrap();
        assert_eq!(reversed.active_count, 3);
    }

    #[test]
    fn threshold_cascade_rejects_bad_input() {
        assert!(linear_threshold(&toy8(), &[0], 0.0).is_err());
        assert!(linear_threshold(&toy8(), &[0], 1.5).is_err());
        assert!(linear_threshold(&toy8(), &[99], 0.5).is_err());
    }

    #[test]
    fn sir_extreme_probabilities_are_exact() {
        let g = toy8();
        let cfg = SirConfig::new(0.0, 50, 7).unwrap();
        assert_close(sir_spreading_power(&g, 3, &cfg).unwrap(), 1.0, 1e-15);
        let cfg = SirConfig::new(1.0, 50, 7).unwrap();
        for u in 0..8 {
            assert_close(sir_spreading_power(&g, u, &cfg).unwrap(), 8.0, 1e-15);
        }
    }

    #[test]
    fn sir_star_center_matches_binomial_expectation() {
        let star: Graph = Graph::from_numbered_edges(
            5,
            false,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
        )
        .unwrap();
        let cfg = SirConfig::new(0.5, 4000, 20).unwrap();
        let mean = sir_spreading_power(&star, 0, &cfg).unwrap();
        // Analytic: 1 + 4·0.5 = 3; sd of the mean = 1/sqrt(reps).
        let se = 1.0 / (cfg.repetitions as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * se, "{mean} vs 3.0 ± {}", 3.0 * se);
    }

    #[test]
    fn sir_power_grows_with_infection_probability() {
        let g = toy8();
        let mut last = 0.0;
        for p in [0.1, 0.5, 0.9] {
            let cfg = SirConfig::new(p, 600, 5).unwrap();
            let mean = sir_spreading_power(&g, 3, &cfg).unwrap();
            assert!(mean > last, "{mean} at p={p} not above {last}");
            last = mean;
        }
    }

    #[test]
    fn sir_results_are_reproducible() {
        let g = toy8();
        let cfg = SirConfig::new(0.4, 200, 99).unwrap();
        let a = sir_spreading_powers(&g, &cfg).unwrap();
        let b = sir_spreading_powers(&g, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // Per-node calls agree with the batched run.
        for u in 0..8u32 {
            assert_eq!(
                sir_spreading_power(&g, u, &cfg).unwrap().to_bits(),
                a[u as usize].to_bits()
            );
        }
    }

    #[test]
    fn directed_sir_spreads_along_out_links() {
        let g: Graph =
            Graph::from_numbered_edges(3, true, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let cfg = SirConfig::new(1.0, 10, 3).unwrap();
        assert_close(sir_spreading_power(&g, 0, &cfg).unwrap(), 3.0, 1e-15);
        assert_close(sir_spreading_power(&g, 2, &cfg).unwrap(), 1.0, 1e-15);
    }

    #[test]
    fn imprecision_of_the_true_ranking_is_zero() {
        let power = [4.0, 2.0, 3.0, 1.0];
        let ranked = [0u32, 2, 1, 3];
        for x in [0.25, 0.5, 0.75, 1.0] {
            assert_close(imprecision(&ranked, &power, x).unwrap(), 0.0, 1e-15);
        }
    }

    #[test]
    fn imprecision_of_an_inverted_ranking() {
        let power = [1.0, 2.0, 3.0, 4.0];
        let ranked = [0u32, 1, 2, 3]; // worst first
        assert_close(imprecision(&ranked, &power, 0.25).unwrap(), 0.75, 1e-12);
    }

    #[test]
    fn imprecision_with_tied_powers_is_zero() {
        let power = [2.0, 2.0, 2.0, 2.0];
        let ranked = [3u32, 1, 0, 2];
        for x in [0.25, 0.5, 1.0] {
            assert_close(imprecision(&ranked, &power, x).unwrap(), 0.0, 1e-15);
        }
    }

    #[test]
    fn imprecision_rejects_empty_selections() {
        let power = [1.0, 2.0];
        assert!(imprecision(&[0, 1], &power, 0.0).is_err());
        assert!(imprecision(&[0, 1], &power, 1.5).is_err());
        assert!(imprecision(&[0], &power, 0.5).is_err());
    }

    #[test]
    fn perplexity_counts_effective_modules_of_a_selection() {
        let m = Partition::two_level(&[0, 0, 1, 1, 2, 2, 3, 3]);
        assert_close(selection_perplexity(&m, &[0, 1]).unwrap(), 1.0, 1e-12);
        assert_close(
            selection_perplexity(&m, &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap(),
            4.0,
            1e-12,
        );
        let m2 = Partition::two_level(&[0, 0, 0, 1, 1, 1, 1, 1]);
        assert_close(
            selection_perplexity(&m2, &[0, 1, 2, 3]).unwrap(),
            1.7547653506033232,
            1e-9,
        );
    }

    #[test]
    fn perplexity_rejects_bad_selections() {
        let m = Partition::two_level(&[0, 1]);
        assert!(selection_perplexity(&m, &[]).is_err());
        assert!(selection_perplexity(&m, &[0, 0]).is_err());
        assert!(selection_perplexity(&m, &[5]).is_err());
    }
}
