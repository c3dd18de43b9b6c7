//! Comparison centralities: degree, betweenness, PageRank, and the
//! community-aware measures modularity vitality, community hub-bridge, and
//! community-based centrality.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{visit_rates_node_teleport, FlowModel, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use crate::graph::{Graph, NodeId};
use crate::mapeq::{CentralityVector, Method};
use crate::num::{real, real_of_usize, Real};
use crate::partition::Partition;

/// Sources per parallel work unit in betweenness accumulation; fixed so the
/// floating-point summation order is independent of the thread count.
const BETWEENNESS_CHUNK: usize = 128;

/// Degree centrality: degree divided by `n − 1`; total (in plus out) degree
/// in directed graphs.
pub fn degree_centrality<R: Real>(g: &Graph<R>) -> Result<CentralityVector<R>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Invalid("degree centrality needs at least two nodes".into()));
    }
    let denom = real_of_usize::<R>(n - 1);
    let scores =
        (0..n as NodeId).map(|u| real_of_usize::<R>(g.degree(u)) / denom).collect();
    Ok(CentralityVector::new(Method::Degree, scores))
}

/// Betweenness centrality on unweighted shortest paths, normalized by the
/// number of node pairs excluding the endpoint: `(n−1)(n−2)/2` undirected,
/// `(n−1)(n−2)` directed. Graphs with fewer than three nodes score zero.
pub fn betweenness_centrality<R: Real>(g: &Graph<R>) -> CentralityVector<R> {
    let n = g.node_count();
    if n < 3 {
        return CentralityVector::new(Method::Betweenness, vec![R::zero(); n]);
    }
    let forward: Vec<Vec<u32>> = (0..n as NodeId)
        .map(|u| g.neighbors(u).iter().map(|&(v, _)| v).collect())
        .collect();
    // Dependency accumulation walks shortest paths backwards, which needs
    // in-neighbors; undirected adjacency is its own reverse.
    let backward: Option<Vec<Vec<u32>>> = g.is_directed().then(|| {
        (0..n as NodeId).map(|u| g.in_neighbors(u).iter().map(|&(v, _)| v).collect()).collect()
    });
    let backward = backward.as_deref().unwrap_or(&forward);

    let sources: Vec<u32> = (0..n as u32).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(BETWEENNESS_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0f64; n];
            let mut sigma = vec![0.0f64; n];
            let mut dist = vec![-1i64; n];
            let mut delta = vec![0.0f64; n];
            let mut order: Vec<u32> = Vec::with_capacity(n);
            for &s in chunk {
                brandes_accumulate(
                    &forward, backward, s, &mut acc, &mut sigma, &mut dist, &mut delta,
                    &mut order,
                );
            }
            acc
        })
        .collect();
    let mut raw = vec![0.0f64; n];
    for partial in partials {
        for (slot, value) in raw.iter_mut().zip(partial) {
            *slot += value;
        }
    }

    // Directed: divide by (n−1)(n−2) pairs. Undirected: the accumulation
    // counts each pair from both endpoints, so doubling cancels against the
    // (n−1)(n−2)/2 normalization and the same scale applies.
    let scale = 1.0 / (((n - 1) * (n - 2)) as f64);
    let scores = raw.iter().map(|&b| real::<R>(b * scale)).collect();
    CentralityVector::new(Method::Betweenness, scores)
}

/// Single-source Brandes pass: BFS by distance, then dependency accumulation
/// in reverse visit order.
#[allow(clippy::too_many_arguments)]
fn brandes_accumulate(
    forward: &[Vec<u32>],
    backward: &[Vec<u32>],
    s: u32,
    acc: &mut [f64],
    sigma: &mut [f64],
    dist: &mut [i64],
    delta: &mut [f64],
    order: &mut Vec<u32>,
) {
    sigma.iter_mut().for_each(|x| *x = 0.0);
    dist.iter_mut().for_each(|x| *x = -1);
    delta.iter_mut().for_each(|x| *x = 0.0);
    order.clear();

    sigma[s as usize] = 1.0;
    dist[s as usize] = 0;
    let mut head = 0;
    order.push(s);
    while head < order.len() {
        let v = order[head];
        head += 1;
        let dv = dist[v as usize];
        for &w in &forward[v as usize] {
            if dist[w as usize] < 0 {
                dist[w as usize] = dv + 1;
                order.push(w);
            }
            if dist[w as usize] == dv + 1 {
                sigma[w as usize] += sigma[v as usize];
            }
        }
    }
    for &w in order.iter().rev() {
        for &v in &backward[w as usize] {
            if dist[v as usize] + 1 == dist[w as usize] {
                // v precedes w on shortest paths; credit flows backwards.
                delta[v as usize] += sigma[v as usize] / sigma[w as usize] * (1.0 + delta[w as usize]);
            }
        }
        if w != s {
            acc[w as usize] += delta[w as usize];
        }
    }
}

/// PageRank scores: the node-teleportation visit rates under rate `tau`.
pub fn pagerank<R: Real>(g: &Graph<R>, tau: f64) -> Result<CentralityVector<R>> {
    let f = visit_rates_node_teleport(g, tau, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)?;
    Ok(CentralityVector::new(Method::PageRank, f.visit_rates().to_vec())
        .with_model(FlowModel::NodeTeleport { rate: tau }))
}

/// Modularity vitality: |Q(G, M) − Q(G−u, M−u)| per node, where removing `u`
/// deletes its incident links and drops it from its module. Unweighted link
/// counts; when removal leaves no links the after-removal modularity is 0.
pub fn modularity_vitality<R: Real>(g: &Graph<R>, m: &Partition) -> Result<CentralityVector<R>> {
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
    let n = g.node_count();
    let leaf = m.leaf_assignments();
    let k = m.leaf_count();
    let total = g.link_count() as f64;

    let scores: Vec<R> = if g.is_directed() {
        let mut internal = vec![0i64; k];
        let mut din = vec![0i64; k];
        let mut dout = vec![0i64; k];
        for &(u, v, _) in g.links() {
            let (mu, mv) = (leaf[u as usize] as usize, leaf[v as usize] as usize);
            dout[mu] += 1;
            din[mv] += 1;
            if mu == mv {
                internal[mu] += 1;
            }
        }
        let q_before = (0..k)
            .map(|m| internal[m] as f64 / total - (din[m] * dout[m]) as f64 / (total * total))
            .sum::<f64>();
        (0..n as NodeId)
            .map(|u| {
                let a = leaf[u as usize] as usize;
                // Per-module counts of u's out- and in-links.
                let mut out_map = std::collections::HashMap::new();
                let mut in_map = std::collections::HashMap::new();
                for &(v, _) in g.neighbors(u) {
                    *out_map.entry(leaf[v as usize] as usize).or_insert(0i64) += 1;
                }
                for &(v, _) in g.in_neighbors(u) {
                    *in_map.entry(leaf[v as usize] as usize).or_insert(0i64) += 1;
                }
                let kout: i64 = out_map.values().sum();
                let kin: i64 = in_map.values().sum();
                let links_after = total - (kout + kin) as f64;
                if links_after == 0.0 {
                    return real::<R>(q_before.abs());
                }
                let mut q_after = 0.0;
                for mm in 0..k {
                    let e = if mm == a {
                        internal[mm]
                            - out_map.get(&mm).copied().unwrap_or(0)
                            - in_map.get(&mm).copied().unwrap_or(0)
                    } else {
                        internal[mm]
                    };
                    let mut o = dout[mm] - in_map.get(&mm).copied().unwrap_or(0);
                    let mut i = din[mm] - out_map.get(&mm).copied().unwrap_or(0);
                    if mm == a {
                        o -= kout;
                        i -= kin;
                    }
                    q_after +=
                        e as f64 / links_after - (i * o) as f64 / (links_after * links_after);
                }
                real::<R>((q_before - q_after).abs())
            })
            .collect()
    } else {
        let mut internal = vec![0i64; k];
        let mut degree = vec![0i64; k];
        for &(u, v, _) in g.links() {
            let (mu, mv) = (leaf[u as usize] as usize, leaf[v as usize] as usize);
            degree[mu] += 1;
            degree[mv] += 1;
            if mu == mv {
                internal[mu] += 1;
            }
        }
        let q_before = (0..k)
            .map(|m| {
                let share = degree[m] as f64 / (2.0 * total);
                internal[m] as f64 / total - share * share
            })
            .sum::<f64>();
        (0..n as NodeId)
            .map(|u| {
                let a = leaf[u as usize] as usize;
                let mut to_module = std::collections::HashMap::new();
                for &(v, _) in g.neighbors(u) {
                    *to_module.entry(leaf[v as usize] as usize).or_insert(0i64) += 1;
                }
                let ku: i64 = to_module.values().sum();
                let links_after = total - ku as f64;
                if links_after == 0.0 {
                    return real::<R>(q_before.abs());
                }
                let mut q_after = 0.0;
                for mm in 0..k {
                    let k_into = to_module.get(&mm).copied().unwrap_or(0);
                    let e = if mm == a { internal[mm] - k_into } else { internal[mm] };
                    let mut d = degree[mm] - k_into;
                    if mm == a {
                        d -= ku;
                    }
                    let share = d as f64 / (2.0 * links_after);
                    q_after += e as f64 / links_after - share * share;
                }
                real::<R>((q_before - q_after).abs())
            })
            .collect()
    };
    Ok(CentralityVector::new(Method::ModularityVitality, scores))
}

/// Neighbor counts per module, plus derived quantities used by the
/// community-aware baselines. Directed graphs count out-neighbors.
#[derive(Debug, Clone)]
pub struct ModuleLinkProfile {
    /// Per node: (leaf module, neighbor count) pairs, sorted by module.
    counts: Vec<Vec<(u32, u32)>>,
    own_module: Vec<u32>,
    module_sizes: Vec<u32>,
}

impl ModuleLinkProfile {
    pub fn build<R: Real>(g: &Graph<R>, m: &Partition) -> Result<ModuleLinkProfile> {
        if g.node_count() != m.node_count() {
            return Err(Error::Invalid(format!(
                "partition covers {} nodes but the graph has {}",
                m.node_count(),
                g.node_count()
            )));
        }
        let leaf = m.leaf_assignments();
        let counts = (0..g.node_count() as NodeId)
            .map(|u| {
                let mut per_module: Vec<(u32, u32)> = Vec::new();
                for &(v, _) in g.neighbors(u) {
                    let module = leaf[v as usize];
                    match per_module.binary_search_by_key(&module, |&(m, _)| m) {
                        Ok(i) => per_module[i].1 += 1,
                        Err(i) => per_module.insert(i, (module, 1)),
                    }
                }
                per_module
            })
            .collect();
        let mut module_sizes = vec![0u32; m.leaf_count()];
        for &module in leaf {
            module_sizes[module as usize] += 1;
        }
        Ok(ModuleLinkProfile { counts, own_module: leaf.to_vec(), module_sizes })
    }

    /// `k_u^m`: number of `u`'s (out-)neighbors in module `m`.
    pub fn neighbor_count(&self, u: NodeId, module: u32) -> usize {
        self.counts[u as usize]
            .binary_search_by_key(&module, |&(m, _)| m)
            .map(|i| self.counts[u as usize][i].1 as usize)
            .unwrap_or(0)
    }

    /// Number of distinct modules other than `u`'s own with ≥ 1 neighbor.
    pub fn neighboring_communities(&self, u: NodeId) -> usize {
        let own = self.own_module[u as usize];
        self.counts[u as usize].iter().filter(|&&(m, _)| m != own).count()
    }

    /// `k_u` restricted to neighbors outside `u`'s own module.
    pub fn outside_degree(&self, u: NodeId) -> usize {
        let own = self.own_module[u as usize];
        self.counts[u as usize]
            .iter()
            .filter(|&&(m, _)| m != own)
            .map(|&(_, c)| c as usize)
            .sum()
    }

    pub fn own_module(&self, u: NodeId) -> u32 {
        self.own_module[u as usize]
    }

    pub fn module_size(&self, module: u32) -> usize {
        self.module_sizes[module as usize] as usize
    }
}

/// Which intra-community term community hub-bridge uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HubBridgeVariant {
    /// `|m_u| · k_u^{m_u}`: own-module size times intra-module degree.
    #[default]
    OwnModule,
    /// `Σ_m |m| · k_u^m`: every module's size times the neighbor count
    /// there, which counts inter-community links a second time.
    LiteralSum,
}

/// Community hub-bridge: hub strength inside the own module plus bridging
/// across neighboring modules,
/// `|m_u| · k_u^{m_u} + NNC_u · k_u^{outside}` under the default variant.
pub fn community_hub_bridge<R: Real>(
    g: &Graph<R>,
    m: &Partition,
    variant: HubBridgeVariant,
) -> Result<CentralityVector<R>> {
    let profile = ModuleLinkProfile::build(g, m)?;
    let scores = (0..g.node_count() as NodeId)
        .map(|u| {
            let own = profile.own_module(u);
            let hub = match variant {
                HubBridgeVariant::OwnModule => {
                    profile.module_size(own) * profile.neighbor_count(u, own)
                }
                HubBridgeVariant::LiteralSum => profile.counts[u as usize]
                    .iter()
                    .map(|&(m, c)| profile.module_size(m) * c as usize)
                    .sum(),
            };
            let bridge = profile.neighboring_communities(u) * profile.outside_degree(u);
            real_of_usize::<R>(hub + bridge)
        })
        .collect();
    Ok(CentralityVector::new(Method::CommunityHubBridge, scores))
}

/// Community-based centrality: neighbor counts weighted by relative module
/// sizes, `Σ_m k_u^m · |m| / n`.
pub fn community_based_centrality<R: Real>(
    g: &Graph<R>,
    m: &Partition,
) -> Result<CentralityVector<R>> {
    let profile = ModuleLinkProfile::build(g, m)?;
    let n = real_of_usize::<R>(g.node_count());
    let scores = (0..g.node_count() as NodeId)
        .map(|u| {
            profile.counts[u as usize]
                .iter()
                .map(|&(m, c)| {
                    real_of_usize::<R>(c as usize) * real_of_usize::<R>(profile.module_size(m))
                })
                .sum::<R>()
                / n
        })
        .collect();
    Ok(CentralityVector::new(Method::CommunityBasedCentrality, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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

    const M_OPT: [u32; 8] = [0, 0, 0, 0, 1, 1, 1, 1];

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn degree_centrality_uses_n_minus_one() {
        let dc = degree_centrality(&toy8()).unwrap();
        let expected = [3.0, 2.0, 2.0, 4.0, 4.0, 2.0, 2.0, 1.0];
        for (u, &k) in expected.iter().enumerate() {
            assert_close(dc.score(u as NodeId), k / 7.0, 1e-12);
        }
    }

    #[test]
    fn degree_centrality_of_isolated_node_is_zero() {
        let g: Graph = Graph::from_numbered_edges(3, false, &[(0, 1, 1.0)]).unwrap();
        assert_close(degree_centrality(&g).unwrap().score(2), 0.0, 1e-15);
    }

    #[test]
    fn betweenness_matches_direct_path_counting() {
        let bc = betweenness_centrality(&toy8());
        let expected = [0.5, 0.0, 0.0, 12.5, 14.0, 0.0, 0.0, 0.0];
        for (u, &raw) in expected.iter().enumerate() {
            assert_close(bc.score(u as NodeId), raw / 21.0, 1e-12);
        }
    }

    #[test]
    fn betweenness_extremes_on_path_and_star() {
        let path: Graph =
            Graph::from_numbered_edges(3, false, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let bc = betweenness_centrality(&path);
        assert_close(bc.score(0), 0.0, 1e-15);
        assert_close(bc.score(1), 1.0, 1e-12);
        let star: Graph = Graph::from_numbered_edges(
            5,
            false,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
        )
        .unwrap();
        assert_close(betweenness_centrality(&star).score(0), 1.0, 1e-12);
    }

    #[test]
    fn directed_betweenness_normalizes_without_halving() {
        let g: Graph =
            Graph::from_numbered_edges(3, true, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let bc = betweenness_centrality(&g);
        // Only the pair (0, 2) routes through node 1; 1 of (n−1)(n−2) = 2.
        assert_close(bc.score(1), 0.5, 1e-12);
        assert_close(bc.score(0), 0.0, 1e-15);
    }

    #[test]
    fn pagerank_without_teleportation_matches_raw_rates() {
        let pr = pagerank(&toy8(), 0.0).unwrap();
        let expected = [0.15, 0.10, 0.10, 0.20, 0.20, 0.10, 0.10, 0.05];
        for (u, &p) in expected.iter().enumerate() {
            assert_close(pr.score(u as NodeId), p, 1e-9);
        }
    }

    #[test]
    fn modularity_vitality_matches_direct_recount() {
        let g = toy8();
        let m = Partition::two_level(&M_OPT);
        let mv = modularity_vitality(&g, &m).unwrap();
        // Removing node 8: Q drops from 0.395 to 5/9 − (11/18)² + 3/9 − (7/18)².
        assert_close(mv.score(7), 0.030802469135802424, 1e-12);
    }

    #[test]
    fn modularity_vitality_single_link_graph() {
        let g: Graph = Graph::from_numbered_edges(2, false, &[(0, 1, 1.0)]).unwrap();
        let m = Partition::two_level(&[0, 1]);
        let mv = modularity_vitality(&g, &m).unwrap();
        // Q = −0.5 before; removal leaves no links, so after-modularity is 0.
        assert_close(mv.score(0), 0.5, 1e-12);
        assert_close(mv.score(1), 0.5, 1e-12);
    }

    #[test]
    fn modularity_vitality_of_isolated_node_is_zero() {
        let g: Graph =
            Graph::from_numbered_edges(4, false, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let m = Partition::two_level(&[0, 0, 0, 1]);
        let mv = modularity_vitality(&g, &m).unwrap();
        assert_close(mv.score(3), 0.0, 1e-15);
    }

    /// Brute-force oracle: rebuild the graph without the node and rescore.
    fn brute_force_vitality(g: &Graph, m: &Partition, u: NodeId) -> f64 {
        let leaf = m.leaf_assignments();
        let q_before = crate::partitioning::modularity(g, m).unwrap();
        let keep: Vec<NodeId> =
            (0..g.node_count() as NodeId).filter(|&v| v != u).collect();
        let relabel: std::collections::HashMap<NodeId, u32> =
            keep.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let edges: Vec<(u32, u32, f64)> = g
            .links()
            .iter()
            .filter(|&&(a, b, _)| a != u && b != u)
            .map(|&(a, b, w)| (relabel[&a], relabel[&b], w))
            .collect();
        let q_after = if edges.is_empty() {
            0.0
        } else {
            let sub: Graph =
                Graph::from_numbered_edges(keep.len(), g.is_directed(), &edges).unwrap();
            let assignments: Vec<u32> = keep.iter().map(|&v| leaf[v as usize]).collect();
            crate::partitioning::modularity(&sub, &Partition::two_level(&assignments)).unwrap()
        };
        (q_before - q_after).abs()
    }

    #[test]
    fn modularity_vitality_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for directed in [false, true] {
            for trial in 0..10 {
                let n = 6 + (trial % 4);
                let mut edges = Vec::new();
                for a in 0..n as u32 {
                    for b in 0..n as u32 {
                        let ordered_ok = directed || a < b;
                        if a != b && ordered_ok && rng.gen_bool(0.4) {
                            edges.push((a, b, 1.0));
                        }
                    }
                }
                if edges.is_empty() {
                    edges.push((0, 1, 1.0));
                }
                let g: Graph = Graph::from_numbered_edges(n, directed, &edges).unwrap();
                let assignments: Vec<u32> =
                    (0..n).map(|_| rng.gen_range(0..3u32)).collect();
                let m = Partition::two_level(&assignments);
                let mv = modularity_vitality(&g, &m).unwrap();
                for u in 0..n as NodeId {
                    let expect = brute_force_vitality(&g, &m, u);
                    assert_close(mv.score(u), expect, 1e-12);
                }
            }
        }
    }

    #[test]
    fn hub_bridge_counts_modules_and_links() {
        let g = toy8();
        let m = Partition::two_level(&M_OPT);
        let chb = community_hub_bridge(&g, &m, HubBridgeVariant::OwnModule).unwrap();
        assert_close(chb.score(3), 13.0, 1e-12); // 4·3 intra + 1·1 bridge
        assert_close(chb.score(0), 12.0, 1e-12); // 4·3 intra, no bridge
        assert_close(chb.score(7), 4.0, 1e-12); // 4·1 intra
        let literal = community_hub_bridge(&g, &m, HubBridgeVariant::LiteralSum).unwrap();
        assert_close(literal.score(3), 17.0, 1e-12); // 4·3 + 4·1 + 1·1
    }

    #[test]
    fn hub_bridge_of_isolated_node_is_zero() {
        let g: Graph = Graph::from_numbered_edges(3, false, &[(0, 1, 1.0)]).unwrap();
        let m = Partition::two_level(&[0, 0, 1]);
        let chb = community_hub_bridge(&g, &m, HubBridgeVariant::OwnModule).unwrap();
        assert_close(chb.score(2), 0.0, 1e-15);
    }

    #[test]
    fn community_based_centrality_weights_by_module_share() {
        let g = toy8();
        let m = Partition::two_level(&M_OPT);
        let cbc = community_based_centrality(&g, &m).unwrap();
        assert_close(cbc.score(3), 2.0, 1e-12); // 3·(4/8) + 1·(4/8)
        assert_close(cbc.score(7), 0.5, 1e-12); // 1·(4/8)
    }

    #[test]
    fn community_based_centrality_reduces_to_degree_for_one_module() {
        let g = toy8();
        let cbc = community_based_centrality(&g, &Partition::one_level(8)).unwrap();
        for u in 0..8u32 {
            assert_close(cbc.score(u), g.degree(u) as f64, 1e-12);
            assert!(cbc.score(u) <= g.degree(u) as f64 + 1e-12);
        }
    }

    #[test]
    fn module_link_profile_invariants() {
        let g = toy8();
        let m = Partition::two_level(&M_OPT);
        let profile = ModuleLinkProfile::build(&g, &m).unwrap();
        for u in 0..8u32 {
            let total: usize =
                (0..2u32).map(|module| profile.neighbor_count(u, module)).sum();
            assert_eq!(total, g.degree(u));
            assert!(profile.neighboring_communities(u) <= 1);
        }
        assert_eq!(profile.neighbor_count(3, 0), 3);
        assert_eq!(profile.neighbor_count(3, 1), 1);
        assert_eq!(profile.outside_degree(3), 1);
        assert_eq!(profile.neighboring_communities(0), 0);
    }
}
