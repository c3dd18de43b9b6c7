//! Community-aware node importance from random-walk flows.
//!
//! The crate builds stationary flows on weighted graphs, aggregates them over
//! partitions, and scores nodes by map equation centrality — the codelength a
//! modular description saves when the node's codeword is removed — alongside
//! classic and community-aware baselines, spreading simulations, and ranking
//! metrics.

pub mod baselines;
pub mod error;
pub mod evalmetrics;
pub mod flow;
pub mod graph;
pub mod mapeq;
pub mod num;
pub mod partition;
pub mod partitioning;
pub mod spreading;

pub use baselines::{
    betweenness_centrality, community_based_centrality, community_hub_bridge, degree_centrality,
    modularity_vitality, pagerank, HubBridgeVariant, ModuleLinkProfile,
};
pub use error::{Error, Result};
pub use evalmetrics::{
    adjusted_mutual_information, kendall_tau_b, rewiring_experiment, RewiringRecord,
};
pub use flow::{
    aggregate_partition_flows, visit_rates_link_teleport, visit_rates_node_teleport,
    visit_rates_undirected, Convention, FlowField, FlowModel, ModuleFlows, PartitionFlows,
    DEFAULT_MAX_ITERATIONS, DEFAULT_TELEPORT_RATE, DEFAULT_TOLERANCE,
};
pub use graph::{
    degree_stats, epidemic_threshold, rewire, rewire_with_mode, DegreeStats, Graph, NodeId,
    RewireMode,
};
pub use mapeq::{
    codelength, codelength_of_flows, codelength_one_level, mec_all, mec_node, mec_set,
    CentralityVector, Method,
};
pub use num::{derive_seed, Real};
pub use partition::Partition;
pub use partitioning::{
    effective_num_modules, mixing, modularity, optimize_two_level, SearchConfig,
};
pub use spreading::{
    imprecision, linear_threshold, linear_threshold_with, selection_perplexity,
    sir_spreading_power, sir_spreading_powers, LtDirection, SirConfig, SpreadOutcome,
};

/// Concrete single-precision aliases.
pub type Graph32 = Graph<f32>;
pub type FlowField32 = FlowField<f32>;
pub type PartitionFlows32 = PartitionFlows<f32>;
pub type CentralityVector32 = CentralityVector<f32>;

/// Concrete double-precision aliases (the defaults).
pub type Graph64 = Graph<f64>;
pub type FlowField64 = FlowField<f64>;
pub type PartitionFlows64 = PartitionFlows<f64>;
pub type CentralityVector64 = CentralityVector<f64>;
