//! Run configuration: every knob has a documented default, and the whole
//! configuration round-trips losslessly through its JSON file form.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use mapec::{Convention, FlowModel, HubBridgeVariant, LtDirection, Method};

/// Flow model selector as written on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    /// Stationary rates proportional to node strength; undirected only.
    Raw,
    /// Recorded uniform teleportation at the teleport rate.
    NodeTele,
    /// Unrecorded teleportation along links at the teleport rate.
    LinkTele,
}

impl FlowKind {
    pub fn to_model(self, rate: f64) -> FlowModel {
        match self {
            FlowKind::Raw => FlowModel::RawUndirected,
            FlowKind::NodeTele => FlowModel::NodeTeleport { rate },
            FlowKind::LinkTele => FlowModel::LinkTeleport { rate },
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FlowKind::Raw => "raw",
            FlowKind::NodeTele => "node-tele",
            FlowKind::LinkTele => "link-tele",
        }
    }
}

/// Codebook-usage convention selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionKind {
    /// Module usage counts member visits plus the exit codeword.
    WithExit,
    /// Module usage counts member visits only.
    NodeFlow,
}

impl ConventionKind {
    pub fn to_convention(self) -> Convention {
        match self {
            ConventionKind::WithExit => Convention::WithExit,
            ConventionKind::NodeFlow => Convention::NodeFlow,
        }
    }
}

/// Centrality method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Map equation centrality.
    Mec,
    /// Degree centrality.
    Dc,
    /// Betweenness centrality.
    Bc,
    /// PageRank.
    Pr,
    /// Modularity vitality.
    Mv,
    /// Community hub-bridge.
    Chb,
    /// Community-based centrality.
    Cbc,
}

impl MethodKind {
    pub fn to_method(self) -> Method {
        match self {
            MethodKind::Mec => Method::MapEquation,
            MethodKind::Dc => Method::Degree,
            MethodKind::Bc => Method::Betweenness,
            MethodKind::Pr => Method::PageRank,
            MethodKind::Mv => Method::ModularityVitality,
            MethodKind::Chb => Method::CommunityHubBridge,
            MethodKind::Cbc => Method::CommunityBasedCentrality,
        }
    }

    pub fn label(self) -> &'static str {
        self.to_method().label()
    }

    /// Whether the method scores nodes relative to a partition.
    pub fn needs_partition(self) -> bool {
        matches!(self, MethodKind::Mec | MethodKind::Mv | MethodKind::Chb | MethodKind::Cbc)
    }
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormatKind {
    Csv,
    Json,
}

/// Intra-community term of community hub-bridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ChbVariantKind {
    OwnModule,
    LiteralSum,
}

impl ChbVariantKind {
    pub fn to_variant(self) -> HubBridgeVariant {
        match self {
            ChbVariantKind::OwnModule => HubBridgeVariant::OwnModule,
            ChbVariantKind::LiteralSum => HubBridgeVariant::LiteralSum,
        }
    }
}

/// Influence direction of the linear threshold cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LtDirectionKind {
    Incoming,
    Outgoing,
}

impl LtDirectionKind {
    pub fn to_direction(self) -> LtDirection {
        match self {
            LtDirectionKind::Incoming => LtDirection::Incoming,
            LtDirectionKind::Outgoing => LtDirection::Outgoing,
        }
    }
}

/// Complete run configuration.
///
/// A config file may specify any subset of fields; the rest keep the
/// defaults below, and explicit command-line flags win over both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// Edge-list input path. Default: none (must come from the command line).
    pub input: Option<PathBuf>,
    /// Interpret links as directed arcs. Default: false.
    pub directed: bool,
    /// Flow model. Default: raw.
    pub flow: FlowKind,
    /// Teleportation rate for the teleporting flow models. Default: 0.15.
    pub teleport_rate: f64,
    /// Codebook-usage convention. Default: with-exit.
    pub convention: ConventionKind,
    /// Centrality method list. Default: [mec].
    pub methods: Vec<MethodKind>,
    /// Output path. Default: none (stdout).
    pub output: Option<PathBuf>,
    /// Output format. Default: csv.
    pub format: FormatKind,
    /// Base seed for every randomized component. Default: 42.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            directed: false,
            flow: FlowKind::Raw,
            teleport_rate: mapec::DEFAULT_TELEPORT_RATE,
            convention: ConventionKind::WithExit,
            methods: vec![MethodKind::Mec],
            output: None,
            format: FormatKind::Csv,
            seed: 42,
        }
    }
}
