//! Node-to-module assignments, flat or nested.
//!
//! Every node carries a module path from the (implicit) root to its leaf
//! module: length-1 paths describe an ordinary two-level partition, longer
//! paths describe nested modules. A module either contains nodes or contains
//! submodules, never both; that keeps codebook structure unambiguous.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::num::Real;

/// A validated partition of `n` nodes into (possibly nested) modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    paths: Vec<Vec<u32>>,
    /// Dense leaf-module index per node, in first-appearance order.
    leaf_of: Vec<u32>,
    leaf_count: usize,
}

impl Partition {
    /// All nodes in one module.
    pub fn one_level(n: usize) -> Self {
        Self::from_paths(vec![vec![0]; n]).expect("uniform paths are always a valid tree")
    }

    /// Two-level partition from per-node module ids.
    pub fn two_level(assignment: &[u32]) -> Self {
        Self::from_paths(assignment.iter().map(|&m| vec![m]).collect())
            .expect("single-segment paths are always a valid tree")
    }

    /// Builds a partition from per-node module paths, validating tree shape.
    pub fn from_paths(paths: Vec<Vec<u32>>) -> Result<Self> {
        if paths.iter().any(|p| p.is_empty()) {
            return Err(Error::Invalid("every node needs a non-empty module path".into()));
        }
        // A leaf path that is a strict prefix of another path would make one
        // module hold both nodes and submodules. Sorted unique paths place any
        // prefix right before its extensions.
        let mut sorted: Vec<&Vec<u32>> = paths.iter().collect();
        sorted.sort();
        sorted.dedup();
        for pair in sorted.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.len() < b.len() && &b[..a.len()] == a.as_slice() {
                return Err(Error::Invalid(format!(
                    "module path {} contains both nodes and submodules",
                    join_path(a)
                )));
            }
        }
        let mut leaf_ids: HashMap<&[u32], u32> = HashMap::new();
        let mut leaf_of = Vec::with_capacity(paths.len());
        for path in &paths {
            let next = leaf_ids.len() as u32;
            let id = *leaf_ids.entry(path.as_slice()).or_insert(next);
            leaf_of.push(id);
        }
        let leaf_count = leaf_ids.len();
        Ok(Partition { paths, leaf_of, leaf_count })
    }

    /// Parses partition text (`label path` lines, `:`-separated path segments)
    /// against a graph's label set. Every graph node must be assigned exactly
    /// once.
    pub fn parse<R: Real>(text: &str, g: &Graph<R>) -> Result<Self> {
        let mut paths: Vec<Option<Vec<u32>>> = vec![None; g.node_count()];
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `label module-path`, found {} tokens", tokens.len()),
                });
            }
            let node = g.node_id(tokens[0]).ok_or_else(|| {
                Error::Invalid(format!("partition assigns unknown node {:?}", tokens[0]))
            })?;
            let mut path = Vec::new();
            for seg in tokens[1].split(':') {
                let id: u32 = seg.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid module id {seg:?}"),
                })?;
                path.push(id);
            }
            if paths[node as usize].replace(path).is_some() {
                return Err(Error::Invalid(format!(
                    "node {:?} assigned more than once",
                    tokens[0]
                )));
            }
        }
        let mut resolved = Vec::with_capacity(paths.len());
        for (u, path) in paths.into_iter().enumerate() {
            match path {
                Some(p) => resolved.push(p),
                None => {
                    return Err(Error::Invalid(format!(
                        "partition missing node {:?}",
                        g.label(u as NodeId)
                    )))
                }
            }
        }
        Self::from_paths(resolved)
    }

    /// Serializes as `label path` lines in dense-id order.
    pub fn write<R: Real>(&self, g: &Graph<R>) -> String {
        let mut out = String::new();
        for (u, path) in self.paths.iter().enumerate() {
            out.push_str(&format!("{} {}\n", g.label(u as NodeId), join_path(path)));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, u: NodeId) -> &[u32] {
        &self.paths[u as usize]
    }

    pub fn paths(&self) -> &[Vec<u32>] {
        &self.paths
    }

    /// True when every node sits directly below the root.
    pub fn is_two_level(&self) -> bool {
        self.paths.iter().all(|p| p.len() == 1)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Dense leaf-module index per node (first-appearance numbering).
    pub fn leaf_assignments(&self) -> &[u32] {
        &self.leaf_of
    }

    /// Leaf module sizes indexed by dense leaf id.
    pub fn leaf_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.leaf_count];
        for &l in &self.leaf_of {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Node lists per leaf module, indexed by dense leaf id.
    pub fn leaf_members(&self) -> Vec<Vec<NodeId>> {
        let mut members = vec![Vec::new(); self.leaf_count];
        for (u, &l) in self.leaf_of.iter().enumerate() {
            members[l as usize].push(u as NodeId);
        }
        members
    }

    /// True when both partitions group nodes into the same leaf modules,
    /// ignoring module labels and internal nesting.
    pub fn same_leaf_clustering(&self, other: &Partition) -> bool {
        self.leaf_of == other.leaf_of
    }
}

fn join_path(path: &[u32]) -> String {
    path.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(":")
}
