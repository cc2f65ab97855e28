//! Typed, undirected heterogeneous graph.
//!
//! Nodes carry an external string key and a type label. The builder accepts
//! edges between `(key, type)` endpoints and [`GraphBuilder::finish`] freezes
//! them into a compressed adjacency layout with sorted neighbor lists.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("node `{key}` registered as `{existing}` and `{requested}`")]
    TypeConflict {
        key: String,
        existing: String,
        requested: String,
    },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("invalid key or type label `{0}`")]
    InvalidKey(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense node index, contiguous in `0..node_count` once the graph is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index into the graph's type-label table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeType(pub u16);

fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    keys: Vec<String>,
    key_index: HashMap<String, u32>,
    node_types: Vec<NodeType>,
    type_labels: Vec<String>,
    adjacency: Vec<Vec<u32>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn type_id(&mut self, label: &str) -> Result<NodeType, GraphError> {
        if !valid_token(label) || label.contains(':') {
            return Err(GraphError::InvalidKey(label.to_string()));
        }
        if let Some(pos) = self.type_labels.iter().position(|l| l == label) {
            return Ok(NodeType(pos as u16));
        }
        self.type_labels.push(label.to_string());
        Ok(NodeType((self.type_labels.len() - 1) as u16))
    }

    /// Registers a node (or checks an existing registration) and returns its id.
    pub fn add_node(&mut self, key: &str, node_type: &str) -> Result<NodeId, GraphError> {
        if !valid_token(key) {
            return Err(GraphError::InvalidKey(key.to_string()));
        }
        let ty = self.type_id(node_type)?;
        if let Some(&id) = self.key_index.get(key) {
            let existing = self.node_types[id as usize];
            if existing != ty {
                return Err(GraphError::TypeConflict {
                    key: key.to_string(),
                    existing: self.type_labels[existing.0 as usize].clone(),
                    requested: node_type.to_string(),
                });
            }
            return Ok(NodeId(id));
        }
        let id = self.keys.len() as u32;
        self.keys.push(key.to_string());
        self.key_index.insert(key.to_string(), id);
        self.node_types.push(ty);
        self.adjacency.push(Vec::new());
        Ok(NodeId(id))
    }

    /// Adds an undirected edge. Repeating an edge (in either direction) is a no-op.
    pub fn add_edge(
        &mut self,
        (u_key, u_type): (&str, &str),
        (v_key, v_type): (&str, &str),
    ) -> Result<&mut Self, GraphError> {
        if u_key == v_key {
            return Err(GraphError::SelfLoop(u_key.to_string()));
        }
        let u = self.add_node(u_key, u_type)?;
        let v = self.add_node(v_key, v_type)?;
        // Duplicates are removed in `finish`.
        self.adjacency[u.index()].push(v.0);
        self.adjacency[v.index()].push(u.0);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn finish(self) -> HeteroGraph {
        let mut offsets = Vec::with_capacity(self.keys.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut list in self.adjacency {
            list.sort_unstable();
            list.dedup();
            targets.extend(list.into_iter().map(NodeId));
            offsets.push(targets.len());
        }
        HeteroGraph {
            edge_count: targets.len() / 2,
            offsets,
            targets,
            keys: self.keys,
            key_index: self.key_index,
            node_types: self.node_types,
            type_labels: self.type_labels,
        }
    }
}

/// Immutable heterogeneous graph with sorted neighbor lists.
#[derive(Debug, Clone)]
pub struct HeteroGraph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    edge_count: usize,
    keys: Vec<String>,
    key_index: HashMap<String, u32>,
    node_types: Vec<NodeType>,
    type_labels: Vec<String>,
}

impl HeteroGraph {
    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    fn check(&self, u: NodeId) -> Result<usize, GraphError> {
        let i = u.index();
        if i >= self.keys.len() {
            Err(GraphError::UnknownNode(i))
        } else {
            Ok(i)
        }
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId], GraphError> {
        let i = self.check(u)?;
        Ok(&self.targets[self.offsets[i]..self.offsets[i + 1]])
    }

    pub fn degree(&self, u: NodeId) -> Result<usize, GraphError> {
        let i = self.check(u)?;
        Ok(self.offsets[i + 1] - self.offsets[i])
    }

    /// Neighbor slice without bounds reporting; panics on an out-of-range id.
    #[inline]
    pub(crate) fn neighbors_unchecked(&self, u: NodeId) -> &[NodeId] {
        let i = u.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.keys.len() as u32).map(NodeId)
    }

    pub fn key(&self, u: NodeId) -> Result<&str, GraphError> {
        let i = self.check(u)?;
        Ok(&self.keys[i])
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn lookup(&self, key: &str) -> Option<NodeId> {
        self.key_index.get(key).copied().map(NodeId)
    }

    pub fn node_type(&self, u: NodeId) -> Result<NodeType, GraphError> {
        let i = self.check(u)?;
        Ok(self.node_types[i])
    }

    pub fn type_label(&self, ty: NodeType) -> &str {
        &self.type_labels[ty.0 as usize]
    }

    pub fn type_of(&self, label: &str) -> Option<NodeType> {
        self.type_labels
            .iter()
            .position(|l| l == label)
            .map(|p| NodeType(p as u16))
    }

    /// True if `u` and `v` share at least one neighbor of type `via`.
    pub fn share_neighbor_of_type(&self, u: NodeId, v: NodeId, via: NodeType) -> bool {
        let (a, b) = (self.neighbors_unchecked(u), self.neighbors_unchecked(v));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if self.node_types[a[i].index()] == via {
                        return true;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        false
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors_unchecked(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }
}

fn split_endpoint(field: &str) -> Option<(&str, &str)> {
    let (ty, key) = field.split_once(':')?;
    Some((key, ty))
}

/// Reads an edge list of `<type>:<key>\t<type>:<key>` lines.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<HeteroGraph, GraphError> {
    let mut builder = GraphBuilder::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: &str| GraphError::Parse {
            line: line_no,
            message: message.to_string(),
        };
        let mut fields = trimmed.split('\t');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err("expected two tab-separated endpoints"));
        };
        let u = split_endpoint(a).ok_or_else(|| parse_err("endpoint must be <type>:<key>"))?;
        let v = split_endpoint(b).ok_or_else(|| parse_err("endpoint must be <type>:<key>"))?;
        builder.add_edge(u, v).map_err(|e| match e {
            GraphError::Io(_) | GraphError::Parse { .. } => e,
            other => GraphError::Parse {
                line: line_no,
                message: other.to_string(),
            },
        })?;
    }
    Ok(builder.finish())
}

/// Writes the graph as an edge list. `header` lines are emitted as `#` comments.
pub fn write_edge_list<W: Write>(
    graph: &HeteroGraph,
    header: &[String],
    mut out: W,
) -> Result<(), GraphError> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    for (u, v) in graph.edges() {
        writeln!(
            out,
            "{}:{}\t{}:{}",
            graph.type_label(graph.node_types[u.index()]),
            graph.keys[u.index()],
            graph.type_label(graph.node_types[v.index()]),
            graph.keys[v.index()],
        )?;
    }
    Ok(())
}
