//! Qualitative constraint networks over interval nodes.
//!
//! Edges are kept as a dense label matrix with both directions stored, so
//! `N(j, i) = converse(N(i, j))` holds after every update. Missing knowledge is
//! the full relation set and self-loops are fixed at `{equals}`.

use crate::algebra::RelationSet;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Event,
    Timex,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyStatus {
    Unpropagated,
    Consistent,
    Inconsistent,
}

impl fmt::Display for ConsistencyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsistencyStatus::Unpropagated => "unpropagated",
            ConsistencyStatus::Consistent => "consistent",
            ConsistencyStatus::Inconsistent => "inconsistent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("node {0} does not belong to this network")]
    InvalidNode(NodeId),
    #[error("unknown node label `{0}`")]
    UnknownLabel(String),
    #[error("network is {0}; relations can only be read from a consistent, propagated network")]
    NotQueryable(ConsistencyStatus),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintNetwork {
    nodes: Vec<IntervalNode>,
    index: HashMap<String, NodeId>,
    // Row-major n x n label matrix.
    labels: Vec<RelationSet>,
    status: ConsistencyStatus,
    // Edges tightened since the last propagation.
    pending: Vec<(usize, usize)>,
}

impl Default for ConstraintNetwork {
    fn default() -> Self {
        Self::new()
    }
}

impl ConstraintNetwork {
    pub fn new() -> Self {
        ConstraintNetwork {
            nodes: Vec::new(),
            index: HashMap::new(),
            labels: Vec::new(),
            status: ConsistencyStatus::Unpropagated,
            pending: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn status(&self) -> ConsistencyStatus {
        self.status
    }

    pub fn nodes(&self) -> &[IntervalNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&IntervalNode> {
        self.nodes.get(id.0)
    }

    pub fn lookup(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn add_node(&mut self, kind: NodeKind, label: impl Into<String>) -> Result<NodeId, NetworkError> {
        let label = label.into();
        if self.index.contains_key(&label) {
            return Err(NetworkError::DuplicateLabel(label));
        }
        let old = self.nodes.len();
        let n = old + 1;
        let mut labels = vec![RelationSet::FULL; n * n];
        for i in 0..old {
            labels[i * n..i * n + old].copy_from_slice(&self.labels[i * old..(i + 1) * old]);
        }
        for i in 0..n {
            labels[i * n + i] = RelationSet::EQUALS;
        }
        self.labels = labels;
        let id = NodeId(old);
        self.nodes.push(IntervalNode {
            id,
            kind,
            label: label.clone(),
        });
        self.index.insert(label, id);
        if self.status != ConsistencyStatus::Inconsistent {
            self.status = ConsistencyStatus::Unpropagated;
        }
        Ok(id)
    }

    fn check(&self, id: NodeId) -> Result<usize, NetworkError> {
        if id.0 < self.nodes.len() {
            Ok(id.0)
        } else {
            Err(NetworkError::InvalidNode(id))
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> RelationSet {
        self.labels[i * self.nodes.len() + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, r: RelationSet) {
        let n = self.nodes.len();
        self.labels[i * n + j] = r;
        self.labels[j * n + i] = r.converse();
    }

    /// Current label of `(i, j)`, whatever the propagation status.
    pub fn label(&self, i: NodeId, j: NodeId) -> Result<RelationSet, NetworkError> {
        let (i, j) = (self.check(i)?, self.check(j)?);
        Ok(self.get(i, j))
    }

    /// Intersects the label of `(i, j)` with `r`.
    pub fn assert_constraint(
        &mut self,
        i: NodeId,
        j: NodeId,
        r: RelationSet,
    ) -> Result<ConsistencyStatus, NetworkError> {
        let (i, j) = (self.check(i)?, self.check(j)?);
        if i == j {
            if !r.contains(crate::algebra::AllenRelation::Equals) {
                self.status = ConsistencyStatus::Inconsistent;
            }
            return Ok(self.status);
        }
        let old = self.get(i, j);
        let new = old.intersection(r);
        if new == old {
            return Ok(self.status);
        }
        self.set(i, j, new);
        if new.is_empty() {
            self.status = ConsistencyStatus::Inconsistent;
        } else if self.status != ConsistencyStatus::Inconsistent {
            self.status = ConsistencyStatus::Unpropagated;
            self.pending.push((i, j));
        }
        Ok(self.status)
    }

    pub fn assert_by_label(
        &mut self,
        source: &str,
        target: &str,
        r: RelationSet,
    ) -> Result<ConsistencyStatus, NetworkError> {
        let i = self
            .lookup(source)
            .ok_or_else(|| NetworkError::UnknownLabel(source.to_string()))?;
        let j = self
            .lookup(target)
            .ok_or_else(|| NetworkError::UnknownLabel(target.to_string()))?;
        self.assert_constraint(i, j, r)
    }

    /// Path consistency to fixpoint, driven by a worklist of tightened edges.
    ///
    /// On a consistent result every triple satisfies
    /// `N(i, j) ⊆ N(i, k) ∘ N(k, j)`.
    pub fn propagate(&mut self) -> ConsistencyStatus {
        if self.status == ConsistencyStatus::Inconsistent {
            self.pending.clear();
            return self.status;
        }
        let n = self.nodes.len();
        let mut queue: VecDeque<(usize, usize)> = self.pending.drain(..).collect();
        let mut queued = vec![false; n * n];
        for &(i, j) in &queue {
            queued[i * n + j] = true;
        }
        while let Some((i, j)) = queue.pop_front() {
            queued[i * n + j] = false;
            let ij = self.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                // N(i,k) <- N(i,k) ∩ N(i,j) ∘ N(j,k)
                let ik = self.get(i, k);
                let tightened = ik.intersection(ij.compose(self.get(j, k)));
                if tightened != ik {
                    if tightened.is_empty() {
                        self.set(i, k, tightened);
                        self.status = ConsistencyStatus::Inconsistent;
                        return self.status;
                    }
                    self.set(i, k, tightened);
                    if !queued[i * n + k] {
                        queued[i * n + k] = true;
                        queue.push_back((i, k));
                    }
                }
                // N(k,j) <- N(k,j) ∩ N(k,i) ∘ N(i,j)
                let kj = self.get(k, j);
                let tightened = kj.intersection(self.get(k, i).compose(ij));
                if tightened != kj {
                    if tightened.is_empty() {
                        self.set(k, j, tightened);
                        self.status = ConsistencyStatus::Inconsistent;
                        return self.status;
                    }
                    self.set(k, j, tightened);
                    if !queued[k * n + j] {
                        queued[k * n + j] = true;
                        queue.push_back((k, j));
                    }
                }
            }
        }
        self.status = ConsistencyStatus::Consistent;
        self.status
    }

    /// Propagated label of `(i, j)`; only defined on a consistent network.
    pub fn relation_between(&self, i: NodeId, j: NodeId) -> Result<RelationSet, NetworkError> {
        let (i, j) = (self.check(i)?, self.check(j)?);
        if self.status != ConsistencyStatus::Consistent {
            return Err(NetworkError::NotQueryable(self.status));
        }
        Ok(self.get(i, j))
    }

    /// Whether every triple satisfies the path-consistency condition.
    pub fn is_path_consistent(&self) -> bool {
        let n = self.nodes.len();
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| self.get(i, j).is_subset(self.get(i, k).compose(self.get(k, j))))))
    }

    pub fn to_graph(&self) -> RelationGraph {
        let n = self.nodes.len();
        let mut edges = Vec::new();
        if self.status != ConsistencyStatus::Inconsistent {
            for i in 0..n {
                for j in i + 1..n {
                    let r = self.get(i, j);
                    if !r.is_full() {
                        edges.push(GraphEdge {
                            source: self.nodes[i].label.clone(),
                            target: self.nodes[j].label.clone(),
                            relations: r,
                        });
                    }
                }
            }
        }
        RelationGraph {
            status: self.status,
            nodes: self.nodes.clone(),
            edges,
        }
    }
}

/// JSON export of a network: every node and every edge `i < j` whose label
/// is not the full set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationGraph {
    pub status: ConsistencyStatus,
    pub nodes: Vec<IntervalNode>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    pub relations: RelationSet,
}
