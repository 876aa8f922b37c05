//! Execution of logical forms against a context.
//!
//! Each subexpression becomes a network node. Relation functions and set
//! operations introduce fresh reference intervals tied to their arguments by
//! constraints; the network is then propagated and the root's labels to every
//! context constant form the denotation.

use crate::algebra::{AllenRelation, RelationSet};
use crate::lang::{ActionSequence, LangError, LogicalForm, SetOp, Vocabulary};
use crate::network::{ConsistencyStatus, ConstraintNetwork, NodeId, NodeKind, RelationGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// `{starts, during, finishes, equals}`: lies within or coincides with.
pub const CONTAINMENT: RelationSet = RelationSet::from_bits(
    RelationSet::single(AllenRelation::Starts).bits()
        | RelationSet::single(AllenRelation::During).bits()
        | RelationSet::single(AllenRelation::Finishes).bits()
        | RelationSet::single(AllenRelation::Equals).bits(),
);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("background constraint references unknown label `{0}`")]
    UnknownBackgroundLabel(String),
}

/// A known relation between two context constants, asserted before
/// propagation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundConstraint {
    pub source: String,
    pub target: String,
    pub relations: RelationSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExecutionContext {
    vocabulary: Vocabulary,
    #[serde(default)]
    background: Vec<BackgroundConstraint>,
}

impl ExecutionContext {
    pub fn new(vocabulary: Vocabulary, background: Vec<BackgroundConstraint>) -> Result<Self, ExecError> {
        for c in &background {
            for label in [&c.source, &c.target] {
                if !vocabulary.contains(label) {
                    return Err(ExecError::UnknownBackgroundLabel(label.clone()));
                }
            }
        }
        Ok(ExecutionContext { vocabulary, background })
    }

    pub fn from_vocabulary(vocabulary: Vocabulary) -> Self {
        ExecutionContext {
            vocabulary,
            background: Vec::new(),
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn background(&self) -> &[BackgroundConstraint] {
        &self.background
    }
}

/// Relations of the root interval to every context constant.
///
/// An inconsistent denotation has an empty relation map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Denotation {
    pub root: String,
    pub status: ConsistencyStatus,
    pub relations: BTreeMap<String, RelationSet>,
}

impl Denotation {
    pub fn is_consistent(&self) -> bool {
        self.status == ConsistencyStatus::Consistent
    }

    /// Canonical text key: `INCONSISTENT`, or `label:rels` pairs in label
    /// order joined by `;`. Equal denotations have equal signatures.
    pub fn signature(&self) -> String {
        if !self.is_consistent() {
            return "INCONSISTENT".to_string();
        }
        let mut out = String::new();
        for (i, (label, rels)) in self.relations.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            let _ = write!(out, "{label}:{rels}");
        }
        out
    }
}

pub fn denotation_signature(d: &Denotation) -> String {
    d.signature()
}

/// A finished execution: the denotation plus the propagated network it was
/// read from.
#[derive(Debug, Clone)]
pub struct Execution {
    pub denotation: Denotation,
    pub network: ConstraintNetwork,
    pub root: NodeId,
}

impl Execution {
    pub fn graph(&self) -> RelationGraph {
        self.network.to_graph()
    }

    /// Root labels plus every constant-to-constant label, in vocabulary
    /// order. Two subexpressions with the same key behave the same inside
    /// any larger form.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn state_key(&self, vocab: &Vocabulary) -> Vec<RelationSet> {
        if !self.denotation.is_consistent() {
            return Vec::new();
        }
        let ids: Vec<NodeId> = vocab
            .labels()
            .map(|l| self.network.lookup(l).expect("vocabulary node"))
            .collect();
        let mut key = Vec::with_capacity(ids.len() * (ids.len() + 1) / 2);
        for &id in &ids {
            key.push(self.network.label(self.root, id).expect("valid ids"));
        }
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                key.push(self.network.label(i, j).expect("valid ids"));
            }
        }
        key
    }
}

struct Builder<'c> {
    net: ConstraintNetwork,
    next_ref: usize,
    ctx: &'c ExecutionContext,
}

impl Builder<'_> {
    fn fresh(&mut self) -> NodeId {
        loop {
            let label = format!("ref#{}", self.next_ref);
            self.next_ref += 1;
            if let Ok(id) = self.net.add_node(NodeKind::Reference, label) {
                return id;
            }
        }
    }

    fn assert(&mut self, i: NodeId, j: NodeId, r: RelationSet) {
        self.net
            .assert_constraint(i, j, r)
            .expect("builder only uses its own node ids");
    }

    fn eval(&mut self, lf: &LogicalForm) -> NodeId {
        match lf {
            LogicalForm::Constant(label) => self
                .net
                .lookup(label)
                .expect("constants are type-checked before evaluation"),
            LogicalForm::Relation(r, arg) => {
                let arg = self.eval(arg);
                let node = self.fresh();
                self.assert(node, arg, RelationSet::single(*r));
                node
            }
            LogicalForm::SetOp(op, l, r) => {
                let l = self.eval(l);
                let r = self.eval(r);
                let node = self.fresh();
                match op {
                    SetOp::Intersection => {
                        self.assert(node, l, CONTAINMENT);
                        self.assert(node, r, CONTAINMENT);
                    }
                    SetOp::Union => {
                        self.assert(l, node, CONTAINMENT);
                        self.assert(r, node, CONTAINMENT);
                    }
                }
                node
            }
        }
    }

    fn add_background(&mut self) {
        for c in self.ctx.background() {
            let i = self.net.lookup(&c.source).expect("validated background");
            let j = self.net.lookup(&c.target).expect("validated background");
            self.assert(i, j, c.relations);
        }
    }
}

/// Executes `lf` and keeps the propagated network.
pub fn execute_with_network(lf: &LogicalForm, ctx: &ExecutionContext) -> Result<Execution, ExecError> {
    lf.type_check(ctx.vocabulary())?;
    let mut builder = Builder {
        net: ConstraintNetwork::new(),
        next_ref: 0,
        ctx,
    };
    for entry in ctx.vocabulary().entries() {
        builder
            .net
            .add_node(entry.kind.into(), entry.label.clone())
            .expect("vocabulary labels are unique");
    }
    let root = builder.eval(lf);
    builder.add_background();
    let mut net = builder.net;
    let status = net.propagate();
    let root_label = net.node(root).expect("root node").label.clone();
    let relations = if status == ConsistencyStatus::Consistent {
        ctx.vocabulary()
            .labels()
            .map(|l| {
                let id = net.lookup(l).expect("vocabulary node");
                (l.to_string(), net.relation_between(root, id).expect("consistent"))
            })
            .collect()
    } else {
        BTreeMap::new()
    };
    Ok(Execution {
        denotation: Denotation {
            root: root_label,
            status,
            relations,
        },
        network: net,
        root,
    })
}

pub fn execute(lf: &LogicalForm, ctx: &ExecutionContext) -> Result<Denotation, ExecError> {
    execute_with_network(lf, ctx).map(|e| e.denotation)
}

pub fn execute_actions(seq: &ActionSequence, ctx: &ExecutionContext) -> Result<Denotation, ExecError> {
    let lf = LogicalForm::from_actions(seq)?;
    execute(&lf, ctx)
}
