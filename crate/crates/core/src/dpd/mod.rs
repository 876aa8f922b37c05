//! Dynamic programming on denotations.
//!
//! Given answer-only supervision (the relation of the queried interval to
//! some context constants), find every logical form up to a length bound
//! whose execution reproduces it. [`enumerate`] is the plain generator;
//! [`search`] groups subexpressions into equivalence classes by their
//! execution state and only executes one combination per class tuple.

mod chart;
mod enumerate;

use crate::algebra::{AllenRelation, RelationSet};
use crate::executor::Denotation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Duration;
use thiserror::Error;

pub use chart::search;
pub use enumerate::{enumerate, Enumerator};

use crate::lang::LogicalForm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpdError {
    #[error("gold denotation references unknown label `{0}`")]
    UnknownGoldLabel(String),
    #[error("gold relation for `{label}` must be a single relation, got {{{set}}}")]
    NonSingletonGold { label: String, set: RelationSet },
    #[error("max_actions must be at least 2, got {0}")]
    BoundTooSmall(usize),
    #[error("vocabulary is empty")]
    EmptyVocabulary,
}

/// The relation of the root interval to each supervised constant.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoldDenotation(BTreeMap<String, AllenRelation>);

impl GoldDenotation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, r: AllenRelation) {
        self.0.insert(label.into(), r);
    }

    /// Accepts relation sets, all of which must be singletons.
    pub fn from_sets<I, S>(pairs: I) -> Result<Self, DpdError>
    where
        I: IntoIterator<Item = (S, RelationSet)>,
        S: Into<String>,
    {
        let mut gold = GoldDenotation::new();
        for (label, set) in pairs {
            let label = label.into();
            let r = set.as_single().ok_or_else(|| DpdError::NonSingletonGold {
                label: label.clone(),
                set,
            })?;
            gold.insert(label, r);
        }
        Ok(gold)
    }

    pub fn get(&self, label: &str) -> Option<AllenRelation> {
        self.0.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, AllenRelation)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, AllenRelation)> for GoldDenotation {
    fn from_iter<I: IntoIterator<Item = (String, AllenRelation)>>(iter: I) -> Self {
        GoldDenotation(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Predicted set must equal the gold singleton.
    #[default]
    Strict,
    /// Predicted set must contain the gold relation.
    Lax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_actions: usize,
    pub pruning: bool,
    /// Also drop `(op X X)`. Off by default: under containment semantics
    /// `(intersection X X)` and `(union X X)` can denote something `X` alone
    /// does not, so this rule loses matches.
    #[serde(default)]
    pub prune_idempotent: bool,
    pub max_results: Option<usize>,
    pub match_mode: MatchMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_actions: 12,
            pruning: true,
            prune_idempotent: false,
            max_results: None,
            match_mode: MatchMode::Strict,
        }
    }
}

impl SearchConfig {
    pub fn with_bound(max_actions: usize) -> Self {
        SearchConfig {
            max_actions,
            ..Default::default()
        }
    }

    pub fn pruning(mut self, on: bool) -> Self {
        self.pruning = on;
        self
    }

    pub(crate) fn drops_idempotent(&self) -> bool {
        self.pruning && self.prune_idempotent
    }

    pub(crate) fn validate(&self) -> Result<(), DpdError> {
        if self.max_actions < 2 {
            return Err(DpdError::BoundTooSmall(self.max_actions));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Forms in the search space after pruning and canonicalization.
    pub enumerated: u64,
    /// Candidates rejected by the pruning rules.
    pub pruned: u64,
    /// Distinct denotation signatures over all forms in the space.
    pub signatures: usize,
    /// Equivalence classes in the chart.
    pub classes: usize,
    /// Network propagations run while filling the chart.
    pub executions: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Matching forms ordered by action length, then serialization.
    pub matches: Vec<LogicalForm>,
    /// One matching form per chart class, in size order. Not
    /// capped by `max_results`, so it covers every matching denotation even
    /// when listing all matches would be impractical.
    pub witnesses: Vec<LogicalForm>,
    pub stats: SearchStats,
}

/// Whether `d` reproduces `gold`. Constants absent from `gold` are
/// unconstrained.
pub fn matches(d: &Denotation, gold: &GoldDenotation) -> bool {
    matches_with(d, gold, MatchMode::Strict)
}

pub fn matches_with(d: &Denotation, gold: &GoldDenotation, mode: MatchMode) -> bool {
    d.is_consistent()
        && gold.iter().all(|(label, r)| match d.relations.get(label) {
            Some(set) => match mode {
                MatchMode::Strict => *set == RelationSet::single(r),
                MatchMode::Lax => set.contains(r),
            },
            None => false,
        })
}

/// True when `(outer (inner X))` composes to something no more specific than
/// one of the two functions alone.
pub fn redundant_nesting(outer: AllenRelation, inner: AllenRelation) -> bool {
    let c = RelationSet::single(outer).compose(RelationSet::single(inner));
    c == RelationSet::single(outer) || c == RelationSet::single(inner)
}

/// Relation functions available to generation.
pub fn generation_relations(pruning: bool) -> Vec<AllenRelation> {
    AllenRelation::ALL
        .into_iter()
        .filter(|r| !pruning || *r != AllenRelation::Equals)
        .collect()
}

/// Total order used for result lists.
pub(crate) fn canonical_cmp(a: &(LogicalForm, String), b: &(LogicalForm, String)) -> std::cmp::Ordering {
    a.0.action_len().cmp(&b.0.action_len()).then_with(|| a.1.cmp(&b.1))
}
