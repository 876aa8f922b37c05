//! The typed logical-form language.
//!
//! Every expression denotes a `TimeInterval`. Leaves are context constants
//! (event instances and time expressions); a relation function builds a
//! reference interval standing in one Allen relation to its argument; the set
//! operations combine two intervals.
//!
//! ```text
//! (intersection (before ei1) (after t3))
//! ```

mod actions;
mod sample;
mod sexpr;

use crate::algebra::AllenRelation;
use crate::network::NodeKind;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use actions::{ActionSequence, NonTerminal, Production};
pub use sample::sample_form;
pub use sexpr::parse_sexpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("unbalanced parentheses at byte {pos}")]
    Unbalanced { pos: usize },
    #[error("unexpected `{token}` at byte {pos}")]
    Unexpected { token: String, pos: usize },
    #[error("unknown predicate `{name}` at byte {pos}")]
    UnknownPredicate { name: String, pos: usize },
    #[error("`{name}` at byte {pos} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("empty expression")]
    Empty,
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("invalid constant label `{0}`")]
    InvalidLabel(String),
    #[error("duplicate constant label `{0}`")]
    DuplicateLabel(String),
    #[error("action sequence ends with pending {pending:?} after {consumed} action(s)")]
    Dangling { pending: Vec<NonTerminal>, consumed: usize },
    #[error("action {index} `{action}` cannot expand {expected}")]
    Inapplicable {
        index: usize,
        action: String,
        expected: NonTerminal,
    },
    #[error("{extra} action(s) left over after the form was complete")]
    Trailing { extra: usize },
    #[error("malformed action `{0}`")]
    MalformedAction(String),
}

/// The three types of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SemanticType {
    /// `TimeInterval`
    TimeInterval,
    /// `TimeInterval -> TimeInterval`
    Fn1,
    /// `TimeInterval x TimeInterval -> TimeInterval`
    Fn2,
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemanticType::TimeInterval => "TimeInterval",
            SemanticType::Fn1 => "Fn1",
            SemanticType::Fn2 => "Fn2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Union,
    Intersection,
}

impl SetOp {
    pub const ALL: [SetOp; 2] = [SetOp::Union, SetOp::Intersection];

    pub fn name(self) -> &'static str {
        match self {
            SetOp::Union => "union",
            SetOp::Intersection => "intersection",
        }
    }
}

impl fmt::Display for SetOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetOp {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "union" => Ok(SetOp::Union),
            "intersection" => Ok(SetOp::Intersection),
            _ => Err(()),
        }
    }
}

/// A predicate of the language, classified by role.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Constant(String),
    Relation(AllenRelation),
    SetOp(SetOp),
}

impl Predicate {
    pub fn semantic_type(&self) -> SemanticType {
        match self {
            Predicate::Constant(_) => SemanticType::TimeInterval,
            Predicate::Relation(_) => SemanticType::Fn1,
            Predicate::SetOp(_) => SemanticType::Fn2,
        }
    }

    /// Resolves a function name; bare symbols are constants.
    pub fn function(name: &str) -> Option<Predicate> {
        if let Ok(op) = name.parse::<SetOp>() {
            return Some(Predicate::SetOp(op));
        }
        name.parse::<AllenRelation>().ok().map(Predicate::Relation)
    }
}

/// A well-typed expression tree. Every node has type `TimeInterval`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicalForm {
    Constant(String),
    Relation(AllenRelation, Box<LogicalForm>),
    SetOp(SetOp, Box<LogicalForm>, Box<LogicalForm>),
}

impl LogicalForm {
    pub fn constant(label: impl Into<String>) -> Self {
        LogicalForm::Constant(label.into())
    }

    pub fn relation(r: AllenRelation, arg: LogicalForm) -> Self {
        LogicalForm::Relation(r, Box::new(arg))
    }

    pub fn set_op(op: SetOp, left: LogicalForm, right: LogicalForm) -> Self {
        LogicalForm::SetOp(op, Box::new(left), Box::new(right))
    }

    pub fn union(left: LogicalForm, right: LogicalForm) -> Self {
        Self::set_op(SetOp::Union, left, right)
    }

    pub fn intersection(left: LogicalForm, right: LogicalForm) -> Self {
        Self::set_op(SetOp::Intersection, left, right)
    }

    /// Number of productions below `START`: one per constant, two per
    /// function application.
    pub fn size(&self) -> usize {
        match self {
            LogicalForm::Constant(_) => 1,
            LogicalForm::Relation(_, arg) => 2 + arg.size(),
            LogicalForm::SetOp(_, l, r) => 2 + l.size() + r.size(),
        }
    }

    /// Length of the action sequence, `START` included.
    pub fn action_len(&self) -> usize {
        1 + self.size()
    }

    pub fn depth(&self) -> usize {
        match self {
            LogicalForm::Constant(_) => 1,
            LogicalForm::Relation(_, arg) => 1 + arg.depth(),
            LogicalForm::SetOp(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn constants(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_constants(&mut |c| out.push(c));
        out
    }

    fn visit_constants<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            LogicalForm::Constant(c) => f(c),
            LogicalForm::Relation(_, arg) => arg.visit_constants(f),
            LogicalForm::SetOp(_, l, r) => {
                l.visit_constants(f);
                r.visit_constants(f);
            }
        }
    }

    /// Orders the arguments of every set operation by their serialization.
    pub fn canonicalize(self) -> LogicalForm {
        match self {
            LogicalForm::Constant(_) => self,
            LogicalForm::Relation(r, arg) => LogicalForm::relation(r, arg.canonicalize()),
            LogicalForm::SetOp(op, l, r) => {
                let (l, r) = (l.canonicalize(), r.canonicalize());
                if r.to_string() < l.to_string() {
                    LogicalForm::set_op(op, r, l)
                } else {
                    LogicalForm::set_op(op, l, r)
                }
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            LogicalForm::Constant(_) => true,
            LogicalForm::Relation(_, arg) => arg.is_canonical(),
            LogicalForm::SetOp(_, l, r) => l.to_string() <= r.to_string() && l.is_canonical() && r.is_canonical(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, LangError> {
        parse_sexpr(text)
    }

    pub fn to_actions(&self) -> ActionSequence {
        actions::to_actions(self)
    }

    pub fn from_actions(seq: &ActionSequence) -> Result<Self, LangError> {
        actions::from_actions(seq)
    }

    /// Checks the form against a vocabulary; the only possible type is
    /// `TimeInterval`.
    pub fn type_check(&self, vocab: &Vocabulary) -> Result<SemanticType, LangError> {
        match self {
            LogicalForm::Constant(c) => {
                if vocab.contains(c) {
                    Ok(SemanticType::TimeInterval)
                } else {
                    Err(LangError::UnknownConstant(c.clone()))
                }
            }
            LogicalForm::Relation(_, arg) => arg.type_check(vocab),
            LogicalForm::SetOp(_, l, r) => {
                l.type_check(vocab)?;
                r.type_check(vocab)
            }
        }
    }
}

/// Canonical S-expression serialization.
impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalForm::Constant(c) => f.write_str(c),
            LogicalForm::Relation(r, arg) => write!(f, "({r} {arg})"),
            LogicalForm::SetOp(op, l, r) => write!(f, "({op} {l} {r})"),
        }
    }
}

impl FromStr for LogicalForm {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sexpr(s)
    }
}

impl Serialize for LogicalForm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LogicalForm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_sexpr(&text).map_err(serde::de::Error::custom)
    }
}

/// Kind of a context constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Event,
    Timex,
}

impl From<ConstantKind> for NodeKind {
    fn from(k: ConstantKind) -> NodeKind {
        match k {
            ConstantKind::Event => NodeKind::Event,
            ConstantKind::Timex => NodeKind::Timex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VocabEntry {
    pub label: String,
    pub kind: ConstantKind,
}

/// The constants available to logical forms over one input.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<VocabEntry>", into = "Vec<VocabEntry>")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
}

/// Labels must survive both the S-expression and the action-string syntax.
pub fn is_valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ',' | ';' | ':'))
        && label != "START"
        && label != "TimeInterval"
        && label != "Fn1"
        && label != "Fn2"
}

impl Vocabulary {
    pub fn new<I, S>(entries: I) -> Result<Self, LangError>
    where
        I: IntoIterator<Item = (S, ConstantKind)>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (label, kind) in entries {
            let label = label.into();
            if !is_valid_label(&label) {
                return Err(LangError::InvalidLabel(label));
            }
            if !seen.insert(label.clone()) {
                return Err(LangError::DuplicateLabel(label));
            }
            out.push(VocabEntry { label, kind });
        }
        Ok(Vocabulary { entries: out })
    }

    /// A vocabulary of event constants.
    pub fn events<I, S>(labels: I) -> Result<Self, LangError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(labels.into_iter().map(|l| (l, ConstantKind::Event)))
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.iter().any(|e| e.label == label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TryFrom<Vec<VocabEntry>> for Vocabulary {
    type Error = LangError;

    fn try_from(entries: Vec<VocabEntry>) -> Result<Self, LangError> {
        Vocabulary::new(entries.into_iter().map(|e| (e.label, e.kind)))
    }
}

impl From<Vocabulary> for Vec<VocabEntry> {
    fn from(v: Vocabulary) -> Self {
        v.entries
    }
}
