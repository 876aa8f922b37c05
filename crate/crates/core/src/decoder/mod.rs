//! Grammar-constrained decoding.
//!
//! A [`TransitionSystem`] expands the leftmost pending nonterminal, so any
//! path from the initial state to a terminal one spells the preorder action
//! sequence of a well-typed form. [`beam_search`] walks it with a pluggable
//! [`Scorer`].

mod scorer;

use crate::algebra::AllenRelation;
use crate::dpd::{generation_relations, redundant_nesting};
use crate::lang::{ActionSequence, LogicalForm, NonTerminal, Production, SemanticType, SetOp, Vocabulary};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use thiserror::Error;

pub use scorer::{lexical_scorer, ConstantScorer, LexicalScorer, TriggerTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("beam width must be at least 1")]
    ZeroBeam,
    #[error("state is terminal")]
    Terminal,
    #[error("action `{action}` is not valid here; expected one of: {expected}")]
    InvalidAction { action: String, expected: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Slot {
    nt: NonTerminal,
    // Relation applied directly above this slot, for the nesting rule.
    outer: Option<AllenRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParserState {
    // Top of the stack is the last element.
    frontier: Vec<Slot>,
    actions: Vec<Production>,
}

impl ParserState {
    pub fn initial() -> Self {
        ParserState {
            frontier: vec![Slot {
                nt: NonTerminal::Start,
                outer: None,
            }],
            actions: Vec::new(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Production] {
        &self.actions
    }

    /// Pending nonterminals, next to expand first.
    pub fn frontier(&self) -> Vec<NonTerminal> {
        self.frontier.iter().rev().map(|s| s.nt).collect()
    }

    /// Fewest further actions that can finish the derivation.
    pub fn min_completion(&self) -> usize {
        completion_cost(&self.frontier)
    }

    /// The finished form; `None` until terminal.
    pub fn form(&self) -> Option<LogicalForm> {
        if !self.is_terminal() {
            return None;
        }
        LogicalForm::from_actions(&ActionSequence(self.actions.clone())).ok()
    }
}

fn completion_cost(frontier: &[Slot]) -> usize {
    frontier
        .iter()
        .map(|s| if s.nt == NonTerminal::Start { 2 } else { 1 })
        .sum()
}

/// The grammar over one vocabulary, with a length budget.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    vocab: Vocabulary,
    max_actions: usize,
    pruning: bool,
}

impl TransitionSystem {
    pub fn new(vocab: Vocabulary, max_actions: usize, pruning: bool) -> Self {
        TransitionSystem {
            vocab,
            max_actions,
            pruning,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn max_actions(&self) -> usize {
        self.max_actions
    }

    /// Productions for the frontier top that still fit the budget. With
    /// pruning on, `equals` and redundant relation nestings are left out.
    pub fn valid_actions(&self, state: &ParserState) -> Vec<Production> {
        let Some((top, rest)) = state.frontier.split_last() else {
            return Vec::new();
        };
        let fits = |added: usize| state.len() + 1 + completion_cost(rest) + added <= self.max_actions;
        let mut out = Vec::new();
        match top.nt {
            NonTerminal::Start => {
                if fits(1) {
                    out.push(Production::Start);
                }
            }
            NonTerminal::Type(SemanticType::TimeInterval) => {
                if fits(2) {
                    out.push(Production::ApplyFn1);
                }
                if fits(3) {
                    out.push(Production::ApplyFn2);
                }
                if fits(0) {
                    out.extend(self.vocab.labels().map(|l| Production::Constant(l.to_string())));
                }
            }
            NonTerminal::Type(SemanticType::Fn1) => {
                if fits(0) {
                    for g in generation_relations(self.pruning) {
                        let redundant = self.pruning && top.outer.is_some_and(|f| redundant_nesting(f, g));
                        if !redundant {
                            out.push(Production::Relation(g));
                        }
                    }
                }
            }
            NonTerminal::Type(SemanticType::Fn2) => {
                if fits(0) {
                    out.extend(SetOp::ALL.into_iter().map(Production::SetOp));
                }
            }
        }
        out
    }

    pub fn step(&self, state: &ParserState, action: &Production) -> Result<ParserState, DecodeError> {
        if state.is_terminal() {
            return Err(DecodeError::Terminal);
        }
        let valid = self.valid_actions(state);
        if !valid.contains(action) {
            let expected: Vec<String> = valid.iter().map(ToString::to_string).collect();
            return Err(DecodeError::InvalidAction {
                action: action.to_string(),
                expected: expected.join("; "),
            });
        }
        Ok(apply(state, action))
    }
}

fn apply(state: &ParserState, action: &Production) -> ParserState {
    let mut next = state.clone();
    let top = next.frontier.pop().expect("non-terminal state");
    for &nt in action.rhs_nonterminals().iter().rev() {
        let outer = if nt == NonTerminal::FN1 { top.outer } else { None };
        next.frontier.push(Slot { nt, outer });
    }
    if let Production::Relation(g) = action {
        // The argument slot sits right under the function slot.
        if let Some(arg) = next.frontier.last_mut() {
            arg.outer = Some(*g);
        }
    }
    next.actions.push(action.clone());
    next
}

/// What a scorer may look at besides the state.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecodeContext {
    /// Lowercased sentence tokens.
    pub tokens: Vec<String>,
    pub vocabulary: Vocabulary,
    /// Token index of the interval being described.
    #[serde(default)]
    pub focus: Option<usize>,
    /// Token index of each constant's mention.
    #[serde(default)]
    pub positions: BTreeMap<String, usize>,
}

/// Scores one action in one state. Must be deterministic.
pub trait Scorer: Send + Sync {
    fn score(&self, state: &ParserState, action: &Production, ctx: &DecodeContext) -> f64;
}

#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub state: ParserState,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub form: LogicalForm,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub beam_width: usize,
    pub max_actions: usize,
    pub pruning: bool,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            beam_width: 10,
            max_actions: 12,
            pruning: true,
        }
    }
}

/// Completed forms ranked by score, then action length and serialization.
///
/// Finished forms are put in canonical argument order and deduplicated,
/// keeping the best score. An empty result means nothing completed within
/// the budget.
pub fn beam_search(ctx: &DecodeContext, scorer: &dyn Scorer, cfg: &BeamConfig) -> Result<Vec<Decoded>, DecodeError> {
    if cfg.beam_width == 0 {
        return Err(DecodeError::ZeroBeam);
    }
    let system = TransitionSystem::new(ctx.vocabulary.clone(), cfg.max_actions, cfg.pruning);
    let mut live = vec![Hypothesis {
        state: ParserState::initial(),
        score: 0.0,
    }];
    let mut done: BTreeMap<String, Decoded> = BTreeMap::new();
    while !live.is_empty() {
        let mut next = Vec::new();
        for h in &live {
            for action in system.valid_actions(&h.state) {
                let score = h.score + scorer.score(&h.state, &action, ctx);
                let state = apply(&h.state, &action);
                if state.is_terminal() {
                    finish(&state, score, &mut done);
                } else {
                    next.push(Hypothesis { state, score });
                }
            }
        }
        next.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.state.actions.cmp(&b.state.actions))
        });
        next.truncate(cfg.beam_width);
        live = next;
    }
    let mut out: Vec<(String, Decoded)> = done.into_iter().collect();
    out.sort_by(|(sa, a), (sb, b)| rank(a, sa, b, sb));
    Ok(out.into_iter().map(|(_, d)| d).collect())
}

fn rank(a: &Decoded, sa: &str, b: &Decoded, sb: &str) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.form.action_len().cmp(&b.form.action_len()))
        .then_with(|| sa.cmp(sb))
}

fn finish(state: &ParserState, score: f64, done: &mut BTreeMap<String, Decoded>) {
    let Some(form) = state.form() else { return };
    let form = form.canonicalize();
    let key = form.to_string();
    match done.get(&key) {
        Some(d) if d.score >= score => {}
        _ => {
            done.insert(key, Decoded { form, score });
        }
    }
}
