use super::{DecodeContext, ParserState, Scorer};
use crate::algebra::AllenRelation;
use crate::lang::Production;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Lexemes that cue a relation function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TriggerTable(pub BTreeMap<String, AllenRelation>);

impl Default for TriggerTable {
    fn default() -> Self {
        use AllenRelation::*;
        let pairs = [
            ("before", Before),
            ("after", After),
            ("while", During),
            ("during", During),
            ("until", Meets),
            ("when", Equals),
        ];
        TriggerTable(pairs.into_iter().map(|(w, r)| (w.to_string(), r)).collect())
    }
}

impl TriggerTable {
    pub fn empty() -> Self {
        TriggerTable(BTreeMap::new())
    }

    /// How many tokens cue `r`.
    pub fn count(&self, tokens: &[String], r: AllenRelation) -> usize {
        tokens.iter().filter(|t| self.0.get(t.as_str()) == Some(&r)).count()
    }
}

/// Rewards relation functions cued in the sentence and constants near the
/// focus.
///
/// A relation earns +1 for each cue token, so a sentence with one "before"
/// pays for one `before` and not for a second. The first constant of a
/// derivation earns +0.5 when it is among those closest to the focus; with
/// no positions known every constant counts as closest.
#[derive(Debug, Clone, Default)]
pub struct LexicalScorer {
    pub triggers: TriggerTable,
}

pub fn lexical_scorer() -> LexicalScorer {
    LexicalScorer::default()
}

impl LexicalScorer {
    pub fn with_triggers(triggers: TriggerTable) -> Self {
        LexicalScorer { triggers }
    }
}

fn is_nearest(label: &str, ctx: &DecodeContext) -> bool {
    let Some(focus) = ctx.focus else { return true };
    let dist = |l: &str| ctx.positions.get(l).map(|p| p.abs_diff(focus));
    let best = ctx.vocabulary.labels().filter_map(dist).min();
    match (best, dist(label)) {
        (None, _) => true,
        (Some(b), Some(d)) => d == b,
        (Some(_), None) => false,
    }
}

impl Scorer for LexicalScorer {
    fn score(&self, state: &ParserState, action: &Production, ctx: &DecodeContext) -> f64 {
        match action {
            Production::Relation(r) => {
                let used = state
                    .actions()
                    .iter()
                    .filter(|a| **a == Production::Relation(*r))
                    .count();
                if used < self.triggers.count(&ctx.tokens, *r) {
                    1.0
                } else {
                    0.0
                }
            }
            Production::Constant(label) => {
                let first = !state.actions().iter().any(|a| matches!(a, Production::Constant(_)));
                if first && is_nearest(label, ctx) {
                    0.5
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }
}

/// Prefers the shortest derivation: every function application costs 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantScorer;

impl Scorer for ConstantScorer {
    fn score(&self, _: &ParserState, action: &Production, _: &DecodeContext) -> f64 {
        match action {
            Production::ApplyFn1 | Production::ApplyFn2 => -1.0,
            _ => 0.0,
        }
    }
}
