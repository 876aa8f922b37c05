//! Production rules and the preorder linearization of derivations.

use super::{is_valid_label, LangError, LogicalForm, SemanticType, SetOp};
use crate::algebra::AllenRelation;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NonTerminal {
    Start,
    Type(SemanticType),
}

impl NonTerminal {
    pub const TIME_INTERVAL: NonTerminal = NonTerminal::Type(SemanticType::TimeInterval);
    pub const FN1: NonTerminal = NonTerminal::Type(SemanticType::Fn1);
    pub const FN2: NonTerminal = NonTerminal::Type(SemanticType::Fn2);
}

impl fmt::Display for NonTerminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonTerminal::Start => f.write_str("START"),
            NonTerminal::Type(t) => t.fmt(f),
        }
    }
}

/// One grammar rule. Constants are the only context-dependent rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Production {
    /// `START -> TimeInterval`
    Start,
    /// `TimeInterval -> [Fn1, TimeInterval]`
    ApplyFn1,
    /// `TimeInterval -> [Fn2, TimeInterval, TimeInterval]`
    ApplyFn2,
    /// `Fn1 -> <relation>`
    Relation(AllenRelation),
    /// `Fn2 -> union | intersection`
    SetOp(SetOp),
    /// `TimeInterval -> <constant>`
    Constant(String),
}

const START_RHS: [NonTerminal; 1] = [NonTerminal::TIME_INTERVAL];
const FN1_RHS: [NonTerminal; 2] = [NonTerminal::FN1, NonTerminal::TIME_INTERVAL];
const FN2_RHS: [NonTerminal; 3] = [NonTerminal::FN2, NonTerminal::TIME_INTERVAL, NonTerminal::TIME_INTERVAL];

impl Production {
    pub fn lhs(&self) -> NonTerminal {
        match self {
            Production::Start => NonTerminal::Start,
            Production::ApplyFn1 | Production::ApplyFn2 | Production::Constant(_) => NonTerminal::TIME_INTERVAL,
            Production::Relation(_) => NonTerminal::FN1,
            Production::SetOp(_) => NonTerminal::FN2,
        }
    }

    /// Nonterminals introduced by the rule, left to right.
    pub fn rhs_nonterminals(&self) -> &'static [NonTerminal] {
        match self {
            Production::Start => &START_RHS,
            Production::ApplyFn1 => &FN1_RHS,
            Production::ApplyFn2 => &FN2_RHS,
            _ => &[],
        }
    }

    /// The fixed rules of the grammar (everything but constants).
    pub fn fixed_inventory() -> Vec<Production> {
        let mut out = vec![Production::Start, Production::ApplyFn1, Production::ApplyFn2];
        out.extend(AllenRelation::ALL.into_iter().map(Production::Relation));
        out.extend(SetOp::ALL.into_iter().map(Production::SetOp));
        out
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> ", self.lhs())?;
        match self {
            Production::Start | Production::ApplyFn1 | Production::ApplyFn2 => {
                let rhs = self.rhs_nonterminals();
                if rhs.len() == 1 {
                    write!(f, "{}", rhs[0])
                } else {
                    let parts: Vec<String> = rhs.iter().map(|n| n.to_string()).collect();
                    write!(f, "[{}]", parts.join(", "))
                }
            }
            Production::Relation(r) => write!(f, "{r}"),
            Production::SetOp(op) => write!(f, "{op}"),
            Production::Constant(c) => f.write_str(c),
        }
    }
}

impl FromStr for Production {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, LangError> {
        let malformed = || LangError::MalformedAction(s.to_string());
        let (lhs, rhs) = s.split_once("->").ok_or_else(malformed)?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        let prod = match (lhs, rhs) {
            ("START", "TimeInterval") => Production::Start,
            ("TimeInterval", "[Fn1, TimeInterval]") => Production::ApplyFn1,
            ("TimeInterval", "[Fn2, TimeInterval, TimeInterval]") => Production::ApplyFn2,
            ("Fn1", name) => Production::Relation(name.parse().map_err(|_| malformed())?),
            ("Fn2", name) => Production::SetOp(name.parse().map_err(|_| malformed())?),
            ("TimeInterval", label) if is_valid_label(label) => Production::Constant(label.to_string()),
            _ => return Err(malformed()),
        };
        Ok(prod)
    }
}

impl Serialize for Production {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Production {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Productions in preorder, starting with `START -> TimeInterval`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSequence(pub Vec<Production>);

impl ActionSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Production> {
        self.0.iter()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|p| p.to_string()).collect()
    }
}

pub(super) fn to_actions(lf: &LogicalForm) -> ActionSequence {
    fn emit(lf: &LogicalForm, out: &mut Vec<Production>) {
        match lf {
            LogicalForm::Constant(c) => out.push(Production::Constant(c.clone())),
            LogicalForm::Relation(r, arg) => {
                out.push(Production::ApplyFn1);
                out.push(Production::Relation(*r));
                emit(arg, out);
            }
            LogicalForm::SetOp(op, l, r) => {
                out.push(Production::ApplyFn2);
                out.push(Production::SetOp(*op));
                emit(l, out);
                emit(r, out);
            }
        }
    }
    let mut out = vec![Production::Start];
    emit(lf, &mut out);
    ActionSequence(out)
}

pub(super) fn from_actions(seq: &ActionSequence) -> Result<LogicalForm, LangError> {
    let mut replay = Replay { actions: &seq.0, at: 0 };
    replay.expect(NonTerminal::Start, &[])?;
    let form = replay.interval(&[])?;
    if replay.at < seq.0.len() {
        return Err(LangError::Trailing {
            extra: seq.0.len() - replay.at,
        });
    }
    Ok(form)
}

struct Replay<'a> {
    actions: &'a [Production],
    at: usize,
}

impl<'a> Replay<'a> {
    /// Takes the next action, which must expand `expected`. `pending` lists
    /// the nonterminals still waiting above this one, for error reporting.
    fn expect(&mut self, expected: NonTerminal, pending: &[NonTerminal]) -> Result<&'a Production, LangError> {
        let Some(action) = self.actions.get(self.at) else {
            let mut pending_all = vec![expected];
            pending_all.extend(pending.iter().rev());
            return Err(LangError::Dangling {
                pending: pending_all,
                consumed: self.at,
            });
        };
        if action.lhs() != expected {
            return Err(LangError::Inapplicable {
                index: self.at,
                action: action.to_string(),
                expected,
            });
        }
        self.at += 1;
        Ok(action)
    }

    fn interval(&mut self, pending: &[NonTerminal]) -> Result<LogicalForm, LangError> {
        match self.expect(NonTerminal::TIME_INTERVAL, pending)? {
            Production::Constant(c) => Ok(LogicalForm::Constant(c.clone())),
            Production::ApplyFn1 => {
                let mut inner = pending.to_vec();
                inner.push(NonTerminal::TIME_INTERVAL);
                let Production::Relation(r) = self.expect(NonTerminal::FN1, &inner)? else {
                    unreachable!("Fn1 only expands to relations")
                };
                let r = *r;
                let arg = self.interval(pending)?;
                Ok(LogicalForm::relation(r, arg))
            }
            Production::ApplyFn2 => {
                let mut inner = pending.to_vec();
                inner.push(NonTerminal::TIME_INTERVAL);
                inner.push(NonTerminal::TIME_INTERVAL);
                let Production::SetOp(op) = self.expect(NonTerminal::FN2, &inner)? else {
                    unreachable!("Fn2 only expands to set operations")
                };
                let op = *op;
                let mut right_pending = pending.to_vec();
                right_pending.push(NonTerminal::TIME_INTERVAL);
                let l = self.interval(&right_pending)?;
                let r = self.interval(pending)?;
                Ok(LogicalForm::set_op(op, l, r))
            }
            other => unreachable!("lhs checked: {other}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AllenRelation::*;

    fn strings(lf: &str) -> Vec<String> {
        lf.parse::<LogicalForm>().unwrap().to_actions().to_strings()
    }

    #[test]
    fn linearization_examples() {
        assert_eq!(strings("ei1"), ["START -> TimeInterval", "TimeInterval -> ei1"]);
        assert_eq!(
            strings("(before ei1)"),
            [
                "START -> TimeInterval",
                "TimeInterval -> [Fn1, TimeInterval]",
                "Fn1 -> before",
                "TimeInterval -> ei1"
            ]
        );
        assert_eq!(
            strings("(union ei1 ei2)")[1..3],
            ["TimeInterval -> [Fn2, TimeInterval, TimeInterval]", "Fn2 -> union"]
        );
    }

    #[test]
    fn replay_inverts_linearization() {
        for text in ["ei1", "(before ei1)", "(intersection (before ei1) (after (meets t3)))"] {
            let lf: LogicalForm = text.parse().unwrap();
            assert_eq!(LogicalForm::from_actions(&lf.to_actions()).unwrap(), lf);
        }
    }

    #[test]
    fn truncated_sequence_dangles() {
        let lf: LogicalForm = "(union (before ei1) ei2)".parse().unwrap();
        let mut seq = lf.to_actions();
        seq.0.truncate(4);
        let err = LogicalForm::from_actions(&seq).unwrap_err();
        assert_eq!(
            err,
            LangError::Dangling {
                pending: vec![NonTerminal::FN1, NonTerminal::TIME_INTERVAL, NonTerminal::TIME_INTERVAL],
                consumed: 4
            }
        );
        assert!(matches!(
            LogicalForm::from_actions(&ActionSequence::default()),
            Err(LangError::Dangling { consumed: 0, .. })
        ));
    }

    #[test]
    fn inapplicable_production() {
        let seq = ActionSequence(vec![
            Production::Start,
            Production::ApplyFn1,
            Production::SetOp(SetOp::Union),
        ]);
        assert_eq!(
            LogicalForm::from_actions(&seq),
            Err(LangError::Inapplicable {
                index: 2,
                action: "Fn2 -> union".into(),
                expected: NonTerminal::FN1
            })
        );
        let seq = ActionSequence(vec![Production::Constant("ei1".into())]);
        assert!(matches!(
            LogicalForm::from_actions(&seq),
            Err(LangError::Inapplicable { index: 0, .. })
        ));
    }

    #[test]
    fn trailing_actions_rejected() {
        let mut seq = LogicalForm::constant("ei1").to_actions();
        seq.0.push(Production::Constant("ei2".into()));
        assert_eq!(LogicalForm::from_actions(&seq), Err(LangError::Trailing { extra: 1 }));
    }

    #[test]
    fn action_strings_parse_back() {
        let mut all = Production::fixed_inventory();
        all.push(Production::Constant("t7".into()));
        for p in all {
            assert_eq!(p.to_string().parse::<Production>().unwrap(), p);
        }
        assert!("Fn1 -> whenever".parse::<Production>().is_err());
        assert!("nonsense".parse::<Production>().is_err());
        let seq = LogicalForm::relation(After, LogicalForm::constant("ei2")).to_actions();
        let json = serde_json::to_string(&seq).unwrap();
        assert_eq!(serde_json::from_str::<ActionSequence>(&json).unwrap(), seq);
    }
}
