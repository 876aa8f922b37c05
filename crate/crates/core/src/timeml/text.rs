//! Sentence splitting and tokenization of the document text.

use super::{Span, TimeMLDocument};
use crate::lang::ConstantKind;
use serde::{Deserialize, Serialize};

/// An instance or timex mentioned in a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub label: String,
    pub kind: ConstantKind,
    /// Index of the first token of the mention.
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub span: Span,
    /// Lowercased tokens.
    pub tokens: Vec<String>,
    /// Mentions in text order.
    pub mentions: Vec<Mention>,
}

/// Split the text into sentences and attach every spanned instance and
/// timex to the sentence holding it.
///
/// Sentences end at `.`, `!` or `?` followed by whitespace, and at blank
/// lines.
pub fn segment(doc: &TimeMLDocument) -> Vec<Sentence> {
    let spans = sentence_spans(&doc.text);
    let mut mentions: Vec<(usize, String, ConstantKind)> = Vec::new();
    for inst in &doc.instances {
        if let Some((start, _)) = doc.event(&inst.eid).and_then(|e| e.span) {
            mentions.push((start, inst.eiid.clone(), ConstantKind::Event));
        }
    }
    for t in &doc.timexes {
        if let Some((start, _)) = t.span {
            mentions.push((start, t.tid.clone(), ConstantKind::Timex));
        }
    }
    mentions.sort_by_key(|m| m.0);

    spans
        .into_iter()
        .map(|(s, e)| {
            let tokens = tokenize(&doc.text[s..e], s);
            let mentions = mentions
                .iter()
                .filter(|(at, _, _)| (s..e).contains(at))
                .map(|(at, label, kind)| Mention {
                    label: label.clone(),
                    kind: *kind,
                    token: tokens
                        .iter()
                        .position(|t| t.1 >= *at)
                        .unwrap_or(tokens.len().saturating_sub(1)),
                })
                .collect();
            Sentence {
                span: (s, e),
                tokens: tokens.into_iter().map(|t| t.0).collect(),
                mentions,
            }
        })
        .filter(|s: &Sentence| !s.tokens.is_empty())
        .collect()
}

fn sentence_spans(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let next = bytes.get(i + 1).copied();
        let end = if matches!(c, b'.' | b'!' | b'?') && next.is_none_or(|n| n.is_ascii_whitespace()) {
            Some(i + 1)
        } else if c == b'\n' && next == Some(b'\n') {
            Some(i)
        } else {
            None
        };
        if let Some(end) = end {
            spans.push((start, end));
            start = end;
        }
        i += 1;
    }
    if start < text.len() {
        spans.push((start, text.len()));
    }
    spans
}

/// Word runs and single punctuation marks, with their absolute byte offsets.
fn tokenize(text: &str, offset: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut word: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() || c == '\'' || (c == '-' && word.is_some()) {
            word.get_or_insert(i);
            continue;
        }
        if let Some(w) = word.take() {
            out.push((text[w..i].to_lowercase(), offset + w));
        }
        if !c.is_whitespace() {
            out.push((c.to_string(), offset + i));
        }
    }
    if let Some(w) = word {
        out.push((text[w..].to_lowercase(), offset + w));
    }
    out
}
