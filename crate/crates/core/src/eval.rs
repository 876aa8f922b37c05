//! Relation-only recall against TimeML gold links.

use crate::algebra::RelationSet;
use crate::dpd::MatchMode;
use crate::network::ConsistencyStatus;
use crate::timeml::{self, GoldLink, TimeMLDocument, TimeMlError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    TimeMl(#[from] TimeMlError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Predictions { path: String, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedRelation {
    pub source: String,
    pub target: String,
    pub set: RelationSet,
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocPredictions {
    pub doc: String,
    pub relations: Vec<PredictedRelation>,
}

pub fn read_predictions(path: &Path) -> Result<Vec<DocPredictions>, EvalError> {
    let io = |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| EvalError::Predictions {
            path: path.display().to_string(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_predictions(path: &Path, preds: &[DocPredictions]) -> Result<(), EvalError> {
    let io = |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for p in preds {
        let line = serde_json::to_string(p).expect("plain data");
        writeln!(file, "{line}").map_err(io)?;
    }
    file.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalOptions {
    pub mode: MatchMode,
    /// Score consistent documents against every singleton pair of the
    /// propagated gold network instead of the raw links.
    pub closure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocReport {
    pub doc: String,
    pub status: ConsistencyStatus,
    pub gold: usize,
    pub predicted: usize,
    pub matched: usize,
    /// Predicted pairs with no gold link in either direction.
    pub predicted_not_gold: usize,
    pub recall: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub documents: usize,
    pub gold: usize,
    pub predicted: usize,
    pub matched: usize,
    pub predicted_not_gold: usize,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: MatchMode,
    pub closure: bool,
    pub corpus: Totals,
    pub documents: Vec<DocReport>,
    pub warnings: Vec<String>,
}

fn recall(matched: usize, gold: usize) -> Option<f64> {
    (gold > 0).then(|| matched as f64 / gold as f64)
}

/// Whether `set`, predicted for `(s, t)`, gets gold `(s, t, r)` right.
fn hit(set: RelationSet, gold: &GoldLink, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Strict => set == RelationSet::single(gold.relation),
        MatchMode::Lax => set.contains(gold.relation),
    }
}

/// Gold pairs scored for `doc` under `opts`.
pub fn gold_pairs(doc: &TimeMLDocument, opts: &EvalOptions) -> (ConsistencyStatus, Vec<GoldLink>) {
    let net = timeml::gold_network(doc);
    let status = net.status();
    if opts.closure && status == ConsistencyStatus::Consistent {
        (status, net.singleton_pairs())
    } else {
        (status, doc.gold_links())
    }
}

pub fn evaluate_document(doc: &TimeMLDocument, preds: &[PredictedRelation], opts: &EvalOptions) -> DocReport {
    let (status, gold) = gold_pairs(doc, opts);
    let mut by_pair: HashMap<(&str, &str), RelationSet> = HashMap::new();
    let mut warnings = Vec::new();
    for p in preds {
        if by_pair.insert((&p.source, &p.target), p.set).is_some() {
            warnings.push(format!(
                "duplicate prediction for ({}, {}); the last one is used",
                p.source, p.target
            ));
        }
    }
    let matched = gold
        .iter()
        .filter(|g| {
            if let Some(set) = by_pair.get(&(g.source.as_str(), g.target.as_str())) {
                hit(*set, g, opts.mode)
            } else if let Some(set) = by_pair.get(&(g.target.as_str(), g.source.as_str())) {
                hit(set.converse(), g, opts.mode)
            } else {
                false
            }
        })
        .count();
    let gold_keys: HashSet<(&str, &str)> = gold
        .iter()
        .flat_map(|g| {
            [
                (g.source.as_str(), g.target.as_str()),
                (g.target.as_str(), g.source.as_str()),
            ]
        })
        .collect();
    let predicted_not_gold = by_pair.keys().filter(|k| !gold_keys.contains(*k)).count();
    if status == ConsistencyStatus::Inconsistent {
        warnings.push("gold links are inconsistent; scored on the raw links".to_string());
    }
    DocReport {
        doc: doc.doc_id.clone(),
        status,
        gold: gold.len(),
        predicted: by_pair.len(),
        matched,
        predicted_not_gold,
        recall: recall(matched, gold.len()),
        warnings,
    }
}

/// Score `predictions` against `docs`. Documents without predictions count
/// all their gold links as unmatched.
pub fn evaluate(docs: &[TimeMLDocument], predictions: &[DocPredictions], opts: &EvalOptions) -> EvalReport {
    let mut by_doc: BTreeMap<&str, Vec<PredictedRelation>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for p in predictions {
        let entry = by_doc.entry(p.doc.as_str()).or_default();
        if !entry.is_empty() {
            warnings.push(format!("several prediction records for document `{}`; merged", p.doc));
        }
        entry.extend(p.relations.iter().cloned());
    }
    let known: HashSet<&str> = docs.iter().map(|d| d.doc_id.as_str()).collect();
    for doc in by_doc.keys() {
        if !known.contains(doc) {
            warnings.push(format!("predictions for unknown document `{doc}` ignored"));
        }
    }
    let mut documents = Vec::new();
    for doc in docs {
        let preds = by_doc.get(doc.doc_id.as_str());
        let mut report = evaluate_document(doc, preds.map(Vec::as_slice).unwrap_or(&[]), opts);
        if preds.is_none() {
            report.warnings.push("no predictions".to_string());
        }
        documents.push(report);
    }
    let sum = |f: fn(&DocReport) -> usize| documents.iter().map(f).sum::<usize>();
    let (gold, matched) = (sum(|d| d.gold), sum(|d| d.matched));
    EvalReport {
        mode: opts.mode,
        closure: opts.closure,
        corpus: Totals {
            documents: documents.len(),
            gold,
            predicted: sum(|d| d.predicted),
            matched,
            predicted_not_gold: sum(|d| d.predicted_not_gold),
            recall: recall(matched, gold),
        },
        documents,
        warnings,
    }
}

/// Read the gold corpus and the predictions file, then score.
pub fn cmd_eval(corpus: &Path, predictions: &Path, opts: &EvalOptions) -> Result<EvalReport, EvalError> {
    let files = timeml::discover(corpus, None)?;
    let mut docs = Vec::new();
    let mut warnings = Vec::new();
    for f in &files {
        match timeml::read_document(f) {
            Ok(d) => docs.push(d),
            Err(e) => warnings.push(format!("{}: {e}", f.display())),
        }
    }
    let preds = read_predictions(predictions)?;
    let mut report = evaluate(&docs, &preds, opts);
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    Ok(report)
}

fn fmt_recall(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |r| format!("{r:.3}"))
}

impl EvalReport {
    /// Aligned plain-text table, one row per document plus a total.
    pub fn to_table(&self) -> String {
        let header = ["doc", "status", "gold", "predicted", "matched", "recall"];
        let mut rows: Vec<[String; 6]> = self
            .documents
            .iter()
            .map(|d| {
                [
                    d.doc.clone(),
                    d.status.to_string(),
                    d.gold.to_string(),
                    d.predicted.to_string(),
                    d.matched.to_string(),
                    fmt_recall(d.recall),
                ]
            })
            .collect();
        let c = &self.corpus;
        rows.push([
            "TOTAL".into(),
            String::new(),
            c.gold.to_string(),
            c.predicted.to_string(),
            c.matched.to_string(),
            fmt_recall(c.recall),
        ]);
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &[&str]| {
            let mut parts = Vec::new();
            for (k, cell) in cells.iter().enumerate() {
                if k < 2 {
                    parts.push(format!("{cell:<w$}", w = widths[k]));
                } else {
                    parts.push(format!("{cell:>w$}", w = widths[k]));
                }
            }
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&header);
        for row in &rows {
            line(&row.each_ref().map(String::as_str));
        }
        let mode = match self.mode {
            MatchMode::Strict => "strict",
            MatchMode::Lax => "lax",
        };
        let _ = writeln!(out, "mode: {mode}{}", if self.closure { ", closure" } else { "" });
        out
    }
}

/// Predictions that restate every gold link of `docs`.
pub fn gold_echo(docs: &[TimeMLDocument]) -> Vec<DocPredictions> {
    docs.iter()
        .map(|d| DocPredictions {
            doc: d.doc_id.clone(),
            relations: d
                .gold_links()
                .into_iter()
                .map(|g| PredictedRelation {
                    source: g.source,
                    target: g.target,
                    set: g.relation.into(),
                })
                .collect(),
        })
        .collect()
}
