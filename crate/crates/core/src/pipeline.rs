//! Decode, execute and score a whole corpus.
//!
//! Every event instance is an anchor once. Its sentence's other mentions
//! form the vocabulary, the decoder picks a form describing the anchor, and
//! the executed denotation gives the anchor's relation to each mention. A
//! pair keeps the first single-relation prediction it receives, or else the
//! first informative one.

use crate::algebra::RelationSet;
use crate::decoder::{beam_search, BeamConfig, ConstantScorer, DecodeContext, LexicalScorer, Scorer, TriggerTable};
use crate::dpd::MatchMode;
use crate::eval::{evaluate, write_predictions, DocPredictions, EvalError, EvalOptions, EvalReport, PredictedRelation};
use crate::executor::{execute_with_network, ExecutionContext};
use crate::lang::{is_valid_label, Vocabulary};
use crate::network::RelationGraph;
use crate::timeml::{self, segment, TimeMLDocument, TimeMlError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    TimeMl(#[from] TimeMlError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    #[default]
    Lexical,
    /// Always the shortest derivation, a bare constant.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_actions: usize,
    pub beam: usize,
    pub pruning: bool,
    pub match_mode: MatchMode,
    pub closure: bool,
    pub scorer: ScorerKind,
    pub triggers: TriggerTable,
    /// Worker threads; 0 lets the pool decide. Does not affect output.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_actions: 12,
            beam: 10,
            pruning: true,
            match_mode: MatchMode::Strict,
            closure: false,
            scorer: ScorerKind::Lexical,
            triggers: TriggerTable::default(),
            jobs: 0,
        }
    }
}

impl RunConfig {
    fn scorer(&self) -> Box<dyn Scorer> {
        match self.scorer {
            ScorerKind::Lexical => Box::new(LexicalScorer::with_triggers(self.triggers.clone())),
            ScorerKind::Constant => Box::new(ConstantScorer),
        }
    }

    fn beam(&self) -> BeamConfig {
        BeamConfig {
            beam_width: self.beam,
            max_actions: self.max_actions,
            pruning: self.pruning,
        }
    }
}

/// The decoding of one anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorDecode {
    pub anchor: String,
    pub vocabulary: Vec<String>,
    pub form: Option<String>,
    pub score: Option<f64>,
    pub graph: Option<RelationGraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRun {
    pub file: String,
    pub doc: Option<String>,
    pub anchors: Vec<AnchorDecode>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: RunConfig,
    pub failed: Vec<DocRun>,
    pub evaluation: EvalReport,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub predictions: Vec<DocPredictions>,
    pub runs: Vec<DocRun>,
    pub report: PipelineReport,
}

/// Decode every anchor of `doc` and collect pairwise predictions.
pub fn predict_document(doc: &TimeMLDocument, cfg: &RunConfig) -> (DocPredictions, Vec<AnchorDecode>) {
    let scorer = cfg.scorer();
    let beam = cfg.beam();
    let mut anchors = Vec::new();
    let mut relations: Vec<PredictedRelation> = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();

    for sentence in segment(doc) {
        for anchor in &sentence.mentions {
            if anchor.kind != crate::lang::ConstantKind::Event {
                continue;
            }
            let others: Vec<_> = sentence
                .mentions
                .iter()
                .filter(|m| m.label != anchor.label && is_valid_label(&m.label))
                .collect();
            let mut labels = Vec::new();
            let mut entries = Vec::new();
            for m in &others {
                if !labels.contains(&m.label) {
                    labels.push(m.label.clone());
                    entries.push((m.label.clone(), m.kind));
                }
            }
            let mut decode = AnchorDecode {
                anchor: anchor.label.clone(),
                vocabulary: labels.clone(),
                form: None,
                score: None,
                graph: None,
            };
            let Ok(vocabulary) = Vocabulary::new(entries) else {
                anchors.push(decode);
                continue;
            };
            if vocabulary.is_empty() {
                anchors.push(decode);
                continue;
            }
            let ctx = DecodeContext {
                tokens: sentence.tokens.clone(),
                vocabulary: vocabulary.clone(),
                focus: Some(anchor.token),
                positions: others.iter().map(|m| (m.label.clone(), m.token)).collect(),
            };
            let best = beam_search(&ctx, scorer.as_ref(), &beam)
                .ok()
                .and_then(|d| d.into_iter().next());
            if let Some(best) = best {
                let exec_ctx = ExecutionContext::from_vocabulary(vocabulary);
                if let Ok(exec) = execute_with_network(&best.form, &exec_ctx) {
                    for (label, set) in &exec.denotation.relations {
                        if set.is_full() || set.is_empty() {
                            continue;
                        }
                        offer(&mut relations, &mut seen, &anchor.label, label, *set);
                    }
                    decode.graph = Some(exec.graph());
                }
                decode.form = Some(best.form.to_string());
                decode.score = Some(best.score);
            }
            anchors.push(decode);
        }
    }
    (
        DocPredictions {
            doc: doc.doc_id.clone(),
            relations,
        },
        anchors,
    )
}

fn offer(
    relations: &mut Vec<PredictedRelation>,
    seen: &mut HashMap<(String, String), usize>,
    source: &str,
    target: &str,
    set: RelationSet,
) {
    let key = if source <= target {
        (source.to_string(), target.to_string())
    } else {
        (target.to_string(), source.to_string())
    };
    let candidate = PredictedRelation {
        source: source.to_string(),
        target: target.to_string(),
        set,
    };
    match seen.get(&key) {
        None => {
            seen.insert(key, relations.len());
            relations.push(candidate);
        }
        Some(&k) if relations[k].set.len() > 1 && set.len() == 1 => relations[k] = candidate,
        Some(_) => {}
    }
}

/// Run the whole pipeline over `files` without touching the filesystem
/// beyond reading them.
pub fn run_pipeline(files: &[PathBuf], cfg: &RunConfig) -> Result<PipelineOutput, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let results: Vec<(DocRun, Option<(TimeMLDocument, DocPredictions)>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let file = path
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                match timeml::read_document(path) {
                    Ok(doc) => {
                        let (preds, anchors) = predict_document(&doc, cfg);
                        let run = DocRun {
                            file,
                            doc: Some(doc.doc_id.clone()),
                            anchors,
                            error: None,
                        };
                        (run, Some((doc, preds)))
                    }
                    Err(e) => (
                        DocRun {
                            file,
                            doc: None,
                            anchors: Vec::new(),
                            error: Some(e.to_string()),
                        },
                        None,
                    ),
                }
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut docs = Vec::new();
    let mut predictions = Vec::new();
    for (run, ok) in results {
        if let Some((doc, preds)) = ok {
            docs.push(doc);
            predictions.push(preds);
        }
        runs.push(run);
    }
    let opts = EvalOptions {
        mode: cfg.match_mode,
        closure: cfg.closure,
    };
    let evaluation = evaluate(&docs, &predictions, &opts);
    let failed = runs.iter().filter(|r| r.error.is_some()).cloned().collect();
    Ok(PipelineOutput {
        predictions,
        runs,
        report: PipelineReport {
            config: cfg.clone(),
            failed,
            evaluation,
        },
    })
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Run over a corpus and write `predictions.jsonl`, `report.json`,
/// `report.txt`, `graphs/<doc>.json` and `timing.json` under `out`.
pub fn cmd_pipeline(corpus: &Path, out: &Path, cfg: &RunConfig) -> Result<PipelineOutput, PipelineError> {
    let started = Instant::now();
    let files = timeml::discover(corpus, None)?;
    let output = run_pipeline(&files, cfg)?;
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| PipelineError::Io { path, source }
    };
    let graphs = out.join("graphs");
    std::fs::create_dir_all(&graphs).map_err(io(&graphs))?;
    write_predictions(&out.join("predictions.jsonl"), &output.predictions)?;
    let write = |name: &Path, text: String| std::fs::write(name, text).map_err(io(name));
    write(
        &out.join("report.json"),
        serde_json::to_string_pretty(&output.report).expect("plain data") + "\n",
    )?;
    write(&out.join("report.txt"), output.report.evaluation.to_table())?;
    for run in output.runs.iter().filter(|r| r.doc.is_some()) {
        let name = graphs.join(format!("{}.json", file_safe(run.doc.as_deref().unwrap_or_default())));
        write(&name, serde_json::to_string_pretty(run).expect("plain data") + "\n")?;
    }
    let timing = serde_json::json!({ "elapsed_ms": started.elapsed().as_millis() as u64 });
    write(&out.join("timing.json"), timing.to_string() + "\n")?;
    Ok(output)
}
