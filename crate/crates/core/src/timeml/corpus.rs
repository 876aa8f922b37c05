use super::{gold_network, parse_document_with_id, TimeMLDocument, TimeMlError};
use crate::network::{ConsistencyStatus, RelationGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Files named by `path`: the file itself, the `pattern` matches inside a
/// directory (default `*.tml`), or the matches of `path` read as a glob.
/// Sorted by path.
pub fn discover(path: &Path, pattern: Option<&str>) -> Result<Vec<PathBuf>, TimeMlError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let full = if path.is_dir() {
        path.join(pattern.unwrap_or("*.tml")).to_string_lossy().into_owned()
    } else {
        path.to_string_lossy().into_owned()
    };
    let mut out: Vec<PathBuf> = glob::glob(&full)
        .map_err(|e| TimeMlError::Pattern(e.to_string()))?
        .filter_map(Result::ok)
        .filter(|p| p.is_file())
        .collect();
    if out.is_empty() && !path.is_dir() {
        return Err(TimeMlError::Io {
            path: full,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such corpus"),
        });
    }
    out.sort();
    Ok(out)
}

/// Read and parse one file; the file stem names documents without DOCID.
pub fn read_document(path: &Path) -> Result<TimeMLDocument, TimeMlError> {
    let xml = std::fs::read_to_string(path).map_err(|source| TimeMlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_document_with_id(&xml, &stem)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub doc: Option<String>,
    pub events: usize,
    pub instances: usize,
    pub timexes: usize,
    pub links: usize,
    pub warnings: Vec<String>,
    pub status: Option<ConsistencyStatus>,
    pub conflict: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tag: String,
    pub documents: usize,
    pub failed: usize,
    pub events: usize,
    pub instances: usize,
    pub timexes: usize,
    pub links: usize,
    pub warnings: usize,
    pub consistent: usize,
    pub inconsistent: usize,
    pub entries: Vec<ManifestEntry>,
}

/// Parse every file and build its gold network. Returns the manifest and
/// the gold relation graph of each parsed document.
pub fn ingest(files: &[PathBuf], tag: &str) -> (Manifest, Vec<(String, RelationGraph)>) {
    let results: Vec<(ManifestEntry, Option<(String, RelationGraph)>)> = files
        .par_iter()
        .map(|path| {
            let file = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match read_document(path) {
                Ok(doc) => {
                    let gold = gold_network(&doc);
                    let entry = ManifestEntry {
                        file,
                        doc: Some(doc.doc_id.clone()),
                        events: doc.events.len(),
                        instances: doc.instances.len(),
                        timexes: doc.timexes.len(),
                        links: doc.tlinks.len(),
                        warnings: doc.warnings.iter().map(ToString::to_string).collect(),
                        status: Some(gold.status()),
                        conflict: gold.conflict.as_ref().map(|c| c.1.clone()),
                        error: None,
                    };
                    (entry, Some((doc.doc_id, gold.network.to_graph())))
                }
                Err(e) => (
                    ManifestEntry {
                        file,
                        doc: None,
                        events: 0,
                        instances: 0,
                        timexes: 0,
                        links: 0,
                        warnings: Vec::new(),
                        status: None,
                        conflict: None,
                        error: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();

    let mut manifest = Manifest {
        tag: tag.to_string(),
        documents: 0,
        failed: 0,
        events: 0,
        instances: 0,
        timexes: 0,
        links: 0,
        warnings: 0,
        consistent: 0,
        inconsistent: 0,
        entries: Vec::new(),
    };
    let mut graphs = Vec::new();
    for (entry, graph) in results {
        if entry.error.is_some() {
            manifest.failed += 1;
        } else {
            manifest.documents += 1;
        }
        manifest.events += entry.events;
        manifest.instances += entry.instances;
        manifest.timexes += entry.timexes;
        manifest.links += entry.links;
        manifest.warnings += entry.warnings.len();
        match entry.status {
            Some(ConsistencyStatus::Consistent) => manifest.consistent += 1,
            Some(ConsistencyStatus::Inconsistent) => manifest.inconsistent += 1,
            _ => {}
        }
        manifest.entries.push(entry);
        graphs.extend(graph);
    }
    (manifest, graphs)
}
