//! TimeML reading and gold extraction.
//!
//! Only EVENT, MAKEINSTANCE, TIMEX3 and TLINK are kept. TLINK endpoints are
//! resolved to instance or timex ids; links that cannot be resolved are
//! dropped with a warning.

mod corpus;
mod gold;
mod text;

use crate::algebra::AllenRelation;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use corpus::{discover, ingest, read_document, Manifest, ManifestEntry};
pub use gold::{gold_denotation, gold_network, GoldLink, GoldNetwork};
pub use text::{segment, Mention, Sentence};

#[derive(Debug, Error)]
pub enum TimeMlError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("unknown relType `{0}`")]
    UnknownRelType(String),
    #[error("unknown anchor `{0}`")]
    UnknownAnchor(String),
    #[error("gold network is inconsistent (first conflicting link: {0}); repair the annotation or its closure before using it as supervision")]
    InconsistentGold(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad corpus pattern: {0}")]
    Pattern(String),
}

/// The closed list of TLINK relation types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelType {
    Before,
    After,
    Ibefore,
    Iafter,
    Includes,
    IsIncluded,
    During,
    DuringInv,
    Simultaneous,
    Identity,
    Begins,
    BegunBy,
    Ends,
    EndedBy,
}

impl RelType {
    pub const ALL: [RelType; 14] = [
        RelType::Before,
        RelType::After,
        RelType::Ibefore,
        RelType::Iafter,
        RelType::Includes,
        RelType::IsIncluded,
        RelType::During,
        RelType::DuringInv,
        RelType::Simultaneous,
        RelType::Identity,
        RelType::Begins,
        RelType::BegunBy,
        RelType::Ends,
        RelType::EndedBy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelType::Before => "BEFORE",
            RelType::After => "AFTER",
            RelType::Ibefore => "IBEFORE",
            RelType::Iafter => "IAFTER",
            RelType::Includes => "INCLUDES",
            RelType::IsIncluded => "IS_INCLUDED",
            RelType::During => "DURING",
            RelType::DuringInv => "DURING_INV",
            RelType::Simultaneous => "SIMULTANEOUS",
            RelType::Identity => "IDENTITY",
            RelType::Begins => "BEGINS",
            RelType::BegunBy => "BEGUN_BY",
            RelType::Ends => "ENDS",
            RelType::EndedBy => "ENDED_BY",
        }
    }

    /// The Allen relation of the link's source to its target.
    pub fn to_allen(self) -> AllenRelation {
        use AllenRelation::*;
        match self {
            RelType::Before => Before,
            RelType::After => After,
            RelType::Ibefore => Meets,
            RelType::Iafter => MetBy,
            RelType::Includes => Contains,
            RelType::IsIncluded => During,
            RelType::During => During,
            RelType::DuringInv => Contains,
            RelType::Simultaneous => Equals,
            RelType::Identity => Equals,
            RelType::Begins => Starts,
            RelType::BegunBy => StartedBy,
            RelType::Ends => Finishes,
            RelType::EndedBy => FinishedBy,
        }
    }
}

impl fmt::Display for RelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelType {
    type Err = TimeMlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelType::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| TimeMlError::UnknownRelType(s.to_string()))
    }
}

/// Map a TimeML relType name onto its Allen relation.
pub fn map_reltype(rel_type: &str) -> Result<AllenRelation, TimeMlError> {
    rel_type.parse::<RelType>().map(RelType::to_allen)
}

/// Byte range in the document text.
pub type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub eid: String,
    pub text: String,
    pub class: String,
    pub span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub eiid: String,
    pub eid: String,
    /// Tense, aspect, polarity and the like, kept verbatim.
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timex {
    pub tid: String,
    pub text: String,
    #[serde(rename = "type")]
    pub timex_type: String,
    pub value: String,
    /// `None` for timexes outside the text body, such as the creation time.
    pub span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TLink {
    pub lid: String,
    pub source: String,
    pub target: String,
    pub rel_type: RelType,
}

impl TLink {
    pub fn relation(&self) -> AllenRelation {
        self.rel_type.to_allen()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    DanglingEndpoint { lid: String, id: String },
    SelfLink { lid: String },
    UnknownRelType { lid: String, value: String },
    MissingAttribute { element: String, attribute: String },
    UnknownEvent { eiid: String, eid: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DanglingEndpoint { lid, id } => write!(f, "TLINK {lid}: unresolvable endpoint `{id}`, dropped"),
            Warning::SelfLink { lid } => write!(f, "TLINK {lid}: source equals target, dropped"),
            Warning::UnknownRelType { lid, value } => write!(f, "TLINK {lid}: unknown relType `{value}`, dropped"),
            Warning::MissingAttribute { element, attribute } => {
                write!(f, "{element} without `{attribute}`, skipped")
            }
            Warning::UnknownEvent { eiid, eid } => {
                write!(f, "MAKEINSTANCE {eiid}: unknown event `{eid}`, skipped")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeMLDocument {
    pub doc_id: String,
    pub text: String,
    pub events: Vec<Event>,
    pub instances: Vec<Instance>,
    pub timexes: Vec<Timex>,
    pub tlinks: Vec<TLink>,
    pub warnings: Vec<Warning>,
}

impl TimeMLDocument {
    pub fn event(&self, eid: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.eid == eid)
    }

    pub fn instance(&self, eiid: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.eiid == eiid)
    }

    pub fn timex(&self, tid: &str) -> Option<&Timex> {
        self.timexes.iter().find(|t| t.tid == tid)
    }

    /// Instance ids then timex ids, in document order.
    pub fn labels(&self) -> Vec<&str> {
        self.instances
            .iter()
            .map(|i| i.eiid.as_str())
            .chain(self.timexes.iter().map(|t| t.tid.as_str()))
            .collect()
    }

    /// Serialize the extracted structure back to TimeML.
    ///
    /// Event and timex tags are re-inserted into the text at their spans, so
    /// reading the result gives back an equal document (warnings aside).
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" ?>\n<TimeML>\n");
        out += &format!("<DOCID>{}</DOCID>\n", escape(&self.doc_id));
        for t in self.timexes.iter().filter(|t| t.span.is_none()) {
            out += &format!("<DCT>{}</DCT>\n", timex_tag(t));
        }
        let mut marks: Vec<(Span, String)> = Vec::new();
        for e in &self.events {
            if let Some(span) = e.span {
                marks.push((
                    span,
                    format!(
                        "<EVENT eid=\"{}\" class=\"{}\">{}</EVENT>",
                        escape(&e.eid),
                        escape(&e.class),
                        escape(&e.text)
                    ),
                ));
            }
        }
        for t in &self.timexes {
            if let Some(span) = t.span {
                marks.push((span, timex_tag(t)));
            }
        }
        marks.sort_by_key(|(span, _)| span.0);
        out += "<TEXT>";
        let mut at = 0;
        for ((start, end), tag) in marks {
            out += &escape(&self.text[at..start]);
            out += &tag;
            at = end;
        }
        out += &escape(&self.text[at..]);
        out += "</TEXT>\n";
        for e in self.events.iter().filter(|e| e.span.is_none()) {
            out += &format!(
                "<EVENT eid=\"{}\" class=\"{}\">{}</EVENT>\n",
                escape(&e.eid),
                escape(&e.class),
                escape(&e.text)
            );
        }
        for i in &self.instances {
            out += &format!(
                "<MAKEINSTANCE eiid=\"{}\" eventID=\"{}\"",
                escape(&i.eiid),
                escape(&i.eid)
            );
            for (k, v) in &i.attributes {
                out += &format!(" {k}=\"{}\"", escape(v));
            }
            out += "/>\n";
        }
        for l in &self.tlinks {
            let src = if self.timex(&l.source).is_some() {
                "timeID"
            } else {
                "eventInstanceID"
            };
            let dst = if self.timex(&l.target).is_some() {
                "relatedToTime"
            } else {
                "relatedToEventInstance"
            };
            out += &format!(
                "<TLINK lid=\"{}\" relType=\"{}\" {src}=\"{}\" {dst}=\"{}\"/>\n",
                escape(&l.lid),
                l.rel_type,
                escape(&l.source),
                escape(&l.target)
            );
        }
        out += "</TimeML>\n";
        out
    }
}

fn timex_tag(t: &Timex) -> String {
    format!(
        "<TIMEX3 tid=\"{}\" type=\"{}\" value=\"{}\">{}</TIMEX3>",
        escape(&t.tid),
        escape(&t.timex_type),
        escape(&t.value),
        escape(&t.text)
    )
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Parse one TimeML or TempEval-3 document. `fallback_id` names the
/// document when it has no DOCID.
pub fn parse_document_with_id(xml: &str, fallback_id: &str) -> Result<TimeMLDocument, TimeMlError> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let tree = roxmltree::Document::parse_with_options(xml, opts)?;
    let mut doc = TimeMLDocument {
        doc_id: String::new(),
        text: String::new(),
        events: Vec::new(),
        instances: Vec::new(),
        timexes: Vec::new(),
        tlinks: Vec::new(),
        warnings: Vec::new(),
    };
    let mut raw_links = Vec::new();
    collect(tree.root_element(), &mut doc, &mut raw_links, false);
    if doc.doc_id.is_empty() {
        doc.doc_id = fallback_id.to_string();
    }

    let event_ids: HashSet<&str> = doc.events.iter().map(|e| e.eid.as_str()).collect();
    let mut warnings = Vec::new();
    doc.instances.retain(|i| {
        let ok = event_ids.contains(i.eid.as_str());
        if !ok {
            warnings.push(Warning::UnknownEvent {
                eiid: i.eiid.clone(),
                eid: i.eid.clone(),
            });
        }
        ok
    });
    doc.warnings.extend(warnings);

    let mut per_event: HashMap<&str, Vec<&str>> = HashMap::new();
    for i in &doc.instances {
        per_event.entry(i.eid.as_str()).or_default().push(i.eiid.as_str());
    }
    let known: HashSet<&str> = doc.labels().into_iter().collect();
    let resolve = |id: &str| -> Option<String> {
        if known.contains(id) {
            return Some(id.to_string());
        }
        match per_event.get(id).map(Vec::as_slice) {
            Some([only]) => Some(only.to_string()),
            _ => None,
        }
    };
    let mut links = Vec::new();
    let mut warnings = Vec::new();
    for raw in raw_links {
        let rel_type = match raw.rel_type.parse::<RelType>() {
            Ok(r) => r,
            Err(_) => {
                warnings.push(Warning::UnknownRelType {
                    lid: raw.lid,
                    value: raw.rel_type,
                });
                continue;
            }
        };
        let (Some(source), Some(target)) = (resolve(&raw.source), resolve(&raw.target)) else {
            let id = if resolve(&raw.source).is_none() {
                raw.source
            } else {
                raw.target
            };
            warnings.push(Warning::DanglingEndpoint { lid: raw.lid, id });
            continue;
        };
        if source == target {
            warnings.push(Warning::SelfLink { lid: raw.lid });
            continue;
        }
        links.push(TLink {
            lid: raw.lid,
            source,
            target,
            rel_type,
        });
    }
    doc.tlinks = links;
    doc.warnings.extend(warnings);
    Ok(doc)
}

pub fn parse_document(xml: &str) -> Result<TimeMLDocument, TimeMlError> {
    parse_document_with_id(xml, "")
}

struct RawLink {
    lid: String,
    source: String,
    target: String,
    rel_type: String,
}

fn attr(node: roxmltree::Node, name: &str) -> Option<String> {
    node.attribute(name).map(str::to_string)
}

fn collect(node: roxmltree::Node, doc: &mut TimeMLDocument, links: &mut Vec<RawLink>, in_text: bool) {
    for child in node.children() {
        if child.is_text() {
            if in_text {
                doc.text.push_str(child.text().unwrap_or(""));
            }
            continue;
        }
        if !child.is_element() {
            continue;
        }
        let start = doc.text.len();
        let span = |doc: &TimeMLDocument| in_text.then_some((start, doc.text.len()));
        match child.tag_name().name() {
            "DOCID" => doc.doc_id = child.text().unwrap_or("").trim().to_string(),
            "TEXT" => collect(child, doc, links, true),
            "EVENT" => {
                collect(child, doc, links, in_text);
                let Some(eid) = attr(child, "eid") else {
                    doc.warnings.push(missing("EVENT", "eid"));
                    continue;
                };
                let text = element_text(child);
                doc.events.push(Event {
                    eid,
                    text,
                    class: attr(child, "class").unwrap_or_default(),
                    span: span(doc),
                });
            }
            "TIMEX3" => {
                collect(child, doc, links, in_text);
                let Some(tid) = attr(child, "tid") else {
                    doc.warnings.push(missing("TIMEX3", "tid"));
                    continue;
                };
                doc.timexes.push(Timex {
                    tid,
                    text: element_text(child),
                    timex_type: attr(child, "type").unwrap_or_default(),
                    value: attr(child, "value").unwrap_or_default(),
                    span: span(doc),
                });
            }
            "MAKEINSTANCE" => {
                let (Some(eiid), Some(eid)) = (attr(child, "eiid"), attr(child, "eventID")) else {
                    doc.warnings.push(missing("MAKEINSTANCE", "eiid/eventID"));
                    continue;
                };
                let attributes = child
                    .attributes()
                    .filter(|a| a.name() != "eiid" && a.name() != "eventID")
                    .map(|a| (a.name().to_string(), a.value().to_string()))
                    .collect();
                doc.instances.push(Instance { eiid, eid, attributes });
            }
            "TLINK" => {
                let source = attr(child, "eventInstanceID").or_else(|| attr(child, "timeID"));
                let target = attr(child, "relatedToEventInstance").or_else(|| attr(child, "relatedToTime"));
                let lid = attr(child, "lid").unwrap_or_default();
                match (source, target, attr(child, "relType")) {
                    (Some(source), Some(target), Some(rel_type)) => links.push(RawLink {
                        lid,
                        source,
                        target,
                        rel_type,
                    }),
                    _ => doc.warnings.push(missing("TLINK", "endpoint or relType")),
                }
            }
            _ => collect(child, doc, links, in_text),
        }
    }
}

fn missing(element: &str, attribute: &str) -> Warning {
    Warning::MissingAttribute {
        element: element.into(),
        attribute: attribute.into(),
    }
}

fn element_text(node: roxmltree::Node) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect()
}
