use super::{TimeMLDocument, TimeMlError};
use crate::algebra::{AllenRelation, RelationSet};
use crate::dpd::GoldDenotation;
use crate::network::{ConsistencyStatus, ConstraintNetwork, NodeKind};
use serde::{Deserialize, Serialize};

/// A TLINK mapped to the Allen relation of its source to its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLink {
    pub lid: String,
    pub source: String,
    pub target: String,
    pub relation: AllenRelation,
}

impl TimeMLDocument {
    pub fn gold_links(&self) -> Vec<GoldLink> {
        self.tlinks
            .iter()
            .map(|l| GoldLink {
                lid: l.lid.clone(),
                source: l.source.clone(),
                target: l.target.clone(),
                relation: l.relation(),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GoldNetwork {
    pub network: ConstraintNetwork,
    /// Position and lid of the first link whose assertion made the network
    /// inconsistent.
    pub conflict: Option<(usize, String)>,
}

impl GoldNetwork {
    pub fn status(&self) -> ConsistencyStatus {
        self.network.status()
    }

    /// Every pair `(i, j)`, `i` before `j` in node order, whose propagated
    /// label is a single relation. Empty when inconsistent.
    pub fn singleton_pairs(&self) -> Vec<GoldLink> {
        let mut out = Vec::new();
        if self.status() != ConsistencyStatus::Consistent {
            return out;
        }
        let nodes = self.network.nodes();
        for (a, x) in nodes.iter().enumerate() {
            for y in &nodes[a + 1..] {
                if let Some(r) = self
                    .network
                    .relation_between(x.id, y.id)
                    .ok()
                    .and_then(RelationSet::as_single)
                {
                    out.push(GoldLink {
                        lid: String::new(),
                        source: x.label.clone(),
                        target: y.label.clone(),
                        relation: r,
                    });
                }
            }
        }
        out
    }
}

/// One event node per instance and one timex node per timex, constrained by
/// every link in document order and propagated after each assertion.
pub fn gold_network(doc: &TimeMLDocument) -> GoldNetwork {
    let mut net = ConstraintNetwork::new();
    for i in &doc.instances {
        let _ = net.add_node(NodeKind::Event, i.eiid.clone());
    }
    for t in &doc.timexes {
        let _ = net.add_node(NodeKind::Timex, t.tid.clone());
    }
    let mut conflict = None;
    for (k, link) in doc.tlinks.iter().enumerate() {
        let _ = net.assert_by_label(&link.source, &link.target, link.relation().into());
        if net.propagate() == ConsistencyStatus::Inconsistent {
            conflict = Some((k, link.lid.clone()));
            break;
        }
    }
    net.propagate();
    GoldNetwork { network: net, conflict }
}

/// Relations of `anchor` to every other node whose propagated label is a
/// single relation.
pub fn gold_denotation(doc: &TimeMLDocument, anchor: &str) -> Result<GoldDenotation, TimeMlError> {
    let gold = gold_network(doc);
    let net = &gold.network;
    let a = net
        .lookup(anchor)
        .ok_or_else(|| TimeMlError::UnknownAnchor(anchor.to_string()))?;
    if let Some((_, lid)) = gold.conflict {
        return Err(TimeMlError::InconsistentGold(lid));
    }
    let mut out = GoldDenotation::new();
    for node in net.nodes() {
        if node.id == a {
            continue;
        }
        if let Some(r) = net.relation_between(a, node.id).ok().and_then(RelationSet::as_single) {
            out.insert(node.label.clone(), r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeml::parse_document;
    use AllenRelation::*;

    fn chain(links: &[(&str, &str, &str)]) -> TimeMLDocument {
        let mut xml = String::from("<TimeML><TEXT>");
        for k in 1..=3 {
            xml += &format!("<EVENT eid=\"e{k}\">x</EVENT> ");
        }
        xml += "</TEXT>";
        for k in 1..=3 {
            xml += &format!("<MAKEINSTANCE eiid=\"ei{k}\" eventID=\"e{k}\"/>");
        }
        for (n, (s, rel, t)) in links.iter().enumerate() {
            xml += &format!(
                "<TLINK lid=\"l{n}\" relType=\"{rel}\" eventInstanceID=\"{s}\" relatedToEventInstance=\"{t}\"/>"
            );
        }
        xml += "</TimeML>";
        parse_document(&xml).unwrap()
    }

    #[test]
    fn chain_propagates() {
        let doc = chain(&[("ei1", "BEFORE", "ei2"), ("ei2", "BEFORE", "ei3")]);
        let g = gold_network(&doc);
        assert_eq!(g.status(), ConsistencyStatus::Consistent);
        let (a, c) = (g.network.lookup("ei1").unwrap(), g.network.lookup("ei3").unwrap());
        assert_eq!(g.network.relation_between(a, c).unwrap(), Before.into());
        let d = gold_denotation(&doc, "ei1").unwrap();
        assert_eq!(d.get("ei2"), Some(Before));
        assert_eq!(d.get("ei3"), Some(Before));
        assert_eq!(gold_denotation(&doc, "ei3").unwrap().get("ei1"), Some(After));
        assert_eq!(g.singleton_pairs().len(), 3);
    }

    #[test]
    fn contradiction_is_flagged() {
        let doc = chain(&[("ei1", "BEFORE", "ei2"), ("ei2", "BEFORE", "ei1")]);
        let g = gold_network(&doc);
        assert_eq!(g.status(), ConsistencyStatus::Inconsistent);
        assert_eq!(g.conflict, Some((1, "l1".to_string())));
        assert!(matches!(gold_denotation(&doc, "ei1"), Err(TimeMlError::InconsistentGold(l)) if l == "l1"));
    }

    #[test]
    fn no_links_no_knowledge() {
        let doc = chain(&[]);
        let g = gold_network(&doc);
        assert_eq!(g.status(), ConsistencyStatus::Consistent);
        assert!(g.network.to_graph().edges.is_empty());
        assert!(gold_denotation(&doc, "ei2").unwrap().is_empty());
        assert!(matches!(
            gold_denotation(&doc, "ei7"),
            Err(TimeMlError::UnknownAnchor(_))
        ));
    }
}
