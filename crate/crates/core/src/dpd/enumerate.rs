use super::{generation_relations, redundant_nesting, SearchConfig};
use crate::lang::{LogicalForm, SetOp, Vocabulary};

/// Every canonical form of action length at most `cfg.max_actions`, produced
/// size by size and in serialization order within a size.
///
/// With pruning on, redundant relation nestings and `equals` are never
/// produced, nor `(op X X)` when `cfg.prune_idempotent` is also set.
pub fn enumerate(vocab: &Vocabulary, cfg: &SearchConfig) -> Enumerator {
    Enumerator::new(vocab, cfg)
}

pub struct Enumerator {
    labels: Vec<String>,
    pruning: bool,
    idempotent: bool,
    max_size: usize,
    // levels[s] holds the forms of size s, with their serializations.
    levels: Vec<Vec<(LogicalForm, String)>>,
    size: usize,
    at: usize,
    pruned: u64,
}

impl Enumerator {
    fn new(vocab: &Vocabulary, cfg: &SearchConfig) -> Self {
        Enumerator {
            labels: vocab.labels().map(str::to_string).collect(),
            pruning: cfg.pruning,
            idempotent: cfg.drops_idempotent(),
            max_size: cfg.max_actions.saturating_sub(1),
            levels: vec![Vec::new()],
            size: 0,
            at: 0,
            pruned: 0,
        }
    }

    /// Candidates rejected by pruning among the levels built so far.
    pub fn pruned(&self) -> u64 {
        self.pruned
    }

    fn build_level(&mut self, s: usize) {
        let mut level = Vec::new();
        if s == 1 {
            for l in &self.labels {
                level.push((LogicalForm::constant(l.clone()), l.clone()));
            }
        }
        if s >= 3 {
            for r in crate::algebra::AllenRelation::ALL {
                for (child, _) in &self.levels[s - 2] {
                    let pruned = self.pruning
                        && (!generation_relations(true).contains(&r)
                            || matches!(child, LogicalForm::Relation(g, _) if redundant_nesting(r, *g)));
                    if pruned {
                        self.pruned += 1;
                        continue;
                    }
                    let lf = LogicalForm::relation(r, child.clone());
                    let text = lf.to_string();
                    level.push((lf, text));
                }
            }
            for a in 1..=s - 3 {
                let b = s - 2 - a;
                for (x, xs) in &self.levels[a] {
                    for (y, ys) in &self.levels[b] {
                        if xs > ys {
                            continue;
                        }
                        if xs == ys && self.idempotent {
                            self.pruned += SetOp::ALL.len() as u64;
                            continue;
                        }
                        for op in SetOp::ALL {
                            let lf = LogicalForm::set_op(op, x.clone(), y.clone());
                            let text = lf.to_string();
                            level.push((lf, text));
                        }
                    }
                }
            }
        }
        level.sort_by(|a, b| a.1.cmp(&b.1));
        self.levels.push(level);
    }
}

impl Iterator for Enumerator {
    type Item = LogicalForm;

    fn next(&mut self) -> Option<LogicalForm> {
        loop {
            if let Some((lf, _)) = self.levels.get(self.size).and_then(|l| l.get(self.at)) {
                self.at += 1;
                return Some(lf.clone());
            }
            if self.size >= self.max_size {
                return None;
            }
            self.size += 1;
            self.at = 0;
            self.build_level(self.size);
        }
    }
}
