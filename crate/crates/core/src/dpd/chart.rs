//! Chart-based search.
//!
//! A cell groups the forms of one size whose execution leaves the same
//! state: the root's labels to every constant plus the labels between the
//! constants themselves. A parent's state depends only on its children's
//! states, so it is computed once per tuple of child states on a small
//! network holding just the constants, the child roots and the new root.
//! Concrete forms are only materialized for cells that match the gold
//! denotation.

use super::{
    canonical_cmp, generation_relations, matches_with, redundant_nesting, DpdError, GoldDenotation, SearchConfig,
    SearchResult, SearchStats,
};
use crate::algebra::{AllenRelation, RelationSet};
use crate::executor::{execute, Denotation, ExecutionContext, CONTAINMENT};
use crate::lang::{LogicalForm, SetOp};
use crate::network::{ConsistencyStatus, ConstraintNetwork, NodeId, NodeKind};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;
use std::time::Instant;

type KeyId = usize;
type CellId = usize;

/// Root labels to each constant, then constant pair labels `(i, j)`, `i < j`.
/// Empty means inconsistent.
type State = Vec<RelationSet>;

const INCONSISTENT: KeyId = 0;

#[derive(Debug, Clone)]
enum Derivation {
    Constant(String),
    Relation(AllenRelation, CellId),
    SetOp(SetOp, CellId, CellId),
}

#[derive(Debug)]
struct Cell {
    key: KeyId,
    derivations: Vec<Derivation>,
    total: u128,
    by_top: [u128; 13],
}

struct Chart<'a> {
    ctx: &'a ExecutionContext,
    labels: Vec<String>,
    pruning: bool,
    idempotent: bool,
    states: Vec<State>,
    state_ids: HashMap<State, KeyId>,
    cells: Vec<Cell>,
    cell_ids: HashMap<(usize, KeyId), CellId>,
    by_size: Vec<Vec<CellId>>,
    relation_memo: HashMap<(AllenRelation, KeyId), KeyId>,
    set_memo: HashMap<(SetOp, KeyId, KeyId), KeyId>,
    executions: usize,
    pruned: u128,
}

impl<'a> Chart<'a> {
    fn new(ctx: &'a ExecutionContext, cfg: &SearchConfig) -> Self {
        let mut chart = Chart {
            ctx,
            labels: ctx.vocabulary().labels().map(str::to_string).collect(),
            pruning: cfg.pruning,
            idempotent: cfg.drops_idempotent(),
            states: Vec::new(),
            state_ids: HashMap::new(),
            cells: Vec::new(),
            cell_ids: HashMap::new(),
            by_size: vec![Vec::new()],
            relation_memo: HashMap::new(),
            set_memo: HashMap::new(),
            executions: 0,
            pruned: 0,
        };
        let id = chart.intern(Vec::new());
        debug_assert_eq!(id, INCONSISTENT);
        chart
    }

    fn n(&self) -> usize {
        self.labels.len()
    }

    fn intern(&mut self, state: State) -> KeyId {
        if let Some(&id) = self.state_ids.get(&state) {
            return id;
        }
        let id = self.states.len();
        self.states.push(state.clone());
        self.state_ids.insert(state, id);
        id
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        // Offset of (i, j), i < j, in the row-major upper triangle.
        let n = self.n();
        n + i * (2 * n - i - 1) / 2 + (j - i - 1)
    }

    /// Network over the constants with their pair labels from `state`.
    fn constants_network(&self, state: &State) -> (ConstraintNetwork, Vec<NodeId>) {
        let mut net = ConstraintNetwork::new();
        let ids: Vec<NodeId> = (0..self.n())
            .map(|i| net.add_node(NodeKind::Event, format!("c{i}")).expect("fresh labels"))
            .collect();
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                net.assert_constraint(ids[i], ids[j], state[self.pair_index(i, j)])
                    .expect("own ids");
            }
        }
        (net, ids)
    }

    fn attach_root(&self, net: &mut ConstraintNetwork, consts: &[NodeId], state: &State, name: &str) -> NodeId {
        let root = net.add_node(NodeKind::Reference, name).expect("fresh label");
        for (i, &c) in consts.iter().enumerate() {
            net.assert_constraint(root, c, state[i]).expect("own ids");
        }
        root
    }

    fn read_state(&mut self, net: &mut ConstraintNetwork, consts: &[NodeId], root: NodeId) -> KeyId {
        self.executions += 1;
        if net.propagate() != ConsistencyStatus::Consistent {
            return INCONSISTENT;
        }
        let n = consts.len();
        let mut state = Vec::with_capacity(n + n * n.saturating_sub(1) / 2);
        for &c in consts {
            state.push(net.relation_between(root, c).expect("consistent"));
        }
        for i in 0..consts.len() {
            for j in i + 1..consts.len() {
                state.push(net.relation_between(consts[i], consts[j]).expect("consistent"));
            }
        }
        self.intern(state)
    }

    /// States of the bare constants under the background constraints.
    fn constant_states(&mut self) -> Vec<KeyId> {
        let mut net = ConstraintNetwork::new();
        let ids: Vec<NodeId> = self
            .ctx
            .vocabulary()
            .entries()
            .iter()
            .map(|e| net.add_node(e.kind.into(), e.label.clone()).expect("unique labels"))
            .collect();
        for c in self.ctx.background() {
            net.assert_by_label(&c.source, &c.target, c.relations)
                .expect("validated background");
        }
        (0..ids.len())
            .map(|k| self.read_state(&mut net.clone(), &ids, ids[k]))
            .collect()
    }

    fn apply_relation(&mut self, f: AllenRelation, child: KeyId) -> KeyId {
        if child == INCONSISTENT {
            return INCONSISTENT;
        }
        if let Some(&k) = self.relation_memo.get(&(f, child)) {
            return k;
        }
        let state = self.states[child].clone();
        let (mut net, consts) = self.constants_network(&state);
        let arg = self.attach_root(&mut net, &consts, &state, "arg");
        let root = net.add_node(NodeKind::Reference, "root").expect("fresh label");
        net.assert_constraint(root, arg, f.into()).expect("own ids");
        let k = self.read_state(&mut net, &consts, root);
        self.relation_memo.insert((f, child), k);
        k
    }

    fn apply_set_op(&mut self, op: SetOp, a: KeyId, b: KeyId) -> KeyId {
        if a == INCONSISTENT || b == INCONSISTENT {
            return INCONSISTENT;
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if let Some(&k) = self.set_memo.get(&(op, a, b)) {
            return k;
        }
        let (sa, sb) = (self.states[a].clone(), self.states[b].clone());
        let (mut net, consts) = self.constants_network(&sa);
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                net.assert_constraint(consts[i], consts[j], sb[self.pair_index(i, j)])
                    .expect("own ids");
            }
        }
        let left = self.attach_root(&mut net, &consts, &sa, "left");
        let right = self.attach_root(&mut net, &consts, &sb, "right");
        let root = net.add_node(NodeKind::Reference, "root").expect("fresh label");
        for arg in [left, right] {
            match op {
                SetOp::Intersection => net.assert_constraint(root, arg, CONTAINMENT),
                SetOp::Union => net.assert_constraint(arg, root, CONTAINMENT),
            }
            .expect("own ids");
        }
        let k = self.read_state(&mut net, &consts, root);
        self.set_memo.insert((op, a, b), k);
        k
    }

    fn add(&mut self, size: usize, key: KeyId, d: Derivation, count: u128, top: Option<AllenRelation>) {
        if count == 0 {
            return;
        }
        while self.by_size.len() <= size {
            self.by_size.push(Vec::new());
        }
        let id = match self.cell_ids.get(&(size, key)) {
            Some(&id) => id,
            None => {
                let id = self.cells.len();
                self.cells.push(Cell {
                    key,
                    derivations: Vec::new(),
                    total: 0,
                    by_top: [0; 13],
                });
                self.cell_ids.insert((size, key), id);
                self.by_size[size].push(id);
                id
            }
        };
        let cell = &mut self.cells[id];
        cell.derivations.push(d);
        cell.total += count;
        if let Some(r) = top {
            cell.by_top[r.index()] += count;
        }
    }

    fn fill(&mut self, max_size: usize) {
        let constant_keys = self.constant_states();
        for (label, key) in self.labels.clone().into_iter().zip(constant_keys) {
            self.add(1, key, Derivation::Constant(label), 1, None);
        }
        for size in 3..=max_size {
            self.fill_relations(size);
            self.fill_set_ops(size);
        }
    }

    fn fill_relations(&mut self, size: usize) {
        let children = self.by_size.get(size - 2).cloned().unwrap_or_default();
        for child in children {
            let (child_key, total, by_top) = {
                let c = &self.cells[child];
                (c.key, c.total, c.by_top)
            };
            for f in AllenRelation::ALL {
                let mut count = total;
                if self.pruning {
                    if !generation_relations(true).contains(&f) {
                        self.pruned += total;
                        continue;
                    }
                    let redundant: u128 = AllenRelation::ALL
                        .iter()
                        .filter(|g| redundant_nesting(f, **g))
                        .map(|g| by_top[g.index()])
                        .sum();
                    self.pruned += redundant;
                    count -= redundant;
                }
                if count == 0 {
                    continue;
                }
                let key = self.apply_relation(f, child_key);
                self.add(size, key, Derivation::Relation(f, child), count, Some(f));
            }
        }
    }

    fn fill_set_ops(&mut self, size: usize) {
        for a in 1..=(size - 2) / 2 {
            let b = size - 2 - a;
            let lefts = self.by_size.get(a).cloned().unwrap_or_default();
            let rights = self.by_size.get(b).cloned().unwrap_or_default();
            for &c1 in &lefts {
                for &c2 in &rights {
                    if a == b && c2 < c1 {
                        continue;
                    }
                    let (n1, n2) = (self.cells[c1].total, self.cells[c2].total);
                    let count = if c1 == c2 {
                        if self.idempotent {
                            self.pruned += n1 * SetOp::ALL.len() as u128;
                            n1 * (n1 - 1) / 2
                        } else {
                            n1 * (n1 + 1) / 2
                        }
                    } else {
                        n1 * n2
                    };
                    if count == 0 {
                        continue;
                    }
                    for op in SetOp::ALL {
                        let key = self.apply_set_op(op, self.cells[c1].key, self.cells[c2].key);
                        self.add(size, key, Derivation::SetOp(op, c1, c2), count, None);
                    }
                }
            }
        }
    }

    fn denotation(&self, key: KeyId) -> Denotation {
        if key == INCONSISTENT {
            return Denotation {
                root: String::new(),
                status: ConsistencyStatus::Inconsistent,
                relations: BTreeMap::new(),
            };
        }
        let state = &self.states[key];
        Denotation {
            root: String::new(),
            status: ConsistencyStatus::Consistent,
            relations: self.labels.iter().cloned().zip(state.iter().copied()).collect(),
        }
    }

    /// One form of `cell` whose top function may sit under `outer`.
    fn witness(
        &self,
        cell: CellId,
        outer: Option<AllenRelation>,
        memo: &mut HashMap<(CellId, Option<AllenRelation>), Option<LogicalForm>>,
    ) -> Option<LogicalForm> {
        if let Some(w) = memo.get(&(cell, outer)) {
            return w.clone();
        }
        let mut found = None;
        for d in &self.cells[cell].derivations {
            found = match d {
                Derivation::Constant(label) => Some(LogicalForm::constant(label.clone())),
                Derivation::Relation(g, child) => {
                    if self.pruning && outer.is_some_and(|f| redundant_nesting(f, *g)) {
                        continue;
                    }
                    self.witness(*child, Some(*g), memo)
                        .map(|m| LogicalForm::relation(*g, m))
                }
                Derivation::SetOp(op, c1, c2) => {
                    if c1 == c2 && self.idempotent {
                        continue;
                    }
                    let x = self.witness(*c1, None, memo);
                    let y = self.witness(*c2, None, memo);
                    x.zip(y).map(|(x, y)| LogicalForm::set_op(*op, x, y))
                }
            };
            if found.is_some() {
                break;
            }
        }
        memo.insert((cell, outer), found.clone());
        found
    }

    fn expand(
        &self,
        cell: CellId,
        memo: &mut HashMap<CellId, Rc<Vec<(LogicalForm, String)>>>,
    ) -> Rc<Vec<(LogicalForm, String)>> {
        if let Some(v) = memo.get(&cell) {
            return v.clone();
        }
        let mut out = Vec::new();
        for d in &self.cells[cell].derivations {
            match d {
                Derivation::Constant(label) => out.push((LogicalForm::constant(label.clone()), label.clone())),
                Derivation::Relation(f, child) => {
                    for (m, _) in self.expand(*child, memo).iter() {
                        if self.pruning {
                            if let LogicalForm::Relation(g, _) = m {
                                if redundant_nesting(*f, *g) {
                                    continue;
                                }
                            }
                        }
                        let lf = LogicalForm::relation(*f, m.clone());
                        let text = lf.to_string();
                        out.push((lf, text));
                    }
                }
                Derivation::SetOp(op, c1, c2) => {
                    let left = self.expand(*c1, memo);
                    let right = self.expand(*c2, memo);
                    for (i, (x, xs)) in left.iter().enumerate() {
                        let start = if c1 == c2 { i } else { 0 };
                        for (y, ys) in right[start..].iter() {
                            if c1 == c2 && xs == ys && self.idempotent {
                                continue;
                            }
                            let lf = if xs <= ys {
                                LogicalForm::set_op(*op, x.clone(), y.clone())
                            } else {
                                LogicalForm::set_op(*op, y.clone(), x.clone())
                            };
                            let text = lf.to_string();
                            out.push((lf, text));
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        memo.insert(cell, out.clone());
        out
    }
}

/// Every form within the bound whose denotation matches `gold`, found by
/// dynamic programming over execution states.
pub fn search(ctx: &ExecutionContext, gold: &GoldDenotation, cfg: &SearchConfig) -> Result<SearchResult, DpdError> {
    cfg.validate()?;
    if ctx.vocabulary().is_empty() {
        return Err(DpdError::EmptyVocabulary);
    }
    for (label, _) in gold.iter() {
        if !ctx.vocabulary().contains(label) {
            return Err(DpdError::UnknownGoldLabel(label.to_string()));
        }
    }
    let started = Instant::now();
    let mut chart = Chart::new(ctx, cfg);
    chart.fill(cfg.max_actions - 1);

    let mut signatures = HashSet::new();
    let mut matching: Vec<(usize, CellId)> = Vec::new();
    for (size, cells) in chart.by_size.iter().enumerate() {
        for &id in cells {
            let d = chart.denotation(chart.cells[id].key);
            signatures.insert(d.signature());
            if matches_with(&d, gold, cfg.match_mode) {
                matching.push((size, id));
            }
        }
    }
    matching.sort();

    let mut memo = HashMap::new();
    let mut found: Vec<(LogicalForm, String)> = Vec::new();
    let mut i = 0;
    while i < matching.len() && cfg.max_results.is_none_or(|cap| found.len() < cap) {
        let size = matching[i].0;
        let mut level = Vec::new();
        while i < matching.len() && matching[i].0 == size {
            level.extend(chart.expand(matching[i].1, &mut memo).iter().cloned());
            i += 1;
        }
        level.sort_by(canonical_cmp);
        found.extend(level);
        if let Some(cap) = cfg.max_results {
            if found.len() >= cap {
                found.truncate(cap);
                break;
            }
        }
    }

    // Matches are replayed through the full executor before being returned.
    let verified = |lf: &LogicalForm| {
        execute(lf, ctx)
            .map(|d| matches_with(&d, gold, cfg.match_mode))
            .unwrap_or(false)
    };
    let matches: Vec<LogicalForm> = found.into_iter().map(|(lf, _)| lf).filter(verified).collect();
    let mut memo = HashMap::new();
    let witnesses = matching
        .iter()
        .filter_map(|&(_, id)| chart.witness(id, None, &mut memo))
        .map(LogicalForm::canonicalize)
        .filter(verified)
        .collect();

    let enumerated: u128 = chart.cells.iter().map(|c| c.total).sum();
    Ok(SearchResult {
        matches,
        witnesses,
        stats: SearchStats {
            enumerated: enumerated.min(u64::MAX as u128) as u64,
            pruned: chart.pruned.min(u64::MAX as u128) as u64,
            signatures: signatures.len(),
            classes: chart.cells.len(),
            executions: chart.executions,
            elapsed: started.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpd::{enumerate, matches};
    use crate::lang::Vocabulary;
    use AllenRelation::*;

    fn ctx(labels: &[&str]) -> ExecutionContext {
        ExecutionContext::from_vocabulary(Vocabulary::events(labels.iter().copied()).unwrap())
    }

    fn gold(pairs: &[(&str, AllenRelation)]) -> GoldDenotation {
        pairs.iter().map(|(l, r)| (l.to_string(), *r)).collect()
    }

    fn texts(r: &SearchResult) -> Vec<String> {
        r.matches.iter().map(|lf| lf.to_string()).collect()
    }

    #[test]
    fn finds_direct_relation() {
        let r = search(&ctx(&["ei1"]), &gold(&[("ei1", Before)]), &SearchConfig::with_bound(4)).unwrap();
        assert_eq!(texts(&r), ["(before ei1)"]);
    }

    #[test]
    fn finds_intersection() {
        let c = ctx(&["ei1", "ei2"]);
        let g = gold(&[("ei1", Before), ("ei2", After)]);
        let r = search(&c, &g, &SearchConfig::with_bound(9)).unwrap();
        assert!(texts(&r).contains(&"(intersection (after ei2) (before ei1))".to_string()));
        for lf in &r.matches {
            assert!(matches(&execute(lf, &c).unwrap(), &g));
        }
    }

    #[test]
    fn witnesses_cover_every_matching_signature() {
        let c = ctx(&["a", "b"]);
        let g = gold(&[("a", Before)]);
        for pruning in [true, false] {
            let r = search(&c, &g, &SearchConfig::with_bound(8).pruning(pruning)).unwrap();
            let sig = |lf: &LogicalForm| execute(lf, &c).unwrap().signature();
            let all: HashSet<String> = r.matches.iter().map(sig).collect();
            let seen: HashSet<String> = r.witnesses.iter().map(sig).collect();
            assert_eq!(all, seen);
            assert!(r.witnesses.len() <= r.stats.classes);
            assert!(r.witnesses.iter().all(|w| r.matches.contains(w)));
        }
    }

    #[test]
    fn counts_agree_with_enumeration() {
        for (pruning, prune_idempotent) in [(true, false), (true, true), (false, false)] {
            let c = ctx(&["a", "b"]);
            let cfg = SearchConfig {
                prune_idempotent,
                ..SearchConfig::with_bound(7).pruning(pruning)
            };
            let r = search(&c, &GoldDenotation::new(), &cfg).unwrap();
            let mut e = enumerate(c.vocabulary(), &cfg);
            let all: Vec<String> = e.by_ref().map(|lf| lf.to_string()).collect();
            assert_eq!(r.stats.enumerated as usize, all.len());
            assert_eq!(r.stats.pruned, e.pruned());
            let mut got = texts(&r);
            // An empty gold still rejects inconsistent forms.
            let mut want: Vec<String> = all
                .into_iter()
                .filter(|t| execute(&t.parse().unwrap(), &c).unwrap().is_consistent())
                .collect();
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn cell_states_agree_with_full_execution() {
        use crate::executor::{execute_with_network, BackgroundConstraint};
        let vocab = Vocabulary::events(["a", "b", "c"]).unwrap();
        let bg = vec![BackgroundConstraint {
            source: "a".into(),
            target: "b".into(),
            relations: [Before, Meets].into_iter().collect(),
        }];
        let c = ExecutionContext::new(vocab.clone(), bg).unwrap();
        let mut chart = Chart::new(&c, &SearchConfig::with_bound(7).pruning(false));
        chart.fill(6);
        let mut memo = HashMap::new();
        for id in 0..chart.cells.len() {
            let want = &chart.states[chart.cells[id].key];
            for (lf, _) in chart.expand(id, &mut memo).iter() {
                let got = execute_with_network(lf, &c).unwrap().state_key(&vocab);
                assert_eq!(&got, want, "{lf}");
            }
        }
    }

    #[test]
    fn results_are_capped_in_canonical_order() {
        let c = ctx(&["a"]);
        let mut cfg = SearchConfig::with_bound(8);
        let full = search(&c, &gold(&[("a", Before)]), &cfg).unwrap();
        assert!(full.matches.len() > 3);
        cfg.max_results = Some(3);
        let capped = search(&c, &gold(&[("a", Before)]), &cfg).unwrap();
        assert_eq!(capped.matches, full.matches[..3]);
        let lens: Vec<usize> = full.matches.iter().map(|lf| lf.action_len()).collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = ctx(&["a"]);
        assert_eq!(
            search(&c, &gold(&[("z", Before)]), &SearchConfig::default()),
            Err(DpdError::UnknownGoldLabel("z".into()))
        );
        assert_eq!(
            search(&c, &GoldDenotation::new(), &SearchConfig::with_bound(1)),
            Err(DpdError::BoundTooSmall(1))
        );
        let empty = ExecutionContext::from_vocabulary(Vocabulary::default());
        assert_eq!(
            search(&empty, &GoldDenotation::new(), &SearchConfig::default()),
            Err(DpdError::EmptyVocabulary)
        );
    }
}
