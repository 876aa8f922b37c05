use chronolf::dpd::{enumerate, matches, search};
use chronolf::eval::{evaluate, gold_echo, EvalOptions};
use chronolf::lang::sample_form;
use chronolf::network::ConsistencyStatus;
use chronolf::pipeline::{cmd_pipeline, ScorerKind};
use chronolf::timeml::{discover, ingest, read_document, Manifest, RelType};
use chronolf::{
    execute, AllenRelation, ConstraintNetwork, ExecutionContext, GoldDenotation, LogicalForm, NodeId, NodeKind,
    RelationSet, RunConfig, SearchConfig, Vocabulary,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

type Check = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("composition table equals endpoint oracle", table_vs_oracle),
        ("algebra laws", algebra_laws),
        ("propagation soundness", propagation_soundness),
        ("language round trips", language_round_trips),
        ("search correctness", search_correctness),
        ("pruning safety and effectiveness", pruning_safety),
        ("fixture manifest", fixture_manifest),
        ("evaluation self-consistency", evaluation_self_consistency),
        ("cue corpus pipeline", cue_pipeline),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures(dir: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(dir)
}

// Endpoint model used as the independent reference.

type Iv = (i32, i32);

const MAX_POINT: i32 = 7;

fn intervals() -> Vec<Iv> {
    let mut out = Vec::new();
    for s in 0..=MAX_POINT {
        for e in s + 1..=MAX_POINT {
            out.push((s, e));
        }
    }
    out
}

fn relate(a: Iv, b: Iv) -> AllenRelation {
    use AllenRelation::*;
    use Ordering::*;
    match (a.0.cmp(&b.0), a.1.cmp(&b.1)) {
        (Equal, Equal) => Equals,
        (Equal, Less) => Starts,
        (Equal, Greater) => StartedBy,
        (Greater, Equal) => Finishes,
        (Less, Equal) => FinishedBy,
        (Greater, Less) => During,
        (Less, Greater) => Contains,
        (Less, Less) => match a.1.cmp(&b.0) {
            Less => Before,
            Equal => Meets,
            Greater => Overlaps,
        },
        (Greater, Greater) => match a.0.cmp(&b.1) {
            Greater => After,
            Equal => MetBy,
            Less => OverlappedBy,
        },
    }
}

fn oracle_table() -> HashMap<(AllenRelation, AllenRelation), RelationSet> {
    let ivs = intervals();
    let mut table: HashMap<_, RelationSet> = HashMap::new();
    for &x in &ivs {
        for &y in &ivs {
            let xy = relate(x, y);
            for &z in &ivs {
                table.entry((xy, relate(y, z))).or_default().insert(relate(x, z));
            }
        }
    }
    table
}

fn random_set(rng: &mut StdRng) -> RelationSet {
    RelationSet::from_bits(rng.random_range(0..1u16 << 13))
}

fn table_vs_oracle() -> Result<String, String> {
    let oracle = oracle_table();
    let mut checked = 0;
    for a in AllenRelation::ALL {
        for b in AllenRelation::ALL {
            let got = RelationSet::single(a).compose(RelationSet::single(b));
            let want = oracle.get(&(a, b)).copied().unwrap_or_default();
            ensure(got == want, || format!("{a} ∘ {b}: table {{{got}}}, oracle {{{want}}}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked}/169 pairs"))
}

fn laws_hold(s: RelationSet, t: RelationSet, s2: RelationSet, t2: RelationSet) -> Result<(), String> {
    let eq = RelationSet::EQUALS;
    ensure(s.converse().converse() == s, || {
        format!("converse involution fails on {{{s}}}")
    })?;
    ensure(s.compose(eq) == s && eq.compose(s) == s, || {
        format!("equals identity fails on {{{s}}}")
    })?;
    ensure(s.compose(t).converse() == t.converse().compose(s.converse()), || {
        format!("converse of composition fails on {{{s}}}, {{{t}}}")
    })?;
    ensure(s.compose(t).is_subset(s2.compose(t2)), || {
        format!("monotonicity fails on {{{s}}} ⊆ {{{s2}}}, {{{t}}} ⊆ {{{t2}}}")
    })
}

fn algebra_laws() -> Result<String, String> {
    let full = RelationSet::FULL;
    let mut basic = 0;
    for a in AllenRelation::ALL {
        for b in AllenRelation::ALL {
            let (s, t) = (RelationSet::single(a), RelationSet::single(b));
            laws_hold(s, t, s, t)?;
            laws_hold(s, t, s.union(t), full)?;
            basic += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..10_000 {
        let (s, t) = (random_set(&mut rng), random_set(&mut rng));
        let s2 = s.union(random_set(&mut rng));
        let t2 = t.union(random_set(&mut rng));
        laws_hold(s, t, s2, t2)?;
    }
    Ok(format!("{basic} basic pairs, 10000 random set pairs"))
}

struct Problem {
    nodes: usize,
    constraints: Vec<(usize, usize, RelationSet)>,
    model: Vec<Iv>,
}

fn random_problem(rng: &mut StdRng, ivs: &[Iv]) -> Problem {
    let nodes = rng.random_range(2..=4);
    let model: Vec<Iv> = (0..nodes).map(|_| ivs[rng.random_range(0..ivs.len())]).collect();
    let mut constraints = Vec::new();
    for i in 0..nodes {
        for j in 0..nodes {
            if i == j || rng.random_bool(0.4) {
                continue;
            }
            let mut set = RelationSet::single(relate(model[i], model[j]));
            for _ in 0..rng.random_range(0..4) {
                set.insert(AllenRelation::ALL[rng.random_range(0..13)]);
            }
            constraints.push((i, j, set));
        }
    }
    Problem {
        nodes,
        constraints,
        model,
    }
}

fn solve(p: &Problem, order: &[usize]) -> Result<ConstraintNetwork, String> {
    let mut net = ConstraintNetwork::new();
    for i in 0..p.nodes {
        net.add_node(NodeKind::Event, format!("n{i}"))
            .map_err(|e| e.to_string())?;
    }
    for &k in order {
        let (i, j, set) = p.constraints[k];
        net.assert_constraint(NodeId(i), NodeId(j), set)
            .map_err(|e| e.to_string())?;
    }
    net.propagate();
    Ok(net)
}

fn labels(net: &ConstraintNetwork, n: usize) -> Vec<RelationSet> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            out.push(net.label(NodeId(i), NodeId(j)).unwrap());
        }
    }
    out
}

fn satisfies(p: &Problem, model: &[Iv]) -> bool {
    p.constraints
        .iter()
        .all(|&(i, j, set)| set.contains(relate(model[i], model[j])))
}

fn propagation_soundness() -> Result<String, String> {
    let ivs = intervals();
    let mut rng = StdRng::seed_from_u64(3);
    let mut enumerated_models = 0usize;
    for trial in 0..1000 {
        let p = random_problem(&mut rng, &ivs);
        let n = p.nodes;
        let order: Vec<usize> = (0..p.constraints.len()).collect();
        let net = solve(&p, &order)?;
        ensure(net.status() == ConsistencyStatus::Consistent, || {
            format!("network {trial} has a model but was marked {:?}", net.status())
        })?;
        let got = labels(&net, n);

        let mut models = vec![p.model.clone()];
        if n <= 3 {
            // Every model over the endpoint range, not just the generating one.
            let mut idx = vec![0usize; n];
            loop {
                let m: Vec<Iv> = idx.iter().map(|&k| ivs[k]).collect();
                if satisfies(&p, &m) {
                    models.push(m);
                }
                let mut d = 0;
                while d < n && idx[d] + 1 == ivs.len() {
                    idx[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
                idx[d] += 1;
            }
        }
        enumerated_models += models.len();
        for m in &models {
            for i in 0..n {
                for j in 0..n {
                    let r = relate(m[i], m[j]);
                    ensure(got[i * n + j].contains(r), || {
                        format!("network {trial}: model relation {r} between n{i} and n{j} pruned")
                    })?;
                }
            }
        }

        let mut again = net.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    again
                        .assert_constraint(NodeId(i), NodeId(j), got[i * n + j])
                        .map_err(|e| e.to_string())?;
                }
            }
        }
        again.propagate();
        ensure(labels(&again, n) == got, || {
            format!("network {trial}: propagation not idempotent")
        })?;

        let mut shuffled = order.clone();
        shuffled.shuffle(&mut rng);
        let other = solve(&p, &shuffled)?;
        ensure(labels(&other, n) == got, || {
            format!("network {trial}: result depends on assertion order")
        })?;
    }
    Ok(format!("1000 networks, {enumerated_models} models checked"))
}

fn vocab(n: usize) -> Vocabulary {
    Vocabulary::events((1..=n).map(|i| format!("e{i}"))).unwrap()
}

fn language_round_trips() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(4);
    let ctx = ExecutionContext::from_vocabulary(vocab(3));
    let mut longest = 0;
    for _ in 0..1000 {
        let depth = rng.random_range(1..=5);
        let lf = sample_form(&mut rng, ctx.vocabulary(), depth);
        let back = LogicalForm::from_actions(&lf.to_actions()).map_err(|e| format!("{lf}: {e}"))?;
        ensure(back == lf, || format!("action round trip changed {lf} into {back}"))?;
        let text = lf.to_string();
        let parsed: LogicalForm = text.parse().map_err(|e| format!("{text}: {e}"))?;
        ensure(parsed == lf, || format!("print/parse round trip changed {text}"))?;
        execute(&lf, &ctx).map_err(|e| format!("{lf} failed to execute: {e}"))?;
        longest = longest.max(lf.action_len());
    }
    Ok(format!("1000 forms, longest {longest} actions"))
}

fn canonical(forms: &mut [LogicalForm]) {
    forms.sort_by_cached_key(|lf| (lf.action_len(), lf.to_string()));
}

fn search_correctness() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(5);
    let mut trials = 0;
    let mut compared = 0;
    let mut brute: HashMap<usize, Vec<(LogicalForm, chronolf::Denotation)>> = HashMap::new();
    while trials < 200 {
        let n = rng.random_range(1..=3);
        let ctx = ExecutionContext::from_vocabulary(vocab(n));
        let depth = rng.random_range(1..=3);
        let hidden = sample_form(&mut rng, ctx.vocabulary(), depth);
        let d = execute(&hidden, &ctx).map_err(|e| e.to_string())?;
        if !d.is_consistent() {
            continue;
        }
        trials += 1;
        let gold: GoldDenotation = d
            .relations
            .iter()
            .filter_map(|(l, s)| s.as_single().map(|r| (l.clone(), r)))
            .collect();
        let bound = hidden.action_len().max(2);
        let r = search(&ctx, &gold, &SearchConfig::with_bound(bound)).map_err(|e| e.to_string())?;
        let want = d.signature();
        let hit = r
            .witnesses
            .iter()
            .any(|w| execute(w, &ctx).map(|e| e.signature()) == Ok(want.clone()));
        ensure(hit, || {
            format!("no match reproduces {hidden} ({want}) at bound {bound}")
        })?;

        let small = rng.random_range(2..=8);
        let cfg = SearchConfig::with_bound(small).pruning(false);
        let mut got = search(&ctx, &gold, &cfg).map_err(|e| e.to_string())?.matches;
        let all = brute.entry(n).or_insert_with(|| {
            enumerate(ctx.vocabulary(), &SearchConfig::with_bound(8).pruning(false))
                .map(|lf| {
                    let d = execute(&lf, &ctx).unwrap();
                    (lf, d)
                })
                .collect()
        });
        let mut want: Vec<LogicalForm> = all
            .iter()
            .filter(|(lf, d)| lf.action_len() <= small && matches(d, &gold))
            .map(|(lf, _)| lf.clone())
            .collect();
        canonical(&mut want);
        canonical(&mut got);
        ensure(got == want, || {
            format!(
                "unpruned search for {hidden} at bound {small}: {} matches, brute force {}",
                got.len(),
                want.len()
            )
        })?;
        compared += want.len();
    }
    Ok(format!(
        "200/200 hidden forms recovered, {compared} brute-force matches compared"
    ))
}

fn pruning_safety() -> Result<String, String> {
    let mut lines = Vec::new();
    for n in 1..=3 {
        let ctx = ExecutionContext::from_vocabulary(vocab(n));
        let sigs: HashMap<String, String> = enumerate(ctx.vocabulary(), &SearchConfig::with_bound(8).pruning(false))
            .map(|lf| (lf.to_string(), execute(&lf, &ctx).unwrap().signature()))
            .collect();
        for bound in 2..=8 {
            let collect = |pruning: bool| -> Result<(usize, BTreeSet<String>), String> {
                let mut count = 0;
                let mut set = BTreeSet::new();
                for lf in enumerate(ctx.vocabulary(), &SearchConfig::with_bound(bound).pruning(pruning)) {
                    count += 1;
                    let sig = sigs
                        .get(&lf.to_string())
                        .ok_or_else(|| format!("{lf} not in unpruned space"))?;
                    set.insert(sig.clone());
                }
                Ok((count, set))
            };
            let (on, on_sigs) = collect(true)?;
            let (off, off_sigs) = collect(false)?;
            ensure(on_sigs == off_sigs, || {
                let lost: Vec<_> = off_sigs.difference(&on_sigs).take(3).collect();
                format!("vocab {n}, bound {bound}: pruning loses signatures {lost:?}")
            })?;
            ensure(bound < 6 || on < off, || {
                format!("vocab {n}, bound {bound}: {on} pruned vs {off} unpruned")
            })?;
            if bound == 8 {
                lines.push(format!("vocab {n}: {on}/{off} forms, {} signatures", on_sigs.len()));
            }
        }
    }
    Ok(lines.join("; "))
}

fn fixture_manifest() -> Result<String, String> {
    let dir = fixtures("timeml");
    let files = discover(&dir, None).map_err(|e| e.to_string())?;
    let (manifest, graphs) = ingest(&files, "fixtures");
    let text = std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?;
    let want: Manifest = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure(manifest == want, || {
        format!(
            "manifest differs:\n{}",
            serde_json::to_string_pretty(&manifest).unwrap()
        )
    })?;
    ensure(graphs.len() == want.documents, || "missing gold graphs".into())?;

    let mut rel_types = BTreeSet::new();
    for f in &files {
        let doc = read_document(f).map_err(|e| e.to_string())?;
        rel_types.extend(doc.tlinks.iter().map(|l| l.rel_type.name()));
    }
    ensure(rel_types.len() == RelType::ALL.len(), || {
        format!("relTypes covered: {rel_types:?}")
    })?;
    ensure(want.inconsistent == 1 && want.warnings >= 1, || {
        "fixture lacks an inconsistent or dangling case".into()
    })?;
    Ok(format!(
        "{} docs, {} events, {} timexes, {} links, {} warning(s), {} inconsistent",
        manifest.documents, manifest.events, manifest.timexes, manifest.links, manifest.warnings, manifest.inconsistent
    ))
}

fn evaluation_self_consistency() -> Result<String, String> {
    let files = discover(&fixtures("timeml"), None).map_err(|e| e.to_string())?;
    let docs = files
        .iter()
        .map(|f| read_document(f))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let opts = EvalOptions::default();
    let echo = evaluate(&docs, &gold_echo(&docs), &opts);
    let mut consistent = 0;
    for d in &echo.documents {
        if d.status == ConsistencyStatus::Consistent {
            consistent += 1;
            ensure(d.recall == Some(1.0), || {
                format!("{}: gold echo recall {:?}", d.doc, d.recall)
            })?;
        }
    }
    let empty = evaluate(&docs, &[], &opts);
    for d in &empty.documents {
        ensure(d.recall.is_none_or(|r| r == 0.0), || {
            format!("{}: empty recall {:?}", d.doc, d.recall)
        })?;
    }
    ensure(empty.corpus.recall == Some(0.0), || {
        format!("empty corpus recall {:?}", empty.corpus.recall)
    })?;
    Ok(format!(
        "{consistent} consistent docs at 1.000, empty predictions 0.000"
    ))
}

fn cue_pipeline() -> Result<String, String> {
    let corpus = fixtures("cue");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str, cfg: &RunConfig| -> Result<(Option<f64>, Vec<u8>), String> {
        let out = tmp.path().join(name);
        let o = cmd_pipeline(&corpus, &out, cfg).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(out.join("predictions.jsonl")).map_err(|e| e.to_string())?;
        Ok((o.report.evaluation.corpus.recall, bytes))
    };
    let lexical = RunConfig {
        jobs: 1,
        ..Default::default()
    };
    let (recall, first) = run("lexical_1", &lexical)?;
    let (_, second) = run(
        "lexical_2",
        &RunConfig {
            jobs: 4,
            ..Default::default()
        },
    )?;
    let baseline = RunConfig {
        scorer: ScorerKind::Constant,
        ..Default::default()
    };
    let (base, _) = run("constant", &baseline)?;
    let (recall, base) = (recall.unwrap_or(0.0), base.unwrap_or(0.0));
    ensure(recall > base, || {
        format!("lexical recall {recall:.3} does not exceed baseline {base:.3}")
    })?;
    ensure(first == second, || "predictions differ between runs".into())?;
    Ok(format!(
        "strict recall {recall:.3} vs baseline {base:.3}, runs byte-identical"
    ))
}
