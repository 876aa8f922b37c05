use chronolf::algebra::PointInterval;
use chronolf::timeml::RelType;
use chronolf::{AllenRelation, Production};
use std::collections::BTreeSet;

// Allen's definitions, one predicate per relation, over endpoints.
fn holds(r: AllenRelation, (a0, a1): (i64, i64), (b0, b1): (i64, i64)) -> bool {
    use AllenRelation::*;
    match r {
        Before => a1 < b0,
        After => b1 < a0,
        Meets => a1 == b0,
        MetBy => b1 == a0,
        Overlaps => a0 < b0 && b0 < a1 && a1 < b1,
        OverlappedBy => b0 < a0 && a0 < b1 && b1 < a1,
        Starts => a0 == b0 && a1 < b1,
        StartedBy => a0 == b0 && b1 < a1,
        During => b0 < a0 && a1 < b1,
        Contains => a0 < b0 && b1 < a1,
        Finishes => a1 == b1 && b0 < a0,
        FinishedBy => a1 == b1 && a0 < b0,
        Equals => a0 == b0 && a1 == b1,
    }
}

#[test]
fn thirteen_relations_exhaustive_and_distinct() {
    assert_eq!(AllenRelation::ALL.len(), 13);
    let ivs = PointInterval::all_within(6);
    let mut realized = BTreeSet::new();
    for a in &ivs {
        for b in &ivs {
            let (a, b) = ((a.start(), a.end()), (b.start(), b.end()));
            let hold: Vec<_> = AllenRelation::ALL.into_iter().filter(|r| holds(*r, a, b)).collect();
            assert_eq!(hold.len(), 1, "{a:?} {b:?}: {hold:?}");
            realized.insert(hold[0]);
        }
    }
    assert_eq!(realized.len(), 13);
}

#[test]
fn one_relation_function_per_basic_relation() {
    let fns: Vec<AllenRelation> = Production::fixed_inventory()
        .into_iter()
        .filter_map(|p| match p {
            Production::Relation(r) => Some(r),
            _ => None,
        })
        .collect();
    assert_eq!(fns, AllenRelation::ALL);
}

#[test]
fn tlink_types_cover_all_but_overlap() {
    let image: BTreeSet<AllenRelation> = RelType::ALL.iter().map(|t| t.to_allen()).collect();
    let missing: Vec<AllenRelation> = AllenRelation::ALL.into_iter().filter(|r| !image.contains(r)).collect();
    assert_eq!(missing, [AllenRelation::Overlaps, AllenRelation::OverlappedBy]);
    assert_eq!(RelType::ALL.len(), 14);
    let shared = [
        (RelType::Identity, RelType::Simultaneous),
        (RelType::During, RelType::IsIncluded),
        (RelType::DuringInv, RelType::Includes),
    ];
    for (a, b) in shared {
        assert_eq!(a.to_allen(), b.to_allen());
    }
}
