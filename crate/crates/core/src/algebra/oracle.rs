//! Endpoint-level model of intervals.
//!
//! Every basic relation is fixed by comparing the four endpoints of two
//! intervals, so enumerating small integer intervals gives an independent
//! route to the composition table.

use super::{AllenRelation, RelationSet};
use std::cmp::Ordering;

/// Largest endpoint used by [`compose_oracle`]. Three intervals have at most
/// six distinct endpoints, so `0..=7` realizes every ordering pattern.
pub const ORACLE_MAX_POINT: i64 = 7;

/// A proper interval on the integer line (`start < end`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointInterval {
    start: i64,
    end: i64,
}

impl PointInterval {
    /// Returns `None` unless `start < end`.
    pub fn new(start: i64, end: i64) -> Option<Self> {
        (start < end).then_some(Self { start, end })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.end
    }

    /// All proper intervals with endpoints in `0..=max`.
    pub fn all_within(max: i64) -> Vec<PointInterval> {
        let mut out = Vec::new();
        for start in 0..=max {
            for end in start + 1..=max {
                out.push(PointInterval { start, end });
            }
        }
        out
    }
}

/// The unique basic relation holding between `a` and `b`.
pub fn relate(a: PointInterval, b: PointInterval) -> AllenRelation {
    use AllenRelation::*;
    use Ordering::*;

    if a.end < b.start {
        return Before;
    }
    if b.end < a.start {
        return After;
    }
    if a.end == b.start {
        return Meets;
    }
    if b.end == a.start {
        return MetBy;
    }
    // The intervals now share interior points.
    match (a.start.cmp(&b.start), a.end.cmp(&b.end)) {
        (Equal, Equal) => Equals,
        (Equal, Less) => Starts,
        (Equal, Greater) => StartedBy,
        (Greater, Equal) => Finishes,
        (Less, Equal) => FinishedBy,
        (Greater, Less) => During,
        (Less, Greater) => Contains,
        (Less, Less) => Overlaps,
        (Greater, Greater) => OverlappedBy,
    }
}

/// Brute-force composition of two basic relations: every `relate(x, z)`
/// over triples with `relate(x, y) = first` and `relate(y, z) = second`.
pub fn compose_oracle(first: AllenRelation, second: AllenRelation) -> RelationSet {
    let intervals = PointInterval::all_within(ORACLE_MAX_POINT);
    let mut out = RelationSet::EMPTY;
    for &y in &intervals {
        let xs: Vec<_> = intervals.iter().filter(|&&x| relate(x, y) == first).collect();
        if xs.is_empty() {
            continue;
        }
        for &z in &intervals {
            if relate(y, z) != second {
                continue;
            }
            for &&x in &xs {
                out.insert(relate(x, z));
            }
        }
    }
    out
}
