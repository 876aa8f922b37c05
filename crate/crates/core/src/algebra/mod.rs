//! Allen's thirteen basic interval relations and disjunctive relation sets.

pub mod oracle;
mod table;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use oracle::{compose_oracle, relate, PointInterval};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown relation name `{0}`")]
    UnknownRelation(String),
}

/// One of the thirteen jointly exhaustive, pairwise disjoint relations
/// between two proper intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllenRelation {
    Before,
    After,
    Meets,
    MetBy,
    Overlaps,
    OverlappedBy,
    Starts,
    StartedBy,
    During,
    Contains,
    Finishes,
    FinishedBy,
    Equals,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        AllenRelation::Before,
        AllenRelation::After,
        AllenRelation::Meets,
        AllenRelation::MetBy,
        AllenRelation::Overlaps,
        AllenRelation::OverlappedBy,
        AllenRelation::Starts,
        AllenRelation::StartedBy,
        AllenRelation::During,
        AllenRelation::Contains,
        AllenRelation::Finishes,
        AllenRelation::FinishedBy,
        AllenRelation::Equals,
    ];

    /// Dense index in `0..13`, matching the order of [`AllenRelation::ALL`].
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub const fn converse(self) -> Self {
        use AllenRelation::*;
        match self {
            Before => After,
            After => Before,
            Meets => MetBy,
            MetBy => Meets,
            Overlaps => OverlappedBy,
            OverlappedBy => Overlaps,
            Starts => StartedBy,
            StartedBy => Starts,
            During => Contains,
            Contains => During,
            Finishes => FinishedBy,
            FinishedBy => Finishes,
            Equals => Equals,
        }
    }

    pub const fn name(self) -> &'static str {
        use AllenRelation::*;
        match self {
            Before => "before",
            After => "after",
            Meets => "meets",
            MetBy => "met_by",
            Overlaps => "overlaps",
            OverlappedBy => "overlapped_by",
            Starts => "starts",
            StartedBy => "started_by",
            During => "during",
            Contains => "contains",
            Finishes => "finishes",
            FinishedBy => "finished_by",
            Equals => "equals",
        }
    }

    /// Relations ordered by name, the order used by every text serialization.
    pub fn by_name() -> [AllenRelation; 13] {
        let mut all = Self::ALL;
        all.sort_by_key(|r| r.name());
        all
    }
}

impl fmt::Display for AllenRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllenRelation {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| AlgebraError::UnknownRelation(s.to_string()))
    }
}

/// A disjunction of basic relations, stored as a 13-bit mask.
///
/// The empty set means the constraint is unsatisfiable; the full set carries
/// no information.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RelationSet(u16);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    pub const FULL: RelationSet = RelationSet((1 << 13) - 1);
    pub const EQUALS: RelationSet = RelationSet::single(AllenRelation::Equals);

    pub const fn single(r: AllenRelation) -> Self {
        RelationSet(1 << r.index())
    }

    /// Builds a set from a raw mask; bits above 13 are dropped.
    pub const fn from_bits(bits: u16) -> Self {
        RelationSet(bits & Self::FULL.0)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_full(self) -> bool {
        self.0 == Self::FULL.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn contains(self, r: AllenRelation) -> bool {
        self.0 & (1 << r.index()) != 0
    }

    pub fn insert(&mut self, r: AllenRelation) {
        self.0 |= 1 << r.index();
    }

    pub const fn union(self, other: Self) -> Self {
        RelationSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: Self) -> Self {
        RelationSet(self.0 & other.0)
    }

    pub const fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// The single member, if the set is a singleton.
    pub fn as_single(self) -> Option<AllenRelation> {
        if self.len() == 1 {
            AllenRelation::from_index(self.0.trailing_zeros() as usize)
        } else {
            None
        }
    }

    pub fn iter(self) -> impl Iterator<Item = AllenRelation> {
        AllenRelation::ALL.into_iter().filter(move |r| self.contains(*r))
    }

    pub fn converse(self) -> Self {
        self.iter().map(AllenRelation::converse).collect()
    }

    /// Union of the table entries for every pair of members.
    pub fn compose(self, other: Self) -> Self {
        let mut out = 0u16;
        for a in self.iter() {
            let row = &table::COMPOSITION[a.index()];
            for b in other.iter() {
                out |= row[b.index()];
            }
            if out == Self::FULL.0 {
                break;
            }
        }
        RelationSet(out)
    }

    /// Member names in name order.
    pub fn names(self) -> Vec<&'static str> {
        AllenRelation::by_name()
            .into_iter()
            .filter(|r| self.contains(*r))
            .map(AllenRelation::name)
            .collect()
    }

    /// Parses a comma-joined list of relation names. The empty string is the
    /// empty set.
    pub fn parse_list(s: &str) -> Result<Self, AlgebraError> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(AllenRelation::from_str)
            .collect()
    }
}

impl From<AllenRelation> for RelationSet {
    fn from(r: AllenRelation) -> Self {
        RelationSet::single(r)
    }
}

impl FromIterator<AllenRelation> for RelationSet {
    fn from_iter<I: IntoIterator<Item = AllenRelation>>(iter: I) -> Self {
        let mut set = RelationSet::EMPTY;
        for r in iter {
            set.insert(r);
        }
        set
    }
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}

impl fmt::Debug for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for RelationSet {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationSet::parse_list(s)
    }
}

impl Serialize for RelationSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.names())
    }
}

impl<'de> Deserialize<'de> for RelationSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        names
            .iter()
            .map(|n| n.parse::<AllenRelation>())
            .collect::<Result<RelationSet, _>>()
            .map_err(serde::de::Error::custom)
    }
}
