//! Qualitative temporal reasoning over Allen's interval algebra, with a typed
//! logical-form language that compiles to constraint networks, exhaustive
//! form search against answer-only supervision, a grammar-constrained beam
//! decoder, and TimeML ingestion and scoring.

pub mod algebra;
pub mod decoder;
pub mod dpd;
pub mod eval;
pub mod executor;
pub mod lang;
pub mod network;
pub mod pipeline;
pub mod timeml;

pub use algebra::{AllenRelation, RelationSet};
pub use decoder::{beam_search, BeamConfig, DecodeContext, ParserState, Scorer, TransitionSystem};
pub use dpd::{GoldDenotation, MatchMode, SearchConfig, SearchResult};
pub use eval::{DocPredictions, EvalReport, PredictedRelation};
pub use executor::{execute, BackgroundConstraint, Denotation, ExecutionContext};
pub use lang::{ActionSequence, LogicalForm, Production, Vocabulary};
pub use network::{ConsistencyStatus, ConstraintNetwork, NodeId, NodeKind, RelationGraph};
pub use pipeline::RunConfig;
pub use timeml::{TLink, TimeMLDocument};
