//! Object-level popularity ranking.
//!
//! Objects extracted from web pages are deduplicated into a typed graph
//! ([`object_model`]), seeded with a popularity prior derived from page
//! PageRank ([`web_popularity`]) and ranked by a restart random walk whose
//! per-relationship propagation factors ([`poprank`]) can be learned from
//! expert orderings ([`learning`]). [`surfer`] simulates the same walk as an
//! independent check, and [`io`] / [`report`] provide the TSV formats used by
//! the command-line tool.

pub mod compare;
pub mod error;
pub mod io;
pub mod learning;
pub mod object_model;
pub mod pipeline;
pub mod poprank;
pub mod report;
pub mod surfer;
pub mod synthetic;
pub mod web_popularity;

pub use error::{Error, Result};
pub use learning::{learn_ppf, rank_disagreement, Disagreement, LearnConfig, LearnOutcome, PartialRanking};
pub use object_model::{
    build_graph, merge_records, BuildDiagnostics, ObjectGraph, ObjectRecord, ObjectRef, ObjectTypeSchema, RawLink,
    RelationshipType, SchemaRegistry, WebObject,
};
pub use poprank::{
    build_transition, poprank, poprank_step, poprank_with_transition, PopRankConfig, PpfAssignment,
    TransitionStructure,
};
pub use surfer::{simulate, simulate_parallel, SimConfig, VisitHistogram};
pub use web_popularity::{
    pagerank, total_variation, web_popularity, PageGraph, PageObjectEntry, PageObjectMap, PageRankConfig,
    PopularityVector, RankRun,
};
