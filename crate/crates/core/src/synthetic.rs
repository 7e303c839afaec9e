//! Seeded synthetic graphs for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::object_model::{build_graph, ObjectGraph, ObjectRef, RawLink, RelationshipType, WebObject};
use crate::poprank::PpfAssignment;
use crate::web_popularity::PopularityVector;

/// Object type used by every synthetic graph.
pub const NODE_TYPE: &str = "node";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpec {
    pub objects: usize,
    /// Relationship types, named `r0`, `r1`, ...
    pub types: usize,
    pub avg_out_degree: f64,
}

fn nodes(n: usize) -> Vec<WebObject> {
    (0..n)
        .map(|i| WebObject {
            object_id: i,
            type_name: NODE_TYPE.into(),
            key: vec![format!("n{i}")],
            attribute_values: [("name".to_string(), format!("n{i}"))].into(),
            merged_record_count: 1,
            conflict_count: 0,
        })
        .collect()
}

fn node_ref(i: usize) -> ObjectRef {
    ObjectRef::new(NODE_TYPE, vec![format!("n{i}")])
}

/// Graph over `n` nodes with the named relationship types (all
/// node→node). Each edge is `(type index, source, target)`; repeats are
/// dropped.
pub fn uniform_graph(n: usize, rel_names: &[&str], edges: &[(usize, usize, usize)]) -> ObjectGraph {
    let rels = rel_names
        .iter()
        .map(|r| RelationshipType::new(*r, NODE_TYPE, NODE_TYPE))
        .collect();
    let raw: Vec<RawLink> = edges
        .iter()
        .map(|&(t, s, d)| RawLink {
            source: node_ref(s),
            rel_name: rel_names[t].to_string(),
            target: node_ref(d),
        })
        .collect();
    build_graph(nodes(n), rels, &raw, true)
        .expect("synthetic graph is well formed")
        .0
}

/// Random multi-type graph: each type receives about
/// `objects * avg_out_degree / types` uniformly drawn edges.
pub fn random_object_graph(spec: &GraphSpec, seed: u64) -> ObjectGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..spec.types).map(|t| format!("r{t}")).collect();
    let names_ref: Vec<&str> = names.iter().map(String::as_str).collect();
    let per_type = if spec.types == 0 {
        0
    } else {
        (spec.objects as f64 * spec.avg_out_degree / spec.types as f64).round() as usize
    };
    let mut edges = Vec::new();
    if spec.objects > 0 {
        for t in 0..spec.types {
            for _ in 0..per_type {
                edges.push((t, rng.random_range(0..spec.objects), rng.random_range(0..spec.objects)));
            }
        }
    }
    uniform_graph(spec.objects, &names_ref, &edges)
}

/// Factors drawn uniformly from `[0.05, 1)` for every type of `graph`.
pub fn random_ppf(graph: &ObjectGraph, seed: u64) -> PpfAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    PpfAssignment::new(
        graph
            .relationship_types()
            .iter()
            .map(|rt| (rt.rel_name.clone(), rng.random_range(0.05..1.0))),
    )
    .expect("positive factors")
}

/// Strictly positive random prior on `n` objects.
pub fn random_prior(n: usize, seed: u64) -> PopularityVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
    PopularityVector::from_raw((0..n).map(|_| rng.random_range(0.1..1.0)).collect())
        .expect("positive prior")
}
