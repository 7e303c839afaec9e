//! PopRank: a restart random walk over the typed object graph where each
//! relationship type carries its own popularity propagation factor.
//!
//! From object `o`, the active types are those with at least one out-link
//! from `o` and a positive factor. Mass leaving `o` is split across active
//! types in proportion to their factors, then uniformly over `o`'s links of
//! that type. Objects with no active type are dangling and restart to the
//! prior, as does every walker with probability `epsilon` per step:
//!
//! ```text
//! R = ε·W + (1 − ε)·(Mᵀ R + D·W)
//! ```
//!
//! with `W` the web-popularity prior and `D` the mass on dangling objects.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::object_model::ObjectGraph;
use crate::web_popularity::{l1_distance, PopularityVector, RankRun};

/// One propagation factor per relationship type.
///
/// Factors are finite and non-negative with at least one positive. The walk
/// only depends on ratios between factors, so values above 1 are accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct PpfAssignment {
    factors: BTreeMap<String, f64>,
}

impl PpfAssignment {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let factors: BTreeMap<String, f64> =
            factors.into_iter().map(|(k, v)| (k.into(), v)).collect();
        for (name, &g) in &factors {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "factor for `{name}` must be finite and non-negative, got {g}"
                )));
            }
        }
        if !factors.values().any(|&g| g > 0.0) {
            return Err(Error::InvalidParameter(
                "at least one propagation factor must be positive".into(),
            ));
        }
        Ok(Self { factors })
    }

    pub fn get(&self, rel_name: &str) -> Option<f64> {
        self.factors.get(rel_name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.factors.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Every factor multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        Self::new(self.factors.iter().map(|(k, &v)| (k.clone(), v * c)))
    }

    /// Factors in the graph's relationship-type order.
    pub fn for_graph(&self, graph: &ObjectGraph) -> Result<Vec<f64>> {
        graph
            .relationship_types()
            .iter()
            .map(|rt| {
                self.get(&rt.rel_name)
                    .ok_or_else(|| Error::MissingFactor(rt.rel_name.clone()))
            })
            .collect()
    }
}

/// Row-stochastic object transition table in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionStructure {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
    dangling: Vec<bool>,
}

impl TransitionStructure {
    pub fn object_count(&self) -> usize {
        self.dangling.len()
    }

    pub fn is_dangling(&self, object: usize) -> bool {
        self.dangling[object]
    }

    /// Outgoing `(target, probability)` pairs of `object`. Empty when
    /// dangling.
    pub fn row(&self, object: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[object]..self.offsets[object + 1];
        self.targets[r.clone()].iter().copied().zip(self.probs[r].iter().copied())
    }

    pub(crate) fn row_slices(&self, object: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[object]..self.offsets[object + 1];
        (&self.targets[r.clone()], &self.probs[r])
    }
}

pub fn build_transition(graph: &ObjectGraph, ppf: &PpfAssignment) -> Result<TransitionStructure> {
    let gammas = ppf.for_graph(graph)?;
    let n = graph.object_count();
    let types = gammas.len();

    // out_by_type[o][t]: o's targets in type t, in stored order
    let mut out_by_type: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); types]; n];
    for (t, &g) in gammas.iter().enumerate() {
        if g > 0.0 {
            for &(s, d) in graph.links(t) {
                out_by_type[s][t].push(d);
            }
        }
    }

    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(graph.link_count());
    let mut probs = Vec::with_capacity(graph.link_count());
    let mut dangling = Vec::with_capacity(n);
    offsets.push(0);
    for per_type in &out_by_type {
        let active: f64 = per_type
            .iter()
            .zip(&gammas)
            .filter(|(links, _)| !links.is_empty())
            .map(|(_, &g)| g)
            .sum();
        dangling.push(active == 0.0);
        if active > 0.0 {
            for (links, &g) in per_type.iter().zip(&gammas) {
                if links.is_empty() {
                    continue;
                }
                let p = g / active / links.len() as f64;
                for &d in links {
                    targets.push(d);
                    probs.push(p);
                }
            }
        }
        offsets.push(targets.len());
    }
    Ok(TransitionStructure {
        offsets,
        targets,
        probs,
        dangling,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopRankConfig {
    /// Per-step restart probability.
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PopRankConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.15,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

impl PopRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn poprank(
    graph: &ObjectGraph,
    ppf: &PpfAssignment,
    prior: &PopularityVector,
    cfg: &PopRankConfig,
) -> Result<RankRun> {
    let transition = build_transition(graph, ppf)?;
    poprank_with_transition(&transition, prior, cfg)
}

/// Power iteration from `R₀ = W` over a prebuilt transition table.
pub fn poprank_with_transition(
    transition: &TransitionStructure,
    prior: &PopularityVector,
    cfg: &PopRankConfig,
) -> Result<RankRun> {
    cfg.validate()?;
    let n = transition.object_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if prior.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: prior.len(),
        });
    }
    let w = prior.as_slice();
    let mut rank = w.to_vec();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        sweep(transition, w, cfg.epsilon, &rank, &mut next);
        residual = l1_distance(&rank, &next);
        std::mem::swap(&mut rank, &mut next);
        if residual < cfg.tol {
            break;
        }
    }
    Ok(RankRun {
        scores: PopularityVector::normalized_in_place(rank),
        iterations,
        residual,
        converged: residual < cfg.tol,
    })
}

/// One application of the PopRank operator to `rank`.
pub fn poprank_step(
    transition: &TransitionStructure,
    prior: &PopularityVector,
    epsilon: f64,
    rank: &[f64],
) -> Vec<f64> {
    let mut next = vec![0.0; rank.len()];
    sweep(transition, prior.as_slice(), epsilon, rank, &mut next);
    next
}

fn sweep(transition: &TransitionStructure, w: &[f64], epsilon: f64, rank: &[f64], next: &mut [f64]) {
    let follow = 1.0 - epsilon;
    let dangling: f64 = rank
        .iter()
        .zip(&transition.dangling)
        .filter(|(_, &d)| d)
        .map(|(r, _)| r)
        .sum();
    let restart = epsilon + follow * dangling;
    for (x, &wi) in next.iter_mut().zip(w) {
        *x = restart * wi;
    }
    for (o, &r) in rank.iter().enumerate() {
        let (targets, probs) = transition.row_slices(o);
        let mass = follow * r;
        for (&t, &p) in targets.iter().zip(probs) {
            next[t] += mass * p;
        }
    }
}
