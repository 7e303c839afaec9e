//! Page-level PageRank and its projection onto objects through page blocks.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::object_model::ObjectGraph;

/// Non-negative scores summing to one, indexed by object id (or page index).
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityVector(Vec<f64>);

impl PopularityVector {
    /// Normalizes `raw` to sum 1. Rejects negative or non-finite entries and
    /// an all-zero vector.
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty popularity vector".into()));
        }
        if raw.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "popularity entries must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter("popularity vector sums to zero".into()));
        }
        Ok(Self(raw.into_iter().map(|x| x / sum).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn normalized_in_place(mut v: Vec<f64>) -> Self {
        let sum: f64 = v.iter().sum();
        if sum > 0.0 {
            v.iter_mut().for_each(|x| *x /= sum);
        }
        Self(v)
    }
}

impl std::ops::Index<usize> for PopularityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Half the L1 distance between two distributions.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "distributions differ in length");
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Outcome of a power iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRun {
    pub scores: PopularityVector,
    pub iterations: usize,
    /// L1 change of the final sweep.
    pub residual: f64,
    pub converged: bool,
}

/// Directed page hyperlink graph over dense page indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageGraph {
    out_links: Vec<Vec<usize>>,
}

impl PageGraph {
    /// Builds a graph on `n` pages. Self-loops are kept, repeated edges
    /// dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out_links = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (s, t) in edges {
            if s >= n || t >= n {
                return Err(Error::InvalidGraph(format!(
                    "hyperlink ({s}, {t}) outside {n} pages"
                )));
            }
            if seen.insert((s, t)) {
                out_links[s].push(t);
            }
        }
        Ok(Self { out_links })
    }

    pub fn page_count(&self) -> usize {
        self.out_links.len()
    }

    pub fn out_links(&self, page: usize) -> &[usize] {
        &self.out_links[page]
    }

    pub fn edge_count(&self) -> usize {
        self.out_links.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
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

/// PageRank with uniform teleport; dangling pages spread their mass over all
/// pages. Stops when the L1 change of a sweep drops below `tol`. Running out
/// of iterations is not an error: inspect [`RankRun::converged`].
pub fn pagerank(graph: &PageGraph, cfg: &PageRankConfig) -> Result<RankRun> {
    cfg.validate()?;
    let n = graph.page_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let inv_n = 1.0 / n as f64;
    let d = cfg.damping;
    let mut rank = vec![inv_n; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let dangling: f64 = (0..n)
            .filter(|&p| graph.out_links[p].is_empty())
            .map(|p| rank[p])
            .sum();
        next.fill((1.0 - d) * inv_n + d * dangling * inv_n);
        for (p, outs) in graph.out_links.iter().enumerate() {
            if outs.is_empty() {
                continue;
            }
            let share = d * rank[p] / outs.len() as f64;
            for &q in outs {
                next[q] += share;
            }
        }
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

/// One `(page, object)` containment, with an optional block weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageObjectEntry {
    pub page: usize,
    pub object: usize,
    /// `None` means no explicit block weight, counted as 1 before the
    /// per-page normalization.
    pub block_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PageObjectMap {
    entries: Vec<PageObjectEntry>,
}

impl PageObjectMap {
    pub fn new(entries: Vec<PageObjectEntry>) -> Result<Self> {
        for e in &entries {
            if let Some(w) = e.block_weight {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "block weight for page {} object {} must be non-negative, got {w}",
                        e.page, e.object
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[PageObjectEntry] {
        &self.entries
    }

    /// Entries with block weights normalized to sum 1 within each page.
    /// Pages whose weights are all zero contribute nothing.
    pub fn normalized(&self) -> Vec<(usize, usize, f64)> {
        let pages = self.entries.iter().map(|e| e.page).max().map_or(0, |m| m + 1);
        let mut totals = vec![0.0; pages];
        for e in &self.entries {
            totals[e.page] += e.block_weight.unwrap_or(1.0);
        }
        self.entries
            .iter()
            .map(|e| {
                let t = totals[e.page];
                let w = if t > 0.0 { e.block_weight.unwrap_or(1.0) / t } else { 0.0 };
                (e.page, e.object, w)
            })
            .collect()
    }
}

/// Object prior: each page passes its score to its objects in proportion to
/// block weight. Unmapped objects get nothing; an all-zero result falls back
/// to uniform.
pub fn web_popularity(
    objects: &ObjectGraph,
    page_scores: &PopularityVector,
    map: &PageObjectMap,
) -> Result<PopularityVector> {
    let n = objects.object_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut raw = vec![0.0; n];
    for (page, object, w) in map.normalized() {
        if page >= page_scores.len() {
            return Err(Error::Unresolved(format!("page {page} in page-object map")));
        }
        if object >= n {
            return Err(Error::Unresolved(format!("object {object} in page-object map")));
        }
        raw[object] += page_scores[page] * w;
    }
    if raw.iter().all(|&x| x == 0.0) {
        return Ok(PopularityVector::uniform(n));
    }
    Ok(PopularityVector::normalized_in_place(raw))
}
