//! Learning propagation factors from an expert's partial ranking.
//!
//! The objective is the number of expert pairs `(higher, lower)` that the
//! induced PopRank scores fail to order strictly. It is piecewise constant
//! in the factors, so the search is derivative-free: an exhaustive (or
//! sampled) grid, then coordinate-wise refinement of the grid winner.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::object_model::ObjectGraph;
use crate::poprank::{build_transition, poprank_with_transition, PopRankConfig, PpfAssignment};
use crate::web_popularity::PopularityVector;

/// Largest number of grid combinations evaluated; bigger grids are sampled.
pub const GRID_CAP: usize = 10_000;

const MIN_FACTOR: f64 = 0.01;
const MAX_FACTOR: f64 = 1.0;

/// Strict ordering constraints over a subset of objects.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialRanking {
    pairs: Vec<(usize, usize)>,
}

impl PartialRanking {
    /// Builds from `(higher, lower)` pairs. Repeated pairs are kept once.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (h, l) in pairs {
            if h == l {
                return Err(Error::InvalidRanking(format!("object {h} ranked above itself")));
            }
            if seen.contains(&(l, h)) {
                return Err(Error::InvalidRanking(format!(
                    "contradictory constraints between {h} and {l}"
                )));
            }
            if seen.insert((h, l)) {
                out.push((h, l));
            }
        }
        Ok(Self { pairs: out })
    }

    /// Expands a full order (best first) into all implied pairs.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        Self::from_parts(order, std::iter::empty())
    }

    /// An ordered list plus explicit pairs, merged into one constraint set.
    pub fn from_parts(order: &[usize], pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let implied = order
            .iter()
            .enumerate()
            .flat_map(|(i, &h)| order[i + 1..].iter().map(move |&l| (h, l)));
        Self::from_pairs(implied.chain(pairs))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Disagreement {
    pub violations: usize,
    pub total: usize,
}

/// Counts expert pairs not strictly ordered by `scores`. Ties are
/// violations.
pub fn rank_disagreement(scores: &[f64], expert: &PartialRanking) -> Result<Disagreement> {
    let mut violations = 0;
    for &(h, l) in expert.pairs() {
        let (Some(&sh), Some(&sl)) = (scores.get(h), scores.get(l)) else {
            return Err(Error::Unresolved(format!(
                "ranking constraint ({h}, {l}) outside {} objects",
                scores.len()
            )));
        };
        if sh <= sl {
            violations += 1;
        }
    }
    Ok(Disagreement {
        violations,
        total: expert.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    /// Levels per factor: `0.05` followed by `k / (resolution − 1)` for
    /// `k = 1..resolution`.
    pub grid_resolution: usize,
    /// Objective evaluations allowed in the refinement phase.
    pub refine_iters: usize,
    pub refine_step: f64,
    pub rng_seed: u64,
    pub poprank: PopRankConfig,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 5,
            refine_iters: 200,
            refine_step: 0.1,
            rng_seed: 0,
            poprank: PopRankConfig::default(),
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid_resolution must be at least 2, got {}",
                self.grid_resolution
            )));
        }
        if !(self.refine_step > 0.0 && self.refine_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "refine_step must be positive, got {}",
                self.refine_step
            )));
        }
        self.poprank.validate()
    }
}

/// Factor levels tried for each relationship type during the grid phase.
pub fn grid_levels(resolution: usize) -> Vec<f64> {
    let top = (resolution - 1) as f64;
    std::iter::once(0.05)
        .chain((1..resolution).map(|k| k as f64 / top))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    pub ppf: PpfAssignment,
    pub violations: usize,
    pub total_pairs: usize,
    /// Objective evaluations over both phases.
    pub evaluations: usize,
    pub grid_candidates: usize,
    pub grid_violations: usize,
}

struct Objective<'a> {
    graph: &'a ObjectGraph,
    prior: &'a PopularityVector,
    expert: &'a PartialRanking,
    cfg: &'a PopRankConfig,
}

impl Objective<'_> {
    fn assignment(&self, gammas: &[f64]) -> Result<PpfAssignment> {
        PpfAssignment::new(
            self.graph
                .relationship_types()
                .iter()
                .zip(gammas)
                .map(|(rt, &g)| (rt.rel_name.clone(), g)),
        )
    }

    fn violations(&self, gammas: &[f64]) -> Result<usize> {
        let transition = build_transition(self.graph, &self.assignment(gammas)?)?;
        let run = poprank_with_transition(&transition, self.prior, self.cfg)?;
        Ok(rank_disagreement(run.scores.as_slice(), self.expert)?.violations)
    }
}

/// Grid candidates in evaluation order: every combination in mixed-radix
/// order (last type fastest) when there are at most [`GRID_CAP`], otherwise
/// `GRID_CAP` distinct combinations drawn uniformly with `seed`.
fn grid_candidates(levels: &[f64], types: usize, seed: u64) -> Vec<Vec<f64>> {
    let r = levels.len();
    let total = u32::try_from(types)
        .ok()
        .and_then(|k| r.checked_pow(k))
        .filter(|&t| t <= GRID_CAP);
    match total {
        Some(total) => (0..total)
            .map(|mut idx| {
                let mut combo = vec![0.0; types];
                for slot in combo.iter_mut().rev() {
                    *slot = levels[idx % r];
                    idx /= r;
                }
                combo
            })
            .collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(GRID_CAP);
            let mut out = Vec::with_capacity(GRID_CAP);
            while out.len() < GRID_CAP {
                let idx: Vec<usize> = (0..types).map(|_| rng.random_range(0..r)).collect();
                if seen.insert(idx.clone()) {
                    out.push(idx.into_iter().map(|i| levels[i]).collect());
                }
            }
            out
        }
    }
}

/// Searches for factors whose PopRank order best agrees with `expert`.
///
/// Grid candidates are scored in parallel and reduced by (violations,
/// evaluation order). Refinement then nudges one factor at a time by
/// `±step` (clamped to `[0.01, 1]`), keeping a move only if it strictly
/// reduces violations, and halves the step after a sweep with no gain.
pub fn learn_ppf(
    graph: &ObjectGraph,
    prior: &PopularityVector,
    expert: &PartialRanking,
    cfg: &LearnConfig,
) -> Result<LearnOutcome> {
    cfg.validate()?;
    if expert.is_empty() {
        return Err(Error::InvalidRanking("expert ranking is empty".into()));
    }
    let types = graph.relationship_types().len();
    if types == 0 {
        return Err(Error::InvalidGraph("graph has no relationship types".into()));
    }
    if prior.len() != graph.object_count() {
        return Err(Error::SizeMismatch {
            expected: graph.object_count(),
            got: prior.len(),
        });
    }
    // surfaces unknown objects before any search
    rank_disagreement(prior.as_slice(), expert)?;

    let objective = Objective {
        graph,
        prior,
        expert,
        cfg: &cfg.poprank,
    };

    let candidates = grid_candidates(&grid_levels(cfg.grid_resolution), types, cfg.rng_seed);
    let scored: Vec<usize> = candidates
        .par_iter()
        .map(|c| objective.violations(c))
        .collect::<Result<_>>()?;
    let (best_idx, &grid_violations) = scored
        .iter()
        .enumerate()
        .min_by_key(|&(i, v)| (*v, i))
        .expect("grid is never empty");
    let mut best = candidates[best_idx].clone();
    let mut best_violations = grid_violations;

    let mut step = cfg.refine_step;
    let mut evaluations = 0;
    'refine: while evaluations < cfg.refine_iters && best_violations > 0 {
        let mut improved = false;
        for i in 0..types {
            for dir in [1.0, -1.0] {
                if evaluations >= cfg.refine_iters || best_violations == 0 {
                    break 'refine;
                }
                let mut cand = best.clone();
                cand[i] = (cand[i] + dir * step).clamp(MIN_FACTOR, MAX_FACTOR);
                if cand[i] == best[i] {
                    continue;
                }
                evaluations += 1;
                let v = objective.violations(&cand)?;
                if v < best_violations {
                    best = cand;
                    best_violations = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
            if step < f64::EPSILON {
                break;
            }
        }
    }

    Ok(LearnOutcome {
        ppf: objective.assignment(&best)?,
        violations: best_violations,
        total_pairs: expert.len(),
        evaluations: candidates.len() + evaluations,
        grid_candidates: candidates.len(),
        grid_violations,
    })
}
