//! Monte Carlo random object finder.
//!
//! A walker starts at an object drawn from the prior. Each step it restarts
//! to a fresh prior draw with probability `epsilon` (always, from a dangling
//! object) and otherwise follows one outgoing link drawn from the current
//! object's transition row. Its long-run visit frequencies estimate the
//! PopRank vector independently of the power iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poprank::TransitionStructure;
use crate::web_popularity::PopularityVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub steps: u64,
    pub rng_seed: u64,
    /// Per-step restart probability in `(0, 1]`.
    pub epsilon: f64,
    /// Leading steps whose states are not counted.
    pub burn_in: u64,
}

impl SimConfig {
    pub fn new(steps: u64, rng_seed: u64, epsilon: f64) -> Self {
        Self {
            steps,
            rng_seed,
            epsilon,
            burn_in: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if self.steps <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "steps ({}) must exceed burn_in ({})",
                self.steps, self.burn_in
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitHistogram {
    counts: Vec<u64>,
}

impl VisitHistogram {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn distribution(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    fn merge(mut self, other: &VisitHistogram) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }
}

/// Cumulative tables for inverse-CDF sampling.
struct Sampler<'a> {
    transition: &'a TransitionStructure,
    row_cdf: Vec<Vec<f64>>,
    prior_cdf: Vec<f64>,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let total = cdf.last().copied().unwrap_or(0.0);
    cdf.partition_point(|&c| c <= u * total).min(cdf.len() - 1)
}

impl<'a> Sampler<'a> {
    fn new(transition: &'a TransitionStructure, prior: &PopularityVector) -> Self {
        let row_cdf = (0..transition.object_count())
            .map(|o| cumulative(transition.row(o).map(|(_, p)| p)))
            .collect();
        Self {
            transition,
            row_cdf,
            prior_cdf: cumulative(prior.as_slice().iter().copied()),
        }
    }

    fn restart(&self, rng: &mut ChaCha8Rng) -> usize {
        draw(&self.prior_cdf, rng.random::<f64>())
    }

    fn walk(&self, rng: &mut ChaCha8Rng, epsilon: f64, burn_in: u64, counted: u64) -> VisitHistogram {
        let mut counts = vec![0u64; self.transition.object_count()];
        let mut at = self.restart(rng);
        for step in 0..burn_in + counted {
            at = if self.transition.is_dangling(at) || rng.random::<f64>() < epsilon {
                self.restart(rng)
            } else {
                let (targets, _) = self.transition.row_slices(at);
                targets[draw(&self.row_cdf[at], rng.random::<f64>())]
            };
            if step >= burn_in {
                counts[at] += 1;
            }
        }
        VisitHistogram { counts }
    }
}

fn check_sizes(transition: &TransitionStructure, prior: &PopularityVector) -> Result<()> {
    if prior.len() != transition.object_count() {
        return Err(Error::SizeMismatch {
            expected: transition.object_count(),
            got: prior.len(),
        });
    }
    Ok(())
}

/// Runs one walker for `cfg.steps` steps, counting the state reached after
/// each step past `burn_in`.
pub fn simulate(
    transition: &TransitionStructure,
    prior: &PopularityVector,
    cfg: &SimConfig,
) -> Result<VisitHistogram> {
    cfg.validate()?;
    check_sizes(transition, prior)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    Ok(Sampler::new(transition, prior).walk(&mut rng, cfg.epsilon, cfg.burn_in, cfg.steps - cfg.burn_in))
}

/// Splits the counted steps over `walkers` independent walkers run in
/// parallel and sums their histograms.
///
/// Walker `i` uses `ChaCha8Rng::seed_from_u64(rng_seed)` on stream `i`,
/// performs its own `burn_in` steps, then counts
/// `(steps − burn_in) / walkers` steps, plus one if
/// `i < (steps − burn_in) % walkers`. The result is a function of the
/// config and `walkers` alone.
pub fn simulate_parallel(
    transition: &TransitionStructure,
    prior: &PopularityVector,
    cfg: &SimConfig,
    walkers: usize,
) -> Result<VisitHistogram> {
    cfg.validate()?;
    check_sizes(transition, prior)?;
    if walkers == 0 {
        return Err(Error::InvalidParameter("walkers must be at least 1".into()));
    }
    let sampler = Sampler::new(transition, prior);
    let counted = cfg.steps - cfg.burn_in;
    let w = walkers as u64;
    let parts: Vec<VisitHistogram> = (0..w)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(i);
            let share = counted / w + u64::from(i < counted % w);
            sampler.walk(&mut rng, cfg.epsilon, cfg.burn_in, share)
        })
        .collect();
    let empty = VisitHistogram {
        counts: vec![0; transition.object_count()],
    };
    Ok(parts.iter().fold(empty, VisitHistogram::merge))
}
