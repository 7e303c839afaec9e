//! End-to-end runs over a loaded corpus: page PageRank, the object prior,
//! then ranking, comparison, simulation or learning.

use crate::compare::{kendall_tau, rank_order, rank_positions};
use crate::error::Result;
use crate::io::Corpus;
use crate::learning::{learn_ppf, LearnConfig, LearnOutcome, PartialRanking};
use crate::poprank::{build_transition, poprank_with_transition, PopRankConfig, PpfAssignment};
use crate::report::{RankReport, RankedObject, Report};
use crate::surfer::{simulate, SimConfig, VisitHistogram};
use crate::web_popularity::{pagerank, total_variation, web_popularity, PageRankConfig, PopularityVector, RankRun};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Settings {
    pub pagerank: PageRankConfig,
    pub poprank: PopRankConfig,
}

#[derive(Debug, Clone)]
pub struct PriorRun {
    pub pages: RankRun,
    pub prior: PopularityVector,
}

/// PageRank over the corpus pages projected onto objects. A corpus with no
/// pages yields the uniform prior.
pub fn corpus_prior(corpus: &Corpus, cfg: &PageRankConfig) -> Result<PriorRun> {
    let pages = if corpus.pages.page_count() == 0 {
        cfg.validate()?;
        RankRun {
            scores: PopularityVector::normalized_in_place(Vec::new()),
            iterations: 0,
            residual: 0.0,
            converged: true,
        }
    } else {
        pagerank(&corpus.pages, cfg)?
    };
    let prior = web_popularity(&corpus.graph, &pages.scores, &corpus.page_objects)?;
    Ok(PriorRun { pages, prior })
}

fn describe(corpus: &Corpus, id: usize) -> (String, String) {
    let o = &corpus.graph.objects()[id];
    (o.type_name.clone(), o.key_string())
}

fn run_meta(settings: &Settings, ppf: &PpfAssignment) -> Vec<(String, String)> {
    let mut meta = vec![
        ("epsilon".to_string(), settings.poprank.epsilon.to_string()),
        ("damping".to_string(), settings.pagerank.damping.to_string()),
        ("tol".to_string(), settings.poprank.tol.to_string()),
        ("max_iter".to_string(), settings.poprank.max_iter.to_string()),
    ];
    meta.extend(ppf.iter().map(|(k, g)| (format!("gamma.{k}"), g.to_string())));
    meta
}

#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub report: RankReport,
    pub prior: PriorRun,
    pub objects: RankRun,
}

impl RankOutcome {
    pub fn converged(&self) -> bool {
        self.prior.pages.converged && self.objects.converged
    }
}

pub fn rank_corpus(corpus: &Corpus, ppf: &PpfAssignment, settings: &Settings) -> Result<RankOutcome> {
    let prior = corpus_prior(corpus, &settings.pagerank)?;
    let transition = build_transition(&corpus.graph, ppf)?;
    let objects = poprank_with_transition(&transition, &prior.prior, &settings.poprank)?;
    let scores = objects.scores.as_slice();
    let rows = rank_order(scores)
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let (type_name, key) = describe(corpus, id);
            RankedObject {
                rank: i + 1,
                object_id: id,
                type_name,
                key,
                score: scores[id],
            }
        })
        .collect();
    let mut meta = run_meta(settings, ppf);
    meta.extend([
        ("page_iterations".to_string(), prior.pages.iterations.to_string()),
        ("page_residual".to_string(), prior.pages.residual.to_string()),
        ("iterations".to_string(), objects.iterations.to_string()),
        ("residual".to_string(), objects.residual.to_string()),
        (
            "converged".to_string(),
            (prior.pages.converged && objects.converged).to_string(),
        ),
    ]);
    Ok(RankOutcome {
        report: RankReport { rows, meta },
        prior,
        objects,
    })
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub report: Report,
    pub object_ranks: Vec<usize>,
    pub page_ranks: Vec<usize>,
    pub tau: f64,
    pub converged: bool,
}

/// Object-level PopRank against the page-level proxy (the prior alone).
pub fn compare_corpus(corpus: &Corpus, ppf: &PpfAssignment, settings: &Settings) -> Result<CompareOutcome> {
    let ranked = rank_corpus(corpus, ppf, settings)?;
    let object_scores = ranked.objects.scores.as_slice();
    let page_scores = ranked.prior.prior.as_slice();
    let object_ranks = rank_positions(object_scores);
    let page_ranks = rank_positions(page_scores);
    let tau = kendall_tau(&object_ranks, &page_ranks);

    let mut report = Report::new(
        "compare",
        &["object_id", "type", "key", "object_score", "object_rank", "page_score", "page_rank"],
    );
    for (k, v) in run_meta(settings, ppf) {
        report.set_meta(k, v);
    }
    report.set_meta("kendall_tau", tau);
    for id in rank_order(object_scores) {
        let (t, key) = describe(corpus, id);
        report.push_row(vec![
            id.to_string(),
            t,
            key,
            object_scores[id].to_string(),
            object_ranks[id].to_string(),
            page_scores[id].to_string(),
            page_ranks[id].to_string(),
        ]);
    }
    Ok(CompareOutcome {
        report,
        converged: ranked.converged(),
        object_ranks,
        page_ranks,
        tau,
    })
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub report: Report,
    pub histogram: VisitHistogram,
    pub analytic: PopularityVector,
    pub tv: f64,
    pub converged: bool,
}

/// Simulates the surfer and measures its distance from the analytic scores.
/// With `epsilon = 1` the walk never follows links, so the reference is the
/// prior itself.
pub fn simulate_corpus(
    corpus: &Corpus,
    ppf: &PpfAssignment,
    settings: &Settings,
    sim: &SimConfig,
) -> Result<SimulateOutcome> {
    sim.validate()?;
    let prior = corpus_prior(corpus, &settings.pagerank)?;
    let transition = build_transition(&corpus.graph, ppf)?;
    let (analytic, reference, converged) = if sim.epsilon >= 1.0 {
        (prior.prior.clone(), "prior", prior.pages.converged)
    } else {
        let cfg = PopRankConfig {
            epsilon: sim.epsilon,
            ..settings.poprank
        };
        let run = poprank_with_transition(&transition, &prior.prior, &cfg)?;
        let ok = run.converged && prior.pages.converged;
        (run.scores, "poprank", ok)
    };
    let histogram = simulate(&transition, &prior.prior, sim)?;
    let empirical = histogram.distribution();
    let tv = total_variation(&empirical, analytic.as_slice());

    let mut report = Report::new("simulate", &["object_id", "type", "key", "visits", "empirical", "analytic"]);
    report.set_meta("steps", sim.steps);
    report.set_meta("burn_in", sim.burn_in);
    report.set_meta("seed", sim.rng_seed);
    report.set_meta("epsilon", sim.epsilon);
    report.set_meta("damping", settings.pagerank.damping);
    for (k, g) in ppf.iter() {
        report.set_meta(format!("gamma.{k}"), g);
    }
    report.set_meta("reference", reference);
    report.set_meta("tv_distance", tv);
    for id in 0..corpus.graph.object_count() {
        let (t, key) = describe(corpus, id);
        report.push_row(vec![
            id.to_string(),
            t,
            key,
            histogram.counts()[id].to_string(),
            empirical[id].to_string(),
            analytic[id].to_string(),
        ]);
    }
    Ok(SimulateOutcome {
        report,
        histogram,
        analytic,
        tv,
        converged,
    })
}

#[derive(Debug, Clone)]
pub struct LearnRun {
    pub outcome: LearnOutcome,
    pub report: Report,
    /// False when the graph has a single relationship type, whose factor
    /// cannot affect the ranking.
    pub identifiable: bool,
}

pub fn learn_corpus(
    corpus: &Corpus,
    expert: &PartialRanking,
    pagerank_cfg: &PageRankConfig,
    cfg: &LearnConfig,
) -> Result<LearnRun> {
    let prior = corpus_prior(corpus, pagerank_cfg)?;
    let outcome = learn_ppf(&corpus.graph, &prior.prior, expert, cfg)?;
    let identifiable = corpus.graph.relationship_types().len() > 1;

    let mut report = Report::new("learn", &["rel_name", "gamma"]);
    report.set_meta("violations", outcome.violations);
    report.set_meta("total_pairs", outcome.total_pairs);
    report.set_meta("grid_violations", outcome.grid_violations);
    report.set_meta("grid_candidates", outcome.grid_candidates);
    report.set_meta("evaluations", outcome.evaluations);
    report.set_meta("identifiable", identifiable);
    report.set_meta("seed", cfg.rng_seed);
    report.set_meta("epsilon", cfg.poprank.epsilon);
    for (k, g) in outcome.ppf.iter() {
        report.push_row(vec![k.to_string(), g.to_string()]);
    }
    Ok(LearnRun {
        outcome,
        report,
        identifiable,
    })
}
