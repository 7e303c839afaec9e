//! Acceptance suite: one check per criterion, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed; the process
//! fails if any criterion fails.

mod support;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use poprank::compare::rank_order;
use poprank::io::{load_corpus, write_links, write_objects, write_schemas, Corpus, CorpusPaths};
use poprank::pipeline::{compare_corpus, learn_corpus, rank_corpus, Settings};
use poprank::report::{RankReport, Report};
use poprank::synthetic::{random_object_graph, random_ppf, random_prior, GraphSpec};
use poprank::{
    build_transition, pagerank, poprank as run_poprank, poprank_with_transition, simulate, total_variation, LearnConfig, ObjectGraph,
    PageGraph, PageRankConfig, PartialRanking, PopRankConfig, PopularityVector, PpfAssignment, SimConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{dense_pagerank, node_corpus, path_str, run_cli, synthetic_corpus, CorpusFiles};
use tempfile::TempDir;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
type NamedGraph = (&'static str, usize, Vec<(usize, usize)>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(dir: &Path) -> Corpus {
    load_corpus(&CorpusPaths::in_dir(dir), false).expect("corpus loads").0
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn pagerank_correctness() -> Check {
    let graphs: [NamedGraph; 5] = [
        ("cycle", 5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]),
        ("star", 6, (1..6).map(|leaf| (leaf, 0)).collect()),
        ("chain", 4, vec![(0, 1), (1, 2), (2, 3)]),
        ("dangling", 7, vec![(0, 1), (0, 2), (1, 2), (2, 0), (3, 2), (6, 5)]),
        (
            "disconnected",
            10,
            vec![(0, 1), (1, 0), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (6, 7), (7, 6), (8, 9)],
        ),
    ];
    let cfg = PageRankConfig::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (name, n, edges) in &graphs {
        let g = PageGraph::from_edges(*n, edges.iter().copied()).map_err(|e| e.to_string())?;
        let run = pagerank(&g, &cfg).map_err(|e| e.to_string())?;
        let diff = max_abs_diff(run.scores.as_slice(), &dense_pagerank(*n, edges, cfg.damping));
        ensure(diff < 1e-9, || format!("{name}: max entry error {diff:e}"))?;
        worst = worst.max(diff);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("5 graphs, max entry error {worst:.2e}, {elapsed:?}"))
}

fn stochastic_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_row, mut worst_sum) = (0.0f64, 0.0f64);
    for g_idx in 0..100 {
        let spec = GraphSpec {
            objects: rng.random_range(1..=50),
            types: rng.random_range(1..=4),
            avg_out_degree: rng.random_range(0.5..4.0),
        };
        let seed = rng.random();
        let g = random_object_graph(&spec, seed);
        let ppf = random_ppf(&g, seed);
        let t = build_transition(&g, &ppf).map_err(|e| e.to_string())?;
        for o in 0..spec.objects {
            if !t.is_dangling(o) {
                let s: f64 = t.row(o).map(|(_, p)| p).sum();
                worst_row = worst_row.max((s - 1.0).abs());
            }
        }
        let run = poprank_with_transition(&t, &random_prior(spec.objects, seed), &PopRankConfig::default())
            .map_err(|e| e.to_string())?;
        let sum: f64 = run.scores.as_slice().iter().sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        ensure(worst_row < 1e-12 && worst_sum < 1e-12, || {
            format!("graph {g_idx}: row error {worst_row:e}, sum error {worst_sum:e}")
        })?;
    }
    Ok(format!("100 graphs, max row error {worst_row:.1e}, max sum error {worst_sum:.1e}"))
}

fn reduction_to_pagerank() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let epsilons = [0.15, 0.1, 0.3, 0.5];
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = rng.random_range(2..=40);
        let spec = GraphSpec {
            objects: n,
            types: 1,
            avg_out_degree: rng.random_range(0.5..3.0),
        };
        let g = random_object_graph(&spec, rng.random());
        let eps = epsilons[i % epsilons.len()];
        let ppf = PpfAssignment::new([("r0", 1.0)]).unwrap();
        let cfg = PopRankConfig {
            epsilon: eps,
            ..Default::default()
        };
        let pop = run_poprank(&g, &ppf, &PopularityVector::uniform(n), &cfg).map_err(|e| e.to_string())?;
        let pages = PageGraph::from_edges(n, g.links(0).iter().copied()).unwrap();
        let pr = pagerank(
            &pages,
            &PageRankConfig {
                damping: 1.0 - eps,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let diff = max_abs_diff(pop.scores.as_slice(), pr.scores.as_slice());
        ensure(diff < 1e-9, || format!("graph {i} (eps {eps}): max entry error {diff:e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("20 graphs, max entry error {worst:.2e}"))
}

fn scale_invariance() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let spec = GraphSpec {
            objects: 10 + 2 * seed as usize,
            types: 1 + (seed as usize % 4),
            avg_out_degree: 2.0,
        };
        let g = random_object_graph(&spec, seed);
        let ppf = random_ppf(&g, seed);
        let prior = random_prior(spec.objects, seed);
        let base = run_poprank(&g, &ppf, &prior, &PopRankConfig::default()).map_err(|e| e.to_string())?;
        for c in [0.1, 3.0, 10.0] {
            let scaled = run_poprank(&g, &ppf.scaled(c).unwrap(), &prior, &PopRankConfig::default())
                .map_err(|e| e.to_string())?;
            let diff = max_abs_diff(base.scores.as_slice(), scaled.scores.as_slice());
            ensure(diff < 1e-12, || format!("graph {seed}, c = {c}: max change {diff:e}"))?;
            worst = worst.max(diff);
        }
    }
    Ok(format!("20 graphs x c in {{0.1, 3, 10}}, max change {worst:.1e}"))
}

fn monte_carlo_oracle() -> Check {
    let specs = [(5, 1), (10, 2), (12, 2), (16, 3), (20, 3)];
    let mut lines = Vec::new();
    for (i, &(objects, types)) in specs.iter().enumerate() {
        let seed = 100 + i as u64;
        let g = random_object_graph(
            &GraphSpec {
                objects,
                types,
                avg_out_degree: 2.0,
            },
            seed,
        );
        let t = build_transition(&g, &random_ppf(&g, seed)).map_err(|e| e.to_string())?;
        let prior = random_prior(objects, seed);
        let analytic = poprank_with_transition(&t, &prior, &PopRankConfig::default()).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let hist = simulate(&t, &prior, &SimConfig::new(1_000_000, seed, 0.15)).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let tv = total_variation(&hist.distribution(), analytic.scores.as_slice());
        ensure(tv < 0.01, || format!("graph {i} ({objects} objects): TV {tv:.4}"))?;
        ensure(elapsed < Duration::from_secs(10), || format!("graph {i}: took {elapsed:?}"))?;
        lines.push(format!("{tv:.4}"));
    }
    Ok(format!("5 graphs at 1e6 steps, TV = [{}]", lines.join(", ")))
}

fn planted_recovery() -> Check {
    let planted = [(0.8, 0.2), (0.6, 0.4), (0.9, 0.1)];
    let tmp = TempDir::new().unwrap();
    let mut summary = Vec::new();
    for i in 0..10u64 {
        let (g0, g1) = planted[i as usize % planted.len()];
        let dir = synthetic_corpus(30, 2, 3.0, 500 + i).write(&tmp.path().join(format!("c{i}")));
        let corpus = load(&dir);
        let truth = PpfAssignment::new([("r0", g0), ("r1", g1)]).unwrap();
        let ranked = rank_corpus(&corpus, &truth, &Settings::default()).map_err(|e| e.to_string())?;
        let scores = ranked.objects.scores.as_slice();
        let order = rank_order(scores);
        ensure(order.windows(2).all(|w| scores[w[0]] > scores[w[1]]), || {
            format!("corpus {i}: planted scores contain ties")
        })?;
        let expert = PartialRanking::from_order(&order).unwrap();
        let cfg = LearnConfig {
            rng_seed: i,
            ..Default::default()
        };
        let start = Instant::now();
        let run = learn_corpus(&corpus, &expert, &PageRankConfig::default(), &cfg).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let out = &run.outcome;
        ensure(out.violations == 0, || {
            format!("corpus {i} (gamma* = ({g0}, {g1})): {} of {} pairs violated", out.violations, out.total_pairs)
        })?;
        ensure(out.evaluations <= 10_000, || format!("corpus {i}: {} evaluations", out.evaluations))?;
        ensure(elapsed < Duration::from_secs(60), || format!("corpus {i}: took {elapsed:?}"))?;
        summary.push(out.evaluations.to_string());
    }
    Ok(format!("10 corpora at 0 violations, evaluations = [{}]", summary.join(", ")))
}

fn dedup_files(order_seed: Option<u64>) -> CorpusFiles {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut keys: Vec<usize> = (0..40).collect();
    keys.extend((40..100).map(|_| rng.random_range(0..40)));
    let mut objects: Vec<String> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| format!("rec{i}\tpaper\ttitle=T{k};year={}", 1990 + rng.random_range(0..20)))
        .collect();
    if let Some(seed) = order_seed {
        objects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    CorpusFiles {
        schemas: vec!["paper\ttitle,year\ttitle".into()],
        objects,
        ..Default::default()
    }
}

fn dedup_determinism() -> Check {
    let tmp = TempDir::new().unwrap();
    let summary = |files: &CorpusFiles, name: &str| -> Result<BTreeMap<Vec<String>, usize>, String> {
        let corpus = load(&files.write(&tmp.path().join(name)));
        ensure(corpus.graph.object_count() == 40, || {
            format!("{name}: {} objects", corpus.graph.object_count())
        })?;
        Ok(corpus
            .graph
            .objects()
            .iter()
            .map(|o| (o.key.clone(), o.merged_record_count))
            .collect())
    };
    let original = dedup_files(None);
    let base = summary(&original, "base")?;
    ensure(base.values().sum::<usize>() == 100, || "merged counts do not sum to 100".into())?;

    // brute-force grouping of the raw lines
    let mut oracle: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for line in &original.objects {
        let title = line.split('\t').nth(2).unwrap().split(';').next().unwrap().trim_start_matches("title=");
        *oracle.entry(vec![title.to_string()]).or_default() += 1;
    }
    ensure(base == oracle, || "merged counts differ from brute-force grouping".into())?;

    for seed in 0..5 {
        let permuted = summary(&dedup_files(Some(seed)), &format!("perm{seed}"))?;
        ensure(permuted == base, || format!("permutation {seed} changed key tuples or counts"))?;
    }
    Ok("100 records -> 40 objects, counts match grouping oracle, 5 permutations identical".into())
}

fn graph_shape(g: &ObjectGraph) -> impl PartialEq + std::fmt::Debug {
    let objects: Vec<_> = g
        .objects()
        .iter()
        .map(|o| (o.type_name.clone(), o.key.clone(), o.attribute_values.clone()))
        .collect();
    let mut links: Vec<_> = (0..g.relationship_types().len())
        .flat_map(|t| g.links(t).iter().map(move |&(s, d)| (t, s, d)))
        .collect();
    links.sort_unstable();
    (objects, g.relationship_types().to_vec(), links)
}

fn round_trip_and_determinism() -> Check {
    let tmp = TempDir::new().unwrap();
    let demo = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/demo");
    let synth = synthetic_corpus(25, 3, 2.0, 9).write(&tmp.path().join("synth"));
    for (name, dir) in [("demo", demo.clone()), ("synthetic", synth)] {
        let corpus = load(&dir);
        let out = tmp.path().join(format!("{name}-rt"));
        fs::create_dir_all(&out).unwrap();
        fs::write(out.join("schemas.tsv"), write_schemas(&corpus.schemas)).unwrap();
        fs::write(out.join("objects.tsv"), write_objects(&corpus.graph).map_err(|e| e.to_string())?).unwrap();
        fs::write(out.join("links.tsv"), write_links(&corpus.graph)).unwrap();
        fs::copy(dir.join("pages.tsv"), out.join("pages.tsv")).unwrap();
        fs::copy(dir.join("page_objects.tsv"), out.join("page_objects.tsv")).unwrap();
        let again = load(&out);
        ensure(graph_shape(&corpus.graph) == graph_shape(&again.graph), || {
            format!("{name}: graph changed after write/reload")
        })?;
    }

    let corpus_arg = path_str(&demo).to_string();
    let ppf = demo.join("ppf.tsv");
    let run_twice = |cmd: &[&str]| -> Result<Vec<u8>, String> {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let out_path = tmp.path().join(format!("{}-{k}.tsv", cmd[0]));
            let mut args = cmd.to_vec();
            args.extend(["--corpus", &corpus_arg, "--ppf", path_str(&ppf), "--out", path_str(&out_path)]);
            let status = run_cli(&args);
            ensure(status.status.success(), || {
                format!("{} failed: {}", cmd[0], String::from_utf8_lossy(&status.stderr))
            })?;
            outputs.push(fs::read(&out_path).unwrap());
        }
        ensure(outputs[0] == outputs[1], || format!("{} reports differ between runs", cmd[0]))?;
        Ok(outputs.swap_remove(0))
    };
    let rank_bytes = run_twice(&["rank"])?;
    run_twice(&["simulate", "--seed", "7", "--steps", "200000"])?;

    let parsed = RankReport::from_report(&Report::parse(&String::from_utf8(rank_bytes).unwrap()).unwrap())
        .map_err(|e| e.to_string())?;
    let direct = rank_corpus(&load(&demo), &poprank::io::read_ppf(&ppf).unwrap(), &Settings::default()).unwrap();
    ensure(parsed.rows == direct.report.rows, || "rank report does not parse back losslessly".into())?;
    Ok("2 graphs round-trip; rank and simulate reports byte-identical across runs".into())
}

fn compare_sanity() -> Check {
    let tmp = TempDir::new().unwrap();
    let ppf_path = tmp.path().join("ppf.tsv");
    fs::write(&ppf_path, "cites\t1.0\nmentions\t0.1\n").unwrap();
    let ppf = poprank::io::read_ppf(&ppf_path).unwrap();

    // object 5 sits in a tiny block but every other object cites it
    let mut links = vec![("mentions", 0, 1), ("mentions", 1, 2), ("mentions", 2, 3), ("mentions", 3, 4), ("mentions", 4, 0)];
    links.extend((0..5).map(|s| ("cites", s, 5)));
    let boosted = node_corpus(&[0.3, 0.25, 0.2, 0.15, 0.08, 0.02], &links).write(&tmp.path().join("boosted"));
    let cmp = compare_corpus(&load(&boosted), &ppf, &Settings::default()).map_err(|e| e.to_string())?;
    let (obj_rank, page_rank) = (cmp.object_ranks[5], cmp.page_ranks[5]);
    ensure(obj_rank < page_rank, || format!("object rank {obj_rank} not better than page rank {page_rank}"))?;

    let out = tmp.path().join("cmp.tsv");
    let cli = run_cli(&[
        "compare", "--corpus", path_str(&boosted), "--ppf", path_str(&ppf_path), "--out", path_str(&out),
    ]);
    ensure(cli.status.success(), || String::from_utf8_lossy(&cli.stderr).into_owned())?;
    let report = Report::parse(&fs::read_to_string(&out).unwrap()).unwrap();
    let row = report.rows.iter().find(|r| r[2] == "n5").ok_or("n5 missing from report")?;
    ensure(row[4] == obj_rank.to_string() && row[6] == page_rank.to_string(), || {
        "CLI compare disagrees with library".into()
    })?;

    let flat = node_corpus(&[0.1, 0.4, 0.05, 0.25, 0.2], &[]).write(&tmp.path().join("flat"));
    let cmp_flat = compare_corpus(&load(&flat), &ppf, &Settings::default()).map_err(|e| e.to_string())?;
    ensure(cmp_flat.object_ranks == cmp_flat.page_ranks, || "link-free orderings differ".into())?;
    ensure(cmp_flat.tau == 1.0, || format!("link-free tau = {}", cmp_flat.tau))?;
    Ok(format!(
        "boosted object: object rank {obj_rank} < page rank {page_rank}; link-free tau = {}",
        cmp_flat.tau
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("PageRank matches dense solve", pagerank_correctness),
        ("PopRank stochastic consistency", stochastic_consistency),
        ("reduction to PageRank", reduction_to_pagerank),
        ("propagation factor scale invariance", scale_invariance),
        ("Monte Carlo surfer agrees with PopRank", monte_carlo_oracle),
        ("planted factor recovery", planted_recovery),
        ("deduplication determinism", dedup_determinism),
        ("round-trip and CLI determinism", round_trip_and_determinism),
        ("compare command sanity", compare_sanity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
