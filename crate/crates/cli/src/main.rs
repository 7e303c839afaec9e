//! `poprank` command-line tool.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use poprank::io::{load_corpus, read_expert, read_ppf, write_ppf, Corpus, CorpusPaths};
use poprank::pipeline::{compare_corpus, learn_corpus, rank_corpus, simulate_corpus, Settings};
use poprank::report::Report;
use poprank::{LearnConfig, PageRankConfig, PopRankConfig, SimConfig};

const EXIT_INPUT: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "poprank", version, about = "Object-level popularity ranking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and summarize it
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank objects by PopRank
    Rank {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        ppf: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Record the wall-clock time in the report header
        #[arg(long)]
        timestamp: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn propagation factors from an expert ranking
    Learn {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        expert: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        grid_resolution: usize,
        #[arg(long, default_value_t = 200)]
        refine_iters: usize,
        #[arg(long, default_value_t = 0.1)]
        refine_step: f64,
        /// Where to write the learned factors (ppf format)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the learning report
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Simulate the random object finder and compare with PopRank
    Simulate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        ppf: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        burn_in: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare object-level and page-level orderings
    Compare {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        ppf: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// Directory holding schemas.tsv, objects.tsv, links.tsv, pages.tsv and
    /// page_objects.tsv
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    schemas: Option<PathBuf>,
    #[arg(long)]
    objects: Option<PathBuf>,
    #[arg(long)]
    links: Option<PathBuf>,
    #[arg(long)]
    pages: Option<PathBuf>,
    #[arg(long)]
    page_objects: Option<PathBuf>,
    /// Fail on unresolved references instead of dropping them
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct NumericArgs {
    #[arg(long, default_value_t = 0.15)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Exit with status 3 if an iteration does not converge
    #[arg(long)]
    fail_on_nonconverge: bool,
}

impl NumericArgs {
    fn settings(&self) -> Settings {
        Settings {
            pagerank: PageRankConfig {
                damping: self.damping,
                tol: self.tol,
                max_iter: self.max_iter,
            },
            poprank: PopRankConfig {
                epsilon: self.epsilon,
                tol: self.tol,
                max_iter: self.max_iter,
            },
        }
    }
}

enum Failure {
    Input(String),
    NonConverged,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn resolve_paths(args: &CorpusArgs) -> Result<CorpusPaths, Failure> {
    let defaults = args.corpus.as_ref().map(CorpusPaths::in_dir);
    let pick = |explicit: &Option<PathBuf>, default: Option<&PathBuf>, flag: &str| {
        explicit
            .clone()
            .or_else(|| default.cloned())
            .ok_or_else(|| Failure::Input(format!("no {flag} file: pass --{flag} or --corpus")))
    };
    Ok(CorpusPaths {
        schemas: pick(&args.schemas, defaults.as_ref().map(|d| &d.schemas), "schemas")?,
        objects: pick(&args.objects, defaults.as_ref().map(|d| &d.objects), "objects")?,
        links: pick(&args.links, defaults.as_ref().map(|d| &d.links), "links")?,
        pages: pick(&args.pages, defaults.as_ref().map(|d| &d.pages), "pages")?,
        page_objects: pick(&args.page_objects, defaults.as_ref().map(|d| &d.page_objects), "page-objects")?,
    })
}

fn load(args: &CorpusArgs) -> Result<Corpus, Failure> {
    let (corpus, diags) = load_corpus(&resolve_paths(args)?, args.strict)?;
    let mut err = std::io::stderr().lock();
    for d in diags {
        let _ = writeln!(err, "{d}");
    }
    Ok(corpus)
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn check_convergence(converged: bool, numeric: &NumericArgs) -> CmdResult {
    if converged {
        return Ok(());
    }
    eprintln!("warning\tnon_convergence\tmax_iter={}\ttol={}", numeric.max_iter, numeric.tol);
    if numeric.fail_on_nonconverge {
        return Err(Failure::NonConverged);
    }
    Ok(())
}

fn ingest(corpus: &CorpusArgs, out: Option<&Path>) -> CmdResult {
    let c = load(corpus)?;
    let mut r = Report::new("ingest", &["rel_name", "source_type", "target_type", "links"]);
    r.set_meta("records", c.record_count);
    r.set_meta("objects", c.graph.object_count());
    r.set_meta("types", c.schemas.len());
    r.set_meta("relationship_types", c.graph.relationship_types().len());
    r.set_meta("links", c.graph.link_count());
    r.set_meta("pages", c.pages.page_count());
    r.set_meta("hyperlinks", c.pages.edge_count());
    r.set_meta("page_object_entries", c.page_objects.entries().len());
    for (t, rt) in c.graph.relationship_types().iter().enumerate() {
        r.push_row(vec![
            rt.rel_name.clone(),
            rt.source_type.clone(),
            rt.target_type.clone(),
            c.graph.links(t).len().to_string(),
        ]);
    }
    emit(out, &r.to_tsv())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Ingest { corpus, out } => ingest(&corpus, out.as_deref()),
        Command::Rank {
            corpus,
            ppf,
            numeric,
            timestamp,
            out,
        } => {
            let c = load(&corpus)?;
            let ppf = read_ppf(&ppf)?;
            let outcome = rank_corpus(&c, &ppf, &numeric.settings())?;
            let mut report = outcome.report.to_report();
            if timestamp {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                report.set_meta("timestamp", secs);
            }
            emit(out.as_deref(), &report.to_tsv())?;
            check_convergence(outcome.converged(), &numeric)
        }
        Command::Learn {
            corpus,
            expert,
            numeric,
            seed,
            grid_resolution,
            refine_iters,
            refine_step,
            out,
            report,
        } => {
            let c = load(&corpus)?;
            let expert = read_expert(&expert, &c.graph)?;
            let settings = numeric.settings();
            let cfg = LearnConfig {
                grid_resolution,
                refine_iters,
                refine_step,
                rng_seed: seed,
                poprank: settings.poprank,
            };
            let run = learn_corpus(&c, &expert, &settings.pagerank, &cfg)?;
            if !run.identifiable {
                eprintln!("warning\tunidentifiable\tsingle relationship type: its factor does not affect the ranking");
            }
            eprintln!(
                "learn\tviolations={}\ttotal_pairs={}\tevaluations={}",
                run.outcome.violations, run.outcome.total_pairs, run.outcome.evaluations
            );
            emit(out.as_deref(), &write_ppf(&run.outcome.ppf))?;
            if let Some(path) = report {
                emit(Some(&path), &run.report.to_tsv())?;
            }
            Ok(())
        }
        Command::Simulate {
            corpus,
            ppf,
            numeric,
            steps,
            burn_in,
            seed,
            out,
        } => {
            let c = load(&corpus)?;
            let ppf = read_ppf(&ppf)?;
            let sim = SimConfig {
                steps,
                rng_seed: seed,
                epsilon: numeric.epsilon,
                burn_in,
            };
            let outcome = simulate_corpus(&c, &ppf, &numeric.settings(), &sim)?;
            emit(out.as_deref(), &outcome.report.to_tsv())?;
            check_convergence(outcome.converged, &numeric)
        }
        Command::Compare {
            corpus,
            ppf,
            numeric,
            out,
        } => {
            let c = load(&corpus)?;
            let ppf = read_ppf(&ppf)?;
            let outcome = compare_corpus(&c, &ppf, &numeric.settings())?;
            emit(out.as_deref(), &outcome.report.to_tsv())?;
            check_convergence(outcome.converged, &numeric)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::NonConverged) => ExitCode::from(EXIT_NONCONVERGED),
    }
}
