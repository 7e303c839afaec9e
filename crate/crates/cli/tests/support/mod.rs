#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use poprank::TransitionStructure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The five corpus files as lines of text.
#[derive(Debug, Clone, Default)]
pub struct CorpusFiles {
    pub schemas: Vec<String>,
    pub objects: Vec<String>,
    pub links: Vec<String>,
    pub pages: Vec<String>,
    pub page_objects: Vec<String>,
}

impl CorpusFiles {
    pub fn write(&self, dir: &Path) -> PathBuf {
        fs::create_dir_all(dir).unwrap();
        let put = |name: &str, lines: &[String]| {
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            fs::write(dir.join(name), text).unwrap();
        };
        put("schemas.tsv", &self.schemas);
        put("objects.tsv", &self.objects);
        put("links.tsv", &self.links);
        put("pages.tsv", &self.pages);
        put("page_objects.tsv", &self.page_objects);
        dir.to_path_buf()
    }
}

/// Objects `n0..` of type `node` sharing a single page, so the prior is
/// proportional to `block_weights`, plus typed links `(rel, source, target)`.
pub fn node_corpus(block_weights: &[f64], links: &[(&str, usize, usize)]) -> CorpusFiles {
    let n = block_weights.len();
    let mut c = CorpusFiles {
        schemas: vec!["node\tname\tname".into()],
        ..Default::default()
    };
    for i in 0..n {
        c.objects.push(format!("r{i}\tnode\tname=n{i}"));
    }
    for (rel, s, t) in links {
        c.links.push(format!("node\tn{s}\t{rel}\tnode\tn{t}"));
    }
    c.pages.push("home\t".into());
    for (i, w) in block_weights.iter().enumerate() {
        c.page_objects.push(format!("home\tnode\tn{i}\t{w}"));
    }
    c
}

/// Random corpus: `n` node objects, typed links of `types` relationship
/// types, `n` pages with random hyperlinks and every object on at least one
/// page.
pub fn synthetic_corpus(n: usize, types: usize, avg_degree: f64, seed: u64) -> CorpusFiles {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CorpusFiles {
        schemas: vec!["node\tname,label\tname".into()],
        ..Default::default()
    };
    for i in 0..n {
        c.objects.push(format!("r{i}\tnode\tname=n{i};label=L{}", i % 7));
    }
    let per_type = (n as f64 * avg_degree / types as f64).round() as usize;
    for t in 0..types {
        for _ in 0..per_type {
            let (s, d) = (rng.random_range(0..n), rng.random_range(0..n));
            c.links.push(format!("node\tn{s}\tr{t}\tnode\tn{d}"));
        }
    }
    for p in 0..n {
        let outs: Vec<String> = (0..rng.random_range(0..4))
            .map(|_| format!("p{}", rng.random_range(0..n)))
            .collect();
        c.pages.push(format!("p{p}\t{}", outs.join(",")));
        c.page_objects.push(format!("p{p}\tnode\tn{p}\t{}", rng.random_range(0.2..1.0)));
        if rng.random_bool(0.5) {
            let o = rng.random_range(0..n);
            if o != p {
                c.page_objects.push(format!("p{p}\tnode\tn{o}\t{}", rng.random_range(0.05..0.5)));
            }
        }
    }
    c
}

/// Dense PageRank: solve (I − d·(Pᵀ + u·dangᵀ)) x = (1 − d)·u, u = 1/n.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(s, t) in edges {
        if !adj[s].contains(&t) {
            adj[s].push(t);
        }
    }
    let mut a = DMatrix::<f64>::identity(n, n);
    for s in 0..n {
        if adj[s].is_empty() {
            for t in 0..n {
                a[(t, s)] -= damping / n as f64;
            }
        } else {
            for &t in &adj[s] {
                a[(t, s)] -= damping / adj[s].len() as f64;
            }
        }
    }
    let b = DVector::from_element(n, (1.0 - damping) / n as f64);
    let x = a.lu().solve(&b).expect("nonsingular");
    let s = x.sum();
    x.iter().map(|v| v / s).collect()
}

/// Dense PopRank: solve (I − (1 − ε)(Mᵀ + W·dᵀ)) R = ε·W.
pub fn dense_poprank(t: &TransitionStructure, w: &[f64], eps: f64) -> Vec<f64> {
    let n = w.len();
    let mut a = DMatrix::<f64>::identity(n, n);
    for o in 0..n {
        for (d, p) in t.row(o) {
            a[(d, o)] -= (1.0 - eps) * p;
        }
        if t.is_dangling(o) {
            for i in 0..n {
                a[(i, o)] -= (1.0 - eps) * w[i];
            }
        }
    }
    let b = DVector::from_iterator(n, w.iter().map(|x| eps * x));
    let x = a.lu().solve(&b).expect("nonsingular");
    let s = x.sum();
    x.iter().map(|v| v / s).collect()
}

pub fn poprank_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poprank"))
}

pub fn run_cli(args: &[&str]) -> Output {
    poprank_bin().args(args).output().expect("spawn poprank")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}
