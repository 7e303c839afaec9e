//! TSV reports with a `#`-prefixed metadata header.
//!
//! ```text
//! # kind=rank
//! # epsilon=0.15
//! rank  object_id  type   key  score
//! 1     3          paper  A    0.41
//! ```
//!
//! Columns are TAB-separated. Floats are written in Rust's shortest
//! round-trip form, so reports parse back without loss.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("kind".into(), kind.into())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let path = std::path::Path::new("<report>");
        let mut report = Report::default();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            if let Some(meta) = line.strip_prefix("# ") {
                if header {
                    return Err(Error::parse(path, i + 1, "metadata after column header"));
                }
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| Error::parse(path, i + 1, "metadata line lacks `=`"))?;
                report.meta.push((k.into(), v.into()));
            } else if !header {
                report.columns = line.split('\t').map(String::from).collect();
                header = true;
            } else {
                let row: Vec<String> = line.split('\t').map(String::from).collect();
                if row.len() != report.columns.len() {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("expected {} fields, found {}", report.columns.len(), row.len()),
                    ));
                }
                report.rows.push(row);
            }
        }
        if !header {
            return Err(Error::parse(path, 0, "missing column header"));
        }
        Ok(report)
    }
}

/// One line of a ranking report.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedObject {
    pub rank: usize,
    pub object_id: usize,
    pub type_name: String,
    pub key: String,
    pub score: f64,
}

/// Objects by descending score (ties by ascending id) with run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rows: Vec<RankedObject>,
    pub meta: Vec<(String, String)>,
}

pub const RANK_COLUMNS: [&str; 5] = ["rank", "object_id", "type", "key", "score"];

impl RankReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new("rank", &RANK_COLUMNS);
        for (k, v) in &self.meta {
            r.set_meta(k.clone(), v);
        }
        for row in &self.rows {
            r.push_row(vec![
                row.rank.to_string(),
                row.object_id.to_string(),
                row.type_name.clone(),
                row.key.clone(),
                row.score.to_string(),
            ]);
        }
        r
    }

    pub fn from_report(report: &Report) -> Result<Self> {
        let bad = |m: String| Error::parse(std::path::Path::new("<report>"), 0, m);
        if report.meta("kind") != Some("rank") {
            return Err(bad("not a rank report".into()));
        }
        if report.columns != RANK_COLUMNS {
            return Err(bad(format!("unexpected columns {:?}", report.columns)));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad integer `{s}`")));
        let rows = report
            .rows
            .iter()
            .map(|r| {
                Ok(RankedObject {
                    rank: num(&r[0])?,
                    object_id: num(&r[1])?,
                    type_name: r[2].clone(),
                    key: r[3].clone(),
                    score: r[4].parse().map_err(|_| bad(format!("bad score `{}`", r[4])))?,
                })
            })
            .collect::<Result<_>>()?;
        let meta = report.meta.iter().filter(|(k, _)| k != "kind").cloned().collect();
        Ok(Self { rows, meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_report_round_trips() {
        let rep = RankReport {
            rows: vec![
                RankedObject {
                    rank: 1,
                    object_id: 2,
                    type_name: "paper".into(),
                    key: "A|2004".into(),
                    score: 0.1 + 0.2,
                },
                RankedObject {
                    rank: 2,
                    object_id: 0,
                    type_name: "author".into(),
                    key: "N".into(),
                    score: 1e-300,
                },
            ],
            meta: vec![("epsilon".into(), "0.15".into()), ("gamma.cites".into(), "0.8".into())],
        };
        let text = rep.to_report().to_tsv();
        assert!(text.starts_with("# kind=rank\n# epsilon=0.15\n"));
        let back = RankReport::from_report(&Report::parse(&text).unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn malformed_reports() {
        assert!(Report::parse("# kind=rank\n").is_err());
        assert!(Report::parse("a\tb\n1\n").is_err());
        assert!(Report::parse("a\n# late=1\n").is_err());
        let r = Report::parse("# kind=compare\na\n").unwrap();
        assert!(RankReport::from_report(&r).is_err());
    }
}
