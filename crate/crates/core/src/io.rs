//! Tab-separated corpus formats.
//!
//! | file          | line format                                                              |
//! |---------------|--------------------------------------------------------------------------|
//! | schemas       | `type_name<TAB>attr1,attr2,...<TAB>key1,key2,...`                        |
//! | objects       | `record_id<TAB>type_name<TAB>attr=value;attr=value;...[<TAB>source_page]` |
//! | links         | `source_type<TAB>source_keys<TAB>rel_name<TAB>target_type<TAB>target_keys` |
//! | pages         | `page_id<TAB>out_link,out_link,...`                                      |
//! | page objects  | `page_id<TAB>object_type<TAB>object_keys<TAB>block_weight`               |
//! | ppf           | `rel_name<TAB>gamma`                                                     |
//! | expert        | `type:keys` per line (best first) or `type:keys<TAB>><TAB>type:keys`     |
//!
//! Key tuples join key-attribute values with `|`. Values may not contain
//! TAB, `;`, `|` or line breaks; there is no escaping. Empty lines are
//! skipped. A relationship type is declared by its first link; later links
//! must agree on its endpoint types. An empty block weight means "unweighted"
//! (uniform share of the page).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::learning::PartialRanking;
use crate::object_model::{
    build_graph, merge_records, ObjectGraph, ObjectRecord, ObjectRef, ObjectTypeSchema, RawLink, RelationshipType,
    SchemaRegistry,
};
use crate::poprank::PpfAssignment;
use crate::web_popularity::{PageGraph, PageObjectEntry, PageObjectMap};

pub const SCHEMAS_FILE: &str = "schemas.tsv";
pub const OBJECTS_FILE: &str = "objects.tsv";
pub const LINKS_FILE: &str = "links.tsv";
pub const PAGES_FILE: &str = "pages.tsv";
pub const PAGE_OBJECTS_FILE: &str = "page_objects.tsv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub schemas: PathBuf,
    pub objects: PathBuf,
    pub links: PathBuf,
    pub pages: PathBuf,
    pub page_objects: PathBuf,
}

impl CorpusPaths {
    /// The five files under their conventional names in `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            schemas: dir.join(SCHEMAS_FILE),
            objects: dir.join(OBJECTS_FILE),
            links: dir.join(LINKS_FILE),
            pages: dir.join(PAGES_FILE),
            page_objects: dir.join(PAGE_OBJECTS_FILE),
        }
    }
}

/// A loaded and cross-referenced corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub schemas: SchemaRegistry,
    pub graph: ObjectGraph,
    pub page_ids: Vec<String>,
    pub pages: PageGraph,
    pub page_objects: PageObjectMap,
    pub record_count: usize,
}

/// Something worth reporting about a load that did not stop it.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    Merge {
        records: usize,
        objects: usize,
        conflicts: usize,
    },
    Conflict {
        object: String,
        records: usize,
        conflicts: usize,
    },
    DroppedLink {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    DuplicateLinks {
        count: usize,
    },
    DroppedHyperlink {
        path: PathBuf,
        line: usize,
        target: String,
    },
    DroppedMapEntry {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Merge {
                records,
                objects,
                conflicts,
            } => write!(f, "diag\tmerge\trecords={records}\tobjects={objects}\tconflicts={conflicts}"),
            Diagnostic::Conflict {
                object,
                records,
                conflicts,
            } => write!(f, "diag\tconflict\tobject={object}\trecords={records}\tconflicts={conflicts}"),
            Diagnostic::DroppedLink { path, line, reason } => {
                write!(f, "diag\tdropped_link\tfile={}\tline={line}\treason={reason}", path.display())
            }
            Diagnostic::DuplicateLinks { count } => write!(f, "diag\tduplicate_links\tcount={count}"),
            Diagnostic::DroppedHyperlink { path, line, target } => write!(
                f,
                "diag\tdropped_hyperlink\tfile={}\tline={line}\ttarget={target}",
                path.display()
            ),
            Diagnostic::DroppedMapEntry { path, line, reason } => write!(
                f,
                "diag\tdropped_map_entry\tfile={}\tline={line}\treason={reason}",
                path.display()
            ),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Non-empty lines with their 1-based line numbers, split on TAB.
fn rows<'a>(text: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l).split('\t').collect()))
}

fn expect_fields(path: &Path, line: usize, fields: &[&str], allowed: &[usize]) -> Result<()> {
    if allowed.contains(&fields.len()) {
        return Ok(());
    }
    let want = allowed.iter().map(usize::to_string).collect::<Vec<_>>().join(" or ");
    Err(Error::parse(path, line, format!("expected {want} fields, found {}", fields.len())))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn split_key(s: &str) -> Vec<String> {
    s.split('|').map(String::from).collect()
}

pub fn parse_schemas(text: &str, path: &Path) -> Result<SchemaRegistry> {
    let mut reg = SchemaRegistry::new();
    for (line, f) in rows(text) {
        expect_fields(path, line, &f, &[3])?;
        let schema = ObjectTypeSchema::new(f[0], split_list(f[1]), split_list(f[2]))
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        reg.register(schema).map_err(|e| Error::parse(path, line, e.to_string()))?;
    }
    Ok(reg)
}

pub fn parse_objects(text: &str, path: &Path) -> Result<Vec<ObjectRecord>> {
    let mut out = Vec::new();
    for (line, f) in rows(text) {
        expect_fields(path, line, &f, &[3, 4])?;
        let mut values = Vec::new();
        for pair in f[2].split(';').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::parse(path, line, format!("attribute `{pair}` lacks `=`")))?;
            values.push((k.to_string(), v.to_string()));
        }
        let mut rec = ObjectRecord::new(f[0], f[1], values);
        rec.source_page = f.get(3).filter(|s| !s.is_empty()).map(|s| s.to_string());
        out.push(rec);
    }
    Ok(out)
}

/// A link together with its 1-based line number.
pub type NumberedLink = (usize, RawLink);

/// `(line, source page index, target page id)` before targets are resolved.
pub type RawHyperlink = (usize, usize, String);

/// Links with their line numbers, plus relationship types in first-seen
/// order.
pub fn parse_links(text: &str, path: &Path) -> Result<(Vec<RelationshipType>, Vec<NumberedLink>)> {
    let mut rels: Vec<RelationshipType> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut links = Vec::new();
    for (line, f) in rows(text) {
        expect_fields(path, line, &f, &[5])?;
        let link = RawLink {
            source: ObjectRef::new(f[0], split_key(f[1])),
            rel_name: f[2].to_string(),
            target: ObjectRef::new(f[3], split_key(f[4])),
        };
        match by_name.get(&link.rel_name) {
            Some(&i) => {
                let rt = &rels[i];
                if rt.source_type != link.source.type_name || rt.target_type != link.target.type_name {
                    return Err(Error::parse(
                        path,
                        line,
                        Error::TypeMismatch {
                            rel_name: rt.rel_name.clone(),
                            expected: format!("{}->{}", rt.source_type, rt.target_type),
                            found: format!("{}->{}", link.source.type_name, link.target.type_name),
                        }
                        .to_string(),
                    ));
                }
            }
            None => {
                by_name.insert(link.rel_name.clone(), rels.len());
                rels.push(RelationshipType::new(
                    link.rel_name.clone(),
                    link.source.type_name.clone(),
                    link.target.type_name.clone(),
                ));
            }
        }
        links.push((line, link));
    }
    Ok((rels, links))
}

/// Page ids in file order and each page's raw out-link ids with the line
/// they came from.
pub fn parse_pages(text: &str, path: &Path) -> Result<(Vec<String>, Vec<RawHyperlink>)> {
    let mut ids = Vec::new();
    let mut index = HashMap::new();
    let mut raw = Vec::new();
    for (line, f) in rows(text) {
        expect_fields(path, line, &f, &[1, 2])?;
        let id = f[0].to_string();
        if id.is_empty() {
            return Err(Error::parse(path, line, "empty page id"));
        }
        if index.insert(id.clone(), ids.len()).is_some() {
            return Err(Error::parse(path, line, format!("page `{id}` listed twice")));
        }
        for target in f.get(1).map(|s| split_list(s)).unwrap_or_default() {
            raw.push((line, ids.len(), target));
        }
        ids.push(id);
    }
    Ok((ids, raw))
}

pub fn parse_ppf(text: &str, path: &Path) -> Result<PpfAssignment> {
    let mut factors = Vec::new();
    let mut seen = HashMap::new();
    for (line, f) in rows(text) {
        expect_fields(path, line, &f, &[2])?;
        let gamma: f64 = f[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid gamma `{}`", f[1])))?;
        if seen.insert(f[0].to_string(), line).is_some() {
            return Err(Error::parse(path, line, format!("relationship `{}` listed twice", f[0])));
        }
        factors.push((f[0].to_string(), gamma));
    }
    PpfAssignment::new(factors).map_err(|e| Error::in_file(path, e))
}

/// Parses `type:key|key` object references.
pub fn parse_object_ref(s: &str) -> Option<ObjectRef> {
    let (t, k) = s.split_once(':')?;
    (!t.is_empty() && !k.is_empty()).then(|| ObjectRef::new(t, split_key(k)))
}

pub fn parse_expert(text: &str, path: &Path, graph: &ObjectGraph) -> Result<PartialRanking> {
    let resolve = |line: usize, s: &str| -> Result<usize> {
        let r = parse_object_ref(s)
            .ok_or_else(|| Error::parse(path, line, format!("`{s}` is not a type:key reference")))?;
        graph
            .find(&r)
            .ok_or_else(|| Error::parse(path, line, format!("unknown object {r}")))
    };
    let mut order = Vec::new();
    let mut pairs = Vec::new();
    for (line, f) in rows(text) {
        match f.as_slice() {
            [one] => order.push(resolve(line, one)?),
            [a, ">", b] => pairs.push((resolve(line, a)?, resolve(line, b)?)),
            _ => {
                return Err(Error::parse(
                    path,
                    line,
                    "expected `type:key` or `type:key<TAB>><TAB>type:key`",
                ))
            }
        }
    }
    PartialRanking::from_parts(&order, pairs).map_err(|e| Error::in_file(path, e))
}

pub fn read_ppf(path: &Path) -> Result<PpfAssignment> {
    parse_ppf(&read(path)?, path)
}

pub fn read_expert(path: &Path, graph: &ObjectGraph) -> Result<PartialRanking> {
    parse_expert(&read(path)?, path, graph)
}

/// Loads and cross-references the five corpus files.
///
/// Unresolvable links, hyperlinks and page-object entries are dropped with a
/// diagnostic, or fail the load when `strict` is set.
pub fn load_corpus(paths: &CorpusPaths, strict: bool) -> Result<(Corpus, Vec<Diagnostic>)> {
    let mut diags = Vec::new();

    let schemas = parse_schemas(&read(&paths.schemas)?, &paths.schemas)?;
    let records = parse_objects(&read(&paths.objects)?, &paths.objects)?;
    let objects = merge_records(&records, &schemas).map_err(|e| Error::in_file(&paths.objects, e))?;
    diags.push(Diagnostic::Merge {
        records: records.len(),
        objects: objects.len(),
        conflicts: objects.iter().map(|o| o.conflict_count).sum(),
    });
    for o in objects.iter().filter(|o| o.conflict_count > 0) {
        diags.push(Diagnostic::Conflict {
            object: format!("{}:{}", o.type_name, o.key_string()),
            records: o.merged_record_count,
            conflicts: o.conflict_count,
        });
    }

    let (rels, links) = parse_links(&read(&paths.links)?, &paths.links)?;
    let raw: Vec<RawLink> = links.iter().map(|(_, l)| l.clone()).collect();
    let (graph, build) = build_graph(objects, rels, &raw, strict).map_err(|e| Error::in_file(&paths.links, e))?;
    for (pos, reason) in build.unresolved {
        diags.push(Diagnostic::DroppedLink {
            path: paths.links.clone(),
            line: links[pos].0,
            reason,
        });
    }
    if build.duplicates_dropped > 0 {
        diags.push(Diagnostic::DuplicateLinks {
            count: build.duplicates_dropped,
        });
    }

    let (page_ids, raw_hyperlinks) = parse_pages(&read(&paths.pages)?, &paths.pages)?;
    let page_index: HashMap<&str, usize> = page_ids.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let mut edges = Vec::with_capacity(raw_hyperlinks.len());
    for (line, src, target) in raw_hyperlinks {
        match page_index.get(target.as_str()) {
            Some(&t) => edges.push((src, t)),
            None if strict => {
                return Err(Error::parse(&paths.pages, line, format!("unknown page `{target}`")));
            }
            None => diags.push(Diagnostic::DroppedHyperlink {
                path: paths.pages.clone(),
                line,
                target,
            }),
        }
    }
    let pages = PageGraph::from_edges(page_ids.len(), edges)?;

    let map_text = read(&paths.page_objects)?;
    let mut entries = Vec::new();
    for (line, f) in rows(&map_text) {
        expect_fields(&paths.page_objects, line, &f, &[4])?;
        let block_weight = match f[3].trim() {
            "" => None,
            w => Some(w.parse::<f64>().ok().filter(|w| w.is_finite() && *w >= 0.0).ok_or_else(|| {
                Error::parse(&paths.page_objects, line, format!("invalid block weight `{w}`"))
            })?),
        };
        let obj = ObjectRef::new(f[1], split_key(f[2]));
        let resolved = match (page_index.get(f[0]), graph.find(&obj)) {
            (Some(&p), Some(o)) => Ok((p, o)),
            (None, _) => Err(format!("unknown page `{}`", f[0])),
            (_, None) => Err(format!("unknown object {obj}")),
        };
        match resolved {
            Ok((page, object)) => entries.push(PageObjectEntry {
                page,
                object,
                block_weight,
            }),
            Err(reason) if strict => return Err(Error::parse(&paths.page_objects, line, reason)),
            Err(reason) => diags.push(Diagnostic::DroppedMapEntry {
                path: paths.page_objects.clone(),
                line,
                reason,
            }),
        }
    }
    let page_objects = PageObjectMap::new(entries)?;

    Ok((
        Corpus {
            schemas,
            graph,
            page_ids,
            pages,
            page_objects,
            record_count: records.len(),
        },
        diags,
    ))
}

fn check_value(v: &str, what: &str) -> Result<()> {
    if v.contains(['\t', '\n', '\r', ';', '|']) {
        return Err(Error::InvalidParameter(format!(
            "{what} `{v}` contains a reserved character"
        )));
    }
    Ok(())
}

pub fn write_schemas(schemas: &SchemaRegistry) -> String {
    schemas
        .iter()
        .map(|s| {
            format!(
                "{}\t{}\t{}\n",
                s.type_name(),
                s.attributes().join(","),
                s.key_attributes().join(",")
            )
        })
        .collect()
}

/// One record per object, with `record_id` set to `o<object_id>`.
pub fn write_objects(graph: &ObjectGraph) -> Result<String> {
    let mut out = String::new();
    for o in graph.objects() {
        let mut attrs = Vec::with_capacity(o.attribute_values.len());
        for (k, v) in &o.attribute_values {
            check_value(k, "attribute name")?;
            check_value(v, "attribute value")?;
            attrs.push(format!("{k}={v}"));
        }
        out.push_str(&format!("o{}\t{}\t{}\n", o.object_id, o.type_name, attrs.join(";")));
    }
    Ok(out)
}

/// Links grouped by relationship type, in stored order.
pub fn write_links(graph: &ObjectGraph) -> String {
    let mut out = String::new();
    for (t, rt) in graph.relationship_types().iter().enumerate() {
        for &(s, d) in graph.links(t) {
            let (s, d) = (&graph.objects()[s], &graph.objects()[d]);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                s.type_name,
                s.key_string(),
                rt.rel_name,
                d.type_name,
                d.key_string()
            ));
        }
    }
    out
}

pub fn write_ppf(ppf: &PpfAssignment) -> String {
    ppf.iter().map(|(k, g)| format!("{k}\t{g}\n")).collect()
}
