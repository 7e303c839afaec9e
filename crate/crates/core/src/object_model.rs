//! Typed web objects, attribute schemas and the heterogeneous object graph.
//!
//! Records extracted from different sources are collapsed into one
//! [`WebObject`] per `(type, key-attribute tuple)`. Non-key attributes keep
//! the first value seen; every later disagreement bumps the object's
//! conflict counter.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};

/// Attribute schema shared by every object of one type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectTypeSchema {
    type_name: String,
    attributes: Vec<String>,
    key_attributes: Vec<String>,
}

impl ObjectTypeSchema {
    pub fn new<S: Into<String>>(
        type_name: impl Into<String>,
        attributes: impl IntoIterator<Item = S>,
        key_attributes: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let type_name = type_name.into();
        let attributes: Vec<String> = attributes.into_iter().map(Into::into).collect();
        let key_attributes: Vec<String> = key_attributes.into_iter().map(Into::into).collect();
        let invalid = |reason: String| Error::InvalidSchema {
            type_name: type_name.clone(),
            reason,
        };
        if type_name.is_empty() {
            return Err(invalid("empty type name".into()));
        }
        if key_attributes.is_empty() {
            return Err(Error::EmptyKey(type_name));
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.is_empty() {
                return Err(invalid("empty attribute name".into()));
            }
            if !seen.insert(a.as_str()) {
                return Err(invalid(format!("attribute `{a}` listed twice")));
            }
        }
        let mut seen_keys = HashSet::new();
        for k in &key_attributes {
            if !seen.contains(k.as_str()) {
                return Err(invalid(format!("key attribute `{k}` is not an attribute")));
            }
            if !seen_keys.insert(k.as_str()) {
                return Err(invalid(format!("key attribute `{k}` listed twice")));
            }
        }
        Ok(Self {
            type_name,
            attributes,
            key_attributes,
        })
    }

    pub fn type_name(&self) -> &str {
        &self.type_name
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn key_attributes(&self) -> &[String] {
        &self.key_attributes
    }
}

/// Registered schemas, looked up by type name. Iteration follows
/// registration order.
#[derive(Debug, Clone, Default)]
pub struct SchemaRegistry {
    schemas: Vec<ObjectTypeSchema>,
    by_name: HashMap<String, usize>,
}

impl SchemaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, schema: ObjectTypeSchema) -> Result<&ObjectTypeSchema> {
        if self.by_name.contains_key(schema.type_name()) {
            return Err(Error::DuplicateSchema(schema.type_name.clone()));
        }
        let idx = self.schemas.len();
        self.by_name.insert(schema.type_name.clone(), idx);
        self.schemas.push(schema);
        Ok(&self.schemas[idx])
    }

    pub fn get(&self, type_name: &str) -> Option<&ObjectTypeSchema> {
        self.by_name.get(type_name).map(|&i| &self.schemas[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectTypeSchema> {
        self.schemas.iter()
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }
}

/// One extracted record, before deduplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectRecord {
    pub record_id: String,
    pub type_name: String,
    pub attribute_values: BTreeMap<String, String>,
    pub source_page: Option<String>,
}

impl ObjectRecord {
    pub fn new<K: Into<String>, V: Into<String>>(
        record_id: impl Into<String>,
        type_name: impl Into<String>,
        values: impl IntoIterator<Item = (K, V)>,
    ) -> Self {
        Self {
            record_id: record_id.into(),
            type_name: type_name.into(),
            attribute_values: values
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            source_page: None,
        }
    }

    /// The record's key tuple under `schema`, or the first missing key.
    pub fn key_tuple(&self, schema: &ObjectTypeSchema) -> Result<Vec<String>> {
        schema
            .key_attributes()
            .iter()
            .map(|k| match self.attribute_values.get(k) {
                Some(v) if !v.is_empty() => Ok(v.clone()),
                _ => Err(Error::MissingKey {
                    record_id: self.record_id.clone(),
                    attribute: k.clone(),
                }),
            })
            .collect()
    }
}

/// A deduplicated object; `object_id` indexes every numeric vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebObject {
    pub object_id: usize,
    pub type_name: String,
    pub key: Vec<String>,
    pub attribute_values: BTreeMap<String, String>,
    pub merged_record_count: usize,
    pub conflict_count: usize,
}

impl WebObject {
    /// Key values joined with `|`, as used by the link and map formats.
    pub fn key_string(&self) -> String {
        self.key.join("|")
    }
}

/// Collapses records sharing `(type, key tuple)` into single objects.
///
/// Object ids are dense and follow first appearance. A non-key attribute
/// whose value differs from the one already held counts one conflict and is
/// discarded.
pub fn merge_records(records: &[ObjectRecord], schemas: &SchemaRegistry) -> Result<Vec<WebObject>> {
    let mut objects: Vec<WebObject> = Vec::new();
    let mut index: HashMap<(String, Vec<String>), usize> = HashMap::new();
    for rec in records {
        let schema = schemas
            .get(&rec.type_name)
            .ok_or_else(|| Error::UnknownType(rec.type_name.clone()))?;
        let key = rec.key_tuple(schema)?;
        match index.get(&(rec.type_name.clone(), key.clone())) {
            Some(&id) => {
                let obj = &mut objects[id];
                obj.merged_record_count += 1;
                for (attr, value) in &rec.attribute_values {
                    match obj.attribute_values.get(attr) {
                        Some(existing) if existing != value => obj.conflict_count += 1,
                        Some(_) => {}
                        None => {
                            obj.attribute_values.insert(attr.clone(), value.clone());
                        }
                    }
                }
            }
            None => {
                let id = objects.len();
                index.insert((rec.type_name.clone(), key.clone()), id);
                objects.push(WebObject {
                    object_id: id,
                    type_name: rec.type_name.clone(),
                    key,
                    attribute_values: rec.attribute_values.clone(),
                    merged_record_count: 1,
                    conflict_count: 0,
                });
            }
        }
    }
    Ok(objects)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationshipType {
    pub rel_name: String,
    pub source_type: String,
    pub target_type: String,
}

impl RelationshipType {
    pub fn new(
        rel_name: impl Into<String>,
        source_type: impl Into<String>,
        target_type: impl Into<String>,
    ) -> Self {
        Self {
            rel_name: rel_name.into(),
            source_type: source_type.into(),
            target_type: target_type.into(),
        }
    }
}

/// Reference to an object by type and key tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectRef {
    pub type_name: String,
    pub key: Vec<String>,
}

impl ObjectRef {
    pub fn new(type_name: impl Into<String>, key: Vec<String>) -> Self {
        Self {
            type_name: type_name.into(),
            key,
        }
    }
}

impl std::fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.type_name, self.key.join("|"))
    }
}

/// An unresolved link between two objects, as read from input data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLink {
    pub source: ObjectRef,
    pub rel_name: String,
    pub target: ObjectRef,
}

/// Immutable typed object graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectGraph {
    objects: Vec<WebObject>,
    relationship_types: Vec<RelationshipType>,
    /// `links[t]` holds the edges of `relationship_types[t]`.
    links: Vec<Vec<(usize, usize)>>,
    lookup: HashMap<ObjectRef, usize>,
}

impl ObjectGraph {
    pub fn objects(&self) -> &[WebObject] {
        &self.objects
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn relationship_types(&self) -> &[RelationshipType] {
        &self.relationship_types
    }

    /// Edges of the relationship type at position `rel`.
    pub fn links(&self, rel: usize) -> &[(usize, usize)] {
        &self.links[rel]
    }

    pub fn link_count(&self) -> usize {
        self.links.iter().map(Vec::len).sum()
    }

    pub fn find(&self, r: &ObjectRef) -> Option<usize> {
        self.lookup.get(r).copied()
    }

    pub fn object_ref(&self, id: usize) -> ObjectRef {
        let o = &self.objects[id];
        ObjectRef::new(o.type_name.clone(), o.key.clone())
    }

    /// One-pass well-formedness check of every graph invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.objects.len();
        for (i, o) in self.objects.iter().enumerate() {
            if o.object_id != i {
                return Err(Error::InvalidGraph(format!(
                    "object at position {i} has id {}",
                    o.object_id
                )));
            }
        }
        if self.lookup.len() != n {
            return Err(Error::InvalidGraph("duplicate object key tuples".into()));
        }
        let mut names = HashSet::new();
        for rt in &self.relationship_types {
            if !names.insert(rt.rel_name.as_str()) {
                return Err(Error::DuplicateRelationship(rt.rel_name.clone()));
            }
        }
        if self.links.len() != self.relationship_types.len() {
            return Err(Error::InvalidGraph("link lists do not match relationship types".into()));
        }
        for (rt, edges) in self.relationship_types.iter().zip(&self.links) {
            let mut seen = HashSet::with_capacity(edges.len());
            for &(s, t) in edges {
                if s >= n || t >= n {
                    return Err(Error::InvalidGraph(format!(
                        "`{}` edge ({s}, {t}) references a missing object",
                        rt.rel_name
                    )));
                }
                if self.objects[s].type_name != rt.source_type
                    || self.objects[t].type_name != rt.target_type
                {
                    return Err(Error::TypeMismatch {
                        rel_name: rt.rel_name.clone(),
                        expected: format!("{}->{}", rt.source_type, rt.target_type),
                        found: format!(
                            "{}->{}",
                            self.objects[s].type_name, self.objects[t].type_name
                        ),
                    });
                }
                if !seen.insert((s, t)) {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate `{}` edge ({s}, {t})",
                        rt.rel_name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Non-fatal problems found while building a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildDiagnostics {
    /// Links dropped because an endpoint did not resolve, with the reason.
    pub unresolved: Vec<(usize, String)>,
    pub duplicates_dropped: usize,
}

/// Builds the object graph, resolving link endpoints by type and key.
///
/// Links that name an undeclared relationship or disagree with its endpoint
/// types are always errors. An endpoint that matches no object is recorded in
/// the diagnostics (indexed by link position) unless `strict` is set, in
/// which case it is an error. Repeated `(source, target, rel)` triples are
/// dropped and counted.
pub fn build_graph(
    objects: Vec<WebObject>,
    relationship_types: Vec<RelationshipType>,
    raw_links: &[RawLink],
    strict: bool,
) -> Result<(ObjectGraph, BuildDiagnostics)> {
    let mut rel_index = HashMap::new();
    for (i, rt) in relationship_types.iter().enumerate() {
        if rel_index.insert(rt.rel_name.clone(), i).is_some() {
            return Err(Error::DuplicateRelationship(rt.rel_name.clone()));
        }
    }
    let mut lookup = HashMap::with_capacity(objects.len());
    for (i, o) in objects.iter().enumerate() {
        if o.object_id != i {
            return Err(Error::InvalidGraph(format!(
                "object ids must be dense: position {i} has id {}",
                o.object_id
            )));
        }
        let r = ObjectRef::new(o.type_name.clone(), o.key.clone());
        if lookup.insert(r.clone(), i).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate object {r}")));
        }
    }

    let mut diag = BuildDiagnostics::default();
    let mut links = vec![Vec::new(); relationship_types.len()];
    let mut seen: HashSet<(usize, usize, usize)> = HashSet::new();
    for (pos, link) in raw_links.iter().enumerate() {
        let &t = rel_index
            .get(&link.rel_name)
            .ok_or_else(|| Error::UnknownRelationship(link.rel_name.clone()))?;
        let rt = &relationship_types[t];
        if link.source.type_name != rt.source_type || link.target.type_name != rt.target_type {
            return Err(Error::TypeMismatch {
                rel_name: rt.rel_name.clone(),
                expected: format!("{}->{}", rt.source_type, rt.target_type),
                found: format!("{}->{}", link.source.type_name, link.target.type_name),
            });
        }
        let resolve = |r: &ObjectRef, role: &str| {
            lookup
                .get(r)
                .copied()
                .ok_or_else(|| format!("{role} {r} of `{}` not found", link.rel_name))
        };
        let ends = resolve(&link.source, "source").and_then(|s| Ok((s, resolve(&link.target, "target")?)));
        match ends {
            Ok((s, d)) => {
                if seen.insert((s, d, t)) {
                    links[t].push((s, d));
                } else {
                    diag.duplicates_dropped += 1;
                }
            }
            Err(msg) if strict => return Err(Error::Unresolved(msg)),
            Err(msg) => diag.unresolved.push((pos, msg)),
        }
    }

    let graph = ObjectGraph {
        objects,
        relationship_types,
        links,
        lookup,
    };
    Ok((graph, diag))
}
