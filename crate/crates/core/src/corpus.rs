//! Document collections: loading, filtering, splitting, sampling and joining.
//!
//! The ingest format is JSON lines, one record per line:
//!
//! ```text
//! {"id": "c-1", "text": "...", "date": "2022-03-01", "meta": {"state": "CA"}}
//! ```
//!
//! A [`Corpus`] is immutable once built. Every operation returns a new value
//! and keeps documents in their original relative order unless stated.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub type Meta = BTreeMap<String, String>;

fn min_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(1900, 1, 1).unwrap()
}

fn max_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2100, 1, 1).unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub date: NaiveDate,
    #[serde(default)]
    pub meta: Meta,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, date: NaiveDate) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            date,
            meta: Meta::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidDocument {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if self.text.trim().is_empty() {
            return Err(invalid("empty text"));
        }
        if self.date < min_date() || self.date > max_date() {
            return Err(invalid("date outside [1900-01-01, 2100-01-01]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
    source_label: String,
}

impl Corpus {
    /// Builds a corpus, checking each document and id uniqueness.
    pub fn new(docs: Vec<Document>, source_label: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(docs.len());
        for doc in &docs {
            doc.validate()?;
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        Ok(Corpus {
            docs,
            source_label: source_label.into(),
        })
    }

    /// For subsequences or field-preserving rewrites of an already valid corpus.
    pub(crate) fn from_valid(docs: Vec<Document>, source_label: String) -> Self {
        Corpus { docs, source_label }
    }

    pub fn empty(source_label: impl Into<String>) -> Self {
        Corpus {
            docs: Vec::new(),
            source_label: source_label.into(),
        }
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn into_docs(self) -> Vec<Document> {
        self.docs
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.id.as_str())
    }

    /// Earliest and latest document dates.
    pub fn date_range(&self) -> Option<(NaiveDate, NaiveDate)> {
        let min = self.docs.iter().map(|d| d.date).min()?;
        let max = self.docs.iter().map(|d| d.date).max()?;
        Some((min, max))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    /// Serializes the corpus as JSON lines.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for doc in &self.docs {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

/// Result of loading a JSONL file: the valid documents plus per-line errors.
#[derive(Debug, Clone)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub errors: Vec<LineError>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    text: Option<String>,
    date: Option<String>,
    #[serde(default)]
    meta: BTreeMap<String, serde_json::Value>,
}

fn parse_record(line: &str) -> std::result::Result<Document, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let id = match raw.id {
        Some(serde_json::Value::String(s)) => s,
        Some(serde_json::Value::Number(n)) => n.to_string(),
        Some(_) => return Err("\"id\" must be a string".into()),
        None => return Err("missing \"id\"".into()),
    };
    let text = raw.text.ok_or("missing \"text\"")?;
    let date = raw.date.ok_or("missing \"date\"")?;
    let date = NaiveDate::parse_from_str(&date, "%Y-%m-%d")
        .map_err(|e| format!("bad date {date:?}: {e}"))?;
    let mut meta = Meta::new();
    for (k, v) in raw.meta {
        let v = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Null => continue,
            _ => return Err(format!("meta value for {k:?} must be a scalar")),
        };
        meta.insert(k, v);
    }
    let doc = Document {
        id,
        text,
        date,
        meta,
    };
    doc.validate().map_err(|e| match e {
        Error::InvalidDocument { reason, .. } => reason,
        other => other.to_string(),
    })?;
    Ok(doc)
}

/// Reads JSONL records. Invalid lines are reported, not fatal; blank lines are
/// ignored. Fails with [`Error::EmptyCorpus`] when no line yields a document.
pub fn read_corpus<R: Read>(reader: R, source_label: &str) -> Result<LoadReport> {
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok(doc) if !seen.insert(doc.id.clone()) => errors.push(LineError {
                line: line_no,
                reason: format!("duplicate id {:?}", doc.id),
            }),
            Ok(doc) => docs.push(doc),
            Err(reason) => errors.push(LineError {
                line: line_no,
                reason,
            }),
        }
    }
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(LoadReport {
        corpus: Corpus::from_valid(docs, source_label.to_string()),
        errors,
    })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    read_corpus(file, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Field {
    Id,
    Text,
    Date,
    Meta(String),
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(Field::Id),
            "text" => Ok(Field::Text),
            "date" => Ok(Field::Date),
            _ => match s.strip_prefix("meta.") {
                Some(key) if !key.is_empty() => Ok(Field::Meta(key.to_string())),
                _ => Err(Error::UnknownField(s.to_string())),
            },
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Id => f.write_str("id"),
            Field::Text => f.write_str("text"),
            Field::Date => f.write_str("date"),
            Field::Meta(k) => write!(f, "meta.{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

/// Document predicate used by [`filter_corpus`].
///
/// Meta values compare numerically when both sides parse as numbers and as
/// strings otherwise. A document lacking a referenced meta key never matches.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    True,
    Compare {
        field: Field,
        op: CmpOp,
        value: String,
    },
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn cmp(field: Field, op: CmpOp, value: impl Into<String>) -> Self {
        Predicate::Compare {
            field,
            op,
            value: value.into(),
        }
    }

    pub fn and(self, other: Predicate) -> Self {
        Predicate::And(vec![self, other])
    }

    fn meta_keys<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Predicate::True => {}
            Predicate::Compare {
                field: Field::Meta(k),
                ..
            } => {
                out.insert(k);
            }
            Predicate::Compare { .. } => {}
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.meta_keys(out)),
            Predicate::Not(p) => p.meta_keys(out),
        }
    }

    fn check_dates(&self) -> Result<()> {
        match self {
            Predicate::Compare {
                field: Field::Date,
                value,
                ..
            } => NaiveDate::parse_from_str(value, "%Y-%m-%d")
                .map(|_| ())
                .map_err(|_| Error::InvalidArgument(format!("bad date literal {value:?}"))),
            Predicate::And(ps) | Predicate::Or(ps) => {
                ps.iter().try_for_each(Predicate::check_dates)
            }
            Predicate::Not(p) => p.check_dates(),
            _ => Ok(()),
        }
    }

    pub fn matches(&self, doc: &Document) -> bool {
        match self {
            Predicate::True => true,
            Predicate::Compare { field, op, value } => {
                let ord = match field {
                    Field::Id => doc.id.as_str().cmp(value.as_str()),
                    Field::Text => doc.text.as_str().cmp(value.as_str()),
                    Field::Date => match NaiveDate::parse_from_str(value, "%Y-%m-%d") {
                        Ok(d) => doc.date.cmp(&d),
                        Err(_) => return false,
                    },
                    Field::Meta(key) => match doc.meta.get(key) {
                        Some(v) => compare_values(v, value),
                        None => return false,
                    },
                };
                op.holds(ord)
            }
            Predicate::And(ps) => ps.iter().all(|p| p.matches(doc)),
            Predicate::Or(ps) => ps.iter().any(|p| p.matches(doc)),
            Predicate::Not(p) => !p.matches(doc),
        }
    }
}

fn compare_values(left: &str, right: &str) -> std::cmp::Ordering {
    match (left.trim().parse::<f64>(), right.trim().parse::<f64>()) {
        (Ok(a), Ok(b)) if !a.is_nan() && !b.is_nan() => a.total_cmp(&b),
        _ => left.cmp(right),
    }
}

impl FromStr for Predicate {
    type Err = Error;

    /// Parses `FIELD OP VALUE`, e.g. `meta.vacancies_per_year<=2` or
    /// `date<2022-11-30`. Operators: `<= >= != == = < >`.
    fn from_str(s: &str) -> Result<Self> {
        const OPS: [(&str, CmpOp); 7] = [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("!=", CmpOp::Ne),
            ("==", CmpOp::Eq),
            ("=", CmpOp::Eq),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ];
        let (pos, len, op) = OPS
            .iter()
            .filter_map(|(tok, op)| s.find(tok).map(|p| (p, tok.len(), *op)))
            .min_by_key(|&(p, len, _)| (p, std::cmp::Reverse(len)))
            .ok_or_else(|| Error::InvalidArgument(format!("no comparison operator in {s:?}")))?;
        let field: Field = s[..pos].trim().parse()?;
        let value = s[pos + len..].trim().to_string();
        Ok(Predicate::Compare { field, op, value })
    }
}

/// Keeps the documents matching `predicate`, in order.
///
/// Fails with [`Error::UnknownField`] if a referenced meta key occurs on no
/// document of a non-empty corpus.
pub fn filter_corpus(corpus: &Corpus, predicate: &Predicate) -> Result<Corpus> {
    predicate.check_dates()?;
    if !corpus.is_empty() {
        let mut keys = BTreeSet::new();
        predicate.meta_keys(&mut keys);
        for key in keys {
            if !corpus.docs.iter().any(|d| d.meta.contains_key(key)) {
                return Err(Error::UnknownField(format!("meta.{key}")));
            }
        }
    }
    let docs = corpus
        .docs
        .iter()
        .filter(|d| predicate.matches(d))
        .cloned()
        .collect();
    Ok(Corpus::from_valid(docs, corpus.source_label.clone()))
}

/// Partitions into (date < cutoff, date >= cutoff).
pub fn split_by_date(corpus: &Corpus, cutoff: NaiveDate) -> (Corpus, Corpus) {
    let (before, after): (Vec<_>, Vec<_>) =
        corpus.docs.iter().cloned().partition(|d| d.date < cutoff);
    (
        Corpus::from_valid(before, corpus.source_label.clone()),
        Corpus::from_valid(after, corpus.source_label.clone()),
    )
}

/// Uniform sample of at most `n_max` documents without replacement, kept in
/// original order. The identity when the corpus already fits.
pub fn sample(corpus: &Corpus, n_max: usize, seed: u64) -> Corpus {
    let n_max = n_max.max(1);
    if corpus.len() <= n_max {
        return corpus.clone();
    }
    let mut rng = seed::rng(seed);
    let mut picked = rand::seq::index::sample(&mut rng, corpus.len(), n_max).into_vec();
    picked.sort_unstable();
    let docs = picked.into_iter().map(|i| corpus.docs[i].clone()).collect();
    Corpus::from_valid(docs, corpus.source_label.clone())
}

/// [`sample`] with a seed derived from `(seed, label)`, used for per-bucket
/// sampling so that each bucket's draw is independent of every other bucket.
pub fn sample_labeled(corpus: &Corpus, n_max: usize, seed: u64, label: &str) -> Corpus {
    sample(corpus, n_max, seed::child(seed, label))
}

/// Deterministic shuffle driven by `seed`.
pub fn shuffle(corpus: &Corpus, seed: u64) -> Corpus {
    let mut docs = corpus.docs.clone();
    docs.shuffle(&mut seed::rng(seed));
    Corpus::from_valid(docs, corpus.source_label.clone())
}

/// Keyed table loaded from CSV; the first column is the key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    pub key_field: String,
    pub value_fields: Vec<String>,
    pub rows: BTreeMap<String, BTreeMap<String, String>>,
}

impl LookupTable {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let (key_field, value_fields) = headers
            .split_first()
            .ok_or_else(|| Error::InvalidLookup("missing header".into()))?;
        let mut rows = BTreeMap::new();
        for record in rdr.records() {
            let record = record?;
            let key = record.get(0).unwrap_or_default().trim().to_string();
            let values = value_fields
                .iter()
                .zip(record.iter().skip(1))
                .map(|(f, v)| (f.clone(), v.trim().to_string()))
                .collect();
            if rows.insert(key.clone(), values).is_some() {
                return Err(Error::InvalidLookup(format!("duplicate key {key:?}")));
            }
        }
        Ok(LookupTable {
            key_field: key_field.clone(),
            value_fields: value_fields.to_vec(),
            rows,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_reader(file)
    }

    pub fn get(&self, key: &str) -> Option<&BTreeMap<String, String>> {
        self.rows.get(key)
    }
}

/// Attaches lookup columns as `prefix.column` meta entries, matching on the
/// document's `doc_key` meta value. Unmatched documents get
/// `prefix._matched = "false"`.
pub fn join_lookup(
    corpus: &Corpus,
    table: &LookupTable,
    doc_key: &str,
    prefix: &str,
) -> Result<Corpus> {
    let dotted = format!("{prefix}.");
    for doc in &corpus.docs {
        if let Some(k) = doc
            .meta
            .keys()
            .find(|k| k.as_str() == prefix || k.starts_with(&dotted))
        {
            return Err(Error::DuplicateMetaKey(k.clone()));
        }
    }
    let docs = corpus
        .docs
        .iter()
        .map(|doc| {
            let mut doc = doc.clone();
            match doc.meta.get(doc_key).and_then(|k| table.get(k.trim())) {
                Some(row) => {
                    for (field, value) in row {
                        doc.meta.insert(format!("{dotted}{field}"), value.clone());
                    }
                }
                None => {
                    doc.meta.insert(format!("{dotted}_matched"), "false".into());
                }
            }
            doc
        })
        .collect();
    Ok(Corpus::from_valid(docs, corpus.source_label.clone()))
}
