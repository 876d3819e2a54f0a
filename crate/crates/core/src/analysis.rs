//! Temporal trends and stratified comparisons.
//!
//! Documents are grouped into calendar buckets (`YYYY-MM` or `YYYYQn`), each
//! bucket is capped by seeded sampling, and α is estimated per bucket with a
//! bootstrap interval. Sampling and bootstrap seeds are derived from the
//! bucket label, so a bucket's result does not depend on any other bucket.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationReport;
use crate::corpus::{sample_labeled, Corpus, Document, LookupTable};
use crate::error::{Error, Result};
use crate::estimator::{BootstrapConfig, EstimateResult, UnitScores};
use crate::model::{TokenModel, Unit};
use crate::seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Month,
    Quarter,
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "month" => Ok(Granularity::Month),
            "quarter" => Ok(Granularity::Quarter),
            _ => Err(Error::InvalidArgument(format!("unknown granularity {s:?}"))),
        }
    }
}

pub fn bucket_label(date: NaiveDate, granularity: Granularity) -> String {
    match granularity {
        Granularity::Month => format!("{:04}-{:02}", date.year(), date.month()),
        Granularity::Quarter => format!("{:04}Q{}", date.year(), (date.month() - 1) / 3 + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BucketSpec {
    pub granularity: Granularity,
    pub n_max_per_bucket: usize,
    pub min_units_per_bucket: usize,
}

impl Default for BucketSpec {
    fn default() -> Self {
        BucketSpec {
            granularity: Granularity::Month,
            n_max_per_bucket: 2000,
            min_units_per_bucket: 50,
        }
    }
}

impl BucketSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_max_per_bucket < self.min_units_per_bucket || self.n_max_per_bucket == 0 {
            return Err(Error::InvalidArgument(format!(
                "n_max_per_bucket ({}) must be positive and >= min_units_per_bucket ({})",
                self.n_max_per_bucket, self.min_units_per_bucket
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub bucket: String,
    pub estimate: EstimateResult,
    pub n_available: usize,
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedBucket {
    pub bucket: String,
    pub n_available: usize,
    pub n_units: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub points: Vec<TrendPoint>,
    pub stratum: BTreeMap<String, String>,
    pub unit: Unit,
    pub skipped: Vec<SkippedBucket>,
}

impl TrendSeries {
    pub fn stratum_label(&self) -> String {
        if self.stratum.is_empty() {
            "all".to_string()
        } else {
            self.stratum
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";")
        }
    }
}

enum BucketOutcome {
    Point(TrendPoint),
    Skipped(SkippedBucket),
}

fn estimate_bucket(
    model: &TokenModel,
    label: &str,
    docs: Vec<Document>,
    spec: &BucketSpec,
    boot: &BootstrapConfig,
) -> BucketOutcome {
    let n_available = docs.len();
    let bucket = Corpus::from_valid(docs, label.to_string());
    let used = sample_labeled(&bucket, spec.n_max_per_bucket, boot.seed, label);
    let scores = UnitScores::from_corpus(model, &used);
    let skip = |reason: String| {
        BucketOutcome::Skipped(SkippedBucket {
            bucket: label.to_string(),
            n_available,
            n_units: scores.len(),
            reason,
        })
    };
    if scores.len() < spec.min_units_per_bucket {
        return skip(format!(
            "{} units, fewer than the minimum {}",
            scores.len(),
            spec.min_units_per_bucket
        ));
    }
    let cfg = BootstrapConfig {
        seed: seed::child(boot.seed, &format!("boot/{label}")),
        ..boot.clone()
    };
    match scores.bootstrap(&cfg) {
        Ok(estimate) => BucketOutcome::Point(TrendPoint {
            bucket: label.to_string(),
            estimate,
            n_available,
            n_used: used.len(),
        }),
        Err(e) => skip(e.to_string()),
    }
}

/// Per-bucket α estimates in chronological order. Buckets with too few
/// units, or whose estimate fails, are listed in `skipped`.
pub fn trend(
    model: &TokenModel,
    corpus: &Corpus,
    spec: &BucketSpec,
    boot: &BootstrapConfig,
) -> Result<TrendSeries> {
    spec.validate()?;
    let mut buckets: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for doc in corpus.docs() {
        buckets
            .entry(bucket_label(doc.date, spec.granularity))
            .or_default()
            .push(doc.clone());
    }
    let outcomes: Vec<BucketOutcome> = buckets
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(label, docs)| estimate_bucket(model, &label, docs, spec, boot))
        .collect();
    let mut series = TrendSeries {
        points: Vec::new(),
        stratum: BTreeMap::new(),
        unit: model.unit(),
        skipped: Vec::new(),
    };
    for o in outcomes {
        match o {
            BucketOutcome::Point(p) => series.points.push(p),
            BucketOutcome::Skipped(s) => series.skipped.push(s),
        }
    }
    Ok(series)
}

pub const MISSING_GROUP: &str = "_missing";

/// One trend per distinct value of the `groupby` meta key; documents without
/// the key form the `_missing` group. Every group uses the same seed.
pub fn stratified_trend(
    model: &TokenModel,
    corpus: &Corpus,
    groupby: &str,
    spec: &BucketSpec,
    boot: &BootstrapConfig,
) -> Result<BTreeMap<String, TrendSeries>> {
    let mut groups: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for doc in corpus.docs() {
        let key = doc
            .meta
            .get(groupby)
            .cloned()
            .unwrap_or_else(|| MISSING_GROUP.to_string());
        groups.entry(key).or_default().push(doc.clone());
    }
    groups
        .into_iter()
        .map(|(value, docs)| {
            let sub = Corpus::from_valid(docs, corpus.source_label().to_string());
            let mut series = trend(model, &sub, spec, boot)?;
            series.stratum.insert(groupby.to_string(), value.clone());
            Ok((value, series))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    RucaBinary,
    EducationVsStateMedian,
    EmployeesThreshold,
    VacanciesThreshold,
    FoundingCohort,
    MetaEquals,
}

/// A derived-meta rule. Parameters (all optional unless noted):
///
/// | kind | params | output key |
/// |---|---|---|
/// | `ruca_binary` | `field`=`ruca.code`, `max_code`=`3` | `highly_urbanized` |
/// | `education_vs_state_median` | `lookup` (required), `key_field`=`zip`, `state_column`=`state`, `value_column`=`bachelor_pct` | `above_median` |
/// | `employees_threshold` | `field`=`employees`, `k`=`10` | `small_firm` |
/// | `vacancies_threshold` | `field`=`vacancies_per_year`, `k`=`2` | `small_firm` |
/// | `founding_cohort` | `field`=`founded` | `cohort` |
/// | `meta_equals` | `field`, `value` (both required) | rule name |
///
/// Any rule accepts `output` to rename its output key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRule {
    pub name: String,
    pub kind: StratumKind,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl StratumRule {
    pub fn new(name: &str, kind: StratumKind) -> Self {
        StratumRule {
            name: name.to_string(),
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    fn param<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.params.get(key).map_or(default, String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.params.get(key).map(String::as_str).ok_or_else(|| {
            Error::InvalidArgument(format!("rule {:?} needs parameter {key:?}", self.name))
        })
    }

    fn output_key(&self) -> &str {
        let default = match self.kind {
            StratumKind::RucaBinary => "highly_urbanized",
            StratumKind::EducationVsStateMedian => "above_median",
            StratumKind::EmployeesThreshold | StratumKind::VacanciesThreshold => "small_firm",
            StratumKind::FoundingCohort => "cohort",
            StratumKind::MetaEquals => self.name.as_str(),
        };
        self.param("output", default)
    }
}

/// Cohort for a founding year: `post2015` (2015 and later), `2000_2015`,
/// `1980_2000`, `pre1980`.
pub fn founding_cohort(year: i64) -> &'static str {
    match year {
        y if y >= 2015 => "post2015",
        y if y >= 2000 => "2000_2015",
        y if y >= 1980 => "1980_2000",
        _ => "pre1980",
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Per-state medians of one lookup column.
fn state_medians(table: &LookupTable, state_col: &str, value_col: &str) -> BTreeMap<String, f64> {
    let mut by_state: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in table.rows.values() {
        if let (Some(state), Some(v)) = (
            row.get(state_col),
            row.get(value_col).and_then(|v| parse_number(v)),
        ) {
            by_state.entry(state.clone()).or_default().push(v);
        }
    }
    by_state
        .into_iter()
        .map(|(s, mut vs)| (s, median(&mut vs)))
        .collect()
}

#[derive(Debug)]
pub struct StrataOutcome {
    pub corpus: Corpus,
    pub missing: Vec<Error>,
}

/// A prepared rule: evaluates one document to an output value.
enum Compiled<'a> {
    Threshold {
        field: &'a str,
        limit: f64,
    },
    Ruca {
        field: &'a str,
        max_code: f64,
    },
    Cohort {
        field: &'a str,
    },
    Equals {
        field: &'a str,
        value: &'a str,
    },
    Education {
        table: &'a LookupTable,
        key_field: &'a str,
        state_col: &'a str,
        value_col: &'a str,
        medians: BTreeMap<String, f64>,
    },
}

fn parse_param(rule: &StratumRule, key: &str, default: &str) -> Result<f64> {
    let raw = rule.param(key, default);
    parse_number(raw).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "rule {:?}: {key} {raw:?} is not a number",
            rule.name
        ))
    })
}

fn compile<'a>(
    rule: &'a StratumRule,
    lookups: &'a BTreeMap<String, LookupTable>,
) -> Result<Compiled<'a>> {
    Ok(match rule.kind {
        StratumKind::RucaBinary => Compiled::Ruca {
            field: rule.param("field", "ruca.code"),
            max_code: parse_param(rule, "max_code", "3")?,
        },
        StratumKind::EmployeesThreshold => Compiled::Threshold {
            field: rule.param("field", "employees"),
            limit: parse_param(rule, "k", "10")?,
        },
        StratumKind::VacanciesThreshold => Compiled::Threshold {
            field: rule.param("field", "vacancies_per_year"),
            limit: parse_param(rule, "k", "2")?,
        },
        StratumKind::FoundingCohort => Compiled::Cohort {
            field: rule.param("field", "founded"),
        },
        StratumKind::MetaEquals => Compiled::Equals {
            field: rule.required("field")?,
            value: rule.required("value")?,
        },
        StratumKind::EducationVsStateMedian => {
            let name = rule.required("lookup")?;
            let table = lookups.get(name).ok_or_else(|| {
                Error::InvalidArgument(format!("rule {:?}: no lookup table {name:?}", rule.name))
            })?;
            let state_col = rule.param("state_column", "state");
            let value_col = rule.param("value_column", "bachelor_pct");
            Compiled::Education {
                table,
                key_field: rule.param("key_field", "zip"),
                state_col,
                value_col,
                medians: state_medians(table, state_col, value_col),
            }
        }
    })
}

impl Compiled<'_> {
    fn evaluate(&self, doc: &Document) -> std::result::Result<String, String> {
        let numeric = |field: &str| {
            doc.meta
                .get(field)
                .and_then(|v| parse_number(v))
                .ok_or_else(|| field.to_string())
        };
        match self {
            Compiled::Threshold { field, limit } => Ok((numeric(field)? <= *limit).to_string()),
            Compiled::Ruca { field, max_code } => {
                Ok((numeric(field)?.floor() <= *max_code).to_string())
            }
            Compiled::Cohort { field } => {
                Ok(founding_cohort(numeric(field)?.floor() as i64).to_string())
            }
            Compiled::Equals { field, value } => doc
                .meta
                .get(*field)
                .map(|v| (v == value).to_string())
                .ok_or_else(|| field.to_string()),
            Compiled::Education {
                table,
                key_field,
                state_col,
                value_col,
                medians,
            } => {
                let key = doc
                    .meta
                    .get(*key_field)
                    .ok_or_else(|| key_field.to_string())?;
                let row = table
                    .get(key.trim())
                    .ok_or_else(|| format!("{}[{key}]", table.key_field))?;
                let state = row.get(*state_col).ok_or_else(|| state_col.to_string())?;
                let value = row
                    .get(*value_col)
                    .and_then(|v| parse_number(v))
                    .ok_or_else(|| value_col.to_string())?;
                let median = medians
                    .get(state)
                    .ok_or_else(|| format!("median[{state}]"))?;
                Ok((value > *median).to_string())
            }
        }
    }
}

/// Adds derived meta keys. Documents missing an input keep their other
/// fields and are reported in `missing`; text, date and id never change.
pub fn derive_strata(
    corpus: &Corpus,
    rules: &[StratumRule],
    lookups: &BTreeMap<String, LookupTable>,
) -> Result<StrataOutcome> {
    let compiled: Vec<(&str, Compiled)> = rules
        .iter()
        .map(|r| Ok((r.output_key(), compile(r, lookups)?)))
        .collect::<Result<_>>()?;
    let mut missing = Vec::new();
    let docs = corpus
        .docs()
        .iter()
        .map(|doc| {
            let mut out = doc.clone();
            for (key, rule) in &compiled {
                match rule.evaluate(doc) {
                    Ok(v) => {
                        out.meta.insert(key.to_string(), v);
                    }
                    Err(field) => missing.push(Error::MissingField {
                        id: doc.id.clone(),
                        field,
                    }),
                }
            }
            out
        })
        .collect();
    Ok(StrataOutcome {
        corpus: Corpus::from_valid(docs, corpus.source_label().to_string()),
        missing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidArgument(format!(
                "unknown report format {s:?}"
            ))),
        }
    }
}

/// Something that can be written as a CSV table or a JSON document.
pub trait Report {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()>;
    fn to_json(&self) -> Result<String>;
}

/// Series exported together in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub series: Vec<TrendSeries>,
}

impl TrendReport {
    pub const CSV_HEADER: [&'static str; 6] =
        ["bucket", "stratum", "alpha", "ci_low", "ci_high", "n_used"];

    /// Skipped-bucket notes for the sidecar file.
    pub fn skipped_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Note<'a> {
            stratum: String,
            #[serde(flatten)]
            bucket: &'a SkippedBucket,
        }
        let notes: Vec<Note> = self
            .series
            .iter()
            .flat_map(|s| {
                s.skipped.iter().map(move |b| Note {
                    stratum: s.stratum_label(),
                    bucket: b,
                })
            })
            .collect();
        Ok(serde_json::to_string_pretty(&notes)? + "\n")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl Report for TrendReport {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for s in &self.series {
            let stratum = s.stratum_label();
            for p in &s.points {
                w.write_record([
                    p.bucket.clone(),
                    stratum.clone(),
                    p.estimate.alpha.to_string(),
                    opt(p.estimate.ci_low),
                    opt(p.estimate.ci_high),
                    p.n_used.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

impl Report for CalibrationReport {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        CalibrationReport::write_csv(self, out)
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn export_report(
    report: &dyn Report,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        ReportFormat::Csv => report.write_csv(&mut buf)?,
        ReportFormat::Json => buf = report.to_json()?.into_bytes(),
    }
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn doc(id: &str) -> Document {
        Document::new(id, "text", d(2023, 1, 1))
    }

    #[test]
    fn labels() {
        assert_eq!(bucket_label(d(2023, 1, 31), Granularity::Month), "2023-01");
        assert_eq!(bucket_label(d(2023, 3, 31), Granularity::Quarter), "2023Q1");
        assert_eq!(bucket_label(d(2023, 4, 1), Granularity::Quarter), "2023Q2");
        assert_eq!(bucket_label(d(2024, 12, 1), Granularity::Quarter), "2024Q4");
    }

    #[test]
    fn cohorts() {
        assert_eq!(founding_cohort(2016), "post2015");
        assert_eq!(founding_cohort(2015), "post2015");
        assert_eq!(founding_cohort(2014), "2000_2015");
        assert_eq!(founding_cohort(2000), "2000_2015");
        assert_eq!(founding_cohort(1999), "1980_2000");
        assert_eq!(founding_cohort(1980), "1980_2000");
        assert_eq!(founding_cohort(1979), "pre1980");
    }

    fn run(rules: &[StratumRule], docs: Vec<Document>) -> StrataOutcome {
        let c = Corpus::new(docs, "t").unwrap();
        let table = LookupTable::from_reader(
            "zip,state,bachelor_pct\n1,CA,10\n2,CA,20\n3,CA,30\n4,NY,50\n5,NY,70\n".as_bytes(),
        )
        .unwrap();
        let lookups = BTreeMap::from([("edu".to_string(), table)]);
        derive_strata(&c, rules, &lookups).unwrap()
    }

    #[test]
    fn ruca_rule() {
        let out = run(
            &[StratumRule::new("urban", StratumKind::RucaBinary)],
            vec![
                doc("a").with_meta("ruca.code", "1"),
                doc("b").with_meta("ruca.code", "7"),
                doc("c").with_meta("ruca.code", "3.2"),
                doc("z"),
            ],
        );
        let v: Vec<_> = out
            .corpus
            .docs()
            .iter()
            .map(|d| d.meta.get("highly_urbanized").cloned())
            .collect();
        assert_eq!(
            v,
            [
                Some("true".into()),
                Some("false".into()),
                Some("true".into()),
                None
            ]
        );
        assert_eq!(out.missing.len(), 1);
        assert!(
            matches!(&out.missing[0], Error::MissingField { id, field } if id == "z" && field == "ruca.code")
        );
    }

    #[test]
    fn size_rules_are_inclusive() {
        let out = run(
            &[
                StratumRule::new("emp", StratumKind::EmployeesThreshold)
                    .with("output", "small_emp"),
                StratumRule::new("vac", StratumKind::VacanciesThreshold),
            ],
            vec![
                doc("a")
                    .with_meta("employees", "10")
                    .with_meta("vacancies_per_year", "2"),
                doc("b")
                    .with_meta("employees", "11")
                    .with_meta("vacancies_per_year", "3"),
            ],
        );
        assert_eq!(out.corpus.docs()[0].meta["small_emp"], "true");
        assert_eq!(out.corpus.docs()[0].meta["small_firm"], "true");
        assert_eq!(out.corpus.docs()[1].meta["small_emp"], "false");
        assert_eq!(out.corpus.docs()[1].meta["small_firm"], "false");
    }

    #[test]
    fn education_against_state_median() {
        let out = run(
            &[StratumRule::new("edu", StratumKind::EducationVsStateMedian).with("lookup", "edu")],
            vec![
                doc("a").with_meta("zip", "3"),
                doc("b").with_meta("zip", "2"),
                doc("c").with_meta("zip", "5"),
                doc("d").with_meta("zip", "4"),
                doc("e").with_meta("zip", "99"),
            ],
        );
        let v: Vec<_> = out
            .corpus
            .docs()
            .iter()
            .map(|d| d.meta.get("above_median").cloned())
            .collect();
        // CA median 20, NY median 60.
        assert_eq!(
            v,
            [
                Some("true".into()),
                Some("false".into()),
                Some("true".into()),
                Some("false".into()),
                None
            ]
        );
        assert_eq!(out.missing.len(), 1);
    }

    #[test]
    fn cohort_and_equals_rules() {
        let out = run(
            &[
                StratumRule::new("cohort", StratumKind::FoundingCohort),
                StratumRule::new("is_ca", StratumKind::MetaEquals)
                    .with("field", "state")
                    .with("value", "CA"),
            ],
            vec![doc("a")
                .with_meta("founded", "2016")
                .with_meta("state", "CA")],
        );
        assert_eq!(out.corpus.docs()[0].meta["cohort"], "post2015");
        assert_eq!(out.corpus.docs()[0].meta["is_ca"], "true");
    }

    #[test]
    fn bad_rule_parameters() {
        let c = Corpus::new(vec![doc("a")], "t").unwrap();
        let lookups = BTreeMap::new();
        let missing_lookup =
            StratumRule::new("edu", StratumKind::EducationVsStateMedian).with("lookup", "none");
        assert!(derive_strata(&c, &[missing_lookup], &lookups).is_err());
        let bad_k = StratumRule::new("emp", StratumKind::EmployeesThreshold).with("k", "ten");
        assert!(derive_strata(&c, &[bad_k], &lookups).is_err());
        let no_field = StratumRule::new("eq", StratumKind::MetaEquals);
        assert!(derive_strata(&c, &[no_field], &lookups).is_err());
    }

    #[test]
    fn rule_json_shape() {
        let r: StratumRule = serde_json::from_str(
            r#"{"name":"small","kind":"vacancies_threshold","params":{"k":"2"}}"#,
        )
        .unwrap();
        assert_eq!(r.kind, StratumKind::VacanciesThreshold);
    }

    #[test]
    fn formats() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!(matches!(
            "xml".parse::<ReportFormat>(),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn empty_series_exports_header_only() {
        let report = TrendReport { series: vec![] };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bucket,stratum,alpha,ci_low,ci_high,n_used\n"
        );
    }
}
