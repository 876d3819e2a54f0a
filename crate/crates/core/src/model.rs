//! Token occurrence model for the human (P) and LLM (Q) distributions.
//!
//! Each estimation unit (a document, or a sentence) is reduced to the set of
//! vocabulary tokens it contains. Tokens are assumed independent within a
//! unit, so a unit's log-likelihood under either distribution factors into a
//! sum over vocabulary slots:
//!
//! ```text
//! a = Σ_t [x_t ln p_t + (1 - x_t) ln(1 - p_t)]      (human)
//! b = Σ_t [x_t ln q_t + (1 - x_t) ln(1 - q_t)]      (LLM)
//! ```
//!
//! Slot probabilities are smoothed document frequencies,
//! `(df_t + β) / (N + 2β)`, clamped to `[ε, 1 - ε]` so both sums stay finite.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::{present_slots, segment_sentences, tokenize};

pub const SCHEMA_VERSION: u64 = 1;

/// Granularity of an estimation unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Document,
    Sentence,
}

impl std::str::FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "document" => Ok(Unit::Document),
            "sentence" => Ok(Unit::Sentence),
            _ => Err(Error::InvalidArgument(format!("unknown unit {s:?}"))),
        }
    }
}

impl std::fmt::Display for Unit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Unit::Document => "document",
            Unit::Sentence => "sentence",
        })
    }
}

/// Unit texts of one document.
pub fn doc_units(text: &str, unit: Unit) -> Vec<Cow<'_, str>> {
    match unit {
        Unit::Document => vec![Cow::Borrowed(text)],
        Unit::Sentence => segment_sentences(text)
            .into_iter()
            .map(Cow::Owned)
            .collect(),
    }
}

/// Unit texts of a corpus, in corpus order.
pub fn corpus_units(corpus: &Corpus, unit: Unit) -> Vec<Cow<'_, str>> {
    corpus
        .docs()
        .iter()
        .flat_map(|d| doc_units(&d.text, unit))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub unit: Unit,
    pub min_df: u64,
    pub max_vocab: usize,
    pub smoothing_beta: f64,
    pub clamp_epsilon: f64,
    pub min_docs: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            unit: Unit::Document,
            min_df: 5,
            max_vocab: 5000,
            smoothing_beta: 0.5,
            clamp_epsilon: 1e-6,
            min_docs: 100,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.min_df < 1 {
            return bad("min_df must be >= 1");
        }
        if self.max_vocab < 1 {
            return bad("max_vocab must be >= 1");
        }
        if !(self.smoothing_beta.is_finite() && self.smoothing_beta >= 0.0) {
            return bad("smoothing_beta must be finite and >= 0");
        }
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon <= 0.01) {
            return bad("clamp_epsilon must lie in (0, 0.01]");
        }
        if self.min_docs < 2 {
            return bad("min_docs must be >= 2");
        }
        Ok(())
    }
}

/// Ordered token list with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Wraps an explicit token list; rejects duplicates and empty tokens.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (slot, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(Error::InvalidArgument("empty vocabulary token".into()));
            }
            if index.insert(tok.clone(), slot).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate token {tok:?}")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn slot(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Per-token unit frequencies of a corpus.
#[derive(Debug, Clone, Default)]
pub struct DocFrequencies {
    pub counts: HashMap<String, u64>,
    pub n_units: usize,
}

impl DocFrequencies {
    pub fn count(corpus: &Corpus, unit: Unit) -> Self {
        let units = corpus_units(corpus, unit);
        let counts = units
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<String, u64>, u| {
                let mut toks = tokenize(u);
                toks.sort_unstable();
                toks.dedup();
                for t in toks {
                    *acc.entry(t).or_insert(0) += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        DocFrequencies {
            counts,
            n_units: units.len(),
        }
    }

    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }
}

fn vocabulary_from_counts(
    human: &DocFrequencies,
    llm: &DocFrequencies,
    cfg: &FitConfig,
) -> Result<Vocabulary> {
    let mut eligible: Vec<(u64, &str)> = human
        .counts
        .iter()
        .filter(|&(_, &dh)| dh >= cfg.min_df)
        .filter_map(|(tok, &dh)| {
            let dl = llm.get(tok);
            (dl >= cfg.min_df).then_some((dh + dl, tok.as_str()))
        })
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    eligible.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    eligible.truncate(cfg.max_vocab);
    Vocabulary::from_tokens(eligible.into_iter().map(|(_, t)| t.to_string()).collect())
}

/// Tokens reaching `min_df` in both corpora, ordered by descending combined
/// frequency (ties lexicographic) and truncated to `max_vocab`.
pub fn build_vocabulary(human: &Corpus, llm: &Corpus, cfg: &FitConfig) -> Result<Vocabulary> {
    if human.is_empty() || llm.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let h = DocFrequencies::count(human, cfg.unit);
    let l = DocFrequencies::count(llm, cfg.unit);
    vocabulary_from_counts(&h, &l, cfg)
}

/// `(df + β) / (N + 2β)` clamped to `[ε, 1 - ε]`.
pub fn smoothed_probability(df: u64, n: usize, beta: f64, eps: f64) -> f64 {
    let raw = (df as f64 + beta) / (n as f64 + 2.0 * beta);
    raw.clamp(eps, 1.0 - eps)
}

fn probs_from_counts(
    freqs: &DocFrequencies,
    vocab: &Vocabulary,
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    if freqs.n_units < cfg.min_docs {
        return Err(Error::TooFewDocuments {
            need: cfg.min_docs,
            have: freqs.n_units,
        });
    }
    Ok(vocab
        .tokens()
        .iter()
        .map(|t| {
            smoothed_probability(
                freqs.get(t),
                freqs.n_units,
                cfg.smoothing_beta,
                cfg.clamp_epsilon,
            )
        })
        .collect())
}

pub fn estimate_occurrence_probs(
    corpus: &Corpus,
    vocab: &Vocabulary,
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    probs_from_counts(&DocFrequencies::count(corpus, cfg.unit), vocab, cfg)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceStats {
    pub label: String,
    pub docs: usize,
    pub units: usize,
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
}

impl SourceStats {
    fn of(corpus: &Corpus, units: usize) -> Self {
        let range = corpus.date_range();
        SourceStats {
            label: corpus.source_label().to_string(),
            docs: corpus.len(),
            units,
            date_from: range.map(|r| r.0),
            date_to: range.map(|r| r.1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub human: SourceStats,
    pub llm: SourceStats,
    pub smoothing_beta: f64,
    pub clamp_epsilon: f64,
    /// Sorted ids of every training document; used to keep holdouts disjoint.
    #[serde(default)]
    pub train_ids: Vec<String>,
}

/// Precomputed log-probabilities for fast unit scoring.
#[derive(Debug, Clone, PartialEq)]
struct LogWeights {
    base_a: f64,
    base_b: f64,
    gain_a: Vec<f64>,
    gain_b: Vec<f64>,
}

impl LogWeights {
    fn new(p: &[f64], q: &[f64]) -> Self {
        let base = |v: &[f64]| v.iter().map(|x| (1.0 - x).ln()).sum();
        let gain = |v: &[f64]| v.iter().map(|x| x.ln() - (1.0 - x).ln()).collect();
        LogWeights {
            base_a: base(p),
            base_b: base(q),
            gain_a: gain(p),
            gain_b: gain(q),
        }
    }
}

/// Fitted model: vocabulary plus P and Q occurrence probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenModel {
    vocab: Vocabulary,
    p: Vec<f64>,
    q: Vec<f64>,
    config: FitConfig,
    provenance: Provenance,
    weights: LogWeights,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u64,
    config: FitConfig,
    vocab: Vec<String>,
    p: Vec<f64>,
    q: Vec<f64>,
    provenance: Provenance,
}

impl TokenModel {
    /// Assembles a model from explicit parts, checking lengths and ranges.
    pub fn from_parts(
        vocab: Vocabulary,
        p: Vec<f64>,
        q: Vec<f64>,
        config: FitConfig,
        provenance: Provenance,
    ) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if p.len() != vocab.len() || q.len() != vocab.len() {
            return Err(Error::InvalidArgument(format!(
                "probability arrays ({}, {}) do not match vocabulary size {}",
                p.len(),
                q.len(),
                vocab.len()
            )));
        }
        if let Some(bad) = p.iter().chain(&q).find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "probability {bad} outside (0, 1)"
            )));
        }
        let weights = LogWeights::new(&p, &q);
        Ok(TokenModel {
            vocab,
            p,
            q,
            config,
            provenance,
            weights,
        })
    }

    /// Hand-built model with default config and empty provenance.
    pub fn from_probabilities(tokens: &[&str], p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let vocab = Vocabulary::from_tokens(tokens.iter().map(|t| t.to_string()).collect())?;
        Self::from_parts(vocab, p, q, FitConfig::default(), Provenance::default())
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    pub fn unit(&self) -> Unit {
        self.config.unit
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Whether any slot has identical human and LLM probability. Such slots
    /// add the same amount to both unit log-likelihoods and carry no signal.
    pub fn has_uninformative_slots(&self) -> bool {
        self.p.iter().zip(&self.q).any(|(p, q)| p == q)
    }

    /// `(a, b)` for a unit given its present slots (ascending).
    pub fn score_slots(&self, slots: &[usize]) -> (f64, f64) {
        let w = &self.weights;
        let mut a = w.base_a;
        let mut b = w.base_b;
        for &s in slots {
            a += w.gain_a[s];
            b += w.gain_b[s];
        }
        (a, b)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = ModelFile {
            schema_version: SCHEMA_VERSION,
            config: self.config.clone(),
            vocab: self.vocab.tokens.clone(),
            p: self.p.clone(),
            q: self.q.clone(),
            provenance: self.provenance.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::CorruptModel(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::CorruptModel("missing schema_version".into()))?;
        if version != SCHEMA_VERSION {
            return Err(Error::SchemaVersionMismatch {
                found: version,
                expected: SCHEMA_VERSION,
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))?;
        let corrupt = |e: Error| Error::CorruptModel(e.to_string());
        file.config.validate().map_err(corrupt)?;
        let vocab = Vocabulary::from_tokens(file.vocab).map_err(corrupt)?;
        Self::from_parts(vocab, file.p, file.q, file.config, file.provenance).map_err(corrupt)
    }
}

pub fn fit(human: &Corpus, llm: &Corpus, cfg: &FitConfig) -> Result<TokenModel> {
    cfg.validate()?;
    if human.is_empty() || llm.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let h = DocFrequencies::count(human, cfg.unit);
    let l = DocFrequencies::count(llm, cfg.unit);
    for f in [&h, &l] {
        if f.n_units < cfg.min_docs {
            return Err(Error::TooFewDocuments {
                need: cfg.min_docs,
                have: f.n_units,
            });
        }
    }
    let vocab = vocabulary_from_counts(&h, &l, cfg)?;
    let p = probs_from_counts(&h, &vocab, cfg)?;
    let q = probs_from_counts(&l, &vocab, cfg)?;
    let mut train_ids: Vec<String> = human.ids().chain(llm.ids()).map(str::to_string).collect();
    train_ids.sort_unstable();
    train_ids.dedup();
    let provenance = Provenance {
        human: SourceStats::of(human, h.n_units),
        llm: SourceStats::of(llm, l.n_units),
        smoothing_beta: cfg.smoothing_beta,
        clamp_epsilon: cfg.clamp_epsilon,
        train_ids,
    };
    TokenModel::from_parts(vocab, p, q, cfg.clone(), provenance)
}

pub fn save_model(model: &TokenModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_json_string()?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TokenModel> {
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        std::io::ErrorKind::InvalidData => Error::CorruptModel(e.to_string()),
        _ => Error::Io(e),
    })?;
    TokenModel::from_json_str(&s)
}

/// `(a, b)`: the unit's log-likelihood under P and under Q.
pub fn unit_log_likelihoods(model: &TokenModel, unit_text: &str) -> (f64, f64) {
    model.score_slots(&present_slots(unit_text, model.vocab()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(label: &str, texts: &[&str]) -> Corpus {
        let date = NaiveDate::from_ymd_opt(2021, 5, 1).unwrap();
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("{label}{i}"), *t, date))
            .collect();
        Corpus::new(docs, label).unwrap()
    }

    fn cfg(min_df: u64, max_vocab: usize, beta: f64) -> FitConfig {
        FitConfig {
            min_df,
            max_vocab,
            smoothing_beta: beta,
            min_docs: 2,
            ..FitConfig::default()
        }
    }

    #[test]
    fn vocabulary_requires_both_corpora() {
        let mut h = vec!["x y"; 5];
        h.extend(["y"; 5]);
        let l = vec!["y"; 10];
        let v = build_vocabulary(&corpus("h", &h), &corpus("l", &l), &cfg(1, 100, 0.5)).unwrap();
        assert_eq!(v.tokens(), ["y"]);
    }

    #[test]
    fn vocabulary_truncates_by_frequency_then_lexicographic() {
        // 150 tokens; token i appears in (i % 7) + 1 documents of each corpus.
        let mut texts = vec![String::new(); 7];
        for i in 0..150 {
            for t in texts.iter_mut().take(i % 7 + 1) {
                t.push_str(&format!(" w{i:03}"));
            }
        }
        let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
        let v =
            build_vocabulary(&corpus("h", &refs), &corpus("l", &refs), &cfg(1, 100, 0.5)).unwrap();
        assert_eq!(v.len(), 100);
        let mut expected: Vec<(usize, String)> =
            (0..150).map(|i| (i % 7 + 1, format!("w{i:03}"))).collect();
        expected.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let expected: Vec<String> = expected.into_iter().take(100).map(|x| x.1).collect();
        assert_eq!(v.tokens(), expected.as_slice());
    }

    #[test]
    fn disjoint_tokens_give_empty_vocabulary() {
        let r = build_vocabulary(
            &corpus("h", &["a b"]),
            &corpus("l", &["c d"]),
            &cfg(1, 10, 0.5),
        );
        assert!(matches!(r, Err(Error::EmptyVocabulary)));
    }

    #[test]
    fn smoothing_formula() {
        assert_eq!(smoothed_probability(1, 2, 0.5, 1e-6), 0.5);
        assert!((smoothed_probability(0, 100, 0.5, 1e-6) - 0.5 / 101.0).abs() < 1e-15);
        assert!((smoothed_probability(0, 100, 0.5, 1e-6) - 0.004950).abs() < 1e-6);
        assert_eq!(smoothed_probability(0, 100, 0.0, 1e-6), 1e-6);
        assert_eq!(smoothed_probability(100, 100, 0.0, 1e-6), 1.0 - 1e-6);
    }

    #[test]
    fn too_few_documents() {
        let v = Vocabulary::from_tokens(vec!["a".into()]).unwrap();
        let c = FitConfig {
            min_docs: 5,
            ..cfg(1, 10, 0.5)
        };
        assert!(matches!(
            estimate_occurrence_probs(&corpus("h", &["a"]), &v, &c),
            Err(Error::TooFewDocuments { need: 5, have: 1 })
        ));
    }

    fn toy_pair() -> (Corpus, Corpus) {
        let mut h = vec!["t"; 8];
        h.extend(["u"; 2]);
        let mut l = vec!["t"; 2];
        l.extend(["u"; 8]);
        (corpus("h", &h), corpus("l", &l))
    }

    #[test]
    fn fit_toy_probabilities() {
        let (h, l) = toy_pair();
        let m = fit(&h, &l, &cfg(1, 10, 0.0)).unwrap();
        let t = m.vocab().slot("t").unwrap();
        assert!((m.p()[t] - 0.8).abs() < 1e-15);
        assert!((m.q()[t] - 0.2).abs() < 1e-15);
        assert_eq!(m.provenance().human.units, 10);
        assert_eq!(m.provenance().train_ids.len(), 20);
    }

    #[test]
    fn identical_corpora_give_equal_probabilities() {
        let (h, _) = toy_pair();
        let l = corpus(
            "l",
            &h.docs().iter().map(|d| d.text.as_str()).collect::<Vec<_>>(),
        );
        let m = fit(&h, &l, &cfg(1, 10, 0.5)).unwrap();
        assert_eq!(m.p(), m.q());
        assert!(m.has_uninformative_slots());
    }

    #[test]
    fn swapping_corpora_swaps_p_and_q() {
        let (h, l) = toy_pair();
        let m1 = fit(&h, &l, &cfg(1, 10, 0.5)).unwrap();
        let m2 = fit(&l, &h, &cfg(1, 10, 0.5)).unwrap();
        assert_eq!(m1.vocab(), m2.vocab());
        assert_eq!(m1.p(), m2.q());
        assert_eq!(m1.q(), m2.p());
    }

    #[test]
    fn fit_is_byte_deterministic() {
        let (h, l) = toy_pair();
        let a = fit(&h, &l, &cfg(1, 10, 0.5))
            .unwrap()
            .to_json_string()
            .unwrap();
        let b = fit(&h, &l, &cfg(1, 10, 0.5))
            .unwrap()
            .to_json_string()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_load_round_trip() {
        let (h, l) = toy_pair();
        let m = fit(&h, &l, &cfg(1, 10, 0.5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }

    #[test]
    fn truncated_model_is_corrupt() {
        let (h, l) = toy_pair();
        let s = fit(&h, &l, &cfg(1, 10, 0.5))
            .unwrap()
            .to_json_string()
            .unwrap();
        let cut = &s[..s.len() / 2];
        assert!(matches!(
            TokenModel::from_json_str(cut),
            Err(Error::CorruptModel(_))
        ));
    }

    #[test]
    fn future_schema_version_rejected() {
        let (h, l) = toy_pair();
        let s = fit(&h, &l, &cfg(1, 10, 0.5))
            .unwrap()
            .to_json_string()
            .unwrap();
        let future = s.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            TokenModel::from_json_str(&future),
            Err(Error::SchemaVersionMismatch {
                found: 2,
                expected: 1
            })
        ));
    }

    #[test]
    fn out_of_range_probability_is_corrupt() {
        let (h, l) = toy_pair();
        let m = fit(&h, &l, &cfg(1, 10, 0.5)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json_string().unwrap()).unwrap();
        v["p"][0] = serde_json::json!(1.0);
        assert!(matches!(
            TokenModel::from_json_str(&v.to_string()),
            Err(Error::CorruptModel(_))
        ));
    }

    #[test]
    fn unit_scores() {
        let m = TokenModel::from_probabilities(&["t"], vec![0.8], vec![0.2]).unwrap();
        let (a, b) = unit_log_likelihoods(&m, "t t");
        assert!((a - 0.8f64.ln()).abs() < 1e-12);
        assert!((b - 0.2f64.ln()).abs() < 1e-12);
        let (a, b) = unit_log_likelihoods(&m, "other");
        assert!((a - 0.2f64.ln()).abs() < 1e-12);
        assert!((b - 0.8f64.ln()).abs() < 1e-12);

        let m =
            TokenModel::from_probabilities(&["x", "y"], vec![0.3, 0.6], vec![0.3, 0.6]).unwrap();
        for text in ["", "x", "y x", "z"] {
            let (a, b) = unit_log_likelihoods(&m, text);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unit_scores_match_direct_sum() {
        let p = vec![0.1, 0.5, 0.93, 1e-6];
        let q = vec![0.4, 0.2, 0.5, 0.7];
        let m =
            TokenModel::from_probabilities(&["a", "b", "c", "d"], p.clone(), q.clone()).unwrap();
        let x = [true, false, true, false];
        let direct = |v: &[f64]| -> f64 {
            v.iter()
                .zip(x)
                .map(|(pr, xi)| if xi { pr.ln() } else { (1.0 - pr).ln() })
                .sum()
        };
        let (a, b) = unit_log_likelihoods(&m, "c a");
        assert!((a - direct(&p)).abs() < 1e-12);
        assert!((b - direct(&q)).abs() < 1e-12);
    }
}
