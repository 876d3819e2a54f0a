//! Synthetic corpora with known ground truth.
//!
//! [`PlantedModel`] draws units whose token occurrences follow planted P and
//! Q distributions exactly, which makes the estimator's modeling assumptions
//! hold by construction. [`human_documents`] produces sentence-structured
//! documents over a fixed lexicon that includes the mock generator's
//! substitution words, for exercising the generation pipeline end to end.

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{Corpus, Document};
use crate::generation::SUBSTITUTIONS;
use crate::seed::{self, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedModel {
    pub tokens: Vec<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl PlantedModel {
    /// `n_tokens` tokens with P and Q drawn independently from U(0.05, 0.6).
    pub fn random(n_tokens: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let tokens = (0..n_tokens).map(|i| format!("tok{i:03}")).collect();
        let p = (0..n_tokens).map(|_| rng.random_range(0.05..0.6)).collect();
        let q = (0..n_tokens).map(|_| rng.random_range(0.05..0.6)).collect();
        PlantedModel { tokens, p, q }
    }

    /// One unit: each token present independently with its P (or Q) probability.
    pub fn sample_text(&self, rng: &mut Rng, llm: bool) -> String {
        let probs = if llm { &self.q } else { &self.p };
        let words: Vec<&str> = self
            .tokens
            .iter()
            .zip(probs)
            .filter_map(|(t, &pr)| (rng.random::<f64>() < pr).then_some(t.as_str()))
            .collect();
        if words.is_empty() {
            "blank.".to_string()
        } else {
            format!("{}.", words.join(" "))
        }
    }

    /// `n` documents, each LLM-drawn with probability `alpha`. Returns the
    /// corpus and the number of LLM-drawn documents.
    pub fn mixture(
        &self,
        n: usize,
        alpha: f64,
        seed: u64,
        id_prefix: &str,
        date: NaiveDate,
    ) -> (Corpus, usize) {
        let mut rng = seed::rng(seed);
        let mut n_llm = 0;
        let docs = (0..n)
            .map(|i| {
                let llm = rng.random::<f64>() < alpha;
                n_llm += usize::from(llm);
                let text = self.sample_text(&mut rng, llm);
                Document::new(format!("{id_prefix}{i:06}"), text, date)
                    .with_meta("source", if llm { "llm" } else { "human" })
            })
            .collect();
        (
            Corpus::new(docs, format!("planted(alpha={alpha})")).expect("unique ids"),
            n_llm,
        )
    }

    /// `n` documents drawn purely from P (or Q).
    pub fn pure(&self, n: usize, llm: bool, seed: u64, id_prefix: &str, date: NaiveDate) -> Corpus {
        let mut rng = seed::rng(seed);
        let docs = (0..n)
            .map(|i| {
                Document::new(
                    format!("{id_prefix}{i:06}"),
                    self.sample_text(&mut rng, llm),
                    date,
                )
            })
            .collect();
        Corpus::new(docs, if llm { "planted-q" } else { "planted-p" }).expect("unique ids")
    }
}

/// Lexicon for sentence-structured human documents: generic words plus the
/// mock generator's substitution sources (common) and targets (rare).
fn lexicon() -> Vec<(String, f64)> {
    let mut words: Vec<(String, f64)> = Vec::new();
    for (i, &(from, to)) in SUBSTITUTIONS.iter().enumerate() {
        words.push((from.to_string(), 0.25 + 0.01 * i as f64));
        words.push((to.to_string(), 0.02));
    }
    for w in ["furthermore", "comprehensive", "notably"] {
        words.push((w.to_string(), 0.02));
    }
    for i in 0..120 {
        words.push((format!("word{i:03}"), 0.04 + 0.003 * i as f64));
    }
    words
}

/// `n` human-style documents dated evenly across `[from, to]`.
pub fn human_documents(
    n: usize,
    seed: u64,
    id_prefix: &str,
    from: NaiveDate,
    to: NaiveDate,
) -> Corpus {
    let lexicon = lexicon();
    let mut rng = seed::rng(seed);
    let span = (to - from).num_days().max(0);
    let docs = (0..n)
        .map(|i| {
            let mut words: Vec<&str> = lexicon
                .iter()
                .filter_map(|(w, p)| (rng.random::<f64>() < *p).then_some(w.as_str()))
                .collect();
            if words.is_empty() {
                words.push("word000");
            }
            words.shuffle(&mut rng);
            let mut text = String::new();
            for chunk in words.chunks(8) {
                if !text.is_empty() {
                    text.push(' ');
                }
                let sentence = chunk.join(" ");
                let mut cs = sentence.chars();
                if let Some(first) = cs.next() {
                    text.extend(first.to_uppercase());
                    text.push_str(cs.as_str());
                }
                text.push('.');
            }
            let offset = if n > 1 {
                span * i as i64 / (n as i64 - 1)
            } else {
                0
            };
            Document::new(
                format!("{id_prefix}{i:06}"),
                text,
                from + Duration::days(offset),
            )
        })
        .collect();
    Corpus::new(docs, "synthetic-human").expect("unique ids")
}
