//! Validation against mixtures with known ground truth.
//!
//! Held-out human and LLM documents are blended at each grid value of α,
//! the estimator is run on the blend, and the prediction error
//! `|α̂ - α_true|` is reported per grid point and replicate.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::estimator::{score_documents, BootstrapConfig, DocScores, EstimateResult, UnitScores};
use crate::model::{TokenModel, Unit};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSpec {
    pub alpha_grid: Vec<f64>,
    pub n_per_mix: usize,
    pub replicates: usize,
    pub seed: u64,
    pub holdout_cutoff: NaiveDate,
    #[serde(rename = "B")]
    pub bootstrap_replicates: usize,
    pub level: f64,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        CalibrationSpec {
            alpha_grid: default_grid(),
            n_per_mix: 1000,
            replicates: 3,
            seed: 0,
            holdout_cutoff: NaiveDate::from_ymd_opt(2022, 11, 30).unwrap(),
            bootstrap_replicates: 1000,
            level: 0.95,
        }
    }
}

/// 0% to 25% in 2.5% steps.
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 40.0).collect()
}

/// Parses `start:stop:step` (inclusive of `stop`).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("grid must be start:stop:step, got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan() || step <= 0.0 || stop < start || start < 0.0 || stop > 1.0 {
        return Err(bad());
    }
    let steps = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl CalibrationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.alpha_grid.is_empty() {
            return bad("empty alpha grid".into());
        }
        if self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("alpha grid values must lie in [0, 1]".into());
        }
        if self.alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("alpha grid must be sorted and unique".into());
        }
        if self.n_per_mix < 20 {
            return bad(format!("n_per_mix must be >= 20, got {}", self.n_per_mix));
        }
        if self.replicates < 1 {
            return bad("replicates must be >= 1".into());
        }
        Ok(())
    }

    fn bootstrap(&self, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            replicates: self.bootstrap_replicates,
            level: self.level,
            seed,
            ..BootstrapConfig::default()
        }
    }
}

/// Number of LLM documents in a mixture of size `n`: `round(n·α)`, halves up.
pub fn llm_count(n: usize, alpha: f64) -> usize {
    (n as f64 * alpha + 0.5 + 1e-9).floor() as usize
}

/// Pool indices for a mixture: `(human, llm)`, each sampled without
/// replacement.
fn mixture_indices(
    human_pool: usize,
    llm_pool: usize,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_llm = llm_count(n, alpha).min(n);
    let n_human = n - n_llm;
    if n_llm > llm_pool {
        return Err(Error::InsufficientPool {
            kind: "llm",
            need: n_llm,
            have: llm_pool,
        });
    }
    if n_human > human_pool {
        return Err(Error::InsufficientPool {
            kind: "human",
            need: n_human,
            have: human_pool,
        });
    }
    let pick = |pool: usize, k: usize, label: &str| {
        let mut rng = seed::rng(seed::child(seed, label));
        let mut v = rand::seq::index::sample(&mut rng, pool, k).into_vec();
        v.sort_unstable();
        v
    };
    Ok((
        pick(human_pool, n_human, "human"),
        pick(llm_pool, n_llm, "llm"),
    ))
}

/// Blends `n` documents with `round(n·α)` drawn from the LLM pool, then
/// shuffles deterministically. The label records the ground truth.
pub fn make_mixture(
    human_docs: &Corpus,
    llm_docs: &Corpus,
    alpha_true: f64,
    n: usize,
    seed: u64,
) -> Result<Corpus> {
    if !(0.0..=1.0).contains(&alpha_true) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha_true} outside [0, 1]"
        )));
    }
    let (hi, li) = mixture_indices(human_docs.len(), llm_docs.len(), alpha_true, n, seed)?;
    let mut docs: Vec<Document> = hi
        .iter()
        .map(|&i| human_docs.docs()[i].clone())
        .chain(li.iter().map(|&i| llm_docs.docs()[i].clone()))
        .collect();
    docs.shuffle(&mut seed::rng(seed::child(seed, "shuffle")));
    Corpus::new(
        docs,
        format!("mixture(alpha_true={alpha_true},n={n},n_llm={})", li.len()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub alpha_true: f64,
    pub alpha_hat: f64,
    pub ci_half_width: f64,
    pub abs_error: f64,
    pub replicate: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub spec: CalibrationSpec,
    pub unit: Unit,
    pub rows: Vec<CalibrationRow>,
    pub summary: CalibrationSummary,
}

impl CalibrationReport {
    pub const CSV_HEADER: [&'static str; 6] = [
        "alpha_true",
        "alpha_hat",
        "ci_half_width",
        "abs_error",
        "replicate",
        "seed",
    ];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.alpha_true.to_string(),
                r.alpha_hat.to_string(),
                r.ci_half_width.to_string(),
                r.abs_error.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn check_holdout(model: &TokenModel, corpus: &Corpus, cutoff: NaiveDate) -> Result<()> {
    let train = &model.provenance().train_ids;
    for doc in corpus.docs() {
        if train.binary_search(&doc.id).is_ok() {
            return Err(Error::TrainTestOverlap(doc.id.clone()));
        }
        if doc.date >= cutoff {
            return Err(Error::InvalidArgument(format!(
                "holdout document {:?} is dated {}, not before {cutoff}",
                doc.id, doc.date
            )));
        }
    }
    Ok(())
}

pub fn run_calibration(
    model: &TokenModel,
    human_holdout: &Corpus,
    llm_holdout: &Corpus,
    spec: &CalibrationSpec,
) -> Result<CalibrationReport> {
    spec.validate()?;
    check_holdout(model, human_holdout, spec.holdout_cutoff)?;
    check_holdout(model, llm_holdout, spec.holdout_cutoff)?;
    let human_ids: HashSet<&str> = human_holdout.ids().collect();
    if let Some(id) = llm_holdout.ids().find(|id| human_ids.contains(id)) {
        return Err(Error::DuplicateId(id.to_string()));
    }

    let human_docs: Vec<&Document> = human_holdout.docs().iter().collect();
    let llm_docs: Vec<&Document> = llm_holdout.docs().iter().collect();
    let human_scores = score_documents(model, &human_docs);
    let llm_scores = score_documents(model, &llm_docs);

    let jobs: Vec<(usize, f64, usize)> = spec
        .alpha_grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &a)| (0..spec.replicates).map(move |r| (gi, a, r)))
        .collect();

    let rows = jobs
        .par_iter()
        .map(|&(gi, alpha_true, replicate)| {
            let job_seed = seed::child(spec.seed, &format!("grid{gi}/rep{replicate}"));
            let (hi, li) = mixture_indices(
                human_scores.len(),
                llm_scores.len(),
                alpha_true,
                spec.n_per_mix,
                seed::child(job_seed, "mix"),
            )?;
            let picked: Vec<&DocScores> = hi
                .iter()
                .map(|&i| &human_scores[i])
                .chain(li.iter().map(|&i| &llm_scores[i]))
                .collect();
            let scores = UnitScores::from_doc_scores(model, picked);
            let est = scores.bootstrap(&spec.bootstrap(seed::child(job_seed, "boot")))?;
            Ok(CalibrationRow {
                alpha_true,
                alpha_hat: est.alpha,
                ci_half_width: est.ci_half_width().unwrap_or(0.0),
                abs_error: (est.alpha - alpha_true).abs(),
                replicate,
                seed: job_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let mean_abs_error = rows.iter().map(|r| r.abs_error).sum::<f64>() / rows.len() as f64;
    Ok(CalibrationReport {
        spec: spec.clone(),
        unit: model.unit(),
        rows,
        summary: CalibrationSummary {
            max_abs_error,
            mean_abs_error,
        },
    })
}

/// α̂ on a purely human holdout: the estimator's false-positive level.
pub fn false_positive_baseline(
    model: &TokenModel,
    human_holdout: &Corpus,
    cfg: &BootstrapConfig,
) -> Result<EstimateResult> {
    UnitScores::from_corpus(model, human_holdout).bootstrap(cfg)
}
