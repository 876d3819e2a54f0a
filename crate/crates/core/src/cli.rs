//! Command-line front end.
//!
//! Every subcommand reads an optional JSON config file (`--config`) shaped
//! like [`RunConfig`]; flags given on the command line override it. JSON
//! outputs carry the effective config under `config`. Output paths and the
//! thread count are not part of the config, so moving outputs or changing
//! `--threads` never changes file contents.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    stratified_trend, trend, BucketSpec, Granularity, Report, StratumRule, TrendReport,
};
use crate::calibration::{false_positive_baseline, parse_grid, run_calibration, CalibrationSpec};
use crate::corpus::{filter_corpus, load_corpus, Corpus, LookupTable, Predicate};
use crate::error::{Error, Result};
use crate::estimator::{bootstrap_ci, compare_groups, BootstrapConfig};
use crate::generation::{
    generate_parallel_corpus, GenClient, GenClientConfig, GenMode, PromptPair,
};
use crate::model::{fit, load_model, save_model, FitConfig, TokenModel, Unit};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSettings {
    #[serde(rename = "B")]
    pub replicates: usize,
    pub level: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        let d = BootstrapConfig::default();
        BootstrapSettings {
            replicates: d.replicates,
            level: d.level,
        }
    }
}

/// Everything that determines a run's results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub model_path: Option<PathBuf>,
    pub human: Option<PathBuf>,
    pub llm: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub human_holdout: Option<PathBuf>,
    pub llm_holdout: Option<PathBuf>,
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub prompts: Option<[PathBuf; 2]>,
    pub lookups: BTreeMap<String, PathBuf>,
    /// Predicates ANDed together and applied to every input corpus.
    #[serde(rename = "where")]
    pub filters: Vec<String>,
    pub groupby: Option<String>,
    pub bootstrap: BootstrapSettings,
    pub fit: FitConfig,
    pub bucket: BucketSpec,
    pub calibration: CalibrationSpec,
    pub generation: GenClientConfig,
}

#[derive(Parser, Debug)]
#[command(
    name = "llmfrac",
    version,
    about = "Estimate the fraction of LLM-generated documents in a corpus"
)]
struct Cli {
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap (results do not depend on it)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Report errors on stderr as one JSON object
    #[arg(long, global = true)]
    json_errors: bool,
    /// Print the primary JSON result on stdout
    #[arg(long, global = true)]
    stdout: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct FilterArgs {
    /// Document predicate such as `meta.state=CA` or `date<2022-11-30`; repeatable
    #[arg(long = "where", value_name = "PRED")]
    filters: Vec<String>,
}

#[derive(Args, Debug, Default)]
struct BootArgs {
    /// Bootstrap replicates
    #[arg(long)]
    boot: Option<usize>,
    /// Confidence level of the percentile interval
    #[arg(long)]
    level: Option<f64>,
    /// Random seed (required for stochastic commands)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit P and Q from a human and an LLM corpus
    Fit {
        #[arg(long)]
        human: Option<PathBuf>,
        #[arg(long)]
        llm: Option<PathBuf>,
        /// Where to write the model JSON
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        unit: Option<Unit>,
        #[arg(long)]
        min_df: Option<u64>,
        #[arg(long)]
        max_vocab: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        min_docs: Option<usize>,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Estimate α with a bootstrap interval
    Estimate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Measure error on mixtures of known α
    Calibrate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        human_holdout: Option<PathBuf>,
        #[arg(long)]
        llm_holdout: Option<PathBuf>,
        /// start:stop:step, inclusive
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        n_per_mix: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Holdout documents must predate this day
        #[arg(long)]
        cutoff: Option<NaiveDate>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-mixture rows as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        boot: BootArgs,
    },
    /// Build the LLM parallel corpus with the two-stage prompts
    Generate {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Where to write the generated JSONL corpus
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mode: Option<GenMode>,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        model_id: Option<String>,
        /// Name of the environment variable holding the API key
        #[arg(long)]
        api_key_env: Option<String>,
        #[arg(long)]
        max_concurrent: Option<usize>,
        #[arg(long)]
        rpm: Option<u32>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Custom prompt pair: skeleton file, expand file
        #[arg(long, num_args = 2, value_names = ["SKELETON", "EXPAND"])]
        prompts: Option<Vec<PathBuf>>,
        /// Per-document failures as JSON
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// α per month or quarter, optionally per stratum
    Trend {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        by: Option<Granularity>,
        #[arg(long)]
        groupby: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        min_units: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Skipped-bucket notes as JSON
        #[arg(long)]
        skipped: Option<PathBuf>,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Compare α between two corpora
    Compare {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Add derived stratum keys to document meta
    Strata {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// JSON array of stratum rules
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Lookup table as NAME=PATH.csv; repeatable
        #[arg(long = "lookup", value_name = "NAME=PATH")]
        lookups: Vec<String>,
        /// Where to write the annotated JSONL corpus
        #[arg(long)]
        out: Option<PathBuf>,
        /// Documents with missing inputs, as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| usage(format!("--{flag} is required")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    fn apply_boot(&mut self, args: BootArgs) {
        set(&mut self.bootstrap.replicates, args.boot);
        set(&mut self.bootstrap.level, args.level);
        set_opt(&mut self.seed, args.seed);
    }

    fn apply_filters(&mut self, args: FilterArgs) {
        if !args.filters.is_empty() {
            self.filters = args.filters;
        }
    }

    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| usage("--seed is required for this command"))
    }

    fn bootstrap_config(&self, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            replicates: self.bootstrap.replicates,
            level: self.bootstrap.level,
            ..BootstrapConfig::new(0, seed)
        }
    }

    fn predicate(&self) -> Result<Predicate> {
        self.filters
            .iter()
            .try_fold(Predicate::True, |acc, s| Ok(acc.and(s.parse()?)))
    }

    /// Loads a corpus and applies the `where` filters.
    fn corpus(&self, path: &Path) -> Result<Corpus> {
        let report = load_corpus(path)?;
        for e in &report.errors {
            eprintln!("{}: skipped line {}: {}", path.display(), e.line, e.reason);
        }
        if self.filters.is_empty() {
            return Ok(report.corpus);
        }
        let filtered = filter_corpus(&report.corpus, &self.predicate()?)?;
        if filtered.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(filtered)
    }

    fn model(&self) -> Result<TokenModel> {
        load_model(required(&self.model_path, "model")?)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    result: T,
    config: &'a RunConfig,
}

struct Outputs {
    stdout: bool,
}

impl Outputs {
    fn json<T: Serialize>(
        &self,
        command: &str,
        result: T,
        cfg: &RunConfig,
        out: Option<&Path>,
    ) -> Result<()> {
        let text = serde_json::to_string_pretty(&Envelope {
            command,
            result,
            config: cfg,
        })? + "\n";
        self.emit(&text, out)
    }

    fn emit(&self, text: &str, out: Option<&Path>) -> Result<()> {
        if let Some(path) = out {
            std::fs::write(path, text)?;
        }
        if self.stdout {
            std::io::stdout().write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

fn parse_lookup(spec: &str) -> Result<(String, PathBuf)> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(usage(format!("--lookup expects NAME=PATH, got {spec:?}"))),
    }
}

fn execute(
    command: Command,
    mut cfg: RunConfig,
    out: &Outputs,
    threads: Option<u16>,
) -> Result<()> {
    match command {
        Command::Fit {
            human,
            llm,
            out: out_path,
            unit,
            min_df,
            max_vocab,
            beta,
            epsilon,
            min_docs,
            filter,
        } => {
            set_opt(&mut cfg.human, human);
            set_opt(&mut cfg.llm, llm);
            set(&mut cfg.fit.unit, unit);
            set(&mut cfg.fit.min_df, min_df);
            set(&mut cfg.fit.max_vocab, max_vocab);
            set(&mut cfg.fit.smoothing_beta, beta);
            set(&mut cfg.fit.clamp_epsilon, epsilon);
            set(&mut cfg.fit.min_docs, min_docs);
            cfg.apply_filters(filter);
            let out_path = required(&out_path, "out")?;
            let human = cfg.corpus(required(&cfg.human, "human")?)?;
            let llm = cfg.corpus(required(&cfg.llm, "llm")?)?;
            let model = fit(&human, &llm, &cfg.fit)?;
            save_model(&model, out_path)?;
            eprintln!(
                "fit: {} tokens from {} human and {} llm documents",
                model.vocab().len(),
                human.len(),
                llm.len()
            );
            if out.stdout {
                std::io::stdout().write_all(model.to_json_string()?.as_bytes())?;
            }
        }
        Command::Estimate {
            model,
            corpus,
            out: out_path,
            boot,
            filter,
        } => {
            set_opt(&mut cfg.model_path, model);
            set_opt(&mut cfg.corpus, corpus);
            cfg.apply_boot(boot);
            cfg.apply_filters(filter);
            let seed = cfg.seed()?;
            let model = cfg.model()?;
            let corpus = cfg.corpus(required(&cfg.corpus, "corpus")?)?;
            let r = bootstrap_ci(&model, &corpus, &cfg.bootstrap_config(seed))?;
            eprintln!(
                "alpha = {:.4} [{:.4}, {:.4}] over {} units",
                r.alpha,
                r.ci_low.unwrap_or(f64::NAN),
                r.ci_high.unwrap_or(f64::NAN),
                r.n_units
            );
            out.json("estimate", &r, &cfg, out_path.as_deref())?;
        }
        Command::Calibrate {
            model,
            human_holdout,
            llm_holdout,
            grid,
            n_per_mix,
            replicates,
            cutoff,
            out: out_path,
            csv,
            boot,
        } => {
            set_opt(&mut cfg.model_path, model);
            set_opt(&mut cfg.human_holdout, human_holdout);
            set_opt(&mut cfg.llm_holdout, llm_holdout);
            if let Some(g) = grid {
                cfg.calibration.alpha_grid = parse_grid(&g)?;
            }
            set(&mut cfg.calibration.n_per_mix, n_per_mix);
            set(&mut cfg.calibration.replicates, replicates);
            set(&mut cfg.calibration.holdout_cutoff, cutoff);
            cfg.apply_boot(boot);
            let seed = cfg.seed()?;
            cfg.calibration.seed = seed;
            cfg.calibration.bootstrap_replicates = cfg.bootstrap.replicates;
            cfg.calibration.level = cfg.bootstrap.level;
            let model = cfg.model()?;
            let human = cfg.corpus(required(&cfg.human_holdout, "human-holdout")?)?;
            let llm = cfg.corpus(required(&cfg.llm_holdout, "llm-holdout")?)?;
            let report = run_calibration(&model, &human, &llm, &cfg.calibration)?;
            let baseline = false_positive_baseline(
                &model,
                &human,
                &cfg.bootstrap_config(seed::child(seed, "baseline")),
            )?;
            eprintln!(
                "calibration: mean |error| {:.4}, max |error| {:.4}; false-positive baseline {:.4}",
                report.summary.mean_abs_error, report.summary.max_abs_error, baseline.alpha
            );
            if let Some(path) = csv {
                report.save_csv(path)?;
            }
            #[derive(Serialize)]
            struct Calibration<'a> {
                calibration: &'a crate::calibration::CalibrationReport,
                false_positive_baseline: &'a crate::estimator::EstimateResult,
            }
            let result = Calibration {
                calibration: &report,
                false_positive_baseline: &baseline,
            };
            out.json("calibrate", result, &cfg, out_path.as_deref())?;
        }
        Command::Generate {
            input,
            out: out_path,
            mode,
            endpoint,
            model_id,
            api_key_env,
            max_concurrent,
            rpm,
            cache_dir,
            prompts,
            report,
            filter,
        } => {
            set_opt(&mut cfg.input, input);
            let g = &mut cfg.generation;
            set(&mut g.mode, mode);
            set(&mut g.endpoint_url, endpoint);
            set(&mut g.model_id, model_id);
            set(&mut g.api_key_env_var, api_key_env);
            set(&mut g.max_concurrent, max_concurrent);
            set(&mut g.requests_per_minute, rpm);
            set_opt(&mut g.cache_dir, cache_dir);
            if let Some(p) = prompts {
                let [s, e]: [PathBuf; 2] = p
                    .try_into()
                    .map_err(|_| usage("--prompts takes two files"))?;
                cfg.prompts = Some([s, e]);
            }
            cfg.apply_filters(filter);
            let out_path = required(&out_path, "out")?;
            let corpus = cfg.corpus(required(&cfg.input, "in")?)?;
            let prompts = match &cfg.prompts {
                Some([s, e]) => PromptPair::from_files(s, e)?,
                None => PromptPair::default(),
            };
            let mut client_cfg = cfg.generation.clone();
            if let Some(t) = threads {
                client_cfg.max_concurrent = client_cfg.max_concurrent.min(usize::from(t));
            }
            let client = GenClient::new(client_cfg, prompts)?;
            let generated = generate_parallel_corpus(&corpus, &client)?;
            generated.corpus.save_jsonl(out_path)?;
            eprintln!(
                "generate: {} of {} documents, {} failures, {} network calls, {} cache hits",
                generated.corpus.len(),
                corpus.len(),
                generated.failures.len(),
                client.network_calls(),
                client.cache_hits()
            );
            for f in &generated.failures {
                eprintln!("  {}: {} ({})", f.id, f.message, f.kind);
            }
            if let Some(path) = report {
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&generated.failures)? + "\n",
                )?;
            }
            if out.stdout {
                generated.corpus.write_jsonl(std::io::stdout().lock())?;
            }
        }
        Command::Trend {
            model,
            corpus,
            by,
            groupby,
            n_max,
            min_units,
            out: out_path,
            csv,
            skipped,
            boot,
            filter,
        } => {
            set_opt(&mut cfg.model_path, model);
            set_opt(&mut cfg.corpus, corpus);
            set(&mut cfg.bucket.granularity, by);
            set_opt(&mut cfg.groupby, groupby);
            set(&mut cfg.bucket.n_max_per_bucket, n_max);
            set(&mut cfg.bucket.min_units_per_bucket, min_units);
            cfg.apply_boot(boot);
            cfg.apply_filters(filter);
            let seed = cfg.seed()?;
            let model = cfg.model()?;
            let corpus = cfg.corpus(required(&cfg.corpus, "corpus")?)?;
            let boot = cfg.bootstrap_config(seed);
            let series = match &cfg.groupby {
                Some(key) => stratified_trend(&model, &corpus, key, &cfg.bucket, &boot)?
                    .into_values()
                    .collect(),
                None => vec![trend(&model, &corpus, &cfg.bucket, &boot)?],
            };
            let report = TrendReport { series };
            for s in &report.series {
                eprintln!(
                    "trend {}: {} buckets, {} skipped",
                    s.stratum_label(),
                    s.points.len(),
                    s.skipped.len()
                );
            }
            if let Some(path) = csv {
                let mut buf = Vec::new();
                report.write_csv(&mut buf)?;
                std::fs::write(path, buf)?;
            }
            if let Some(path) = skipped {
                std::fs::write(path, report.skipped_json()?)?;
            }
            out.json("trend", &report, &cfg, out_path.as_deref())?;
        }
        Command::Compare {
            model,
            a,
            b,
            out: out_path,
            boot,
            filter,
        } => {
            set_opt(&mut cfg.model_path, model);
            set_opt(&mut cfg.a, a);
            set_opt(&mut cfg.b, b);
            cfg.apply_boot(boot);
            cfg.apply_filters(filter);
            let seed = cfg.seed()?;
            let model = cfg.model()?;
            let ca = cfg.corpus(required(&cfg.a, "a")?)?;
            let cb = cfg.corpus(required(&cfg.b, "b")?)?;
            let r = compare_groups(&model, &ca, &cb, &cfg.bootstrap_config(seed))?;
            eprintln!(
                "compare: alpha_a {:.4}, alpha_b {:.4}, diff {:.4}, p = {}",
                r.a.alpha, r.b.alpha, r.diff, r.p_value
            );
            out.json("compare", &r, &cfg, out_path.as_deref())?;
        }
        Command::Strata {
            input,
            rules,
            lookups,
            out: out_path,
            report,
        } => {
            set_opt(&mut cfg.input, input);
            set_opt(&mut cfg.rules, rules);
            for spec in &lookups {
                let (name, path) = parse_lookup(spec)?;
                cfg.lookups.insert(name, path);
            }
            let out_path = required(&out_path, "out")?;
            let rules_path = required(&cfg.rules, "rules")?;
            let rules: Vec<StratumRule> = serde_json::from_str(
                &std::fs::read_to_string(rules_path)
                    .map_err(|_| Error::FileNotFound(rules_path.clone()))?,
            )
            .map_err(|e| usage(format!("rules {}: {e}", rules_path.display())))?;
            let tables = cfg
                .lookups
                .iter()
                .map(|(name, path)| Ok((name.clone(), LookupTable::load(path)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let corpus = cfg.corpus(required(&cfg.input, "in")?)?;
            let derived = crate::analysis::derive_strata(&corpus, &rules, &tables)?;
            derived.corpus.save_jsonl(out_path)?;
            eprintln!(
                "strata: {} documents, {} missing inputs",
                derived.corpus.len(),
                derived.missing.len()
            );
            if let Some(path) = report {
                let missing: Vec<_> = derived
                    .missing
                    .iter()
                    .filter_map(|e| match e {
                        Error::MissingField { id, field } => {
                            Some(serde_json::json!({"id": id, "field": field}))
                        }
                        _ => None,
                    })
                    .collect();
                std::fs::write(path, serde_json::to_string_pretty(&missing)? + "\n")?;
            }
        }
    }
    Ok(())
}

/// Exit code for a failed run: 2 for usage problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::UnknownField(_) => 2,
        _ => 1,
    }
}

fn report_error(e: &Error, json: bool) {
    if json {
        let obj = serde_json::json!({"error": e.kind(), "message": e.to_string()});
        eprintln!("{obj}");
    } else {
        eprintln!("error: {e}");
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let json_errors = cli.json_errors;
    let result = (|| {
        let cfg = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let outputs = Outputs { stdout: cli.stdout };
        match cli.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(usize::from(n))
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .install(|| execute(cli.command, cfg, &outputs, cli.threads)),
            None => execute(cli.command, cfg, &outputs, None),
        }
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e, json_errors);
            exit_code(&e)
        }
    }
}
