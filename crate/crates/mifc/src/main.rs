//! The `mifc` command line: every pipeline stage as a batch subcommand over
//! JSONL files, driven by one shared config with per-command flag overrides.
//!
//! Exit codes: 0 success, 1 data/validation errors, 2 transport errors,
//! 3 config/usage errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mifc::assembly::{self, AssemblySpec, DatasetManifest};
use mifc::config::PipelineConfig;
use mifc::error::{Error, Result};
use mifc::filtering::{filter_stream, MatchMode};
use mifc::llm::{ChatProvider, Client, ProviderConfig, RecordingSink, ReplayProvider};
use mifc::metrics::{bleu, ccts, embed_similarity, EmbeddingProvider, TokenizerMode};
use mifc::pipeline::{expand_answers, generate_qa, judge_samples, translate_with_gate};
use mifc::report::RunReport;
use mifc::types::{read_samples_from_path, serialize_sample, DataSample, LanguageTag};
use mifc::util::{read_to_string, write_atomic};

#[derive(Parser)]
#[command(name = "mifc", version, about = "Multilingual medical IFT corpus curation")]
struct Cli {
    /// Shared pipeline config file (JSON). Flags override config values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker pool size for LLM-backed stages.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Seed override for sampling decisions.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = LogFormat::Text)]
    log_format: LogFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogFormat {
    Text,
    Json,
}

#[derive(Args)]
struct ProviderArgs {
    /// Serve LLM responses from a recorded replay file instead of the network.
    #[arg(long, value_name = "FILE", conflicts_with = "record")]
    replay: Option<PathBuf>,

    /// Record every LLM exchange to a replay file while running live.
    #[arg(long, value_name = "FILE")]
    record: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Keep samples whose medical-keyword density clears the thresholds.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        kept: PathBuf,
        #[arg(long)]
        rejected: PathBuf,
        /// Keyword list file, one keyword per line (overrides the config list).
        #[arg(long)]
        keywords: Option<PathBuf>,
        #[arg(long)]
        thres1: Option<f64>,
        #[arg(long)]
        thres2: Option<u32>,
        #[arg(long, value_enum)]
        match_mode: Option<MatchModeArg>,
    },
    /// Score two text files with one metric and print the result as JSON.
    Score {
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Source / reference text file.
        #[arg(long)]
        a: PathBuf,
        /// Candidate / back-translated text file.
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<TokenizerModeArg>,
    },
    /// Expand keyword-style short answers into complete prose.
    Expand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        failures: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Generate judged MC + short-answer pairs from raw corpus text.
    Genqa {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rejected: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Translate samples with the cycle-consistency gate.
    Translate {
        #[arg(long)]
        input: PathBuf,
        /// Target language code (EN, ZH, JA, KO, FR, ES).
        #[arg(long)]
        target: LanguageTag,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rejected: Option<PathBuf>,
        /// CCTS acceptance threshold override.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Judge existing QA samples against their recorded context.
    Judge {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rejected: Option<PathBuf>,
        /// Annotation key holding the grading context.
        #[arg(long, default_value = "context")]
        context_key: String,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Remove exact and near duplicates.
    Dedup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check knowledge-dataset probes against the MC train/test splits.
    LeakCheck {
        #[arg(long)]
        ift: PathBuf,
        #[arg(long)]
        mc_train: PathBuf,
        #[arg(long)]
        mc_test: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        probes: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge curated streams into dataset shards and manifests.
    Assemble {
        /// Assembly spec JSON (datasets, inputs, optional mc_test).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the two-stage training configs.
    EmitTrainConfig {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-language tables for a dataset manifest.
    Report {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Bleu,
    Embed,
    Ccts,
}

#[derive(Clone, Copy, ValueEnum)]
enum TokenizerModeArg {
    Whitespace,
    Character,
}

impl From<TokenizerModeArg> for TokenizerMode {
    fn from(arg: TokenizerModeArg) -> Self {
        match arg {
            TokenizerModeArg::Whitespace => TokenizerMode::Whitespace,
            TokenizerModeArg::Character => TokenizerMode::Character,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MatchModeArg {
    WordBoundary,
    Substring,
}

impl From<MatchModeArg> for MatchMode {
    fn from(arg: MatchModeArg) -> Self {
        match arg {
            MatchModeArg::WordBoundary => MatchMode::WordBoundary,
            MatchModeArg::Substring => MatchMode::Substring,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(3);
        }
    };
    logging::init(cli.log_format);
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            log::error!("{err}");
            std::process::exit(err.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(jobs) = cli.jobs {
        cfg.concurrency_limit = jobs.max(1);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;

    match cli.command {
        Command::Filter { input, kept, rejected, keywords, thres1, thres2, match_mode } => {
            cmd_filter(&cfg, started, input, kept, rejected, keywords, thres1, thres2, match_mode)
        }
        Command::Score { metric, a, b, mode } => cmd_score(&cfg, metric, a, b, mode),
        Command::Expand { input, out, failures, provider } => {
            cmd_expand(&cfg, started, input, out, failures, provider)
        }
        Command::Genqa { input, out, rejected, provider } => {
            cmd_genqa(&cfg, started, input, out, rejected, provider)
        }
        Command::Translate { input, target, out, rejected, threshold, provider } => {
            cmd_translate(&cfg, started, input, target, out, rejected, threshold, provider)
        }
        Command::Judge { input, out, rejected, context_key, provider } => {
            cmd_judge(&cfg, started, input, out, rejected, context_key, provider)
        }
        Command::Dedup { input, out } => cmd_dedup(&cfg, started, input, out),
        Command::LeakCheck { ift, mc_train, mc_test, probes, out } => {
            cmd_leak_check(&cfg, started, ift, mc_train, mc_test, probes, out)
        }
        Command::Assemble { spec, out } => cmd_assemble(&cfg, started, spec, out),
        Command::EmitTrainConfig { out } => cmd_emit_train_config(&cfg, started, out),
        Command::Report { manifest } => cmd_report(manifest),
    }
}

/// Providers for one command invocation, honoring `--replay`/`--record`.
/// Recording shares a single sink so all models land in one replay file.
struct ProviderFactory {
    replay: Option<PathBuf>,
    sink: Option<RecordingSink>,
}

impl ProviderFactory {
    fn new(args: &ProviderArgs) -> Result<Self> {
        let sink = args.record.as_ref().map(RecordingSink::create).transpose()?;
        Ok(ProviderFactory { replay: args.replay.clone(), sink })
    }

    fn build(&self, provider_cfg: &ProviderConfig) -> Result<Arc<dyn ChatProvider>> {
        if let Some(replay) = &self.replay {
            return Ok(Arc::new(ReplayProvider::from_file(replay, &provider_cfg.model_name)?));
        }
        let client = Client::from_config(provider_cfg)?;
        match &self.sink {
            Some(sink) => Ok(Arc::new(sink.wrap(client))),
            None => Ok(Arc::new(client)),
        }
    }

    fn judges(&self, cfg: &PipelineConfig) -> Result<Vec<Arc<dyn ChatProvider>>> {
        cfg.judge.judges.iter().map(|judge_cfg| self.build(judge_cfg)).collect()
    }
}

fn write_jsonl(path: &Path, samples: &[DataSample]) -> Result<()> {
    let mut content = String::new();
    for sample in samples {
        content.push_str(&serialize_sample(sample));
        content.push('\n');
    }
    write_atomic(path, content.as_bytes())
}

fn write_json_lines<T: serde::Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut content = String::new();
    for record in records {
        content.push_str(&serde_json::to_string(record).expect("record serialization"));
        content.push('\n');
    }
    write_atomic(path, content.as_bytes())
}

fn default_sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_filter(
    cfg: &PipelineConfig,
    started: Instant,
    input: PathBuf,
    kept_path: PathBuf,
    rejected_path: PathBuf,
    keywords: Option<PathBuf>,
    thres1: Option<f64>,
    thres2: Option<u32>,
    match_mode: Option<MatchModeArg>,
) -> Result<()> {
    let mut filter_cfg = cfg.filter.clone();
    if let Some(path) = &keywords {
        let text = read_to_string(path)?;
        filter_cfg.keywords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
    }
    if let Some(t1) = thres1 {
        filter_cfg.thres1 = t1;
    }
    if let Some(t2) = thres2 {
        filter_cfg.thres2 = t2;
    }
    if let Some(mode) = match_mode {
        filter_cfg.match_mode = mode.into();
    }
    filter_cfg.validate()?;

    let samples = read_samples_from_path(&input)?;
    let total = samples.len();
    let (kept, rejected) = filter_stream(samples, &filter_cfg)?;
    log::info!("filter: kept {}/{} samples", kept.len(), total);
    write_jsonl(&kept_path, &kept)?;
    write_jsonl(&rejected_path, &rejected)?;

    let mut report = RunReport::new("filter", cfg.digest());
    report.add_input(&input)?;
    if let Some(path) = &keywords {
        report.add_input(path)?;
    }
    report.count("inputs", total as u64);
    report.count("kept", kept.len() as u64);
    report.count("rejected", rejected.len() as u64);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&kept_path)
}

fn cmd_score(
    cfg: &PipelineConfig,
    metric: MetricArg,
    a: PathBuf,
    b: PathBuf,
    mode: Option<TokenizerModeArg>,
) -> Result<()> {
    let source = read_to_string(&a)?;
    let candidate = read_to_string(&b)?;
    let source = source.trim();
    let candidate = candidate.trim();
    let mode: TokenizerMode = mode
        .map(Into::into)
        .or(cfg.ccts.tokenizer_mode)
        .unwrap_or(TokenizerMode::Whitespace);
    let result = match metric {
        MetricArg::Bleu => {
            let score = bleu(candidate, source, mode)?;
            serde_json::json!({ "metric": "bleu", "mean": score.mean, "per_n": score.per_n,
                                "brevity_penalty": score.brevity_penalty })
        }
        MetricArg::Embed => {
            let embedder = cfg.embedder()?;
            let f1 = embed_similarity(candidate, source, embedder.as_ref(), mode)?;
            serde_json::json!({ "metric": "embed", "f1": f1 })
        }
        MetricArg::Ccts => {
            let embedder = cfg.embedder()?;
            let mut ccts_cfg = cfg.ccts.clone();
            ccts_cfg.tokenizer_mode = Some(mode);
            let score = ccts(source, candidate, &ccts_cfg, embedder.as_ref())?;
            serde_json::json!({ "metric": "ccts", "value": score.value,
                                "bleu_mean": score.bleu_mean, "embed_score": score.embed_score,
                                "accepted": score.value > ccts_cfg.accept_threshold })
        }
    };
    println!("{}", serde_json::to_string_pretty(&result).expect("json"));
    Ok(())
}

fn cmd_expand(
    cfg: &PipelineConfig,
    started: Instant,
    input: PathBuf,
    out: PathBuf,
    failures: Option<PathBuf>,
    provider_args: ProviderArgs,
) -> Result<()> {
    let samples = read_samples_from_path(&input)?;
    let provider = ProviderFactory::new(&provider_args)?.build(&cfg.provider)?;
    let outcome = expand_answers(samples, cfg, provider.as_ref());
    log::info!("expand: {}/{} expanded", outcome.expanded.len(), outcome.report.inputs);
    write_jsonl(&out, &outcome.expanded)?;
    let failures_path = failures.unwrap_or_else(|| default_sibling(&out, "failures.jsonl"));
    write_jsonl(&failures_path, &outcome.failures)?;

    let mut report = RunReport::new("expand", cfg.digest());
    report.add_input(&input)?;
    report.with_stage(&outcome.report);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&out)
}

fn cmd_genqa(
    cfg: &PipelineConfig,
    started: Instant,
    input: PathBuf,
    out: PathBuf,
    rejected: Option<PathBuf>,
    provider_args: ProviderArgs,
) -> Result<()> {
    let samples = read_samples_from_path(&input)?;
    let factory = ProviderFactory::new(&provider_args)?;
    let generator = factory.build(&cfg.provider)?;
    let judges = factory.judges(cfg)?;
    let judge_refs: Vec<&dyn ChatProvider> = judges.iter().map(AsRef::as_ref).collect();
    let outcome = generate_qa(samples, cfg, generator.as_ref(), &judge_refs);
    log::info!(
        "genqa: {} pairs accepted, {} rejected",
        outcome.report.accepted,
        outcome.report.rejected
    );
    write_jsonl(&out, &outcome.accepted)?;
    let rejected_path = rejected.unwrap_or_else(|| default_sibling(&out, "rejected.jsonl"));
    write_jsonl(&rejected_path, &outcome.rejected)?;

    let mut report = RunReport::new("genqa", cfg.digest());
    report.add_input(&input)?;
    report.with_stage(&outcome.report);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_translate(
    cfg: &PipelineConfig,
    started: Instant,
    input: PathBuf,
    target: LanguageTag,
    out: PathBuf,
    rejected: Option<PathBuf>,
    threshold: Option<f64>,
    provider_args: ProviderArgs,
) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(threshold) = threshold {
        cfg.ccts.accept_threshold = threshold;
        cfg.ccts.validate()?;
    }
    let samples = read_samples_from_path(&input)?;
    let translator = ProviderFactory::new(&provider_args)?.build(&cfg.provider)?;
    let embedder: Box<dyn EmbeddingProvider> = cfg.embedder()?;
    let outcome =
        translate_with_gate(samples, target, &cfg, embedder.as_ref(), translator.as_ref());
    log::info!(
        "translate: {} accepted, {} rejected (threshold {})",
        outcome.accepted.len(),
        outcome.rejected.len(),
        cfg.ccts.accept_threshold
    );
    let translated: Vec<DataSample> = outcome
        .accepted
        .iter()
        .filter_map(|record| record.translated.clone())
        .collect();
    write_jsonl(&out, &translated)?;
    let rejected_path = rejected.unwrap_or_else(|| default_sibling(&out, "rejected.jsonl"));
    write_json_lines(&rejected_path, &outcome.rejected)?;

    let mut report = RunReport::new("translate", cfg.digest());
    report.add_input(&input)?;
    report.with_stage(&outcome.report);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&out)
}

fn cmd_judge(
    cfg: &PipelineConfig,
    started: Instant,
    input: PathBuf,
    out: PathBuf,
    rejected: Option<PathBuf>,
    context_key: String,
    provider_args: ProviderArgs,
) -> Result<()> {
    let samples = read_samples_from_path(&input)?;
    let judges = ProviderFactory::new(&provider_args)?.judges(cfg)?;
    let judge_refs: Vec<&dyn ChatProvider> = judges.iter().map(AsRef::as_ref).collect();
    let outcome = judge_samples(samples, cfg, &judge_refs, &context_key);
    log::info!("judge: {} accepted, {} rejected", outcome.accepted.len(), outcome.rejected.len());
    write_jsonl(&out, &outcome.accepted)?;
    let rejected_path = rejected.unwrap_or_else(|| default_sibling(&out, "rejected.jsonl"));
    write_jsonl(&rejected_path, &outcome.rejected)?;

    let mut report = RunReport::new("judge", cfg.digest());
    report.add_input(&input)?;
    report.with_stage(&outcome.report);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&out)
}

fn cmd_dedup(cfg: &PipelineConfig, started: Instant, input: PathBuf, out: PathBuf) -> Result<()> {
    let samples = read_samples_from_path(&input)?;
    let total = samples.len();
    let (unique, dedup_report) = assembly::dedup(samples);
    log::info!(
        "dedup: {} unique, {} exact + {} near removed",
        unique.len(),
        dedup_report.exact_dups_removed,
        dedup_report.near_dups_removed
    );
    write_jsonl(&out, &unique)?;

    let mut report = RunReport::new("dedup", cfg.digest());
    report.add_input(&input)?;
    report.count("inputs", total as u64);
    report.count("unique", unique.len() as u64);
    report.count("exact_dups_removed", dedup_report.exact_dups_removed);
    report.count("near_dups_removed", dedup_report.near_dups_removed);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&out)
}

fn cmd_leak_check(
    cfg: &PipelineConfig,
    started: Instant,
    ift: PathBuf,
    mc_train: PathBuf,
    mc_test: Option<PathBuf>,
    probes: u32,
    out: PathBuf,
) -> Result<()> {
    let ift_samples = read_samples_from_path(&ift)?;
    let train_samples = read_samples_from_path(&mc_train)?;
    let test_samples = match &mc_test {
        Some(path) => read_samples_from_path(path)?,
        None => Vec::new(),
    };
    let leakage =
        assembly::check_leakage(&ift_samples, &train_samples, &test_samples, probes, cfg.seed)?;
    log::info!(
        "leak-check: {} collisions ({})",
        leakage.collisions.len(),
        if leakage.pass { "pass" } else { "FAIL" }
    );
    let mut json = serde_json::to_string_pretty(&leakage).expect("report serialization");
    json.push('\n');
    write_atomic(&out, json.as_bytes())?;

    let mut report = RunReport::new("leak-check", cfg.digest());
    report.add_input(&ift)?;
    report.add_input(&mc_train)?;
    if let Some(path) = &mc_test {
        report.add_input(path)?;
    }
    report.count("collisions", leakage.collisions.len() as u64);
    report.count("pass", leakage.pass as u64);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_beside(&out)?;
    if leakage.pass {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "leakage detected: {} collisions (see {})",
            leakage.collisions.len(),
            out.display()
        )))
    }
}

fn cmd_assemble(cfg: &PipelineConfig, started: Instant, spec: PathBuf, out: PathBuf) -> Result<()> {
    let assembly_spec = AssemblySpec::load(&spec)?;
    let manifests = assembly::assemble(&assembly_spec, cfg, &out)?;
    for manifest in &manifests {
        let total: u64 = manifest.per_language_counts.values().sum();
        log::info!("assemble: {} -> {} samples in {} shards", manifest.name, total, manifest.files.len());
    }

    let mut report = RunReport::new("assemble", cfg.digest());
    report.add_input(&spec)?;
    for dataset in &assembly_spec.datasets {
        for input in &dataset.inputs {
            report.add_input(&input.path)?;
        }
    }
    for manifest in &manifests {
        let total: u64 = manifest.per_language_counts.values().sum();
        report.count(&format!("{}.samples", manifest.name), total);
        report.count(&format!("{}.shards", manifest.name), manifest.files.len() as u64);
    }
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_to(out.join("assemble.report.json"))
}

fn cmd_emit_train_config(cfg: &PipelineConfig, started: Instant, out: PathBuf) -> Result<()> {
    let configs = assembly::emit_training_configs(&out)?;
    log::info!("emit-train-config: wrote stage1.json and stage2.json to {}", out.display());
    let mut report = RunReport::new("emit-train-config", cfg.digest());
    report.count("stages", configs.len() as u64);
    report.duration_ms = started.elapsed().as_millis() as u64;
    report.write_to(out.join("emit-train-config.report.json"))
}

fn cmd_report(manifest_path: PathBuf) -> Result<()> {
    let text = read_to_string(&manifest_path)?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(format!("bad manifest: {e}")))?;
    println!("dataset: {}", manifest.name);
    println!("created: {}  config: {}", manifest.created_at, &manifest.config_digest[..12]);
    println!();
    println!("{:<10} {:>10}", "language", "samples");
    let mut total = 0u64;
    for (lang, count) in &manifest.per_language_counts {
        println!("{:<10} {:>10}", lang.code(), count);
        total += count;
    }
    println!("{:<10} {:>10}", "total", total);
    println!();
    println!(
        "shards: {}   dedup: {} exact + {} near removed",
        manifest.files.len(),
        manifest.dedup_report.exact_dups_removed,
        manifest.dedup_report.near_dups_removed
    );
    for file in &manifest.files {
        println!("  {:<24} {:>8}  sha256:{}", file.path, file.samples, &file.sha256[..12]);
    }
    match &manifest.leakage_report {
        Some(leakage) => {
            let status = if leakage.pass { "pass" } else { "FAIL" };
            println!(
                "leakage: {status} ({} collisions, {} probes/language)",
                leakage.collisions.len(),
                leakage.probes_per_language
            );
            for collision in &leakage.collisions {
                println!(
                    "  probe {} ~ {} in {} ({:?})",
                    collision.probe_id, collision.target_id, collision.target_set, collision.kind
                );
            }
        }
        None => println!("leakage: not checked"),
    }
    Ok(())
}

mod logging {
    use super::LogFormat;
    use log::{Level, Log, Metadata, Record};

    struct Logger {
        format: LogFormat,
    }

    impl Log for Logger {
        fn enabled(&self, metadata: &Metadata) -> bool {
            metadata.level() <= Level::Info
        }

        fn log(&self, record: &Record) {
            if !self.enabled(record.metadata()) {
                return;
            }
            let ts = chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ");
            match self.format {
                LogFormat::Text => eprintln!("{ts} {:<5} {}", record.level(), record.args()),
                LogFormat::Json => {
                    let line = serde_json::json!({
                        "ts": ts.to_string(),
                        "level": record.level().to_string(),
                        "msg": record.args().to_string(),
                    });
                    eprintln!("{line}");
                }
            }
        }

        fn flush(&self) {}
    }

    pub fn init(format: LogFormat) {
        let _ = log::set_boxed_logger(Box::new(Logger { format }));
        log::set_max_level(log::LevelFilter::Info);
    }
}
