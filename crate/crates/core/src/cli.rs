//! The `murmur2vec` command line: `synth`, `embed`, `tune`, `evaluate`,
//! `bench`, plus a hidden `hash` for debugging.
//!
//! Exit codes: 0 success, 2 argument error, 3 I/O error, 4 data error.
//! Every subcommand except `hash` writes a `<command>.manifest.json` into
//! the output directory.

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{run_bench, BenchConfig};
use crate::embed::export::{write_dense, write_sparse, MatrixFormat, Normalization, Sidecar};
use crate::embed::{embed_corpus, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::eval::{run_experiment, ExperimentConfig, KnnParams, Metric, SplitSpec, TableSizing};
use crate::ingest::{generate_synthetic, load_fasta, write_fasta, write_labels, Corpus, SynthSpec};
use crate::kmer::corpus_vocabulary;
use crate::manifest::RunManifest;
use crate::murmur3::{murmur32, HashSeed};
use crate::tune::{collision_curve, CollisionMeter, SearchPolicy, COLLISION_GRID};

pub const OUT_DIR_ENV: &str = "MURMUR2VEC_OUT_DIR";

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (matrix format 1)");

#[derive(Debug, Parser)]
#[command(name = "murmur2vec", version = VERSION, about = "Murmur-hashed k-mer embeddings for biological sequences")]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes output bytes.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for all written files.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,

    /// JSON file with default parameter values; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the 32-bit Murmur digest of a string.
    #[command(hide = true)]
    Hash {
        input: String,
        #[arg(long, value_parser = parse_seed, default_value = "0")]
        seed: u32,
    },
    /// Generate a synthetic labeled corpus from a JSON spec.
    Synth(SynthArgs),
    /// Embed a FASTA corpus.
    Embed(EmbedArgs),
    /// Find table sizes for a grid of collision budgets.
    Tune(TuneArgs),
    /// Repeated stratified holdout with a kNN classifier.
    Evaluate(EvaluateArgs),
    /// Time Murmur2Vec against the spectrum with bin search.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Input FASTA file.
    #[arg(long)]
    fasta: PathBuf,
    /// Headerless `id,label` CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Drop sequences shorter than k with a warning instead of failing.
    #[arg(long)]
    skip_short: bool,
    /// k-mer length [default: 3].
    #[arg(long)]
    k: Option<usize>,
    /// Hash seed, decimal or 0x-prefixed hex [default: 0].
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u32>,
}

#[derive(Debug, Args)]
struct SizingArgs {
    /// Fixed hash table size m.
    #[arg(long, conflicts_with = "collision_target")]
    table_size: Option<u64>,
    /// Allowed collision fraction in [0, 1); the table size is tuned to it.
    #[arg(long)]
    collision_target: Option<f64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Stem of the output file names.
    #[arg(long, default_value = "synthetic")]
    name: String,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    sizing: SizingArgs,
    /// Dense CSV or sparse row,col,value triplets [default: dense].
    #[arg(long)]
    format: Option<MatrixFormat>,
    /// Row normalization applied on export [default: none].
    #[arg(long)]
    normalize: Option<Normalization>,
    /// Stem of the output file names.
    #[arg(long, default_value = "embedding")]
    name: String,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Comma-separated collision budgets in percent.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    sizing: SizingArgs,
    /// Number of train/test splits [default: 5].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    runs: Option<u64>,
    /// Training share of each split [default: 0.7].
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Seed for the splits [default: 0].
    #[arg(long)]
    split_seed: Option<u64>,
    /// Comma-separated neighbor counts to choose from on validation.
    #[arg(long, value_delimiter = ',')]
    neighbors: Option<Vec<usize>>,
    /// Distance for kNN [default: euclidean].
    #[arg(long)]
    metric: Option<Metric>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Extra Murmur2Vec table sizes to time (comma-separated).
    #[arg(long, value_delimiter = ',')]
    table_size: Option<Vec<u64>>,
    /// Timed repetitions per method, at least 3 [default: 5].
    #[arg(long)]
    repeats: Option<usize>,
}

/// Optional defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    k: Option<usize>,
    seed: Option<u32>,
    table_size: Option<u64>,
    collision_target: Option<f64>,
    format: Option<MatrixFormat>,
    normalize: Option<Normalization>,
    grid: Option<Vec<f64>>,
    runs: Option<u64>,
    train_fraction: Option<f64>,
    split_seed: Option<u64>,
    neighbors: Option<Vec<usize>>,
    metric: Option<Metric>,
    repeats: Option<usize>,
    skip_short: Option<bool>,
}

fn parse_seed(s: &str) -> std::result::Result<u32, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

impl clap::ValueEnum for MatrixFormat {
    fn value_variants<'a>() -> &'a [Self] {
        &[MatrixFormat::Dense, MatrixFormat::Sparse]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            MatrixFormat::Dense => "dense",
            MatrixFormat::Sparse => "sparse",
        }))
    }
}

impl clap::ValueEnum for Normalization {
    fn value_variants<'a>() -> &'a [Self] {
        &[Normalization::None, Normalization::L1, Normalization::L2]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Normalization::None => "none",
            Normalization::L1 => "l1",
            Normalization::L2 => "l2",
        }))
    }
}

impl clap::ValueEnum for Metric {
    fn value_variants<'a>() -> &'a [Self] {
        &[Metric::Euclidean, Metric::Manhattan]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }))
    }
}

const DEFAULT_K: usize = 3;

struct Context {
    out_dir: PathBuf,
    file: ConfigFile,
    argv: Vec<String>,
    threads: usize,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn manifest(&self, config: &impl Serialize) -> Result<RunManifest> {
        Ok(RunManifest::new(self.argv.clone(), serde_json::to_value(config)?, self.threads))
    }
}

#[derive(Debug, Serialize)]
struct CorpusSettings {
    fasta: PathBuf,
    labels: Option<PathBuf>,
    skip_short: bool,
    k: usize,
    seed: HashSeed,
}

fn resolve_corpus(args: &CorpusArgs, file: &ConfigFile) -> CorpusSettings {
    CorpusSettings {
        fasta: args.fasta.clone(),
        labels: args.labels.clone(),
        skip_short: args.skip_short || file.skip_short.unwrap_or(false),
        k: args.k.or(file.k).unwrap_or(DEFAULT_K),
        seed: HashSeed(args.seed.or(file.seed).unwrap_or(0)),
    }
}

fn resolve_sizing(args: &SizingArgs, file: &ConfigFile) -> Result<TableSizing> {
    let pick = |m: Option<u64>, t: Option<f64>| match (m, t) {
        (Some(m), None) => Some(TableSizing::Fixed(m)),
        (None, Some(t)) => Some(TableSizing::CollisionTarget(t)),
        _ => None,
    };
    if args.table_size.is_some() || args.collision_target.is_some() {
        return Ok(pick(args.table_size, args.collision_target).expect("clap rejects both"));
    }
    match (file.table_size, file.collision_target) {
        (Some(_), Some(_)) => Err(Error::invalid(
            "config file sets both table_size and collision_target",
        )),
        (m, t) => pick(m, t).ok_or_else(|| Error::invalid("one of --table-size or --collision-target is required")),
    }
}

/// Loads the corpus, applying the skip-short policy. Returns the corpus and
/// the skipped ids.
fn load_corpus(settings: &CorpusSettings, manifest: &mut RunManifest) -> Result<(Corpus, Vec<String>)> {
    let corpus = load_fasta(&settings.fasta, settings.labels.as_deref())?;
    manifest.add_input(&settings.fasta)?;
    if let Some(l) = &settings.labels {
        manifest.add_input(l)?;
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !settings.skip_short {
        return Ok((corpus, Vec::new()));
    }
    let (kept, skipped) = corpus.without_shorter_than(settings.k);
    if !skipped.is_empty() {
        eprintln!(
            "warning: skipped {} sequence(s) shorter than k = {}",
            skipped.len(),
            settings.k
        );
    }
    if kept.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((kept, skipped))
}

fn cmd_hash(input: &str, seed: u32) -> Result<()> {
    println!("{:08x}", murmur32(input.as_bytes(), HashSeed(seed)));
    Ok(())
}

fn cmd_synth(ctx: &Context, args: &SynthArgs) -> Result<()> {
    let file = File::open(&args.spec).map_err(|e| Error::io(&args.spec, e))?;
    let mut spec: SynthSpec = serde_json::from_reader(std::io::BufReader::new(file))?;
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }
    let mut manifest = ctx.manifest(&spec)?;
    manifest.add_input(&args.spec)?;

    let corpus = generate_synthetic(&spec)?;
    let fasta = ctx.out(&format!("{}.fa", args.name));
    let labels = ctx.out(&format!("{}.labels.csv", args.name));
    let echo = ctx.out(&format!("{}.spec.json", args.name));
    write_fasta(&fasta, corpus.records(), 60)?;
    write_labels(&labels, corpus.records())?;
    std::fs::write(&echo, serde_json::to_string_pretty(&spec)? + "\n").map_err(|e| Error::io(&echo, e))?;
    for p in [&fasta, &labels, &echo] {
        manifest.output(p.clone());
    }
    manifest.write(&ctx.out("synth.manifest.json"))?;
    println!("wrote {} sequences to {}", corpus.len(), fasta.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct EmbedSettings {
    corpus: CorpusSettings,
    sizing: TableSizing,
    format: MatrixFormat,
    normalize: Normalization,
    m: Option<u64>,
}

fn cmd_embed(ctx: &Context, args: &EmbedArgs) -> Result<()> {
    let mut settings = EmbedSettings {
        corpus: resolve_corpus(&args.corpus, &ctx.file),
        sizing: resolve_sizing(&args.sizing, &ctx.file)?,
        format: args.format.or(ctx.file.format).unwrap_or_default(),
        normalize: args.normalize.or(ctx.file.normalize).unwrap_or_default(),
        m: None,
    };
    let mut manifest = ctx.manifest(&settings)?;
    let (corpus, skipped) = load_corpus(&settings.corpus, &mut manifest)?;

    let vocabulary = corpus_vocabulary(&corpus, settings.corpus.k)?;
    let mut meter = CollisionMeter::new(&vocabulary, settings.corpus.seed)?;
    let m = match settings.sizing {
        TableSizing::Fixed(m) => m,
        TableSizing::CollisionTarget(t) => {
            let start = Instant::now();
            let r = meter.tune(t, SearchPolicy::default())?;
            manifest.timing("tune_s", start.elapsed().as_secs_f64());
            r.chosen_m
        }
    };
    let config = EmbeddingConfig::new(settings.corpus.k, m, settings.corpus.seed)?;
    let collision = meter.measure(m)?;
    settings.m = Some(m);
    manifest.config = serde_json::to_value(&settings)?;

    let start = Instant::now();
    let matrix = embed_corpus(&corpus, &config)?;
    let generation_s = start.elapsed().as_secs_f64();
    manifest.timing("embedding_generation_s", generation_s);

    let matrix_path = match settings.format {
        MatrixFormat::Dense => ctx.out(&format!("{}.csv", args.name)),
        MatrixFormat::Sparse => ctx.out(&format!("{}.triplets.csv", args.name)),
    };
    match settings.format {
        MatrixFormat::Dense => write_dense(&matrix_path, &matrix, settings.normalize)?,
        MatrixFormat::Sparse => write_sparse(&matrix_path, &matrix, settings.normalize)?,
    }
    let sidecar_path = ctx.out(&format!("{}.json", args.name));
    Sidecar::new(
        &matrix,
        settings.format,
        settings.normalize,
        skipped,
        collision.collision_fraction,
    )
    .write(&sidecar_path)?;
    manifest.output(matrix_path);
    manifest.output(sidecar_path);
    manifest.write(&ctx.out("embed.manifest.json"))?;

    println!(
        "embedded {} sequences: k = {}, m = {}, collision fraction = {}, embedding generation = {:.6}s",
        matrix.n_rows(),
        config.k,
        m,
        collision.collision_fraction,
        generation_s
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct TuneSettings {
    corpus: CorpusSettings,
    grid_percent: Vec<f64>,
}

fn cmd_tune(ctx: &Context, args: &TuneArgs) -> Result<()> {
    let settings = TuneSettings {
        corpus: resolve_corpus(&args.corpus, &ctx.file),
        grid_percent: args
            .grid
            .clone()
            .or_else(|| ctx.file.grid.clone())
            .unwrap_or_else(|| COLLISION_GRID.iter().map(|f| f * 100.0).collect()),
    };
    if let Some(bad) = settings.grid_percent.iter().find(|p| !(0.0..100.0).contains(*p)) {
        return Err(Error::invalid(format!("grid value {bad}% outside [0, 100)")));
    }
    let mut manifest = ctx.manifest(&settings)?;
    let (corpus, _) = load_corpus(&settings.corpus, &mut manifest)?;
    let vocabulary = corpus_vocabulary(&corpus, settings.corpus.k)?;

    let targets: Vec<f64> = settings.grid_percent.iter().map(|p| p / 100.0).collect();
    let start = Instant::now();
    let curve = collision_curve(&vocabulary, &targets, settings.corpus.seed, SearchPolicy::default())?;
    manifest.timing("tune_s", start.elapsed().as_secs_f64());

    let json_path = ctx.out("tune.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&curve)? + "\n").map_err(|e| Error::io(&json_path, e))?;
    let csv_path = ctx.out("curve.csv");
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["target", "chosen_m", "achieved_fraction"])?;
    for r in &curve {
        w.write_record([
            r.target_fraction.to_string(),
            r.chosen_m.to_string(),
            r.achieved.collision_fraction.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    manifest.output(json_path);
    manifest.output(csv_path);
    manifest.write(&ctx.out("tune.manifest.json"))?;

    println!("unique k-mers: {}", vocabulary.len());
    println!("{:>10} {:>12} {:>10}", "target%", "m", "achieved%");
    for r in &curve {
        println!(
            "{:>10} {:>12} {:>10.4}",
            r.target_fraction * 100.0,
            r.chosen_m,
            r.achieved.collision_fraction * 100.0
        );
    }
    Ok(())
}

fn cmd_evaluate(ctx: &Context, args: &EvaluateArgs) -> Result<()> {
    let f = &ctx.file;
    let corpus_settings = resolve_corpus(&args.corpus, f);
    let defaults = SplitSpec::default();
    let knn_defaults = KnnParams::default();
    let runs = args.runs.or(f.runs).unwrap_or(defaults.n_runs as u64);
    if runs == 0 {
        return Err(Error::invalid("runs must be at least 1"));
    }
    let config = ExperimentConfig {
        k: corpus_settings.k,
        seed: corpus_settings.seed,
        sizing: resolve_sizing(&args.sizing, f)?,
        split: SplitSpec {
            train_fraction: args.train_fraction.or(f.train_fraction).unwrap_or(defaults.train_fraction),
            n_runs: runs as usize,
            rng_seed: args.split_seed.or(f.split_seed).unwrap_or(defaults.rng_seed),
            stratified: true,
        },
        knn: KnnParams {
            grid: args.neighbors.clone().or_else(|| f.neighbors.clone()).unwrap_or(knn_defaults.grid),
            metric: args.metric.or(f.metric).unwrap_or_default(),
            ..knn_defaults
        },
    };
    config.split.validate()?;

    #[derive(Serialize)]
    struct EvaluateSettings<'a> {
        corpus: &'a CorpusSettings,
        experiment: &'a ExperimentConfig,
    }
    let mut manifest = ctx.manifest(&EvaluateSettings {
        corpus: &corpus_settings,
        experiment: &config,
    })?;
    let (corpus, _) = load_corpus(&corpus_settings, &mut manifest)?;
    let outcome = run_experiment(&corpus, &config)?;

    let t = &outcome.timings;
    manifest.timing("tune_s", t.tune_s);
    manifest.timing("embedding_generation_s", t.embedding_generation_s);
    manifest.timing("train_s", t.train_s);
    manifest.timing("predict_s", t.predict_s);

    let metrics_path = ctx.out("metrics.json");
    let body = serde_json::to_string_pretty(&outcome.metrics_file(config.sizing))? + "\n";
    std::fs::write(&metrics_path, body).map_err(|e| Error::io(&metrics_path, e))?;
    let row_path = ctx.out("results.csv");
    outcome.write_table_row(&row_path)?;
    manifest.output(metrics_path);
    manifest.output(row_path);
    manifest.write(&ctx.out("evaluate.manifest.json"))?;

    let m = &outcome.metrics;
    println!(
        "m = {}, collision = {:.4}%, runs = {}",
        outcome.embedding.m,
        outcome.collision.collision_fraction * 100.0,
        m.per_run.len()
    );
    println!(
        "accuracy {:.4} (+/- {:.4})  precision {:.4}  recall {:.4}  F1 weighted {:.4}  F1 macro {:.4}",
        m.accuracy, m.std_dev.accuracy, m.precision_weighted, m.recall_weighted, m.f1_weighted, m.f1_macro
    );
    Ok(())
}

fn cmd_bench(ctx: &Context, args: &BenchArgs) -> Result<()> {
    let corpus_settings = resolve_corpus(&args.corpus, &ctx.file);
    let config = BenchConfig {
        k: corpus_settings.k,
        seed: corpus_settings.seed,
        table_sizes: args.table_size.clone().unwrap_or_default(),
        repeats: args.repeats.or(ctx.file.repeats).unwrap_or(BenchConfig::default().repeats),
    };

    #[derive(Serialize)]
    struct BenchSettings<'a> {
        corpus: &'a CorpusSettings,
        bench: &'a BenchConfig,
    }
    let mut manifest = ctx.manifest(&BenchSettings {
        corpus: &corpus_settings,
        bench: &config,
    })?;
    let (corpus, _) = load_corpus(&corpus_settings, &mut manifest)?;
    let report = run_bench(&corpus, &config)?;
    manifest.timing("murmur2vec_median_s", report.murmur2vec[0].median_s);
    manifest.timing("spectrum_median_s", report.spectrum.median_s);

    let path = ctx.out("bench.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))?;
    manifest.output(path);
    manifest.write(&ctx.out("bench.manifest.json"))?;

    println!(
        "{} sequences, k = {}, dimension = {}",
        report.n_sequences, report.k, report.vocabulary_size
    );
    for t in report.murmur2vec.iter().chain(std::iter::once(&report.spectrum)) {
        println!(
            "{:>20} m = {:>10}  median {:.6}s  {}",
            t.method,
            t.dimension,
            t.median_s,
            t.sequences_per_s.map_or("-".into(), |s| format!("{s:.0} seq/s"))
        );
    }
    match report.speedup {
        Some(s) => println!("speedup at equal dimension: {s:.3}x"),
        None => println!("speedup at equal dimension: n/a (time below clock resolution)"),
    }
    Ok(())
}

fn read_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let file = File::open(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_reader(std::io::BufReader::new(file))
                .map_err(|e| Error::invalid(format!("{}: {e}", p.display())))
        }
    }
}

fn dispatch(cli: Cli, argv: Vec<String>) -> Result<()> {
    if let Command::Hash { input, seed } = &cli.command {
        return cmd_hash(input, *seed);
    }
    let threads = match cli.threads {
        Some(0) => return Err(Error::invalid("--threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| Error::io(&cli.out_dir, e))?;
    let ctx = Context {
        file: read_config(cli.config.as_deref())?,
        out_dir: cli.out_dir,
        argv,
        threads,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Hash { .. } => unreachable!(),
        Command::Synth(a) => cmd_synth(&ctx, a),
        Command::Embed(a) => cmd_embed(&ctx, a),
        Command::Tune(a) => cmd_tune(&ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&ctx, a),
        Command::Bench(a) => cmd_bench(&ctx, a),
    })
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind().exit_code()
        }
    }
}
