//! Command-line front end: one subcommand per pipeline stage. Every run
//! writes a JSON manifest with the resolved config, seeds, per-stage
//! wall-clock timings, and output paths, so it can be reproduced exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Result, SosError};
use crate::eval::{self, EvalSummary};
use crate::finetune::{finetune_all_at, resolve_eps_t};
use crate::model_io::{load_models, save_models, MODEL_FORMAT_VERSION};
use crate::pipeline::{balance, synth_full, train_all};
use crate::sampling::Corrector;
use crate::synth;
use crate::tabular::{fit_encoder, load_table, partition_classes, save_encoder, Schema, Table};
use crate::training::EpochStat;

#[derive(Parser, Debug)]
#[command(name = "sos", version, about = "Score-based oversampling for imbalanced tabular data")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Path to the run config JSON (or set SOS_CONFIG).
    #[arg(long, env = "SOS_CONFIG")]
    config: PathBuf,
    /// Override the worker cap from the config.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the data against the schema, fit the encoder, report class counts.
    Prep(ConfigArgs),
    /// Train one score network per class.
    Train(ConfigArgs),
    /// Damp minor-class scores where they align with the major class's.
    Finetune(ConfigArgs),
    /// Generate fake minor rows until every class matches the major count.
    Oversample(ConfigArgs),
    /// Train one network on all classes and synthesize a full fake table.
    SynthFull(ConfigArgs),
    /// Fit classifiers on a training table, score weighted F1 on the test set.
    Eval {
        #[command(flatten)]
        common: ConfigArgs,
        /// Training table override (e.g. the augmented CSV); defaults to train_csv.
        #[arg(long)]
        train: Option<PathBuf>,
    },
    /// Fixed-edge histogram of one continuous column, real vs fake.
    Histogram {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Fake table to count against the real edges; defaults to augmented.csv.
        #[arg(long)]
        fake: Option<PathBuf>,
    },
    /// Generate a synthetic dataset: schema.json, train.csv, test.csv.
    MakeSynth(MakeSynthArgs),
}

#[derive(Debug, Args)]
struct MakeSynthArgs {
    /// two-gauss-imbalanced | multi-minor | gauss1d
    #[arg(long)]
    kind: String,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 2000)]
    n_major: usize,
    #[arg(long, default_value_t = 200)]
    n_minor: usize,
    /// Cluster offset per axis for two-gauss-imbalanced.
    #[arg(long, default_value_t = 1.5)]
    delta: f64,
    /// Class counts for multi-minor, e.g. 1064,702,117.
    #[arg(long, default_value = "1064,702,117")]
    counts: String,
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    /// Mean / std / rows for gauss1d.
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    #[arg(long, default_value_t = 1.0)]
    std: f64,
    #[arg(long, default_value_t = 5000)]
    n: usize,
}

struct StageTimer {
    stages: Vec<(String, f64)>,
    current: Option<(String, Instant)>,
}

impl StageTimer {
    fn new() -> Self {
        StageTimer { stages: Vec::new(), current: None }
    }

    fn start(&mut self, name: &str) {
        self.finish();
        self.current = Some((name.to_string(), Instant::now()));
    }

    fn finish(&mut self) {
        if let Some((name, started)) = self.current.take() {
            self.stages.push((name, started.elapsed().as_secs_f64()));
        }
    }

    fn manifest_value(&self) -> serde_json::Value {
        json!(self
            .stages
            .iter()
            .map(|(name, secs)| json!({ "stage": name, "seconds": secs }))
            .collect::<Vec<_>>())
    }
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &serde_json::Value,
    timer: &mut StageTimer,
    outputs: &BTreeMap<String, String>,
    extra: serde_json::Value,
) -> Result<()> {
    timer.finish();
    let manifest = json!({
        "command": command,
        "format_version": MODEL_FORMAT_VERSION,
        "config": config,
        "stages": timer.manifest_value(),
        "outputs": outputs,
        "details": extra,
    });
    let path = out_dir.join(format!("manifest_{command}.json"));
    write_json_file(&path, &manifest)
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| SosError::Json { path: path.display().to_string(), source: e })?;
    std::fs::write(path, text)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })
}

fn load_run(common: &ConfigArgs) -> Result<(RunConfig, serde_json::Value)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(threads) = common.threads {
        cfg.threads = threads.max(1);
    }
    let echo = serde_json::to_value(&cfg)
        .map_err(|e| SosError::Json { path: "config".into(), source: e })?;
    ensure_dir(&cfg.output_dir)?;
    Ok((cfg, echo))
}

fn load_inputs(cfg: &RunConfig) -> Result<(Schema, Table)> {
    let schema = Schema::from_json_file(&cfg.schema)?;
    let table = load_table(&cfg.train_csv, &schema)?;
    Ok((schema, table))
}

fn class_counts_value(table: &Table) -> serde_json::Value {
    json!(table
        .class_labels
        .iter()
        .zip(&table.class_index)
        .map(|(label, rows)| json!({ "label": label, "rows": rows.len() }))
        .collect::<Vec<_>>())
}

fn write_loss_logs(out_dir: &Path, logs: &[(usize, Vec<EpochStat>)]) -> Result<()> {
    for (class, stats) in logs {
        let mut text = String::from("epoch,mean_loss,wall_seconds\n");
        for s in stats {
            text.push_str(&format!("{},{},{}\n", s.epoch, s.mean_loss, s.wall_seconds));
        }
        let path = out_dir.join(format!("loss_class_{class}.csv"));
        std::fs::write(&path, text)
            .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })?;
    }
    Ok(())
}

fn models_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("models")
}

fn finetuned_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("models_finetuned")
}

/// Prefer fine-tuned models when they exist.
fn sampling_models_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let ft = finetuned_dir(cfg);
    if ft.join("modelset.json").exists() {
        return Ok(ft);
    }
    let base = models_dir(cfg);
    if base.join("modelset.json").exists() {
        return Ok(base);
    }
    Err(SosError::MissingArtifact(format!("models under {}", cfg.output_dir.display())))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prep(common) => cmd_prep(&common),
        Command::Train(common) => cmd_train(&common),
        Command::Finetune(common) => cmd_finetune(&common),
        Command::Oversample(common) => cmd_oversample(&common),
        Command::SynthFull(common) => cmd_synth_full(&common),
        Command::Eval { common, train } => cmd_eval(&common, train),
        Command::Histogram { common, column, bins, fake } => {
            cmd_histogram(&common, &column, bins, fake)
        }
        Command::MakeSynth(args) => cmd_make_synth(&args),
    }
}

fn cmd_prep(common: &ConfigArgs) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let (_, table) = load_inputs(&cfg)?;
    timer.start("fit_encoder");
    let encoder = fit_encoder(&table)?;
    let encoder_path = cfg.output_dir.join("encoder.json");
    save_encoder(&encoder, &encoder_path)?;

    let partition = match partition_classes(&table) {
        Ok(part) => json!({
            "major": table.class_labels[part.major],
            "minors": part.minors.iter().map(|c| &table.class_labels[*c]).collect::<Vec<_>>(),
        }),
        Err(SosError::SingleClass) => {
            json!({ "warning": "single class: oversampling unavailable, full synthesis only" })
        }
        Err(e) => return Err(e),
    };
    let mut outputs = BTreeMap::new();
    outputs.insert("encoder".into(), encoder_path.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "prep",
        &echo,
        &mut timer,
        &outputs,
        json!({
            "rows": table.n_rows(),
            "feature_dim": encoder.dim,
            "classes": class_counts_value(&table),
            "partition": partition,
        }),
    )?;
    println!("prepared {} rows, feature dim {}", table.n_rows(), encoder.dim);
    Ok(())
}

fn cmd_train(common: &ConfigArgs) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let (_, table) = load_inputs(&cfg)?;
    let encoder = fit_encoder(&table)?;
    save_encoder(&encoder, &cfg.output_dir.join("encoder.json"))?;
    let spec = cfg.net.resolve(encoder.dim)?;

    timer.start("train");
    let (modelset, logs) = train_all(&table, &encoder, &spec, &cfg.sde, &cfg.train, cfg.threads)?;
    timer.start("save");
    let dir = models_dir(&cfg);
    save_models(&dir, &modelset)?;
    write_loss_logs(&cfg.output_dir, &logs)?;

    let per_epoch: Vec<serde_json::Value> = logs
        .iter()
        .map(|(class, stats)| {
            let mean_epoch_seconds = if stats.is_empty() {
                0.0
            } else {
                stats.iter().map(|s| s.wall_seconds).sum::<f64>() / stats.len() as f64
            };
            json!({
                "class": table.class_labels[*class],
                "epochs": stats.len(),
                "train_seconds_per_epoch": mean_epoch_seconds,
                "final_loss": stats.last().map(|s| s.mean_loss),
            })
        })
        .collect();
    let mut outputs = BTreeMap::new();
    outputs.insert("models".into(), dir.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "train",
        &echo,
        &mut timer,
        &outputs,
        json!({ "classes": class_counts_value(&table), "training": per_epoch }),
    )?;
    println!("trained {} class networks into {}", modelset.models.len(), dir.display());
    Ok(())
}

fn cmd_finetune(common: &ConfigArgs) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let ft_cfg = cfg
        .finetune
        .clone()
        .ok_or_else(|| SosError::BadConfig("config has no finetune section".into()))?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let (_, table) = load_inputs(&cfg)?;
    let src = models_dir(&cfg);
    if !src.join("modelset.json").exists() {
        return Err(SosError::MissingArtifact(format!("models under {}", src.display())));
    }
    let mut modelset = load_models(&src)?;

    timer.start("finetune");
    let eps_t = resolve_eps_t(ft_cfg.eps_t, cfg.sampler.steps, modelset.sde.t_min);
    let encoder = modelset.encoder.clone();
    let report = finetune_all_at(&mut modelset, &table, &encoder, &ft_cfg, eps_t)?;

    timer.start("save");
    let dir = finetuned_dir(&cfg);
    save_models(&dir, &modelset)?;
    let mut outputs = BTreeMap::new();
    outputs.insert("models".into(), dir.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "finetune",
        &echo,
        &mut timer,
        &outputs,
        json!({
            "eps_t_resolved": eps_t,
            "comparisons": report.comparisons,
            "triggers": report.triggers,
            "trigger_rate": report.trigger_rate(),
            "zero_score_skips": report.zero_score_skips,
        }),
    )?;
    println!(
        "fine-tuned {} minor networks, trigger rate {:.3}",
        report.per_class_triggers.len(),
        report.trigger_rate()
    );
    Ok(())
}

fn cmd_oversample(common: &ConfigArgs) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let (_, table) = load_inputs(&cfg)?;
    let src = sampling_models_dir(&cfg)?;
    let modelset = load_models(&src)?;
    if let (Corrector::Langevin, Some(note)) = (
        cfg.sampler.corrector,
        cfg.sampler.effective_corrector(modelset.sde.family).1,
    ) {
        eprintln!("notice: {note}");
    }

    timer.start("generate");
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(cfg.sampler.seed);
    let (augmented, generated) =
        balance(&table, &modelset, cfg.option, &cfg.sampler, cfg.sampler.t_end, &mut rng, cfg.threads)?;
    let gen_seconds = started.elapsed().as_secs_f64();

    timer.start("write");
    let out_csv = cfg.output_dir.join("augmented.csv");
    augmented.write_csv(&out_csv)?;
    let mut outputs = BTreeMap::new();
    outputs.insert("augmented".into(), out_csv.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "oversample",
        &echo,
        &mut timer,
        &outputs,
        json!({
            "models_used": src.display().to_string(),
            "total_generation_seconds": gen_seconds,
            "generated": generated
                .iter()
                .map(|(class, n)| json!({ "label": table.class_labels[*class], "rows": n }))
                .collect::<Vec<_>>(),
            "final_counts": class_counts_value(&augmented),
        }),
    )?;
    let total: usize = generated.iter().map(|(_, n)| n).sum();
    println!("appended {total} fake rows -> {}", out_csv.display());
    Ok(())
}

fn cmd_synth_full(common: &ConfigArgs) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let (_, table) = load_inputs(&cfg)?;
    let encoder = fit_encoder(&table)?;
    let spec = cfg.net.resolve(encoder.dim)?;

    timer.start("train");
    let mut rng = StdRng::seed_from_u64(cfg.sampler.seed);
    let started = Instant::now();
    let fake = synth_full(&table, &spec, &cfg.sde, &cfg.train, &cfg.sampler, &mut rng)?;
    let total_seconds = started.elapsed().as_secs_f64();

    timer.start("write");
    let out_csv = cfg.output_dir.join("synthetic.csv");
    fake.write_csv(&out_csv)?;
    let mut outputs = BTreeMap::new();
    outputs.insert("synthetic".into(), out_csv.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "synth-full",
        &echo,
        &mut timer,
        &outputs,
        json!({
            "rows": fake.n_rows(),
            "train_and_generation_seconds": total_seconds,
            "final_counts": class_counts_value(&fake),
        }),
    )?;
    println!("synthesized {} fake rows -> {}", fake.n_rows(), out_csv.display());
    Ok(())
}

fn summary_value(summary: &EvalSummary) -> serde_json::Value {
    let per: BTreeMap<String, serde_json::Value> = summary
        .per_classifier
        .iter()
        .map(|(kind, ms)| (format!("{kind:?}"), json!({ "mean": ms.mean, "std": ms.std })))
        .collect();
    json!({
        "per_classifier": per,
        "overall": { "mean": summary.overall.mean, "std": summary.overall.std },
        "runs": summary.runs,
    })
}

fn cmd_eval(common: &ConfigArgs, train_override: Option<PathBuf>) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let test_csv = cfg
        .test_csv
        .clone()
        .ok_or_else(|| SosError::BadConfig("eval needs test_csv in the config".into()))?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let schema = Schema::from_json_file(&cfg.schema)?;
    let train_path = train_override.unwrap_or_else(|| cfg.train_csv.clone());
    let train_table = load_table(&train_path, &schema)?;
    let test_table = load_table(&test_csv, &schema)?;

    timer.start("evaluate");
    let summary = eval::evaluate(&train_table, &test_table, &cfg.eval)?;

    timer.start("write");
    let out = cfg.output_dir.join("metrics.json");
    write_json_file(&out, &summary_value(&summary))?;
    let mut outputs = BTreeMap::new();
    outputs.insert("metrics".into(), out.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "eval",
        &echo,
        &mut timer,
        &outputs,
        json!({ "train_table": train_path.display().to_string() }),
    )?;
    println!(
        "weighted F1 {:.4} +/- {:.4} over {} runs -> {}",
        summary.overall.mean,
        summary.overall.std,
        summary.runs.len(),
        out.display()
    );
    Ok(())
}

fn cmd_histogram(
    common: &ConfigArgs,
    column: &str,
    bins: usize,
    fake: Option<PathBuf>,
) -> Result<()> {
    let (cfg, echo) = load_run(common)?;
    let mut timer = StageTimer::new();
    timer.start("load");
    let schema = Schema::from_json_file(&cfg.schema)?;
    let real = load_table(&cfg.train_csv, &schema)?;
    let fake_path = fake.unwrap_or_else(|| cfg.output_dir.join("augmented.csv"));
    let fake_table = load_table(&fake_path, &schema)?;

    timer.start("bin");
    let edges = eval::histogram_edges(&real, column, bins)?;
    let real_counts = eval::histogram_counts(&edges, &eval::column_values(&real, column)?);
    let fake_counts = eval::histogram_counts(&edges, &eval::column_values(&fake_table, column)?);

    timer.start("write");
    let mut text = String::from("low,high,count_real,count_fake\n");
    for k in 0..real_counts.len() {
        text.push_str(&format!(
            "{},{},{},{}\n",
            edges[k],
            edges[k + 1],
            real_counts[k],
            fake_counts[k]
        ));
    }
    let out = cfg.output_dir.join(format!("hist_{column}.csv"));
    std::fs::write(&out, text)
        .map_err(|e| SosError::Io { path: out.display().to_string(), source: e })?;
    let mut outputs = BTreeMap::new();
    outputs.insert("histogram".into(), out.display().to_string());
    write_manifest(
        &cfg.output_dir,
        "histogram",
        &echo,
        &mut timer,
        &outputs,
        json!({ "column": column, "bins": bins, "fake_table": fake_path.display().to_string() }),
    )?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_make_synth(args: &MakeSynthArgs) -> Result<()> {
    if !(args.test_fraction > 0.0 && args.test_fraction < 1.0) {
        return Err(SosError::BadConfig("test_fraction must lie in (0, 1)".into()));
    }
    let table = match args.kind.as_str() {
        "two-gauss-imbalanced" => {
            if args.n_major == 0 || args.n_minor == 0 {
                return Err(SosError::BadConfig("counts must be positive".into()));
            }
            synth::two_gauss_imbalanced(args.n_major, args.n_minor, args.delta, args.seed)?
        }
        "multi-minor" => {
            let counts: Vec<usize> = args
                .counts
                .split(',')
                .map(|c| c.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| SosError::BadConfig(format!("bad counts `{}`", args.counts)))?;
            if counts.len() != 3 || counts.contains(&0) {
                return Err(SosError::BadConfig("multi-minor needs three positive counts".into()));
            }
            synth::multi_minor([counts[0], counts[1], counts[2]], args.separation, args.seed)?
        }
        "gauss1d" => {
            if args.n == 0 {
                return Err(SosError::BadConfig("n must be positive".into()));
            }
            synth::gauss1d(args.mean, args.std, args.n, args.seed)?
        }
        other => {
            return Err(SosError::BadConfig(format!(
                "unknown kind `{other}`; expected two-gauss-imbalanced | multi-minor | gauss1d"
            )))
        }
    };
    ensure_dir(&args.out_dir)?;
    let (train, test) = synth::stratified_split(&table, args.test_fraction, args.seed)?;
    let schema_path = args.out_dir.join("schema.json");
    write_json_file(&schema_path, &table.schema)?;
    let train_path = args.out_dir.join("train.csv");
    let test_path = args.out_dir.join("test.csv");
    train.write_csv(&train_path)?;
    test.write_csv(&test_path)?;

    let mut timer = StageTimer::new();
    let mut outputs = BTreeMap::new();
    outputs.insert("schema".into(), schema_path.display().to_string());
    outputs.insert("train".into(), train_path.display().to_string());
    outputs.insert("test".into(), test_path.display().to_string());
    write_manifest(
        &args.out_dir,
        "make-synth",
        &json!({
            "kind": args.kind,
            "seed": args.seed,
            "test_fraction": args.test_fraction,
            "n_major": args.n_major,
            "n_minor": args.n_minor,
            "delta": args.delta,
            "counts": args.counts,
            "separation": args.separation,
            "mean": args.mean,
            "std": args.std,
            "n": args.n,
        }),
        &mut timer,
        &outputs,
        json!({
            "train_counts": class_counts_value(&train),
            "test_counts": class_counts_value(&test),
        }),
    )?;
    println!("wrote {} and {}", train_path.display(), test_path.display());
    Ok(())
}
