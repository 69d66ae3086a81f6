use std::path::{Path, PathBuf};
use std::process::ExitCode;

use a11y_core::dom::{parse_bytes, ParseOptions};
use a11y_core::grpo::{self, moving_average, GrpoConfig};
use a11y_core::harness::{self, Corpus, EvalOptions, EvalSummary, Evaluator};
use a11y_core::rules::{audit, default_catalog, ReportFile};
use a11y_core::scoring::{self, RewardConfig, ScoreFile};
use a11y_core::style::ClassStyleMap;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

const EXIT_CLEAN: u8 = 0;
const EXIT_VIOLATIONS: u8 = 1;
const EXIT_INPUT: u8 = 2;

const TRAIN_LOG_FILE: &str = "train_log.jsonl";
const POLICY_FILE: &str = "policy.json";
const TRAIN_SUMMARY_FILE: &str = "summary.json";
const REWARD_WINDOW: usize = 20;

#[derive(Parser)]
#[command(
    name = "a11y",
    version,
    about = "Static accessibility audits, rewards and toy GRPO training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit one HTML file. Exit 0 when clean, 1 with violations, 2 on input errors.
    Audit {
        file: PathBuf,
        /// JSON map from utility class names to colors and font sizes.
        #[arg(long, env = "A11Y_CLASS_MAP")]
        class_map: Option<PathBuf>,
        /// Print the report JSON instead of the human summary.
        #[arg(long)]
        json: bool,
    },
    /// Audit every record of a JSONL corpus and summarize.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Include total affected nodes per rule.
        #[arg(long)]
        per_rule: bool,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
        /// Skip bad records without failing the run.
        #[arg(long)]
        lenient: bool,
        #[arg(long, env = "A11Y_CLASS_MAP")]
        class_map: Option<PathBuf>,
    },
    /// Compute penalty, reward, WVS and inaccessibility rate from a report JSON.
    Score {
        report: PathBuf,
        #[arg(long)]
        reward_config: Option<PathBuf>,
    },
    /// Train the template policy and write the log, policy and summary.
    Train {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Audit { file, class_map, json } => cmd_audit(&file, class_map.as_deref(), json),
        Command::Eval {
            corpus,
            out,
            per_rule,
            jobs,
            lenient,
            class_map,
        } => cmd_eval(
            &corpus,
            &out,
            per_rule,
            usize::from(jobs),
            lenient,
            class_map.as_deref(),
        ),
        Command::Score { report, reward_config } => cmd_score(&report, reward_config.as_deref()),
        Command::Train { config, out } => cmd_train(&config, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn load_class_map(path: Option<&Path>) -> Result<ClassStyleMap> {
    match path {
        Some(p) => ClassStyleMap::from_path(p).with_context(|| format!("loading class map {}", p.display())),
        None => Ok(ClassStyleMap::builtin()),
    }
}

fn cmd_audit(file: &Path, class_map: Option<&Path>, as_json: bool) -> Result<u8> {
    let class_map = load_class_map(class_map)?;
    let opts = ParseOptions::default();
    let len = std::fs::metadata(file)
        .with_context(|| format!("reading {}", file.display()))?
        .len();
    if len > opts.size_limit as u64 {
        bail!(
            "{}: {len} bytes exceeds the {} byte limit",
            file.display(),
            opts.size_limit
        );
    }
    let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
    let doc = parse_bytes(&bytes, &opts).with_context(|| format!("parsing {}", file.display()))?;
    let report = audit(&doc, &class_map, &default_catalog());
    if as_json {
        println!("{}", report.to_file(&doc).to_json_pretty());
    } else {
        let file_report = report.to_file(&doc);
        for v in &file_report.violations {
            println!("{} [{}] {} node(s)", v.rule, v.severity, v.nodes.len());
            for s in &v.snippets {
                println!("    {s}");
            }
        }
        let c = report.counts;
        println!(
            "{} violations, {} nodes (minor {}, moderate {}, serious {}, critical {}), {} elements",
            report.violations.len(),
            c.total(),
            c.minor,
            c.moderate,
            c.serious,
            c.critical,
            report.total_elements
        );
    }
    Ok(if report.is_clean() { EXIT_CLEAN } else { EXIT_VIOLATIONS })
}

fn cmd_eval(
    corpus_path: &Path,
    out: &Path,
    per_rule: bool,
    jobs: usize,
    lenient: bool,
    class_map: Option<&Path>,
) -> Result<u8> {
    let class_map = load_class_map(class_map)?;
    let corpus = Corpus::load(corpus_path)?;
    let catalog = default_catalog();
    let reward = RewardConfig::default();
    let evaluator = Evaluator {
        class_map: &class_map,
        catalog: &catalog,
        reward: &reward,
    };
    let run = harness::evaluate(
        &corpus,
        &evaluator,
        &EvalOptions {
            jobs,
            ..EvalOptions::default()
        },
    )?;
    for p in &run.problems {
        eprintln!("warning: {}: {p}", corpus_path.display());
    }
    let summary = EvalSummary::from_scores(
        &run.scores,
        run.corpus_size,
        run.problems.len(),
        per_rule.then_some(&catalog[..]),
    );
    let label = corpus_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    harness::write_outputs(out, &run.scores, &summary, &label)?;
    print!("{}", summary.to_table(&label));
    if !run.problems.is_empty() && !lenient {
        eprintln!(
            "error: {} record(s) skipped; pass --lenient to accept",
            run.problems.len()
        );
        return Ok(EXIT_INPUT);
    }
    Ok(EXIT_CLEAN)
}

fn cmd_score(report_path: &Path, reward_config: Option<&Path>) -> Result<u8> {
    let text = std::fs::read_to_string(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let report = ReportFile::from_json(&text).with_context(|| format!("loading {}", report_path.display()))?;
    let cfg = match reward_config {
        Some(p) => RewardConfig::from_path(p)?,
        None => RewardConfig::default(),
    };
    let score = scoring::score_rounded(&report, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&ScoreFile::from(&score))?);
    Ok(EXIT_CLEAN)
}

fn cmd_train(config_path: &Path, out: &Path) -> Result<u8> {
    let cfg = GrpoConfig::from_path(config_path)?;
    let outcome = grpo::train::<f64>(&cfg, &cfg.prompt_ids())?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut log = String::new();
    for r in &outcome.curve {
        let line = json!({
            "schema": grpo::TRAIN_SCHEMA,
            "step": r.step,
            "mean_reward": r.mean_reward,
            "kl": r.kl,
            "greedy_ir": r.greedy_ir,
        });
        log.push_str(&line.to_string());
        log.push('\n');
    }
    write(out, TRAIN_LOG_FILE, log)?;

    let slots: Vec<_> = outcome
        .policy
        .slots()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            json!({
                "name": s.name(),
                "choices": s.choices().iter().map(|c| &c.label).collect::<Vec<_>>(),
                "logits": outcome.policy.logits()[j],
                "probs": outcome.policy.probs(j),
            })
        })
        .collect();
    let policy = json!({ "schema": grpo::TRAIN_SCHEMA, "slots": slots });
    write(out, POLICY_FILE, serde_json::to_string_pretty(&policy)? + "\n")?;

    let rewards: Vec<f64> = outcome.curve.iter().map(|r| r.mean_reward).collect();
    let ma = moving_average(&rewards, REWARD_WINDOW);
    let nondecreasing = ma.windows(2).all(|w| w[1] >= w[0]);
    let (before, after) = (&outcome.initial, &outcome.last);
    let reduction = (before.inaccessibility_rate > 0.0)
        .then(|| (before.inaccessibility_rate - after.inaccessibility_rate) / before.inaccessibility_rate);
    let summary = json!({
        "schema": grpo::TRAIN_SCHEMA,
        "config": cfg,
        "steps": outcome.curve.len(),
        "initial": before,
        "final": after,
        "ir_reduction": reduction,
        "final_mean_reward": rewards.last(),
        "final_kl": outcome.curve.last().map(|r| r.kl),
        "reward_ma_window": REWARD_WINDOW,
        "reward_ma_nondecreasing": nondecreasing,
    });
    write(out, TRAIN_SUMMARY_FILE, serde_json::to_string_pretty(&summary)? + "\n")?;

    println!("{:<10} {:>8} {:>6} {:>8}", "", "reward", "WVS", "IR");
    for (name, g) in [("initial", before), ("final", after)] {
        println!(
            "{name:<10} {:>8.3} {:>6} {:>8.3}",
            g.reward, g.wvs, g.inaccessibility_rate
        );
    }
    if let Some(r) = reduction {
        println!("IR reduction {:.1}%", r * 100.0);
    }
    Ok(EXIT_CLEAN)
}

fn write(dir: &Path, name: &str, body: String) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
}
