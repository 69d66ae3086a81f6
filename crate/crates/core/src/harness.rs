//! Corpus ingestion and batch evaluation.
//!
//! A corpus is JSONL, one `{"id", "request", "html" | "html_path"}` object per
//! line; `html_path` is resolved against the corpus file's directory. Bad lines
//! are collected as [`RecordProblem`]s rather than aborting the run.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dom::{parse_bytes, ParseOptions};
use crate::rules::{audit, default_catalog, Rule, Severity, SeverityCounts};
use crate::scoring::{self, RewardConfig};
use crate::style::ClassStyleMap;

pub const EVAL_SCHEMA: u32 = 1;
pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const SUMMARY_TEXT_FILE: &str = "summary.txt";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    pub request: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html_path: Option<PathBuf>,
}

/// A corpus line that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordProblem {
    /// 1-based line in the corpus file.
    pub line: usize,
    pub id: Option<String>,
    pub message: String,
}

impl std::fmt::Display for RecordProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.id {
            Some(id) => write!(f, "line {} ({id}): {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

/// A record with its HTML loaded.
#[derive(Debug, Clone)]
pub struct LoadedRecord {
    pub line: usize,
    pub id: String,
    pub request: String,
    pub html: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub records: Vec<LoadedRecord>,
    pub problems: Vec<RecordProblem>,
    /// Nonblank lines seen.
    pub size: usize,
}

impl Corpus {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Ok(Self::parse(&text, base))
    }

    /// `base` resolves relative `html_path`s.
    pub fn parse(text: &str, base: &Path) -> Self {
        let mut corpus = Corpus::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            corpus.size += 1;
            let problem = |id: Option<&str>, message: String| RecordProblem {
                line,
                id: id.map(str::to_string),
                message,
            };
            let rec: CorpusRecord = match serde_json::from_str(raw) {
                Ok(r) => r,
                Err(e) => {
                    corpus.problems.push(problem(None, format!("malformed record: {e}")));
                    continue;
                }
            };
            if !seen.insert(rec.id.clone()) {
                corpus.problems.push(problem(Some(&rec.id), "duplicate id".into()));
                continue;
            }
            let html = match (rec.html, &rec.html_path) {
                (Some(h), None) => h.into_bytes(),
                (None, Some(p)) => match std::fs::read(base.join(p)) {
                    Ok(bytes) => bytes,
                    Err(e) => {
                        corpus
                            .problems
                            .push(problem(Some(&rec.id), format!("cannot read {}: {e}", p.display())));
                        continue;
                    }
                },
                _ => {
                    corpus.problems.push(problem(
                        Some(&rec.id),
                        "exactly one of html or html_path is required".into(),
                    ));
                    continue;
                }
            };
            corpus.records.push(LoadedRecord {
                line,
                id: rec.id,
                request: rec.request,
                html,
            });
        }
        corpus
    }
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordScore {
    pub schema: u32,
    pub id: String,
    pub counts: SeverityCounts,
    pub total_elements: u64,
    pub wvs: u64,
    pub inaccessibility_rate: f64,
    pub penalty: f64,
    pub reward: f64,
    /// Affected nodes per rule, zero entries omitted.
    pub rules: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Worker threads; 1 evaluates on the calling thread.
    pub jobs: usize,
    pub parse: ParseOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            parse: ParseOptions::default(),
        }
    }
}

pub struct Evaluator<'a> {
    pub class_map: &'a ClassStyleMap,
    pub catalog: &'a [Rule],
    pub reward: &'a RewardConfig<f64>,
}

impl Evaluator<'_> {
    pub fn score(&self, rec: &LoadedRecord, opts: &ParseOptions) -> Result<RecordScore, RecordProblem> {
        let problem = |message: String| RecordProblem {
            line: rec.line,
            id: Some(rec.id.clone()),
            message,
        };
        let doc = parse_bytes(&rec.html, opts).map_err(|e| problem(e.to_string()))?;
        let report = audit(&doc, self.class_map, self.catalog);
        let s = scoring::score_rounded(&report, self.reward).map_err(|e| problem(e.to_string()))?;
        Ok(RecordScore {
            schema: EVAL_SCHEMA,
            id: rec.id.clone(),
            counts: report.counts,
            total_elements: report.total_elements,
            wvs: s.wvs,
            inaccessibility_rate: s.inaccessibility_rate,
            penalty: s.penalty,
            reward: s.reward,
            rules: report.per_rule(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EvalRun {
    pub scores: Vec<RecordScore>,
    /// Load problems followed by evaluation problems, by line.
    pub problems: Vec<RecordProblem>,
    pub corpus_size: usize,
}

/// Results follow corpus order whatever the job count.
pub fn evaluate(corpus: &Corpus, evaluator: &Evaluator<'_>, opts: &EvalOptions) -> Result<EvalRun, HarnessError> {
    let run_one = |rec: &LoadedRecord| evaluator.score(rec, &opts.parse);
    let results: Vec<Result<RecordScore, RecordProblem>> = if opts.jobs <= 1 {
        corpus.records.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| corpus.records.par_iter().map(run_one).collect())
    };
    let mut problems = corpus.problems.clone();
    let mut scores = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => scores.push(s),
            Err(p) => problems.push(p),
        }
    }
    problems.sort_by_key(|p| p.line);
    Ok(EvalRun {
        scores,
        problems,
        corpus_size: corpus.size,
    })
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Zero mean and spread for an empty sample.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSummary {
    pub schema: u32,
    pub corpus_size: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub minor: Stat,
    pub moderate: Stat,
    pub serious: Stat,
    pub critical: Stat,
    pub wvs: Stat,
    pub inaccessibility_rate: Stat,
    /// Total affected nodes per catalog rule, including zeros.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_rule: Option<BTreeMap<String, u64>>,
}

impl EvalSummary {
    /// Statistics are taken per record and then aggregated.
    pub fn from_scores(scores: &[RecordScore], corpus_size: usize, skipped: usize, per_rule: Option<&[Rule]>) -> Self {
        let sev = |v: Severity| Stat::of(scores.iter().map(|s| s.counts.get(v) as f64));
        let per_rule = per_rule.map(|catalog| {
            let mut totals: BTreeMap<String, u64> = catalog.iter().map(|r| (r.id.to_string(), 0)).collect();
            for s in scores {
                for (rule, n) in &s.rules {
                    *totals.entry(rule.clone()).or_default() += n;
                }
            }
            totals
        });
        Self {
            schema: EVAL_SCHEMA,
            corpus_size,
            evaluated: scores.len(),
            skipped,
            minor: sev(Severity::Minor),
            moderate: sev(Severity::Moderate),
            serious: sev(Severity::Serious),
            critical: sev(Severity::Critical),
            wvs: Stat::of(scores.iter().map(|s| s.wvs as f64)),
            inaccessibility_rate: Stat::of(scores.iter().map(|s| s.inaccessibility_rate)),
            per_rule,
        }
    }

    /// Fixed-width table: Minor, Moderate, Serious, Critical, WVS, IR.
    pub fn to_table(&self, label: &str) -> String {
        let pm = |s: Stat| format!("{:.2} ± {:.2}", s.mean, s.std);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>14} {:>14} {:>14} {:>14} {:>16} {:>6}",
            "Corpus", "Minor", "Moderate", "Serious", "Critical", "WVS", "IR"
        );
        let _ = writeln!(
            out,
            "{:<20} {:>14} {:>14} {:>14} {:>14} {:>16} {:>6.2}",
            label,
            pm(self.minor),
            pm(self.moderate),
            pm(self.serious),
            pm(self.critical),
            pm(self.wvs),
            self.inaccessibility_rate.mean
        );
        let _ = writeln!(
            out,
            "\n{} records, {} evaluated, {} skipped",
            self.corpus_size, self.evaluated, self.skipped
        );
        if let Some(per_rule) = &self.per_rule {
            let _ = writeln!(out, "\n{:<28} {:>8}", "Rule", "Nodes");
            for (rule, n) in per_rule {
                let _ = writeln!(out, "{rule:<28} {n:>8}");
            }
        }
        out
    }
}

/// Writes `records.jsonl`, `summary.json` and `summary.txt` under `dir`.
pub fn write_outputs(
    dir: &Path,
    scores: &[RecordScore],
    summary: &EvalSummary,
    label: &str,
) -> Result<(), HarnessError> {
    let io = |path: PathBuf| move |source| HarnessError::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let mut lines = String::new();
    for s in scores {
        lines.push_str(&serde_json::to_string(s).expect("record serializes"));
        lines.push('\n');
    }
    let records = dir.join(RECORDS_FILE);
    std::fs::write(&records, lines).map_err(io(records.clone()))?;
    let json = dir.join(SUMMARY_JSON_FILE);
    let body = serde_json::to_string_pretty(summary).expect("summary serializes") + "\n";
    std::fs::write(&json, body).map_err(io(json.clone()))?;
    let txt = dir.join(SUMMARY_TEXT_FILE);
    std::fs::write(&txt, summary.to_table(label)).map_err(io(txt.clone()))?;
    Ok(())
}

/// Parses a `records.jsonl` body back into scores.
pub fn read_scores(text: &str) -> Result<Vec<RecordScore>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Builtin catalog, builtin class map and default reward, for quick use.
pub fn default_evaluation(corpus: &Corpus, jobs: usize) -> Result<EvalRun, HarnessError> {
    let class_map = ClassStyleMap::builtin();
    let catalog = default_catalog();
    let reward = RewardConfig::default();
    let evaluator = Evaluator {
        class_map: &class_map,
        catalog: &catalog,
        reward: &reward,
    };
    evaluate(
        corpus,
        &evaluator,
        &EvalOptions {
            jobs,
            ..EvalOptions::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLEAN: &str = r#"<html lang="en"><head><title>t</title></head><body><main><h1>Hi</h1></main></body></html>"#;

    fn line(id: &str, html: &str) -> String {
        serde_json::to_string(&CorpusRecord {
            id: id.into(),
            request: "a page".into(),
            html: Some(html.into()),
            html_path: None,
        })
        .unwrap()
    }

    #[test]
    fn two_clean_pages() {
        let text = [line("a", CLEAN), line("b", CLEAN)].join("\n");
        let corpus = Corpus::parse(&text, Path::new("."));
        let run = default_evaluation(&corpus, 1).unwrap();
        let s = EvalSummary::from_scores(&run.scores, run.corpus_size, run.problems.len(), None);
        assert_eq!((s.evaluated, s.skipped), (2, 0));
        assert_eq!(s.inaccessibility_rate.mean, 0.0);
        assert!(s.to_table("t").contains(" 0.00\n"));
    }

    #[test]
    fn bad_lines_become_problems() {
        let text = [
            line("a", CLEAN),
            "{not json".into(),
            line("a", CLEAN),
            r#"{"id":"c","request":"r"}"#.into(),
            r#"{"id":"d","request":"r","html":"x","html_path":"y.html"}"#.into(),
            r#"{"id":"e","request":"r","html_path":"missing.html"}"#.into(),
            String::new(),
        ]
        .join("\n");
        let corpus = Corpus::parse(&text, Path::new("/nonexistent"));
        assert_eq!(corpus.size, 6);
        assert_eq!(corpus.records.len(), 1);
        let lines: Vec<usize> = corpus.problems.iter().map(|p| p.line).collect();
        assert_eq!(lines, [2, 3, 4, 5, 6]);
    }

    #[test]
    fn degenerate_page_is_a_problem() {
        let corpus = Corpus::parse(&line("empty", ""), Path::new("."));
        let run = default_evaluation(&corpus, 1).unwrap();
        assert!(run.scores.is_empty());
        assert_eq!(run.problems.len(), 1);
        assert!(run.problems[0].message.contains("no elements"));
    }

    #[test]
    fn stat_is_population() {
        let s = Stat::of([0.0, 0.12]);
        assert!((s.mean - 0.06).abs() < 1e-15);
        assert!((s.std - 0.06).abs() < 1e-15);
        assert_eq!(Stat::of([]), Stat { mean: 0.0, std: 0.0 });
    }
}
