use std::time::Instant;

use serde_json::json;
use structag::splitter::{cluster, ClusterConfig, LevelStats, Strategy};

use crate::args::{BenchArgs, Method};
use crate::cluster::{levels, load_tokens, prepare};
use crate::error::{CliError, CliResult};
use crate::format::{csv_writer, real, sidecar};
use crate::manifest::RunManifest;

/// One timed clustering run.
#[derive(Clone, Debug)]
pub struct BenchRun {
    pub vocab_size: usize,
    pub method: Strategy,
    pub seed: u64,
    pub stats: Vec<LevelStats>,
}

impl BenchRun {
    pub fn total_seconds(&self) -> f64 {
        self.stats.iter().map(|s| s.wall_time.as_secs_f64()).sum()
    }
}

/// Least-squares fit of `ln(seconds) = slope * ln(V) + intercept`.
pub fn log_log_fit(points: &[(usize, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, t)| t > 0.0)
        .map(|&(v, t)| ((v as f64).ln(), t.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn run(args: &BenchArgs) -> CliResult<Vec<BenchRun>> {
    let levels = levels(args.levels)?;
    if args.repeats == 0 {
        return Err(CliError::Input("--repeats must be at least 1".into()));
    }
    if args.top_words.contains(&0) {
        return Err(CliError::Input("--top-words values must be at least 1".into()));
    }
    let start = Instant::now();
    let (tokens, digests) = load_tokens(&args.corpus)?;

    let mut runs = Vec::new();
    for &k in &args.top_words {
        let (vocab, _, store) = prepare(&tokens, k, args.total_vocab)?;
        for &method in &args.methods {
            let seeds: Vec<u64> = match method {
                Method::M => (1..=args.repeats as u64).collect(),
                _ => vec![0],
            };
            let mut done = Vec::new();
            for seed in seeds {
                let config = ClusterConfig {
                    strategy: method.into(),
                    levels,
                    seed,
                    ..Default::default()
                };
                let out = cluster(&vocab, &store, &config)?;
                done.push(BenchRun {
                    vocab_size: vocab.len(),
                    method: method.into(),
                    seed,
                    stats: out.stats,
                });
            }
            runs.extend(fastest_and_slowest(done));
        }
    }

    let mut w = csv_writer(&args.out)?;
    w.write_record(["V", "method", "seed", "level", "cumulative_seconds", "acmi_after"])?;
    for r in &runs {
        let mut cumulative = 0.0;
        for s in &r.stats {
            cumulative += s.wall_time.as_secs_f64();
            w.write_record([
                r.vocab_size.to_string(),
                r.method.name().to_owned(),
                r.seed.to_string(),
                s.level.to_string(),
                real(cumulative),
                real(s.acmi_after),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::io(&args.out, e))?;

    let mut sizes: Vec<usize> = runs.iter().map(|r| r.vocab_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() >= 3 {
        let path = sidecar(&args.out, ".slopes.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["method", "points", "slope", "intercept"])?;
        for &method in &args.methods {
            let strategy: Strategy = method.into();
            // fastest run per vocabulary size
            let points: Vec<(usize, f64)> = sizes
                .iter()
                .filter_map(|&v| {
                    runs.iter()
                        .filter(|r| r.method == strategy && r.vocab_size == v)
                        .map(|r| r.total_seconds())
                        .min_by(f64::total_cmp)
                        .map(|t| (v, t))
                })
                .collect();
            if let Some((slope, intercept)) = log_log_fit(&points) {
                w.write_record([
                    strategy.name().to_owned(),
                    points.len().to_string(),
                    real(slope),
                    real(intercept),
                ])?;
            }
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }

    let mut manifest = RunManifest::new(
        "bench",
        json!({
            "inputs": args.corpus.inputs,
            "lowercase": args.corpus.lowercase,
            "punctuation_as_tokens": !args.corpus.no_punctuation_tokens,
            "boundary": format!("{:?}", args.corpus.boundary).to_lowercase(),
            "top_words": args.top_words,
            "total_vocab": args.total_vocab,
            "levels": levels,
            "methods": args.methods.iter().map(|&m| Strategy::from(m).name()).collect::<Vec<_>>(),
            "repeats": args.repeats,
            "out": args.out,
        }),
    );
    manifest.inputs = digests;
    manifest.time("total", start.elapsed());
    manifest.write_beside(&args.out)?;
    Ok(runs)
}

/// Keeps the fastest and the slowest of a set of repeated runs.
fn fastest_and_slowest(mut runs: Vec<BenchRun>) -> Vec<BenchRun> {
    if runs.len() <= 2 {
        return runs;
    }
    runs.sort_by(|a, b| a.total_seconds().total_cmp(&b.total_seconds()));
    let slowest = runs.pop();
    runs.truncate(1);
    runs.extend(slowest);
    runs
}
