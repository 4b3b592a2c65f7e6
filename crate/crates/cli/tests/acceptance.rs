//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structag::bigram::{class_matrix, context_vectors, count_bigrams, BigramStore, ContextCache};
use structag::corpus::{build_vocabulary, TokenStream, Vocabulary};
use structag::elman::{evaluate, ErrorLabel, GoldReference, PartOfSpeech};
use structag::objective::{acmi, delta_acmi, log_term_budget};
use structag::splitter::{cluster, oracle_min_moves, BitPath, ClusterConfig, LevelStats, Strategy};
use structag::WordId;
use structag_cli::args::{Boundary, ClusterArgs, CorpusArgs, GenerateArgs, Method};

type Outcome = Result<String, String>;

/// Every stats list produced by criteria 5 to 9, checked by criterion 10.
#[derive(Default)]
struct Runs {
    stats: Vec<(String, Vec<LevelStats>)>,
}

impl Runs {
    fn keep(&mut self, label: impl Into<String>, stats: &[LevelStats]) {
        self.stats.push((label.into(), stats.to_vec()));
    }
}

fn elman(sentences: usize, seed: u64) -> (Vocabulary, BigramStore) {
    let tokens = structag::elman::generate(sentences, seed).unwrap();
    let (vocab, stream) = build_vocabulary(&tokens, 29).unwrap();
    let store = count_bigrams(&stream, vocab.len()).unwrap();
    (vocab, store)
}

fn random_instance(rng: &mut ChaCha8Rng, v: usize, len: usize) -> BigramStore {
    let ids = (0..len).map(|_| rng.gen_range(0..v as u32)).collect();
    count_bigrams(&TokenStream { ids, boundaries: vec![] }, v).unwrap()
}

/// Criteria 1 and 2 share one sweep.
fn delta_sweep() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    let mut calls = 0usize;
    let mut over_budget = 0usize;
    let mut max_ratio = 0.0f64;
    let corpora = 24;
    for n in 0..corpora {
        let v = rng.gen_range(5..=50);
        let len = rng.gen_range(200..=2000);
        let store = random_instance(&mut rng, v, len);
        let classes = [2usize, 4, 8, 16][n % 4];
        let assign: Vec<u32> = (0..v).map(|_| rng.gen_range(0..classes as u32)).collect();
        let m = class_matrix(&store, &assign, classes).unwrap();
        let before = acmi(&m).unwrap();
        for w in 0..v as WordId {
            let ctx = context_vectors(&store, &assign, w).unwrap();
            let from = assign[w as usize];
            for to in (0..classes as u32).filter(|&t| t != from) {
                let d = delta_acmi(&m, &ctx, from, to).unwrap();
                let mut moved = assign.clone();
                moved[w as usize] = to;
                let after = acmi(&class_matrix(&store, &moved, classes).unwrap()).unwrap();
                worst = worst.max((d.delta - (after - before)).abs());
                calls += 1;
                let budget = log_term_budget(classes);
                if d.log_terms > budget {
                    over_budget += 1;
                }
                max_ratio = max_ratio.max(d.log_terms as f64 / budget as f64);
            }
        }
    }
    let elapsed = start.elapsed();
    let c1 = if worst <= 1e-9 && elapsed < Duration::from_secs(10) {
        Ok(format!("{corpora} corpora, {calls} moves, max error {worst:.2e}, {elapsed:.2?}"))
    } else {
        Err(format!("max error {worst:.2e}, {elapsed:.2?}"))
    };
    let c2 = if over_budget == 0 {
        Ok(format!("{calls} calls, peak log terms {:.0}% of 8(C-1)", max_ratio * 100.0))
    } else {
        Err(format!("{over_budget} of {calls} calls over 8(C-1)"))
    };
    (c1, c2)
}

fn matrix_integrity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (v, classes) = (60, 16);
    let store = random_instance(&mut rng, v, 5000);
    let mut assign: Vec<u32> = (0..v).map(|_| rng.gen_range(0..classes as u32)).collect();
    let mut m = class_matrix(&store, &assign, classes).unwrap();
    let mut cache = ContextCache::new(&store, &assign).unwrap();
    for _ in 0..10_000 {
        let w = rng.gen_range(0..v as WordId);
        let from = assign[w as usize];
        let to = (from + rng.gen_range(1..classes as u32)) % classes as u32;
        m.apply_move(cache.get(w), from, to).map_err(|e| e.to_string())?;
        cache.on_move(&store, w, from, to).map_err(|e| e.to_string())?;
        assign[w as usize] = to;
    }
    if m == class_matrix(&store, &assign, classes).unwrap() {
        Ok("10000 moves, exact equality with rebuild".into())
    } else {
        Err("matrix differs from rebuild".into())
    }
}

fn move_count() -> Outcome {
    let start = Instant::now();
    let mean = oracle_min_moves(1000, (700, 300), 100, 489).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let msg = format!("mean {mean} moves, {elapsed:.2?}");
    if (479.0..=499.0).contains(&mean) && elapsed < Duration::from_secs(1) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn run_elman(runs: &mut Runs, sentences: usize, seed: u64, strategy: Strategy) -> (bool, ErrorLabel, String) {
    let (vocab, store) = elman(sentences, seed);
    let config = ClusterConfig {
        strategy,
        levels: 5,
        seed,
        full_trace: true,
        ..Default::default()
    };
    let out = cluster(&vocab, &store, &config).unwrap();
    runs.keep(format!("elman {sentences} seed {seed} {strategy}"), &out.stats);
    let report = evaluate(&out.tags, &GoldReference::elman()).unwrap();
    let impure: Vec<String> = report
        .per_group_purity
        .iter()
        .filter(|(_, p)| *p < structag::elman::PURITY_THRESHOLD)
        .map(|(g, p)| format!("{g} {p:.2}"))
        .collect();
    (report.level1_separation, report.error_label, impure.join(", "))
}

fn elman_robustness(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for sentences in [10_000, 2_000] {
        for seed in 1..=3 {
            for strategy in [Strategy::Znr, Strategy::Znrp] {
                let (sep, label, impure) = run_elman(runs, sentences, seed, strategy);
                if !sep || label != ErrorLabel::None {
                    bad.push(format!("{sentences}/{seed}/{strategy} sep={sep} {label} [{impure}]"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if bad.is_empty() && elapsed < Duration::from_secs(120) {
        Ok(format!("12 runs with label none, {elapsed:.2?}"))
    } else {
        Err(format!("{} of 12 runs off: {}", bad.len(), bad.join("; ")))
    }
}

fn elman_degradation(runs: &mut Runs) -> Outcome {
    let mut labels = Vec::new();
    let mut degraded = 0;
    for seed in 1..=3 {
        for strategy in [Strategy::Znr, Strategy::Znrp, Strategy::M] {
            let (_, label, _) = run_elman(runs, 1_000, seed, strategy);
            degraded += usize::from(label != ErrorLabel::None);
            labels.push(format!("{strategy}/{seed}={label}"));
        }
    }
    if degraded > 0 {
        Ok(format!("{degraded} of 9 runs below none: {}", labels.join(" ")))
    } else {
        Err(format!("every run labeled none: {}", labels.join(" ")))
    }
}

fn cluster_args(corpus: &Path, method: Method, tags: PathBuf, stats: PathBuf) -> ClusterArgs {
    ClusterArgs {
        corpus: CorpusArgs {
            inputs: vec![corpus.to_owned()],
            lowercase: false,
            no_punctuation_tokens: false,
            boundary: Boundary::None,
        },
        top_words: 29,
        total_vocab: false,
        levels: 5,
        method,
        seed: 0,
        epsilon: structag::objective::EPSILON,
        max_iterations: None,
        pin: None,
        parallel: false,
        tags,
        stats,
        vocab: None,
        trace: None,
    }
}

fn determinism(runs: &mut Runs) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("elman.txt");
    structag_cli::generate::run(&GenerateArgs {
        sentences: 10_000,
        seed: 1,
        out: corpus.clone(),
    })
    .map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for method in [Method::Znrp, Method::Znr] {
        let mut files = Vec::new();
        for rep in 0..2 {
            let tags = dir.path().join(format!("{method:?}-{rep}.tsv"));
            let stats = dir.path().join(format!("{method:?}-{rep}.csv"));
            let mut args = cluster_args(&corpus, method, tags.clone(), stats);
            args.trace = Some(dir.path().join(format!("{method:?}-{rep}.trace.csv")));
            let out = structag_cli::cluster::run(&args).map_err(|e| e.to_string())?;
            runs.keep(format!("cli {method:?} run {rep}"), &out.stats);
            files.push(std::fs::read(&tags).map_err(|e| e.to_string())?);
        }
        if files[0] != files[1] {
            return Err(format!("{method:?} tag files differ"));
        }
        sizes.push(files[0].len());
    }
    Ok(format!("ZNRP and ZNR tag files byte-identical ({} and {} bytes)", sizes[0], sizes[1]))
}

fn english() -> CorpusArgs {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/english");
    CorpusArgs {
        inputs: ["alice29.txt", "asyoulik.txt", "lcet10.txt"]
            .iter()
            .map(|f| dir.join(f))
            .collect(),
        lowercase: false,
        no_punctuation_tokens: false,
        boundary: Boundary::None,
    }
}

fn english_instance(target_v: usize) -> (Vocabulary, TokenStream, BigramStore) {
    let (tokens, _) = structag_cli::cluster::load_tokens(&english()).unwrap();
    structag_cli::cluster::prepare(&tokens, target_v, true).unwrap()
}

fn speed_ratio(runs: &mut Runs) -> Outcome {
    let (vocab, stream, store) = english_instance(512);
    let timed = |strategy, seed| {
        let config = ClusterConfig {
            strategy,
            levels: 10,
            seed,
            ..Default::default()
        };
        let start = Instant::now();
        let out = cluster(&vocab, &store, &config).unwrap();
        (start.elapsed(), out.stats)
    };
    let (znrp, stats) = timed(Strategy::Znrp, 0);
    runs.keep("speed znrp", &stats);
    let mut m_times = Vec::new();
    for seed in 1..=3 {
        let (t, stats) = timed(Strategy::M, seed);
        runs.keep(format!("speed m seed {seed}"), &stats);
        m_times.push(t);
    }
    let fastest_m = *m_times.iter().min().unwrap();
    let ratio = znrp.as_secs_f64() / fastest_m.as_secs_f64();
    let msg = format!(
        "{} tokens, V={}: ZNRP {znrp:.2?}, fastest M {fastest_m:.2?}, ratio {ratio:.3}",
        stream.len(),
        vocab.len()
    );
    if vocab.len() == 512 && ratio <= 0.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// The split as a set of words, independent of which side is called 0.
fn level1_split(partition: &structag::splitter::Partition, v: usize) -> BTreeSet<WordId> {
    let ones: BTreeSet<WordId> = (0..v as WordId).filter(|&w| partition.class_of(w) == 1).collect();
    if ones.contains(&0) {
        (0..v as WordId).filter(|w| !ones.contains(w)).collect()
    } else {
        ones
    }
}

fn random_init_spread(runs: &mut Runs) -> Outcome {
    let (vocab, _, store) = english_instance(800);
    let v = vocab.len();
    let level1 = |strategy, seed| {
        let config = ClusterConfig {
            strategy,
            levels: 1,
            seed,
            full_trace: true,
            ..Default::default()
        };
        cluster(&vocab, &store, &config).unwrap()
    };
    let mut distinct = HashSet::new();
    for seed in 1..=10 {
        let out = level1(Strategy::M, seed);
        runs.keep(format!("spread m seed {seed}"), &out.stats);
        distinct.insert(level1_split(&out.partitions[0], v));
    }
    let znr = level1(Strategy::Znr, 0);
    runs.keep("spread znr", &znr.stats);
    let ones = (0..v as WordId).filter(|&w| znr.partitions[0].class_of(w) == 1).count();
    let minority = ones.min(v - ones);
    let lo = 0.05 * v as f64;
    let hi = 0.45 * v as f64;
    let msg = format!(
        "V={v}: {} distinct M partitions of 10; ZNR minority {minority} words, ACMI {:.4}",
        distinct.len(),
        znr.stats[0].acmi_after
    );
    if v == 800 && distinct.len() >= 2 && (lo..=hi).contains(&(minority as f64)) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn monotonicity(runs: &Runs) -> Outcome {
    let mut rows = 0;
    let mut points = 0;
    for (label, stats) in &runs.stats {
        for s in stats {
            rows += 1;
            if s.acmi_after < s.acmi_before - 1e-12 {
                return Err(format!("{label} level {}: {} < {}", s.level, s.acmi_after, s.acmi_before));
            }
            points += s.trace.len();
            if let Some(i) = s.trace.windows(2).position(|t| t[1] < t[0] - 1e-12) {
                return Err(format!("{label} level {}: trace drops at iteration {}", s.level, i + 1));
            }
        }
    }
    Ok(format!("{} runs, {rows} stats rows, {points} trace points", runs.stats.len()))
}

fn pinning() -> Outcome {
    let (vocab, store) = elman(10_000, 1);
    let gold = GoldReference::elman();
    let mut verbs: Vec<&str> = gold
        .groups
        .iter()
        .filter(|g| g.pos == PartOfSpeech::Verb)
        .flat_map(|g| g.words.iter().map(String::as_str))
        .collect();
    verbs.push("see");
    let one: BitPath = "1".parse().unwrap();
    let pinned = verbs
        .iter()
        .map(|w| (vocab.lexical_id(w).unwrap(), one))
        .collect();
    let base = ClusterConfig {
        strategy: Strategy::Znrp,
        levels: 5,
        ..Default::default()
    };
    let free = cluster(&vocab, &store, &base).unwrap();
    let config = ClusterConfig { pinned, ..base };
    let out = cluster(&vocab, &store, &config).unwrap();
    let by_surface = out.tags.by_surface();
    if let Some(w) = verbs.iter().find(|w| !by_surface[*w].starts_with(one)) {
        return Err(format!("{w} tagged {}", by_surface[w]));
    }
    let shape = |s: &[LevelStats]| s.iter().map(|l| l.level).collect::<Vec<_>>();
    if shape(&out.stats) != shape(&free.stats) {
        return Err("stats shape differs from the unpinned run".into());
    }
    let moved: HashSet<WordId> = out.stats.iter().flat_map(|s| s.moves.iter().map(|m| m.word)).collect();
    if let Some(w) = verbs.iter().find(|w| moved.contains(&vocab.lexical_id(w).unwrap())) {
        return Err(format!("pinned {w} was moved"));
    }
    let moves: usize = out.stats.iter().map(|s| s.moves.len()).sum();
    Ok(format!("{} verbs pinned under 1, none among {moves} moves", verbs.len()))
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let mut failed = 0;
    let mut report = |n: u32, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {n:>2}. {name}: {detail}");
    };
    let (c1, c2) = delta_sweep();
    report(1, "delta oracle", c1);
    report(2, "cost contract", c2);
    report(3, "matrix integrity", matrix_integrity());
    report(4, "move-count simulation", move_count());
    report(5, "elman robustness", elman_robustness(&mut runs));
    report(6, "elman degradation", elman_degradation(&mut runs));
    report(7, "determinism", determinism(&mut runs));
    report(8, "speed ratio", speed_ratio(&mut runs));
    report(9, "random-init spread", random_init_spread(&mut runs));
    report(10, "monotonicity", monotonicity(&runs));
    report(11, "pinning", pinning());
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
