use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::json;
use structag::bigram::{count_bigrams, BigramStore};
use structag::corpus::{
    build_vocabulary, tokenize_bytes, top_k_for_vocab_size, TokenStream, TokenizerOptions,
    Vocabulary, BOUNDARY_TOKEN,
};
use structag::splitter::{cluster, BitPath, ClusterConfig, ClusterOutput, LevelStats, TagTable};
use structag::{Error, WordId, MAX_LEVELS};

use crate::args::{ClusterArgs, CorpusArgs};
use crate::error::{CliError, CliResult};
use crate::format::{csv_writer, real, tsv_reader, tsv_writer};
use crate::manifest::{InputDigest, RunManifest};

/// Tokens of every input file, with a boundary between files.
pub fn load_tokens(args: &CorpusArgs) -> CliResult<(Vec<String>, Vec<InputDigest>)> {
    let options = TokenizerOptions {
        lowercase: args.lowercase,
        punctuation_as_tokens: !args.no_punctuation_tokens,
        sentence_boundary: args.boundary.into(),
    };
    let mut tokens = Vec::new();
    let mut digests = Vec::new();
    for path in &args.inputs {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let file_tokens = tokenize_bytes(&bytes, &options)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if !tokens.is_empty() && !file_tokens.is_empty() {
            tokens.push(BOUNDARY_TOKEN.to_owned());
        }
        tokens.extend(file_tokens);
        digests.push(InputDigest::of(path, &bytes));
    }
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus.into());
    }
    Ok((tokens, digests))
}

/// Vocabulary, coded stream and bigram counts for one vocabulary size.
pub fn prepare(
    tokens: &[String],
    top_words: usize,
    total_vocab: bool,
) -> CliResult<(Vocabulary, TokenStream, BigramStore)> {
    let k = if total_vocab {
        top_k_for_vocab_size(tokens, top_words)?
    } else {
        top_words
    };
    let (vocab, stream) = build_vocabulary(tokens, k)?;
    let store = count_bigrams(&stream, vocab.len())?;
    Ok((vocab, stream, store))
}

pub fn levels(requested: u32) -> CliResult<u8> {
    if requested == 0 || requested > MAX_LEVELS as u32 {
        return Err(Error::LevelCap {
            requested,
            max: MAX_LEVELS,
        }
        .into());
    }
    Ok(requested as u8)
}

/// Reads `surface<TAB>bit_string` rows; a header row is optional.
pub fn read_pins(path: &Path, vocab: &Vocabulary) -> CliResult<BTreeMap<WordId, BitPath>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut pins = BTreeMap::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let bad = |msg: &str| CliError::Input(format!("{}:{}: {msg}", path.display(), line + 1));
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() < 2 {
            return Err(bad("expected surface and bit string"));
        }
        if line == 0 && &record[0] == "surface" {
            continue;
        }
        let surface = &record[0];
        let path_bits: BitPath = record[1]
            .parse()
            .map_err(|e: Error| bad(&e.to_string()))?;
        if path_bits.len() > MAX_LEVELS {
            return Err(bad("bit string longer than the level cap"));
        }
        let id = vocab
            .entries()
            .iter()
            .position(|e| e.surface == surface)
            .ok_or_else(|| bad(&format!("{surface:?} is not in the vocabulary")))?;
        if pins.insert(id as WordId, path_bits).is_some() {
            return Err(bad(&format!("{surface:?} pinned twice")));
        }
    }
    Ok(pins)
}

pub fn write_tags(path: &Path, tags: &TagTable) -> CliResult<()> {
    let mut w = tsv_writer(path)?;
    w.write_record(["surface", "bit_string", "frequency", "class_id"])?;
    for r in &tags.rows {
        w.write_record([
            r.surface.clone(),
            r.tag.to_string(),
            r.frequency.to_string(),
            r.class_id.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a tag TSV written by [`write_tags`].
pub fn read_tags(path: &Path) -> CliResult<TagTable> {
    let mut reader = tsv_reader(path)?;
    let mut tags = TagTable::default();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |msg: String| CliError::Input(format!("{}:{}: {msg}", path.display(), line + 2));
        if record.len() < 2 {
            return Err(bad("expected at least surface and bit_string".into()));
        }
        let tag: BitPath = record[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let frequency = match record.get(2) {
            Some(f) => f.parse().map_err(|_| bad(format!("bad frequency {f:?}")))?,
            None => 0,
        };
        tags.rows.push(structag::splitter::TagRow {
            surface: record[0].to_owned(),
            tag,
            frequency,
            class_id: tag.value(),
        });
    }
    Ok(tags)
}

pub fn write_stats(path: &Path, stats: &[LevelStats]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "level",
        "iterations",
        "committed_moves",
        "retracted_moves",
        "acmi_before",
        "acmi_after",
        "wall_seconds",
    ])?;
    for s in stats {
        w.write_record([
            s.level.to_string(),
            s.iterations.to_string(),
            s.committed_moves.to_string(),
            s.retracted_moves.to_string(),
            real(s.acmi_before),
            real(s.acmi_after),
            real(s.wall_time.as_secs_f64()),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_trace(path: &Path, stats: &[LevelStats]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["level", "iteration", "acmi"])?;
    for s in stats {
        for (i, a) in s.trace.iter().enumerate() {
            w.write_record([s.level.to_string(), i.to_string(), real(*a)])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn run(args: &ClusterArgs) -> CliResult<ClusterOutput> {
    let levels = levels(args.levels)?;
    if args.top_words == 0 {
        return Err(CliError::Input("--top-words must be at least 1".into()));
    }

    let t = Instant::now();
    let (tokens, digests) = load_tokens(&args.corpus)?;
    let read_time = t.elapsed();

    let t = Instant::now();
    let (vocab, stream, store) = prepare(&tokens, args.top_words, args.total_vocab)?;
    let pinned = match &args.pin {
        Some(p) => read_pins(p, &vocab)?,
        None => BTreeMap::new(),
    };
    let count_time = t.elapsed();

    let config = ClusterConfig {
        strategy: args.method.into(),
        levels,
        seed: args.seed,
        epsilon: args.epsilon,
        max_iterations_per_level: args.max_iterations,
        pinned,
        parallel: args.parallel,
        full_trace: args.trace.is_some(),
    };
    let t = Instant::now();
    let out = cluster(&vocab, &store, &config)?;
    let cluster_time = t.elapsed();

    write_tags(&args.tags, &out.tags)?;
    write_stats(&args.stats, &out.stats)?;
    if let Some(p) = &args.vocab {
        fs::write(p, vocab.to_tsv()).map_err(|e| CliError::io(p, e))?;
    }
    if let Some(p) = &args.trace {
        write_trace(p, &out.stats)?;
    }

    let mut manifest = RunManifest::new(
        "cluster",
        json!({
            "inputs": args.corpus.inputs,
            "lowercase": args.corpus.lowercase,
            "punctuation_as_tokens": !args.corpus.no_punctuation_tokens,
            "boundary": format!("{:?}", args.corpus.boundary).to_lowercase(),
            "top_words": args.top_words,
            "total_vocab": args.total_vocab,
            "vocab_size": vocab.len(),
            "tokens": stream.len(),
            "bigrams": store.total(),
            "method": config.strategy.name(),
            "levels": levels,
            "seed": config.seed,
            "epsilon": config.epsilon,
            "max_iterations_per_level": config.max_iterations_per_level,
            "pin": args.pin,
            "pinned_words": config.pinned.len(),
            "parallel": config.parallel,
            "tags": args.tags,
            "stats": args.stats,
        }),
    );
    manifest.inputs = digests;
    manifest.time("read", read_time);
    manifest.time("count", count_time);
    manifest.time("cluster", cluster_time);
    for s in &out.stats {
        manifest.time(&format!("level {}", s.level), s.wall_time);
    }
    manifest.write_beside(&args.tags)?;
    Ok(out)
}
