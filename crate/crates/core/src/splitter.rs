//! Top-down binary splitting.
//!
//! At level `L` every class `c` with at least two words is split into the
//! children `2c` and `2c + 1`. Words then move one at a time (or one per
//! parent class per iteration) to the sibling child whenever that raises the
//! class mutual information, until no move improves it. A word's class id is
//! the integer value of its bit-path, so the path is its structured tag.
//!
//! Three strategies are supported:
//!
//! * [`Strategy::M`]: every word starts in a random child; the single best
//!   move over the whole vocabulary is committed per iteration.
//! * [`Strategy::Znr`]: every word starts in child `2c`, child `2c + 1` is
//!   empty; single best move per iteration.
//! * [`Strategy::Znrp`]: same start as `Znr`, but the best move of every
//!   parent class is committed in one iteration. If the batch as a whole does
//!   not raise the objective, moves are undone lowest-scoring first.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bigram::{class_matrix, BigramStore, ClassMatrix, ContextCache};
use crate::corpus::Vocabulary;
use crate::objective::{acmi, delta_acmi, MoveDelta, EPSILON};
use crate::{ClassId, Error, Result, WordId, MAX_LEVELS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Random initial bit, one move per iteration.
    M,
    /// All words start in the bit-0 child, one move per iteration.
    Znr,
    /// All words start in the bit-0 child, one move per parent class per
    /// iteration, with retraction.
    #[default]
    Znrp,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::M => "m",
            Strategy::Znr => "znr",
            Strategy::Znrp => "znrp",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(Strategy::M),
            "znr" => Ok(Strategy::Znr),
            "znrp" => Ok(Strategy::Znrp),
            _ => Err(Error::Config(format!(
                "unknown method {s:?} (expected m, znr or znrp)"
            ))),
        }
    }
}

/// A bit string of at most 32 bits, most significant bit first.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitPath {
    bits: u32,
    len: u8,
}

impl BitPath {
    pub const MAX_LEN: u8 = 32;

    pub fn new(bits: u32, len: u8) -> Self {
        assert!(len <= Self::MAX_LEN);
        let bits = if len == 32 { bits } else { bits & ((1u32 << len) - 1) };
        Self { bits, len }
    }

    pub fn len(self) -> u8 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Integer value of the path.
    pub fn value(self) -> u32 {
        self.bits
    }

    /// Bit at `index`, counted from the left.
    pub fn bit(self, index: u8) -> Option<u32> {
        (index < self.len).then(|| (self.bits >> (self.len - 1 - index)) & 1)
    }

    pub fn prefix(self, len: u8) -> Self {
        let len = len.min(self.len);
        Self::new(self.bits >> (self.len - len), len)
    }

    pub fn starts_with(self, other: BitPath) -> bool {
        other.len <= self.len && self.prefix(other.len) == other
    }

    pub fn common_prefix_len(self, other: BitPath) -> u8 {
        let mut n = 0;
        while n < self.len.min(other.len) && self.bit(n) == other.bit(n) {
            n += 1;
        }
        n
    }

    /// Every bit flipped.
    pub fn complement(self) -> Self {
        Self::new(!self.bits, self.len)
    }
}

impl fmt::Display for BitPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) == Some(1) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPath(\"{self}\")")
    }
}

impl FromStr for BitPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > Self::MAX_LEN as usize {
            return Err(Error::Config(format!("bit path {s:?} longer than 32 bits")));
        }
        let mut bits = 0u32;
        for ch in s.chars() {
            bits = (bits << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Config(format!("bit path {s:?} is not binary"))),
                };
        }
        Ok(Self::new(bits, s.len() as u8))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterConfig {
    pub strategy: Strategy,
    /// Number of levels `s`, 1..=10.
    pub levels: u8,
    /// Seed of the random initial assignment (strategy M only).
    pub seed: u64,
    pub epsilon: f64,
    /// Iteration cap per level; `None` means `4 * V`.
    pub max_iterations_per_level: Option<usize>,
    /// Fixed bit-paths. Paths shorter than `levels` continue with zeros.
    pub pinned: BTreeMap<WordId, BitPath>,
    /// Score candidates on the rayon thread pool. Results are identical.
    pub parallel: bool,
    /// Recompute the objective from scratch after every iteration for the
    /// per-iteration trace instead of accumulating deltas.
    pub full_trace: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::default(),
            levels: MAX_LEVELS,
            seed: 0,
            epsilon: EPSILON,
            max_iterations_per_level: None,
            pinned: BTreeMap::new(),
            parallel: false,
            full_trace: false,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self, vocab_size: usize) -> Result<()> {
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(Error::LevelCap {
                requested: self.levels as u32,
                max: MAX_LEVELS,
            });
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon {} must be finite and >= 0", self.epsilon)));
        }
        if let Some(&w) = self.pinned.keys().find(|&&w| w as usize >= vocab_size) {
            return Err(Error::Config(format!("pinned word id {w} outside the vocabulary")));
        }
        Ok(())
    }

    fn pin_table(&self, vocab_size: usize) -> Vec<Option<BitPath>> {
        let mut pins = vec![None; vocab_size];
        for (&w, &p) in &self.pinned {
            pins[w as usize] = Some(p);
        }
        pins
    }
}

/// Word-to-class assignment at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    level: u8,
    class_of: Vec<ClassId>,
    /// Number of meaningful bits per word. Smaller than `level` once the
    /// word's class stopped splitting; the remaining low bits are zero.
    depth: Vec<u8>,
}

impl Partition {
    /// Level 0: every word in class 0.
    pub fn root(vocab_size: usize) -> Self {
        Self {
            level: 0,
            class_of: vec![0; vocab_size],
            depth: vec![0; vocab_size],
        }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    /// Number of class slots at this level, `2^level`.
    pub fn classes(&self) -> usize {
        1 << self.level
    }

    pub fn class_of(&self, w: WordId) -> ClassId {
        self.class_of[w as usize]
    }

    pub fn assignment(&self) -> &[ClassId] {
        &self.class_of
    }

    pub fn depth(&self, w: WordId) -> u8 {
        self.depth[w as usize]
    }

    /// Structured tag of `w` so far.
    pub fn tag(&self, w: WordId) -> BitPath {
        let d = self.depth[w as usize];
        BitPath::new(self.class_of[w as usize] >> (self.level - d), d)
    }

    fn class_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0; self.classes()];
        for &c in &self.class_of {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

fn level_rng(seed: u64, level: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

/// Assigns the next bit of every word whose class has at least two words.
///
/// Pinned words take the bit dictated by their path. Other words get a
/// uniform random bit (strategy M, generator seeded by `(seed, level)`) or
/// bit 0 (ZNR/ZNRP). Words alone in their class keep their depth and sit in
/// the bit-0 child.
pub fn init_level(partition: &Partition, config: &ClusterConfig) -> Result<Partition> {
    let next = partition.level + 1;
    if next > config.levels || next > MAX_LEVELS {
        return Err(Error::LevelCap {
            requested: next as u32,
            max: config.levels.min(MAX_LEVELS),
        });
    }
    let sizes = partition.class_sizes();
    let mut rng = level_rng(config.seed, partition.level);
    let mut out = Partition {
        level: next,
        class_of: Vec::with_capacity(partition.class_of.len()),
        depth: partition.depth.clone(),
    };
    for (w, &c) in partition.class_of.iter().enumerate() {
        let mut bit = 0;
        if sizes[c as usize] >= 2 {
            out.depth[w] += 1;
            bit = match config.pinned.get(&(w as WordId)) {
                Some(path) => path.bit(partition.level).unwrap_or(0),
                None if config.strategy == Strategy::M => rng.gen_range(0..2),
                None => 0,
            };
        }
        out.class_of.push(2 * c + bit);
    }
    Ok(out)
}

/// One committed (and possibly retracted) move.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveRecord {
    pub iteration: usize,
    pub word: WordId,
    pub from: ClassId,
    pub to: ClassId,
    /// Score of the move when it was selected.
    pub delta: f64,
    pub retracted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelStats {
    pub level: u8,
    pub iterations: usize,
    pub committed_moves: usize,
    pub retracted_moves: usize,
    pub acmi_before: f64,
    pub acmi_after: f64,
    pub wall_time: Duration,
    /// The level stopped at the iteration cap rather than at a local optimum.
    pub hit_iteration_cap: bool,
    /// Objective at the start of the level and after every iteration.
    pub trace: Vec<f64>,
    pub moves: Vec<MoveRecord>,
}

/// Mutable clustering state: partition, class matrix and cached context
/// vectors, kept consistent with each other after every commit.
pub struct Clusterer<'a> {
    store: &'a BigramStore,
    config: ClusterConfig,
    pins: Vec<Option<BitPath>>,
    partition: Partition,
    matrix: ClassMatrix,
    contexts: ContextCache,
    sizes: Vec<u32>,
}

impl<'a> Clusterer<'a> {
    pub fn new(store: &'a BigramStore, config: ClusterConfig) -> Result<Self> {
        let v = store.vocab_size();
        config.validate(v)?;
        if v < 2 {
            return Err(Error::Config(format!("need at least 2 vocabulary entries, got {v}")));
        }
        if store.total() == 0 {
            return Err(Error::UndefinedObjective);
        }
        let partition = Partition::root(v);
        let matrix = class_matrix(store, partition.assignment(), 1)?;
        let contexts = ContextCache::new(store, partition.assignment())?;
        Ok(Self {
            store,
            pins: config.pin_table(v),
            config,
            sizes: partition.class_sizes(),
            partition,
            matrix,
            contexts,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn matrix(&self) -> &ClassMatrix {
        &self.matrix
    }

    pub fn contexts(&self) -> &ContextCache {
        &self.contexts
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.partition.level >= self.config.levels
    }

    /// Initializes and optimizes the next level.
    pub fn step(&mut self) -> Result<LevelStats> {
        let start = Instant::now();
        let partition = init_level(&self.partition, &self.config)?;
        self.matrix = class_matrix(self.store, partition.assignment(), partition.classes())?;
        self.contexts = ContextCache::new(self.store, partition.assignment())?;
        self.sizes = partition.class_sizes();
        self.partition = partition;
        let mut stats = self.run_level()?;
        stats.wall_time = start.elapsed();
        Ok(stats)
    }

    fn movable(&self, w: WordId) -> bool {
        let i = w as usize;
        self.pins[i].is_none()
            && self.partition.depth[i] == self.partition.level
            && self.sizes[self.partition.class_of[i] as usize] >= 2
    }

    fn score_one(&self, w: WordId) -> Result<MoveDelta> {
        let from = self.partition.class_of(w);
        delta_acmi(&self.matrix, self.contexts.get(w), from, from ^ 1)
    }

    /// Scores every movable word against the current (frozen) state, in
    /// word id order.
    fn score_candidates(&self) -> Result<Vec<MoveDelta>> {
        let words: Vec<WordId> = (0..self.store.vocab_size() as WordId)
            .filter(|&w| self.movable(w))
            .collect();
        if self.config.parallel {
            words.par_iter().map(|&w| self.score_one(w)).collect()
        } else {
            words.iter().map(|&w| self.score_one(w)).collect()
        }
    }

    /// Applies a move to matrix, context cache and partition; returns its
    /// exact delta under the state it was applied to.
    fn commit(&mut self, w: WordId, from: ClassId, to: ClassId) -> Result<f64> {
        let ctx = self.contexts.get(w);
        let delta = delta_acmi(&self.matrix, ctx, from, to)?.delta;
        self.matrix.apply_move(ctx, from, to)?;
        self.contexts.on_move(self.store, w, from, to)?;
        self.partition.class_of[w as usize] = to;
        self.sizes[from as usize] -= 1;
        self.sizes[to as usize] += 1;
        Ok(delta)
    }

    fn max_iterations(&self) -> usize {
        self.config
            .max_iterations_per_level
            .unwrap_or(4 * self.store.vocab_size())
    }

    fn trace_value(&self, running: f64) -> Result<f64> {
        if self.config.full_trace {
            acmi(&self.matrix)
        } else {
            Ok(running)
        }
    }

    fn run_level(&mut self) -> Result<LevelStats> {
        let eps = self.config.epsilon;
        let acmi_before = acmi(&self.matrix)?;
        let mut stats = LevelStats {
            level: self.partition.level,
            iterations: 0,
            committed_moves: 0,
            retracted_moves: 0,
            acmi_before,
            acmi_after: acmi_before,
            wall_time: Duration::ZERO,
            hit_iteration_cap: false,
            trace: vec![acmi_before],
            moves: Vec::new(),
        };
        let mut running = acmi_before;
        let cap = self.max_iterations();

        loop {
            if stats.iterations >= cap {
                stats.hit_iteration_cap = true;
                break;
            }
            let candidates = self.score_candidates()?;
            let gained = match self.config.strategy {
                Strategy::M | Strategy::Znr => self.single_move(&candidates, eps, &mut stats)?,
                Strategy::Znrp => self.parallel_moves(&candidates, eps, &mut stats)?,
            };
            let Some(gain) = gained else { break };
            stats.iterations += 1;
            running += gain;
            stats.trace.push(self.trace_value(running)?);
        }
        stats.acmi_after = acmi(&self.matrix)?;
        Ok(stats)
    }

    /// Commits the best improving candidate, if any.
    fn single_move(
        &mut self,
        candidates: &[MoveDelta],
        eps: f64,
        stats: &mut LevelStats,
    ) -> Result<Option<f64>> {
        let mut best: Option<&MoveDelta> = None;
        for c in candidates {
            // strict comparison keeps the lowest word id on ties
            if c.delta > eps && best.is_none_or(|b| c.delta > b.delta) {
                best = Some(c);
            }
        }
        let Some(&best) = best else { return Ok(None) };
        let gain = self.commit(best.word, best.from, best.to)?;
        stats.committed_moves += 1;
        stats.moves.push(MoveRecord {
            iteration: stats.iterations,
            word: best.word,
            from: best.from,
            to: best.to,
            delta: best.delta,
            retracted: false,
        });
        Ok(Some(gain))
    }

    /// Commits the best improving candidate of every parent class at once,
    /// then retracts the weakest moves while the batch gains nothing.
    fn parallel_moves(
        &mut self,
        candidates: &[MoveDelta],
        eps: f64,
        stats: &mut LevelStats,
    ) -> Result<Option<f64>> {
        let mut best: BTreeMap<ClassId, MoveDelta> = BTreeMap::new();
        for c in candidates.iter().filter(|c| c.delta > eps) {
            let parent = c.from >> 1;
            match best.get(&parent) {
                Some(b) if c.delta <= b.delta => {}
                _ => {
                    best.insert(parent, *c);
                }
            }
        }
        if best.is_empty() {
            return Ok(None);
        }

        let mut total = 0.0;
        let mut batch: Vec<MoveDelta> = Vec::with_capacity(best.len());
        for mv in best.into_values() {
            total += self.commit(mv.word, mv.from, mv.to)?;
            batch.push(mv);
        }
        stats.committed_moves += batch.len();

        // lowest individually scored move first
        batch.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.word.cmp(&b.word)));
        let mut retracted = 0;
        while total <= eps && batch.len() - retracted > 1 {
            let mv = batch[retracted];
            total += self.commit(mv.word, mv.to, mv.from)?;
            retracted += 1;
        }
        stats.retracted_moves += retracted;
        for (k, mv) in batch.iter().enumerate() {
            stats.moves.push(MoveRecord {
                iteration: stats.iterations,
                word: mv.word,
                from: mv.from,
                to: mv.to,
                delta: mv.delta,
                retracted: k < retracted,
            });
        }
        Ok(Some(total))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagRow {
    pub surface: String,
    pub tag: BitPath,
    pub frequency: u64,
    /// Integer value of `tag`.
    pub class_id: u32,
}

/// Final structured tag of every vocabulary entry, in word id order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagTable {
    pub rows: Vec<TagRow>,
}

impl TagTable {
    pub fn from_partition(vocab: &Vocabulary, partition: &Partition) -> Self {
        let rows = vocab
            .entries()
            .iter()
            .enumerate()
            .map(|(w, e)| {
                let tag = partition.tag(w as WordId);
                TagRow {
                    surface: e.surface.clone(),
                    tag,
                    frequency: e.frequency,
                    class_id: tag.value(),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn by_surface(&self) -> HashMap<&str, BitPath> {
        self.rows.iter().map(|r| (r.surface.as_str(), r.tag)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ClusterOutput {
    pub tags: TagTable,
    pub stats: Vec<LevelStats>,
    /// Assignment after each level, index 0 being level 1.
    pub partitions: Vec<Partition>,
}

/// Runs levels `1..=config.levels` and returns the resulting tags.
pub fn cluster(
    vocab: &Vocabulary,
    store: &BigramStore,
    config: &ClusterConfig,
) -> Result<ClusterOutput> {
    if vocab.len() != store.vocab_size() {
        return Err(Error::Contract(format!(
            "vocabulary has {} entries, bigram store {}",
            vocab.len(),
            store.vocab_size()
        )));
    }
    if store.total() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut clusterer = Clusterer::new(store, config.clone())?;
    let mut stats = Vec::with_capacity(config.levels as usize);
    let mut partitions = Vec::with_capacity(config.levels as usize);
    while !clusterer.is_done() {
        stats.push(clusterer.step()?);
        partitions.push(clusterer.partition().clone());
    }
    Ok(ClusterOutput {
        tags: TagTable::from_partition(vocab, clusterer.partition()),
        stats,
        partitions,
    })
}

/// Mean, over `trials` uniformly random two-class assignments of `v` words,
/// of the fewest single-word moves needed to reach a fixed target split of
/// sizes `target`, choosing the better of the two ways to label the classes.
pub fn oracle_min_moves(v: usize, target: (usize, usize), trials: usize, seed: u64) -> Result<f64> {
    if target.0 + target.1 != v {
        return Err(Error::Config(format!(
            "target sizes {target:?} do not add up to {v}"
        )));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0usize;
    for _ in 0..trials {
        // words 0..n1 belong to class 0, the rest to class 1
        let misplaced = (0..v)
            .filter(|&w| {
                let bit: usize = rng.gen_range(0..2);
                bit != usize::from(w >= target.0)
            })
            .count();
        sum += misplaced.min(v - misplaced);
    }
    Ok(sum as f64 / trials as f64)
}
