//! Word bigram counts and the class-level views derived from them.
//!
//! All counts are exact integers. Moving a word between two classes touches
//! only two rows and two columns of the [`ClassMatrix`]; the cells involved
//! are described by [`move_changes`] and shared by the objective (to score a
//! move) and by [`ClassMatrix::apply_move`] (to commit it).

use crate::corpus::TokenStream;
use crate::{ClassId, Error, Result, WordId};

/// Largest class matrix dimension (ten levels of binary splits).
pub const MAX_CLASSES: usize = 1 << crate::MAX_LEVELS;

/// Sparse word bigram counts with mirrored successor and predecessor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigramStore {
    succ: Vec<Vec<(WordId, u64)>>,
    pred: Vec<Vec<(WordId, u64)>>,
    succ_total: Vec<u64>,
    pred_total: Vec<u64>,
    total: u64,
}

/// Counts adjacent pairs inside each segment of the stream.
pub fn count_bigrams(stream: &TokenStream, vocab_size: usize) -> Result<BigramStore> {
    let mut pairs: Vec<(WordId, WordId)> = Vec::with_capacity(stream.len());
    for segment in stream.segments() {
        if let Some(&bad) = segment.iter().find(|&&id| id as usize >= vocab_size) {
            return Err(Error::Contract(format!(
                "word id {bad} out of range for vocabulary of {vocab_size}"
            )));
        }
        pairs.extend(segment.windows(2).map(|w| (w[0], w[1])));
    }
    pairs.sort_unstable();

    let mut succ = vec![Vec::new(); vocab_size];
    let mut pred = vec![Vec::new(); vocab_size];
    let mut succ_total = vec![0; vocab_size];
    let mut pred_total = vec![0; vocab_size];
    let mut i = 0;
    while i < pairs.len() {
        let pair = pairs[i];
        let run = pairs[i..].iter().take_while(|&&p| p == pair).count();
        let (w, v) = pair;
        succ[w as usize].push((v, run as u64));
        pred[v as usize].push((w, run as u64));
        succ_total[w as usize] += run as u64;
        pred_total[v as usize] += run as u64;
        i += run;
    }
    for list in &mut pred {
        list.sort_unstable();
    }
    Ok(BigramStore {
        succ,
        pred,
        succ_total,
        pred_total,
        total: pairs.len() as u64,
    })
}

impl BigramStore {
    pub fn vocab_size(&self) -> usize {
        self.succ.len()
    }

    /// Total number of bigrams, `T`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `(next word, count)` pairs sorted by word id.
    pub fn successors(&self, w: WordId) -> &[(WordId, u64)] {
        &self.succ[w as usize]
    }

    /// `(previous word, count)` pairs sorted by word id.
    pub fn predecessors(&self, w: WordId) -> &[(WordId, u64)] {
        &self.pred[w as usize]
    }

    pub fn successor_total(&self, w: WordId) -> u64 {
        self.succ_total[w as usize]
    }

    pub fn predecessor_total(&self, w: WordId) -> u64 {
        self.pred_total[w as usize]
    }

    /// Count of the bigram `(w, v)`.
    pub fn count(&self, w: WordId, v: WordId) -> u64 {
        let list = &self.succ[w as usize];
        list.binary_search_by_key(&v, |&(x, _)| x)
            .map(|i| list[i].1)
            .unwrap_or(0)
    }
}

/// Dense `C x C` matrix of class bigram counts with row and column marginals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMatrix {
    classes: usize,
    counts: Vec<u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    total: u64,
}

fn check_assignment(assignment: &[ClassId], vocab_size: usize, classes: usize) -> Result<()> {
    if classes == 0 || classes > MAX_CLASSES {
        return Err(Error::Contract(format!(
            "class count {classes} outside 1..={MAX_CLASSES}"
        )));
    }
    if assignment.len() != vocab_size {
        return Err(Error::Contract(format!(
            "assignment covers {} words, vocabulary has {vocab_size}",
            assignment.len()
        )));
    }
    if let Some((w, &c)) = assignment
        .iter()
        .enumerate()
        .find(|(_, &c)| c as usize >= classes)
    {
        return Err(Error::Contract(format!(
            "word {w} assigned to class {c}, but only {classes} classes exist"
        )));
    }
    Ok(())
}

/// Builds the class matrix from the successor lists.
pub fn class_matrix(
    store: &BigramStore,
    assignment: &[ClassId],
    classes: usize,
) -> Result<ClassMatrix> {
    check_assignment(assignment, store.vocab_size(), classes)?;
    let mut m = ClassMatrix::zeros(classes);
    for (w, list) in store.succ.iter().enumerate() {
        let i = assignment[w] as usize;
        for &(v, n) in list {
            m.add(i, assignment[v as usize] as usize, n);
        }
    }
    Ok(m)
}

impl ClassMatrix {
    fn zeros(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
            rows: vec![0; classes],
            cols: vec![0; classes],
            total: 0,
        }
    }

    fn add(&mut self, i: usize, j: usize, n: u64) {
        self.counts[i * self.classes + j] += n;
        self.rows[i] += n;
        self.cols[j] += n;
        self.total += n;
    }

    /// Same matrix, built from the predecessor lists instead.
    pub fn from_predecessors(
        store: &BigramStore,
        assignment: &[ClassId],
        classes: usize,
    ) -> Result<Self> {
        check_assignment(assignment, store.vocab_size(), classes)?;
        let mut m = Self::zeros(classes);
        for (v, list) in store.pred.iter().enumerate() {
            let j = assignment[v] as usize;
            for &(w, n) in list {
                m.add(assignment[w as usize] as usize, j, n);
            }
        }
        Ok(m)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn get(&self, i: ClassId, j: ClassId) -> u64 {
        self.counts[i as usize * self.classes + j as usize]
    }

    #[inline]
    pub fn row(&self, i: ClassId) -> u64 {
        self.rows[i as usize]
    }

    #[inline]
    pub fn col(&self, j: ClassId) -> u64 {
        self.cols[j as usize]
    }

    /// Moves word `w` (described by `ctx`) from class `from` to class `to`.
    ///
    /// Fails without modifying the matrix if any count would go negative,
    /// which means `ctx` does not describe the current assignment.
    pub fn apply_move(&mut self, ctx: &ContextVectors, from: ClassId, to: ClassId) -> Result<()> {
        let changes = move_changes(ctx, from, to, self.classes)?;
        let mut new_values = Vec::with_capacity(changes.len());
        for ch in &changes {
            new_values.push(ch.apply(self.get(ch.row, ch.col))?);
        }
        let out = ctx.successor_total();
        let inc = ctx.predecessor_total();
        if self.row(from) < out || self.col(from) < inc {
            return Err(Error::Inconsistent(format!(
                "marginals of class {from} smaller than the context of word {}",
                ctx.word
            )));
        }
        for (ch, n) in changes.iter().zip(new_values) {
            self.counts[ch.row as usize * self.classes + ch.col as usize] = n;
        }
        self.rows[from as usize] -= out;
        self.rows[to as usize] += out;
        self.cols[from as usize] -= inc;
        self.cols[to as usize] += inc;
        Ok(())
    }
}

/// Class context of one word: how many of its successors (`left`) and
/// predecessors (`right`) fall into each class, plus its self-bigram count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextVectors {
    pub word: WordId,
    /// Class of `word` under the assignment these vectors describe.
    pub class: ClassId,
    left: Vec<(ClassId, u64)>,
    right: Vec<(ClassId, u64)>,
    self_count: u64,
    left_total: u64,
    right_total: u64,
}

fn tally(list: &[(WordId, u64)], assignment: &[ClassId]) -> Vec<(ClassId, u64)> {
    let mut out: Vec<(ClassId, u64)> = list
        .iter()
        .map(|&(v, n)| (assignment[v as usize], n))
        .collect();
    out.sort_unstable_by_key(|&(c, _)| c);
    out.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    out
}

fn sparse_get(list: &[(ClassId, u64)], c: ClassId) -> u64 {
    list.binary_search_by_key(&c, |&(k, _)| k)
        .map(|i| list[i].1)
        .unwrap_or(0)
}

fn sparse_shift(
    list: &mut Vec<(ClassId, u64)>,
    from: ClassId,
    to: ClassId,
    amount: u64,
) -> Result<()> {
    let i = list
        .binary_search_by_key(&from, |&(k, _)| k)
        .ok()
        .filter(|&i| list[i].1 >= amount)
        .ok_or_else(|| Error::Inconsistent(format!("context count for class {from} underflows")))?;
    list[i].1 -= amount;
    if list[i].1 == 0 {
        list.remove(i);
    }
    match list.binary_search_by_key(&to, |&(k, _)| k) {
        Ok(j) => list[j].1 += amount,
        Err(j) => list.insert(j, (to, amount)),
    }
    Ok(())
}

/// Computes the context vectors of `w` from scratch.
pub fn context_vectors(
    store: &BigramStore,
    assignment: &[ClassId],
    w: WordId,
) -> Result<ContextVectors> {
    if w as usize >= store.vocab_size() || assignment.len() != store.vocab_size() {
        return Err(Error::Contract(format!(
            "word {w} unknown or assignment size mismatch"
        )));
    }
    Ok(ContextVectors {
        word: w,
        class: assignment[w as usize],
        left: tally(store.successors(w), assignment),
        right: tally(store.predecessors(w), assignment),
        self_count: store.count(w, w),
        left_total: store.successor_total(w),
        right_total: store.predecessor_total(w),
    })
}

impl ContextVectors {
    /// Bigrams `(word, v)` with `v` in class `c`.
    pub fn left(&self, c: ClassId) -> u64 {
        sparse_get(&self.left, c)
    }

    /// Bigrams `(v, word)` with `v` in class `c`.
    pub fn right(&self, c: ClassId) -> u64 {
        sparse_get(&self.right, c)
    }

    pub fn left_entries(&self) -> &[(ClassId, u64)] {
        &self.left
    }

    pub fn right_entries(&self) -> &[(ClassId, u64)] {
        &self.right
    }

    /// Count of the bigram `(word, word)`.
    pub fn self_count(&self) -> u64 {
        self.self_count
    }

    pub fn successor_total(&self) -> u64 {
        self.left_total
    }

    pub fn predecessor_total(&self) -> u64 {
        self.right_total
    }

    /// Whether the word occurs in any bigram at all.
    pub fn is_empty(&self) -> bool {
        self.left_total == 0 && self.right_total == 0
    }
}

/// Signed change of one class matrix cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellChange {
    pub row: ClassId,
    pub col: ClassId,
    pub delta: i64,
}

impl CellChange {
    /// New value of the cell given its current value.
    pub fn apply(&self, current: u64) -> Result<u64> {
        current.checked_add_signed(self.delta).ok_or_else(|| {
            Error::Inconsistent(format!(
                "cell ({}, {}) would become negative ({current} {:+})",
                self.row, self.col, self.delta
            ))
        })
    }
}

/// Cells of the class matrix that change when `ctx.word` moves from `from`
/// to `to`, with zero changes omitted.
///
/// Outside the 2x2 block `{from, to}^2` the changes are the context vectors
/// themselves. Inside it, the self-bigram `(w, w)` moves from `(from, from)`
/// to `(to, to)`, and the remaining context in classes `from`/`to` swaps
/// between the off-diagonal cells.
pub fn move_changes(
    ctx: &ContextVectors,
    from: ClassId,
    to: ClassId,
    classes: usize,
) -> Result<Vec<CellChange>> {
    if from == to {
        return Err(Error::Contract("a move needs two distinct classes".into()));
    }
    if from as usize >= classes || to as usize >= classes {
        return Err(Error::Contract(format!(
            "move {from} -> {to} outside {classes} classes"
        )));
    }
    if ctx.class != from {
        return Err(Error::Contract(format!(
            "word {} is in class {}, not {from}",
            ctx.word, ctx.class
        )));
    }
    let s = ctx.self_count as i64;
    // context excluding the self-bigram
    let lf = ctx.left(from) as i64 - s;
    let rf = ctx.right(from) as i64 - s;
    let lt = ctx.left(to) as i64;
    let rt = ctx.right(to) as i64;
    if lf < 0 || rf < 0 {
        return Err(Error::Inconsistent(format!(
            "context of word {} lacks its own self-bigram",
            ctx.word
        )));
    }

    let mut out = Vec::with_capacity(2 * (ctx.left.len() + ctx.right.len()) + 4);
    let mut push = |row, col, delta: i64| {
        if delta != 0 {
            out.push(CellChange { row, col, delta });
        }
    };
    push(from, from, -(lf + rf + s));
    push(from, to, rf - lt);
    push(to, from, lf - rt);
    push(to, to, lt + rt + s);
    for &(c, n) in &ctx.left {
        if c != from && c != to {
            push(from, c, -(n as i64));
            push(to, c, n as i64);
        }
    }
    for &(c, n) in &ctx.right {
        if c != from && c != to {
            push(c, from, -(n as i64));
            push(c, to, n as i64);
        }
    }
    Ok(out)
}

/// Context vectors of every word, kept in step with the assignment.
#[derive(Clone, Debug)]
pub struct ContextCache {
    vectors: Vec<ContextVectors>,
}

impl ContextCache {
    pub fn new(store: &BigramStore, assignment: &[ClassId]) -> Result<Self> {
        let vectors = (0..store.vocab_size() as WordId)
            .map(|w| context_vectors(store, assignment, w))
            .collect::<Result<_>>()?;
        Ok(Self { vectors })
    }

    pub fn get(&self, w: WordId) -> &ContextVectors {
        &self.vectors[w as usize]
    }

    /// Repairs the vectors after word `u` moved from `from` to `to`. Only the
    /// neighbours of `u` (and `u` itself) are touched.
    pub fn on_move(&mut self, store: &BigramStore, u: WordId, from: ClassId, to: ClassId) -> Result<()> {
        for &(v, n) in store.predecessors(u) {
            sparse_shift(&mut self.vectors[v as usize].left, from, to, n)?;
        }
        for &(v, n) in store.successors(u) {
            sparse_shift(&mut self.vectors[v as usize].right, from, to, n)?;
        }
        self.vectors[u as usize].class = to;
        Ok(())
    }
}
