//! Tokenization and vocabulary construction.
//!
//! The vocabulary keeps the `top_k` most frequent tokens as individual
//! entries. Every rarer token is folded into a pseudo-word named after its
//! morphological class and character length, e.g. `<numeric3>` for `123`,
//! so its bigram context still takes part in clustering.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use crate::{Error, Result, WordId};

/// Separator emitted between lines when
/// [`SentenceBoundary::BoundaryToken`] is selected. It contains a space, so
/// tokenization can never produce it from input text.
pub const BOUNDARY_TOKEN: &str = "<sentence boundary>";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SentenceBoundary {
    /// Line breaks are plain whitespace; bigrams run across them.
    #[default]
    None,
    /// Every line is its own segment; bigrams never cross a line break.
    BoundaryToken,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizerOptions {
    pub lowercase: bool,
    /// Split maximal runs of punctuation into their own tokens. When false,
    /// tokens are whitespace-delimited chunks with punctuation attached.
    pub punctuation_as_tokens: bool,
    pub sentence_boundary: SentenceBoundary,
}

impl Default for TokenizerOptions {
    fn default() -> Self {
        Self {
            lowercase: false,
            punctuation_as_tokens: true,
            sentence_boundary: SentenceBoundary::None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharKind {
    Space,
    Word,
    Punct,
}

fn char_kind(c: char) -> CharKind {
    if c.is_whitespace() {
        CharKind::Space
    } else if c.is_alphanumeric() {
        CharKind::Word
    } else {
        CharKind::Punct
    }
}

fn push_token(out: &mut Vec<String>, token: &str, lowercase: bool) {
    if lowercase {
        out.push(token.to_lowercase());
    } else {
        out.push(token.to_owned());
    }
}

fn tokenize_line(line: &str, options: &TokenizerOptions, out: &mut Vec<String>) {
    let mut start: Option<(usize, CharKind)> = None;
    for (i, c) in line.char_indices() {
        let mut kind = char_kind(c);
        if !options.punctuation_as_tokens && kind == CharKind::Punct {
            kind = CharKind::Word;
        }
        match start {
            Some((_, k)) if k == kind => {}
            Some((s, _)) => {
                push_token(out, &line[s..i], options.lowercase);
                start = (kind != CharKind::Space).then_some((i, kind));
            }
            None if kind != CharKind::Space => start = Some((i, kind)),
            None => {}
        }
    }
    if let Some((s, _)) = start {
        push_token(out, &line[s..], options.lowercase);
    }
}

/// Splits text into tokens.
///
/// Tokens are maximal runs of alphanumeric characters and (when
/// `punctuation_as_tokens` is set) maximal runs of other non-whitespace
/// characters. With [`SentenceBoundary::BoundaryToken`], [`BOUNDARY_TOKEN`]
/// is placed between consecutive non-empty lines.
pub fn tokenize(text: &str, options: &TokenizerOptions) -> Vec<String> {
    let mut out = Vec::new();
    match options.sentence_boundary {
        SentenceBoundary::None => tokenize_line(text, options, &mut out),
        SentenceBoundary::BoundaryToken => {
            for line in text.lines() {
                let before = out.len();
                if before > 0 {
                    out.push(BOUNDARY_TOKEN.to_owned());
                }
                tokenize_line(line, options, &mut out);
                if out.len() == before + 1 {
                    // empty line: drop the separator just pushed
                    out.pop();
                }
            }
        }
    }
    out
}

/// Like [`tokenize`], but validates the encoding first.
pub fn tokenize_bytes(bytes: &[u8], options: &TokenizerOptions) -> Result<Vec<String>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize(text, options))
}

/// Morphological class of a rare token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MorphClass {
    /// Digits only.
    Numeric,
    /// Letters and digits, at least one of each.
    Alphanumeric,
    /// Letters only, with at least one of a/e/i/o/u.
    Word,
    /// Letters only, no vowel.
    Acronym,
    /// None of the above.
    Nota,
}

impl MorphClass {
    pub fn of(token: &str) -> Self {
        let mut digits = 0usize;
        let mut letters = 0usize;
        let mut vowel = false;
        let mut other = false;
        for c in token.chars() {
            if c.is_numeric() {
                digits += 1;
            } else if c.is_alphabetic() {
                letters += 1;
                vowel |= matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u');
            } else {
                other = true;
            }
        }
        match (other, digits > 0, letters > 0) {
            (true, _, _) | (false, false, false) => MorphClass::Nota,
            (false, true, false) => MorphClass::Numeric,
            (false, true, true) => MorphClass::Alphanumeric,
            (false, false, true) if vowel => MorphClass::Word,
            (false, false, true) => MorphClass::Acronym,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MorphClass::Numeric => "numeric",
            MorphClass::Alphanumeric => "alphanumeric",
            MorphClass::Word => "word",
            MorphClass::Acronym => "acronym",
            MorphClass::Nota => "nota",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "numeric" => MorphClass::Numeric,
            "alphanumeric" => MorphClass::Alphanumeric,
            "word" => MorphClass::Word,
            "acronym" => MorphClass::Acronym,
            "nota" => MorphClass::Nota,
            _ => return None,
        })
    }
}

impl fmt::Display for MorphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pseudo-word label for a rare token: `<` + class + character count + `>`.
pub fn classify_rare(token: &str) -> String {
    format!("<{}{}>", MorphClass::of(token), token.chars().count())
}

/// Whether `token` has the exact shape of a pseudo-word label. Such tokens
/// are reserved: they always map to the pseudo entry of the same name.
pub fn is_pseudo_label(token: &str) -> bool {
    let Some(inner) = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')) else {
        return false;
    };
    let split = inner.find(|c: char| c.is_ascii_digit()).unwrap_or(inner.len());
    let (name, len) = inner.split_at(split);
    MorphClass::from_name(name).is_some()
        && !len.is_empty()
        && len.bytes().all(|b| b.is_ascii_digit())
        && !len.starts_with('0')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryKind {
    Lexical,
    Pseudo,
}

impl EntryKind {
    pub fn name(self) -> &'static str {
        match self {
            EntryKind::Lexical => "lexical",
            EntryKind::Pseudo => "pseudo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabEntry {
    pub surface: String,
    pub frequency: u64,
    pub kind: EntryKind,
}

/// Ranked lexicon: lexical entries first (by descending frequency, ties by
/// surface), then pseudo-word groups in the same order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    lexical: HashMap<String, WordId>,
    pseudo: HashMap<String, WordId>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn entry(&self, id: WordId) -> &VocabEntry {
        &self.entries[id as usize]
    }

    pub fn lexical_count(&self) -> usize {
        self.lexical.len()
    }

    pub fn pseudo_count(&self) -> usize {
        self.pseudo.len()
    }

    /// Id of a lexical entry with this exact surface form.
    pub fn lexical_id(&self, surface: &str) -> Option<WordId> {
        self.lexical.get(surface).copied()
    }

    /// Id a token would be coded as: its lexical entry, else its pseudo group.
    pub fn lookup(&self, token: &str) -> Option<WordId> {
        if is_pseudo_label(token) {
            return self.pseudo.get(token).copied();
        }
        self.lexical
            .get(token)
            .or_else(|| self.pseudo.get(&classify_rare(token)))
            .copied()
    }

    /// Surface forms of the stream, with [`BOUNDARY_TOKEN`] between segments.
    pub fn decode(&self, stream: &TokenStream) -> Vec<String> {
        let mut out = Vec::with_capacity(stream.ids.len() + stream.boundaries.len());
        for (i, segment) in stream.segments().enumerate() {
            if i > 0 {
                out.push(BOUNDARY_TOKEN.to_owned());
            }
            out.extend(segment.iter().map(|&id| self.entry(id).surface.clone()));
        }
        out
    }

    /// TSV export with columns `word_id, surface, frequency, kind`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("word_id\tsurface\tfrequency\tkind\n");
        for (id, e) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{id}\t{}\t{}\t{}", e.surface, e.frequency, e.kind.name());
        }
        out
    }
}

/// Word ids in corpus order. `boundaries` holds the positions at which a new
/// segment starts; no bigram is counted across them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub ids: Vec<WordId>,
    pub boundaries: Vec<usize>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = &[WordId]> + '_ {
        let mut starts = Vec::with_capacity(self.boundaries.len() + 2);
        starts.push(0);
        starts.extend(self.boundaries.iter().copied());
        starts.push(self.ids.len());
        let ids = &self.ids;
        (0..starts.len() - 1)
            .map(move |i| &ids[starts[i]..starts[i + 1]])
            .filter(|s| !s.is_empty())
    }
}

/// Frequency table over non-boundary tokens, split into ordinary tokens
/// ranked for the top-K cut and tokens that already are pseudo labels.
struct Counts<'a> {
    ranked: Vec<(&'a str, u64)>,
    prelabeled: HashMap<&'a str, u64>,
    total: u64,
}

fn count_tokens<'a, S: AsRef<str>>(tokens: &'a [S]) -> Counts<'a> {
    let mut plain: HashMap<&str, u64> = HashMap::new();
    let mut prelabeled: HashMap<&str, u64> = HashMap::new();
    let mut total = 0;
    for t in tokens {
        let t = t.as_ref();
        if t == BOUNDARY_TOKEN {
            continue;
        }
        total += 1;
        if is_pseudo_label(t) {
            *prelabeled.entry(t).or_default() += 1;
        } else {
            *plain.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<_> = plain.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Counts {
        ranked,
        prelabeled,
        total,
    }
}

fn pseudo_groups(counts: &Counts<'_>, top_k: usize) -> HashMap<String, u64> {
    let mut groups: HashMap<String, u64> = counts
        .prelabeled
        .iter()
        .map(|(k, &v)| ((*k).to_owned(), v))
        .collect();
    for &(t, f) in counts.ranked.iter().skip(top_k) {
        *groups.entry(classify_rare(t)).or_default() += f;
    }
    groups
}

/// Builds the vocabulary and codes the token sequence against it.
///
/// [`BOUNDARY_TOKEN`] occurrences are not words; they become segment
/// boundaries of the returned stream.
pub fn build_vocabulary<S: AsRef<str>>(
    tokens: &[S],
    top_k: usize,
) -> Result<(Vocabulary, TokenStream)> {
    if top_k == 0 {
        return Err(Error::Config("top_k must be at least 1".into()));
    }
    let counts = count_tokens(tokens);
    if counts.total == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut entries = Vec::new();
    let mut lexical = HashMap::new();
    for &(t, f) in counts.ranked.iter().take(top_k) {
        lexical.insert(t.to_owned(), entries.len() as WordId);
        entries.push(VocabEntry {
            surface: t.to_owned(),
            frequency: f,
            kind: EntryKind::Lexical,
        });
    }
    let mut groups: Vec<_> = pseudo_groups(&counts, top_k).into_iter().collect();
    groups.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut pseudo = HashMap::new();
    for (label, f) in groups {
        pseudo.insert(label.clone(), entries.len() as WordId);
        entries.push(VocabEntry {
            surface: label,
            frequency: f,
            kind: EntryKind::Pseudo,
        });
    }
    let vocab = Vocabulary {
        entries,
        lexical,
        pseudo,
    };

    let mut stream = TokenStream::default();
    for t in tokens {
        let t = t.as_ref();
        if t == BOUNDARY_TOKEN {
            if !stream.ids.is_empty() && stream.boundaries.last() != Some(&stream.ids.len()) {
                stream.boundaries.push(stream.ids.len());
            }
            continue;
        }
        let id = vocab
            .lookup(t)
            .ok_or_else(|| Error::Inconsistent(format!("token {t:?} has no vocabulary entry")))?;
        stream.ids.push(id);
    }
    if stream.boundaries.last() == Some(&stream.ids.len()) {
        stream.boundaries.pop();
    }
    Ok((vocab, stream))
}

/// Smallest `top_k` for which [`build_vocabulary`] yields exactly `target`
/// entries (lexical plus pseudo groups).
pub fn top_k_for_vocab_size<S: AsRef<str>>(tokens: &[S], target: usize) -> Result<usize> {
    let counts = count_tokens(tokens);
    if counts.total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let size = |k: usize| k.min(counts.ranked.len()) + pseudo_groups(&counts, k).len();
    // size(k) is non-decreasing in k with steps of 0 or 1
    let (mut lo, mut hi) = (1usize, counts.ranked.len().max(1));
    if target < size(lo) || target > size(hi) {
        return Err(Error::Config(format!(
            "no top-K gives a vocabulary of {target} (reachable range {}..={})",
            size(lo),
            size(hi)
        )));
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if size(mid) < target {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
