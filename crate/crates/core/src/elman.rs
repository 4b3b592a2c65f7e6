//! Elman's toy grammar (16 sentence templates over 12 word classes, 29
//! words) as a corpus generator, and a scorer that compares a tag tree with
//! the grammar's known word groups.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::splitter::{BitPath, TagTable};
use crate::{Error, Result};

/// Word classes and their members, as printed in the original tables
/// ("break" appears both as a food noun and as two kinds of verb).
pub const WORD_CLASSES: [(&str, &[&str]); 12] = [
    ("noun-human", &["man", "woman", "girl", "boy"]),
    (
        "noun-anim",
        &["cat", "mouse", "dog", "man", "woman", "girl", "boy", "dragon", "monster", "lion"],
    ),
    (
        "noun-inan",
        &["book", "rock", "car", "cookie", "break", "bread", "sandwich", "glass", "plate"],
    ),
    ("noun-agress", &["dragon", "monster", "lion"]),
    ("noun-fragile", &["glass", "plate"]),
    ("noun-food", &["cookie", "break", "bread", "sandwich"]),
    ("verb-intran", &["think", "sleep", "exist"]),
    ("verb-tran", &["see", "chase", "like"]),
    ("verb-agpat", &["move", "break"]),
    ("verb-percept", &["smell", "see"]),
    ("verb-destroy", &["break", "smash"]),
    ("verb-eat", &["eat"]),
];

/// Right-hand sides of the sentence productions.
pub const SENTENCE_PRODUCTIONS: [&[&str]; 16] = [
    &["noun-human", "verb-eat", "noun-food"],
    &["noun-human", "verb-percept", "noun-inan"],
    &["noun-human", "verb-destroy", "noun-fragile"],
    &["noun-human", "verb-intran"],
    &["noun-human", "verb-tran", "noun-human"],
    &["noun-human", "verb-agpat", "noun-inan"],
    &["noun-human", "verb-agpat"],
    &["noun-anim", "verb-eat", "noun-food"],
    &["noun-anim", "verb-tran", "noun-anim"],
    &["noun-anim", "verb-agpat", "noun-inan"],
    &["noun-anim", "verb-agpat"],
    &["noun-inan", "verb-agpat"],
    &["noun-agress", "verb-destroy", "noun-fragile"],
    &["noun-agress", "verb-eat", "noun-human"],
    &["noun-agress", "verb-eat", "noun-anim"],
    &["noun-agress", "verb-eat", "noun-food"],
];

#[derive(Clone, Debug)]
pub struct ElmanGrammar {
    productions: Vec<Vec<&'static [&'static str]>>,
}

impl Default for ElmanGrammar {
    fn default() -> Self {
        Self::new()
    }
}

impl ElmanGrammar {
    pub fn new() -> Self {
        let members: HashMap<&str, &'static [&'static str]> = WORD_CLASSES.iter().copied().collect();
        let productions = SENTENCE_PRODUCTIONS
            .iter()
            .map(|rhs| rhs.iter().map(|class| members[class]).collect())
            .collect();
        Self { productions }
    }

    pub fn production_count(&self) -> usize {
        self.productions.len()
    }

    /// The 29 distinct words, sorted.
    pub fn lexicon(&self) -> Vec<&'static str> {
        let mut words: Vec<&str> = WORD_CLASSES.iter().flat_map(|(_, w)| w.iter().copied()).collect();
        words.sort_unstable();
        words.dedup();
        words
    }

    /// Draws one sentence: a uniform production, then a uniform word for
    /// each of its classes. Also returns the production index.
    pub fn sentence<R: Rng>(&self, rng: &mut R) -> (usize, Vec<&'static str>) {
        let p = rng.gen_range(0..self.productions.len());
        let words = self.productions[p]
            .iter()
            .map(|class| class[rng.gen_range(0..class.len())])
            .collect();
        (p, words)
    }

    /// `n` sentences from a generator seeded with `seed`. No end-of-sentence
    /// marker is part of the sentences.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Vec<Vec<&'static str>>> {
        if n == 0 {
            return Err(Error::Config("at least one sentence is required".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n).map(|_| self.sentence(&mut rng).1).collect())
    }
}

/// Convenience wrapper: `n` sentences concatenated into one token sequence.
pub fn generate(n: usize, seed: u64) -> Result<Vec<&'static str>> {
    Ok(ElmanGrammar::new().generate(n, seed)?.concat())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartOfSpeech {
    Noun,
    Verb,
}

impl PartOfSpeech {
    fn name(self) -> &'static str {
        match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldGroup {
    pub name: String,
    pub pos: PartOfSpeech,
    pub words: Vec<String>,
}

/// Disjoint gold word groups plus words that belong to no single group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldReference {
    pub groups: Vec<GoldGroup>,
    /// Ambiguous words, with a part of speech when it is still unambiguous.
    pub ambiguous: Vec<(String, Option<PartOfSpeech>)>,
}

impl GoldReference {
    /// Reference for the Elman grammar.
    pub fn elman() -> Self {
        use PartOfSpeech::*;
        let g = |name: &str, pos, words: &[&str]| GoldGroup {
            name: name.into(),
            pos,
            words: words.iter().map(|w| w.to_string()).collect(),
        };
        Self {
            groups: vec![
                g("HUM", Noun, &["man", "woman", "girl", "boy"]),
                g("ANIM", Noun, &["cat", "mouse", "dog"]),
                g("AGGR", Noun, &["dragon", "monster", "lion"]),
                g("FRAG", Noun, &["glass", "plate"]),
                g("FOOD", Noun, &["cookie", "bread", "sandwich"]),
                g("INAN", Noun, &["book", "rock", "car"]),
                g("VINTRAN", Verb, &["think", "sleep", "exist"]),
                g("VTRAN", Verb, &["chase", "like"]),
                g("VAGPAT", Verb, &["move"]),
                g("VPERCEPT", Verb, &["smell"]),
                g("VDESTROY", Verb, &["smash"]),
                g("VEAT", Verb, &["eat"]),
            ],
            ambiguous: vec![("break".into(), None), ("see".into(), Some(Verb))],
        }
    }

    /// Every word the tag table must cover.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.groups
            .iter()
            .flat_map(|g| g.words.iter().map(String::as_str))
            .chain(self.ambiguous.iter().map(|(w, _)| w.as_str()))
    }

    /// TSV with columns `word, group, pos`; `-` marks "none".
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("word\tgroup\tpos\n");
        for g in &self.groups {
            for w in &g.words {
                let _ = writeln!(out, "{w}\t{}\t{}", g.name, g.pos.name());
            }
        }
        for (w, pos) in &self.ambiguous {
            let _ = writeln!(out, "{w}\t-\t{}", pos.map_or("-", |p| p.name()));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim_end() == "word\tgroup\tpos" => {}
            other => {
                return Err(Error::Config(format!(
                    "gold file must start with the header word<TAB>group<TAB>pos, found {other:?}"
                )))
            }
        }
        let mut groups: Vec<GoldGroup> = Vec::new();
        let mut ambiguous = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            let [word, group, pos] = fields[..] else {
                return Err(Error::Config(format!("gold line {}: expected 3 fields", n + 2)));
            };
            if !seen.insert(word.to_owned()) {
                return Err(Error::Config(format!("gold word {word:?} listed twice")));
            }
            let pos = match pos {
                "noun" => Some(PartOfSpeech::Noun),
                "verb" => Some(PartOfSpeech::Verb),
                "-" => None,
                other => return Err(Error::Config(format!("unknown part of speech {other:?}"))),
            };
            if group == "-" {
                ambiguous.push((word.to_owned(), pos));
                continue;
            }
            let pos = pos.ok_or_else(|| {
                Error::Config(format!("group word {word:?} needs a part of speech"))
            })?;
            match groups.iter_mut().find(|g| g.name == group) {
                Some(g) if g.pos != pos => {
                    return Err(Error::Config(format!("group {group} mixes parts of speech")))
                }
                Some(g) => g.words.push(word.to_owned()),
                None => groups.push(GoldGroup {
                    name: group.to_owned(),
                    pos,
                    words: vec![word.to_owned()],
                }),
            }
        }
        Ok(Self { groups, ambiguous })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorLabel {
    None,
    Low,
    Medium,
    High,
}

impl ErrorLabel {
    pub fn name(self) -> &'static str {
        match self {
            ErrorLabel::None => "none",
            ErrorLabel::Low => "low",
            ErrorLabel::Medium => "medium",
            ErrorLabel::High => "high",
        }
    }
}

impl fmt::Display for ErrorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// First bit separates nouns from verbs exactly.
    pub level1_separation: bool,
    pub dendrogram_purity: f64,
    /// Groups with at least two words, in gold order.
    pub per_group_purity: Vec<(String, f64)>,
    pub error_label: ErrorLabel,
}

/// Group purity below which a group counts as mis-clustered.
pub const PURITY_THRESHOLD: f64 = 0.95;

pub fn evaluate(tags: &TagTable, gold: &GoldReference) -> Result<EvalReport> {
    evaluate_with_threshold(tags, gold, PURITY_THRESHOLD)
}

/// Scores a tag table against gold groups.
///
/// For a pair of words from the same group, the leaf set of their lowest
/// common ancestor is every grouped word whose tag starts with the pair's
/// longest common prefix; pair purity is the share of that set belonging to
/// the group. Group purity averages its pairs, dendrogram purity averages
/// all pairs.
pub fn evaluate_with_threshold(
    tags: &TagTable,
    gold: &GoldReference,
    threshold: f64,
) -> Result<EvalReport> {
    let table = tags.by_surface();
    let tag_of = |w: &str| table.get(w).copied().ok_or_else(|| Error::Coverage(w.to_owned()));
    for w in gold.words() {
        tag_of(w)?;
    }

    let mut first_bits: HashMap<PartOfSpeech, Vec<Option<u32>>> = HashMap::new();
    let labeled = gold
        .groups
        .iter()
        .flat_map(|g| g.words.iter().map(move |w| (w.as_str(), Some(g.pos))))
        .chain(gold.ambiguous.iter().map(|(w, p)| (w.as_str(), *p)));
    for (w, pos) in labeled {
        if let Some(pos) = pos {
            first_bits.entry(pos).or_default().push(tag_of(w)?.bit(0));
        }
    }
    let uniform = |pos| -> Option<u32> {
        let bits = first_bits.get(&pos)?;
        let b = (*bits.first()?)?;
        bits.iter().all(|&x| x == Some(b)).then_some(b)
    };
    let level1_separation = match (uniform(PartOfSpeech::Noun), uniform(PartOfSpeech::Verb)) {
        (Some(n), Some(v)) => n != v,
        _ => false,
    };

    // (tag, group index) for every grouped word
    let leaves: Vec<(BitPath, usize)> = gold
        .groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| g.words.iter().map(move |w| (w, gi)))
        .map(|(w, gi)| Ok((tag_of(w)?, gi)))
        .collect::<Result<_>>()?;

    let mut per_group_purity = Vec::new();
    let (mut pair_sum, mut pair_count) = (0.0, 0usize);
    for (gi, g) in gold.groups.iter().enumerate() {
        if g.words.len() < 2 {
            continue;
        }
        let (mut sum, mut count) = (0.0, 0usize);
        for a in 0..g.words.len() {
            for b in a + 1..g.words.len() {
                let (ta, tb) = (tag_of(&g.words[a])?, tag_of(&g.words[b])?);
                let lca = ta.prefix(ta.common_prefix_len(tb));
                let (mut inside, mut all) = (0usize, 0usize);
                for &(t, owner) in &leaves {
                    if t.starts_with(lca) {
                        all += 1;
                        inside += usize::from(owner == gi);
                    }
                }
                sum += inside as f64 / all as f64;
                count += 1;
            }
        }
        pair_sum += sum;
        pair_count += count;
        per_group_purity.push((g.name.clone(), sum / count as f64));
    }
    let dendrogram_purity = if pair_count == 0 {
        1.0
    } else {
        pair_sum / pair_count as f64
    };

    let impure = per_group_purity.iter().filter(|(_, p)| *p < threshold).count();
    let error_label = match (level1_separation, impure) {
        (false, _) => ErrorLabel::High,
        (true, 0) => ErrorLabel::None,
        (true, 1) => ErrorLabel::Low,
        (true, 2..=3) => ErrorLabel::Medium,
        (true, _) => ErrorLabel::High,
    };
    Ok(EvalReport {
        level1_separation,
        dendrogram_purity,
        per_group_purity,
        error_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitter::TagRow;

    fn table(entries: &[(&str, &str)]) -> TagTable {
        TagTable {
            rows: entries
                .iter()
                .map(|(w, t)| {
                    let tag: BitPath = t.parse().unwrap();
                    TagRow {
                        surface: w.to_string(),
                        tag,
                        frequency: 1,
                        class_id: tag.value(),
                    }
                })
                .collect(),
        }
    }

    /// Nouns under 0, verbs under 1, every group its own subtree.
    pub(crate) fn perfect_tags() -> TagTable {
        let gold = GoldReference::elman();
        let mut rows = Vec::new();
        let (mut noun, mut verb) = (0u32, 0u32);
        let mut owned = Vec::new();
        for g in &gold.groups {
            let (first, idx) = match g.pos {
                PartOfSpeech::Noun => ("0", &mut noun),
                PartOfSpeech::Verb => ("1", &mut verb),
            };
            for (k, w) in g.words.iter().enumerate() {
                owned.push((w.clone(), format!("{first}{:03b}{}", *idx, k % 2)));
            }
            *idx += 1;
        }
        owned.push(("break".into(), "11111".into()));
        owned.push(("see".into(), "11110".into()));
        for (w, t) in &owned {
            rows.push((w.as_str(), t.as_str()));
        }
        table(&rows)
    }

    #[test]
    fn grammar_shape() {
        let g = ElmanGrammar::new();
        assert_eq!(g.production_count(), 16);
        assert_eq!(g.lexicon().len(), 29);
        assert!(SENTENCE_PRODUCTIONS.iter().all(|p| p.len() == 2 || p.len() == 3));
        let food = WORD_CLASSES.iter().find(|(n, _)| *n == "noun-food").unwrap();
        assert_eq!(food.1, &["cookie", "break", "bread", "sandwich"]);
    }

    #[test]
    fn generation_is_deterministic_and_closed() {
        let g = ElmanGrammar::new();
        let a = g.generate(500, 7).unwrap();
        assert_eq!(a, g.generate(500, 7).unwrap());
        assert_ne!(a, g.generate(500, 8).unwrap());
        let lex = g.lexicon();
        assert!(a.iter().all(|s| (2..=3).contains(&s.len())));
        assert!(a.iter().flatten().all(|w| lex.contains(w)));
        assert!(g.generate(0, 1).is_err());
    }

    #[test]
    fn gold_is_disjoint_and_covers_lexicon() {
        let gold = GoldReference::elman();
        let mut words: Vec<&str> = gold.words().collect();
        let n = words.len();
        words.sort_unstable();
        words.dedup();
        assert_eq!(words.len(), n);
        assert_eq!(words, ElmanGrammar::new().lexicon());
        assert_eq!(GoldReference::from_tsv(&gold.to_tsv()).unwrap(), gold);
    }

    #[test]
    fn gold_tsv_errors() {
        assert!(GoldReference::from_tsv("w\tg\n").is_err());
        assert!(GoldReference::from_tsv("word\tgroup\tpos\na\tX\tadj\n").is_err());
        assert!(GoldReference::from_tsv("word\tgroup\tpos\na\tX\tnoun\na\tX\tnoun\n").is_err());
        assert!(GoldReference::from_tsv("word\tgroup\tpos\na\tX\tnoun\nb\tX\tverb\n").is_err());
    }

    #[test]
    fn perfect_tags_score_one() {
        let r = evaluate(&perfect_tags(), &GoldReference::elman()).unwrap();
        assert!(r.level1_separation);
        assert_eq!(r.dendrogram_purity, 1.0);
        assert_eq!(r.per_group_purity.len(), 8);
        assert_eq!(r.error_label, ErrorLabel::None);
    }

    #[test]
    fn identical_tags_score_group_share() {
        let gold = GoldReference::elman();
        let rows: Vec<(&str, &str)> = gold.words().map(|w| (w, "0")).collect();
        let r = evaluate(&table(&rows), &gold).unwrap();
        assert!(!r.level1_separation);
        assert_eq!(r.error_label, ErrorLabel::High);
        let hum = r.per_group_purity.iter().find(|(g, _)| g == "HUM").unwrap().1;
        assert!((hum - 4.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn interleaved_nouns_and_verbs_are_high() {
        let gold = GoldReference::elman();
        let rows: Vec<(&str, String)> = gold
            .words()
            .enumerate()
            .map(|(i, w)| (w, format!("{}0", i % 2)))
            .collect();
        let rows: Vec<(&str, &str)> = rows.iter().map(|(w, t)| (*w, t.as_str())).collect();
        let r = evaluate(&table(&rows), &gold).unwrap();
        assert!(!r.level1_separation);
        assert_eq!(r.error_label, ErrorLabel::High);
    }

    fn retag(t: &mut TagTable, word: &str, like: &str) {
        let tag = t.rows.iter().find(|r| r.surface == like).unwrap().tag;
        t.rows.iter_mut().find(|r| r.surface == word).unwrap().tag = tag;
    }

    #[test]
    fn stray_words_raise_the_label() {
        let gold = GoldReference::elman();
        // "move" forms a group of its own, so only VINTRAN suffers
        let mut t = perfect_tags();
        retag(&mut t, "move", "think");
        let r = evaluate(&t, &gold).unwrap();
        assert!(r.level1_separation);
        assert_eq!(r.error_label, ErrorLabel::Low);
        // "cat" among the humans hurts both HUM and ANIM
        let mut t = perfect_tags();
        retag(&mut t, "cat", "man");
        assert_eq!(evaluate(&t, &gold).unwrap().error_label, ErrorLabel::Medium);
    }

    #[test]
    fn complement_invariance() {
        let t = perfect_tags();
        let mut flipped = t.clone();
        for r in &mut flipped.rows {
            r.tag = r.tag.complement();
        }
        let gold = GoldReference::elman();
        assert_eq!(evaluate(&t, &gold).unwrap(), evaluate(&flipped, &gold).unwrap());
    }

    #[test]
    fn missing_word_is_coverage_error() {
        let mut t = perfect_tags();
        t.rows.retain(|r| r.surface != "lion");
        assert!(matches!(
            evaluate(&t, &GoldReference::elman()),
            Err(Error::Coverage(w)) if w == "lion"
        ));
    }
}
