//! Compiled multi-pattern phrase matching.
//!
//! Text is folded and its whitespace runs collapsed into a scratch string,
//! an Aho-Corasick automaton reports every (overlapping) phrase occurrence,
//! and each hit is mapped back to scalar offsets in the original text and
//! kept only if both of its edges sit on word boundaries.
//!
//! An edge between two scalars is rejected only when both scalars are
//! alphanumeric, so `class` does not match inside `classic` while `c++`
//! still matches before a space.

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use serde::{Deserialize, Serialize};

use crate::lexicon::{
    fold_char, is_word_char, lexicons_fingerprint, LexiconError, LexiconKind, PhraseLexicon,
};
use crate::taxonomy::AttributeId;

/// A phrase occurrence. Offsets count Unicode scalar values, `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchSpan {
    pub start: usize,
    pub end: usize,
    pub phrase: String,
    pub lexicon_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<AttributeId>,
}

impl MatchSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }

    /// The original (unfolded) text covered by the span.
    pub fn slice<'t>(&self, text: &'t str) -> &'t str {
        slice_chars(text, self.start, self.end)
    }

    fn sort_key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.lexicon_id)
    }
}

/// Substring by scalar offsets. Out-of-range offsets are clamped.
pub fn slice_chars(text: &str, start: usize, end: usize) -> &str {
    let mut idx = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()));
    let b_start = idx.nth(start).unwrap_or(text.len());
    let b_end = if end > start {
        idx.nth(end - start - 1).unwrap_or(text.len())
    } else {
        b_start
    };
    &text[b_start..b_end]
}

#[derive(Debug, Clone)]
struct LexiconTag {
    lexicon_id: String,
    kind: LexiconKind,
}

/// Matching policy recorded alongside the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormalizationPolicy {
    pub case_folding: bool,
    pub collapse_whitespace: bool,
    pub word_boundaries: bool,
}

/// Immutable automaton over one or more lexicons.
#[derive(Debug, Clone)]
pub struct PhraseMatcher {
    automaton: AhoCorasick,
    patterns: Vec<String>,
    /// Lexicon indices per pattern, sorted by lexicon id.
    pattern_tags: Vec<Vec<usize>>,
    lexicons: Vec<LexiconTag>,
    policy: NormalizationPolicy,
}

impl PhraseMatcher {
    pub fn compile(lexicons: &[PhraseLexicon]) -> Result<Self, LexiconError> {
        if lexicons.is_empty() {
            return Err(LexiconError::NoLexicons);
        }
        let mut tags: Vec<LexiconTag> = Vec::with_capacity(lexicons.len());
        for lex in lexicons {
            if tags.iter().any(|t| t.lexicon_id == lex.lexicon_id) {
                return Err(LexiconError::DuplicateLexiconId(lex.lexicon_id.clone()));
            }
            tags.push(LexiconTag {
                lexicon_id: lex.lexicon_id.clone(),
                kind: lex.kind,
            });
        }

        let mut by_phrase: std::collections::BTreeMap<&str, Vec<usize>> = Default::default();
        for (i, lex) in lexicons.iter().enumerate() {
            for p in &lex.phrases {
                by_phrase.entry(p.as_str()).or_default().push(i);
            }
        }
        let mut patterns = Vec::with_capacity(by_phrase.len());
        let mut pattern_tags = Vec::with_capacity(by_phrase.len());
        for (phrase, mut idx) in by_phrase {
            idx.sort_by(|&a, &b| tags[a].lexicon_id.cmp(&tags[b].lexicon_id));
            patterns.push(phrase.to_string());
            pattern_tags.push(idx);
        }

        let automaton = AhoCorasickBuilder::new()
            .match_kind(MatchKind::Standard)
            .build(&patterns)
            .map_err(|e| LexiconError::Automaton(e.to_string()))?;
        Ok(PhraseMatcher {
            automaton,
            patterns,
            pattern_tags,
            lexicons: tags,
            policy: NormalizationPolicy {
                case_folding: true,
                collapse_whitespace: true,
                word_boundaries: true,
            },
        })
    }

    pub fn policy(&self) -> NormalizationPolicy {
        self.policy
    }

    pub fn lexicon_ids(&self) -> impl Iterator<Item = &str> {
        self.lexicons.iter().map(|t| t.lexicon_id.as_str())
    }

    pub fn kinds(&self) -> impl Iterator<Item = LexiconKind> + '_ {
        self.lexicons.iter().map(|t| t.kind)
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// All phrase occurrences, sorted by `(start, end, lexicon_id)`.
    pub fn find_matches(&self, text: &str) -> Vec<MatchSpan> {
        if text.is_empty() {
            return Vec::new();
        }
        let chars: Vec<char> = text.chars().collect();
        let folded = FoldedText::new(&chars);
        let mut spans = Vec::new();
        for m in self.automaton.find_overlapping_iter(folded.text.as_str()) {
            let start = folded.orig_index[m.start()];
            let end = folded.orig_index[m.end() - 1] + 1;
            if !is_boundary(&chars, start) || !is_boundary(&chars, end) {
                continue;
            }
            let pid = m.pattern().as_usize();
            for &li in &self.pattern_tags[pid] {
                let tag = &self.lexicons[li];
                spans.push(MatchSpan {
                    start,
                    end,
                    phrase: self.patterns[pid].clone(),
                    lexicon_id: tag.lexicon_id.clone(),
                    attribute: tag.kind.attribute(),
                });
            }
        }
        spans.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        spans
    }

    pub fn is_match(&self, text: &str) -> bool {
        !self.find_matches(text).is_empty()
    }
}

/// Compiled profanity, attribute-keyword and gazetteer matchers built from
/// one set of lexicons.
#[derive(Debug, Clone)]
pub struct MatcherSet {
    pub profanity: PhraseMatcher,
    pub attributes: Option<PhraseMatcher>,
    pub gazetteer: Option<PhraseMatcher>,
    fingerprint: String,
}

impl MatcherSet {
    pub fn from_lexicons(lexicons: Vec<PhraseLexicon>) -> Result<Self, LexiconError> {
        let fingerprint = lexicons_fingerprint(&lexicons);
        let mut seen = std::collections::HashSet::new();
        for lex in &lexicons {
            if !seen.insert(lex.lexicon_id.as_str()) {
                return Err(LexiconError::DuplicateLexiconId(lex.lexicon_id.clone()));
            }
        }
        let (mut prof, mut attr, mut gaz) = (Vec::new(), Vec::new(), Vec::new());
        for lex in lexicons {
            match lex.kind {
                LexiconKind::Profanity => prof.push(lex),
                LexiconKind::AttributeKeywords(_) => attr.push(lex),
                LexiconKind::Gazetteer(_) => gaz.push(lex),
            }
        }
        let optional = |v: Vec<PhraseLexicon>| -> Result<Option<PhraseMatcher>, LexiconError> {
            if v.is_empty() {
                Ok(None)
            } else {
                PhraseMatcher::compile(&v).map(Some)
            }
        };
        Ok(MatcherSet {
            profanity: PhraseMatcher::compile(&prof)?,
            attributes: optional(attr)?,
            gazetteer: optional(gaz)?,
            fingerprint,
        })
    }

    /// Hash of the lexicon contents the set was compiled from.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Every span of every matcher, sorted.
    pub fn find_all(&self, text: &str) -> Vec<MatchSpan> {
        let mut out = self.profanity.find_matches(text);
        for m in self.attributes.iter().chain(self.gazetteer.iter()) {
            out.extend(m.find_matches(text));
        }
        out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        out
    }
}

fn is_boundary(chars: &[char], pos: usize) -> bool {
    pos == 0 || pos >= chars.len() || !(is_word_char(chars[pos - 1]) && is_word_char(chars[pos]))
}

/// Folded, whitespace-collapsed copy of a text with a byte-to-scalar map.
struct FoldedText {
    text: String,
    /// Original scalar index for every byte of `text`.
    orig_index: Vec<usize>,
}

impl FoldedText {
    fn new(chars: &[char]) -> Self {
        let mut text = String::with_capacity(chars.len());
        let mut orig_index = Vec::with_capacity(chars.len());
        let mut in_space = false;
        for (i, &c) in chars.iter().enumerate() {
            let out = if c.is_whitespace() {
                if in_space {
                    continue;
                }
                in_space = true;
                ' '
            } else {
                in_space = false;
                fold_char(c)
            };
            text.push(out);
            orig_index.extend(std::iter::repeat_n(i, out.len_utf8()));
        }
        FoldedText { text, orig_index }
    }
}
