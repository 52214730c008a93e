//! Shared test support: bundled data paths, a brute-force phrase matcher
//! used as an oracle, and a synthetic chat corpus generator that records
//! its own ground truth.
//!
//! Nothing here depends on `dare-core`, so the oracle stays independent of
//! the implementation it checks.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The workspace `data/` directory.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn test_manifest() -> PathBuf {
    data_dir().join("lexicons/manifest.json")
}

pub fn test_config() -> PathBuf {
    data_dir().join("dare.toml")
}

pub fn sample_corpus() -> PathBuf {
    data_dir().join("samples.jsonl")
}

/// `(attribute, text)` for each row of the bundled sample corpus.
pub fn sample_rows() -> Vec<(String, String)> {
    let text = std::fs::read_to_string(sample_corpus()).expect("sample corpus");
    text.lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).expect("sample line");
            (
                v["attribute"].as_str().unwrap().to_string(),
                v["text"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

/// Phrases of one bundled lexicon file, lowercased, comments skipped.
pub fn bundled_phrases(file: &str) -> Vec<String> {
    let text =
        std::fs::read_to_string(data_dir().join("lexicons").join(file)).expect("lexicon file");
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

// ---------------------------------------------------------------------------
// Brute-force matcher
// ---------------------------------------------------------------------------

/// A lexicon for the oracle: id, optional attribute name, phrases.
#[derive(Debug, Clone)]
pub struct OracleLexicon {
    pub id: String,
    pub attribute: Option<String>,
    pub phrases: Vec<String>,
}

/// `(start, end, phrase, lexicon_id)` with scalar offsets.
pub type OracleSpan = (usize, usize, String, String);

fn lower1(c: char) -> char {
    let mut it = c.to_lowercase();
    match (it.next(), it.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

fn alnum(c: char) -> bool {
    c.is_alphanumeric()
}

fn edge_ok(chars: &[char], pos: usize) -> bool {
    if pos == 0 || pos == chars.len() {
        return true;
    }
    !(alnum(chars[pos - 1]) && alnum(chars[pos]))
}

/// Tries every phrase at every position. Phrases must already be
/// normalized: lowercase words separated by single spaces.
pub fn naive_find(text: &str, lexicons: &[OracleLexicon]) -> Vec<OracleSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for lex in lexicons {
        let mut phrases = lex.phrases.clone();
        phrases.sort();
        phrases.dedup();
        for phrase in &phrases {
            let pchars: Vec<char> = phrase.chars().collect();
            for start in 0..chars.len() {
                if let Some(end) = match_at(&chars, start, &pchars) {
                    if edge_ok(&chars, start) && edge_ok(&chars, end) {
                        out.push((start, end, phrase.clone(), lex.id.clone()));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| (a.0, a.1, &a.3).cmp(&(b.0, b.1, &b.3)));
    out
}

fn match_at(text: &[char], start: usize, phrase: &[char]) -> Option<usize> {
    let mut t = start;
    for &p in phrase {
        if p == ' ' {
            if t >= text.len() || !text[t].is_whitespace() {
                return None;
            }
            while t < text.len() && text[t].is_whitespace() {
                t += 1;
            }
        } else {
            if t >= text.len() || text[t].is_whitespace() || lower1(text[t]) != p {
                return None;
            }
            t += 1;
        }
    }
    Some(t)
}

/// Random text and phrase sets that produce plenty of hits and edge cases.
pub struct MatcherCaseGen {
    rng: ChaCha8Rng,
}

const WORDS: &[&str] = &[
    "ab", "ba", "abc", "a", "b", "cab", "é", "ñu", "x1", "42", "ab1", "bé",
];
const SEPARATORS: &[&str] = &[
    " ", " ", " ", "  ", "\n", "\t ", "-", ".", "!", "?", "*", "'", "", ",", "_",
];

impl MatcherCaseGen {
    pub fn new(seed: u64) -> Self {
        MatcherCaseGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn word(&mut self) -> String {
        let w = WORDS.choose(&mut self.rng).unwrap();
        if self.rng.gen_bool(0.25) {
            w.to_uppercase()
        } else {
            w.to_string()
        }
    }

    /// Up to `max_scalars` scalars of words and separators.
    pub fn text(&mut self, max_scalars: usize) -> String {
        let target = self.rng.gen_range(0..=max_scalars);
        let mut s = String::new();
        while s.chars().count() < target {
            s.push_str(&self.word());
            s.push_str(SEPARATORS.choose(&mut self.rng).unwrap());
        }
        s.chars().take(target).collect()
    }

    /// A normalized phrase of 1 to 3 words.
    pub fn phrase(&mut self) -> String {
        let n = self.rng.gen_range(1..=3);
        (0..n)
            .map(|_| WORDS.choose(&mut self.rng).unwrap().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// One to three lexicons holding at most `max_phrases` phrases in total.
    pub fn lexicons(&mut self, max_phrases: usize) -> Vec<OracleLexicon> {
        let n_lex = self.rng.gen_range(1..=3);
        let total = self.rng.gen_range(1..=max_phrases.max(1));
        let mut lexicons: Vec<OracleLexicon> = (0..n_lex)
            .map(|i| OracleLexicon {
                id: format!("lex{i}"),
                attribute: None,
                phrases: Vec::new(),
            })
            .collect();
        for _ in 0..total {
            let i = self.rng.gen_range(0..n_lex);
            let p = self.phrase();
            lexicons[i].phrases.push(p);
        }
        lexicons.retain(|l| !l.phrases.is_empty());
        lexicons
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

/// Words that match nothing in the bundled lexicons.
pub const CLEAN_WORDS: &[&str] = &[
    "build",
    "deploy",
    "config",
    "merge",
    "branch",
    "commit",
    "review",
    "test",
    "release",
    "docs",
    "server",
    "module",
    "please",
    "thanks",
    "works",
    "issue",
    "fixed",
    "update",
    "version",
    "router",
    "component",
    "template",
    "binding",
    "value",
    "function",
    "error",
    "compile",
    "install",
    "package",
    "question",
    "answer",
    "today",
    "tomorrow",
    "team",
    "meeting",
    "the",
    "is",
    "it",
    "this",
    "that",
    "with",
    "for",
    "on",
    "and",
    "but",
    "we",
    "you",
    "they",
    "seems",
    "really",
    "quite",
    "now",
    "again",
    "here",
];

pub const PROFANITY_WORDS: &[&str] = &["fuck", "shit", "bastard", "crap", "damn"];

/// Planting keywords per attribute. None of them is also a profanity entry.
pub const ATTRIBUTE_KEYWORDS: &[(&str, &[&str])] = &[
    ("Gender", &["girl", "woman"]),
    ("SexualOrientation", &["lesbian", "bisexual", "queer"]),
    ("Ethnicity", &["indian", "african"]),
    ("Religion", &["jesus", "christian"]),
    ("Disability", &["dyslexic", "wheelchair"]),
    ("Location", &["china", "pakistan"]),
    ("EmploymentStatus", &["jobless", "unemployed"]),
    ("Age", &["teenager", "boomer"]),
    ("LanguageAbility", &["english", "grammar"]),
    ("Software", &["xcode", "silverlight", "firefox"]),
    ("Hardware", &["macbook", "gpu", "laptop"]),
];

/// Taxonomy order, matching `AttributeId::ALL`.
pub fn attribute_names() -> Vec<&'static str> {
    ATTRIBUTE_KEYWORDS.iter().map(|(a, _)| *a).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub comments_read: u64,
    pub offensive: u64,
    pub exclusionary: u64,
    pub malformed: u64,
    pub projects: Vec<String>,
    /// Exclusionary comments per project.
    pub per_project: BTreeMap<String, u64>,
    /// (comment, attribute) pairs per attribute, all 11 keys present.
    pub per_attribute: BTreeMap<String, u64>,
    pub per_project_attribute: BTreeMap<(String, String), u64>,
    /// Comments carrying more than one planted label.
    pub multi_label: u64,
    /// 1-based lines that were deliberately corrupted.
    pub corrupted_lines: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub lines: Vec<String>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureSpec {
    pub seed: u64,
    pub comments: usize,
    pub projects: usize,
    /// Fraction of records replaced with malformed lines.
    pub malformed_rate: f64,
}

impl FixtureSpec {
    pub fn new(seed: u64, comments: usize, projects: usize) -> Self {
        FixtureSpec {
            seed,
            comments,
            projects,
            malformed_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Clean,
    KeywordsNoProfanity,
    ProfanityOnly,
    CodeProfanity,
    GazetteerOtherSentence,
    Exclusionary,
}

impl FixtureCorpus {
    pub fn generate(spec: FixtureSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let projects: Vec<String> = (0..spec.projects)
            .map(|i| format!("project-{i:02}"))
            .collect();
        // Skewed weights so the per-project ranking is informative.
        let weights: Vec<f64> = (0..spec.projects)
            .map(|i| 1.0 / (1.0 + i as f64 * 0.35))
            .collect();
        let wsum: f64 = weights.iter().sum();

        let mut truth = GroundTruth {
            projects: projects.clone(),
            per_attribute: attribute_names()
                .into_iter()
                .map(|a| (a.to_string(), 0))
                .collect(),
            ..GroundTruth::default()
        };
        let n_corrupt = (spec.comments as f64 * spec.malformed_rate).round() as usize;
        let mut corrupt: Vec<usize> = (0..spec.comments).collect();
        corrupt.shuffle(&mut rng);
        corrupt.truncate(n_corrupt);
        corrupt.sort_unstable();

        let mut lines = Vec::with_capacity(spec.comments);
        for i in 0..spec.comments {
            if corrupt.binary_search(&i).is_ok() {
                let bad = match rng.gen_range(0..3) {
                    0 => "{\"project_id\": \"broken".to_string(),
                    1 => format!("{{\"project_id\":\"x\",\"text\":\"no id {i}\"}}"),
                    _ => "not even json".to_string(),
                };
                lines.push(bad);
                truth.malformed += 1;
                truth.corrupted_lines.push(i as u64 + 1);
                continue;
            }
            let mut pick = rng.gen_range(0.0..wsum);
            let mut p = 0;
            while pick >= weights[p] && p + 1 < weights.len() {
                pick -= weights[p];
                p += 1;
            }
            let project = &projects[p];
            let kind = match rng.gen_range(0..100) {
                0..=54 => Kind::Clean,
                55..=61 => Kind::KeywordsNoProfanity,
                62..=71 => Kind::ProfanityOnly,
                72..=74 => Kind::CodeProfanity,
                75..=77 => Kind::GazetteerOtherSentence,
                _ => Kind::Exclusionary,
            };
            let (text, labels) = compose(&mut rng, kind);
            truth.comments_read += 1;
            if matches!(
                kind,
                Kind::ProfanityOnly | Kind::GazetteerOtherSentence | Kind::Exclusionary
            ) {
                truth.offensive += 1;
            }
            if !labels.is_empty() {
                truth.exclusionary += 1;
                *truth.per_project.entry(project.clone()).or_default() += 1;
                if labels.len() > 1 {
                    truth.multi_label += 1;
                }
                for a in &labels {
                    *truth.per_attribute.get_mut(*a).unwrap() += 1;
                    *truth
                        .per_project_attribute
                        .entry((project.clone(), a.to_string()))
                        .or_default() += 1;
                }
            }
            let record = serde_json::json!({
                "project_id": project,
                "message_id": format!("m{i:06}"),
                "author_hash": format!("u{:04}", rng.gen_range(0..500)),
                "text": text,
            });
            lines.push(record.to_string());
        }
        FixtureCorpus { lines, truth }
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = self.lines.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_jsonl())
    }
}

fn clean_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| CLEAN_WORDS.choose(rng).unwrap().to_string())
        .collect()
}

fn keyword(rng: &mut ChaCha8Rng, attribute: &str) -> String {
    let (_, words) = ATTRIBUTE_KEYWORDS
        .iter()
        .find(|(a, _)| *a == attribute)
        .unwrap();
    let w = words.choose(rng).unwrap();
    if rng.gen_bool(0.2) {
        w.to_uppercase()
    } else {
        w.to_string()
    }
}

fn profanity(rng: &mut ChaCha8Rng) -> String {
    let w = PROFANITY_WORDS.choose(rng).unwrap();
    if rng.gen_bool(0.2) {
        w.to_uppercase()
    } else {
        w.to_string()
    }
}

fn sentence(words: Vec<String>, end: &str) -> String {
    let mut s = words.join(" ");
    s.push_str(end);
    s
}

/// Returns the text and the attribute labels it must receive.
fn compose(rng: &mut ChaCha8Rng, kind: Kind) -> (String, Vec<&'static str>) {
    let n = rng.gen_range(3..9);
    match kind {
        Kind::Clean => (sentence(clean_words(rng, n), "."), vec![]),
        Kind::KeywordsNoProfanity => {
            let mut w = clean_words(rng, n);
            let attr = attribute_names()[rng.gen_range(0..11)];
            w.insert(rng.gen_range(0..=w.len()), keyword(rng, attr));
            (sentence(w, "?"), vec![])
        }
        Kind::ProfanityOnly => {
            let mut w = clean_words(rng, n);
            w.insert(rng.gen_range(0..=w.len()), profanity(rng));
            (sentence(w, "!"), vec![])
        }
        Kind::CodeProfanity => {
            let mut w = clean_words(rng, n);
            let attr = attribute_names()[rng.gen_range(0..11)];
            w.push(keyword(rng, attr));
            let code = if rng.gen_bool(0.5) {
                format!("`{}`", profanity(rng))
            } else {
                format!("```\nlet {} = 1;\n```", profanity(rng))
            };
            (format!("{code} {}", sentence(w, ".")), vec![])
        }
        Kind::GazetteerOtherSentence => {
            let mut first = clean_words(rng, n);
            first.insert(rng.gen_range(0..=first.len()), profanity(rng));
            let mut second = clean_words(rng, 3);
            let attr = if rng.gen_bool(0.5) {
                "Software"
            } else {
                "Hardware"
            };
            second.insert(rng.gen_range(0..=second.len()), keyword(rng, attr));
            (
                format!("{} {}", sentence(first, "."), sentence(second, ".")),
                vec![],
            )
        }
        Kind::Exclusionary => {
            let n_labels = match rng.gen_range(0..10) {
                0..=6 => 1,
                7..=8 => 2,
                _ => 3,
            };
            let mut attrs = attribute_names();
            attrs.shuffle(rng);
            let mut attrs: Vec<&'static str> = attrs.into_iter().take(n_labels).collect();
            let mut w = clean_words(rng, n);
            w.push(profanity(rng));
            for a in &attrs {
                w.push(keyword(rng, a));
            }
            w.shuffle(rng);
            let names = attribute_names();
            attrs.sort_by_key(|a| names.iter().position(|n| n == a));
            (sentence(w, "."), attrs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_bundled() -> Vec<String> {
        let files = [
            "profanity.txt",
            "gender.txt",
            "sexual_orientation.txt",
            "ethnicity.txt",
            "religion.txt",
            "disability.txt",
            "location.txt",
            "employment_status.txt",
            "age.txt",
            "language_ability.txt",
            "software.txt",
            "hardware.txt",
        ];
        files.iter().flat_map(|f| bundled_phrases(f)).collect()
    }

    #[test]
    fn clean_words_match_nothing() {
        let lex = vec![OracleLexicon {
            id: "all".into(),
            attribute: None,
            phrases: all_bundled(),
        }];
        let text = CLEAN_WORDS.join(" ");
        assert!(naive_find(&text, &lex).is_empty());
    }

    #[test]
    fn planted_keywords_are_bundled_and_not_profane() {
        let profane = bundled_phrases("profanity.txt");
        let all = all_bundled();
        for (_, words) in ATTRIBUTE_KEYWORDS {
            for w in *words {
                assert!(
                    all.contains(&w.to_string()),
                    "{w} missing from bundled lexicons"
                );
                assert!(!profane.contains(&w.to_string()), "{w} is also profanity");
            }
        }
        for p in PROFANITY_WORDS {
            assert!(profane.contains(&p.to_string()));
        }
    }

    #[test]
    fn oracle_basics() {
        let lex = vec![OracleLexicon {
            id: "p".into(),
            attribute: None,
            phrases: vec!["gay ass".into(), "ass".into()],
        }];
        let got = naive_find("your GAY \n ASS; class", &lex);
        assert_eq!(
            got,
            vec![
                (5, 14, "gay ass".into(), "p".into()),
                (11, 14, "ass".into(), "p".into())
            ]
        );
    }

    #[test]
    fn generator_is_deterministic() {
        let a = FixtureCorpus::generate(FixtureSpec::new(7, 300, 4));
        let b = FixtureCorpus::generate(FixtureSpec::new(7, 300, 4));
        assert_eq!(a.lines, b.lines);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.truth.comments_read, 300);
        assert!(a.truth.exclusionary <= a.truth.offensive);
    }

    #[test]
    fn malformed_lines_recorded() {
        let mut spec = FixtureSpec::new(1, 1000, 3);
        spec.malformed_rate = 0.01;
        let c = FixtureCorpus::generate(spec);
        assert_eq!(c.truth.malformed, 10);
        assert_eq!(c.truth.comments_read, 990);
        assert_eq!(c.truth.corrupted_lines.len(), 10);
    }
}
