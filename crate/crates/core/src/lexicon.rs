//! Phrase lists and the manifest that names them.
//!
//! A lexicon file is UTF-8 text with one phrase per line. Lines whose first
//! non-blank character is `#` are comments; blank lines are skipped. Every
//! phrase is case folded and has its internal whitespace collapsed to single
//! spaces, so `"  Gay   Ass "` and `"gay ass"` are the same phrase.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::matcher::{MatcherSet, PhraseMatcher};
use crate::taxonomy::AttributeId;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: line {line} is not valid UTF-8")]
    InvalidEncoding { path: PathBuf, line: usize },
    #[error("lexicon `{0}` has no phrases")]
    EmptyLexicon(String),
    #[error("lexicon `{lexicon_id}`: {reason}")]
    InvalidKind { lexicon_id: String, reason: String },
    #[error("duplicate lexicon id `{0}`")]
    DuplicateLexiconId(String),
    #[error("cannot compile a matcher from an empty lexicon list")]
    NoLexicons,
    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("failed to build phrase automaton: {0}")]
    Automaton(String),
}

/// What a lexicon is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LexiconKind {
    Profanity,
    /// Keywords for one identity-based attribute.
    AttributeKeywords(AttributeId),
    /// Product and stack names for Software or Hardware.
    Gazetteer(AttributeId),
}

impl LexiconKind {
    pub fn attribute(self) -> Option<AttributeId> {
        match self {
            LexiconKind::Profanity => None,
            LexiconKind::AttributeKeywords(a) | LexiconKind::Gazetteer(a) => Some(a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LexiconKind::Profanity => "profanity",
            LexiconKind::AttributeKeywords(_) => "attribute_keywords",
            LexiconKind::Gazetteer(_) => "gazetteer",
        }
    }

    fn validate(self, lexicon_id: &str) -> Result<(), LexiconError> {
        let reason = match self {
            LexiconKind::AttributeKeywords(a) if !a.is_identity() => {
                format!("keyword lists are for identity-based attributes, not {a}")
            }
            LexiconKind::Gazetteer(a) if a.is_identity() => {
                format!("gazetteers are for Software or Hardware, not {a}")
            }
            _ => return Ok(()),
        };
        Err(LexiconError::InvalidKind {
            lexicon_id: lexicon_id.to_string(),
            reason,
        })
    }
}

/// Lowercases a single scalar when its lowercase form is a single scalar.
///
/// Characters whose lowercase mapping expands (e.g. `İ`) are left as is so
/// that folded text keeps the same scalar offsets as the original.
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Case folds and collapses whitespace runs to a single space, trimming both ends.
pub fn normalize_phrase(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().map(fold_char));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseLexicon {
    pub lexicon_id: String,
    pub kind: LexiconKind,
    pub phrases: BTreeSet<String>,
    /// Free-text provenance, usually the source path.
    pub source: String,
    /// Lines that normalized to a phrase already seen.
    pub duplicates_dropped: usize,
}

impl PhraseLexicon {
    /// Builds a lexicon from raw phrases, normalizing each one.
    pub fn new<I, S>(
        lexicon_id: impl Into<String>,
        kind: LexiconKind,
        phrases: I,
    ) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let lexicon_id = lexicon_id.into();
        kind.validate(&lexicon_id)?;
        let mut set = BTreeSet::new();
        let mut duplicates_dropped = 0;
        for p in phrases {
            let p = normalize_phrase(p.as_ref());
            if p.is_empty() {
                continue;
            }
            if !set.insert(p) {
                duplicates_dropped += 1;
            }
        }
        if set.is_empty() {
            return Err(LexiconError::EmptyLexicon(lexicon_id));
        }
        Ok(PhraseLexicon {
            lexicon_id,
            kind,
            phrases: set,
            source: String::new(),
            duplicates_dropped,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains(&normalize_phrase(phrase))
    }
}

/// Parses lexicon file contents. `origin` is only used in error messages.
pub fn parse_lexicon(
    lexicon_id: &str,
    kind: LexiconKind,
    bytes: &[u8],
    origin: &Path,
) -> Result<PhraseLexicon, LexiconError> {
    let mut lines = Vec::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|_| LexiconError::InvalidEncoding {
            path: origin.to_path_buf(),
            line: i + 1,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push(trimmed);
    }
    Ok(PhraseLexicon::new(lexicon_id, kind, lines)?.with_source(origin.display().to_string()))
}

/// Loads a lexicon file. The lexicon id is the file stem.
pub fn load_lexicon(
    path: impl AsRef<Path>,
    kind: LexiconKind,
) -> Result<PhraseLexicon, LexiconError> {
    let path = path.as_ref();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    load_lexicon_as(&id, path, kind)
}

pub fn load_lexicon_as(
    lexicon_id: &str,
    path: &Path,
    kind: LexiconKind,
) -> Result<PhraseLexicon, LexiconError> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => LexiconError::FileNotFound(path.to_path_buf()),
        _ => LexiconError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    parse_lexicon(lexicon_id, kind, &bytes, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Profanity,
    AttributeKeywords,
    Gazetteer,
}

/// One manifest entry: `{"path": ..., "kind": ..., "attribute": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<AttributeId>,
}

impl ManifestEntry {
    pub fn lexicon_kind(&self, lexicon_id: &str) -> Result<LexiconKind, LexiconError> {
        let missing = || LexiconError::InvalidKind {
            lexicon_id: lexicon_id.to_string(),
            reason: format!("kind `{}` requires an attribute", serde_name(self.kind)),
        };
        let kind = match (self.kind, self.attribute) {
            (KindName::Profanity, None) => LexiconKind::Profanity,
            (KindName::Profanity, Some(_)) => {
                return Err(LexiconError::InvalidKind {
                    lexicon_id: lexicon_id.to_string(),
                    reason: "profanity lexicons carry no attribute".to_string(),
                })
            }
            (KindName::AttributeKeywords, Some(a)) => LexiconKind::AttributeKeywords(a),
            (KindName::Gazetteer, Some(a)) => LexiconKind::Gazetteer(a),
            _ => return Err(missing()),
        };
        kind.validate(lexicon_id)?;
        Ok(kind)
    }
}

fn serde_name(k: KindName) -> &'static str {
    match k {
        KindName::Profanity => "profanity",
        KindName::AttributeKeywords => "attribute_keywords",
        KindName::Gazetteer => "gazetteer",
    }
}

/// JSON manifest mapping lexicon id to its file and kind. Relative paths
/// resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconManifest {
    pub entries: BTreeMap<String, ManifestEntry>,
    pub base_dir: PathBuf,
}

impl LexiconManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => LexiconError::FileNotFound(path.to_path_buf()),
            _ => LexiconError::Io {
                path: path.to_path_buf(),
                source: e,
            },
        })?;
        let entries: BTreeMap<String, ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| LexiconError::Manifest {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        if entries.is_empty() {
            return Err(LexiconError::Manifest {
                path: path.to_path_buf(),
                message: "no lexicons listed".to_string(),
            });
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LexiconManifest { entries, base_dir })
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    /// Loads each entry, returning per-entry results in id order.
    pub fn load_each(&self) -> Vec<(String, Result<PhraseLexicon, LexiconError>)> {
        self.entries
            .iter()
            .map(|(id, entry)| {
                let res = entry
                    .lexicon_kind(id)
                    .and_then(|kind| load_lexicon_as(id, &self.resolve(entry), kind));
                (id.clone(), res)
            })
            .collect()
    }

    pub fn load_all(&self) -> Result<Vec<PhraseLexicon>, LexiconError> {
        self.load_each().into_iter().map(|(_, r)| r).collect()
    }

    pub fn compile(&self) -> Result<MatcherSet, LexiconError> {
        MatcherSet::from_lexicons(self.load_all()?)
    }
}

/// Hex SHA-256 over lexicon ids, kinds and normalized phrases.
pub fn lexicons_fingerprint(lexicons: &[PhraseLexicon]) -> String {
    let mut sorted: Vec<&PhraseLexicon> = lexicons.iter().collect();
    sorted.sort_by(|a, b| a.lexicon_id.cmp(&b.lexicon_id));
    let mut h = Sha256::new();
    for lex in sorted {
        h.update(lex.lexicon_id.as_bytes());
        h.update([0]);
        h.update(lex.kind.name().as_bytes());
        if let Some(a) = lex.kind.attribute() {
            h.update(a.as_str().as_bytes());
        }
        h.update([0]);
        for p in &lex.phrases {
            h.update(p.as_bytes());
            h.update(b"\n");
        }
        h.update([1]);
    }
    hex::encode(h.finalize())
}

/// Compiles a matcher from lexicons, rejecting an empty list.
pub fn compile_matcher(lexicons: &[PhraseLexicon]) -> Result<PhraseMatcher, LexiconError> {
    PhraseMatcher::compile(lexicons)
}
