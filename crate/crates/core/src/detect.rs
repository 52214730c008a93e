//! Comment-level profanity detection.
//!
//! Detection finds every profanity span in a comment, then a small
//! configurable filter decides whether the comment counts as offensive. The
//! raw spans are always kept so results can be re-validated downstream.

use serde::{Deserialize, Serialize};

use crate::matcher::{MatchSpan, PhraseMatcher};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub project_id: String,
    pub message_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub text: String,
}

impl Comment {
    pub fn new(
        project_id: impl Into<String>,
        message_id: impl Into<String>,
        text: impl Into<String>,
    ) -> Self {
        Comment {
            project_id: project_id.into(),
            message_id: message_id.into(),
            author_hash: None,
            timestamp: None,
            text: text.into(),
        }
    }
}

/// A sentence as scalar offsets into its comment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl Sentence {
    pub fn overlaps(&self, span: &MatchSpan) -> bool {
        span.overlaps(self.start, self.end)
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\n')
}

/// Splits on `.`, `!`, `?` and newlines.
///
/// A run of terminators stays attached to the sentence before it. Each
/// fragment is trimmed of surrounding whitespace and whitespace-only
/// fragments are dropped, so the text between sentences is always
/// whitespace.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut frag_start = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_terminator(chars[i]) {
            while i < chars.len() && is_terminator(chars[i]) {
                i += 1;
            }
            push_fragment(&chars, frag_start, i, &mut out);
            frag_start = i;
        } else {
            i += 1;
        }
    }
    push_fragment(&chars, frag_start, chars.len(), &mut out);
    out
}

fn push_fragment(chars: &[char], mut start: usize, mut end: usize, out: &mut Vec<Sentence>) {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    if start < end {
        out.push(Sentence {
            start,
            end,
            text: chars[start..end].iter().collect(),
        });
    }
}

/// Rules standing in for manual validation of candidate comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Drop spans that sit entirely inside inline code or fenced code blocks.
    pub ignore_code: bool,
    /// Surviving spans needed for a comment to count as offensive.
    pub min_spans: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            ignore_code: true,
            min_spans: 1,
        }
    }
}

impl FilterConfig {
    /// No code filtering, one span is enough.
    pub fn permissive() -> Self {
        FilterConfig {
            ignore_code: false,
            min_spans: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub project_id: String,
    pub message_id: String,
    pub offensive: bool,
    pub profanity_spans: Vec<MatchSpan>,
    /// Indices into `split_sentences(text)` of sentences holding a profanity span.
    pub candidate_sentences: Vec<usize>,
}

pub fn detect_offensive(
    comment: &Comment,
    profanity: &PhraseMatcher,
    cfg: &FilterConfig,
) -> DetectionResult {
    let spans = profanity.find_matches(&comment.text);
    let candidate_sentences = if spans.is_empty() {
        Vec::new()
    } else {
        split_sentences(&comment.text)
            .iter()
            .enumerate()
            .filter(|(_, s)| spans.iter().any(|sp| s.overlaps(sp)))
            .map(|(i, _)| i)
            .collect()
    };
    let offensive = !spans.is_empty() && filter_candidate(comment, &spans, cfg);
    DetectionResult {
        project_id: comment.project_id.clone(),
        message_id: comment.message_id.clone(),
        offensive,
        profanity_spans: spans,
        candidate_sentences,
    }
}

pub fn filter_candidate(comment: &Comment, spans: &[MatchSpan], cfg: &FilterConfig) -> bool {
    let surviving = if cfg.ignore_code {
        let regions = code_regions(&comment.text);
        spans
            .iter()
            .filter(|s| !regions.iter().any(|&(a, b)| a <= s.start && s.end <= b))
            .count()
    } else {
        spans.len()
    };
    surviving >= cfg.min_spans.max(1)
}

/// Scalar ranges covered by fenced blocks and inline code, delimiters included.
///
/// A fence opened with ```` ``` ```` runs to the next ```` ``` ````; an
/// unclosed fence is not code. Outside fences, a backtick pairs with the next
/// backtick.
pub fn code_regions(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let fence_at = |i: usize| i + 3 <= n && chars[i..i + 3] == ['`', '`', '`'];
    let mut regions = Vec::new();
    let mut i = 0;
    while i < n {
        if chars[i] != '`' {
            i += 1;
            continue;
        }
        if fence_at(i) {
            if let Some(close) = (i + 3..n).find(|&j| fence_at(j)) {
                regions.push((i, close + 3));
                i = close + 3;
            } else {
                i += 3;
            }
            continue;
        }
        match (i + 1..n).find(|&j| chars[j] == '`') {
            Some(close) => {
                regions.push((i, close + 1));
                i = close + 1;
            }
            None => i += 1,
        }
    }
    regions
}
