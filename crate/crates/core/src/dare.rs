//! Detect, assign, reveal and eliminate for a single message.
//!
//! Reveal wraps every merged span as `[[text]]{tag,...}` and appends a
//! legend after a blank line; [`strip_annotations`] undoes it. Eliminate
//! rewrites spans with a rule-based [`RephraseStrategy`] and re-runs
//! detection on the result, widening the edited regions until nothing is
//! detected or the pass budget runs out. All edits are expressed against
//! the original text. A masked region whose kept first letter still
//! matches is starred out completely on the next pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::{assign_all, merge_labels, AttributeLabel};
use crate::detect::{detect_offensive, Comment, DetectionResult, FilterConfig};
use crate::lexicon::{is_word_char, normalize_phrase};
use crate::matcher::{MatchSpan, MatcherSet};
use crate::taxonomy::AttributeId;

pub const PROFANITY_TAG: &str = "profanity";
const LEGEND_HEADER: &str = "\n\nLegend:\n";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DareError {
    #[error("spans still overlap after merging at scalar {0}")]
    OverlapAfterMerge(usize),
    #[error("span {start}..{end} lies outside a text of {len} scalars")]
    SpanOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("rephrased text still matched the lexicons after {passes} passes")]
    FixpointNotReached { passes: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RephraseStrategy {
    /// Keep the first letter or digit of the span, star out the rest.
    #[default]
    Mask,
    /// Delete the span.
    Remove,
    /// Swap the span for a bracketed placeholder.
    Placeholder,
}

impl RephraseStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            RephraseStrategy::Mask => "mask",
            RephraseStrategy::Remove => "remove",
            RephraseStrategy::Placeholder => "placeholder",
        }
    }
}

impl std::str::FromStr for RephraseStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mask" => Ok(RephraseStrategy::Mask),
            "remove" => Ok(RephraseStrategy::Remove),
            "placeholder" => Ok(RephraseStrategy::Placeholder),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Placeholders {
    pub profanity: String,
    pub attributes: BTreeMap<AttributeId, String>,
}

impl Default for Placeholders {
    fn default() -> Self {
        use AttributeId::*;
        let attributes = AttributeId::ALL
            .into_iter()
            .filter(|a| a.is_identity())
            .map(|a| {
                let p = match a {
                    Ethnicity | Religion | Location => "[group]",
                    _ => "[person]",
                };
                (a, p.to_string())
            })
            .collect();
        Placeholders {
            profanity: "[removed]".to_string(),
            attributes,
        }
    }
}

impl Placeholders {
    fn for_region(&self, sources: &[MatchSpan]) -> &str {
        if sources.iter().any(|s| s.attribute.is_none()) {
            return &self.profanity;
        }
        sources
            .iter()
            .filter_map(|s| s.attribute)
            .min()
            .and_then(|a| self.attributes.get(&a))
            .unwrap_or(&self.profanity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DareConfig {
    pub strategy: RephraseStrategy,
    /// Upper bound on eliminate/re-detect rounds.
    pub max_passes: usize,
    pub placeholders: Placeholders,
}

impl Default for DareConfig {
    fn default() -> Self {
        DareConfig {
            strategy: RephraseStrategy::Mask,
            max_passes: 8,
            placeholders: Placeholders::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RephraseEdit {
    /// Replaced scalar range of the original text. Usually the span itself;
    /// `Remove` may also take one following space.
    pub start: usize,
    pub end: usize,
    pub span: MatchSpan,
    pub replacement: String,
    pub strategy: RephraseStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DareOutput {
    pub original: String,
    pub detected: bool,
    pub spans: Vec<MatchSpan>,
    pub labels: Vec<AttributeLabel>,
    pub revealed: String,
    pub eliminated: String,
    pub edits: Vec<RephraseEdit>,
    pub strategy: RephraseStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DareDetection {
    pub detected: bool,
    pub spans: Vec<MatchSpan>,
    pub detection: DetectionResult,
}

/// Overlapping spans fused into one region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedSpan {
    pub start: usize,
    pub end: usize,
    pub sources: Vec<MatchSpan>,
}

impl MergedSpan {
    /// Sorted, de-duplicated tags: `profanity` or the attribute name.
    pub fn tags(&self) -> Vec<&'static str> {
        let mut tags: Vec<&'static str> = self.sources.iter().map(span_tag).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    /// A single span describing the whole region of `text`.
    fn as_match_span(&self, chars: &[char]) -> MatchSpan {
        let mut ids: Vec<&str> = self.sources.iter().map(|s| s.lexicon_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        let attribute = if self.sources.iter().any(|s| s.attribute.is_none()) {
            None
        } else {
            self.sources.iter().filter_map(|s| s.attribute).min()
        };
        MatchSpan {
            start: self.start,
            end: self.end,
            phrase: normalize_phrase(&chars[self.start..self.end].iter().collect::<String>()),
            lexicon_id: ids.join("+"),
            attribute,
        }
    }
}

impl RephraseStrategy {
    /// Whether this strategy rewrites `span`. Mask and Remove only touch
    /// profanity; Placeholder also replaces identity keywords.
    pub fn targets(self, span: &MatchSpan) -> bool {
        match (self, span.attribute) {
            (_, None) => true,
            (RephraseStrategy::Placeholder, Some(a)) => a.is_identity(),
            _ => false,
        }
    }
}

pub fn span_tag(span: &MatchSpan) -> &'static str {
    span.attribute.map_or(PROFANITY_TAG, AttributeId::as_str)
}

/// Fuses spans whose ranges overlap. Touching spans stay separate.
pub fn merge_spans(spans: &[MatchSpan]) -> Vec<MergedSpan> {
    let mut sorted: Vec<&MatchSpan> = spans.iter().collect();
    sorted.sort();
    let mut out: Vec<MergedSpan> = Vec::new();
    for s in sorted {
        match out.last_mut() {
            Some(m) if s.start < m.end => {
                m.end = m.end.max(s.end);
                if !m.sources.contains(s) {
                    m.sources.push(s.clone());
                }
            }
            _ => out.push(MergedSpan {
                start: s.start,
                end: s.end,
                sources: vec![s.clone()],
            }),
        }
    }
    out
}

fn check_regions(regions: &[MergedSpan], len: usize) -> Result<(), DareError> {
    let mut prev_end = 0;
    for r in regions {
        if r.end > len || r.start >= r.end {
            return Err(DareError::SpanOutOfRange {
                start: r.start,
                end: r.end,
                len,
            });
        }
        if r.start < prev_end {
            return Err(DareError::OverlapAfterMerge(r.start));
        }
        prev_end = r.end;
    }
    Ok(())
}

fn legend_description(tag: &str) -> &'static str {
    if tag == PROFANITY_TAG {
        return "Offensive or profane wording.";
    }
    tag.parse::<AttributeId>()
        .map(AttributeId::description)
        .unwrap_or("")
}

/// Annotates `text`; returns it unchanged when there are no spans.
pub fn dare_reveal(
    text: &str,
    spans: &[MatchSpan],
    labels: &[AttributeLabel],
) -> Result<String, DareError> {
    if spans.is_empty() {
        return Ok(text.to_string());
    }
    let chars: Vec<char> = text.chars().collect();
    let regions = merge_spans(spans);
    check_regions(&regions, chars.len())?;

    let mut out = String::with_capacity(text.len() + 32 * regions.len());
    let mut pos = 0;
    for r in &regions {
        out.extend(&chars[pos..r.start]);
        out.push_str("[[");
        out.extend(&chars[r.start..r.end]);
        out.push_str("]]{");
        out.push_str(&r.tags().join(","));
        out.push('}');
        pos = r.end;
    }
    out.extend(&chars[pos..]);

    let mut legend: Vec<&str> = Vec::new();
    if spans.iter().any(|s| s.attribute.is_none()) {
        legend.push(PROFANITY_TAG);
    }
    let label_attrs = merge_labels(labels.iter().cloned());
    let span_attrs = spans.iter().filter_map(|s| s.attribute);
    let mut attrs: Vec<AttributeId> = label_attrs
        .iter()
        .map(|l| l.attribute)
        .chain(span_attrs)
        .collect();
    attrs.sort();
    attrs.dedup();
    legend.extend(attrs.iter().map(|a| a.as_str()));

    out.push_str(LEGEND_HEADER);
    let lines: Vec<String> = legend
        .iter()
        .map(|t| format!("- {t}: {}", legend_description(t)))
        .collect();
    out.push_str(&lines.join("\n"));
    Ok(out)
}

/// Removes the legend and every `[[...]]{...}` wrapper added by [`dare_reveal`].
///
/// This inverts `dare_reveal` for texts that do not themselves contain
/// `[[` or the legend header.
pub fn strip_annotations(revealed: &str) -> String {
    let body = match revealed.rfind(LEGEND_HEADER) {
        Some(i)
            if revealed[i + LEGEND_HEADER.len()..]
                .lines()
                .all(|l| l.starts_with("- ")) =>
        {
            &revealed[..i]
        }
        _ => revealed,
    };
    let mut out = String::with_capacity(body.len());
    let mut rest = body;
    while let Some(open) = rest.find("[[") {
        let after = &rest[open + 2..];
        let parsed = after.find("]]{").and_then(|close| {
            let tags = &after[close + 3..];
            let end = tags.find('}')?;
            let valid = tags[..end]
                .chars()
                .all(|c| c.is_ascii_alphabetic() || c == ',');
            valid.then_some((close, close + 3 + end + 1))
        });
        match parsed {
            Some((close, consumed)) => {
                out.push_str(&rest[..open]);
                out.push_str(&after[..close]);
                rest = &after[consumed..];
            }
            None => {
                out.push_str(&rest[..open + 2]);
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Applies non-overlapping edits, sorted by start, to `text`.
pub fn apply_edits(text: &str, edits: &[RephraseEdit]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for e in edits {
        out.extend(&chars[pos..e.start]);
        out.push_str(&e.replacement);
        pos = e.end;
    }
    out.extend(&chars[pos.min(chars.len())..]);
    out
}

/// Keeps the first word character of the region unless `full`.
fn mask(chars: &[char], full: bool) -> String {
    let mut seen_word_char = full;
    chars
        .iter()
        .map(|&c| {
            if !is_word_char(c) {
                c
            } else if seen_word_char {
                '*'
            } else {
                seen_word_char = true;
                c
            }
        })
        .collect()
}

/// One rewrite of `chars` over `regions`.
struct Rewrite {
    text: String,
    edits: Vec<RephraseEdit>,
    /// Original scalar range behind every output scalar.
    provenance: Vec<(usize, usize)>,
}

/// Regions overlapping a range in `hard` are masked completely.
fn rewrite(
    chars: &[char],
    regions: &[MergedSpan],
    strategy: RephraseStrategy,
    placeholders: &Placeholders,
    hard: &[(usize, usize)],
) -> Rewrite {
    let mut text = String::with_capacity(chars.len());
    let mut provenance = Vec::with_capacity(chars.len());
    let mut edits = Vec::with_capacity(regions.len());
    let mut pos = 0;
    let mut last = None;
    for (i, r) in regions.iter().enumerate() {
        for (j, &c) in chars.iter().enumerate().take(r.start).skip(pos) {
            text.push(c);
            provenance.push((j, j + 1));
            last = Some(c);
        }
        let replacement = match strategy {
            RephraseStrategy::Mask => {
                let full = hard.iter().any(|&(s, e)| s < r.end && r.start < e);
                mask(&chars[r.start..r.end], full)
            }
            RephraseStrategy::Remove => String::new(),
            RephraseStrategy::Placeholder => placeholders.for_region(&r.sources).to_string(),
        };
        let mut end = r.end;
        if strategy == RephraseStrategy::Remove {
            let next_start = regions.get(i + 1).map_or(chars.len(), |n| n.start);
            if last == Some(' ') && end < next_start && chars.get(end) == Some(&' ') {
                end += 1;
            }
        }
        for c in replacement.chars() {
            text.push(c);
            provenance.push((r.start, end));
            last = Some(c);
        }
        edits.push(RephraseEdit {
            start: r.start,
            end,
            span: r.as_match_span(chars),
            replacement,
            strategy,
        });
        pos = end;
    }
    for (j, &c) in chars.iter().enumerate().skip(pos) {
        text.push(c);
        provenance.push((j, j + 1));
    }
    Rewrite {
        text,
        edits,
        provenance,
    }
}

/// The pipeline bound to compiled matchers and settings.
#[derive(Debug, Clone)]
pub struct Dare {
    matchers: MatcherSet,
    filter: FilterConfig,
    config: DareConfig,
}

impl Dare {
    pub fn new(matchers: MatcherSet, filter: FilterConfig, config: DareConfig) -> Self {
        Dare {
            matchers,
            filter,
            config,
        }
    }

    pub fn matchers(&self) -> &MatcherSet {
        &self.matchers
    }

    pub fn config(&self) -> &DareConfig {
        &self.config
    }

    pub fn filter(&self) -> &FilterConfig {
        &self.filter
    }

    fn comment(text: &str) -> Comment {
        Comment::new("-", "-", text)
    }

    pub fn detect(&self, text: &str) -> DareDetection {
        let detection =
            detect_offensive(&Self::comment(text), &self.matchers.profanity, &self.filter);
        DareDetection {
            detected: detection.offensive,
            spans: detection.profanity_spans.clone(),
            detection,
        }
    }

    pub fn assign(&self, text: &str, detection: &DareDetection) -> Vec<AttributeLabel> {
        assign_all(&detection.detection, &Self::comment(text), &self.matchers)
    }

    /// Profanity spans plus label evidence, sorted and de-duplicated.
    fn output_spans(detection: &DareDetection, labels: &[AttributeLabel]) -> Vec<MatchSpan> {
        let mut spans: Vec<MatchSpan> = detection
            .spans
            .iter()
            .chain(labels.iter().flat_map(|l| l.evidence_spans.iter()))
            .cloned()
            .collect();
        spans.sort();
        spans.dedup();
        spans
    }

    pub fn reveal(
        &self,
        text: &str,
        spans: &[MatchSpan],
        labels: &[AttributeLabel],
    ) -> Result<String, DareError> {
        dare_reveal(text, spans, labels)
    }

    /// Rewrites the spans the strategy targets until detection on the output
    /// comes back clean.
    pub fn eliminate(
        &self,
        text: &str,
        spans: &[MatchSpan],
        strategy: RephraseStrategy,
    ) -> Result<(String, Vec<RephraseEdit>), DareError> {
        let mut sources: Vec<MatchSpan> = spans
            .iter()
            .filter(|s| strategy.targets(s))
            .cloned()
            .collect();
        if sources.is_empty() {
            return Ok((text.to_string(), Vec::new()));
        }
        let chars: Vec<char> = text.chars().collect();
        let mut regions = merge_spans(&sources);
        check_regions(&regions, chars.len())?;
        let passes = self.config.max_passes.max(1);
        let mut hard: Vec<(usize, usize)> = Vec::new();
        for _ in 0..passes {
            let pass = rewrite(&chars, &regions, strategy, &self.config.placeholders, &hard);
            let det = self.detect(&pass.text);
            if !det.detected {
                return Ok((pass.text, pass.edits));
            }
            let labels = self.assign(&pass.text, &det);
            let hard_before = hard.len();
            for s in Self::output_spans(&det, &labels)
                .into_iter()
                .filter(|s| strategy.targets(s))
            {
                let (start, _) = pass.provenance[s.start];
                let (_, end) = pass.provenance[s.end - 1];
                if !hard.contains(&(start, end)) {
                    hard.push((start, end));
                }
                sources.push(MatchSpan {
                    start,
                    end,
                    phrase: normalize_phrase(&chars[start..end].iter().collect::<String>()),
                    ..s
                });
            }
            let widened = merge_spans(&sources);
            let same = widened.len() == regions.len()
                && widened
                    .iter()
                    .zip(&regions)
                    .all(|(a, b)| (a.start, a.end) == (b.start, b.end));
            regions = widened;
            if same && (strategy != RephraseStrategy::Mask || hard.len() == hard_before) {
                break;
            }
        }
        Err(DareError::FixpointNotReached { passes })
    }

    pub fn process(&self, text: &str) -> Result<DareOutput, DareError> {
        self.process_with(text, self.config.strategy)
    }

    pub fn process_with(
        &self,
        text: &str,
        strategy: RephraseStrategy,
    ) -> Result<DareOutput, DareError> {
        let detection = self.detect(text);
        if !detection.detected {
            return Ok(DareOutput {
                original: text.to_string(),
                detected: false,
                spans: Vec::new(),
                labels: Vec::new(),
                revealed: text.to_string(),
                eliminated: text.to_string(),
                edits: Vec::new(),
                strategy,
            });
        }
        let labels = self.assign(text, &detection);
        let spans = Self::output_spans(&detection, &labels);
        let revealed = self.reveal(text, &spans, &labels)?;
        let (eliminated, edits) = self.eliminate(text, &spans, strategy)?;
        Ok(DareOutput {
            original: text.to_string(),
            detected: true,
            spans,
            labels,
            revealed,
            eliminated,
            edits,
            strategy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexiconKind, PhraseLexicon};

    fn lex(id: &str, kind: LexiconKind, phrases: &[&str]) -> PhraseLexicon {
        PhraseLexicon::new(id, kind, phrases.iter().copied()).unwrap()
    }

    fn dare_with(profanity: &[&str], config: DareConfig) -> Dare {
        let set = MatcherSet::from_lexicons(vec![
            lex("profanity", LexiconKind::Profanity, profanity),
            lex(
                "location",
                LexiconKind::AttributeKeywords(AttributeId::Location),
                &["china"],
            ),
            lex(
                "religion",
                LexiconKind::AttributeKeywords(AttributeId::Religion),
                &["jesus", "christ"],
            ),
            lex(
                "orientation",
                LexiconKind::AttributeKeywords(AttributeId::SexualOrientation),
                &["gay"],
            ),
            lex(
                "software",
                LexiconKind::Gazetteer(AttributeId::Software),
                &["github"],
            ),
        ])
        .unwrap();
        Dare::new(set, FilterConfig::default(), config)
    }

    fn dare() -> Dare {
        dare_with(
            &["fucking", "fuck", "gay ass", "ass"],
            DareConfig::default(),
        )
    }

    fn profanity_span(text: &str, phrase: &str) -> MatchSpan {
        let start = text.find(phrase).unwrap();
        let start = text[..start].chars().count();
        MatchSpan {
            start,
            end: start + phrase.chars().count(),
            phrase: phrase.into(),
            lexicon_id: "profanity".into(),
            attribute: None,
        }
    }

    #[test]
    fn location_row_reveal() {
        let d = dare();
        let out = d.process("fucking china attacked github").unwrap();
        assert!(out.detected);
        let labels: Vec<_> = out.labels.iter().map(|l| l.attribute).collect();
        assert_eq!(labels, [AttributeId::Location, AttributeId::Software]);
        let body = out.revealed.split(LEGEND_HEADER).next().unwrap();
        assert_eq!(
            body,
            "[[fucking]]{profanity} [[china]]{Location} attacked [[github]]{Software}"
        );
        assert!(out.revealed.contains("- Location: "));
        assert_eq!(strip_annotations(&out.revealed), out.original);
    }

    #[test]
    fn reveal_without_spans_is_identity() {
        assert_eq!(dare_reveal("hello", &[], &[]).unwrap(), "hello");
    }

    #[test]
    fn reveal_merges_overlaps_and_sorts_tags() {
        let text = "your gay ass";
        let d = dare();
        let out = d.process(text).unwrap();
        let body = out.revealed.split(LEGEND_HEADER).next().unwrap();
        assert_eq!(body, "your [[gay ass]]{SexualOrientation,profanity}");
        assert_eq!(strip_annotations(&out.revealed), text);
    }

    #[test]
    fn reveal_rejects_out_of_range() {
        let mut s = profanity_span("abc def", "def");
        s.end = 99;
        assert!(matches!(
            dare_reveal("abc def", &[s], &[]),
            Err(DareError::SpanOutOfRange { .. })
        ));
    }

    #[test]
    fn mask_and_remove_religion_row() {
        let d = dare();
        let text = "jesus fucking christ";
        let span = profanity_span(text, "fucking");
        let (masked, edits) = d
            .eliminate(text, std::slice::from_ref(&span), RephraseStrategy::Mask)
            .unwrap();
        assert_eq!(masked, "jesus f****** christ");
        assert_eq!(apply_edits(text, &edits), masked);
        let (removed, edits) = d
            .eliminate(text, &[span], RephraseStrategy::Remove)
            .unwrap();
        assert_eq!(removed, "jesus christ");
        assert_eq!(apply_edits(text, &edits), removed);
        assert_eq!((edits[0].start, edits[0].end), (6, 14));
    }

    #[test]
    fn placeholder_strategy() {
        let d = dare();
        let out = d
            .process_with(
                "fucking china attacked github",
                RephraseStrategy::Placeholder,
            )
            .unwrap();
        assert_eq!(out.eliminated, "[removed] [group] attacked github");
        assert_eq!(apply_edits(&out.original, &out.edits), out.eliminated);
    }

    #[test]
    fn full_process_masks_profanity_only() {
        let out = dare().process("jesus fucking christ").unwrap();
        assert_eq!(out.eliminated, "jesus f****** christ");
        assert!(!dare().detect(&out.eliminated).detected);
    }

    #[test]
    fn clean_text_is_identity() {
        let out = dare().process("hello").unwrap();
        assert!(!out.detected);
        assert!(out.spans.is_empty() && out.labels.is_empty() && out.edits.is_empty());
        assert_eq!(out.revealed, "hello");
        assert_eq!(out.eliminated, "hello");
    }

    #[test]
    fn remove_iterates_when_removal_creates_a_match() {
        let d = dare_with(&["fuck", "big deal"], DareConfig::default());
        let out = d
            .process_with("big fuck deal", RephraseStrategy::Remove)
            .unwrap();
        assert_eq!(out.eliminated, "");
        assert_eq!(apply_edits(&out.original, &out.edits), out.eliminated);
        assert!(!d.detect(&out.eliminated).detected);
    }

    #[test]
    fn single_letter_phrase_is_masked_completely() {
        let d = dare_with(&["f", "fuck"], DareConfig::default());
        let out = d
            .process_with("oh f off, fuck", RephraseStrategy::Mask)
            .unwrap();
        assert_eq!(out.eliminated, "oh * off, ****");
        assert!(!d.detect(&out.eliminated).detected);
    }

    #[test]
    fn mask_character_phrase_never_converges() {
        let d = dare_with(&["fuck", "*"], DareConfig::default());
        let err = d.process_with("fuck", RephraseStrategy::Mask).unwrap_err();
        assert!(matches!(err, DareError::FixpointNotReached { .. }));
    }

    #[test]
    fn placeholder_inside_lexicon_is_reported() {
        let d = dare_with(&["removed", "shit"], DareConfig::default());
        let err = d
            .process_with("shit", RephraseStrategy::Placeholder)
            .unwrap_err();
        assert!(matches!(err, DareError::FixpointNotReached { .. }));
    }

    #[test]
    fn idempotent_on_eliminated_text() {
        let d = dare();
        for s in [
            RephraseStrategy::Mask,
            RephraseStrategy::Remove,
            RephraseStrategy::Placeholder,
        ] {
            let out = d
                .process_with("fucking china, jesus fucking christ", s)
                .unwrap();
            assert!(!d.process(&out.eliminated).unwrap().detected, "{s:?}");
        }
    }

    #[test]
    fn strip_leaves_unrelated_brackets() {
        assert_eq!(strip_annotations("a [[b]] c"), "a [[b]] c");
        assert_eq!(
            strip_annotations("x [[y]]{not valid!} z"),
            "x [[y]]{not valid!} z"
        );
    }

    #[test]
    fn strategy_parse_and_json() {
        assert_eq!(
            "Mask".parse::<RephraseStrategy>().unwrap(),
            RephraseStrategy::Mask
        );
        assert!("rewrite".parse::<RephraseStrategy>().is_err());
        assert_eq!(
            serde_json::to_string(&RephraseStrategy::Placeholder).unwrap(),
            "\"placeholder\""
        );
    }

    #[test]
    fn output_json_field_names() {
        let out = dare().process("jesus fucking christ").unwrap();
        let v = serde_json::to_value(&out).unwrap();
        for key in [
            "original",
            "detected",
            "spans",
            "labels",
            "revealed",
            "eliminated",
            "edits",
            "strategy",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: DareOutput = serde_json::from_value(v).unwrap();
        assert_eq!(back, out);
    }
}
