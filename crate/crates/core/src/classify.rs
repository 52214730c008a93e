//! Attribute assignment for offensive comments.
//!
//! Identity-based attributes are assigned when any of their keywords occurs
//! anywhere in the comment. Software and Hardware are assigned when a
//! gazetteer entry shares a sentence with a profanity span.

use serde::{Deserialize, Serialize};

use crate::detect::{detect_offensive, split_sentences, Comment, DetectionResult, FilterConfig};
use crate::matcher::{MatchSpan, MatcherSet, PhraseMatcher};
use crate::taxonomy::AttributeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelMethod {
    KeywordMatch,
    GazetteerCooccurrence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeLabel {
    pub attribute: AttributeId,
    pub method: LabelMethod,
    #[serde(rename = "spans")]
    pub evidence_spans: Vec<MatchSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("comment {project_id}/{message_id} is not offensive; attributes are only assigned to offensive comments")]
pub struct NotOffensive {
    pub project_id: String,
    pub message_id: String,
}

fn ensure_offensive(detection: &DetectionResult) -> Result<(), NotOffensive> {
    if detection.offensive {
        Ok(())
    } else {
        Err(NotOffensive {
            project_id: detection.project_id.clone(),
            message_id: detection.message_id.clone(),
        })
    }
}

/// Groups spans by attribute in taxonomy order, skipping empty groups.
fn group_by_attribute(spans: Vec<MatchSpan>, method: LabelMethod) -> Vec<AttributeLabel> {
    let mut buckets: [Vec<MatchSpan>; 11] = Default::default();
    for s in spans {
        if let Some(a) = s.attribute {
            buckets[a.index()].push(s);
        }
    }
    AttributeId::ALL
        .into_iter()
        .zip(buckets)
        .filter(|(_, b)| !b.is_empty())
        .map(|(attribute, evidence_spans)| AttributeLabel {
            attribute,
            method,
            evidence_spans,
        })
        .collect()
}

pub fn assign_identity_attributes(
    detection: &DetectionResult,
    comment: &Comment,
    attribute_matcher: &PhraseMatcher,
) -> Result<Vec<AttributeLabel>, NotOffensive> {
    ensure_offensive(detection)?;
    let spans: Vec<MatchSpan> = attribute_matcher
        .find_matches(&comment.text)
        .into_iter()
        .filter(|s| s.attribute.is_some_and(AttributeId::is_identity))
        .collect();
    Ok(group_by_attribute(spans, LabelMethod::KeywordMatch))
}

pub fn assign_computing_attributes(
    detection: &DetectionResult,
    comment: &Comment,
    gazetteer_matcher: &PhraseMatcher,
) -> Result<Vec<AttributeLabel>, NotOffensive> {
    ensure_offensive(detection)?;
    let gazetteer = gazetteer_matcher.find_matches(&comment.text);
    if gazetteer.is_empty() {
        return Ok(Vec::new());
    }
    let sentences = split_sentences(&comment.text);
    let profane: Vec<_> = detection
        .candidate_sentences
        .iter()
        .filter_map(|&i| sentences.get(i))
        .collect();
    let spans: Vec<MatchSpan> = gazetteer
        .into_iter()
        .filter(|g| g.attribute.is_some_and(|a| !a.is_identity()))
        .filter(|g| profane.iter().any(|s| s.overlaps(g)))
        .collect();
    Ok(group_by_attribute(
        spans,
        LabelMethod::GazetteerCooccurrence,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedComment {
    pub detection: DetectionResult,
    pub labels: Vec<AttributeLabel>,
    pub socially_exclusionary: bool,
}

impl ClassifiedComment {
    pub fn attributes(&self) -> impl Iterator<Item = AttributeId> + '_ {
        self.labels.iter().map(|l| l.attribute)
    }

    pub fn has_label(&self, attribute: AttributeId) -> bool {
        self.attributes().any(|a| a == attribute)
    }
}

/// Merges label lists so that each attribute appears once, in taxonomy order.
pub fn merge_labels(lists: impl IntoIterator<Item = AttributeLabel>) -> Vec<AttributeLabel> {
    let mut merged: Vec<AttributeLabel> = Vec::new();
    for label in lists {
        match merged.iter_mut().find(|l| l.attribute == label.attribute) {
            Some(existing) => {
                for s in label.evidence_spans {
                    if !existing.evidence_spans.contains(&s) {
                        existing.evidence_spans.push(s);
                    }
                }
                existing.evidence_spans.sort();
            }
            None => merged.push(label),
        }
    }
    merged.sort_by_key(|l| l.attribute);
    merged
}

/// Labels for an already offensive detection, using whichever matchers exist.
pub fn assign_all(
    detection: &DetectionResult,
    comment: &Comment,
    matchers: &MatcherSet,
) -> Vec<AttributeLabel> {
    if !detection.offensive {
        return Vec::new();
    }
    let mut labels = Vec::new();
    if let Some(m) = &matchers.attributes {
        labels.extend(assign_identity_attributes(detection, comment, m).unwrap_or_default());
    }
    if let Some(m) = &matchers.gazetteer {
        labels.extend(assign_computing_attributes(detection, comment, m).unwrap_or_default());
    }
    merge_labels(labels)
}

pub fn classify_comment(
    comment: &Comment,
    matchers: &MatcherSet,
    filter: &FilterConfig,
) -> ClassifiedComment {
    let detection = detect_offensive(comment, &matchers.profanity, filter);
    let labels = assign_all(&detection, comment, matchers);
    let socially_exclusionary = detection.offensive && !labels.is_empty();
    ClassifiedComment {
        detection,
        labels,
        socially_exclusionary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexiconKind, PhraseLexicon};

    fn lex(id: &str, kind: LexiconKind, phrases: &[&str]) -> PhraseLexicon {
        PhraseLexicon::new(id, kind, phrases.iter().copied()).unwrap()
    }

    fn set() -> MatcherSet {
        MatcherSet::from_lexicons(vec![
            lex(
                "profanity",
                LexiconKind::Profanity,
                &["fuck", "fucking", "bastard", "shit"],
            ),
            lex(
                "ethnicity",
                LexiconKind::AttributeKeywords(AttributeId::Ethnicity),
                &["indian"],
            ),
            lex(
                "religion",
                LexiconKind::AttributeKeywords(AttributeId::Religion),
                &["jesus", "christ"],
            ),
            lex(
                "location",
                LexiconKind::AttributeKeywords(AttributeId::Location),
                &["china", "india"],
            ),
            lex(
                "software",
                LexiconKind::Gazetteer(AttributeId::Software),
                &["xcode", "windows"],
            ),
            lex(
                "hardware",
                LexiconKind::Gazetteer(AttributeId::Hardware),
                &["pc"],
            ),
        ])
        .unwrap()
    }

    fn attrs(c: &ClassifiedComment) -> Vec<AttributeId> {
        c.attributes().collect()
    }

    fn classify(text: &str) -> ClassifiedComment {
        classify_comment(
            &Comment::new("p", "m", text),
            &set(),
            &FilterConfig::default(),
        )
    }

    #[test]
    fn ethnicity_sample() {
        let c = classify("fuck the indian who down voted the question");
        assert_eq!(attrs(&c), [AttributeId::Ethnicity]);
        assert!(c.socially_exclusionary);
        assert_eq!(c.labels[0].method, LabelMethod::KeywordMatch);
    }

    #[test]
    fn religion_has_two_evidence_spans() {
        let c = classify("jesus fucking christ");
        assert_eq!(attrs(&c), [AttributeId::Religion]);
        let ev: Vec<_> = c.labels[0]
            .evidence_spans
            .iter()
            .map(|s| s.phrase.as_str())
            .collect();
        assert_eq!(ev, ["jesus", "christ"]);
    }

    #[test]
    fn software_sample() {
        let c = classify("Where the fucking hell is this Label Letter Space on Xcode?");
        assert_eq!(attrs(&c), [AttributeId::Software]);
        assert_eq!(c.labels[0].method, LabelMethod::GazetteerCooccurrence);
    }

    #[test]
    fn hardware_row_gets_both_computing_labels() {
        let c =
            classify("what the fuck do you mean you want to update my windows? sick bastard pc");
        assert_eq!(attrs(&c), [AttributeId::Software, AttributeId::Hardware]);
    }

    #[test]
    fn gazetteer_in_other_sentence_is_ignored() {
        let c = classify("this is fucking broken. i use xcode.");
        assert!(c.detection.offensive);
        assert!(c.labels.is_empty());
        assert!(!c.socially_exclusionary);
    }

    #[test]
    fn offensive_without_keywords() {
        let c = classify("shit happens");
        assert!(c.detection.offensive);
        assert!(c.labels.is_empty());
    }

    #[test]
    fn clean_text() {
        let c = classify("hello from china on my pc");
        assert!(!c.detection.offensive);
        assert!(c.labels.is_empty());
        assert!(!c.socially_exclusionary);
    }

    #[test]
    fn not_offensive_is_an_error() {
        let s = set();
        let comment = Comment::new("p", "m", "jesus christ");
        let d = detect_offensive(&comment, &s.profanity, &FilterConfig::default());
        assert!(assign_identity_attributes(&d, &comment, s.attributes.as_ref().unwrap()).is_err());
        assert!(assign_computing_attributes(&d, &comment, s.gazetteer.as_ref().unwrap()).is_err());
    }

    #[test]
    fn multi_label() {
        let c = classify("fucking indian from china on windows");
        assert_eq!(
            attrs(&c),
            [
                AttributeId::Ethnicity,
                AttributeId::Location,
                AttributeId::Software
            ]
        );
    }

    #[test]
    fn merge_keeps_one_label_per_attribute() {
        let span = |s: usize| MatchSpan {
            start: s,
            end: s + 1,
            phrase: "x".into(),
            lexicon_id: "l".into(),
            attribute: Some(AttributeId::Age),
        };
        let a = AttributeLabel {
            attribute: AttributeId::Age,
            method: LabelMethod::KeywordMatch,
            evidence_spans: vec![span(3)],
        };
        let b = AttributeLabel {
            attribute: AttributeId::Age,
            method: LabelMethod::KeywordMatch,
            evidence_spans: vec![span(1), span(3)],
        };
        let merged = merge_labels([a, b]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].evidence_spans.len(), 2);
        assert_eq!(merged[0].evidence_spans[0].start, 1);
    }

    #[test]
    fn label_json_uses_spans_field() {
        let c = classify("jesus fucking christ");
        let v = serde_json::to_value(&c.labels[0]).unwrap();
        assert_eq!(v["attribute"], "Religion");
        assert_eq!(v["method"], "KeywordMatch");
        assert_eq!(v["spans"].as_array().unwrap().len(), 2);
    }
}
