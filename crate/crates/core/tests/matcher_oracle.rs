use dare_core::{LexiconKind, MatchSpan, PhraseLexicon, PhraseMatcher};
use dare_testkit::{naive_find, MatcherCaseGen, OracleLexicon, OracleSpan};
use proptest::prelude::*;

fn compile(lexicons: &[OracleLexicon]) -> PhraseMatcher {
    let lex: Vec<PhraseLexicon> = lexicons
        .iter()
        .map(|l| {
            PhraseLexicon::new(l.id.clone(), LexiconKind::Profanity, l.phrases.iter()).unwrap()
        })
        .collect();
    PhraseMatcher::compile(&lex).unwrap()
}

fn as_tuples(spans: &[MatchSpan]) -> Vec<OracleSpan> {
    spans
        .iter()
        .map(|s| (s.start, s.end, s.phrase.clone(), s.lexicon_id.clone()))
        .collect()
}

#[test]
fn agrees_with_brute_force_on_random_cases() {
    let mut gen = MatcherCaseGen::new(0x5eed);
    let mut hits = 0;
    for case in 0..10_000 {
        let lexicons = gen.lexicons(20);
        let text = gen.text(200);
        let expected = naive_find(&text, &lexicons);
        let got = as_tuples(&compile(&lexicons).find_matches(&text));
        assert_eq!(
            got, expected,
            "case {case}: text {text:?} lexicons {lexicons:?}"
        );
        hits += expected.len();
    }
    assert!(hits > 10_000, "generator too sparse: {hits} hits");
}

#[test]
fn overlapping_and_nested_phrases() {
    let lexicons = vec![
        OracleLexicon {
            id: "a".into(),
            attribute: None,
            phrases: vec!["ab".into(), "ab ab".into(), "ab ab ab".into()],
        },
        OracleLexicon {
            id: "b".into(),
            attribute: None,
            phrases: vec!["ab".into()],
        },
    ];
    let text = "AB ab\n\tab, ab-ab";
    assert_eq!(
        as_tuples(&compile(&lexicons).find_matches(text)),
        naive_find(text, &lexicons)
    );
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "shit", "ass", "gay ass", "class", "crap", "c", "ünï", "x9",
    ])
    .prop_map(str::to_string)
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        (
            word(),
            prop::sample::select(vec![" ", "  ", "\n", ".", "-", "", "\t", "!"]),
        ),
        0..20,
    )
    .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

fn fixed_matcher() -> PhraseMatcher {
    compile(&[OracleLexicon {
        id: "p".into(),
        attribute: None,
        phrases: vec![
            "shit".into(),
            "ass".into(),
            "gay ass".into(),
            "crap".into(),
            "ünï".into(),
        ],
    }])
}

proptest! {
    #[test]
    fn case_does_not_change_spans(t in text()) {
        let m = fixed_matcher();
        prop_assert_eq!(m.find_matches(&t), m.find_matches(&t.to_uppercase()));
    }

    #[test]
    fn deterministic_and_sorted(t in text()) {
        let m = fixed_matcher();
        let a = m.find_matches(&t);
        prop_assert_eq!(&a, &m.find_matches(&t));
        let mut sorted = a.clone();
        sorted.sort_by_key(|s| (s.start, s.end, s.lexicon_id.clone()));
        prop_assert_eq!(a, sorted);
    }

    #[test]
    fn spans_slice_back_to_their_phrase(t in text()) {
        let m = fixed_matcher();
        for s in m.find_matches(&t) {
            prop_assert_eq!(dare_core::lexicon::normalize_phrase(s.slice(&t)), s.phrase.clone());
        }
    }

    #[test]
    fn spans_survive_embedding(t in text(), pre in "[a-z ]{0,5}", post in "[a-z ]{0,5}") {
        // Wrapping with spaces keeps every span, shifted by the prefix length.
        let m = fixed_matcher();
        let pre = format!("{pre} ");
        let wrapped = format!("{pre}{t} {post}");
        let shift = pre.chars().count();
        let inner: Vec<_> = m.find_matches(&t).into_iter().map(|s| (s.start + shift, s.end + shift)).collect();
        let outer: Vec<_> = m.find_matches(&wrapped).into_iter().map(|s| (s.start, s.end)).collect();
        for span in inner {
            prop_assert!(outer.contains(&span));
        }
    }
}
