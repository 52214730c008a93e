//! Detection and mitigation of socially-exclusionary language in software
//! engineering chat.
//!
//! The crate is organised as a pipeline:
//!
//! * [`lexicon`] loads phrase lists and [`matcher`] compiles them into a
//!   multi-pattern automaton with word-boundary semantics.
//! * [`detect`] flags offensive comments and [`classify`] assigns them
//!   attributes from the [`taxonomy`].
//! * [`corpus`] runs that pipeline over JSONL/CSV chat exports and
//!   [`report`] aggregates the results per project and per attribute.
//! * [`dare`] applies the detect, assign, reveal and eliminate stages to a
//!   single message.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod dare;
pub mod detect;
pub mod lexicon;
pub mod matcher;
pub mod report;
pub mod taxonomy;

pub use classify::{classify_comment, AttributeLabel, ClassifiedComment, LabelMethod};
pub use config::Config;
pub use dare::{Dare, DareConfig, DareOutput, RephraseEdit, RephraseStrategy};
pub use detect::{
    detect_offensive, split_sentences, Comment, DetectionResult, FilterConfig, Sentence,
};
pub use lexicon::{load_lexicon, LexiconError, LexiconKind, LexiconManifest, PhraseLexicon};
pub use matcher::{MatchSpan, MatcherSet, PhraseMatcher};
pub use taxonomy::{AttributeId, Branch, Taxonomy};
