//! Corpus ingestion and the batch classification job.
//!
//! Comments are streamed from JSONL or CSV exports. Malformed records are
//! skipped and reported as diagnostics rather than aborting the run.
//! Classification fans out over rayon in fixed-size chunks and the results
//! file is sorted by `(project_id, message_id)`, so output is independent of
//! scheduling.

use std::collections::{BTreeSet, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{classify_comment, AttributeLabel, ClassifiedComment};
use crate::detect::{Comment, FilterConfig};
use crate::matcher::MatcherSet;

pub const RESULTS_FILE: &str = "results.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

const CHUNK: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read corpus {path}: {source}")]
    UnreadableSource {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corpus header lacks mapped column `{column}` (for {field})")]
    SchemaMismatch { field: &'static str, column: String },
    #[error("cannot parse CSV header: {0}")]
    Header(String),
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses from the file extension: `.csv` is CSV, anything else JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// Column or key names in the corpus for each comment field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMapping {
    pub project_id: String,
    pub message_id: String,
    pub text: String,
    pub author_hash: Option<String>,
    pub timestamp: Option<String>,
}

impl Default for FieldMapping {
    fn default() -> Self {
        FieldMapping {
            project_id: "project_id".into(),
            message_id: "message_id".into(),
            text: "text".into(),
            author_hash: Some("author_hash".into()),
            timestamp: Some("timestamp".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSource {
    pub format: CorpusFormat,
    pub path: PathBuf,
    pub mapping: FieldMapping,
    /// Used when a record has no project field, e.g. single-project exports.
    pub default_project: Option<String>,
}

impl CorpusSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        CorpusSource {
            format: CorpusFormat::from_path(&path),
            path,
            mapping: FieldMapping::default(),
            default_project: None,
        }
    }

    pub fn with_mapping(mut self, mapping: FieldMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn with_format(mut self, format: CorpusFormat) -> Self {
        self.format = format;
        self
    }

    pub fn with_default_project(mut self, project: Option<String>) -> Self {
        self.default_project = project;
        self
    }
}

/// A skipped record. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestDiagnostic {
    pub line: u64,
    pub reason: String,
}

enum Reader {
    Jsonl {
        lines: io::Split<BufReader<File>>,
        line: u64,
    },
    Csv {
        records: csv::StringRecordsIntoIter<File>,
        columns: CsvColumns,
    },
}

struct CsvColumns {
    project_id: Option<usize>,
    message_id: usize,
    text: usize,
    author_hash: Option<usize>,
    timestamp: Option<usize>,
}

/// Streaming comment reader over a [`CorpusSource`].
pub struct Ingest {
    reader: Reader,
    mapping: FieldMapping,
    default_project: Option<String>,
    seen: HashSet<(String, String)>,
    diagnostics: Vec<IngestDiagnostic>,
    io_error: Option<String>,
}

pub fn ingest(source: &CorpusSource) -> Result<Ingest, IngestError> {
    let unreadable = |e| IngestError::UnreadableSource {
        path: source.path.clone(),
        source: e,
    };
    let file = File::open(&source.path).map_err(unreadable)?;
    let reader = match source.format {
        CorpusFormat::Jsonl => Reader::Jsonl {
            lines: BufReader::new(file).split(b'\n'),
            line: 0,
        },
        CorpusFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(file);
            let headers = rdr
                .headers()
                .map_err(|e| IngestError::Header(e.to_string()))?
                .clone();
            let find = |name: &str| headers.iter().position(|h| h == name);
            let m = &source.mapping;
            let require = |field: &'static str, name: &str| {
                find(name).ok_or_else(|| IngestError::SchemaMismatch {
                    field,
                    column: name.to_string(),
                })
            };
            let project_id = match find(&m.project_id) {
                Some(i) => Some(i),
                None if source.default_project.is_some() => None,
                None => {
                    return Err(IngestError::SchemaMismatch {
                        field: "project_id",
                        column: m.project_id.clone(),
                    })
                }
            };
            let columns = CsvColumns {
                project_id,
                message_id: require("message_id", &m.message_id)?,
                text: require("text", &m.text)?,
                author_hash: m.author_hash.as_deref().and_then(find),
                timestamp: m.timestamp.as_deref().and_then(find),
            };
            Reader::Csv {
                records: rdr.into_records(),
                columns,
            }
        }
    };
    Ok(Ingest {
        reader,
        mapping: source.mapping.clone(),
        default_project: source.default_project.clone(),
        seen: HashSet::new(),
        diagnostics: Vec::new(),
        io_error: None,
    })
}

impl Ingest {
    pub fn diagnostics(&self) -> &[IngestDiagnostic] {
        &self.diagnostics
    }

    /// Set when reading stopped early on an I/O error.
    pub fn io_error(&self) -> Option<&str> {
        self.io_error.as_deref()
    }

    fn skip(&mut self, line: u64, reason: impl Into<String>) {
        let reason = reason.into();
        log::warn!("skipping record at line {line}: {reason}");
        self.diagnostics.push(IngestDiagnostic { line, reason });
    }

    fn accept(&mut self, line: u64, fields: RawFields) -> Option<Comment> {
        let project_id = fields.project_id.or_else(|| self.default_project.clone());
        let (project_id, message_id, text) = match (project_id, fields.message_id, fields.text) {
            (Some(p), Some(m), Some(t)) if !p.is_empty() && !m.is_empty() => (p, m, t),
            (None, _, _) => {
                self.skip(
                    line,
                    format!("missing project field `{}`", self.mapping.project_id),
                );
                return None;
            }
            (_, None, _) => {
                self.skip(
                    line,
                    format!("missing message id field `{}`", self.mapping.message_id),
                );
                return None;
            }
            (_, _, None) => {
                self.skip(line, format!("missing text field `{}`", self.mapping.text));
                return None;
            }
            _ => {
                self.skip(line, "empty project or message id");
                return None;
            }
        };
        if !self.seen.insert((project_id.clone(), message_id.clone())) {
            self.skip(
                line,
                format!("duplicate message id {project_id}/{message_id}"),
            );
            return None;
        }
        Some(Comment {
            project_id,
            message_id,
            author_hash: fields.author_hash,
            timestamp: fields.timestamp,
            text,
        })
    }

    fn next_jsonl(&mut self) -> Option<Comment> {
        loop {
            let Reader::Jsonl { lines, line } = &mut self.reader else {
                unreachable!()
            };
            *line += 1;
            let lineno = *line;
            let raw = match lines.next()? {
                Ok(raw) => raw,
                Err(e) => {
                    self.io_error = Some(e.to_string());
                    return None;
                }
            };
            let raw = raw.strip_suffix(b"\r").unwrap_or(&raw);
            if raw.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let value: serde_json::Value = match serde_json::from_slice(raw) {
                Ok(v) => v,
                Err(e) => {
                    self.skip(lineno, format!("invalid JSON: {e}"));
                    continue;
                }
            };
            let Some(obj) = value.as_object() else {
                self.skip(lineno, "record is not a JSON object");
                continue;
            };
            let get = |key: &str| obj.get(key).and_then(json_scalar);
            let m = &self.mapping;
            let fields = RawFields {
                project_id: get(&m.project_id),
                message_id: get(&m.message_id),
                text: obj
                    .get(&m.text)
                    .and_then(|v| v.as_str().map(str::to_string)),
                author_hash: m.author_hash.as_deref().and_then(get),
                timestamp: m.timestamp.as_deref().and_then(get),
            };
            if let Some(c) = self.accept(lineno, fields) {
                return Some(c);
            }
        }
    }

    fn next_csv(&mut self) -> Option<Comment> {
        loop {
            let Reader::Csv { records, columns } = &mut self.reader else {
                unreachable!()
            };
            let record = match records.next()? {
                Ok(r) => r,
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(0);
                    if let csv::ErrorKind::Io(_) = e.kind() {
                        self.io_error = Some(e.to_string());
                        return None;
                    }
                    self.skip(line, format!("malformed CSV record: {e}"));
                    continue;
                }
            };
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let col = |i: Option<usize>| i.and_then(|i| record.get(i)).map(str::to_string);
            let fields = RawFields {
                project_id: col(columns.project_id).filter(|p| !p.is_empty()),
                message_id: col(Some(columns.message_id)),
                text: col(Some(columns.text)),
                author_hash: col(columns.author_hash).filter(|s| !s.is_empty()),
                timestamp: col(columns.timestamp).filter(|s| !s.is_empty()),
            };
            if let Some(c) = self.accept(line, fields) {
                return Some(c);
            }
        }
    }
}

struct RawFields {
    project_id: Option<String>,
    message_id: Option<String>,
    text: Option<String>,
    author_hash: Option<String>,
    timestamp: Option<String>,
}

fn json_scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl Iterator for Ingest {
    type Item = Comment;

    fn next(&mut self) -> Option<Comment> {
        match self.reader {
            Reader::Jsonl { .. } => self.next_jsonl(),
            Reader::Csv { .. } => self.next_csv(),
        }
    }
}

/// One line of the results file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub project_id: String,
    pub message_id: String,
    pub offensive: bool,
    #[serde(default)]
    pub socially_exclusionary: bool,
    #[serde(default)]
    pub labels: Vec<AttributeLabel>,
}

impl From<ClassifiedComment> for ResultRecord {
    fn from(c: ClassifiedComment) -> Self {
        ResultRecord {
            project_id: c.detection.project_id,
            message_id: c.detection.message_id,
            offensive: c.detection.offensive,
            socially_exclusionary: c.socially_exclusionary,
            labels: c.labels,
        }
    }
}

impl ResultRecord {
    /// Exclusionary means offensive with at least one attribute label.
    pub fn is_exclusionary(&self) -> bool {
        self.offensive && !self.labels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounters {
    pub comments_read: u64,
    pub offensive: u64,
    pub exclusionary: u64,
    pub malformed: u64,
    pub projects_seen: u64,
}

/// The summary of one batch run, persisted as `summary.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub run_id: String,
    pub config_hash: String,
    pub filter: FilterConfig,
    pub counters: RunCounters,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub results_file: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<IngestDiagnostic>,
}

impl PipelineRun {
    pub fn load(summary_path: impl AsRef<Path>) -> io::Result<Self> {
        let text = fs::read_to_string(summary_path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write every classified comment instead of only offensive ones.
    pub write_all: bool,
    pub run_id: Option<String>,
}

/// Hash identifying the lexicons and filter a run used.
pub fn config_hash(matchers: &MatcherSet, filter: &FilterConfig) -> String {
    let mut h = Sha256::new();
    h.update(matchers.fingerprint().as_bytes());
    h.update(serde_json::to_vec(filter).unwrap_or_default());
    hex::encode(h.finalize())
}

pub fn run_pipeline(
    source: &CorpusSource,
    matchers: &MatcherSet,
    filter: &FilterConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<PipelineRun, PipelineError> {
    let mut comments = ingest(source)?;
    let mut counters = RunCounters::default();
    let mut projects = BTreeSet::new();
    let mut records: Vec<ResultRecord> = Vec::new();

    loop {
        let chunk: Vec<Comment> = comments.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        counters.comments_read += chunk.len() as u64;
        for c in &chunk {
            if !projects.contains(&c.project_id) {
                projects.insert(c.project_id.clone());
            }
        }
        let classified: Vec<ClassifiedComment> = chunk
            .par_iter()
            .map(|c| classify_comment(c, matchers, filter))
            .collect();
        for c in classified {
            if c.detection.offensive {
                counters.offensive += 1;
            }
            if c.socially_exclusionary {
                counters.exclusionary += 1;
            }
            if opts.write_all || c.detection.offensive {
                records.push(c.into());
            }
        }
    }
    counters.malformed = comments.diagnostics().len() as u64;
    counters.projects_seen = projects.len() as u64;
    records.par_sort_by(|a, b| (&a.project_id, &a.message_id).cmp(&(&b.project_id, &b.message_id)));

    let config_hash = config_hash(matchers, filter);
    fs::create_dir_all(out_dir).map_err(|e| PipelineError::Write {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let results_path = out_dir.join(RESULTS_FILE);
    let results_digest =
        write_results(&results_path, &records).map_err(|e| PipelineError::Write {
            path: results_path.clone(),
            source: e,
        })?;

    let run_id = opts.run_id.clone().unwrap_or_else(|| {
        let mut h = Sha256::new();
        h.update(config_hash.as_bytes());
        h.update(results_digest);
        format!("run-{}", &hex::encode(h.finalize())[..12])
    });
    let io_error = comments.io_error().map(str::to_string);
    let run = PipelineRun {
        run_id,
        config_hash,
        filter: *filter,
        counters,
        complete: io_error.is_none(),
        error: io_error,
        results_file: RESULTS_FILE.to_string(),
        diagnostics: comments.diagnostics().to_vec(),
    };
    let summary_path = out_dir.join(SUMMARY_FILE);
    let mut summary = serde_json::to_string_pretty(&run).expect("summary serializes");
    summary.push('\n');
    fs::write(&summary_path, summary).map_err(|e| PipelineError::Write {
        path: summary_path,
        source: e,
    })?;
    Ok(run)
}

/// Writes JSONL and returns the SHA-256 of the bytes written.
fn write_results(path: &Path, records: &[ResultRecord]) -> io::Result<Vec<u8>> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut h = Sha256::new();
    for r in records {
        let mut line = serde_json::to_vec(r)?;
        line.push(b'\n');
        h.update(&line);
        w.write_all(&line)?;
    }
    w.flush()?;
    Ok(h.finalize().to_vec())
}

/// Reads a results file written by [`run_pipeline`].
pub fn read_results(path: impl AsRef<Path>) -> io::Result<Vec<ResultRecord>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexiconKind, PhraseLexicon};
    use crate::taxonomy::AttributeId;

    fn matchers() -> MatcherSet {
        MatcherSet::from_lexicons(vec![
            PhraseLexicon::new("profanity", LexiconKind::Profanity, ["fuck", "shit"]).unwrap(),
            PhraseLexicon::new(
                "loc",
                LexiconKind::AttributeKeywords(AttributeId::Location),
                ["china"],
            )
            .unwrap(),
        ])
        .unwrap()
    }

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn jsonl_field_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.jsonl",
            "{\"project\":\"aurelia\",\"id\":\"m1\",\"text\":\"hi\"}\n",
        );
        let mapping = FieldMapping {
            project_id: "project".into(),
            message_id: "id".into(),
            ..FieldMapping::default()
        };
        let src = CorpusSource::new(&p).with_mapping(mapping);
        let comments: Vec<_> = ingest(&src).unwrap().collect();
        assert_eq!(comments, [Comment::new("aurelia", "m1", "hi")]);
    }

    #[test]
    fn jsonl_skips_and_diagnoses() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.jsonl",
            concat!(
                "{\"project_id\":\"a\",\"message_id\":1,\"text\":\"one\"}\n",
                "not json\n",
                "\n",
                "{\"project_id\":\"a\",\"text\":\"no id\"}\n",
                "[1,2]\n",
                "{\"project_id\":\"a\",\"message_id\":\"1\",\"text\":\"dup\"}\n",
                "{\"project_id\":\"a\",\"message_id\":\"2\",\"text\":\"two\"}\r\n",
            ),
        );
        let mut it = ingest(&CorpusSource::new(&p)).unwrap();
        let ids: Vec<_> = it.by_ref().map(|c| c.message_id).collect();
        assert_eq!(ids, ["1", "2"]);
        let lines: Vec<_> = it.diagnostics().iter().map(|d| d.line).collect();
        assert_eq!(lines, [2, 4, 5, 6]);
    }

    #[test]
    fn csv_schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.csv",
            "project_id,message_id,body\na,1,hello\n",
        );
        let err = ingest(&CorpusSource::new(&p)).err().unwrap();
        assert!(
            matches!(err, IngestError::SchemaMismatch { field: "text", .. }),
            "{err}"
        );
    }

    #[test]
    fn csv_default_project_and_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.csv",
            "message_id,text\n1,hello\n2,\"a, b\"\n3\n4,x,extra\n5,ok\n",
        );
        let src = CorpusSource::new(&p).with_default_project(Some("solo".into()));
        let mut it = ingest(&src).unwrap();
        let got: Vec<_> = it
            .by_ref()
            .map(|c| (c.project_id, c.message_id, c.text))
            .collect();
        assert_eq!(got.len(), 3);
        assert_eq!(got[1], ("solo".into(), "2".into(), "a, b".into()));
        assert_eq!(it.diagnostics().len(), 2);
    }

    #[test]
    fn csv_without_project_column_or_default() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.csv", "message_id,text\n1,hello\n");
        assert!(matches!(
            ingest(&CorpusSource::new(&p)).err().unwrap(),
            IngestError::SchemaMismatch {
                field: "project_id",
                ..
            }
        ));
    }

    #[test]
    fn unreadable_source() {
        let err = ingest(&CorpusSource::new("/no/such/corpus.jsonl"))
            .err()
            .unwrap();
        assert!(matches!(err, IngestError::UnreadableSource { .. }));
    }

    #[test]
    fn empty_corpus_run() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.jsonl", "");
        let out = dir.path().join("out");
        let run = run_pipeline(
            &CorpusSource::new(&p),
            &matchers(),
            &FilterConfig::default(),
            &out,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(run.counters, RunCounters::default());
        assert!(run.complete);
        assert_eq!(fs::read_to_string(out.join(RESULTS_FILE)).unwrap(), "");
        assert_eq!(PipelineRun::load(out.join(SUMMARY_FILE)).unwrap(), run);
    }

    #[test]
    fn run_sorts_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.jsonl",
            concat!(
                "{\"project_id\":\"b\",\"message_id\":\"2\",\"text\":\"fuck china\"}\n",
                "{\"project_id\":\"a\",\"message_id\":\"9\",\"text\":\"shit\"}\n",
                "{\"project_id\":\"a\",\"message_id\":\"1\",\"text\":\"fine\"}\n",
            ),
        );
        let out = dir.path().join("out");
        let run = run_pipeline(
            &CorpusSource::new(&p),
            &matchers(),
            &FilterConfig::default(),
            &out,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(run.counters.comments_read, 3);
        assert_eq!(run.counters.offensive, 2);
        assert_eq!(run.counters.exclusionary, 1);
        assert_eq!(run.counters.projects_seen, 2);
        let recs = read_results(out.join(RESULTS_FILE)).unwrap();
        let keys: Vec<_> = recs
            .iter()
            .map(|r| (r.project_id.as_str(), r.message_id.as_str()))
            .collect();
        assert_eq!(keys, [("a", "9"), ("b", "2")]);

        let out_all = dir.path().join("all");
        let opts = RunOptions {
            write_all: true,
            run_id: Some("x".into()),
        };
        let run = run_pipeline(
            &CorpusSource::new(&p),
            &matchers(),
            &FilterConfig::default(),
            &out_all,
            &opts,
        )
        .unwrap();
        assert_eq!(run.run_id, "x");
        assert_eq!(read_results(out_all.join(RESULTS_FILE)).unwrap().len(), 3);
    }

    #[test]
    fn result_record_json_shape() {
        let line = r#"{"project_id":"p","message_id":"m","offensive":true,"labels":[{"attribute":"Religion","method":"KeywordMatch","spans":[{"start":0,"end":5,"phrase":"jesus","lexicon_id":"religion"}]}]}"#;
        let r: ResultRecord = serde_json::from_str(line).unwrap();
        assert!(r.is_exclusionary());
        assert_eq!(r.labels[0].attribute, AttributeId::Religion);
    }
}
