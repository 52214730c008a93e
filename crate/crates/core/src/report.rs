//! Corpus-level aggregation of classified results.
//!
//! Per-project totals count each exclusionary comment once. Per-attribute
//! totals count one per (comment, attribute) pair, so a comment with two
//! labels adds to two attributes. The heatmap uses the same per-attribute
//! counting restricted to the top projects.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::ResultRecord;
use crate::taxonomy::AttributeId;

pub const DEFAULT_TOP_K: usize = 15;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    UnwritablePath {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot read report {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error("top_k must be at least 1")]
    InvalidTopK,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectCounts {
    pub project_id: String,
    #[serde(rename = "count")]
    pub exclusionary_comment_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub projects: Vec<ProjectCounts>,
    pub projects_with_offences: usize,
    pub total_projects: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeCounts {
    pub attribute: AttributeId,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeReport {
    pub attributes: Vec<AttributeCounts>,
    pub total_exclusionary: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub project_id: String,
    pub attribute: AttributeId,
    pub count: u64,
}

/// Attribute rows by project columns. `cells` is row-major: all projects of
/// the first attribute, then the next attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmap {
    pub top_k: usize,
    pub projects: Vec<String>,
    pub attributes: Vec<AttributeId>,
    pub cells: Vec<HeatmapCell>,
    /// Number of attributes with a nonzero cell, per project column.
    pub distinct_attributes: Vec<usize>,
}

impl Heatmap {
    pub fn get(&self, attribute: AttributeId, project: &str) -> Option<u64> {
        let col = self.projects.iter().position(|p| p == project)?;
        Some(self.cells[attribute.index() * self.projects.len() + col].count)
    }

    pub fn column_sum(&self, project: &str) -> u64 {
        AttributeId::ALL
            .iter()
            .filter_map(|&a| self.get(a, project))
            .sum()
    }

    pub fn row_sum(&self, attribute: AttributeId) -> u64 {
        let n = self.projects.len();
        self.cells[attribute.index() * n..(attribute.index() + 1) * n]
            .iter()
            .map(|c| c.count)
            .sum()
    }
}

fn exclusionary(results: &[ResultRecord]) -> impl Iterator<Item = &ResultRecord> {
    results.iter().filter(|r| r.is_exclusionary())
}

/// Distinct attributes of one record; a malformed file could repeat one.
fn record_attributes(r: &ResultRecord) -> impl Iterator<Item = AttributeId> {
    let mut seen = [false; 11];
    for l in &r.labels {
        seen[l.attribute.index()] = true;
    }
    AttributeId::ALL
        .into_iter()
        .filter(move |a| seen[a.index()])
}

/// Projects with at least one exclusionary comment, most offences first,
/// ties by project id. `total_projects` defaults to the projects present in
/// `results` when the corpus size is unknown.
pub fn offences_per_project(
    results: &[ResultRecord],
    total_projects: Option<usize>,
) -> ProjectReport {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in exclusionary(results) {
        *counts.entry(&r.project_id).or_default() += 1;
    }
    let mut projects: Vec<ProjectCounts> = counts
        .into_iter()
        .map(|(p, c)| ProjectCounts {
            project_id: p.to_string(),
            exclusionary_comment_count: c,
        })
        .collect();
    projects.sort_by(|a, b| {
        b.exclusionary_comment_count
            .cmp(&a.exclusionary_comment_count)
            .then_with(|| a.project_id.cmp(&b.project_id))
    });
    let present = results
        .iter()
        .map(|r| r.project_id.as_str())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let total_projects = total_projects.unwrap_or(present).max(projects.len());
    let with = projects.len();
    let percentage = if total_projects == 0 {
        0.0
    } else {
        100.0 * with as f64 / total_projects as f64
    };
    ProjectReport {
        projects,
        projects_with_offences: with,
        total_projects,
        percentage,
    }
}

pub fn offences_per_attribute(results: &[ResultRecord]) -> AttributeReport {
    let mut counts = [0u64; 11];
    let mut total = 0;
    for r in exclusionary(results) {
        total += 1;
        for a in record_attributes(r) {
            counts[a.index()] += 1;
        }
    }
    AttributeReport {
        attributes: AttributeId::ALL
            .into_iter()
            .map(|attribute| AttributeCounts {
                attribute,
                count: counts[attribute.index()],
            })
            .collect(),
        total_exclusionary: total,
    }
}

pub fn attribute_project_heatmap(
    results: &[ResultRecord],
    top_k: usize,
) -> Result<Heatmap, ReportError> {
    if top_k == 0 {
        return Err(ReportError::InvalidTopK);
    }
    let projects: Vec<String> = offences_per_project(results, None)
        .projects
        .into_iter()
        .take(top_k)
        .map(|p| p.project_id)
        .collect();
    let col_of: BTreeMap<&str, usize> = projects
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let n = projects.len();
    let mut grid = vec![0u64; 11 * n];
    for r in exclusionary(results) {
        if let Some(&col) = col_of.get(r.project_id.as_str()) {
            for a in record_attributes(r) {
                grid[a.index() * n + col] += 1;
            }
        }
    }
    let cells = AttributeId::ALL
        .into_iter()
        .flat_map(|a| projects.iter().enumerate().map(move |(col, p)| (a, col, p)))
        .map(|(attribute, col, p)| HeatmapCell {
            project_id: p.clone(),
            attribute,
            count: grid[attribute.index() * n + col],
        })
        .collect();
    let distinct_attributes = (0..n)
        .map(|col| {
            AttributeId::ALL
                .iter()
                .filter(|a| grid[a.index() * n + col] > 0)
                .count()
        })
        .collect();
    Ok(Heatmap {
        top_k,
        projects,
        attributes: AttributeId::ALL.to_vec(),
        cells,
        distinct_attributes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportView {
    Projects,
    Attributes,
    Heatmap,
}

impl std::str::FromStr for ReportView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "projects" => Ok(ReportView::Projects),
            "attributes" => Ok(ReportView::Attributes),
            "heatmap" => Ok(ReportView::Heatmap),
            other => Err(format!(
                "unknown view `{other}` (expected projects, attributes or heatmap)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Projects(ProjectReport),
    Attributes(AttributeReport),
    Heatmap(Heatmap),
}

impl Report {
    pub fn build(
        view: ReportView,
        results: &[ResultRecord],
        top_k: usize,
        total_projects: Option<usize>,
    ) -> Result<Report, ReportError> {
        if top_k == 0 {
            return Err(ReportError::InvalidTopK);
        }
        Ok(match view {
            ReportView::Projects => Report::Projects(offences_per_project(results, total_projects)),
            ReportView::Attributes => Report::Attributes(offences_per_attribute(results)),
            ReportView::Heatmap => Report::Heatmap(attribute_project_heatmap(results, top_k)?),
        })
    }

    pub fn view(&self) -> ReportView {
        match self {
            Report::Projects(_) => ReportView::Projects,
            Report::Attributes(_) => ReportView::Attributes,
            Report::Heatmap(_) => ReportView::Heatmap,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Long-form CSV with LF line endings and a fixed header per view.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Projects(r) => {
                out.push_str("project_id,count\n");
                for p in &r.projects {
                    out.push_str(&format!(
                        "{},{}\n",
                        csv_field(&p.project_id),
                        p.exclusionary_comment_count
                    ));
                }
            }
            Report::Attributes(r) => {
                out.push_str("attribute,count\n");
                for a in &r.attributes {
                    out.push_str(&format!("{},{}\n", a.attribute, a.count));
                }
            }
            Report::Heatmap(h) => {
                out.push_str("project_id,attribute,count\n");
                for c in &h.cells {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        csv_field(&c.project_id),
                        c.attribute,
                        c.count
                    ));
                }
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

pub fn render_report(report: &Report, format: ExportFormat) -> String {
    match format {
        ExportFormat::Csv => report.to_csv(),
        ExportFormat::Json => report.to_json(),
    }
}

pub fn export_report(
    report: &Report,
    format: ExportFormat,
    path: &Path,
) -> Result<(), ReportError> {
    fs::write(path, render_report(report, format)).map_err(|source| ReportError::UnwritablePath {
        path: path.to_path_buf(),
        source,
    })
}

/// Rows of an exported CSV, as (key columns, count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvRow {
    pub keys: Vec<String>,
    pub count: u64,
}

/// Reads back a JSON export of the given view.
pub fn read_json_report(path: &Path, view: ReportView) -> Result<Report, ReportError> {
    let err = |message: String| ReportError::Unreadable {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let parsed = match view {
        ReportView::Projects => serde_json::from_str(&text).map(Report::Projects),
        ReportView::Attributes => serde_json::from_str(&text).map(Report::Attributes),
        ReportView::Heatmap => serde_json::from_str(&text).map(Report::Heatmap),
    };
    parsed.map_err(|e| err(e.to_string()))
}

/// Reads back a CSV export; the last column is the count.
pub fn read_csv_report(path: &Path) -> Result<(Vec<String>, Vec<CsvRow>), ReportError> {
    let err = |message: String| ReportError::Unreadable {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let n = rec.len();
        let count = rec
            .get(n.saturating_sub(1))
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| err(format!("bad count in row {rec:?}")))?;
        rows.push(CsvRow {
            keys: rec.iter().take(n - 1).map(str::to_string).collect(),
            count,
        });
    }
    Ok((header, rows))
}

impl Report {
    /// The rows [`Report::to_csv`] would emit, for comparison with a re-read file.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        match self {
            Report::Projects(r) => r
                .projects
                .iter()
                .map(|p| CsvRow {
                    keys: vec![p.project_id.clone()],
                    count: p.exclusionary_comment_count,
                })
                .collect(),
            Report::Attributes(r) => r
                .attributes
                .iter()
                .map(|a| CsvRow {
                    keys: vec![a.attribute.to_string()],
                    count: a.count,
                })
                .collect(),
            Report::Heatmap(h) => h
                .cells
                .iter()
                .map(|c| CsvRow {
                    keys: vec![c.project_id.clone(), c.attribute.to_string()],
                    count: c.count,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{AttributeLabel, LabelMethod};

    fn rec(project: &str, id: &str, attrs: &[AttributeId]) -> ResultRecord {
        ResultRecord {
            project_id: project.into(),
            message_id: id.into(),
            offensive: true,
            socially_exclusionary: !attrs.is_empty(),
            labels: attrs
                .iter()
                .map(|&attribute| AttributeLabel {
                    attribute,
                    method: LabelMethod::KeywordMatch,
                    evidence_spans: vec![],
                })
                .collect(),
        }
    }

    fn sample() -> Vec<ResultRecord> {
        use AttributeId::*;
        vec![
            rec("b", "1", &[Software]),
            rec("b", "2", &[Software, Religion]),
            rec("a", "1", &[Age]),
            rec("a", "2", &[Age]),
            rec("c", "1", &[Gender]),
            rec("c", "2", &[]),
        ]
    }

    #[test]
    fn empty_results() {
        let r = offences_per_project(&[], Some(4));
        assert!(r.projects.is_empty());
        assert_eq!((r.projects_with_offences, r.total_projects), (0, 4));
        assert_eq!(r.percentage, 0.0);
        assert!(offences_per_attribute(&[])
            .attributes
            .iter()
            .all(|a| a.count == 0));
        assert_eq!(offences_per_attribute(&[]).attributes.len(), 11);
    }

    #[test]
    fn project_order_and_ties() {
        let r = offences_per_project(&sample(), Some(10));
        let got: Vec<_> = r
            .projects
            .iter()
            .map(|p| (p.project_id.as_str(), p.exclusionary_comment_count))
            .collect();
        assert_eq!(got, [("a", 2), ("b", 2), ("c", 1)]);
        assert_eq!(r.projects_with_offences, 3);
        assert!((r.percentage - 30.0).abs() < 1e-12);
    }

    #[test]
    fn attributes_count_pairs() {
        let r = offences_per_attribute(&sample());
        assert_eq!(r.total_exclusionary, 5);
        let sum: u64 = r.attributes.iter().map(|a| a.count).sum();
        assert_eq!(sum, 6);
        assert_eq!(r.attributes[AttributeId::Software.index()].count, 2);
    }

    #[test]
    fn heatmap_marginals() {
        let results = sample();
        let h = attribute_project_heatmap(&results, 3).unwrap();
        assert_eq!(h.projects, ["a", "b", "c"]);
        assert_eq!(h.cells.len(), 33);
        let attrs = offences_per_attribute(&results);
        for a in AttributeId::ALL {
            assert_eq!(h.row_sum(a), attrs.attributes[a.index()].count);
        }
        assert_eq!(h.distinct_attributes, [1, 2, 1]);
        assert_eq!(h.get(AttributeId::Religion, "b"), Some(1));
        assert!(h.column_sum("b") >= 2);
    }

    #[test]
    fn heatmap_top_k_truncates() {
        let h = attribute_project_heatmap(&sample(), 1).unwrap();
        assert_eq!(h.projects, ["a"]);
        assert_eq!(h.column_sum("a"), 2);
        assert!(matches!(
            attribute_project_heatmap(&sample(), 0),
            Err(ReportError::InvalidTopK)
        ));
    }

    #[test]
    fn csv_headers_and_empty_file() {
        let r = Report::build(ReportView::Projects, &[], 15, None).unwrap();
        assert_eq!(r.to_csv(), "project_id,count\n");
        let r = Report::build(ReportView::Heatmap, &[], 15, None).unwrap();
        assert_eq!(r.to_csv(), "project_id,attribute,count\n");
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        let r = Report::build(
            ReportView::Projects,
            &[rec("a,\"b\"", "1", &[AttributeId::Age])],
            15,
            None,
        )
        .unwrap();
        assert_eq!(r.to_csv(), "project_id,count\n\"a,\"\"b\"\"\",1\n");
    }

    #[test]
    fn export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for view in [
            ReportView::Projects,
            ReportView::Attributes,
            ReportView::Heatmap,
        ] {
            let report = Report::build(view, &sample(), 15, Some(5)).unwrap();
            let json = dir.path().join("r.json");
            export_report(&report, ExportFormat::Json, &json).unwrap();
            assert_eq!(read_json_report(&json, view).unwrap(), report);
            let csv = dir.path().join("r.csv");
            export_report(&report, ExportFormat::Csv, &csv).unwrap();
            let bytes = fs::read(&csv).unwrap();
            assert!(!bytes.contains(&b'\r'));
            assert!(!bytes.starts_with(&[0xEF, 0xBB, 0xBF]));
            let (_, rows) = read_csv_report(&csv).unwrap();
            assert_eq!(rows, report.csv_rows());
        }
    }

    #[test]
    fn unwritable_path() {
        let r = Report::build(ReportView::Attributes, &[], 1, None).unwrap();
        let err =
            export_report(&r, ExportFormat::Csv, Path::new("/no/such/dir/r.csv")).unwrap_err();
        assert!(matches!(err, ReportError::UnwritablePath { .. }));
    }
}
