//! `dare`: analyse chat corpora, export reports, check single messages and
//! serve the HTTP API.
//!
//! Exit codes: 0 success or clean text, 1 usage or configuration error,
//! 2 partial failure (skipped records or a truncated read), 3 exclusionary
//! or offensive text detected by `check`.

use std::io::{IsTerminal, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dare_core::config::Config;
use dare_core::corpus::{
    run_pipeline, CorpusFormat, CorpusSource, PipelineRun, RunOptions, RESULTS_FILE, SUMMARY_FILE,
};
use dare_core::report::{
    export_report, render_report, ExportFormat, Report, ReportView, DEFAULT_TOP_K,
};
use dare_core::{Dare, DareOutput, LexiconManifest, RephraseStrategy};

/// Stdout writes that ignore a closed pipe, e.g. `dare report ... | head`.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

const EXIT_PARTIAL: u8 = 2;
const EXIT_DETECTED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dare",
    version,
    about = "Detect and rephrase socially-exclusionary chat messages"
)]
struct Cli {
    /// Configuration file (TOML, or JSON with a .json extension).
    #[arg(long, global = true, env = "DARE_CONFIG", default_value = "dare.toml")]
    config: PathBuf,
    /// Only log errors and skip human-readable summaries.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify every comment of a corpus and write results and a summary.
    Analyze(AnalyzeArgs),
    /// Build a per-project, per-attribute or heatmap report from a run.
    Report(ReportArgs),
    /// Check one message.
    Check(CheckArgs),
    /// Lexicon maintenance.
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
    /// Serve the HTTP API until interrupted.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// JSONL or CSV corpus.
    corpus: PathBuf,
    /// Output directory for results.jsonl and summary.json.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// Corpus format; guessed from the extension by default.
    #[arg(long, value_parser = ["jsonl", "csv"])]
    format: Option<String>,
    /// Project id for records without one.
    #[arg(long)]
    project: Option<String>,
    /// Write every comment to results.jsonl, not only offensive ones.
    #[arg(long = "all", alias = "write-all")]
    write_all: bool,
    /// Fixed run id instead of the content-derived one.
    #[arg(long)]
    run_id: Option<String>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// A results.jsonl file or the run directory holding it.
    #[arg(long, short)]
    input: PathBuf,
    /// projects, attributes or heatmap.
    #[arg(long)]
    view: ReportView,
    /// Projects shown in the heatmap.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    /// csv or json; defaults to the --out extension, else json.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Total number of projects, when no summary.json sits next to the input.
    #[arg(long)]
    total_projects: Option<usize>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Message text.
    #[arg(required_unless_present = "stdin", conflicts_with = "stdin")]
    text: Option<String>,
    /// Read the message from standard input.
    #[arg(long)]
    stdin: bool,
    /// mask, remove or placeholder; defaults to the config.
    #[arg(long)]
    strategy: Option<RephraseStrategy>,
}

#[derive(Debug, Subcommand)]
enum LexiconCommand {
    /// Load every lexicon of a manifest and report dropped duplicates.
    Validate { manifest: PathBuf },
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Bind address; defaults to the config.
    #[arg(long)]
    bind: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Analyze(args) => analyze(cli, args),
        Command::Report(args) => report(cli, args),
        Command::Check(args) => check(cli, args),
        Command::Lexicon {
            command: LexiconCommand::Validate { manifest },
        } => validate(cli, manifest),
        Command::Serve(args) => serve(cli, args),
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    Config::load(&cli.config).with_context(|| "cannot load configuration (set --config)")
}

fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<u8> {
    let config = load_config(cli)?;
    let matchers = LexiconManifest::load(&config.lexicon_manifest)?.compile()?;
    let format = match args.format.as_deref() {
        Some("csv") => CorpusFormat::Csv,
        Some(_) => CorpusFormat::Jsonl,
        None => config
            .corpus
            .format
            .unwrap_or_else(|| CorpusFormat::from_path(&args.corpus)),
    };
    let source = CorpusSource::new(&args.corpus)
        .with_format(format)
        .with_mapping(config.corpus.fields.clone())
        .with_default_project(
            args.project
                .clone()
                .or(config.corpus.default_project.clone()),
        );
    let opts = RunOptions {
        write_all: args.write_all,
        run_id: args.run_id.clone(),
    };
    let run = run_pipeline(&source, &matchers, &config.filter, &args.out, &opts)?;

    for d in &run.diagnostics {
        log::warn!(
            "{}:{}: skipped: {}",
            args.corpus.display(),
            d.line,
            d.reason
        );
    }
    if let Some(e) = &run.error {
        log::error!("corpus read stopped early: {e}");
    }
    if cli.json {
        outln!("{}", serde_json::to_string(&run)?);
    } else if !cli.quiet {
        let c = &run.counters;
        outln!("run           {}", run.run_id);
        outln!("comments      {}", c.comments_read);
        outln!("offensive     {}", c.offensive);
        outln!("exclusionary  {}", c.exclusionary);
        outln!("projects      {}", c.projects_seen);
        outln!("malformed     {}", c.malformed);
        outln!("output        {}", args.out.display());
    }
    Ok(if run.complete && run.diagnostics.is_empty() {
        0
    } else {
        EXIT_PARTIAL
    })
}

fn report(cli: &Cli, args: &ReportArgs) -> Result<u8> {
    let results_path = if args.input.is_dir() {
        args.input.join(RESULTS_FILE)
    } else {
        args.input.clone()
    };
    let results = dare_core::corpus::read_results(&results_path)
        .with_context(|| format!("cannot read results {}", results_path.display()))?;
    let summary = results_path
        .parent()
        .map(|p| p.join(SUMMARY_FILE))
        .filter(|p| p.exists());
    let total = match (args.total_projects, summary) {
        (Some(n), _) => Some(n),
        (None, Some(p)) => Some(PipelineRun::load(&p)?.counters.projects_seen as usize),
        (None, None) => None,
    };
    let report = Report::build(args.view, &results, args.top_k, total)?;
    let format = match (cli.json, args.format.as_deref(), &args.out) {
        (true, _, _) | (_, Some("json"), _) => ExportFormat::Json,
        (_, Some(_), _) => ExportFormat::Csv,
        (_, None, Some(p)) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
            ExportFormat::Csv
        }
        _ => ExportFormat::Json,
    };
    match &args.out {
        Some(path) => {
            export_report(&report, format, path)?;
            log::info!("wrote {}", path.display());
        }
        None => out!("{}", render_report(&report, format)),
    }
    Ok(0)
}

fn check(cli: &Cli, args: &CheckArgs) -> Result<u8> {
    let config = load_config(cli)?;
    let text = match &args.text {
        Some(t) => t.clone(),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .context("cannot read standard input")?;
            s.strip_suffix('\n')
                .map(|t| t.strip_suffix('\r').unwrap_or(t).to_string())
                .unwrap_or(s)
        }
    };
    let strategy = args.strategy.unwrap_or(config.dare.strategy);
    let matchers = LexiconManifest::load(&config.lexicon_manifest)?.compile()?;
    let dare = Dare::new(matchers, config.filter, config.dare.clone());
    let out = dare.process_with(&text, strategy)?;
    if cli.json {
        outln!("{}", serde_json::to_string(&out)?);
    } else if !cli.quiet {
        out!("{}", pretty(&out));
    }
    Ok(if out.detected { EXIT_DETECTED } else { 0 })
}

fn pretty(out: &DareOutput) -> String {
    if !out.detected {
        return "clean: nothing detected\n".to_string();
    }
    let color = std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none();
    let labels: Vec<&str> = out
        .labels
        .iter()
        .map(|l| l.attribute.display_name())
        .collect();
    let labels = if labels.is_empty() {
        "none".to_string()
    } else {
        labels.join(", ")
    };
    let revealed = if color {
        out.revealed
            .replace("[[", "\x1b[1;31m[[")
            .replace("]]{", "]]\x1b[0m{")
    } else {
        out.revealed.clone()
    };
    format!(
        "detected: offensive\nlabels:   {labels}\n\n{revealed}\n\n{} version:\n{}\n",
        out.strategy.as_str(),
        out.eliminated
    )
}

fn validate(cli: &Cli, manifest_path: &Path) -> Result<u8> {
    let manifest = LexiconManifest::load(manifest_path)?;
    let mut failed = 0;
    let mut rows = Vec::new();
    for (id, res) in manifest.load_each() {
        let path = manifest
            .entries
            .get(&id)
            .map(|e| manifest.resolve(e))
            .unwrap_or_default();
        match res {
            Ok(lex) => {
                if !cli.quiet && !cli.json {
                    outln!(
                        "ok    {id:<20} {:>5} phrases  {:>3} duplicates dropped  {}",
                        lex.len(),
                        lex.duplicates_dropped,
                        path.display()
                    );
                }
                rows.push(serde_json::json!({
                    "lexicon": id, "path": path, "ok": true,
                    "phrases": lex.len(), "duplicates_dropped": lex.duplicates_dropped,
                }));
            }
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e}", path.display());
                rows.push(serde_json::json!({ "lexicon": id, "path": path, "ok": false, "error": e.to_string() }));
            }
        }
    }
    if cli.json {
        outln!("{}", serde_json::Value::Array(rows));
    }
    if failed > 0 {
        bail!("{failed} lexicon(s) failed to load");
    }
    Ok(0)
}

fn serve(cli: &Cli, args: &ServeArgs) -> Result<u8> {
    let config = load_config(cli)?;
    let bind = args
        .bind
        .clone()
        .unwrap_or_else(|| config.service.bind.clone());
    let state = Arc::new(dare_service::AppState::from_config(&config)?);
    let app = dare_service::router(state, &config.service.cors_origin)?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async {
        let listener = dare_service::bind(&bind).await?;
        let addr = listener.local_addr().map_err(|e| anyhow!(e))?;
        log::info!("listening on http://{addr}");
        dare_service::serve(listener, app, dare_service::shutdown_signal()).await?;
        log::info!("shut down");
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(0)
}
