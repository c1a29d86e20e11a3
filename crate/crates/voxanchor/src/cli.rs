use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use voxanchor_core::eval::{EvalReport, Protocol};
use voxanchor_core::layout::{blocks_to_passages, segment_page_blocks, Page, PageLayout};
use voxanchor_core::pipeline::{session_notes, Baseline};
use voxanchor_core::sim::{default_layouts, participant_name, simulate_indexed, BehaviorProfile};
use voxanchor_core::{AudioTrack, Label};

use crate::config::{parse_protocol, Config};
use crate::engine;
use crate::error::{Error, Result};
use crate::formats::read_text;
use crate::pbm::read_pbm;
use crate::render::{parse_metrics, render, render_importances, ReportFile};
use crate::session_io::{self, read_envelope, read_wav, save_note_types, save_session, session_dirs, write_layout};
use crate::tables::{self, PredictionRow};

/// Anchors voice notes to document passages from reading gaze.
#[derive(Debug, Parser)]
#[command(name = "voxanchor", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration file (flat TOML).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract voice notes from a session's audio.
    SegmentAudio(SegmentAudioArgs),
    /// Compute per-passage feature rows for sessions.
    Featurize(FeaturizeArgs),
    /// Train a forest on a features file.
    Train(TrainArgs),
    /// Score every candidate passage of a session's notes.
    Predict(PredictArgs),
    /// Cross-validate strategies and report metrics.
    Evaluate(EvaluateArgs),
    /// Run the position and fixation baselines.
    Baselines(BaselinesArgs),
    /// Generate a synthetic labeled corpus.
    Simulate(SimulateArgs),
    /// Print a saved report, and optionally a model's feature importances.
    Report(ReportArgs),
    /// Derive passage rectangles from a page bitmap.
    SegmentPage(SegmentPageArgs),
}

#[derive(Debug, Args)]
pub struct SegmentAudioArgs {
    /// Session directory, WAV file or envelope CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "notes.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Session directory or a directory of sessions.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "features.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "features.csv")]
    pub features: PathBuf,
    #[arg(long, default_value = "model.forest")]
    pub out: PathBuf,
    /// Number of trees; overrides the config file.
    #[arg(long)]
    pub n_trees: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Learned,
    Position,
    Fixation,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Cv {
    Lopo,
    Loo,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Session directory or a directory of sessions.
    #[arg(long)]
    pub session: PathBuf,
    #[arg(long, value_enum, default_value = "learned")]
    pub strategy: Strategy,
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of sessions, or a features CSV (learned strategy only).
    #[arg(long)]
    pub input: PathBuf,
    /// Cross-validation protocol; overrides the config file.
    #[arg(long, value_enum)]
    pub cv: Option<Cv>,
    #[arg(long, value_enum, default_value = "all")]
    pub strategy: Strategy,
    /// Comma-separated subset of auc,f1,precision,recall for the table.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Number of trees; overrides the config file.
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselinesArgs {
    /// Session directory or a directory of sessions.
    #[arg(long)]
    pub input: PathBuf,
    /// Protocol label and fold grouping of the report.
    #[arg(long, value_enum)]
    pub cv: Option<Cv>,
    #[arg(long)]
    pub metrics: Option<String>,
    /// Predictions of both baselines.
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
    /// Also write the metrics report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub participants: Option<usize>,
    #[arg(long)]
    pub notes_per_participant: Option<usize>,
    /// Number of distinct documents participants are spread over.
    #[arg(long)]
    pub documents: Option<usize>,
    /// Behavior profile JSON; absent fields keep their defaults.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Write 16-bit PCM audio instead of a level envelope.
    #[arg(long)]
    pub waveform: bool,
    #[arg(long, default_value = "corpus")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "report.json")]
    pub input: PathBuf,
    #[arg(long)]
    pub metrics: Option<String>,
    /// Also list this model's feature importances.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentPageArgs {
    /// PBM page images (P1 or P4), one per page in order.
    #[arg(long, required = true, num_args = 1..)]
    pub image: Vec<PathBuf>,
    /// Minimum whitespace band, in pixels, that separates blocks.
    #[arg(long, default_value_t = 12)]
    pub gap: usize,
    #[arg(long, default_value = "layout.json")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::load(cli.global.config.as_deref())?;
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    if cli.global.jobs > 0 {
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global();
    }
    match cli.command {
        Command::SegmentAudio(a) => segment_audio(&cfg, a),
        Command::Featurize(a) => featurize(&cfg, a),
        Command::Train(a) => train(cfg, a),
        Command::Predict(a) => predict(&cfg, a),
        Command::Evaluate(a) => evaluate(cfg, a),
        Command::Baselines(a) => baselines(cfg, a),
        Command::Simulate(a) => simulate(cfg, a),
        Command::Report(a) => report(a),
        Command::SegmentPage(a) => segment_page(a),
    }
}

fn say(msg: impl AsRef<str>) {
    eprintln!("{}", msg.as_ref());
}

fn segment_audio(cfg: &Config, a: SegmentAudioArgs) -> Result<()> {
    let audio = if a.input.is_dir() {
        let env = a.input.join(session_io::ENVELOPE);
        if env.exists() {
            AudioTrack::Envelope(read_envelope(&env)?)
        } else {
            read_wav(&a.input.join(session_io::AUDIO))?
        }
    } else if a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
        read_wav(&a.input)?
    } else {
        AudioTrack::Envelope(read_envelope(&a.input)?)
    };
    let notes = session_notes(&audio, &cfg.pipeline().audio).map_err(|e| Error::in_file(&a.input, e))?;
    tables::write_notes(&a.out, &notes)?;
    say(format!("{} voice notes -> {}", notes.len(), a.out.display()));
    Ok(())
}

fn load_corpus(cfg: &Config, input: &Path) -> Result<Vec<engine::Analyzed>> {
    let corpus = engine::analyze_dirs(&session_dirs(input)?, &cfg.pipeline())?;
    for a in &corpus {
        for w in &a.warnings {
            say(format!("warning: {w}"));
        }
    }
    Ok(corpus)
}

fn featurize(cfg: &Config, a: FeaturizeArgs) -> Result<()> {
    let corpus = load_corpus(cfg, &a.input)?;
    let rows = engine::corpus_rows(&corpus);
    tables::write_features(&a.out, &rows)?;
    say(format!("{} sessions, {} rows -> {}", corpus.len(), rows.len(), a.out.display()));
    Ok(())
}

fn train(mut cfg: Config, a: TrainArgs) -> Result<()> {
    if let Some(n) = a.n_trees {
        cfg.n_trees = n;
    }
    let forest = cfg.forest()?;
    let rows = tables::read_features(&a.features)?;
    if rows.is_empty() {
        return Err(Error::Invalid { path: a.features, msg: "no feature rows".into() });
    }
    tables::require_labels(&a.features, &rows)?;
    let model = engine::train_rows(&rows, &forest).map_err(|e| Error::in_file(&a.features, e))?;
    tables::save_model(&a.out, &model)?;
    say(format!("{} trees on {} rows -> {}", forest.n_trees, rows.len(), a.out.display()));
    Ok(())
}

fn predict(cfg: &Config, a: PredictArgs) -> Result<()> {
    let model = match (&a.model, a.strategy) {
        (Some(p), _) => Some(tables::load_model(p)?),
        (None, Strategy::Learned | Strategy::All) => {
            return Err(Error::Usage("--model is required for the learned strategy".into()));
        }
        (None, _) => None,
    };
    let corpus = load_corpus(cfg, &a.session)?;
    let mut out = Vec::new();
    for item in &corpus {
        let pid = item.analysis.participant_id.as_str();
        if let Some(model) = &model {
            for n in &item.analysis.notes {
                for v in &n.vectors {
                    let score = model.predict_proba(&v.features);
                    out.push(PredictionRow {
                        strategy: "learned",
                        participant_id: pid,
                        prediction: voxanchor_core::baselines::AnchorPrediction {
                            note_id: v.note_id,
                            passage_id: v.passage_id,
                            score,
                            label: Label::from_bool(score >= voxanchor_core::forest::DECISION_THRESHOLD),
                        },
                    });
                }
            }
        }
        for b in baselines_of(a.strategy) {
            out.extend(
                item.analysis
                    .baseline_predictions(b)
                    .into_iter()
                    .map(|p| PredictionRow { strategy: b.name(), participant_id: pid, prediction: p }),
            );
        }
    }
    tables::write_predictions(&a.out, &out)?;
    say(format!("{} predictions -> {}", out.len(), a.out.display()));
    Ok(())
}

fn baselines_of(s: Strategy) -> Vec<Baseline> {
    match s {
        Strategy::Learned => vec![],
        Strategy::Position => vec![Baseline::Position],
        Strategy::Fixation => vec![Baseline::Fixation],
        Strategy::All => vec![Baseline::Position, Baseline::Fixation],
    }
}

fn protocol(cfg: &Config, cv: Option<Cv>) -> Result<Protocol> {
    match cv {
        Some(Cv::Lopo) => Ok(Protocol::LeaveOneParticipantOut),
        Some(Cv::Loo) => Ok(Protocol::LeaveOneNoteOut),
        None => parse_protocol(&cfg.cv),
    }
}

fn finish_report(reports: Vec<EvalReport>, metrics: Option<&str>, out: Option<&Path>) -> Result<()> {
    let metrics = parse_metrics(metrics)?;
    let file = ReportFile { reports };
    if let Some(out) = out {
        file.save(out)?;
    }
    print!("{}", render(&file, &metrics));
    Ok(())
}

fn evaluate(mut cfg: Config, a: EvaluateArgs) -> Result<()> {
    if let Some(n) = a.n_trees {
        cfg.n_trees = n;
    }
    let forest = cfg.forest()?;
    let protocol = protocol(&cfg, a.cv)?;
    parse_metrics(a.metrics.as_deref())?;
    let learned = matches!(a.strategy, Strategy::Learned | Strategy::All);

    let mut reports = Vec::new();
    if a.input.is_file() {
        if a.strategy != Strategy::Learned {
            return Err(Error::Usage("baselines need session directories; a features file supports --strategy learned only".into()));
        }
        let rows = tables::read_features(&a.input)?;
        tables::require_labels(&a.input, &rows)?;
        reports.push(engine::cross_validate(&rows, protocol, &forest).map_err(|e| Error::in_file(&a.input, e))?);
    } else {
        let corpus = load_corpus(&cfg, &a.input)?;
        let rows = engine::corpus_rows(&corpus);
        if rows.iter().any(|r| r.truth().is_none()) {
            return Err(Error::Invalid { path: a.input.clone(), msg: "sessions without labels.csv cannot be evaluated".into() });
        }
        if learned {
            reports.push(engine::cross_validate(&rows, protocol, &forest).map_err(|e| Error::in_file(&a.input, e))?);
        }
        for b in baselines_of(a.strategy) {
            reports.push(engine::baseline_report(&corpus, &rows, b, protocol).map_err(|e| Error::in_file(&a.input, e))?);
        }
    }
    finish_report(reports, a.metrics.as_deref(), Some(&a.out))?;
    say(format!("report -> {}", a.out.display()));
    Ok(())
}

fn baselines(cfg: Config, a: BaselinesArgs) -> Result<()> {
    let protocol = protocol(&cfg, a.cv)?;
    parse_metrics(a.metrics.as_deref())?;
    let corpus = load_corpus(&cfg, &a.input)?;
    let rows = engine::corpus_rows(&corpus);
    let mut preds = Vec::new();
    for b in [Baseline::Position, Baseline::Fixation] {
        for item in &corpus {
            let pid = item.analysis.participant_id.as_str();
            preds.extend(
                item.analysis
                    .baseline_predictions(b)
                    .into_iter()
                    .map(|p| PredictionRow { strategy: b.name(), participant_id: pid, prediction: p }),
            );
        }
    }
    tables::write_predictions(&a.out, &preds)?;
    say(format!("{} predictions -> {}", preds.len(), a.out.display()));
    if rows.iter().all(|r| r.truth().is_some()) {
        let reports = [Baseline::Position, Baseline::Fixation]
            .into_iter()
            .map(|b| engine::baseline_report(&corpus, &rows, b, protocol).map_err(|e| Error::in_file(&a.input, e)))
            .collect::<Result<Vec<_>>>()?;
        finish_report(reports, a.metrics.as_deref(), a.report.as_deref())?;
    } else if a.report.is_some() {
        return Err(Error::Invalid { path: a.input, msg: "sessions without labels.csv cannot be evaluated".into() });
    }
    Ok(())
}

fn simulate(cfg: Config, a: SimulateArgs) -> Result<()> {
    let mut profile: BehaviorProfile = match &a.profile {
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| Error::Parse { path: p.clone(), line: e.line() as u64, msg: e.to_string() })?,
        None => BehaviorProfile::default(),
    };
    if a.waveform {
        profile.waveform = true;
    }
    profile.validate().map_err(|e| match &a.profile {
        Some(p) => Error::in_file(p, e),
        None => e.into(),
    })?;
    let participants = a.participants.unwrap_or(cfg.participants);
    let notes = a.notes_per_participant.unwrap_or(cfg.notes_per_participant);
    let documents = a.documents.unwrap_or(cfg.documents);
    if participants < 2 {
        return Err(Error::Usage("--participants must be at least 2".into()));
    }
    if documents == 0 {
        return Err(Error::Usage("--documents must be at least 1".into()));
    }
    let layouts = default_layouts(cfg.seed, documents, profile.pages);
    (0..participants).into_par_iter().try_for_each(|i| {
        let sim = simulate_indexed(&layouts, i, notes, &profile, cfg.seed)?;
        let dir = a.out.join(participant_name(i));
        save_session(&sim.session, &dir)?;
        save_note_types(&dir, &sim.note_types())
    })?;
    say(format!("{participants} sessions x {notes} notes -> {}", a.out.display()));
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let file = ReportFile::load(&a.input)?;
    let metrics = parse_metrics(a.metrics.as_deref())?;
    print!("{}", render(&file, &metrics));
    if let Some(m) = &a.model {
        println!();
        print!("{}", render_importances(&tables::load_model(m)?));
    }
    Ok(())
}

fn segment_page(a: SegmentPageArgs) -> Result<()> {
    let mut pages = Vec::new();
    let mut next_id = 0u32;
    for (i, path) in a.image.iter().enumerate() {
        let bitmap = read_pbm(path)?;
        let page = i as u32 + 1;
        let blocks = segment_page_blocks(&bitmap, a.gap).map_err(|e| Error::in_file(path, e))?;
        let passages = blocks_to_passages(&blocks, page, next_id);
        next_id += passages.len() as u32;
        pages.push(Page { page, w: bitmap.width() as f64, h: bitmap.height() as f64, passages });
    }
    let layout = PageLayout::new(pages).map_err(|e| Error::in_file(&a.image[0], e))?;
    write_layout(&a.out, &layout)?;
    say(format!("{next_id} passages -> {}", a.out.display()));
    Ok(())
}

/// Parses arguments and runs, returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => 2,
    }
}
