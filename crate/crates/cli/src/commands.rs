use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sarfa_agents::{AgentError, UciSession};
use sarfa_chess::{
    compute_board_saliency_pooled, load_dataset, majority_vote, write_dataset, BoardSaliencyError, Position,
    SaliencyDatasetEntry, Square,
};
use sarfa_core::{Method, QOracle, SessionPool};
use sarfa_eval::{
    ablation, ablation_csv, robustness, roc, roc_points_csv, score_dataset, AblationRow, AblationTable, EvalError,
    PuzzleFailure, RobustnessMode, RobustnessOptions, RobustnessReport, ScoreOptions,
};
use sarfa_image::{compute_frame_saliency_pooled, Frame, FrameAgent, FrameSaliencyError};
use sarfa_render::{chess_svg, overlay_frame};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{engine, invalid, CliError};
use crate::output::{extension, svg_with_metadata, write_file, write_stdout, Provenance, SCHEMA};

fn provenance<'a, A: Serialize>(command: &'static str, arguments: &'a A, config: &'a RunConfig) -> Provenance<'a, A> {
    Provenance { schema: SCHEMA, command, arguments, config }
}

fn open_pool<O>(size: usize, open: impl Fn() -> Result<O, AgentError>) -> Result<SessionPool<O>, CliError> {
    let sessions = (0..size.max(1)).map(|_| open().map_err(engine)).collect::<Result<Vec<_>, _>>()?;
    log::info!("opened {} agent sessions", sessions.len());
    Ok(SessionPool::new(sessions))
}

fn uci_pool(config: &RunConfig, size: usize) -> Result<SessionPool<UciSession>, CliError> {
    if config.engine.is_none() {
        return Err(CliError::Engine(
            "no UCI engine configured; pass --engine or set SARFA_ENGINE".into(),
        ));
    }
    let oracle = config.oracle(None);
    open_pool(size.min(config.workers), || UciSession::open(&oracle))
}

fn board_error<E: std::error::Error>(e: BoardSaliencyError<E>) -> CliError {
    match e {
        BoardSaliencyError::IllegalMove(_) => invalid(e),
        _ => engine(e),
    }
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::Journal { .. } => CliError::Io(e.to_string()),
        _ => invalid(e),
    }
}

fn read_dataset(path: &Path) -> Result<Vec<SaliencyDatasetEntry>, CliError> {
    let entries = load_dataset(path).map_err(invalid)?;
    if entries.is_empty() {
        return Err(invalid(format!("dataset {} has no puzzles", path.display())));
    }
    log::info!("loaded {} puzzles from {}", entries.len(), path.display());
    Ok(entries)
}

#[derive(Debug, Clone, Serialize, clap::Args)]
pub struct ExplainChess {
    /// Position to explain
    #[arg(long)]
    pub fen: String,
    /// Move to explain in UCI notation; defaults to the engine's choice
    #[arg(long = "move")]
    #[serde(rename = "move")]
    pub mv: Option<String>,
    /// Output files; `.json` gets per-square breakdowns, `.svg` a heatmap. Prints JSON when absent.
    #[arg(long)]
    pub out: Vec<PathBuf>,
}

pub fn explain_chess(args: &ExplainChess, config: &RunConfig) -> Result<(), CliError> {
    let pos = Position::from_fen(&args.fen).map_err(|e| invalid(format!("--fen: {e}")))?;
    let chosen = match &args.mv {
        Some(text) => Some(
            pos.parse_move(text)
                .ok_or_else(|| invalid(format!("--move {text} is not a legal move in this position")))?,
        ),
        None if pos.legal_moves().is_empty() => return Err(invalid("position has no legal moves")),
        None => None,
    };
    for out in &args.out {
        if !matches!(extension(out).as_str(), "json" | "svg") {
            return Err(invalid(format!("{}: output must end in .json or .svg", out.display())));
        }
    }
    let pool = uci_pool(config, pos.piece_count())?;
    let mv = match chosen {
        Some(mv) => mv,
        None => {
            let q = pool.lease().evaluate(&pos).map_err(engine)?;
            pos.parse_move(q.best_action())
                .ok_or_else(|| engine(format!("engine proposed illegal move {}", q.best_action())))?
        }
    };
    let saliency = compute_board_saliency_pooled(&pos, mv, &pool, config.method, config.temperature).map_err(board_error)?;
    let prov = provenance("explain-chess", args, config);
    if args.out.is_empty() {
        return write_stdout(&prov.document(&saliency));
    }
    for out in &args.out {
        if extension(out) == "json" {
            write_file(out, prov.document(&saliency).as_bytes())?;
        } else {
            let scores = display_scores(saliency.score_map());
            write_file(out, svg_with_metadata(&chess_svg(&pos, &scores, &config.style), &prov.compact()).as_bytes())?;
        }
    }
    Ok(())
}

/// Scores outside [0, 1] (baselines) are min–max rescaled for display.
fn display_scores(scores: BTreeMap<Square, f64>) -> BTreeMap<Square, f64> {
    if scores.values().all(|v| (0.0..=1.0).contains(v)) {
        return scores;
    }
    let lo = scores.values().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    scores.into_iter().map(|(s, v)| (s, if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })).collect()
}

#[derive(Debug, Clone, Serialize, clap::Args)]
pub struct ExplainFrame {
    /// Binary PGM frame
    #[arg(long)]
    pub pgm: PathBuf,
    /// Agent command line speaking the EVAL/QVALUES protocol
    #[arg(long)]
    pub agent_cmd: String,
    /// Action to explain
    #[arg(long)]
    pub action: String,
    /// Output files: `.json` grid and breakdowns, `.png` or `.pgm` overlay. Prints JSON when absent.
    #[arg(long)]
    pub out: Vec<PathBuf>,
}

pub fn explain_frame(args: &ExplainFrame, config: &RunConfig) -> Result<(), CliError> {
    let frame = Frame::load_pgm(&args.pgm).map_err(|e| invalid(format!("{}: {e}", args.pgm.display())))?;
    let mut words = shlex::split(&args.agent_cmd)
        .filter(|w| !w.is_empty())
        .ok_or_else(|| invalid("--agent-cmd cannot be split into words"))?
        .into_iter();
    let program = words.next().ok_or_else(|| invalid("--agent-cmd is empty"))?;
    for out in &args.out {
        if !matches!(extension(out).as_str(), "json" | "png" | "pgm") {
            return Err(invalid(format!("{}: output must end in .json, .png or .pgm", out.display())));
        }
    }
    let oracle = config.oracle(Some((PathBuf::from(program), words.collect())));
    let centers = frame.width().div_ceil(config.blur.stride) * frame.height().div_ceil(config.blur.stride);
    let pool = open_pool(centers.min(config.workers), || FrameAgent::open(&oracle))?;
    let saliency = compute_frame_saliency_pooled(&frame, &args.action, &pool, &config.blur, config.method, config.temperature)
        .map_err(|e| match e {
            FrameSaliencyError::Frame(_) => invalid(e),
            _ => engine(e),
        })?;
    let prov = provenance("explain-frame", args, config);
    if args.out.is_empty() {
        return write_stdout(&prov.document(&saliency));
    }
    let heat = saliency.grid.upsample(frame.width(), frame.height());
    for out in &args.out {
        match extension(out).as_str() {
            "json" => write_file(out, prov.document(&saliency).as_bytes())?,
            ext => {
                let overlay = overlay_frame(&frame, &heat, &config.style).map_err(invalid)?;
                let mut bytes = Vec::new();
                if ext == "png" {
                    overlay.write_png(&mut bytes, &prov.compact()).map_err(|e| CliError::Io(e.to_string()))?;
                } else {
                    overlay.write_pgm(&mut bytes, &prov.compact()).map_err(|e| CliError::Io(e.to_string()))?;
                }
                write_file(out, &bytes)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, clap::Args)]
pub struct EvalReportArgs {
    /// Labeled puzzles, one JSON object per line
    #[arg(long)]
    pub dataset: PathBuf,
    /// JSON report; printed when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary table as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// ROC curve points as CSV
    #[arg(long)]
    pub roc_csv: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, document: String) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, document.as_bytes()),
        None => write_stdout(&document),
    }
}

#[derive(Serialize)]
struct AucResult<'a> {
    method: Method,
    auc: f64,
    n_pos: usize,
    n_neg: usize,
    n_puzzles: usize,
    n_skipped: usize,
    failures: &'a [PuzzleFailure],
    points: &'a [(f64, f64)],
}

fn score_options(config: &RunConfig) -> ScoreOptions {
    ScoreOptions { temperature: config.temperature, journal: config.journal.clone() }
}

pub fn eval_auc(args: &EvalReportArgs, config: &RunConfig) -> Result<(), CliError> {
    let entries = read_dataset(&args.dataset)?;
    let pool = uci_pool(config, entries.len())?;
    let run = score_dataset(&entries, &pool, config.method, &score_options(config)).map_err(eval_error)?;
    let report = roc(&run, &entries, config.normalization).map_err(eval_error)?;
    let prov = provenance("eval-auc", args, config);
    let result = AucResult {
        method: run.method,
        auc: report.auc,
        n_pos: report.n_pos,
        n_neg: report.n_neg,
        n_puzzles: run.puzzles.len(),
        n_skipped: run.failures.len(),
        failures: &run.failures,
        points: &report.points,
    };
    if let Some(path) = &args.csv {
        let row = AblationRow { method: run.method, auc: report.auc, n_puzzles: run.puzzles.len(), n_skipped: run.failures.len() };
        let table = AblationTable { rows: vec![row], runs: Vec::new() };
        write_file(path, ablation_csv(&table, &prov.compact()).as_bytes())?;
    }
    if let Some(path) = &args.roc_csv {
        write_file(path, roc_points_csv([(run.method, &report)], &prov.compact()).as_bytes())?;
    }
    emit(&args.out, prov.document(&result))
}

#[derive(Serialize)]
struct AblationResult<'a> {
    rows: &'a [AblationRow],
    failures: &'a [PuzzleFailure],
}

pub fn eval_ablation(args: &EvalReportArgs, config: &RunConfig) -> Result<(), CliError> {
    let entries = read_dataset(&args.dataset)?;
    let pool = uci_pool(config, entries.len())?;
    let table = ablation(&entries, &pool, &score_options(config), config.normalization).map_err(eval_error)?;
    let prov = provenance("eval-ablation", args, config);
    if let Some(path) = &args.csv {
        write_file(path, ablation_csv(&table, &prov.compact()).as_bytes())?;
    }
    if let Some(path) = &args.roc_csv {
        let curves = table.runs.iter().map(|(run, report)| (run.method, report));
        write_file(path, roc_points_csv(curves, &prov.compact()).as_bytes())?;
    }
    let failures = table.runs.first().map(|(run, _)| run.failures.as_slice()).unwrap_or(&[]);
    emit(&args.out, prov.document(AblationResult { rows: &table.rows, failures }))
}

#[derive(Debug, Clone, Serialize, clap::Args)]
pub struct EvalRobustness {
    /// Labeled puzzles, one JSON object per line
    #[arg(long)]
    pub dataset: PathBuf,
    /// human_nonsalient or sarfa_nonsalient; both when absent
    #[arg(long)]
    pub mode: Option<RobustnessMode>,
    /// JSON report; printed when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for the perturbed datasets, one `<mode>.jsonl` per mode
    #[arg(long)]
    pub perturbed_dir: Option<PathBuf>,
}

pub fn eval_robustness(args: &EvalRobustness, config: &RunConfig) -> Result<(), CliError> {
    let seed = config
        .seed
        .ok_or_else(|| invalid("robustness runs need a seed: pass --seed or set SARFA_SEED"))?;
    let entries = read_dataset(&args.dataset)?;
    let modes = match args.mode {
        Some(m) => vec![m],
        None => vec![RobustnessMode::HumanNonsalient, RobustnessMode::SarfaNonsalient],
    };
    let pool = uci_pool(config, entries.len())?;
    let prov = provenance("eval-robustness", args, config);
    let mut reports: Vec<RobustnessReport> = Vec::new();
    for mode in modes {
        let options = RobustnessOptions {
            sarfa_threshold: config.nonsalient_threshold,
            normalization: config.normalization,
            temperature: config.temperature,
            journal: config.journal.clone(),
            ..RobustnessOptions::new(seed, mode)
        };
        let (report, perturbed) = robustness(&entries, &pool, &options).map_err(eval_error)?;
        if let Some(dir) = &args.perturbed_dir {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
            let name = serde_json::to_value(mode).expect("mode serializes");
            let path = dir.join(format!("{}.jsonl", name.as_str().unwrap_or("perturbed")));
            let text = format!("# {}\n{}", prov.compact(), write_dataset(&perturbed));
            write_file(&path, text.as_bytes())?;
        }
        reports.push(report);
    }
    emit(&args.out, prov.document(&reports))
}

#[derive(Debug, Clone, Serialize, clap::Args)]
pub struct DatasetBuild {
    /// One JSON object per line with fen, best_move and three expert label sets
    #[arg(long)]
    pub raw_labels: PathBuf,
    /// Dataset output (JSON Lines)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabels {
    fen: String,
    best_move: String,
    expert_labels: Vec<BTreeSet<Square>>,
}

pub fn dataset_build(args: &DatasetBuild, config: &RunConfig) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.raw_labels)
        .map_err(|e| invalid(format!("{}: {e}", args.raw_labels.display())))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |m: String| invalid(format!("{}:{}: {m}", args.raw_labels.display(), i + 1));
        let raw: RawLabels = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        let labels: [BTreeSet<Square>; 3] = raw
            .expert_labels
            .try_into()
            .map_err(|v: Vec<_>| at(format!("expected 3 expert label sets, found {}", v.len())))?;
        let entry = SaliencyDatasetEntry {
            fen: raw.fen,
            best_move: raw.best_move,
            salient_squares: majority_vote(&labels),
            expert_labels: Some(labels.to_vec()),
        };
        entry.validate().map_err(at)?;
        entries.push(entry);
    }
    let prov = provenance("dataset-build", args, config);
    write_file(&args.out, format!("# {}\n{}", prov.compact(), write_dataset(&entries)).as_bytes())
}
