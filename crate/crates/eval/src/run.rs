use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sarfa_chess::{compute_board_saliency, Position, SaliencyDatasetEntry, Square};
use sarfa_core::{map_with_pool, Method, QOracle, QProfile, SessionPool, DEFAULT_TEMPERATURE};
use serde::{Deserialize, Serialize};

use crate::EvalError;

/// Raw scores of one puzzle; skipped squares hold 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleScores {
    pub index: usize,
    pub fen: String,
    pub best_move: String,
    pub scores: BTreeMap<Square, f64>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleFailure {
    pub index: usize,
    pub fen: String,
    pub error: String,
}

/// One method applied to a whole dataset. Puzzles are in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: Method,
    pub puzzles: Vec<PuzzleScores>,
    pub failures: Vec<PuzzleFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOptions {
    pub temperature: f64,
    /// Completed puzzles are appended here and reused by later runs.
    pub journal: Option<PathBuf>,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions { temperature: DEFAULT_TEMPERATURE, journal: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MethodScores {
    scores: BTreeMap<Square, f64>,
    skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JournalRecord {
    index: usize,
    fen: String,
    best_move: String,
    methods: BTreeMap<String, MethodScores>,
}

impl JournalRecord {
    fn covers(&self, entry: &SaliencyDatasetEntry, methods: &[Method]) -> bool {
        self.fen == entry.fen
            && self.best_move == entry.best_move
            && methods.iter().all(|m| self.methods.contains_key(m.name()))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CachedError(String);

/// Remembers every evaluation by FEN so that several methods share one set
/// of agent calls.
struct Memo<'a, O> {
    inner: &'a mut O,
    cache: HashMap<String, Result<QProfile, String>>,
}

impl<O: QOracle<Position>> QOracle<Position> for Memo<'_, O> {
    type Error = CachedError;

    fn evaluate(&mut self, pos: &Position) -> Result<QProfile, CachedError> {
        let inner = &mut *self.inner;
        self.cache
            .entry(pos.to_fen())
            .or_insert_with(|| inner.evaluate(pos).map_err(|e| e.to_string()))
            .clone()
            .map_err(CachedError)
    }
}

fn score_puzzle<O: QOracle<Position>>(
    index: usize,
    entry: &SaliencyDatasetEntry,
    oracle: &mut O,
    methods: &[Method],
    temperature: f64,
) -> Result<JournalRecord, PuzzleFailure> {
    let fail = |error: String| PuzzleFailure { index, fen: entry.fen.clone(), error };
    let pos = entry.position().map_err(fail)?;
    let mv = entry.selected_move().map_err(fail)?;
    let mut memo = Memo { inner: oracle, cache: HashMap::new() };
    let mut out = BTreeMap::new();
    for &method in methods {
        let map = compute_board_saliency(&pos, mv, &mut memo, method, temperature).map_err(|e| fail(e.to_string()))?;
        let skipped = map.scores.values().filter(|b| b.status.is_skipped()).count();
        out.insert(method.name().to_owned(), MethodScores { scores: map.score_map(), skipped });
    }
    Ok(JournalRecord { index, fen: entry.fen.clone(), best_move: entry.best_move.clone(), methods: out })
}

fn journal_err(path: &Path) -> impl FnOnce(io::Error) -> EvalError + '_ {
    move |source| EvalError::Journal { path: path.to_owned(), source }
}

fn read_journal(path: &Path) -> Result<Vec<JournalRecord>, EvalError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(journal_err(path)(e)),
    };
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(journal_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            // A run killed mid-write leaves a torn last line.
            Err(e) => log::warn!("{}:{}: ignoring unreadable journal line: {e}", path.display(), n + 1),
        }
    }
    Ok(out)
}

fn rewrite_journal(path: &Path, records: &BTreeMap<usize, JournalRecord>) -> Result<(), EvalError> {
    let tmp = path.with_extension("tmp");
    let mut out = io::BufWriter::new(File::create(&tmp).map_err(journal_err(path))?);
    for r in records.values() {
        writeln!(out, "{}", serde_json::to_string(r)?).map_err(journal_err(path))?;
    }
    out.flush().map_err(journal_err(path))?;
    drop(out);
    fs::rename(&tmp, path).map_err(journal_err(path))
}

/// Scores every puzzle with each of `methods`, spreading puzzles over the
/// pool. Methods share agent evaluations. Puzzles whose unperturbed position
/// cannot be explained are reported as failures rather than aborting.
pub fn score_methods<O>(
    entries: &[SaliencyDatasetEntry],
    pool: &SessionPool<O>,
    methods: &[Method],
    options: &ScoreOptions,
) -> Result<Vec<MethodRun>, EvalError>
where
    O: QOracle<Position> + Send,
{
    let mut done: BTreeMap<usize, JournalRecord> = BTreeMap::new();
    if let Some(path) = &options.journal {
        for r in read_journal(path)? {
            if entries.get(r.index).is_some_and(|e| r.covers(e, methods)) {
                done.insert(r.index, r);
            }
        }
    }
    let todo: Vec<usize> = (0..entries.len()).filter(|i| !done.contains_key(i)).collect();
    let journal = match &options.journal {
        Some(path) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(path).map_err(journal_err(path))?,
        )),
        None => None,
    };
    let results = map_with_pool(pool, todo.len(), |oracle, k| {
        let i = todo[k];
        let result = score_puzzle(i, &entries[i], oracle, methods, options.temperature);
        match (&result, &journal) {
            (Ok(record), Some(file)) => {
                let line = serde_json::to_string(record).expect("journal records serialize");
                let mut file = file.lock().unwrap_or_else(|p| p.into_inner());
                if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
                    log::warn!("could not append puzzle {i} to the journal: {e}");
                }
            }
            (Err(f), _) => log::warn!("puzzle {}: {}", f.index, f.error),
            _ => {}
        }
        result
    });
    drop(journal);

    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(record) => {
                done.insert(record.index, record);
            }
            Err(f) => failures.push(f),
        }
    }
    failures.sort_by_key(|f| f.index);
    if let Some(path) = &options.journal {
        rewrite_journal(path, &done)?;
    }

    Ok(methods
        .iter()
        .map(|&method| MethodRun {
            method,
            puzzles: done
                .values()
                .map(|r| {
                    let s = &r.methods[method.name()];
                    PuzzleScores {
                        index: r.index,
                        fen: r.fen.clone(),
                        best_move: r.best_move.clone(),
                        scores: s.scores.clone(),
                        skipped: s.skipped,
                    }
                })
                .collect(),
            failures: failures.clone(),
        })
        .collect())
}

pub fn score_dataset<O>(
    entries: &[SaliencyDatasetEntry],
    pool: &SessionPool<O>,
    method: Method,
    options: &ScoreOptions,
) -> Result<MethodRun, EvalError>
where
    O: QOracle<Position> + Send,
{
    Ok(score_methods(entries, pool, &[method], options)?.remove(0))
}
