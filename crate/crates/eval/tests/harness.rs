use std::sync::atomic::{AtomicUsize, Ordering};

use sarfa_chess::{Position, SaliencyDatasetEntry};
use sarfa_core::{Combiner, FnOracle, Method, QOracle, QProfile, SessionPool};
use sarfa_eval::{
    ablation, ablation_csv, planted_dataset, robustness, roc, roc_points_csv, score_dataset, score_methods, ConstantOracle,
    Normalization, PlantedOracle, RobustnessMode, RobustnessOptions, ScoreOptions,
};

fn planted_pool(entries: &[SaliencyDatasetEntry], n: usize) -> SessionPool<PlantedOracle> {
    let oracle = PlantedOracle::new(entries).unwrap();
    SessionPool::new(vec![oracle; n])
}

#[test]
fn planted_oracle_separates_labels_exactly() {
    let entries = planted_dataset(10, 1);
    let run = score_dataset(&entries, &planted_pool(&entries, 4), Method::default(), &ScoreOptions::default()).unwrap();
    assert!(run.failures.is_empty());
    // Exhaustive check of the ranking before trusting the sweep.
    let mut lowest_pos = f64::INFINITY;
    let mut highest_neg = f64::NEG_INFINITY;
    for (p, e) in run.puzzles.iter().zip(&entries) {
        for (sq, score) in &p.scores {
            if e.salient_squares.contains(sq) {
                lowest_pos = lowest_pos.min(*score);
            } else {
                highest_neg = highest_neg.max(*score);
            }
        }
    }
    assert!(lowest_pos > 0.0);
    assert_eq!(highest_neg, 0.0);
    assert_eq!(roc(&run, &entries, Normalization::Global).unwrap().auc, 1.0);
    assert_eq!(roc(&run, &entries, Normalization::PerPuzzle).unwrap().auc, 1.0);
}

#[test]
fn constant_oracle_gives_chance() {
    let entries = planted_dataset(10, 2);
    let moves: std::collections::BTreeSet<String> = entries.iter().map(|e| e.best_move.clone()).collect();
    let fixed = QProfile::new("fixed", moves.into_iter().map(|m| (m, 0.5))).unwrap();
    let pool = SessionPool::new(vec![ConstantOracle(fixed); 2]);
    let run = score_dataset(&entries, &pool, Method::default(), &ScoreOptions::default()).unwrap();
    assert_eq!(run.puzzles.len(), 10);
    assert!(run.puzzles.iter().all(|p| p.scores.values().all(|v| *v == 0.0)));
    assert_eq!(roc(&run, &entries, Normalization::Global).unwrap().auc, 0.5);
}

#[test]
fn runs_are_reproducible_across_pool_sizes() {
    let entries = planted_dataset(6, 3);
    let a = score_methods(&entries, &planted_pool(&entries, 1), &Method::ABLATION, &ScoreOptions::default()).unwrap();
    let b = score_methods(&entries, &planted_pool(&entries, 5), &Method::ABLATION, &ScoreOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[derive(Debug, thiserror::Error)]
#[error("refused")]
struct Refused;

#[test]
fn failing_puzzles_are_counted_and_excluded() {
    let entries = planted_dataset(5, 4);
    let broken = entries[2].fen.clone();
    let planted = PlantedOracle::new(&entries).unwrap();
    let oracle = move |pos: &Position| -> Result<QProfile, Refused> {
        if pos.to_fen() == broken {
            return Err(Refused);
        }
        planted.clone().evaluate(pos).map_err(|_| Refused)
    };
    let pool = SessionPool::new(vec![FnOracle(oracle)]);
    let run = score_dataset(&entries, &pool, Method::default(), &ScoreOptions::default()).unwrap();
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].index, 2);
    assert_eq!(run.puzzles.iter().map(|p| p.index).collect::<Vec<_>>(), [0, 1, 3, 4]);
    assert_eq!(roc(&run, &entries, Normalization::Global).unwrap().auc, 1.0);
}

#[test]
fn journal_resumes_without_reevaluating() {
    let entries = planted_dataset(6, 5);
    let dir = tempfile::TempDir::new().unwrap();
    let journal = dir.path().join("run.jsonl");
    let options = ScoreOptions { journal: Some(journal.clone()), ..Default::default() };
    let methods = [Method::default(), Method::Iyer];

    let first = score_methods(&entries, &planted_pool(&entries, 3), &methods, &options).unwrap();
    let text = std::fs::read_to_string(&journal).unwrap();
    assert_eq!(text.lines().count(), 6);

    let calls = AtomicUsize::new(0);
    let planted = PlantedOracle::new(&entries).unwrap();
    let counting = |pos: &Position| {
        calls.fetch_add(1, Ordering::SeqCst);
        planted.clone().evaluate(pos)
    };
    let again = score_methods(&entries, &SessionPool::new(vec![FnOracle(&counting)]), &methods, &options).unwrap();
    assert_eq!(again, first);
    assert_eq!(calls.load(Ordering::SeqCst), 0);
    assert_eq!(std::fs::read_to_string(&journal).unwrap(), text);

    // Keep two records and a torn line, as if the run had been killed.
    let partial: Vec<&str> = text.lines().take(2).collect();
    std::fs::write(&journal, format!("{}\n{{\"index\":2,\"fe", partial.join("\n"))).unwrap();
    let resumed = score_methods(&entries, &SessionPool::new(vec![FnOracle(&counting)]), &methods, &options).unwrap();
    assert_eq!(resumed, first);
    assert!(calls.load(Ordering::SeqCst) > 0);
    assert_eq!(std::fs::read_to_string(&journal).unwrap(), text);

    // A different method set cannot reuse the records.
    calls.store(0, Ordering::SeqCst);
    score_methods(&entries, &SessionPool::new(vec![FnOracle(&counting)]), &[Method::GreydanusValue], &options).unwrap();
    assert!(calls.load(Ordering::SeqCst) > 0);
}

#[test]
fn ablation_rows_and_coinciding_combiners() {
    let entries = planted_dataset(8, 6);
    let table = ablation(&entries, &planted_pool(&entries, 2), &ScoreOptions::default(), Normalization::Global).unwrap();
    assert_eq!(table.rows.len(), 9);
    assert!(table.rows.windows(2).all(|w| w[0].auc >= w[1].auc));
    // Alternatives are all worth 0 before and after, so K is identically 1
    // and these combiners are monotone in Δp alone.
    let h = table.auc(Method::Sarfa(Combiner::Harmonic)).unwrap();
    assert_eq!(table.auc(Method::Sarfa(Combiner::DpOnly)), Some(h));
    assert_eq!(table.auc(Method::Sarfa(Combiner::GeometricMean)), Some(h));
    for (run, _) in &table.runs {
        if run.method == Method::Sarfa(Combiner::KOnly) {
            assert!(run.puzzles.iter().all(|p| p.scores.values().all(|v| *v == 0.0 || *v == 1.0)));
        }
    }

    let csv = ablation_csv(&table, "config: test\nschema: 1");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# config: test");
    assert_eq!(lines[2], "method,combiner,auc,n_puzzles,n_skipped");
    assert_eq!(lines.len(), 12);
    assert!(lines.contains(&"sarfa,harmonic,1,8,0"));
    assert!(lines.iter().any(|l| l.starts_with("iyer,,")));

    let points = roc_points_csv(table.runs.iter().map(|(r, roc)| (r.method, roc)), "");
    assert!(points.starts_with("method,fpr,tpr\nsarfa,0,0\n"));
}

#[test]
fn single_puzzle_smoke_ablation() {
    let entries = planted_dataset(1, 7);
    let table = ablation(&entries, &planted_pool(&entries, 1), &ScoreOptions::default(), Normalization::Global).unwrap();
    assert_eq!(table.rows.len(), 9);
}

#[test]
fn robustness_under_planted_oracle() {
    let entries = planted_dataset(10, 8);
    for mode in [RobustnessMode::HumanNonsalient, RobustnessMode::SarfaNonsalient] {
        let options = RobustnessOptions::new(42, mode);
        let (report, perturbed) = robustness(&entries, &planted_pool(&entries, 3), &options).unwrap();
        assert_eq!(report.auc_before, 1.0);
        assert_eq!(report.auc_after, 1.0);
        assert_eq!(report.n_perturbed + report.n_without_candidate, 10);
        assert_eq!(perturbed.len(), report.n_perturbed);
        for (removal, entry) in report.removals.iter().zip(&perturbed) {
            let original = &entries[removal.index];
            assert!(!original.salient_squares.contains(&removal.square));
            let before = original.position().unwrap();
            let after = entry.position().unwrap();
            assert_eq!(after.piece_count() + 1, before.piece_count());
            assert!(after.is_legal(entry.selected_move().unwrap()));
            entry.validate().unwrap();
        }
        let (again, again_perturbed) = robustness(&entries, &planted_pool(&entries, 1), &options).unwrap();
        assert_eq!(again, report);
        assert_eq!(again_perturbed, perturbed);
        let (other, _) = robustness(&entries, &planted_pool(&entries, 1), &RobustnessOptions::new(43, mode)).unwrap();
        assert_ne!(other.removals, report.removals);
    }
}
