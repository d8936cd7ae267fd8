use std::fmt::Write;

use sarfa_core::Method;

use crate::ablation::AblationTable;
use crate::roc::RocReport;

fn preamble(provenance: &str) -> String {
    provenance.lines().map(|l| format!("# {l}\n")).collect()
}

/// `method,combiner,auc,n_puzzles,n_skipped`, preceded by `provenance` as `#` comment lines.
pub fn ablation_csv(table: &AblationTable, provenance: &str) -> String {
    let mut out = preamble(provenance);
    out.push_str("method,combiner,auc,n_puzzles,n_skipped\n");
    for r in &table.rows {
        let combiner = r.combiner().map(|c| c.name()).unwrap_or("");
        let _ = writeln!(out, "{},{},{},{},{}", r.family(), combiner, r.auc, r.n_puzzles, r.n_skipped);
    }
    out
}

/// `method,fpr,tpr` rows for plotting.
pub fn roc_points_csv<'a>(curves: impl IntoIterator<Item = (Method, &'a RocReport)>, provenance: &str) -> String {
    let mut out = preamble(provenance);
    out.push_str("method,fpr,tpr\n");
    for (method, report) in curves {
        for (fpr, tpr) in &report.points {
            let _ = writeln!(out, "{method},{fpr},{tpr}");
        }
    }
    out
}
