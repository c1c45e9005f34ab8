use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::grid::{CellRecord, WorkingPoint};
use crate::classifiers::ClassifierKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSizes {
    pub n_skilled: usize,
    pub n_novice: usize,
}

/// Min-max counts of correctly and incorrectly classified members of each
/// class at the crisp EER threshold, across iterations and scenarios.
/// Counts are the cell's recall scaled to the full class size, so every
/// row sums to its class total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionRange {
    pub classifier: ClassifierKind,
    pub sizes: ClassSizes,
    pub skilled_correct: (usize, usize),
    pub skilled_incorrect: (usize, usize),
    pub novice_correct: (usize, usize),
    pub novice_incorrect: (usize, usize),
    /// Working-point cells that contributed.
    pub cells: usize,
}

fn scaled(rate: f64, size: usize) -> usize {
    ((rate * size as f64).round() as usize).min(size)
}

fn range(v: &[usize]) -> (usize, usize) {
    (*v.iter().min().unwrap(), *v.iter().max().unwrap())
}

fn at_working_point(c: &CellRecord, wp: WorkingPoint) -> bool {
    c.train_fraction == wp.train_fraction && c.feature_count == wp.feature_count
}

/// Table-style summary per classifier at the working point. Every
/// (scenario, classifier) pair present in `cells` must have a successful
/// working-point cell for each iteration seen anywhere in the grid.
pub fn confusion_ranges(
    cells: &[CellRecord],
    wp: WorkingPoint,
    sizes: ClassSizes,
) -> Result<Vec<ConfusionRange>> {
    let scenarios: Vec<u8> = {
        let mut s: Vec<u8> = cells.iter().map(|c| c.scenario_id).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut kinds: Vec<ClassifierKind> = cells.iter().map(|c| c.classifier).collect();
    kinds.sort_unstable();
    kinds.dedup();
    let iterations = cells.iter().map(|c| c.iteration + 1).max().unwrap_or(0);

    let mut found: BTreeMap<(u8, ClassifierKind, usize), &CellRecord> = BTreeMap::new();
    for c in cells.iter().filter(|c| c.is_ok() && at_working_point(c, wp)) {
        found.insert((c.scenario_id, c.classifier, c.iteration), c);
    }
    let mut missing = Vec::new();
    for &s in &scenarios {
        for &k in &kinds {
            for it in 0..iterations {
                if !found.contains_key(&(s, k, it)) {
                    missing.push(format!("scenario {s} {k} iteration {it}"));
                }
            }
        }
    }
    if cells.is_empty() || !missing.is_empty() {
        let shown = missing.len().min(5);
        let more = if missing.len() > shown {
            format!(" and {} more", missing.len() - shown)
        } else {
            String::new()
        };
        return Err(Error::MissingCells(format!(
            "no successful cell at train fraction {} with {} features for {}{more}",
            wp.train_fraction,
            wp.feature_count,
            if missing.is_empty() { "any classifier".to_string() } else { missing[..shown].join(", ") }
        )));
    }

    Ok(kinds
        .iter()
        .map(|&k| {
            let rows: Vec<&CellRecord> = found
                .iter()
                .filter(|((_, kk, _), _)| *kk == k)
                .map(|(_, c)| *c)
                .collect();
            let sc: Vec<usize> = rows.iter().map(|c| scaled(c.sensitivity, sizes.n_skilled)).collect();
            let nc: Vec<usize> = rows.iter().map(|c| scaled(c.specificity, sizes.n_novice)).collect();
            let si: Vec<usize> = sc.iter().map(|v| sizes.n_skilled - v).collect();
            let ni: Vec<usize> = nc.iter().map(|v| sizes.n_novice - v).collect();
            ConfusionRange {
                classifier: k,
                sizes,
                skilled_correct: range(&sc),
                skilled_incorrect: range(&si),
                novice_correct: range(&nc),
                novice_incorrect: range(&ni),
                cells: rows.len(),
            }
        })
        .collect())
}

fn fmt_range((lo, hi): (usize, usize)) -> String {
    if lo == hi {
        lo.to_string()
    } else {
        format!("{lo}-{hi}")
    }
}

/// Two-by-two table of ranges with class margins.
pub fn render_confusion_table(r: &ConfusionRange, wp: WorkingPoint) -> String {
    let n = r.sizes.n_skilled + r.sizes.n_novice;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} at train fraction {}, {} features ({} cells)",
        r.classifier, wp.train_fraction, wp.feature_count, r.cells
    );
    let _ = writeln!(s, "{:<10}{:>18}{:>18}{:>10}", "", "called skilled", "called novice", "total");
    let _ = writeln!(
        s,
        "{:<10}{:>18}{:>18}{:>10}",
        "skilled",
        fmt_range(r.skilled_correct),
        fmt_range(r.skilled_incorrect),
        format!("N={}", r.sizes.n_skilled)
    );
    let _ = writeln!(
        s,
        "{:<10}{:>18}{:>18}{:>10}",
        "novice",
        fmt_range(r.novice_incorrect),
        fmt_range(r.novice_correct),
        format!("N={}", r.sizes.n_novice)
    );
    let _ = writeln!(s, "{:<10}{:>18}{:>18}{:>10}", "total", "", "", format!("N={n}"));
    s
}
