use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::confusion::{confusion_ranges, render_confusion_table, ClassSizes};
use super::grid::{CellRecord, WorkingPoint};
use crate::classifiers::ClassifierKind;
use crate::stats;

/// Mean and spread of the successful cells in one group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EerSummary {
    pub scenario_id: u8,
    pub classifier: ClassifierKind,
    /// Train fraction or feature count, depending on the view.
    pub x: f64,
    pub mean_eer: f64,
    pub std_eer: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

fn summarize<F>(cells: &[CellRecord], keep: impl Fn(&CellRecord) -> bool, x: F) -> Vec<EerSummary>
where
    F: Fn(&CellRecord) -> f64,
{
    // x >= 0, so bit order equals numeric order
    let mut groups: BTreeMap<(u8, ClassifierKind, u64), (Vec<f64>, usize)> = BTreeMap::new();
    for c in cells.iter().filter(|c| keep(c)) {
        let g = groups
            .entry((c.scenario_id, c.classifier, x(c).to_bits()))
            .or_default();
        if c.is_ok() {
            g.0.push(c.eer);
        } else {
            g.1 += 1;
        }
    }
    groups
        .into_iter()
        .map(|((scenario_id, classifier, bits), (eers, n_failed))| EerSummary {
            scenario_id,
            classifier,
            x: f64::from_bits(bits),
            mean_eer: if eers.is_empty() { f64::NAN } else { stats::mean(&eers) },
            std_eer: if eers.len() < 2 { f64::NAN } else { stats::std_dev(&eers) },
            n_ok: eers.len(),
            n_failed,
        })
        .collect()
}

/// EER against train fraction at a fixed feature count.
pub fn by_train_fraction(cells: &[CellRecord], feature_count: usize) -> Vec<EerSummary> {
    summarize(cells, |c| c.feature_count == feature_count, |c| c.train_fraction)
}

/// EER against feature count at a fixed train fraction.
pub fn by_feature_count(cells: &[CellRecord], train_fraction: f64) -> Vec<EerSummary> {
    summarize(cells, |c| c.train_fraction == train_fraction, |c| c.feature_count as f64)
}

pub fn at_working_point(cells: &[CellRecord], wp: WorkingPoint) -> Vec<EerSummary> {
    summarize(
        cells,
        |c| c.train_fraction == wp.train_fraction && c.feature_count == wp.feature_count,
        |_| 0.0,
    )
}

/// Mean working-point EER of each classifier over scenarios and iterations.
pub fn mean_eer_by_classifier(cells: &[CellRecord], wp: WorkingPoint) -> BTreeMap<ClassifierKind, f64> {
    let mut by: BTreeMap<ClassifierKind, Vec<f64>> = BTreeMap::new();
    for c in cells.iter().filter(|c| {
        c.is_ok() && c.train_fraction == wp.train_fraction && c.feature_count == wp.feature_count
    }) {
        by.entry(c.classifier).or_default().push(c.eer);
    }
    by.into_iter().map(|(k, v)| (k, stats::mean(&v))).collect()
}

/// Plain-text summary: working-point mean EERs per scenario and classifier,
/// their means over scenarios, failure count and the confusion tables.
pub fn summary_text(cells: &[CellRecord], wp: WorkingPoint, sizes: ClassSizes) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "working point: train fraction {}, {} features",
        wp.train_fraction, wp.feature_count
    );
    let _ = writeln!(s, "cells: {}", cells.len());
    let failed = cells.iter().filter(|c| !c.is_ok()).count();
    let _ = writeln!(s, "failed cells: {failed}");
    let _ = writeln!(s);
    let _ = writeln!(s, "[mean eer by scenario]");
    let _ = writeln!(s, "{:<10}{:<10}{:>10}{:>10}{:>6}", "scenario", "classifier", "mean", "std", "n");
    for r in at_working_point(cells, wp) {
        let _ = writeln!(
            s,
            "{:<10}{:<10}{:>10.4}{:>10.4}{:>6}",
            r.scenario_id, r.classifier.as_str(), r.mean_eer, r.std_eer, r.n_ok
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[mean eer over scenarios]");
    for (k, v) in mean_eer_by_classifier(cells, wp) {
        let _ = writeln!(s, "{:<10}{:>10.4}", k.as_str(), v);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[confusion ranges]");
    match confusion_ranges(cells, wp, sizes) {
        Ok(ranges) => {
            for r in &ranges {
                let _ = writeln!(s, "{}", render_confusion_table(r, wp));
            }
        }
        Err(e) => {
            let _ = writeln!(s, "unavailable: {e}");
        }
    }
    s
}
