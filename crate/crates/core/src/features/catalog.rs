//! The 68-entry parametric feature catalog.
//!
//! Ids are fixed catalog row numbers. `description` gives
//! the operational definition implemented in [`super::extract`].

use std::fmt;

use serde::{Deserialize, Serialize};

pub const N_FEATURES: usize = 68;

/// Catalog row number, 1 through 68.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId(u8);

impl FeatureId {
    pub fn new(id: u8) -> Option<Self> {
        (1..=N_FEATURES as u8).contains(&id).then_some(FeatureId(id))
    }

    /// Id of column `index` (0-based).
    pub fn from_index(index: usize) -> Self {
        assert!(index < N_FEATURES, "feature index {index} out of range");
        FeatureId(index as u8 + 1)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }

    pub fn all() -> impl Iterator<Item = FeatureId> {
        (1..=N_FEATURES as u8).map(FeatureId)
    }

    /// Column name used in feature CSV files (`f01` .. `f68`).
    pub fn column(self) -> String {
        format!("f{:02}", self.0)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaTag {
    /// Fraction of samples satisfying a condition.
    TimeFraction,
    /// Count of samples satisfying a condition.
    SampleCount,
    /// Ratio of two dispersion or count statistics.
    Ratio,
    /// Product of ranges or interquartile ranges.
    SpreadProduct,
    /// Range, standard deviation or interquartile range of one signal.
    Spread,
    /// Derivative energy normalized by task time and a motion scale.
    SmoothnessMetric,
    /// Sum of signed successive differences, optionally divided.
    SumOfDifferences,
    /// Time of a global extremum (or a difference or ratio of such times) over T.
    ExtremumTime,
    /// Number of strict local extrema.
    ExtremaCount,
    ZeroCrossings,
    Mean,
    Maximum,
    /// Sum of samples over a region or of a magnitude.
    Sum,
    Integral,
    SpectralRatio,
    EventRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Among the 15 best features of the reference ranking.
    Best15,
    /// Among the 30 best but not the 15 best.
    Best30,
    Selected,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeatureDefinition {
    pub id: FeatureId,
    pub formula_tag: FormulaTag,
    pub description: &'static str,
    pub force_based: bool,
    pub tier: Tier,
}

use FormulaTag::*;
use Tier::*;

const fn def(
    id: u8,
    formula_tag: FormulaTag,
    force_based: bool,
    tier: Tier,
    description: &'static str,
) -> FeatureDefinition {
    FeatureDefinition {
        id: FeatureId(id),
        formula_tag,
        description,
        force_based,
        tier,
    }
}

pub static CATALOG: [FeatureDefinition; N_FEATURES] = [
    def(1, TimeFraction, false, Selected, "fraction of samples with x jerk j_x <= 0"),
    def(2, SampleCount, true, Selected, "number of force samples with f > 0.1 N"),
    def(3, Ratio, true, Best30, "std(f) / std(v_x); 0 if std(v_x) = 0"),
    def(4, SpreadProduct, false, Selected, "range(v_x) * range(v_y) * range(v_z)"),
    def(5, Spread, true, Selected, "interquartile range of f"),
    def(6, SmoothnessMetric, true, Selected, "sqrt(T^3 / (2 iqr(f)^2) * integral a_f^2 dt); 0 if iqr(f) = 0"),
    def(7, SumOfDifferences, true, Selected, "sum of successive differences of f / T"),
    def(8, SumOfDifferences, true, Best15, "sum of successive differences of speed V / (T * std(f)); 0 if std(f) = 0"),
    def(9, ExtremumTime, false, Best15, "time of global maximum of a_x / T"),
    def(10, ZeroCrossings, false, Best30, "zero crossings of v_x"),
    def(11, ExtremumTime, false, Best30, "time of global minimum of a_y / T"),
    def(12, ExtremumTime, false, Selected, "time of global maximum of a_z / T"),
    def(13, ExtremaCount, false, Selected, "local extrema of pitch"),
    def(14, ExtremumTime, true, Best30, "time of global minimum of a_f / T"),
    def(15, Mean, false, Selected, "mean speed V"),
    def(16, Ratio, true, Best30, "std(f) / std(v_z); 0 if std(v_z) = 0"),
    def(17, SpectralRatio, true, Best15, "periodogram power of mean-removed f below the cutoff / power at or above it (default cutoff 2 Hz); 0 if no high-band power"),
    def(18, ExtremumTime, false, Selected, "time of global maximum of z / T"),
    def(19, ExtremaCount, true, Selected, "local extrema of v_f"),
    def(20, ExtremaCount, false, Best15, "local minima of a_x"),
    def(21, ExtremaCount, false, Selected, "local minima of a_y"),
    def(22, ExtremaCount, false, Selected, "local maxima of x + of y + of z"),
    def(23, ExtremaCount, false, Best15, "local extrema of x"),
    def(24, ExtremaCount, false, Selected, "local extrema of z"),
    def(25, SumOfDifferences, false, Selected, "sum of successive differences of pitch / T"),
    def(26, SumOfDifferences, false, Selected, "sum of successive differences of v_roll / T"),
    def(27, Ratio, false, Best30, "mean(roll) * T / range(v_roll); 0 if range(v_roll) = 0"),
    def(28, ExtremaCount, false, Selected, "local minima of yaw + of pitch + of roll"),
    def(29, ExtremaCount, false, Selected, "local extrema of pitch (duplicate of row 13)"),
    def(30, ExtremaCount, false, Selected, "local extrema of v_yaw"),
    def(31, ExtremaCount, false, Best15, "local extrema of v_roll"),
    def(32, ExtremumTime, false, Best30, "(time of global maximum of pitch - time of global minimum of pitch) / T"),
    def(33, EventRate, false, Selected, "pedal activations (rising edges, off before the first sample) / T"),
    def(34, Sum, true, Selected, "sum of force samples tagged R3"),
    def(35, ExtremaCount, true, Best30, "local extrema of f"),
    def(36, Sum, true, Best30, "sum of force samples tagged R4"),
    def(37, Spread, true, Selected, "max(f) - min(f)"),
    def(38, Spread, true, Selected, "std(f)"),
    def(39, SpreadProduct, false, Selected, "iqr(x) * iqr(y) * iqr(z)"),
    def(40, SmoothnessMetric, true, Best15, "sqrt(T / (2 iqr(f)^2) * integral v_f^2 dt); 0 if iqr(f) = 0"),
    def(41, Sum, false, Selected, "sum over samples of the acceleration magnitude |a|"),
    def(42, SumOfDifferences, false, Best30, "sum of successive differences of |a| / T"),
    def(43, Integral, true, Selected, "integral of f over the widest interval around its global maximum where f > max(f) / 2; 0 if max(f) <= 0"),
    def(44, ExtremumTime, false, Best30, "time of global minimum of a_x / T"),
    def(45, ExtremumTime, false, Best15, "time of global maximum of a_y / T"),
    def(46, ZeroCrossings, false, Selected, "zero crossings of v_y"),
    def(47, ExtremumTime, false, Best15, "time of global minimum of a_z / T"),
    def(48, ExtremumTime, true, Best30, "time of global maximum of a_f / T"),
    def(49, Maximum, false, Selected, "max speed V"),
    def(50, SmoothnessMetric, true, Best15, "sqrt(T^5 / (2 iqr(f)^2) * integral j_f^2 dt); 0 if iqr(f) = 0"),
    def(51, Ratio, true, Best15, "std(f) / std(v_y); 0 if std(v_y) = 0"),
    def(52, ExtremaCount, false, Best30, "local minima of x"),
    def(53, ExtremaCount, false, Best15, "local minima of v_x"),
    def(54, ExtremumTime, true, Best15, "(1-based index of global maximum of f) / (1-based index of global minimum of f)"),
    def(55, ExtremaCount, true, Selected, "local extrema of a_f"),
    def(56, Ratio, true, Selected, "count(v_f >= 0) / count(v_f <= 0); 0 if the denominator is 0"),
    def(57, ExtremaCount, false, Selected, "local minima of x + of y + of z"),
    def(58, ExtremaCount, false, Selected, "local extrema of y"),
    def(59, SumOfDifferences, false, Best30, "sum of successive differences of yaw"),
    def(60, SumOfDifferences, false, Selected, "sum of successive differences of v_pitch / T"),
    def(61, Ratio, false, Selected, "mean(pitch) * T / range(v_pitch); 0 if range(v_pitch) = 0"),
    def(62, ExtremaCount, false, Best15, "local maxima of yaw + of pitch + of roll"),
    def(63, ExtremaCount, false, Selected, "local extrema of yaw"),
    def(64, ExtremaCount, false, Best15, "local extrema of roll"),
    def(65, ExtremaCount, false, Best30, "local extrema of v_pitch"),
    def(66, SumOfDifferences, false, Selected, "sum of successive differences of j_pitch / mean(j_pitch); 0 if the mean is 0"),
    def(67, ExtremumTime, false, Selected, "(time of global maximum of yaw - time of global minimum of yaw) / T"),
    def(68, Sum, true, Selected, "sum of force samples tagged R1"),
];

pub fn definition(id: FeatureId) -> &'static FeatureDefinition {
    &CATALOG[id.index()]
}

/// Markdown table mapping every id to its definition.
pub fn reference_document() -> String {
    let mut out = String::from(
        "# Feature catalog\n\n\
         T is the active task time, sample times are i / rate over the concatenated\n\
         tumor segments, derivatives are taken per segment, std is the sample standard\n\
         deviation and quantiles interpolate linearly. Local extrema are strict, with a\n\
         plateau counted once.\n\n\
         | id | column | kind | force | tier | definition |\n\
         |---:|---|---|---|---|---|\n",
    );
    for d in &CATALOG {
        let kind = serde_json::to_value(d.formula_tag)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let tier = match d.tier {
            Best15 => "best-15",
            Best30 => "best-30",
            Selected => "",
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            d.id,
            d.id.column(),
            kind,
            if d.force_based { "yes" } else { "" },
            tier,
            d.description
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_total_and_ordered() {
        for (i, d) in CATALOG.iter().enumerate() {
            assert_eq!(d.id.index(), i);
        }
        assert!(FeatureId::new(0).is_none());
        assert!(FeatureId::new(69).is_none());
        assert_eq!(FeatureId::new(7).unwrap().column(), "f07");
    }

    #[test]
    fn force_share_of_ranked_tiers() {
        let best15: Vec<_> = CATALOG.iter().filter(|d| d.tier == Best15).collect();
        let best30: Vec<_> = CATALOG.iter().filter(|d| d.tier != Selected).collect();
        assert_eq!(best15.len(), 15);
        assert_eq!(best30.len(), 30);
        assert_eq!(best15.iter().filter(|d| d.force_based).count(), 6);
        assert_eq!(best30.iter().filter(|d| d.force_based).count(), 12);
    }

    #[test]
    fn reference_document_lists_every_row() {
        let doc = reference_document();
        assert_eq!(doc.lines().filter(|l| l.starts_with("| ") && !l.starts_with("| id")).count(), 68);
        assert!(doc.contains("| 17 | f17 | spectral_ratio | yes | best-15 |"));
    }
}
