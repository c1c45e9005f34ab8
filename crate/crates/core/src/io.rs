//! CSV and JSON file formats: trial recordings with their dataset sidecar,
//! feature tables and evaluation reports.
//!
//! Floats are written in the shortest form that parses back to the same
//! value.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierKind;
use crate::error::{Error, Result};
use crate::evaluation::{CellRecord, EerSummary};
use crate::features::{FeatureId, FeatureMatrix, FeatureVector, N_FEATURES};
use crate::signal::{validate_trial, Channel, Dataset, Label, Region, TumorSegment, Trial};

pub const TRIAL_HEADER: [&str; 10] = ["t", "x", "y", "z", "roll", "pitch", "yaw", "force", "pedal", "region"];
pub const REPORT_HEADER: [&str; 9] = [
    "scenario",
    "classifier",
    "train_frac",
    "n_features",
    "iteration",
    "eer",
    "sensitivity",
    "specificity",
    "threshold",
];
/// Sidecar describing every trial of a dataset directory.
pub const DATASET_FILE: &str = "dataset.json";

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: display(path),
        line,
        message: message.into(),
    }
}

fn schema_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: display(path),
        message: message.into(),
    }
}

fn check_header(path: &Path, got: &csv::StringRecord, want: &[String]) -> Result<()> {
    if got.len() != want.len() {
        return Err(schema_err(
            path,
            format!("expected {} columns, header has {}", want.len(), got.len()),
        ));
    }
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        if g != w {
            return Err(schema_err(
                path,
                format!("column {} is `{g}`, expected `{w}`", i + 1),
            ));
        }
    }
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads records after checking the header and the field count of each row.
fn records(path: &Path, header: &[String]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = reader(path)?;
    check_header(path, rdr.headers()?, header)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        if rec.len() != header.len() {
            return Err(parse_err(
                path,
                line_of(&rec),
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let raw = &rec[i];
    raw.trim()
        .parse()
        .map_err(|_| parse_err(path, line_of(rec), format!("column `{name}`: cannot parse `{raw}`")))
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Per-trial entry of the dataset sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub id: String,
    pub scenario_id: u8,
    pub label: Label,
    pub sample_rate_hz: f64,
    /// Trial CSV, relative to the dataset directory.
    pub file: String,
    pub segments: Vec<TumorSegment>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub trials: Vec<TrialMeta>,
}

impl DatasetManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(DATASET_FILE);
        let text = fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| parse_err(&path, e.line() as u64, e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(DATASET_FILE);
        let mut f = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(path)
    }
}

/// Writes one trial CSV. `t` restarts at zero in every segment.
pub fn write_trial_csv(path: &Path, trial: &Trial) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(TRIAL_HEADER)?;
    let h = 1.0 / trial.sample_rate_hz;
    let mut i = 0;
    for seg in &trial.segments {
        for k in 0..seg.len {
            let t = k as f64 * h;
            let row = [
                t.to_string(),
                trial.position[0].samples[i].to_string(),
                trial.position[1].samples[i].to_string(),
                trial.position[2].samples[i].to_string(),
                trial.angles[0].samples[i].to_string(),
                trial.angles[1].samples[i].to_string(),
                trial.angles[2].samples[i].to_string(),
                trial.force.samples[i].to_string(),
                (trial.pedal[i] as u8).to_string(),
                trial.region[i].as_str().to_string(),
            ];
            w.write_record(&row)?;
            i += 1;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads one trial CSV described by `meta`.
pub fn read_trial_csv(path: &Path, meta: &TrialMeta) -> Result<Trial> {
    let header: Vec<String> = TRIAL_HEADER.iter().map(|s| s.to_string()).collect();
    let recs = records(path, &header)?;
    let expected: usize = meta.segments.iter().map(|s| s.len).sum();
    if recs.len() != expected {
        return Err(schema_err(
            path,
            format!("{} samples, the dataset sidecar lists {expected}", recs.len()),
        ));
    }
    let n = recs.len();
    // t is implied by the sample rate
    let mut cols: [Vec<f64>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut pedal = Vec::with_capacity(n);
    let mut region = Vec::with_capacity(n);
    for rec in &recs {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(field(path, rec, c + 1, TRIAL_HEADER[c + 1])?);
        }
        pedal.push(match rec[8].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_err(
                    path,
                    line_of(rec),
                    format!("column `pedal`: expected 0 or 1, got `{other}`"),
                ))
            }
        });
        region.push(Region::parse(rec[9].trim()).ok_or_else(|| {
            parse_err(path, line_of(rec), format!("column `region`: unknown region `{}`", &rec[9]))
        })?);
    }
    let rate = meta.sample_rate_hz;
    let [x, y, z, roll, pitch, yaw, force] = cols;
    let trial = Trial {
        id: meta.id.clone(),
        scenario_id: meta.scenario_id,
        label: meta.label,
        sample_rate_hz: rate,
        position: [Channel::new("x", rate, x), Channel::new("y", rate, y), Channel::new("z", rate, z)],
        angles: [
            Channel::new("roll", rate, roll),
            Channel::new("pitch", rate, pitch),
            Channel::new("yaw", rate, yaw),
        ],
        force: Channel::new("force", rate, force),
        pedal,
        region,
        segments: meta.segments.clone(),
    };
    validate_trial(&trial).into_result(&trial.id)?;
    Ok(trial)
}

/// Relative path of a trial's CSV inside a dataset directory.
pub fn trial_file_name(id: &str) -> String {
    format!("trials/{id}.csv")
}

/// Writes the CSV of one trial under `dir` and returns its sidecar entry.
pub fn write_trial(dir: &Path, trial: &Trial) -> Result<TrialMeta> {
    let file = trial_file_name(&trial.id);
    write_trial_csv(&dir.join(&file), trial)?;
    Ok(TrialMeta {
        id: trial.id.clone(),
        scenario_id: trial.scenario_id,
        label: trial.label,
        sample_rate_hz: trial.sample_rate_hz,
        file,
        segments: trial.segments.clone(),
    })
}

pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<DatasetManifest> {
    let trials = dataset
        .trials
        .iter()
        .map(|t| write_trial(dir, t))
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest { trials };
    manifest.write(dir)?;
    Ok(manifest)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = DatasetManifest::read(dir)?;
    let trials = manifest
        .trials
        .iter()
        .map(|m| read_trial_csv(&dir.join(&m.file), m))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(trials)
}

fn feature_header() -> Vec<String> {
    let mut h = vec!["trial_id".to_string(), "label".into(), "scenario_id".into()];
    h.extend(FeatureId::all().map(|f| f.column()));
    h
}

/// Feature table with columns `trial_id,label,scenario_id,f01..f68`.
pub fn write_features_csv(path: &Path, matrix: &FeatureMatrix) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(feature_header())?;
    for ((row, label), scenario) in matrix.rows.iter().zip(&matrix.labels).zip(&matrix.scenario_ids) {
        let mut rec = vec![row.trial_id.clone(), label.as_str().to_string(), scenario.to_string()];
        rec.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv(path: &Path) -> Result<FeatureMatrix> {
    let recs = records(path, &feature_header())?;
    let mut rows = Vec::with_capacity(recs.len());
    let mut labels = Vec::with_capacity(recs.len());
    let mut scenarios = Vec::with_capacity(recs.len());
    for rec in &recs {
        let label = Label::parse(rec[1].trim()).ok_or_else(|| {
            parse_err(path, line_of(rec), format!("column `label`: unknown label `{}`", &rec[1]))
        })?;
        let scenario: u8 = field(path, rec, 2, "scenario_id")?;
        let values = (0..N_FEATURES)
            .map(|j| field(path, rec, 3 + j, &FeatureId::from_index(j).column()))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(FeatureVector {
            trial_id: rec[0].to_string(),
            values,
            degenerate: Vec::new(),
        });
        labels.push(label);
        scenarios.push(scenario);
    }
    FeatureMatrix::new(rows, labels, scenarios)
}

/// Report rows; failed cells have NaN metrics.
pub fn write_report_csv(path: &Path, cells: &[CellRecord]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(REPORT_HEADER)?;
    for c in cells {
        w.write_record([
            c.scenario_id.to_string(),
            c.classifier.to_string(),
            c.train_fraction.to_string(),
            c.feature_count.to_string(),
            c.iteration.to_string(),
            c.eer.to_string(),
            c.sensitivity.to_string(),
            c.specificity.to_string(),
            c.threshold.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv(path: &Path) -> Result<Vec<CellRecord>> {
    let header: Vec<String> = REPORT_HEADER.iter().map(|s| s.to_string()).collect();
    records(path, &header)?
        .iter()
        .map(|rec| {
            let classifier: ClassifierKind = rec[1]
                .trim()
                .parse()
                .map_err(|e: Error| parse_err(path, line_of(rec), format!("column `classifier`: {e}")))?;
            let eer: f64 = field(path, rec, 5, "eer")?;
            Ok(CellRecord {
                scenario_id: field(path, rec, 0, "scenario")?,
                classifier,
                train_fraction: field(path, rec, 2, "train_frac")?,
                feature_count: field(path, rec, 3, "n_features")?,
                iteration: field(path, rec, 4, "iteration")?,
                eer,
                sensitivity: field(path, rec, 6, "sensitivity")?,
                specificity: field(path, rec, 7, "specificity")?,
                threshold: field(path, rec, 8, "threshold")?,
                error: eer.is_nan().then(|| "failed cell".to_string()),
            })
        })
        .collect()
}

/// Aggregated EERs; `x_name` labels the grouping column.
pub fn write_summary_csv(path: &Path, x_name: &str, rows: &[EerSummary]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["scenario", "classifier", x_name, "mean_eer", "std_eer", "n_ok", "n_failed"])?;
    for r in rows {
        w.write_record([
            r.scenario_id.to_string(),
            r.classifier.to_string(),
            r.x.to_string(),
            r.mean_eer.to_string(),
            r.std_eer.to_string(),
            r.n_ok.to_string(),
            r.n_failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
