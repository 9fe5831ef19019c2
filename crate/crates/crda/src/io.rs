//! File formats: labeled CSV matrices (samples as rows, or the transposed
//! microarray layout with a separate label file), serialized models, and
//! feature-index lists.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle preserves every value bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, Trim, WriterBuilder};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::classifier::{CoefficientMatrix, Shrinkage, TrainedModel};
use crate::dataset::{ClassMeans, LabeledDataset};
use crate::error::CrdaError;

/// Version tag written into every model file.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Header name used for the label column unless the caller picks another.
pub const DEFAULT_LABEL_COLUMN: &str = "class";

/// Loads a samples-as-rows CSV. The file needs one header row; the column
/// named `label_column` carries the class labels and every other column is a
/// numeric feature. Row and column positions in errors are 1-based over the
/// data rows and the file's columns.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<LabeledDataset, CrdaError> {
    let file = File::open(path.as_ref())?;
    read_labeled(BufReader::new(file), label_column)
}

fn read_labeled<R: Read>(reader: R, label_column: &str) -> Result<LabeledDataset, CrdaError> {
    let mut rdr = ReaderBuilder::new()
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| CrdaError::MissingLabelColumn {
            name: label_column.to_string(),
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if feature_names.is_empty() {
        return Err(CrdaError::NoFeatures);
    }
    let width = headers.len();
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if record.len() != width {
            return Err(CrdaError::RaggedRow {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                labels.push(cell.to_string());
            } else {
                values.push(parse_cell(cell, row, col + 1)?);
            }
        }
    }
    if labels.is_empty() {
        return Err(CrdaError::EmptyDataset);
    }
    let n = labels.len();
    let p = width - 1;
    let x = Array2::from_shape_vec((n, p), values).expect("row-major fill matches shape");
    LabeledDataset::from_raw_labels(x, &labels, Some(feature_names))
}

/// Loads the transposed layout: `matrix` holds one feature per row, with the
/// feature name in the first column and one column per sample after it, and
/// `labels` is a one-column CSV (header skipped) with one label per sample in
/// column order.
pub fn load_transposed_csv(
    matrix: impl AsRef<Path>,
    labels: impl AsRef<Path>,
) -> Result<LabeledDataset, CrdaError> {
    let (x, feature_names) = load_transposed_matrix_csv(matrix)?;
    let n = x.nrows();
    let label_values = read_label_file(labels.as_ref())?;
    if label_values.len() != n {
        return Err(CrdaError::LabelCountMismatch {
            rows: n,
            labels: label_values.len(),
        });
    }
    LabeledDataset::from_raw_labels(x, &label_values, Some(feature_names))
}

/// Loads a header-plus-rows CSV in which every column is a numeric feature.
/// Returns the matrix (samples as rows) and the column names.
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<(Array2<f64>, Vec<String>), CrdaError> {
    let file = File::open(path.as_ref())?;
    let mut rdr = ReaderBuilder::new()
        .flexible(true)
        .trim(Trim::All)
        .from_reader(BufReader::new(file));
    let feature_names: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
    if feature_names.is_empty() {
        return Err(CrdaError::NoFeatures);
    }
    let p = feature_names.len();
    let mut values: Vec<f64> = Vec::new();
    let mut n = 0;
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if record.len() != p {
            return Err(CrdaError::RaggedRow {
                row,
                expected: p,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            values.push(parse_cell(cell, row, col + 1)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(CrdaError::EmptyDataset);
    }
    let x = Array2::from_shape_vec((n, p), values).expect("row-major fill matches shape");
    Ok((x, feature_names))
}

/// Loads the transposed layout without a label file: one feature per row,
/// feature name first, one column per sample. Returns the matrix with samples
/// as rows and the feature names.
pub fn load_transposed_matrix_csv(
    path: impl AsRef<Path>,
) -> Result<(Array2<f64>, Vec<String>), CrdaError> {
    let file = File::open(path.as_ref())?;
    let mut rdr = ReaderBuilder::new()
        .flexible(true)
        .trim(Trim::All)
        .from_reader(BufReader::new(file));
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(CrdaError::EmptyDataset);
    }
    let n = headers.len() - 1;
    let mut feature_names: Vec<String> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if record.len() != n + 1 {
            return Err(CrdaError::RaggedRow {
                row,
                expected: n + 1,
                found: record.len(),
            });
        }
        let mut cells = record.iter();
        feature_names.push(cells.next().expect("checked record length").to_string());
        for (j, cell) in cells.enumerate() {
            values.push(parse_cell(cell, row, j + 2)?);
        }
    }
    if feature_names.is_empty() {
        return Err(CrdaError::NoFeatures);
    }
    let p = feature_names.len();
    let xt = Array2::from_shape_vec((p, n), values).expect("row-major fill matches shape");
    Ok((xt.reversed_axes().as_standard_layout().to_owned(), feature_names))
}

fn read_label_file(path: &Path) -> Result<Vec<String>, CrdaError> {
    let file = File::open(path)?;
    let mut rdr = ReaderBuilder::new()
        .trim(Trim::All)
        .from_reader(BufReader::new(file));
    rdr.headers()?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if let Some(cell) = record.get(0) {
            out.push(cell.to_string());
        }
    }
    Ok(out)
}

fn parse_cell(cell: &str, row: usize, column: usize) -> Result<f64, CrdaError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CrdaError::NonNumericCell {
            row,
            column,
            value: cell.to_string(),
        }),
    }
}

/// Writes the samples-as-rows layout that [`load_csv`] reads back.
pub fn save_csv(
    ds: &LabeledDataset,
    path: impl AsRef<Path>,
    label_column: &str,
) -> Result<(), CrdaError> {
    let file = File::create(path.as_ref())?;
    let mut wtr = WriterBuilder::new().from_writer(BufWriter::new(file));
    let names = feature_names_or_default(ds);
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push(label_column);
    wtr.write_record(&header)?;
    for i in 0..ds.n() {
        let mut record: Vec<String> = ds.x().row(i).iter().map(|v| v.to_string()).collect();
        record.push(ds.label_names()[ds.labels()[i]].clone());
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the transposed pair that [`load_transposed_csv`] reads back.
pub fn save_transposed_csv(
    ds: &LabeledDataset,
    matrix: impl AsRef<Path>,
    labels: impl AsRef<Path>,
) -> Result<(), CrdaError> {
    let file = File::create(matrix.as_ref())?;
    let mut wtr = WriterBuilder::new().from_writer(BufWriter::new(file));
    let mut header = vec!["feature".to_string()];
    header.extend((1..=ds.n()).map(|i| format!("s{i}")));
    wtr.write_record(&header)?;
    let names = feature_names_or_default(ds);
    for (j, name) in names.iter().enumerate() {
        let mut record = vec![name.clone()];
        record.extend(ds.x().column(j).iter().map(|v| v.to_string()));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;

    let file = File::create(labels.as_ref())?;
    let mut wtr = WriterBuilder::new().from_writer(BufWriter::new(file));
    wtr.write_record([DEFAULT_LABEL_COLUMN])?;
    for &l in ds.labels() {
        wtr.write_record([ds.label_names()[l].as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn feature_names_or_default(ds: &LabeledDataset) -> Vec<String> {
    match ds.feature_names() {
        Some(names) => names.to_vec(),
        None => (1..=ds.p()).map(|j| format!("f{j}")).collect(),
    }
}

/// Writes a one-column list of feature indices.
pub fn write_truth(path: impl AsRef<Path>, indices: &[usize]) -> Result<(), CrdaError> {
    let file = File::create(path.as_ref())?;
    let mut wtr = WriterBuilder::new().from_writer(BufWriter::new(file));
    wtr.write_record(["feature_index"])?;
    for &i in indices {
        wtr.write_record([i.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a list written by [`write_truth`]. An empty list is an error since
/// the selection scores it feeds are undefined without any true feature.
pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<usize>, CrdaError> {
    let file = File::open(path.as_ref())?;
    let mut rdr = ReaderBuilder::new()
        .trim(Trim::All)
        .from_reader(BufReader::new(file));
    rdr.headers()?;
    let mut out = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = record.get(0).unwrap_or("");
        let value = cell
            .parse::<usize>()
            .map_err(|_| CrdaError::NonNumericCell {
                row: row_idx + 1,
                column: 1,
                value: cell.to_string(),
            })?;
        out.push(value);
    }
    if out.is_empty() {
        return Err(CrdaError::EmptyTruth);
    }
    Ok(out)
}

/// On-disk model layout. Coefficient and mean rows are stored only for the
/// support; all other rows of both matrices are zero by construction, and the
/// precomputed offset and prior vectors make the loaded model predict exactly
/// like the one that was saved.
#[derive(Serialize, Deserialize)]
struct StoredModel {
    format_version: u32,
    p: usize,
    n_groups: usize,
    alpha: f64,
    shrinkage: Shrinkage,
    support: Vec<usize>,
    coefficients: Vec<Vec<f64>>,
    means: Vec<Vec<f64>>,
    counts: Vec<usize>,
    log_priors: Vec<f64>,
    diag_term: Vec<f64>,
    label_names: Vec<String>,
    feature_names: Option<Vec<String>>,
}

fn format_err(message: impl Into<String>) -> CrdaError {
    CrdaError::ModelFormat {
        message: message.into(),
    }
}

impl StoredModel {
    fn from_model(model: &TrainedModel) -> Self {
        let support = model.selected_features().to_vec();
        let b = model.coefficients().matrix();
        let means = model.class_means().matrix();
        Self {
            format_version: MODEL_FORMAT_VERSION,
            p: model.p(),
            n_groups: model.n_groups(),
            alpha: model.alpha(),
            shrinkage: model.coefficients().shrinkage(),
            coefficients: support.iter().map(|&i| b.row(i).to_vec()).collect(),
            means: support.iter().map(|&i| means.row(i).to_vec()).collect(),
            support,
            counts: model.class_means().counts().to_vec(),
            log_priors: model.log_priors().to_vec(),
            diag_term: model.diag_term().to_vec(),
            label_names: model.label_names().to_vec(),
            feature_names: model.feature_names().map(|f| f.to_vec()),
        }
    }

    fn into_model(self) -> Result<TrainedModel, CrdaError> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(format_err(format!(
                "unsupported format version {}",
                self.format_version
            )));
        }
        let (p, g) = (self.p, self.n_groups);
        if p == 0 || g == 0 {
            return Err(format_err("model has no features or no groups"));
        }
        if self.label_names.len() != g
            || self.counts.len() != g
            || self.log_priors.len() != g
            || self.diag_term.len() != g
        {
            return Err(format_err("per-group field lengths disagree with n_groups"));
        }
        if self.counts.iter().any(|&c| c == 0) {
            return Err(format_err("every group count must be positive"));
        }
        if let Some(names) = &self.feature_names {
            if names.len() != p {
                return Err(format_err("feature name count disagrees with p"));
            }
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(format_err(format!("alpha {} out of [0, 1)", self.alpha)));
        }
        if self.support.len() != self.coefficients.len() || self.support.len() != self.means.len() {
            return Err(format_err("support and stored row counts disagree"));
        }
        if !self.support.windows(2).all(|w| w[0] < w[1]) {
            return Err(format_err("support indices must be strictly increasing"));
        }
        if self.support.last().is_some_and(|&last| last >= p) {
            return Err(format_err("support index out of range"));
        }
        let finite =
            |slice: &[f64]| slice.iter().all(|v| v.is_finite());
        if !finite(&self.log_priors) || !finite(&self.diag_term) {
            return Err(format_err("non-finite stored value"));
        }
        let mut b = Array2::<f64>::zeros((p, g));
        let mut means = Array2::<f64>::zeros((p, g));
        for ((&fi, coeff_row), mean_row) in self
            .support
            .iter()
            .zip(&self.coefficients)
            .zip(&self.means)
        {
            if coeff_row.len() != g || mean_row.len() != g {
                return Err(format_err("stored row width disagrees with n_groups"));
            }
            if !finite(coeff_row) || !finite(mean_row) {
                return Err(format_err("non-finite stored value"));
            }
            for (col, (&bv, &mv)) in coeff_row.iter().zip(mean_row).enumerate() {
                b[[fi, col]] = bv;
                means[[fi, col]] = mv;
            }
        }
        let coefficients = CoefficientMatrix::from_parts(b, self.shrinkage);
        let class_means = ClassMeans::from_stored(means, self.counts);
        Ok(TrainedModel::from_stored(
            coefficients,
            class_means,
            self.alpha,
            Array1::from(self.log_priors),
            Array1::from(self.diag_term),
            self.label_names,
            self.feature_names,
        ))
    }
}

/// Serializes a model to pretty-printed JSON.
pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), CrdaError> {
    let file = File::create(path.as_ref())?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, &StoredModel::from_model(model))
        .map_err(|e| format_err(e.to_string()))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Reads a model written by [`save_model`], validating the layout.
pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, CrdaError> {
    let file = File::open(path.as_ref())?;
    let stored: StoredModel = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| format_err(e.to_string()))?;
    stored.into_model()
}
