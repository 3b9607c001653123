//! Dataset model, CSV ingestion/serialization, feature standardization, and
//! synthetic mixture generation.
//!
//! CSV files are RFC-4180 style, UTF-8, comma separated, numeric cells only,
//! with an optional header row. All parse failures carry 0-based data
//! coordinates (header rows are not counted).

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::OutlierReport;
use crate::ot::EmpiricalDistribution;
use crate::rng::{self, STREAM_MIXTURE};

/// Columns whose population standard deviation falls below this are treated
/// as constant: real sensor data contains stuck channels, and erroring out
/// on them would reject otherwise usable files.
pub const CONSTANT_COLUMN_EPS: f64 = 1e-12;

/// An N x d numeric matrix with column names and stable row identities.
///
/// Row ids default to `0..N` and survive subsetting, so a sample keeps its
/// identity (and its per-sample vote substream) no matter how rows are
/// reordered or partitioned.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Vec<f64>, // row-major
    n_rows: usize,
    n_cols: usize,
    column_names: Vec<String>,
    row_ids: Vec<u64>,
}

impl Dataset {
    /// Builds a dataset from rows, synthesizing `c0..c{d-1}` names when none
    /// are given.
    pub fn from_rows<R: AsRef<[f64]>>(
        rows: &[R],
        column_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("a dataset needs at least one row"));
        }
        let n_cols = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            data.extend_from_slice(r.as_ref());
            if r.as_ref().len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: r.as_ref().len(),
                });
            }
        }
        Self::from_flat(data, n_cols, column_names)
    }

    /// Builds a dataset from a row-major buffer.
    pub fn from_flat(
        data: Vec<f64>,
        n_cols: usize,
        column_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::invalid("a dataset needs at least one column"));
        }
        if data.is_empty() || !data.len().is_multiple_of(n_cols) {
            return Err(Error::invalid(
                "dataset buffer must hold a positive multiple of n_cols values",
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n_cols,
                col: pos % n_cols,
            });
        }
        let n_rows = data.len() / n_cols;
        let column_names = match column_names {
            Some(names) => {
                if names.len() != n_cols {
                    return Err(Error::invalid(format!(
                        "{} column names for {} columns",
                        names.len(),
                        n_cols
                    )));
                }
                names
            }
            None => (0..n_cols).map(|c| format!("c{c}")).collect(),
        };
        Ok(Self {
            data,
            n_rows,
            n_cols,
            column_names,
            row_ids: (0..n_rows as u64).collect(),
        })
    }

    /// Replaces the row identities. Ids must be unique and one per row.
    pub fn with_row_ids(mut self, row_ids: Vec<u64>) -> Result<Self> {
        if row_ids.len() != self.n_rows {
            return Err(Error::invalid(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                self.n_rows
            )));
        }
        let mut sorted = row_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("row ids must be unique"));
        }
        self.row_ids = row_ids;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    /// The row-major backing buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    /// A new dataset holding the given rows (in the given order), keeping
    /// column names and row identities.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("a dataset subset needs at least one row"));
        }
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        let mut row_ids = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::invalid(format!(
                    "row index {i} out of range for {} rows",
                    self.n_rows
                )));
            }
            data.extend_from_slice(self.row(i));
            row_ids.push(self.row_ids[i]);
        }
        Ok(Self {
            data,
            n_rows: indices.len(),
            n_cols: self.n_cols,
            column_names: self.column_names.clone(),
            row_ids,
        })
    }

    /// The empirical distribution placing weight 1/N on every row.
    pub fn empirical(&self) -> EmpiricalDistribution {
        EmpiricalDistribution::from_flat(self.data.clone(), self.n_cols)
            .expect("dataset invariants imply a valid distribution")
    }
}

/// Loads a numeric CSV. With `has_header`, column names come from the first
/// row; otherwise they are synthesized as `c0..c{d-1}`.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(file);

    let parse_err = |row: usize, col: usize, message: String| Error::Parse {
        path: path.display().to_string(),
        row,
        col,
        message,
    };

    let column_names: Option<Vec<String>> = if has_header {
        let headers = reader
            .headers()
            .map_err(|e| parse_err(0, 0, e.to_string()))?;
        Some(headers.iter().map(|h| h.trim().to_string()).collect())
    } else {
        None
    };

    let mut data: Vec<f64> = Vec::new();
    let mut n_cols = column_names.as_ref().map(|n| n.len());
    let mut n_rows = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(row, 0, e.to_string()))?;
        let width = *n_cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(parse_err(
                row,
                record.len().min(width),
                format!("expected {} columns, found {}", width, record.len()),
            ));
        }
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(row, col, format!("not a number: {cell:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(row, col, format!("non-finite value: {cell:?}")));
            }
            data.push(value);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(parse_err(0, 0, "no data rows".to_string()));
    }
    let n_cols = n_cols.unwrap();
    if n_cols == 0 {
        return Err(parse_err(0, 0, "rows have no columns".to_string()));
    }
    Dataset::from_flat(data, n_cols, column_names)
}

/// Loads a CSV with one non-numeric label column (by header name).
/// Returns the numeric feature dataset and the raw label strings.
pub fn load_labeled_csv(
    path: impl AsRef<Path>,
    label_column: &str,
) -> Result<(Dataset, Vec<String>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let parse_err = |row: usize, col: usize, message: String| Error::Parse {
        path: path.display().to_string(),
        row,
        col,
        message,
    };

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(0, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::invalid(format!("no column named {label_column:?} in header")))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut data: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(row, 0, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_err(
                row,
                record.len().min(headers.len()),
                format!("expected {} columns, found {}", headers.len(), record.len()),
            ));
        }
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                labels.push(cell.trim().to_string());
                continue;
            }
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(row, col, format!("not a number: {cell:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(row, col, format!("non-finite value: {cell:?}")));
            }
            data.push(value);
        }
    }
    if labels.is_empty() {
        return Err(parse_err(0, 0, "no data rows".to_string()));
    }
    let n_cols = headers.len() - 1;
    if n_cols == 0 {
        return Err(parse_err(0, 0, "no feature columns".to_string()));
    }
    let dataset = Dataset::from_flat(data, n_cols, Some(feature_names))?;
    Ok((dataset, labels))
}

/// Writes an outlier report next to its features:
/// `row_id, vote_fraction (9 decimals), is_outlier (0/1)`, then the original
/// feature columns (shortest round-trip decimals). The header is always
/// present.
pub fn save_report(report: &OutlierReport, data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if report.vote_fraction.len() != data.n_rows() {
        return Err(Error::invalid(format!(
            "report covers {} samples but the dataset has {} rows",
            report.vote_fraction.len(),
            data.n_rows()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));

    let mut header = vec![
        "row_id".to_string(),
        "vote_fraction".to_string(),
        "is_outlier".to_string(),
    ];
    header.extend(data.column_names().iter().cloned());
    writer
        .write_record(&header)
        .map_err(|e| csv_io_error(path, e))?;

    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..data.n_rows() {
        record.clear();
        record.push(data.row_ids()[i].to_string());
        record.push(format!("{:.9}", report.vote_fraction[i]));
        record.push(if report.is_outlier[i] { "1" } else { "0" }.to_string());
        record.extend(data.row(i).iter().map(|x| format!("{x}")));
        writer
            .write_record(&record)
            .map_err(|e| csv_io_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn csv_io_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::invalid(format!("csv write failed: {other:?}")),
    }
}

/// Per-column standardization state, invertible for round trips.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingState {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    /// Columns with population stddev below [`CONSTANT_COLUMN_EPS`]; these
    /// pass through unchanged.
    pub constant: Vec<bool>,
}

impl ScalingState {
    /// Undoes [`standardize`] on a transformed dataset.
    pub fn invert(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: data.n_cols(),
            });
        }
        let mut out = data.data().to_vec();
        for (pos, x) in out.iter_mut().enumerate() {
            let c = pos % data.n_cols();
            if !self.constant[c] {
                *x = *x * self.stddev[c] + self.mean[c];
            }
        }
        Ok(Dataset {
            data: out,
            n_rows: data.n_rows,
            n_cols: data.n_cols,
            column_names: data.column_names.clone(),
            row_ids: data.row_ids.clone(),
        })
    }
}

/// Transforms every non-constant column to mean 0 and population stddev 1.
/// Constant columns pass through unchanged and are flagged in the state.
pub fn standardize(data: &Dataset) -> Result<(Dataset, ScalingState)> {
    if data.n_rows() < 2 {
        return Err(Error::invalid("standardization needs at least two rows"));
    }
    let n = data.n_rows() as f64;
    let d = data.n_cols();
    let mut mean = vec![0.0f64; d];
    for row in data.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0f64; d];
    for row in data.rows() {
        for c in 0..d {
            let delta = row[c] - mean[c];
            var[c] += delta * delta;
        }
    }
    let stddev: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
    let constant: Vec<bool> = stddev.iter().map(|&s| s < CONSTANT_COLUMN_EPS).collect();

    let mut out = data.data().to_vec();
    for (pos, x) in out.iter_mut().enumerate() {
        let c = pos % d;
        if !constant[c] {
            *x = (*x - mean[c]) / stddev[c];
        }
    }
    let scaled = Dataset {
        data: out,
        n_rows: data.n_rows,
        n_cols: data.n_cols,
        column_names: data.column_names.clone(),
        row_ids: data.row_ids.clone(),
    };
    Ok((
        scaled,
        ScalingState {
            mean,
            stddev,
            constant,
        },
    ))
}

/// Ground-truth tag for a mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentLabel {
    Majority,
    Minority,
    Outlier,
}

impl ComponentLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentLabel::Majority => "majority",
            ComponentLabel::Minority => "minority",
            ComponentLabel::Outlier => "outlier",
        }
    }
}

impl std::fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One axis-aligned Gaussian blob.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureComponent {
    pub count: usize,
    pub mean: Vec<f64>,
    /// Diagonal of the covariance matrix (variances, strictly positive).
    pub covariance_diag: Vec<f64>,
    pub label: ComponentLabel,
}

/// A seeded Gaussian mixture scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
    pub seed: u64,
}

impl MixtureSpec {
    /// The documented three-regime scenario: a majority blob of 100 at the
    /// origin (unit variance), a minority blob of 20 at (4, 4) (variance
    /// 0.5), and 5 far outliers at (12, -12) (unit variance).
    pub fn three_gaussian_default(seed: u64) -> Self {
        Self {
            components: vec![
                MixtureComponent {
                    count: 100,
                    mean: vec![0.0, 0.0],
                    covariance_diag: vec![1.0, 1.0],
                    label: ComponentLabel::Majority,
                },
                MixtureComponent {
                    count: 20,
                    mean: vec![4.0, 4.0],
                    covariance_diag: vec![0.5, 0.5],
                    label: ComponentLabel::Minority,
                },
                MixtureComponent {
                    count: 5,
                    mean: vec![12.0, -12.0],
                    covariance_diag: vec![1.0, 1.0],
                    label: ComponentLabel::Outlier,
                },
            ],
            seed,
        }
    }

    fn validate(&self) -> Result<usize> {
        if self.components.is_empty() {
            return Err(Error::invalid("a mixture needs at least one component"));
        }
        let dim = self.components[0].mean.len();
        if dim == 0 {
            return Err(Error::invalid(
                "mixture components need at least one dimension",
            ));
        }
        for c in &self.components {
            if c.count == 0 {
                return Err(Error::invalid("component counts must be at least 1"));
            }
            if c.mean.len() != dim || c.covariance_diag.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.mean.len().max(c.covariance_diag.len()),
                });
            }
            if c.mean.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("component means must be finite"));
            }
            if c.covariance_diag
                .iter()
                .any(|v| !v.is_finite() || *v <= 0.0)
            {
                return Err(Error::invalid("component variances must be positive"));
            }
        }
        Ok(dim)
    }
}

/// Draws the mixture and shuffles the rows, all under the spec seed.
///
/// Sampling: ChaCha8 keyed on the seed, ziggurat standard normals scaled by
/// each component's per-axis stddev. Deterministic in the seed; labels stay
/// aligned with rows through the shuffle.
pub fn generate_mixture(spec: &MixtureSpec) -> Result<(Dataset, Vec<ComponentLabel>)> {
    let dim = spec.validate()?;
    let total: usize = spec.components.iter().map(|c| c.count).sum();
    let mut rng = rng::substream(spec.seed, STREAM_MIXTURE);

    let mut rows: Vec<f64> = Vec::with_capacity(total * dim);
    let mut labels: Vec<ComponentLabel> = Vec::with_capacity(total);
    for component in &spec.components {
        let scale: Vec<f64> = component.covariance_diag.iter().map(|v| v.sqrt()).collect();
        for _ in 0..component.count {
            for (mean, s) in component.mean.iter().zip(&scale) {
                let z: f64 = rng.sample(StandardNormal);
                rows.push(mean + s * z);
            }
            labels.push(component.label);
        }
    }

    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let mut shuffled = Vec::with_capacity(total * dim);
    let mut shuffled_labels = Vec::with_capacity(total);
    for &i in &order {
        shuffled.extend_from_slice(&rows[i * dim..(i + 1) * dim]);
        shuffled_labels.push(labels[i]);
    }

    let dataset = Dataset::from_flat(shuffled, dim, None)?;
    Ok((dataset, shuffled_labels))
}
