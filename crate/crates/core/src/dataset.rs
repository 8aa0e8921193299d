//! Regression data: ingestion, validation and feature rescaling.
//!
//! Predictors are stored column-major because every screening statistic is
//! computed one feature at a time.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreenError};

/// Design matrix, response and optional index variable.
///
/// Immutable after construction. Every entry is finite, `n >= 2` and `p >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    z: Option<Vec<f64>>,
    feature_names: Vec<String>,
    response_name: String,
    index_name: Option<String>,
}

impl Dataset {
    /// Builds a dataset from predictor columns. Feature names default to
    /// `X1..Xp`, the response to `Y` and the index to `Z`.
    pub fn new(columns: Vec<Vec<f64>>, y: Vec<f64>, z: Option<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("X{j}")).collect();
        Self::with_names(columns, y, z, names, "Y".into(), Some("Z".into()))
    }

    pub fn with_names(
        columns: Vec<Vec<f64>>,
        y: Vec<f64>,
        z: Option<Vec<f64>>,
        feature_names: Vec<String>,
        response_name: String,
        index_name: Option<String>,
    ) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(ScreenError::InsufficientData(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if columns.is_empty() {
            return Err(ScreenError::InsufficientData(
                "need at least one predictor".into(),
            ));
        }
        if feature_names.len() != columns.len() {
            return Err(ScreenError::LengthMismatch {
                expected: columns.len(),
                got: feature_names.len(),
            });
        }
        check_finite(&y, 0, &response_name)?;
        for (col, name) in columns.iter().zip(&feature_names) {
            if col.len() != n {
                return Err(ScreenError::LengthMismatch {
                    expected: n,
                    got: col.len(),
                });
            }
            check_finite(col, 0, name)?;
        }
        if let Some(z) = &z {
            if z.len() != n {
                return Err(ScreenError::LengthMismatch {
                    expected: n,
                    got: z.len(),
                });
            }
            check_finite(z, 0, index_name.as_deref().unwrap_or("Z"))?;
        }
        let index_name = z.as_ref().map(|_| index_name.unwrap_or_else(|| "Z".into()));
        Ok(Dataset {
            columns,
            y,
            z,
            feature_names,
            response_name,
            index_name,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> Option<&[f64]> {
        self.z.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn index_name(&self) -> Option<&str> {
        self.index_name.as_deref()
    }

    /// Subtracts the sample mean from the response.
    pub fn centered(mut self) -> Self {
        center_in_place(&mut self.y);
        self
    }

    /// Returns a copy with the response replaced.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::with_names(
            self.columns.clone(),
            y,
            self.z.clone(),
            self.feature_names.clone(),
            self.response_name.clone(),
            self.index_name.clone(),
        )
    }

    /// Returns a copy with the predictor columns replaced; names are kept.
    pub fn with_columns(&self, columns: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_names(
            columns,
            self.y.clone(),
            self.z.clone(),
            self.feature_names.clone(),
            self.response_name.clone(),
            self.index_name.clone(),
        )
    }

    /// Restricts to the given feature indices, in the given order.
    pub fn select_features(&self, idx: &[usize]) -> Result<Self> {
        Self::with_names(
            idx.iter().map(|&j| self.columns[j].clone()).collect(),
            self.y.clone(),
            self.z.clone(),
            idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            self.response_name.clone(),
            self.index_name.clone(),
        )
    }

    /// Applies the same row permutation to x, y and z. `perm[i]` is the
    /// source row of output row `i`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let take = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::with_names(
            self.columns.iter().map(|c| take(c)).collect(),
            take(&self.y),
            self.z.as_deref().map(take),
            self.feature_names.clone(),
            self.response_name.clone(),
            self.index_name.clone(),
        )
    }
}

fn check_finite(values: &[f64], row_offset: usize, column: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(ScreenError::NonFinite {
            row: i + 1 + row_offset,
            column: column.to_string(),
        }),
        None => Ok(()),
    }
}

pub(crate) fn center_in_place(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions<'a> {
    pub response_col: &'a str,
    pub index_col: Option<&'a str>,
    pub center_response: bool,
}

impl<'a> CsvOptions<'a> {
    pub fn new(response_col: &'a str) -> Self {
        CsvOptions {
            response_col,
            index_col: None,
            center_response: true,
        }
    }
}

/// Reads a dataset from a headed CSV file. Every column other than the
/// response and index becomes a predictor, in header order.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions<'_>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| ScreenError::io(path, e))?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions<'_>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ScreenError::MissingColumn(name.to_string()))
    };
    let y_col = find(opts.response_col)?;
    let z_col = opts.index_col.map(find).transpose()?;
    let x_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != y_col && Some(c) != z_col)
        .collect();

    let mut columns = vec![Vec::new(); x_cols.len()];
    let mut y = Vec::new();
    let mut z = z_col.map(|_| Vec::new());
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        // Data rows are numbered from 1, the header is row 0.
        let row = r + 1;
        let cell = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| ScreenError::Parse {
                row,
                column: header[c].clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(ScreenError::NonFinite {
                    row,
                    column: header[c].clone(),
                });
            }
            Ok(v)
        };
        y.push(cell(y_col)?);
        if let (Some(zc), Some(zv)) = (z_col, z.as_mut()) {
            zv.push(cell(zc)?);
        }
        for (col, &c) in columns.iter_mut().zip(&x_cols) {
            col.push(cell(c)?);
        }
    }
    if y.len() < 2 {
        return Err(ScreenError::InsufficientData(format!(
            "need at least 2 observations, got {}",
            y.len()
        )));
    }
    let names = x_cols.iter().map(|&c| header[c].clone()).collect();
    let d = Dataset::with_names(
        columns,
        y,
        z,
        names,
        opts.response_col.to_string(),
        opts.index_col.map(str::to_string),
    )?;
    Ok(if opts.center_response { d.centered() } else { d })
}

/// Writes `d` as CSV: response first, then the index (if any), then the
/// predictors. Values use the shortest representation that round-trips.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| ScreenError::io(path, e))?;
    write_csv_to(d, std::io::BufWriter::new(file))
}

pub fn write_csv_to<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![d.response_name().to_string()];
    if let Some(name) = d.index_name() {
        header.push(name.to_string());
    }
    header.extend(d.feature_names().iter().cloned());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..d.n() {
        row.clear();
        row.push(d.y()[i].to_string());
        if let Some(z) = d.z() {
            row.push(z[i].to_string());
        }
        row.extend(d.columns().iter().map(|c| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| ScreenError::io("<csv>", e))?;
    Ok(())
}

/// Per-column predictor rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RescaleMode {
    #[default]
    None,
    /// Affine map onto [0, 1]; constant columns become 0.5.
    Minmax,
    /// `(rank - 0.5) / n`, ties receive their average rank.
    Rank,
}

/// Rescales every predictor column; `y` and `z` are untouched.
pub fn rescale_features(d: &Dataset, mode: RescaleMode) -> Dataset {
    if mode == RescaleMode::None {
        return d.clone();
    }
    let columns = d.columns().iter().map(|c| rescale_column(c, mode)).collect();
    d.with_columns(columns)
        .expect("rescaling preserves shape and finiteness")
}

/// One column under `mode`.
pub fn rescale_column(col: &[f64], mode: RescaleMode) -> Vec<f64> {
    match mode {
        RescaleMode::None => col.to_vec(),
        RescaleMode::Minmax => minmax(col),
        RescaleMode::Rank => rank_scale(col),
    }
}

fn minmax(col: &[f64]) -> Vec<f64> {
    let (lo, hi) = col
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi <= lo {
        return vec![0.5; col.len()];
    }
    let span = hi - lo;
    col.iter()
        .map(|&v| {
            if v == hi {
                1.0
            } else {
                (v - lo) / span
            }
        })
        .collect()
}

fn rank_scale(col: &[f64]) -> Vec<f64> {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && col[order[end]] == col[order[start]] {
            end += 1;
        }
        // average of 1-based ranks start+1..=end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = (rank - 0.5) / n as f64;
        }
        start = end;
    }
    out
}
