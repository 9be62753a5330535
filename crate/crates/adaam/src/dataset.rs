//! Dataset ingestion and export: numeric CSV and the `AAM1` binary layout.
//!
//! Binary layout, all little-endian:
//!
//! | bytes        | content                                  |
//! |--------------|------------------------------------------|
//! | 4            | magic `AAM1`                             |
//! | 8 × 3        | `n`, `d`, `has_labels` (0 or 1) as u64   |
//! | 8 × n·d      | features as f64, row-major               |
//! | 4 × n        | labels as u32, only when `has_labels = 1`|

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use adaam_core::DenseMatrix;

use crate::error::{AppError, Result};

pub const MAGIC: &[u8; 4] = b"AAM1";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DenseMatrix,
    /// Dense class ids `0..c′`, in order of first appearance.
    pub labels: Option<Vec<usize>>,
    pub name: String,
}

impl LabeledDataset {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn class_count(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().map(|&v| v + 1).max().unwrap_or(0))
    }

    /// Scales every column to unit standard deviation; constant columns are left alone.
    pub fn standardize(&mut self) {
        let (n, d) = self.x.shape();
        if n == 0 {
            return;
        }
        for j in 0..d {
            let col = self.x.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            if sd > 0.0 {
                for i in 0..n {
                    self.x[(i, j)] /= sd;
                }
            }
        }
    }
}

/// Remaps arbitrary label values to `0..c′` preserving first appearance.
pub fn remap_labels<T: std::hash::Hash + Eq + Clone>(raw: &[T]) -> Vec<usize> {
    let mut ids: HashMap<T, usize> = HashMap::new();
    raw.iter()
        .map(|v| {
            let next = ids.len();
            *ids.entry(v.clone()).or_insert(next)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads a rectangular numeric CSV. A first row containing any non-numeric
/// feature cell is treated as a header.
pub fn load_csv(path: &Path, label: Option<&LabelColumn>) -> Result<LabeledDataset> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_csv(&text, label, dataset_name(path))
}

pub fn parse_csv(text: &str, label: Option<&LabelColumn>, name: String) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(AppError::EmptyFile);
    }
    let width = rows[0].len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(AppError::RaggedRows { row: r + 1, expected: width, found: row.len() });
        }
    }

    let numeric = |s: &str| s.parse::<f64>().is_ok();
    let label_idx = match label {
        None => None,
        Some(LabelColumn::Index(i)) => {
            if *i >= width {
                return Err(AppError::MissingLabelColumn(i.to_string()));
            }
            Some(*i)
        }
        Some(LabelColumn::Name(name)) => Some(
            rows[0]
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| AppError::MissingLabelColumn(name.clone()))?,
        ),
    };
    let has_header = matches!(label, Some(LabelColumn::Name(_)))
        || rows[0].iter().enumerate().any(|(j, c)| Some(j) != label_idx && !numeric(c));
    let body = if has_header { &rows[1..] } else { &rows[..] };
    if body.is_empty() {
        return Err(AppError::EmptyFile);
    }

    let n = body.len();
    let d = width - usize::from(label_idx.is_some());
    let mut data = Vec::with_capacity(n * d);
    let mut raw_labels = Vec::new();
    let first_data_row = usize::from(has_header) + 1;
    for (r, row) in body.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if Some(j) == label_idx {
                raw_labels.push(cell.clone());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| AppError::NonNumericCell {
                row: r + first_data_row,
                col: j + 1,
                value: cell.clone(),
            })?;
            if !v.is_finite() {
                return Err(AppError::NonNumericCell {
                    row: r + first_data_row,
                    col: j + 1,
                    value: cell.clone(),
                });
            }
            data.push(v);
        }
    }
    let x = DenseMatrix::from_vec(n, d, data)?;
    let labels = label_idx.map(|_| remap_labels(&raw_labels));
    Ok(LabeledDataset { x, labels, name })
}

pub fn encode_binary(ds: &LabeledDataset) -> Result<Vec<u8>> {
    let (n, d) = ds.x.shape();
    if n == 0 {
        return Err(AppError::EmptyFile);
    }
    let mut out = Vec::with_capacity(28 + 8 * n * d + 4 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&u64::from(ds.labels.is_some()).to_le_bytes());
    for v in ds.x.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(labels) = &ds.labels {
        for &l in labels {
            let l = u32::try_from(l)
                .map_err(|_| AppError::InvalidParams(format!("label {l} exceeds u32")))?;
            out.extend_from_slice(&l.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8], name: String) -> Result<LabeledDataset> {
    if bytes.len() < 4 {
        return Err(if bytes.is_empty() { AppError::EmptyFile } else { AppError::TruncatedFile("magic") });
    }
    if &bytes[..4] != MAGIC {
        return Err(AppError::BadMagic);
    }
    let mut pos = 4;
    let mut word = |what: &'static str| -> Result<u64> {
        let chunk = bytes.get(pos..pos + 8).ok_or(AppError::TruncatedFile(what))?;
        pos += 8;
        Ok(u64::from_le_bytes(chunk.try_into().expect("8-byte slice")))
    };
    let n = word("header")? as usize;
    let d = word("header")? as usize;
    let flag = word("header")?;
    if n == 0 {
        return Err(AppError::EmptyFile);
    }
    if flag > 1 {
        return Err(AppError::InvalidParams(format!("has_labels flag must be 0 or 1, got {flag}")));
    }
    let feature_bytes = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(8))
        .ok_or(AppError::TruncatedFile("features"))?;
    let features = bytes
        .get(pos..pos + feature_bytes)
        .ok_or(AppError::TruncatedFile("features"))?;
    pos += feature_bytes;
    let data: Vec<f64> = features
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let x = DenseMatrix::from_vec(n, d, data)?;
    let labels = if flag == 1 {
        let raw = bytes.get(pos..pos + 4 * n).ok_or(AppError::TruncatedFile("labels"))?;
        Some(
            raw.chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().expect("4-byte chunk")) as usize)
                .collect(),
        )
    } else {
        None
    };
    Ok(LabeledDataset { x, labels, name })
}

pub fn save_binary(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let bytes = encode_binary(ds)?;
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn load_binary(path: &Path) -> Result<LabeledDataset> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode_binary(&bytes, dataset_name(path))
}

/// Binary when the file starts with the magic bytes, CSV otherwise.
pub fn load_any(path: &Path, label: Option<&LabelColumn>) -> Result<LabeledDataset> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        return decode_binary(&bytes, dataset_name(path));
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| AppError::InvalidParams(format!("{} is neither AAM1 nor UTF-8 CSV", path.display())))?;
    parse_csv(&text, label, dataset_name(path))
}

/// Writes features (and labels as a trailing `label` column) with a header row.
pub fn write_csv(x: &DenseMatrix, labels: Option<&[usize]>, prefix: &str, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..x.cols()).map(|j| format!("{prefix}{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..x.rows() {
        let mut rec: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| AppError::io("<csv output>", e))?;
    Ok(())
}

pub fn save_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    write_csv(&ds.x, ds.labels.as_deref(), "f", &mut file)
}
