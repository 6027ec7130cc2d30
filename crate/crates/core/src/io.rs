//! CSV interchange: comma separated, one header row, `.` decimals, LF line
//! endings. Floats are written in shortest round-trip form, so parsing a
//! written value gives back the identical `f64`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::datagen::LabeledDataset;
use crate::error::{Error, Result};
use crate::gsaal::TrainTrace;
use crate::matrix::Matrix;

pub const LABEL_COLUMN: &str = "label";

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// A parsed numeric CSV. A trailing `label` column, when present, is split
/// off into `labels`.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub feature_names: Vec<String>,
    pub points: Matrix,
    pub labels: Option<Vec<u8>>,
}

impl CsvTable {
    pub fn into_dataset(self) -> Result<LabeledDataset> {
        let labels = self.labels.unwrap_or_else(|| vec![0; self.points.rows()]);
        LabeledDataset::with_names(self.points, labels, self.feature_names)
    }
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let has_labels = header.last().is_some_and(|h| h == LABEL_COLUMN);
    let n_features = header.len() - usize::from(has_labels);
    let feature_names = header[..n_features].to_vec();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // row numbers are 1-based and count the header
        let row = i + 2;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: record.len().min(header.len()) + 1,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().take(n_features).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                column: j + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: j + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            data.push(v);
        }
        if has_labels {
            let cell = record[n_features].trim();
            let label = match cell {
                "0" => 0,
                "1" => 1,
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: n_features + 1,
                        message: format!("label must be 0 or 1, found {cell:?}"),
                    })
                }
            };
            labels.push(label);
        }
    }
    let rows = data.len() / n_features.max(1);
    Ok(CsvTable {
        feature_names,
        points: Matrix::from_vec(rows, n_features, data)?,
        labels: has_labels.then_some(labels),
    })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file)
}

pub fn write_dataset_csv(path: impl AsRef<Path>, data: &LabeledDataset, with_labels: bool) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let mut header = data.feature_names.clone();
    if with_labels {
        header.push(LABEL_COLUMN.to_string());
    }
    w.write_record(&header)?;
    for (row, label) in data.points.row_iter().zip(&data.labels) {
        let mut fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        if with_labels {
            fields.push(label.to_string());
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_scores_csv(path: impl AsRef<Path>, scores: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(["score"])?;
    for &s in scores {
        w.write_record([fmt_f64(s)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let table = read_csv(path)?;
    Ok(table.points.column(0))
}

/// Columns: `epoch, phase, generator_loss, d0_loss, ..., frozen` where
/// `frozen` is a 0/1 string with one character per detector.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &TrainTrace) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let k = trace.epochs.first().map_or(0, |e| e.detector_losses.len());
    let mut header = vec!["epoch".to_string(), "phase".into(), "generator_loss".into()];
    header.extend((0..k).map(|j| format!("d{j}_loss")));
    header.push("frozen".into());
    w.write_record(&header)?;
    for e in &trace.epochs {
        let mut fields = vec![e.epoch.to_string(), e.phase.name().to_string(), fmt_f64(e.generator_loss)];
        fields.extend(e.detector_losses.iter().map(|&l| fmt_f64(l)));
        fields.push(e.detectors_frozen.iter().map(|&f| if f { '1' } else { '0' }).collect());
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a header plus rows of already-formatted fields.
pub fn write_rows(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Renders a small table for terminal output.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, f) in widths.iter_mut().zip(r) {
            *w = (*w).max(f.len());
        }
    }
    let mut out = Vec::new();
    let line = |fields: Vec<&str>, out: &mut Vec<u8>| {
        let cells: Vec<String> = fields
            .iter()
            .zip(&widths)
            .map(|(f, w)| format!("{f:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    String::from_utf8(out).expect("utf8 table")
}
