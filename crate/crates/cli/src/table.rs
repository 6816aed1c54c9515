//! CSV observation tables.
//!
//! Comma-separated, mandatory header, `.` decimal point. A first column named
//! `timestamp` is carried through as text and kept out of the numeric data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use streampca::Matrix;

pub const TIMESTAMP: &str = "timestamp";

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTable {
    pub column_names: Vec<String>,
    pub timestamps: Option<Vec<String>>,
    pub data: Matrix,
}

impl ObservationTable {
    pub fn new(column_names: Vec<String>, timestamps: Option<Vec<String>>, data: Matrix) -> Self {
        debug_assert_eq!(column_names.len(), data.cols());
        debug_assert!(timestamps.as_ref().is_none_or(|t| t.len() == data.rows()));
        Self {
            column_names,
            timestamps,
            data,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        Self::from_reader(file).with_context(|| format!("reading {}", path.display()))
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = csv
            .headers()
            .context("missing header row")?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            bail!("missing header row");
        }
        let has_time = header[0].eq_ignore_ascii_case(TIMESTAMP);
        let offset = usize::from(has_time);
        let column_names = header[offset..].to_vec();
        if column_names.is_empty() {
            bail!("no numeric columns");
        }

        let p = column_names.len();
        let mut data = Vec::new();
        let mut timestamps = has_time.then(Vec::new);
        let mut rows = 0;
        for record in csv.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |pos| pos.line());
                anyhow!("line {line}: {e}")
            })?;
            let line = record.position().map_or(0, |pos| pos.line());
            if record.len() != header.len() {
                bail!(
                    "line {line}: expected {} fields, found {}",
                    header.len(),
                    record.len()
                );
            }
            if let Some(ts) = timestamps.as_mut() {
                ts.push(record[0].to_owned());
            }
            for (field, name) in record.iter().skip(offset).zip(&column_names) {
                let value: f64 = field
                    .parse()
                    .map_err(|_| anyhow!("line {line}: column {name:?}: cannot parse {field:?}"))?;
                if !value.is_finite() {
                    bail!("line {line}: column {name:?}: non-finite value {field:?}");
                }
                data.push(value);
            }
            rows += 1;
        }
        let data = Matrix::new(rows, p, data)?;
        Ok(Self::new(column_names, timestamps, data))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = Vec::with_capacity(self.column_names.len() + 1);
        if self.timestamps.is_some() {
            header.push(TIMESTAMP);
        }
        header.extend(self.column_names.iter().map(String::as_str));
        csv.write_record(&header)?;
        let mut fields = Vec::with_capacity(header.len());
        for i in 0..self.data.rows() {
            fields.clear();
            if let Some(ts) = &self.timestamps {
                fields.push(ts[i].clone());
            }
            fields.extend(self.data.row(i).iter().map(|&v| format_number(v)));
            csv.write_record(&fields)?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a square matrix with a label header row and a label first column.
pub fn write_labelled(
    path: &Path,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    m: &Matrix,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut csv = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec![corner.to_owned()];
    header.extend(col_labels.iter().cloned());
    csv.write_record(&header)?;
    for (i, label) in row_labels.iter().enumerate() {
        let mut fields = vec![label.clone()];
        fields.extend(m.row(i).iter().map(|&v| format_number(v)));
        csv.write_record(&fields)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn component_labels(prefix: &str, p: usize) -> Vec<String> {
    (1..=p).map(|k| format!("{prefix}{k}")).collect()
}
