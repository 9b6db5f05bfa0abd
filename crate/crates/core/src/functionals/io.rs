//! CSV import for samples, Stage-1 estimates and covariance matrices.

use std::io::Read;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

use super::WeightedSample;

fn records<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => out.push(row),
            // A non-numeric first line is a header.
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse(format!("line {}: {e}", line + 1)));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("no numeric rows".into()));
    }
    let width = out[0].len();
    if let Some(i) = out.iter().position(|r| r.len() != width) {
        return Err(Error::Parse(format!(
            "row {} has {} fields, expected {width}",
            i + 1,
            out[i].len()
        )));
    }
    Ok(out)
}

/// One observation per row. With `weight_column` set, that column holds
/// nonnegative weights (normalized to sum to 1) and is removed from the
/// observations; otherwise weights are uniform.
pub fn read_weighted_sample<R: Read>(
    reader: R,
    weight_column: Option<usize>,
) -> Result<WeightedSample> {
    let rows = records(reader)?;
    let width = rows[0].len();
    match weight_column {
        None => WeightedSample::uniform(rows.concat(), width),
        Some(c) => {
            if c >= width || width < 2 {
                return Err(Error::domain(format!(
                    "weight column {c} out of range for {width} columns"
                )));
            }
            let mut pts = Vec::with_capacity(rows.len() * (width - 1));
            let mut w = Vec::with_capacity(rows.len());
            for r in &rows {
                for (j, v) in r.iter().enumerate() {
                    if j == c {
                        w.push(*v);
                    } else {
                        pts.push(*v);
                    }
                }
            }
            if w.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::domain("weights must be nonnegative"));
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err(Error::domain("weights must have a positive sum"));
            }
            w.iter_mut().for_each(|x| *x /= total);
            WeightedSample::new(pts, width - 1, w)
        }
    }
}

/// A single column of reals (one per row).
pub fn read_column<R: Read>(reader: R) -> Result<Vec<f64>> {
    let rows = records(reader)?;
    if rows[0].len() != 1 {
        return Err(Error::Parse(format!(
            "expected one value per row, found {}",
            rows[0].len()
        )));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

/// A square symmetric matrix, one row per line.
pub fn read_matrix<R: Read>(reader: R) -> Result<SymMatrix> {
    SymMatrix::from_rows(&records(reader)?)
}
