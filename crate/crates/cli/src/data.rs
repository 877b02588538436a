//! Numeric CSV input.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hdloc::{Matrix, SampleMatrix};

/// Reads an `n × p` numeric table. Rows and columns in error messages are
/// 1-based positions in the file, header line included.
pub fn read_matrix(path: &Path, header: bool) -> Result<SampleMatrix> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_matrix_from(file, header).with_context(|| format!("reading {}", path.display()))
}

pub fn read_matrix_from<R: std::io::Read>(input: R, header: bool) -> Result<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                bail!("row {line}: expected {w} columns, found {}", record.len())
            }
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| anyhow::anyhow!("row {line}, column {}: not a number: {cell:?}", c + 1))?;
            if !v.is_finite() {
                bail!("row {line}, column {}: non-finite value {cell:?}", c + 1);
            }
            values.push(v);
        }
        rows += 1;
    }
    let Some(p) = width else { bail!("no data rows") };
    Ok(SampleMatrix::new(Matrix::from_vec(rows, p, values)?)?)
}
