//! Reading data files and writing statistic matrices.

use std::path::Path;

use rankindep::{DataMatrix, PairStatMatrix};

use crate::error::{Result, SimError};

/// Reads a CSV file with observations in rows and variables in columns.
/// A first line that does not parse as numbers is taken as a header.
pub fn read_csv(path: &Path) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(SimError::Input(format!("line {}: {e}", line + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(SimError::Input("no data rows".into()));
    }
    Ok(DataMatrix::from_rows(&rows)?)
}

/// Writes a `p x p` matrix as headerless CSV.
pub fn write_matrix(path: &Path, matrix: &PairStatMatrix) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for j in 0..matrix.p {
        writer.write_record(matrix.row(j).iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
