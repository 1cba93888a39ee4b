//! Reading draws files and writing outputs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use salso_kit::{DrawsMatrix, SimilarityMatrix};

use crate::CliError;

/// Reads an `H x n` CSV of integer labels, one draw per row.
///
/// Rows are canonicalized, so any integer labels work. Line numbers in
/// error messages count from 1 and include the header line.
pub fn read_draws(path: &Path, header: bool) -> Result<DrawsMatrix, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::new(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);

    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::new(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::new(format!(
                "{}: line {line} has {} labels, expected {expected}",
                path.display(),
                record.len()
            )));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<i64>().map_err(|_| {
                    CliError::new(format!(
                        "{}: line {line}, column {}: '{cell}' is not an integer label",
                        path.display(),
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::new(format!("{}: no draws found", path.display())));
    }
    DrawsMatrix::from_raw_rows(&rows).map_err(|e| CliError::new(format!("{}: {e}", path.display())))
}

/// Destination for an output: a file when a path is given, stdout otherwise.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::new(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Full `n x n` matrix of co-clustering proportions, six decimals.
pub fn write_psm(out: &mut dyn Write, psm: &SimilarityMatrix) -> io::Result<()> {
    for i in 0..psm.n_items() {
        let line: Vec<String> = psm.row(i).iter().map(|p| format!("{p:.6}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
