//! CSV output with 17 significant digits, so every value parses back to the
//! same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::CliError;

/// One CSV row; `None` is an empty cell.
pub type Row = Vec<Option<f64>>;

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `header` and `rows`; `None` becomes an empty cell.
pub fn write_table(path: &Path, header: &[String], rows: &[Row]) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(fmt).unwrap_or_default()).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Streams rows produced by `rows` without materializing them.
pub fn write_rows<I>(path: &Path, header: &str, rows: I) -> Result<usize, CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{header}").map_err(io)?;
    let mut n = 0;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
        n += 1;
    }
    w.flush().map_err(io)?;
    Ok(n)
}

/// Parses text written by [`write_table`].
#[cfg(test)]
pub fn parse_table(text: &str) -> Option<(Vec<String>, Vec<Row>)> {
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse().map(Some)
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .ok()
        })
        .collect::<Option<Vec<_>>>()?;
    Some((header, rows))
}
