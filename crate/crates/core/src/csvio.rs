//! Numeric matrix CSV files.
//!
//! Writers emit a `dim0,dim1,…` header and every value in `{:.16e}` form,
//! which is 17 significant digits and therefore parses back to the same bits.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Header handling for [`read_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Header {
    Present,
    Absent,
    /// Treat the first row as a header iff any of its cells fails to parse.
    #[default]
    Detect,
}

pub fn write_matrix<W: Write>(out: W, m: ArrayView2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("dim{j}")).collect();
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(m.ncols());
    for r in m.rows() {
        row.clear();
        row.extend(r.iter().map(|x| format!("{x:.16e}")));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn matrix_to_string(m: ArrayView2<f64>) -> String {
    let mut buf = Vec::new();
    write_matrix(&mut buf, m).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

/// Reads a rectangular numeric CSV. Returns an error for ragged rows,
/// non-numeric cells, or a file without data rows.
pub fn read_matrix<R: Read>(input: R, header: Header) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut values = Vec::new();
    let mut ncols = None;
    let mut nrows = 0usize;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let first = ncols.is_none() && nrows == 0;
        let row = match (parsed, header, first) {
            (_, Header::Present, true) => {
                ncols = Some(rec.len());
                continue;
            }
            (Err(_), Header::Detect, true) => {
                ncols = Some(rec.len());
                continue;
            }
            (Ok(v), _, _) => v,
            (Err(e), _, _) => return Err(Error::Csv(format!("line {}: non-numeric cell ({e})", line + 1))),
        };
        match ncols {
            Some(c) if c != row.len() => {
                return Err(Error::Csv(format!("line {}: expected {c} fields, found {}", line + 1, row.len())))
            }
            _ => ncols = Some(row.len()),
        }
        values.extend(row);
        nrows += 1;
    }
    if nrows == 0 {
        return Err(Error::Csv("no data rows".into()));
    }
    Array2::from_shape_vec((nrows, ncols.unwrap_or(0)), values).map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_matrix_file(path: &Path, header: Header) -> Result<Array2<f64>> {
    read_matrix(std::fs::File::open(path)?, header)
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(e)
    })
}

pub fn write_matrix_file(path: &Path, m: ArrayView2<f64>) -> Result<()> {
    write_atomic(path, matrix_to_string(m).as_bytes())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}
