use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::Table;
use crate::error::{Error, Result};

/// Reads a header-first numeric CSV. Data rows are numbered from 1 in errors.
pub fn load_csv(path: impl AsRef<Path>, response: &str, class_col: Option<&str>) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, response, class_col)
}

pub fn read_csv<R: Read>(reader: R, response: &str, class_col: Option<&str>) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let lookup = |name: &str| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn {
                name: name.to_string(),
                available: names.join(", "),
            })
    };
    let response_col = lookup(response)?;
    let class_idx = class_col.map(lookup).transpose()?;

    let mut data = Vec::new();
    let mut n_rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                row: i + 1,
                column: names.get(j).cloned().unwrap_or_else(|| format!("#{}", j + 1)),
                value: cell.to_string(),
            })?;
            data.push(v);
        }
        n_rows += 1;
    }
    Table::from_row_major(names, n_rows, data, response_col, class_idx)
}

pub fn write_csv(t: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(t, file)
}

/// Writes with LF line endings and shortest round-trip float formatting.
pub fn write_csv_to<W: Write>(t: &Table, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(t.column_names())?;
    let mut buf = Vec::with_capacity(t.n_cols());
    for i in 0..t.n_rows() {
        buf.clear();
        buf.extend(t.row(i).iter().map(|v| format!("{v}")));
        w.write_record(&buf)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
