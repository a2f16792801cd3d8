use std::path::Path;

use super::HarnessError;

/// A CSV table; floats are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn float(&self, row: usize, name: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column(name)?)?.parse().ok()
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(&table.header).map_err(|e| csv_error(path, e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Table, HarnessError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rd.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    let mut rows = vec![];
    for rec in rd.records() {
        rows.push(rec.map_err(|e| csv_error(path, e))?.iter().map(String::from).collect());
    }
    Ok(Table { header, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        k => HarnessError::Schema(format!("{}: {k:?}", path.display())),
    }
}
