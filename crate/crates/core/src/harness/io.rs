use std::fs;
use std::path::{Path, PathBuf};

use crate::spectral::{Grid, GridFunction};

use super::HarnessError;

/// Reals are printed with 17 significant digits so they parse back exactly.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    pub fn value(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Real(x) => x,
        }
    }

    fn render(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(x),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

/// One CSV output of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&str]) -> Self {
        Table {
            file: file.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header of {}", self.file);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].value()).collect())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        let path = dir.join(&self.file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(&path, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render())).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| io_error(&path, e))?;
        Ok(path)
    }
}

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Csv {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

pub fn field_table(file: impl Into<String>, f: &GridFunction) -> Table {
    let mut t = Table::new(file, &["x", "value"]);
    for (x, v) in f.grid().nodes().zip(f.samples()) {
        t.push(vec![x.into(), (*v).into()]);
    }
    t
}

/// Writes `f` as CSV with columns `x, value`, one row per grid node.
pub fn emit_field_csv(f: &GridFunction, path: &Path) -> Result<(), HarnessError> {
    let file = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| HarnessError::Csv {
            path: path.to_path_buf(),
            reason: "not a file path".into(),
        })?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    field_table(file, f).write(dir)?;
    Ok(())
}

/// Reads a field written by [`emit_field_csv`]. The file must have exactly
/// the columns `x, value` and one row per node of `grid`, in node order.
pub fn read_field_csv(path: &Path, grid: &Grid) -> Result<GridFunction, HarnessError> {
    let fail = |reason: String| HarnessError::Csv {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.len() != 2 || &header[0] != "x" || &header[1] != "value" {
        return Err(fail(format!("expected columns (x, value), found {:?}", header.iter().collect::<Vec<_>>())));
    }
    let tol = 1e-9 * grid.length();
    let mut samples = Vec::with_capacity(grid.len());
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let cell = |i: usize, name: &str| -> Result<f64, HarnessError> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| fail(format!("row {}: {name} '{}' is not a number", row + 1, &rec[i])))
        };
        let x = cell(0, "x")?;
        let value = cell(1, "value")?;
        if row >= grid.len() {
            return Err(fail(format!("more than N = {} rows", grid.len())));
        }
        let node = grid.node(row);
        if (x - node).abs() > tol {
            return Err(fail(format!("row {}: x = {x} is not grid node {node}", row + 1)));
        }
        samples.push(value);
    }
    if samples.len() != grid.len() {
        return Err(fail(format!("{} rows, grid has N = {}", samples.len(), grid.len())));
    }
    GridFunction::from_samples(grid, samples).map_err(|e| fail(e.to_string()))
}
