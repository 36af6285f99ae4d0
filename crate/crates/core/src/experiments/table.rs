use serde::Serialize;
use std::io::Write;

use crate::error::{QstError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // shortest round-trip representation, stable across runs
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Named, column-oriented table. All columns always have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    name: String,
    headers: Vec<String>,
    columns: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            headers: headers.iter().map(|s| s.to_string()).collect(),
            columns: vec![Vec::new(); headers.len()],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(QstError::LengthMismatch {
                what: "table row",
                expected: self.headers.len(),
                got: row.len(),
            });
        }
        for (col, cell) in self.columns.iter_mut().zip(row) {
            col.push(cell);
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[Cell]> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(&self.columns[i])
    }

    /// Numeric values of a column; missing cells are skipped.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        self.column(name)
            .map(|c| c.iter().filter_map(Cell::as_f64).collect())
            .unwrap_or_default()
    }

    /// Writes `# `-prefixed preamble lines followed by the CSV body.
    pub fn write_csv<W: Write>(&self, mut out: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for r in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c[r].render()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, preamble: &[String]) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, preamble)?;
        String::from_utf8(buf).map_err(|e| QstError::Io(e.to_string()))
    }
}

/// Mean and sample standard deviation; `None` for an empty slice.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}
