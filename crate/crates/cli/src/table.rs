//! Fixed-column CSV tables.
//!
//! Numbers are rounded to 12 significant digits when a cell is built, so the
//! in-memory table is exactly what a reader gets back from the file.

use std::fmt;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Width {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Significant digits kept in numeric cells.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Empty,
}

impl Cell {
    pub fn num(x: f64) -> Self {
        Cell::Num(round_sig(x))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt_num(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    /// Reads a field back. Integers stay integers; anything else that
    /// parses as a float is a number.
    fn parse(field: &str) -> Self {
        if field.is_empty() {
            Cell::Empty
        } else if let Ok(i) = field.parse::<u64>() {
            Cell::Int(i)
        } else if let Ok(x) = field.parse::<f64>() {
            Cell::Num(x)
        } else {
            Cell::Text(field.to_string())
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int(i) => write!(f, "{i}"),
            // Shortest repr of an already rounded value. A whole number
            // keeps its `.0` so it reads back as Num rather than Int.
            Cell::Num(x) if x.fract() == 0.0 => write!(f, "{x:.1}"),
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn write_to(&self, w: impl Write) -> Result<(), TableError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.to_string()))?;
        }
        out.flush().map_err(|e| TableError::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn from_reader(r: impl std::io::Read) -> Result<Self, TableError> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(r);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != headers.len() {
                return Err(TableError::Width {
                    row: i + 1,
                    expected: headers.len(),
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(Self { headers, rows })
    }

    /// Writes the whole file next to `path` and renames it into place.
    pub fn write_atomic(&self, path: &Path) -> Result<(), TableError> {
        let io = |source| TableError::Io {
            path: path.display().to_string(),
            source,
        };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        self.write_to(&mut tmp)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }
}
