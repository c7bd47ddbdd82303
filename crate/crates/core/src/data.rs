//! In-memory tables read from headered CSV.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    /// Levels are sorted; `codes[i]` indexes into `levels`.
    Factor { levels: Vec<String>, codes: Vec<usize> },
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Factor { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn factor_from<S: AsRef<str>>(values: &[S]) -> Self {
        let mut levels: Vec<String> = values.iter().map(|v| v.as_ref().to_owned()).collect();
        levels.sort();
        levels.dedup();
        let codes = values
            .iter()
            .map(|v| levels.binary_search_by(|l| l.as_str().cmp(v.as_ref())).unwrap())
            .collect();
        Column::Factor { levels, codes }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Column::Numeric(v) => format_number(v[row]),
            Column::Factor { levels, codes } => levels[codes[row]].clone(),
        }
    }
}

/// Shortest round-tripping representation.
pub(crate) fn format_number(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabularDataset {
    names: Vec<String>,
    columns: Vec<Column>,
    rows: usize,
}

impl TabularDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn push(&mut self, name: impl Into<String>, column: Column) -> Result<()> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(Error::validation(format!("duplicate column '{name}'")));
        }
        if !self.columns.is_empty() && column.len() != self.rows {
            return Err(Error::validation(format!(
                "column '{name}' has {} rows, expected {}",
                column.len(),
                self.rows
            )));
        }
        if let Column::Numeric(v) = &column {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::validation(format!("column '{name}' row {} is not finite", i + 1)));
            }
        }
        self.rows = column.len();
        self.names.push(name);
        self.columns.push(column);
        Ok(())
    }

    pub fn with_numeric(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.push(name, Column::Numeric(values))?;
        Ok(self)
    }

    pub fn with_factor<S: AsRef<str>>(mut self, name: &str, values: &[S]) -> Result<Self> {
        self.push(name, Column::factor_from(values))?;
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name)? {
            Column::Numeric(v) => Ok(v),
            Column::Factor { .. } => Err(Error::validation(format!("column '{name}' is a factor, expected numeric"))),
        }
    }

    /// Checks that `name` is numeric with every value in `[0, 1]`.
    pub fn response(&self, name: &str) -> Result<&[f64]> {
        let y = self.numeric(name)?;
        if let Some(i) = y.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::validation(format!(
                "response '{name}' must lie in [0, 1]; row {} has {}",
                i + 1,
                y[i]
            )));
        }
        Ok(y)
    }

    /// Reads a comma-separated table with a header row. Columns where every
    /// cell parses as a number become numeric; others become factors.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if headers.is_empty() || headers.iter().any(String::is_empty) {
            return Err(Error::validation("line 1: header row has an empty column name"));
        }
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != headers.len() {
                return Err(Error::validation(format!(
                    "line {line}: expected {} fields, found {}",
                    headers.len(),
                    record.len()
                )));
            }
            for (j, field) in record.iter().enumerate() {
                if field.is_empty() || field.eq_ignore_ascii_case("na") {
                    return Err(Error::validation(format!("line {line}: missing value in column '{}'", headers[j])));
                }
                cells[j].push(field.to_owned());
            }
        }
        let mut out = Self::new();
        for (name, raw) in headers.into_iter().zip(cells) {
            let parsed: Option<Vec<f64>> = raw.iter().map(|c| c.parse::<f64>().ok()).collect();
            let column = match parsed {
                Some(v) => Column::Numeric(v),
                None => Column::factor_from(&raw),
            };
            out.push(name, column)?;
        }
        Ok(out)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::validation(format!("cannot open {}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for row in 0..self.rows {
            w.write_record(self.columns.iter().map(|c| c.cell(row)))?;
        }
        w.flush()?;
        Ok(())
    }
}
