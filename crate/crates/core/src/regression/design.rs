use nalgebra::DMatrix;

use super::spec::{Coding, FactorSpec, RegressionSpec};
use crate::data::{Column, TabularDataset};
use crate::error::{Error, Result};

/// Model matrix with named columns; the intercept is column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
}

impl Design {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    /// Builds a design from already-computed columns, intercept prepended.
    pub fn from_columns(n: usize, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if let Some((name, _)) = columns.iter().find(|(_, v)| v.len() != n) {
            return Err(Error::validation(format!("design column '{name}' has the wrong length")));
        }
        let design = Self::from_columns_unchecked(n, columns);
        design.check_rank()?;
        Ok(design)
    }

    /// As [`from_columns`](Self::from_columns) without the length and rank
    /// checks.
    pub fn from_columns_unchecked(n: usize, columns: Vec<(String, Vec<f64>)>) -> Self {
        let mut names = vec!["(Intercept)".to_owned()];
        let mut x = DMatrix::from_element(n, columns.len() + 1, 1.0);
        for (j, (name, values)) in columns.into_iter().enumerate() {
            x.set_column(j + 1, &nalgebra::DVector::from_vec(values));
            names.push(name);
        }
        Self { x, names }
    }

    /// Gram–Schmidt pass that reports every column lying in the span of the
    /// columns before it.
    pub fn check_rank(&self) -> Result<()> {
        let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
        let mut aliased = Vec::new();
        for (j, name) in self.names.iter().enumerate() {
            let col = self.x.column(j).into_owned();
            let scale = col.norm();
            let mut r = col;
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let norm = r.norm();
            if scale == 0.0 || norm <= 1e-10 * scale {
                aliased.push(name.clone());
            } else {
                basis.push(r / norm);
            }
        }
        if aliased.is_empty() {
            Ok(())
        } else {
            Err(Error::RankDeficient { columns: aliased })
        }
    }
}

fn encode(name: &str, column: &Column, spec: Option<&FactorSpec>) -> Result<Vec<(String, Vec<f64>)>> {
    match column {
        Column::Numeric(v) => {
            if spec.is_some() {
                return Err(Error::validation(format!("column '{name}' is numeric but has a factor encoding")));
            }
            Ok(vec![(name.to_owned(), v.clone())])
        }
        Column::Factor { levels, codes } => {
            let (reference, coding) = match spec {
                Some(s) => {
                    let r = levels.iter().position(|l| l == s.reference()).ok_or_else(|| {
                        Error::validation(format!(
                            "reference level '{}' not found in factor '{name}' (levels: {})",
                            s.reference(),
                            levels.join(", ")
                        ))
                    })?;
                    (r, s.coding())
                }
                None => (0, Coding::Treatment),
            };
            let off = match coding {
                Coding::Treatment => 0.0,
                Coding::Sum => -1.0,
            };
            Ok(levels
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != reference)
                .map(|(k, level)| {
                    let values = codes
                        .iter()
                        .map(|&c| if c == k { 1.0 } else if c == reference { off } else { 0.0 })
                        .collect();
                    (format!("{name}{level}"), values)
                })
                .collect())
        }
    }
}

/// Expands the spec's terms against the data.
pub fn build_design(spec: &RegressionSpec, data: &TabularDataset) -> Result<Design> {
    spec.validate()?;
    for col in spec.factors.keys() {
        data.column(col)?;
    }
    let lookup = |name: &str| -> Result<Vec<(String, Vec<f64>)>> {
        let name = name.trim();
        encode(name, data.column(name)?, spec.factors.get(name))
    };
    let mut columns = Vec::new();
    for term in &spec.terms {
        match term.split_once(':') {
            None => columns.extend(lookup(term)?),
            Some((a, b)) => {
                let (left, right) = (lookup(a)?, lookup(b)?);
                for (na, va) in &left {
                    for (nb, vb) in &right {
                        let prod = va.iter().zip(vb).map(|(p, q)| p * q).collect();
                        columns.push((format!("{na}:{nb}"), prod));
                    }
                }
            }
        }
    }
    Design::from_columns(data.n_rows(), columns)
}
