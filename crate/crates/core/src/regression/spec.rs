use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contrast used to turn a factor into design columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coding {
    /// 0/1 indicators for each non-reference level.
    #[default]
    Treatment,
    /// +1 for the level, −1 for the reference, 0 otherwise.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorSpec {
    Reference(String),
    Detailed {
        reference: String,
        #[serde(default)]
        coding: Coding,
    },
}

impl FactorSpec {
    pub fn reference(&self) -> &str {
        match self {
            FactorSpec::Reference(r) | FactorSpec::Detailed { reference: r, .. } => r,
        }
    }

    pub fn coding(&self) -> Coding {
        match self {
            FactorSpec::Reference(_) => Coding::Treatment,
            FactorSpec::Detailed { coding, .. } => *coding,
        }
    }
}

/// Mean model `logit(μ) = Xβ` with a constant log-precision.
///
/// Terms are column names or pairwise interactions written `a:b`. An
/// intercept is always included first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub response: String,
    #[serde(default)]
    pub terms: Vec<String>,
    #[serde(default)]
    pub factors: BTreeMap<String, FactorSpec>,
}

impl RegressionSpec {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            terms: Vec::new(),
            factors: BTreeMap::new(),
        }
    }

    pub fn term(mut self, term: impl Into<String>) -> Self {
        self.terms.push(term.into());
        self
    }

    pub fn factor(mut self, column: impl Into<String>, spec: FactorSpec) -> Self {
        self.factors.insert(column.into(), spec);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.response.is_empty() {
            return Err(Error::validation("regression spec has an empty response name"));
        }
        for t in &self.terms {
            let parts = t.split(':').collect::<Vec<_>>();
            if parts.len() > 2 || parts.iter().any(|p| p.trim().is_empty()) {
                return Err(Error::validation(format!(
                    "term '{t}' must be a column name or a pairwise interaction 'a:b'"
                )));
            }
            if parts.iter().any(|p| p.trim() == self.response) {
                return Err(Error::validation(format!("term '{t}' uses the response column")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_factor_forms() {
        let spec = RegressionSpec::from_json(
            r#"{"response":"y","terms":["g","x","g:x"],
                "factors":{"g":"no","h":{"reference":"a","coding":"sum"}}}"#,
        )
        .unwrap();
        assert_eq!(spec.factors["g"].reference(), "no");
        assert_eq!(spec.factors["g"].coding(), Coding::Treatment);
        assert_eq!(spec.factors["h"].coding(), Coding::Sum);
    }

    #[test]
    fn intercept_only_spec() {
        let spec = RegressionSpec::from_json(r#"{"response":"y"}"#).unwrap();
        assert!(spec.terms.is_empty());
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(RegressionSpec::from_json(r#"{"response":"y","terms":["a:b:c"]}"#).is_err());
        assert!(RegressionSpec::from_json(r#"{"response":"y","terms":["y"]}"#).is_err());
        assert!(RegressionSpec::from_json(r#"{"response":"y","terms":["a:"]}"#).is_err());
    }
}
