//! Scenario files: plain sectioned text holding one identification problem.
//!
//! ```text
//! [label]
//! front-door
//! [graph]
//! X -> Z
//! Z -> Y
//! X <-> Y
//! [data]
//! P(Y|do(Z))
//! P(X,Z)
//! [query]
//! P(Y|do(X))
//! ```
//!
//! A `[missing]` section holds a missing-data map such as `R_X : X, R_Y : Y`.
//! Lines starting with `#` are comments.

use std::fmt;

use thiserror::Error;

use crate::term::{QuerySpec, TermError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing [{0}] section")]
    MissingSection(&'static str),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub label: Option<String>,
    pub graph: String,
    pub missing: Option<String>,
    pub data: Vec<String>,
    pub query: String,
}

impl Scenario {
    pub fn new(graph: &str, data: &[&str], query: &str) -> Self {
        Scenario {
            label: None,
            graph: graph.trim().to_string(),
            missing: None,
            data: data.iter().map(|d| d.trim().to_string()).collect(),
            query: query.trim().to_string(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn with_missing(mut self, missing: &str) -> Self {
        self.missing = Some(missing.trim().to_string());
        self
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut sections: Vec<(&str, Vec<&str>)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !matches!(name, "label" | "graph" | "missing" | "data" | "query") {
                    return Err(ScenarioError::Syntax {
                        line: n + 1,
                        message: format!("unknown section [{name}]"),
                    });
                }
                if sections.iter().any(|(s, _)| *s == name) {
                    return Err(ScenarioError::Syntax {
                        line: n + 1,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                sections.push((name, Vec::new()));
            } else {
                match sections.last_mut() {
                    Some((_, lines)) => lines.push(line),
                    None => {
                        return Err(ScenarioError::Syntax {
                            line: n + 1,
                            message: "text before the first section".into(),
                        })
                    }
                }
            }
        }
        let get = |name: &str| {
            sections
                .iter()
                .find(|(s, _)| *s == name)
                .map(|(_, l)| l.clone())
        };
        let joined = |name: &str| get(name).map(|l| l.join("\n")).filter(|s| !s.is_empty());
        let query = get("query").ok_or(ScenarioError::MissingSection("query"))?;
        if query.len() != 1 {
            return Err(ScenarioError::Syntax {
                line: 0,
                message: "[query] must hold exactly one term".into(),
            });
        }
        Ok(Scenario {
            label: joined("label"),
            graph: get("graph")
                .ok_or(ScenarioError::MissingSection("graph"))?
                .join("\n"),
            missing: joined("missing"),
            data: get("data")
                .ok_or(ScenarioError::MissingSection("data"))?
                .iter()
                .map(|s| s.to_string())
                .collect(),
            query: query[0].to_string(),
        })
    }

    pub fn to_spec(&self) -> Result<QuerySpec, ScenarioError> {
        Ok(QuerySpec::parse(
            &self.graph,
            self.missing.as_deref(),
            &self.data.join("\n"),
            &self.query,
        )?)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            writeln!(f, "[label]\n{label}")?;
        }
        writeln!(f, "[graph]\n{}", self.graph)?;
        if let Some(m) = &self.missing {
            writeln!(f, "[missing]\n{m}")?;
        }
        writeln!(f, "[data]")?;
        for d in &self.data {
            writeln!(f, "{d}")?;
        }
        writeln!(f, "[query]\n{}", self.query)
    }
}
