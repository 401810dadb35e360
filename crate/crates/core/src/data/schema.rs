//! Plain-text column schema for raw CSV ingestion.
//!
//! One column per line, in file order:
//!
//! ```text
//! # comments and blank lines are skipped
//! numeric duration
//! categorical protocol_type tcp,udp,icmp
//! label outcome normal.
//! ```
//!
//! `label` lists the values mapped to the positive (anomalous) class; all
//! other values are negative. Exactly one label column is required.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Numeric,
    /// One-hot encoded in vocabulary order.
    Categorical(Vec<String>),
    /// Values considered positive (anomalous).
    Label(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaColumn {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaSpec {
    pub columns: Vec<SchemaColumn>,
}

impl SchemaSpec {
    pub fn new(columns: Vec<SchemaColumn>) -> Result<Self> {
        let labels = columns
            .iter()
            .filter(|c| matches!(c.kind, ColumnKind::Label(_)))
            .count();
        if labels != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one label column, found {labels}"
            )));
        }
        for col in &columns {
            match &col.kind {
                ColumnKind::Categorical(vocab) => {
                    if vocab.is_empty() {
                        return Err(Error::Schema(format!(
                            "column {}: empty vocabulary",
                            col.name
                        )));
                    }
                    let unique: HashSet<&String> = vocab.iter().collect();
                    if unique.len() != vocab.len() {
                        return Err(Error::Schema(format!(
                            "column {}: duplicate vocabulary entries",
                            col.name
                        )));
                    }
                }
                ColumnKind::Label(positives) => {
                    if positives.is_empty() {
                        return Err(Error::Schema(format!(
                            "column {}: no positive values listed",
                            col.name
                        )));
                    }
                }
                ColumnKind::Numeric => {}
            }
        }
        Ok(SchemaSpec { columns })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind_word = parts.next().unwrap();
            let name = parts.next().ok_or_else(|| {
                Error::Schema(format!("line {}: missing column name", lineno + 1))
            })?;
            let rest = parts.next();
            if parts.next().is_some() {
                return Err(Error::Schema(format!(
                    "line {}: unexpected trailing tokens",
                    lineno + 1
                )));
            }
            let kind = match (kind_word, rest) {
                ("numeric", None) => ColumnKind::Numeric,
                ("numeric", Some(_)) => {
                    return Err(Error::Schema(format!(
                        "line {}: numeric columns take no vocabulary",
                        lineno + 1
                    )))
                }
                ("categorical", Some(vocab)) => {
                    ColumnKind::Categorical(vocab.split(',').map(str::to_owned).collect())
                }
                ("label", Some(positives)) => {
                    ColumnKind::Label(positives.split(',').map(str::to_owned).collect())
                }
                ("categorical" | "label", None) => {
                    return Err(Error::Schema(format!(
                        "line {}: {} needs a comma-separated value list",
                        lineno + 1,
                        kind_word
                    )))
                }
                (other, _) => {
                    return Err(Error::Schema(format!(
                        "line {}: unknown column kind {other:?}",
                        lineno + 1
                    )))
                }
            };
            columns.push(SchemaColumn {
                name: name.to_owned(),
                kind,
            });
        }
        SchemaSpec::new(columns)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SchemaSpec::parse(&text)
    }

    /// Width of the encoded feature vector (label column excluded).
    pub fn encoded_width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.kind {
                ColumnKind::Numeric => 1,
                ColumnKind::Categorical(vocab) => vocab.len(),
                ColumnKind::Label(_) => 0,
            })
            .sum()
    }

    /// Encoded feature names: numeric columns keep their name, one-hot
    /// columns become `name=value`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.encoded_width());
        for col in &self.columns {
            match &col.kind {
                ColumnKind::Numeric => names.push(col.name.clone()),
                ColumnKind::Categorical(vocab) => {
                    names.extend(vocab.iter().map(|v| format!("{}={}", col.name, v)));
                }
                ColumnKind::Label(_) => {}
            }
        }
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
# toy schema
numeric x
categorical color red,green,blue
label verdict bad,worse
";

    #[test]
    fn parses_and_measures_width() {
        let schema = SchemaSpec::parse(TOY).unwrap();
        assert_eq!(schema.columns.len(), 3);
        assert_eq!(schema.encoded_width(), 4);
        assert_eq!(
            schema.feature_names(),
            vec!["x", "color=red", "color=green", "color=blue"]
        );
    }

    #[test]
    fn requires_exactly_one_label() {
        assert!(SchemaSpec::parse("numeric x\n").is_err());
        assert!(SchemaSpec::parse("label a yes\nlabel b no\nnumeric x\n").is_err());
    }

    #[test]
    fn rejects_duplicate_vocab() {
        assert!(SchemaSpec::parse("categorical c a,b,a\nlabel l x\n").is_err());
    }

    #[test]
    fn rejects_unknown_kind() {
        assert!(SchemaSpec::parse("text c\nlabel l x\n").is_err());
    }

    #[test]
    fn shipped_kddcup_schema_encodes_to_118_features() {
        let text = include_str!("../../assets/kddcup.schema");
        let schema = SchemaSpec::parse(text).unwrap();
        assert_eq!(schema.columns.len(), 42);
        assert_eq!(schema.encoded_width(), 118);
        let numeric = schema
            .columns
            .iter()
            .filter(|c| matches!(c.kind, ColumnKind::Numeric))
            .count();
        assert_eq!(numeric, 38);
        // non-attack records are the anomalous (positive) class
        let label = schema
            .columns
            .iter()
            .find_map(|c| match &c.kind {
                ColumnKind::Label(pos) => Some(pos.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(label, vec!["normal.".to_string()]);
    }
}
