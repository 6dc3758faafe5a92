//! Two-class datasets read from CSV.

use crate::error::{Error, Result};
use crate::midrank::{VariableColumn, VariableKind};
use std::collections::BTreeSet;
use std::path::Path;

/// Columns with at most this many distinct present values load as discrete.
pub const DISCRETE_MAX_LEVELS: usize = 10;

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label_column: String,
    /// Label value treated as class 1; defaults to the larger of the two
    /// values in string order.
    pub positive_label: Option<String>,
    pub missing_tokens: Vec<String>,
    pub kind_overrides: Vec<(String, VariableKind)>,
}

impl LoadOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            positive_label: None,
            missing_tokens: vec!["NA".into(), "".into(), "?".into()],
            kind_overrides: Vec::new(),
        }
    }

    pub fn positive(mut self, label: impl Into<String>) -> Self {
        self.positive_label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    names: Vec<String>,
    variables: Vec<VariableColumn>,
    labels: Vec<bool>,
    positive_label: String,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        variables: Vec<VariableColumn>,
        labels: Vec<bool>,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        assert_eq!(names.len(), variables.len(), "one name per variable");
        if let Some(bad) = variables.iter().position(|v| v.len() != labels.len()) {
            return Err(Error::Config(format!(
                "variable `{}` has {} rows, labels have {}",
                names[bad],
                variables[bad].len(),
                labels.len()
            )));
        }
        Ok(Self {
            names,
            variables,
            labels,
            positive_label: positive_label.into(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn variables(&self) -> &[VariableColumn] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<(usize, &VariableColumn)> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| (i, &self.variables[i]))
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn p(&self) -> usize {
        self.variables.len()
    }

    pub fn map_variables(&self, f: impl Fn(usize, &VariableColumn) -> VariableColumn) -> Self {
        Self {
            names: self.names.clone(),
            variables: self.variables.iter().enumerate().map(|(i, v)| f(i, v)).collect(),
            labels: self.labels.clone(),
            positive_label: self.positive_label.clone(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string(), opts)
}

pub fn read_csv<R: std::io::Read>(input: R, source: &str, opts: &LoadOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_at = headers
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::Label {
            column: opts.label_column.clone(),
            message: "column not found".into(),
        })?;

    let feature_at: Vec<usize> = (0..headers.len()).filter(|&i| i != label_at).collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); feature_at.len()];
    let mut missing: Vec<Vec<bool>> = vec![Vec::new(); feature_at.len()];
    let mut raw_labels = Vec::new();

    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let label = record.get(label_at).unwrap_or("").trim();
        if is_missing(label, opts) {
            return Err(Error::Label {
                column: opts.label_column.clone(),
                message: format!("missing label on line {row}"),
            });
        }
        raw_labels.push(label.to_string());
        for (slot, &col) in feature_at.iter().enumerate() {
            let cell = record.get(col).unwrap_or("").trim();
            if is_missing(cell, opts) {
                values[slot].push(f64::NAN);
                missing[slot].push(true);
                continue;
            }
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::Parse {
                    path: source.to_string(),
                    row,
                    column: headers[col].clone(),
                    message: format!("`{cell}` is not a finite number"),
                }
            })?;
            values[slot].push(v);
            missing[slot].push(false);
        }
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::Label {
            column: opts.label_column.clone(),
            message: format!("expected exactly two label values, found {}", distinct.len()),
        });
    }
    let positive = match &opts.positive_label {
        Some(p) if distinct.contains(p.as_str()) => p.clone(),
        Some(p) => {
            return Err(Error::Label {
                column: opts.label_column.clone(),
                message: format!("positive label `{p}` does not occur"),
            })
        }
        None => distinct.iter().next_back().unwrap().to_string(),
    };
    let labels = raw_labels.iter().map(|l| *l == positive).collect();

    let names: Vec<String> = feature_at.iter().map(|&i| headers[i].clone()).collect();
    for (name, _) in &opts.kind_overrides {
        if !names.contains(name) {
            return Err(Error::Config(format!("kind override for unknown column `{name}`")));
        }
    }
    let variables = values
        .into_iter()
        .zip(missing)
        .zip(&names)
        .map(|((v, m), name)| {
            let kind = opts
                .kind_overrides
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, k)| k)
                .unwrap_or_else(|| infer_kind(&v, &m));
            VariableColumn::new(v, m, kind)
        })
        .collect::<Result<_>>()?;
    Dataset::new(names, variables, labels, positive)
}

fn is_missing(cell: &str, opts: &LoadOptions) -> bool {
    opts.missing_tokens.iter().any(|t| t == cell)
}

fn infer_kind(values: &[f64], missing: &[bool]) -> VariableKind {
    let mut seen: Vec<u64> = values
        .iter()
        .zip(missing)
        .filter(|(_, &m)| !m)
        .map(|(v, _)| v.to_bits())
        .collect();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() <= DISCRETE_MAX_LEVELS {
        VariableKind::Discrete
    } else {
        VariableKind::Continuous
    }
}
