use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{AttributeRole, Column, Dataset, DatasetError};

/// Attribute name to role, as read from the role config JSON.
pub type RoleMap = BTreeMap<String, AttributeRole>;

/// Loads a comma-delimited CSV with a header row.
///
/// Every header must have a role in `roles` and vice versa. The target is
/// coded to 0/1: numeric `0`/`1` are taken as-is, otherwise `positive_label`
/// selects which of two distinct tokens maps to 1.
pub fn load_csv(
    path: impl AsRef<Path>,
    roles: &RoleMap,
    positive_label: Option<&str>,
) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, roles, positive_label)
}

/// [`load_csv`] over any reader. Lines starting with `#` are skipped.
pub fn read_csv<R: Read>(
    reader: R,
    roles: &RoleMap,
    positive_label: Option<&str>,
) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(DatasetError::MissingHeader),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    if names.iter().all(String::is_empty) {
        return Err(DatasetError::MissingHeader);
    }
    for name in roles.keys() {
        if !names.contains(name) {
            return Err(DatasetError::UnknownAttribute(name.clone()));
        }
    }
    let mut attrs = Vec::with_capacity(names.len());
    for name in &names {
        let role = roles
            .get(name)
            .ok_or_else(|| DatasetError::MissingRole(name.clone()))?;
        attrs.push((name.clone(), *role));
    }
    let targets: Vec<usize> = attrs
        .iter()
        .enumerate()
        .filter(|(_, (_, r))| *r == AttributeRole::Target)
        .map(|(i, _)| i)
        .collect();
    if targets.len() != 1 {
        return Err(DatasetError::TargetCount(targets.len()));
    }
    let target_idx = targets[0];

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(DatasetError::Ragged {
                line,
                expected: names.len(),
                found: record.len(),
            });
        }
        for (i, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(DatasetError::MissingCell {
                    line,
                    column: names[i].clone(),
                });
            }
            cells[i].push(field.to_string());
        }
    }

    let columns = cells
        .into_iter()
        .enumerate()
        .map(|(i, col)| {
            if i == target_idx {
                code_target(&names[i], col, positive_label).map(Column::Numeric)
            } else {
                Ok(Column::infer(col))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(attrs, columns)
}

fn code_target(
    name: &str,
    tokens: Vec<String>,
    positive_label: Option<&str>,
) -> Result<Vec<f64>, DatasetError> {
    let err = |detail: String| DatasetError::TargetNotBinary {
        column: name.to_string(),
        detail,
    };
    let numeric: Option<Vec<f64>> = tokens
        .iter()
        .map(|t| t.parse::<f64>().ok().filter(|v| *v == 0.0 || *v == 1.0))
        .collect();
    if let Some(v) = numeric {
        return Ok(v);
    }
    let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    let Some(positive) = positive_label else {
        let sample = distinct
            .iter()
            .take(3)
            .copied()
            .collect::<Vec<_>>()
            .join(", ");
        return Err(err(format!(
            "values {{{sample}}} are not 0/1 and no positive label is configured"
        )));
    };
    if distinct.len() > 2 {
        return Err(err(format!("{} distinct values", distinct.len())));
    }
    if !distinct.contains(positive) {
        return Err(err(format!("positive label `{positive}` never occurs")));
    }
    Ok(tokens
        .iter()
        .map(|t| if t == positive { 1.0 } else { 0.0 })
        .collect())
}
