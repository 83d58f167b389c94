//! File ingestion: plain numeric samples, grouped ANOVA data and
//! whitespace-delimited matrices.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use obf_core::Sample;

/// A user-facing input error, reported on stderr with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn read_to_string(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

/// Whitespace/newline-separated decimals; lines starting with '#' are
/// ignored. Malformed tokens are reported with their line number.
pub fn read_data(path: &Path) -> Result<Sample, InputError> {
    let text = read_to_string(path)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| {
                InputError(format!(
                    "{}:{}: malformed number '{token}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(InputError(format!("{}: no data", path.display())));
    }
    Ok(Sample::new(values, path.display().to_string()))
}

/// Parses an already-loaded data string (used for the embedded fixture).
pub fn parse_data_str(text: &str, label: &str) -> Result<Sample, InputError> {
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| InputError(format!("{label}: malformed number '{token}'")))?;
            values.push(v);
        }
    }
    Ok(Sample::new(values, label.to_string()))
}

/// Grouped ANOVA input: CSV rows `group_label,value`. Groups appear in
/// first-seen order; the returned sample is sorted by group.
pub fn read_grouped(path: &Path) -> Result<(Vec<usize>, Sample), InputError> {
    let text = read_to_string(path)?;
    let mut labels: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, value) = line.split_once(',').ok_or_else(|| {
            InputError(format!(
                "{}:{}: expected 'group_label,value'",
                path.display(),
                lineno + 1
            ))
        })?;
        let v: f64 = value.trim().parse().map_err(|_| {
            InputError(format!(
                "{}:{}: malformed value '{}'",
                path.display(),
                lineno + 1,
                value.trim()
            ))
        })?;
        let label = label.trim().to_string();
        match labels.iter().position(|l| *l == label) {
            Some(g) => groups[g].push(v),
            None => {
                labels.push(label);
                groups.push(vec![v]);
            }
        }
    }
    if groups.is_empty() {
        return Err(InputError(format!("{}: no data", path.display())));
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let values: Vec<f64> = groups.into_iter().flatten().collect();
    Ok((sizes, Sample::new(values, path.display().to_string())))
}

/// Whitespace-delimited numeric matrix; all rows must have equal length.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, InputError> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, InputError> = line
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| {
                    InputError(format!(
                        "{}:{}: malformed number '{t}'",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect();
        let row = row?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(InputError(format!(
                    "{}:{}: row has {} entries, expected {}",
                    path.display(),
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(InputError(format!("{}: no data", path.display())));
    }
    let ncols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}
