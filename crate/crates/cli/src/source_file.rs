//! Parser for the structured-text source format.
//!
//! A source file declares the two alphabets and the joint matrix, x-major:
//!
//! ```text
//! # lines starting with '#' are comments
//! x_alphabet: 0 1
//! y_alphabet: 0 1
//! joint:
//! 0.45 0.05
//! 0.05 0.45
//! ```
//!
//! The matrix dimensions must match the alphabet lengths and the entries must
//! sum to 1 within 1e-9; the mass is then renormalized exactly before
//! constructing the joint pmf.

use sib_core::prob::JointPmf;

/// A parsed source document. The labels fix the matrix dimensions; only the
/// joint is consumed downstream.
#[derive(Debug, Clone)]
pub struct SourceFile {
    #[allow(dead_code)]
    pub x_labels: Vec<String>,
    #[allow(dead_code)]
    pub y_labels: Vec<String>,
    pub joint: JointPmf,
}

/// Parse failure with the offending 1-based line number when known.
#[derive(Debug)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn fail<T>(line: Option<usize>, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

pub fn parse_source(text: &str) -> Result<SourceFile, ParseError> {
    let mut x_labels: Option<(usize, Vec<String>)> = None;
    let mut y_labels: Option<(usize, Vec<String>)> = None;
    let mut matrix: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut in_joint = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("x_alphabet:") {
            if x_labels.is_some() {
                return fail(Some(lineno), "duplicate x_alphabet declaration");
            }
            x_labels = Some((lineno, split_labels(rest)));
            in_joint = false;
            continue;
        }
        if let Some(rest) = line.strip_prefix("y_alphabet:") {
            if y_labels.is_some() {
                return fail(Some(lineno), "duplicate y_alphabet declaration");
            }
            y_labels = Some((lineno, split_labels(rest)));
            in_joint = false;
            continue;
        }
        if line == "joint:" {
            if in_joint || !matrix.is_empty() {
                return fail(Some(lineno), "duplicate joint declaration");
            }
            in_joint = true;
            continue;
        }
        if in_joint {
            let mut row = Vec::new();
            for token in line.split_whitespace() {
                match token.parse::<f64>() {
                    Ok(v) if v >= 0.0 && v.is_finite() => row.push(v),
                    Ok(v) => {
                        return fail(
                            Some(lineno),
                            format!("probability {v} is not a finite nonnegative value"),
                        )
                    }
                    Err(_) => {
                        return fail(
                            Some(lineno),
                            format!("cannot parse '{token}' as a probability"),
                        )
                    }
                }
            }
            matrix.push((lineno, row));
            continue;
        }
        return fail(
            Some(lineno),
            format!("unexpected content '{line}' (expected x_alphabet:, y_alphabet:, or joint:)"),
        );
    }

    let (_, x_labels) = match x_labels {
        Some(v) => v,
        None => return fail(None, "missing x_alphabet declaration"),
    };
    let (_, y_labels) = match y_labels {
        Some(v) => v,
        None => return fail(None, "missing y_alphabet declaration"),
    };
    if x_labels.is_empty() {
        return fail(None, "x_alphabet must list at least one label");
    }
    if y_labels.is_empty() {
        return fail(None, "y_alphabet must list at least one label");
    }
    if matrix.is_empty() {
        return fail(None, "missing joint matrix");
    }
    if matrix.len() != x_labels.len() {
        let (lineno, _) = matrix[matrix.len() - 1];
        return fail(
            Some(lineno),
            format!(
                "joint has {} rows but x_alphabet lists {} labels",
                matrix.len(),
                x_labels.len()
            ),
        );
    }
    let mut probs = Vec::with_capacity(x_labels.len() * y_labels.len());
    for (lineno, row) in &matrix {
        if row.len() != y_labels.len() {
            return fail(
                Some(*lineno),
                format!(
                    "joint row has {} entries but y_alphabet lists {} labels",
                    row.len(),
                    y_labels.len()
                ),
            );
        }
        probs.extend_from_slice(row);
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return fail(None, format!("joint mass sums to {sum}, expected 1 within 1e-9"));
    }
    // Renormalize exactly so the strict joint-pmf tolerance is met.
    probs.iter_mut().for_each(|p| *p /= sum);
    let joint = match JointPmf::new(x_labels.len(), y_labels.len(), probs) {
        Ok(j) => j,
        Err(e) => return fail(None, e.to_string()),
    };
    Ok(SourceFile {
        x_labels,
        y_labels,
        joint,
    })
}

fn split_labels(rest: &str) -> Vec<String> {
    rest.split_whitespace().map(|s| s.to_string()).collect()
}
