//! Matrix files for the `cesaro` subcommand: a JSON array of rows or CSV
//! with one row per line.

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Json,
    Csv,
}

pub fn parse_matrix(text: &str) -> Result<(Vec<Vec<f64>>, MatrixFormat)> {
    if text.trim_start().starts_with('[') {
        let rows: Vec<Vec<f64>> = serde_json::from_str(text).context("malformed JSON matrix")?;
        return Ok((rows, MatrixFormat::Json));
    }
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .with_context(|| format!("line {}: bad number `{}`", lineno + 1, cell.trim()))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("matrix file is empty");
    }
    Ok((rows, MatrixFormat::Csv))
}

pub fn render_matrix(rows: &[Vec<f64>], format: MatrixFormat) -> String {
    match format {
        MatrixFormat::Json => {
            let body: Vec<String> = rows
                .iter()
                .map(|r| serde_json::to_string(r).expect("finite floats serialize"))
                .collect();
            format!("[\n  {}\n]\n", body.join(",\n  "))
        }
        MatrixFormat::Csv => {
            let mut out = String::new();
            for r in rows {
                let cells: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
    }
}
