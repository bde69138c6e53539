use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square `N x N` real field stored row-major, so the flat offset of `(x, y)`
/// is `N*y + x`, the same as the basis index that amplitude-encodes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealField {
    size: usize,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(size: usize) -> Self {
        RealField {
            size,
            values: vec![0.0; size * size],
        }
    }

    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not fill a {size}x{size} field",
                values.len()
            )));
        }
        Ok(RealField { size, values })
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                values.push(f(x, y));
            }
        }
        RealField { size, values }
    }

    /// Axis length `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.size * y + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.values[self.size * y + x] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.values[self.size * y..self.size * (y + 1)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(out, self.size, &self.values)
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let (rows, cols, values) = read_matrix_csv(input)?;
        if rows != cols {
            return Err(Error::ShapeMismatch(format!("{rows}x{cols} matrix is not square")));
        }
        RealField::from_values(rows, values)
    }
}

/// Row-major CSV matrix, shortest round-trip float formatting.
pub fn write_matrix_csv<W: Write>(mut out: W, columns: usize, values: &[f64]) -> Result<()> {
    for row in values.chunks(columns.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Parses a headerless numeric CSV matrix, returning `(rows, columns, values)`.
pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut values = Vec::new();
    let mut columns = None;
    let mut rows = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("`{cell}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        match columns {
            None => columns = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {c} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    Ok((rows, columns.unwrap_or(0), values))
}
