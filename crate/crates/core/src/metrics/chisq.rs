use ndarray::Array2;
use statrs::function::gamma::gamma_ur;

use crate::error::{Result, TnpmError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of independence on a contingency table.
pub fn chi_square_independence(table: &Array2<u64>) -> Result<ChiSquare> {
    let (rows, cols) = table.dim();
    if rows < 2 || cols < 2 {
        return Err(TnpmError::InvalidInput(format!(
            "contingency table must be at least 2 x 2, got {rows} x {cols}"
        )));
    }
    let row_sums: Vec<f64> = table.rows().into_iter().map(|r| r.sum() as f64).collect();
    let col_sums: Vec<f64> = table.columns().into_iter().map(|c| c.sum() as f64).collect();
    if let Some(r) = row_sums.iter().position(|&s| s == 0.0) {
        return Err(TnpmError::InvalidInput(format!("row {r} of the table sums to zero")));
    }
    if let Some(c) = col_sums.iter().position(|&s| s == 0.0) {
        return Err(TnpmError::InvalidInput(format!("column {c} of the table sums to zero")));
    }
    let total: f64 = row_sums.iter().sum();

    let mut statistic = 0.0;
    for ((r, c), &observed) in table.indexed_iter() {
        let expected = row_sums[r] * col_sums[c] / total;
        let d = observed as f64 - expected;
        statistic += d * d / expected;
    }
    let dof = (rows - 1) * (cols - 1);
    let p_value = if statistic <= 0.0 {
        1.0
    } else {
        gamma_ur(dof as f64 / 2.0, statistic / 2.0)
    };
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}
