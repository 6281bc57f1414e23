use std::collections::HashMap;

use crate::error::{Result, TnpmError};
use crate::model::HardLabels;

fn pairs(x: u64) -> i128 {
    let x = i128::from(x);
    x * (x - 1) / 2
}

/// Adjusted Rand index between two partitions of the same nodes.
///
/// Evaluated as the ratio of two exact integers,
/// `2 (C(n,2) S_ij - S_a S_b) / (C(n,2) (S_a + S_b) - 2 S_a S_b)`, where the
/// `S` are pair counts from the contingency table. When both partitions are
/// trivial the ratio is 0/0; it is then 1 for identical partitions and 0
/// otherwise.
pub fn ari(a: &HardLabels, b: &HardLabels) -> Result<f64> {
    ari_from_slices(a.as_slice(), b.as_slice())
}

pub(crate) fn ari_from_slices(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(TnpmError::Dimension(format!(
            "partitions of {} and {} nodes",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(TnpmError::InvalidInput(
            "adjusted Rand index needs at least two nodes".into(),
        ));
    }

    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut a_sizes: HashMap<usize, u64> = HashMap::new();
    let mut b_sizes: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *a_sizes.entry(x).or_default() += 1;
        *b_sizes.entry(y).or_default() += 1;
    }
    let sum_cells: i128 = cells.values().map(|&c| pairs(c)).sum();
    let sum_a: i128 = a_sizes.values().map(|&c| pairs(c)).sum();
    let sum_b: i128 = b_sizes.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);

    let numerator = 2 * (total * sum_cells - sum_a * sum_b);
    let denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if denominator == 0 {
        let identical = cells.len() == a_sizes.len() && cells.len() == b_sizes.len();
        log::warn!("adjusted Rand index undefined for two trivial partitions");
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}
