use ndarray::{Array1, Array2};

use crate::error::{Result, TnpmError};

/// Lower bound applied to popularity estimates so their logarithms stay finite.
pub const PARAM_FLOOR: f64 = 1e-10;

/// Lower bound applied to mixing proportions before taking logarithms.
pub const MIXING_FLOOR: f64 = 1e-12;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Parameters of the two-way node popularity model.
///
/// `theta[[i, l]]` is the popularity of row node `i` toward column community
/// `l`; `lambda[[j, k]]` is the popularity of column node `j` toward row
/// community `k`. The mean of `A_ij` is `theta[[i, w_j]] * lambda[[j, z_i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub pi: Array1<f64>,
    pub rho: Array1<f64>,
    pub theta: Array2<f64>,
    pub lambda: Array2<f64>,
}

impl ModelParams {
    pub fn new(
        pi: Array1<f64>,
        rho: Array1<f64>,
        theta: Array2<f64>,
        lambda: Array2<f64>,
    ) -> Result<Self> {
        check_simplex("pi", &pi)?;
        check_simplex("rho", &rho)?;
        if theta.ncols() != rho.len() {
            return Err(TnpmError::Dimension(format!(
                "theta has {} columns but rho has {} entries",
                theta.ncols(),
                rho.len()
            )));
        }
        if lambda.ncols() != pi.len() {
            return Err(TnpmError::Dimension(format!(
                "lambda has {} columns but pi has {} entries",
                lambda.ncols(),
                pi.len()
            )));
        }
        for (name, m) in [("theta", &theta), ("lambda", &lambda)] {
            if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(TnpmError::Domain(format!(
                    "{name} entries must be finite and non-negative"
                )));
            }
        }
        Ok(Self {
            pi,
            rho,
            theta,
            lambda,
        })
    }

    /// Number of row communities.
    pub fn k(&self) -> usize {
        self.pi.len()
    }

    /// Number of column communities.
    pub fn l(&self) -> usize {
        self.rho.len()
    }

    pub fn rows(&self) -> usize {
        self.theta.nrows()
    }

    pub fn cols(&self) -> usize {
        self.lambda.nrows()
    }

    /// Mean of `A_ij` under labels `(k, l)`.
    pub fn rate(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.theta[[i, l]] * self.lambda[[j, k]]
    }

    pub(crate) fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows() != rows || self.cols() != cols {
            return Err(TnpmError::Dimension(format!(
                "parameters sized for {} x {} but the network is {rows} x {cols}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_floor(&self) -> Result<()> {
        let below = |m: &Array2<f64>| m.iter().any(|&v| v < PARAM_FLOOR);
        if below(&self.theta) || below(&self.lambda) {
            return Err(TnpmError::Domain(format!(
                "popularity parameters must be at least {PARAM_FLOOR}"
            )));
        }
        Ok(())
    }
}

fn check_simplex(name: &str, v: &Array1<f64>) -> Result<()> {
    if v.is_empty() {
        return Err(TnpmError::InvalidInput(format!("{name} is empty")));
    }
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(TnpmError::Domain(format!("{name} has a negative entry")));
    }
    let sum = v.sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(TnpmError::Domain(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}

pub(crate) fn clamp_floor(m: &mut Array2<f64>) {
    m.mapv_inplace(|v| if v.is_finite() && v >= PARAM_FLOOR { v } else { PARAM_FLOOR });
}

/// `log(max(p, MIXING_FLOOR))` elementwise.
pub(crate) fn log_mixing(p: &Array1<f64>) -> Array1<f64> {
    p.mapv(|v| v.max(MIXING_FLOOR).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn validates_simplex_and_shapes() {
        let ok = ModelParams::new(
            array![0.5, 0.5],
            array![1.0],
            array![[1.0], [2.0]],
            array![[1.0, 1.0]],
        );
        assert!(ok.is_ok());
        let bad_pi = ModelParams::new(array![0.6, 0.5], array![1.0], array![[1.0]], array![[1.0, 1.0]]);
        assert!(bad_pi.is_err());
        let bad_shape = ModelParams::new(array![1.0], array![1.0], array![[1.0, 1.0]], array![[1.0]]);
        assert!(bad_shape.is_err());
    }

    #[test]
    fn floor_clamps_zero_and_nan() {
        let mut m = array![[0.0, f64::NAN, 3.0]];
        clamp_floor(&mut m);
        assert_eq!(m, array![[PARAM_FLOOR, PARAM_FLOOR, 3.0]]);
    }
}
