//! Python bindings: networks, fits, generators and metrics. Matrices cross
//! the boundary as lists of rows.

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use tnpm::io::{read_edge_list, read_undirected_edge_list};
use tnpm::metrics;
use tnpm::{BipartiteAdjacency, FitConfig, FitMode, HardLabels, SoftAssignment, TnpmError};

fn to_py(e: TnpmError) -> PyErr {
    match e {
        TnpmError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows_of(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn parse_mode(mode: &str) -> PyResult<FitMode> {
    match mode {
        "bipartite" => Ok(FitMode::Bipartite),
        "undirected" => Ok(FitMode::Undirected),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'bipartite' or 'undirected', got '{other}'"
        ))),
    }
}

/// Sparse count matrix; rows and columns are the two node sets.
#[pyclass(module = "tnpm_py", frozen)]
struct Network {
    inner: BipartiteAdjacency,
}

#[pymethods]
impl Network {
    /// From `(row, col, count)` triplets; repeated cells are summed.
    #[new]
    fn new(rows: usize, cols: usize, triplets: Vec<(usize, usize, u32)>) -> PyResult<Self> {
        let inner = BipartiteAdjacency::from_triplets(rows, cols, triplets).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_dense(matrix: Vec<Vec<u32>>) -> PyResult<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(PyValueError::new_err("ragged matrix"));
        }
        let flat: Vec<u32> = matrix.into_iter().flatten().collect();
        let dense = Array2::from_shape_vec((rows, cols), flat).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            inner: BipartiteAdjacency::from_dense(&dense),
        })
    }

    /// Reads an edge list; returns `(network, row_ids, col_ids)`.
    #[staticmethod]
    #[pyo3(signature = (path, binary = false, undirected = false))]
    fn read(path: &str, binary: bool, undirected: bool) -> PyResult<(Network, Vec<String>, Vec<String>)> {
        let list = if undirected {
            read_undirected_edge_list(path.as_ref(), binary)
        } else {
            read_edge_list(path.as_ref(), binary)
        }
        .map_err(to_py)?;
        Ok((Network { inner: list.adjacency }, list.row_ids, list.col_ids))
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn get(&self, row: usize, col: usize) -> u32 {
        self.inner.get(row, col)
    }

    fn binarized(&self) -> Network {
        Network {
            inner: self.inner.binarized(),
        }
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.to_dense())
    }

    /// Sum of log(A_ij!), the term left out of the bound.
    fn log_factorial_sum(&self) -> f64 {
        self.inner.log_factorial_sum()
    }

    fn __repr__(&self) -> String {
        format!("Network(rows={}, cols={}, nnz={})", self.inner.rows(), self.inner.cols(), self.inner.nnz())
    }
}

#[pyclass(module = "tnpm_py", frozen)]
struct FitResult {
    inner: tnpm::FitResult,
}

#[pymethods]
impl FitResult {
    #[getter]
    fn elbo(&self) -> f64 {
        self.inner.elbo
    }

    #[getter]
    fn elbo_trace(&self) -> Vec<f64> {
        self.inner.elbo_trace.clone()
    }

    #[getter]
    fn row_labels(&self) -> Vec<usize> {
        self.inner.row_labels().into_vec()
    }

    #[getter]
    fn col_labels(&self) -> Vec<usize> {
        self.inner.col_labels().into_vec()
    }

    #[getter]
    fn qz(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.qz.matrix())
    }

    #[getter]
    fn qw(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.qw.matrix())
    }

    #[getter]
    fn pi(&self) -> Vec<f64> {
        self.inner.params.pi.to_vec()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.inner.params.rho.to_vec()
    }

    #[getter]
    fn theta(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.params.theta)
    }

    #[getter]
    fn lambda_(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.params.lambda)
    }

    #[getter]
    fn restart_index(&self) -> usize {
        self.inner.restart_index
    }

    #[getter]
    fn outer_iterations(&self) -> usize {
        self.inner.outer_iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn restart_elbos(&self) -> Vec<f64> {
        self.inner.restarts.iter().map(|r| r.elbo).collect()
    }

    fn mutual_ari(&self) -> PyResult<f64> {
        self.inner.mutual_ari().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(elbo={}, restart_index={}, outer_iterations={})",
            self.inner.elbo, self.inner.restart_index, self.inner.outer_iterations
        )
    }
}

/// Variational EM with one spectral and `restarts` random starts.
#[pyfunction]
#[pyo3(signature = (network, k, l, restarts = 10, seed = 0, outer_tol = 1e-8, max_iters = 200, mode = "bipartite"))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    network: &Network,
    k: usize,
    l: usize,
    restarts: usize,
    seed: u64,
    outer_tol: f64,
    max_iters: usize,
    mode: &str,
) -> PyResult<FitResult> {
    let config = FitConfig {
        n_random_restarts: restarts,
        seed,
        outer_tol,
        max_outer_iters: max_iters,
        mode: parse_mode(mode)?,
        ..FitConfig::default()
    };
    let a = &network.inner;
    let inner = py.detach(|| tnpm::fit(a, k, l, &config)).map_err(to_py)?;
    Ok(FitResult { inner })
}

/// Spectral starting labels `(row_labels, col_labels)`.
#[pyfunction]
#[pyo3(signature = (network, k, l, seed = 0))]
fn svd_init(network: &Network, k: usize, l: usize, seed: u64) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let (z, w) = tnpm::spectral::svd_init(&network.inner, k, l, seed).map_err(to_py)?;
    Ok((z.into_vec(), w.into_vec()))
}

/// Planted bipartite network; returns `(network, row_labels, col_labels)`.
#[pyfunction]
fn gen_bipartite(m: usize, n: usize, k: usize, l: usize, r: f64, seed: u64) -> PyResult<(Network, Vec<usize>, Vec<usize>)> {
    let g = tnpm::netgen::gen_bipartite_tnpm(m, n, k, l, r, seed).map_err(to_py)?;
    Ok((Network { inner: g.adjacency }, g.z_true.into_vec(), g.w_true.into_vec()))
}

/// Planted two-community undirected network; returns `(network, labels)`.
#[pyfunction]
fn gen_undirected(n: usize, h: f64, seed: u64) -> PyResult<(Network, Vec<usize>)> {
    let g = tnpm::netgen::gen_undirected_pabm(n, h, seed).map_err(to_py)?;
    Ok((Network { inner: g.adjacency }, g.labels.into_vec()))
}

#[pyfunction]
fn ari(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    metrics::ari(&HardLabels::from_labels(a), &HardLabels::from_labels(b)).map_err(to_py)
}

/// Misclustering rate of soft memberships `q` (rows sum to 1) against `truth`.
#[pyfunction]
fn misclustering_rate(truth: Vec<usize>, q: Vec<Vec<f64>>) -> PyResult<f64> {
    let nodes = q.len();
    let clusters = q.first().map_or(0, Vec::len);
    let flat: Vec<f64> = q.into_iter().flatten().collect();
    let m = Array2::from_shape_vec((nodes, clusters), flat).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let q = SoftAssignment::new(m).map_err(to_py)?;
    metrics::misclustering_rate(&HardLabels::from_labels(truth), &q).map_err(to_py)
}

/// Bound attained by hard labels with parameters fitted in closed form.
#[pyfunction]
fn score_labels(network: &Network, z: Vec<usize>, w: Vec<usize>, k: usize, l: usize) -> PyResult<f64> {
    metrics::score_labels(&network.inner, &HardLabels::from_labels(z), &HardLabels::from_labels(w), k, l)
        .map_err(to_py)
}

/// Pearson chi-square test of independence; returns `(statistic, dof, p_value)`.
#[pyfunction]
fn chi_square(table: Vec<Vec<u64>>) -> PyResult<(f64, usize, f64)> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let flat: Vec<u64> = table.into_iter().flatten().collect();
    let t = Array2::from_shape_vec((rows, cols), flat).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let c = metrics::chi_square_independence(&t).map_err(to_py)?;
    Ok((c.statistic, c.dof, c.p_value))
}

#[pymodule]
fn tnpm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<FitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(svd_init, m)?)?;
    m.add_function(wrap_pyfunction!(gen_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(gen_undirected, m)?)?;
    m.add_function(wrap_pyfunction!(ari, m)?)?;
    m.add_function(wrap_pyfunction!(misclustering_rate, m)?)?;
    m.add_function(wrap_pyfunction!(score_labels, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square, m)?)?;
    Ok(())
}
