//! Python bindings for `stochvolterra-core`.
//!
//! States are plain lists of eigen-coefficients; paths come back as lists
//! of per-node coefficient lists.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use stochvolterra_core as core;
use stochvolterra_core::fracquad::TimeGrid;
use stochvolterra_core::noise::Psi;
use stochvolterra_core::operators::HilbertVec;
use stochvolterra_core::resolvent::Method;
use stochvolterra_core::stochconv::ResidualKind;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Accuracy { .. } | core::Error::Quadrature(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn grid(t_end: f64, n_steps: usize) -> PyResult<TimeGrid> {
    TimeGrid::new(t_end, n_steps).map_err(to_py)
}

#[pyfunction]
fn mittag_leffler(alpha: f64, z: f64) -> PyResult<f64> {
    core::specfun::mittag_leffler(alpha, z).map_err(to_py)
}

#[pyfunction]
fn wright_phi(gamma: f64, z: f64) -> PyResult<f64> {
    core::specfun::wright_phi(gamma, z).map_err(to_py)
}

#[pyfunction]
fn subordination_density(gamma: f64, t: f64, s: f64) -> PyResult<f64> {
    core::specfun::subordination_density(gamma, t, s).map_err(to_py)
}

/// Nonpositive diagonal operator given by its eigenvalues.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct SpectralOperator(core::operators::SpectralOperator);

#[pymethods]
impl SpectralOperator {
    #[new]
    #[pyo3(signature = (eigenvalues, label = "custom"))]
    fn new(eigenvalues: Vec<f64>, label: &str) -> PyResult<Self> {
        core::operators::SpectralOperator::new(eigenvalues, label).map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (modes, length = 1.0))]
    fn dirichlet_laplacian(modes: usize, length: f64) -> PyResult<Self> {
        core::operators::SpectralOperator::dirichlet_laplacian(modes, length)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.apply(&x.into()).map_err(to_py)?.into_inner())
    }

    fn resolvent_apply(&self, lam: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.resolvent_apply(lam, &x.into()).map_err(to_py)?.into_inner())
    }

    /// Eigenvalues `n λ_k / (n - λ_k)` of the Yosida approximant.
    fn yosida_eigenvalues(&self, n: f64) -> PyResult<Vec<f64>> {
        Ok(self.0.yosida(n).map_err(to_py)?.eigenvalues().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("SpectralOperator({:?}, label={:?})", self.0.eigenvalues(), self.0.label())
    }
}

/// α-times resolvent family: `method` is "diagonal", "subordinated" (with
/// `beta`) or "yosida" (with `n`).
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct ResolventSpec(core::resolvent::ResolventSpec);

#[pymethods]
impl ResolventSpec {
    #[new]
    #[pyo3(signature = (alpha, operator, method = "diagonal", beta = None, n = None))]
    fn new(alpha: f64, operator: &SpectralOperator, method: &str, beta: Option<f64>, n: Option<f64>) -> PyResult<Self> {
        let method = match (method, beta, n) {
            ("diagonal", None, None) => Method::Diagonal,
            ("subordinated", Some(beta), None) => Method::Subordinated { beta },
            ("yosida", None, Some(n)) => Method::Yosida { n },
            _ => {
                return Err(PyValueError::new_err(
                    "method must be 'diagonal', 'subordinated' with beta, or 'yosida' with n",
                ))
            }
        };
        core::resolvent::ResolventSpec::new(alpha, method, operator.0.clone())
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    fn apply(&self, py: Python<'_>, t: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let x: HilbertVec = x.into();
        Ok(py.detach(|| self.0.apply(t, &x)).map_err(to_py)?.into_inner())
    }

    fn factors(&self, py: Python<'_>, t: f64) -> PyResult<Vec<f64>> {
        py.detach(|| self.0.factors(t)).map_err(to_py)
    }

    /// `(times, residuals)` of the resolvent equation on a uniform grid.
    fn residual(&self, t_end: f64, n_steps: usize, x: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let r = core::resolvent::resolvent_equation_residual(&self.0, &grid(t_end, n_steps)?, &x.into())
            .map_err(to_py)?;
        Ok((r.times, r.residuals))
    }

    /// `(M, ω)` of the empirical bound `||S(t)|| ≤ M e^{ωt}`.
    fn growth_bound(&self, t_end: f64, n_steps: usize) -> PyResult<(f64, f64)> {
        let fit = core::resolvent::growth_bound_fit(&self.0, &grid(t_end, n_steps)?).map_err(to_py)?;
        Ok((fit.m_emp, fit.omega_emp))
    }
}

/// Covariance eigenvalues `q`, constant multipliers `psi` and a master seed.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct NoiseModel(core::noise::NoiseModel);

#[pymethods]
impl NoiseModel {
    #[new]
    fn new(q: Vec<f64>, psi: Vec<f64>, seed: u64) -> PyResult<Self> {
        core::noise::NoiseModel::new(q, Psi::Constant(psi), seed)
            .map(Self)
            .map_err(to_py)
    }

    fn l20_norm(&self, t: f64) -> PyResult<f64> {
        self.0.l20_norm(t).map_err(to_py)
    }

    fn process_norm(&self, t_end: f64, n_steps: usize) -> PyResult<f64> {
        self.0.psi_process_norm(&grid(t_end, n_steps)?).map_err(to_py)
    }

    /// Increments of one path as a list of per-step lists.
    fn increments(&self, t_end: f64, n_steps: usize, path_index: u64) -> PyResult<Vec<Vec<f64>>> {
        let w = core::noise::WienerIncrements::generate(&self.0, &grid(t_end, n_steps)?, path_index)
            .map_err(to_py)?;
        Ok((0..w.n_steps()).map(|i| w.step(i).to_vec()).collect())
    }
}

fn nodes(path: &core::stochconv::ModePath) -> Vec<Vec<f64>> {
    (0..=path.grid().n_steps()).map(|i| path.node(i).to_vec()).collect()
}

#[pyfunction]
fn stoch_convolution(
    py: Python<'_>,
    spec: &ResolventSpec,
    noise: &NoiseModel,
    t_end: f64,
    n_steps: usize,
    path_index: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let g = grid(t_end, n_steps)?;
    let path = py
        .detach(|| core::stochconv::stoch_convolution(&spec.0, &noise.0, &g, path_index))
        .map_err(to_py)?;
    Ok(nodes(&path))
}

#[pyfunction]
fn mild_solution(
    py: Python<'_>,
    spec: &ResolventSpec,
    noise: &NoiseModel,
    t_end: f64,
    n_steps: usize,
    x0: Vec<f64>,
    path_index: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let g = grid(t_end, n_steps)?;
    let x0: HilbertVec = x0.into();
    let path = py
        .detach(|| core::stochconv::mild_solution(&spec.0, &noise.0, &g, &x0, path_index))
        .map_err(to_py)?;
    Ok(nodes(&path))
}

/// `(mc_estimate, quadrature_value, std_error)` for `E|W(t_end)|²`.
#[pyfunction]
fn ito_isometry_check(
    py: Python<'_>,
    spec: &ResolventSpec,
    noise: &NoiseModel,
    t_end: f64,
    n_steps: usize,
    paths: u64,
) -> PyResult<(f64, f64, f64)> {
    let g = grid(t_end, n_steps)?;
    let c = py
        .detach(|| core::stochconv::ito_isometry_check(&spec.0, &noise.0, &g, n_steps, paths))
        .map_err(to_py)?;
    Ok((c.mc_estimate, c.quadrature_value, c.std_error))
}

/// RMS strong residual at `t_end` for each grid in `ladder`.
#[pyfunction]
fn strong_residual_ladder(
    py: Python<'_>,
    spec: &ResolventSpec,
    noise: &NoiseModel,
    t_end: f64,
    ladder: Vec<usize>,
    paths: u64,
) -> PyResult<Vec<f64>> {
    let r = py
        .detach(|| core::stochconv::residual_ladder(ResidualKind::Strong, &spec.0, &noise.0, t_end, &ladder, paths))
        .map_err(to_py)?;
    Ok(r.rms_final)
}

/// Deterministic sup-over-grid Yosida errors for the test vector `x`.
#[pyfunction]
fn convergence_report(
    alpha: f64,
    operator: &SpectralOperator,
    n_ladder: Vec<f64>,
    t_end: f64,
    n_steps: usize,
    x: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let r = core::resolvent::convergence_report(alpha, &operator.0, &n_ladder, &grid(t_end, n_steps)?, &[x.into()])
        .map_err(to_py)?;
    Ok(r.sup_errors)
}

/// `sup_t E|W_{α,n}(t) - W_α(t)|²` for each `n`, common random numbers.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn yosida_convolution_convergence(
    py: Python<'_>,
    alpha: f64,
    operator: &SpectralOperator,
    noise: &NoiseModel,
    t_end: f64,
    n_steps: usize,
    n_ladder: Vec<f64>,
    paths: u64,
) -> PyResult<Vec<f64>> {
    let g = grid(t_end, n_steps)?;
    let r = py
        .detach(|| core::stochconv::yosida_convolution_convergence(alpha, &operator.0, &noise.0, &g, &n_ladder, paths))
        .map_err(to_py)?;
    Ok(r.sup_errors)
}

#[pymodule]
fn stochvolterra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(wright_phi, m)?)?;
    m.add_function(wrap_pyfunction!(subordination_density, m)?)?;
    m.add_class::<SpectralOperator>()?;
    m.add_class::<ResolventSpec>()?;
    m.add_class::<NoiseModel>()?;
    m.add_function(wrap_pyfunction!(stoch_convolution, m)?)?;
    m.add_function(wrap_pyfunction!(mild_solution, m)?)?;
    m.add_function(wrap_pyfunction!(ito_isometry_check, m)?)?;
    m.add_function(wrap_pyfunction!(strong_residual_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_report, m)?)?;
    m.add_function(wrap_pyfunction!(yosida_convolution_convergence, m)?)?;
    Ok(())
}
