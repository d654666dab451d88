//! Python bindings: spectral fields, periodic trajectories, the hypothesis
//! checker, the Picard solver and the method-of-steps oracle.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use npde::{
    distance_to_periodic, full_report, picard_solve, registry_problem, simulate, Convention,
    HistorySegment, InterpRule, PeriodicTrajectory, PicardOptions, ProblemSpec, RegistryParams,
    SourceModel, SpectralField,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn convention_from(name: &str) -> PyResult<Convention> {
    name.parse::<Convention>().map_err(err)
}

/// Truncated sine-coefficient vector on (0,1) with Dirichlet walls.
#[pyclass(name = "SpectralField", skip_from_py_object)]
#[derive(Clone)]
struct PySpectralField {
    inner: SpectralField,
}

#[pymethods]
impl PySpectralField {
    #[new]
    fn new(coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: SpectralField::new(coeffs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn basis(n: usize, n_modes: usize) -> PyResult<Self> {
        if n == 0 || n > n_modes {
            return Err(PyValueError::new_err("basis index out of range"));
        }
        Ok(Self {
            inner: SpectralField::basis(n, n_modes),
        })
    }

    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    #[pyo3(signature = (alpha, convention = "eigen"))]
    fn norm_alpha(&self, alpha: f64, convention: &str) -> PyResult<f64> {
        npde::norm_alpha(&self.inner, alpha, convention_from(convention)?).map_err(err)
    }

    fn semigroup(&self, t: f64) -> PyResult<Self> {
        Ok(Self {
            inner: npde::semigroup_apply(t, &self.inner).map_err(err)?,
        })
    }

    #[pyo3(signature = (order, convention = "eigen"))]
    fn fractional_power(&self, order: f64, convention: &str) -> PyResult<Self> {
        Ok(Self {
            inner: npde::fractional_power_apply(order, &self.inner, convention_from(convention)?)
                .map_err(err)?,
        })
    }

    /// Values on the interior nodes i/m_x, i = 1..m_x-1.
    fn to_grid(&self, m_x: usize) -> PyResult<Vec<f64>> {
        Ok(npde::inverse_transform(&self.inner, m_x)
            .map_err(err)?
            .values()
            .to_vec())
    }

    #[staticmethod]
    fn from_grid(values: Vec<f64>, n_modes: usize) -> PyResult<Self> {
        Ok(Self {
            inner: npde::forward_transform(&npde::GridFunction::new(values), n_modes)
                .map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n_modes()
    }
}

/// One period of fields on a uniform time grid.
#[pyclass(name = "PeriodicTrajectory", skip_from_py_object)]
#[derive(Clone)]
struct PyTrajectory {
    inner: PeriodicTrajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega()
    }

    #[getter]
    fn m_t(&self) -> usize {
        self.inner.m_t()
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.n_modes()
    }

    fn field(&self, j: isize) -> PySpectralField {
        PySpectralField {
            inner: self.inner.field(j).clone(),
        }
    }

    /// Coefficients as an m_t × n_modes list of lists.
    fn coeffs(&self) -> Vec<Vec<f64>> {
        self.inner
            .fields()
            .iter()
            .map(|f| f.coeffs().to_vec())
            .collect()
    }

    #[pyo3(signature = (t, rule = "spectral"))]
    fn sample(&self, t: f64, rule: &str) -> PyResult<PySpectralField> {
        let rule = rule.parse::<InterpRule>().map_err(err)?;
        Ok(PySpectralField {
            inner: self.inner.sample(t, rule).map_err(err)?,
        })
    }

    #[pyo3(signature = (alpha, convention = "eigen"))]
    fn norm(&self, alpha: f64, convention: &str) -> PyResult<f64> {
        npde::trajectory_norm(&self.inner, alpha, convention_from(convention)?).map_err(err)
    }
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    problem: &str,
    omega: f64,
    tau: f64,
    xi: f64,
    alpha: f64,
    n_modes: usize,
    m_t: usize,
    m_x: usize,
    convention: &str,
    a0: f64,
    a1: f64,
    k: f64,
    l: f64,
) -> PyResult<ProblemSpec> {
    let params = RegistryParams {
        omega,
        tau,
        xi,
        alpha,
        n_modes,
        m_t,
        m_x,
        convention: convention_from(convention)?,
        source_model: SourceModel::Spectral,
        delay_interp: InterpRule::Spectral,
        a0,
        a1,
        big_k: k,
        lip_g: l,
    };
    registry_problem(problem, &params).map_err(err)
}

/// Evaluate every hypothesis inequality for a named problem; returns a flat
/// dict of constants, margins and verdicts.
#[pyfunction]
#[pyo3(signature = (problem = "example51", omega = 1.0, tau = 0.3, xi = 0.2, alpha = 0.5,
                    convention = "paper", a0 = 0.01, a1 = 0.01, k = 0.25, l = 0.01))]
#[allow(clippy::too_many_arguments)]
fn check_hypotheses(
    problem: &str,
    omega: f64,
    tau: f64,
    xi: f64,
    alpha: f64,
    convention: &str,
    a0: f64,
    a1: f64,
    k: f64,
    l: f64,
) -> PyResult<HashMap<String, f64>> {
    let spec = build_spec(
        problem, omega, tau, xi, alpha, 8, 16, 65, convention, a0, a1, k, l,
    )?;
    let r = full_report(&spec).map_err(err)?;
    let mut out = HashMap::new();
    out.insert("C".to_string(), r.constants.c);
    out.insert("M_alpha".to_string(), r.constants.m_alpha);
    out.insert(
        "C_one_minus_alpha".to_string(),
        r.constants.c_one_minus_alpha,
    );
    if let Some(g) = r.constants.gamma {
        out.insert("gamma".to_string(), g);
    }
    let verdict = |v: npde::Verdict| match v {
        npde::Verdict::Pass => 1.0,
        npde::Verdict::Fail => 0.0,
        npde::Verdict::Unknown => -1.0,
    };
    if let Some(i) = r.mild.h3_prime {
        out.insert("H3_prime.lhs".to_string(), i.lhs);
        out.insert("H3_prime.margin".to_string(), i.margin());
    }
    if let Some(i) = r.model.f3 {
        out.insert("F3.lhs".to_string(), i.lhs);
        out.insert("F3.rhs".to_string(), i.rhs);
        out.insert("F3.margin".to_string(), i.margin());
    }
    out.insert("uniqueness".to_string(), verdict(r.mild.uniqueness));
    out.insert("model_mild".to_string(), verdict(r.model.mild));
    Ok(out)
}

/// Picard-iterate a named problem to its periodic solution.
#[pyfunction]
#[pyo3(signature = (problem = "example51", omega = 1.0, tau = 0.3, xi = 0.2, alpha = 0.5,
                    n_modes = 32, m_t = 128, m_x = 129, convention = "eigen",
                    a0 = 0.01, a1 = 0.01, k = 0.25, l = 0.01, tol = 1e-10, max_iter = 100))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &str,
    omega: f64,
    tau: f64,
    xi: f64,
    alpha: f64,
    n_modes: usize,
    m_t: usize,
    m_x: usize,
    convention: &str,
    a0: f64,
    a1: f64,
    k: f64,
    l: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Py<PyAny>> {
    let spec = build_spec(
        problem, omega, tau, xi, alpha, n_modes, m_t, m_x, convention, a0, a1, k, l,
    )?;
    let res = picard_solve(
        &spec,
        spec.zero_trajectory(),
        &PicardOptions {
            tol,
            max_iter,
            ..PicardOptions::default()
        },
    )
    .map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("converged", res.converged)?;
    dict.set_item("iterations", res.iterations)?;
    dict.set_item("residual", res.residual)?;
    dict.set_item("ratios", res.contraction_ratios.clone())?;
    dict.set_item(
        "solution",
        PyTrajectory {
            inner: res.solution,
        },
    )?;
    Ok(dict.into())
}

/// Integrate the initial-value problem from a periodic start and return the
/// per-period distances to it.
#[pyfunction]
#[pyo3(signature = (problem = "example51", periods = 5, dt = 1e-3, omega = 1.0, tau = 0.3,
                    xi = 0.2, alpha = 0.5, n_modes = 32, m_t = 128, m_x = 129,
                    a0 = 0.01, a1 = 0.01, k = 0.25, l = 0.01))]
#[allow(clippy::too_many_arguments)]
fn validate_periodic(
    problem: &str,
    periods: usize,
    dt: f64,
    omega: f64,
    tau: f64,
    xi: f64,
    alpha: f64,
    n_modes: usize,
    m_t: usize,
    m_x: usize,
    a0: f64,
    a1: f64,
    k: f64,
    l: f64,
) -> PyResult<Vec<f64>> {
    let spec = build_spec(
        problem, omega, tau, xi, alpha, n_modes, m_t, m_x, "eigen", a0, a1, k, l,
    )?;
    let res = picard_solve(&spec, spec.zero_trajectory(), &PicardOptions::default())
        .map_err(err)?;
    let duration = tau.max(xi).max(dt);
    let nodes = (duration / dt).round() as usize + 1;
    let history = HistorySegment::from_periodic(
        &res.solution,
        duration,
        nodes,
        InterpRule::Spectral,
    )
    .map_err(err)?;
    let traj = simulate(&spec, &history, periods as f64 * omega, dt).map_err(err)?;
    distance_to_periodic(
        &traj,
        &res.solution,
        alpha,
        Convention::EigenConsistent,
        InterpRule::Spectral,
    )
    .map_err(err)
}

#[pymodule]
fn npde_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(check_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(validate_periodic, m)?)?;
    Ok(())
}
