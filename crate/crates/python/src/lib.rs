//! Python bindings: parameters, states, equilibria, R0, stability, the control
//! threshold and trajectory simulation.
//!
//! Library errors surface as subclasses of `DengueError`:
//! `ConfigurationError` (invalid inputs), `NumericalError` (solver or
//! eigenvalue failure) and `RegimeError` (e.g. mosquito collapse).

use dengue_core::equilibria::{self, Equilibrium, EquilibriumKind};
use dengue_core::integrator::{self, SolverConfig, Trajectory};
use dengue_core::linalg::{self, DenseMatrix};
use dengue_core::model::{self, ControlLevel, ModelParams, ParamSet, State7, State8};
use dengue_core::reproduction::{self, R0Route};
use dengue_core::stability::{self, Classification, StabilityReport};
use dengue_core::threshold::{self, ControlOutcome};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(dengue_control, DengueError, PyException, "Base class for model errors.");
create_exception!(
    dengue_control,
    ConfigurationError,
    DengueError,
    "Invalid parameters, state or settings."
);
create_exception!(
    dengue_control,
    NumericalError,
    DengueError,
    "A numerical routine failed."
);
create_exception!(
    dengue_control,
    RegimeError,
    DengueError,
    "The model is outside the requested regime."
);

fn to_py_err(e: dengue_core::Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        3 => NumericalError::new_err(msg),
        4 => RegimeError::new_err(msg),
        _ => ConfigurationError::new_err(msg),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for dengue_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn control(c: f64) -> PyResult<ControlLevel> {
    ControlLevel::new(c).py()
}

/// Validated model parameters. Every argument defaults to the Cape Verde 2009
/// value; `larval_capacity` defaults to `larvae_per_human * human_population`.
#[pyclass(name = "Params", module = "dengue_control", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: ModelParams,
}

const PARAM_NAMES: [&str; 15] = [
    "human_population",
    "biting_rate",
    "p_mosquito_to_human",
    "p_human_to_mosquito",
    "human_mortality",
    "human_recovery",
    "mosquito_mortality",
    "egg_deposition",
    "larval_mortality",
    "maturation",
    "extrinsic_incubation",
    "intrinsic_incubation",
    "mosquitoes_per_human",
    "larvae_per_human",
    "larval_capacity",
];

fn param_values(v: &ParamSet) -> [f64; 15] {
    [
        v.human_population,
        v.biting_rate,
        v.p_mosquito_to_human,
        v.p_human_to_mosquito,
        v.human_mortality,
        v.human_recovery,
        v.mosquito_mortality,
        v.egg_deposition,
        v.larval_mortality,
        v.maturation,
        v.extrinsic_incubation,
        v.intrinsic_incubation,
        v.mosquitoes_per_human,
        v.larvae_per_human,
        v.larval_capacity,
    ]
}

fn set_param(v: &mut ParamSet, name: &str, value: f64) -> PyResult<()> {
    let slot = match name {
        "human_population" => &mut v.human_population,
        "biting_rate" => &mut v.biting_rate,
        "p_mosquito_to_human" => &mut v.p_mosquito_to_human,
        "p_human_to_mosquito" => &mut v.p_human_to_mosquito,
        "human_mortality" => &mut v.human_mortality,
        "human_recovery" => &mut v.human_recovery,
        "mosquito_mortality" => &mut v.mosquito_mortality,
        "egg_deposition" => &mut v.egg_deposition,
        "larval_mortality" => &mut v.larval_mortality,
        "maturation" => &mut v.maturation,
        "extrinsic_incubation" => &mut v.extrinsic_incubation,
        "intrinsic_incubation" => &mut v.intrinsic_incubation,
        "mosquitoes_per_human" => &mut v.mosquitoes_per_human,
        "larvae_per_human" => &mut v.larvae_per_human,
        "larval_capacity" => &mut v.larval_capacity,
        other => return Err(ConfigurationError::new_err(format!("unknown parameter {other:?}"))),
    };
    *slot = value;
    Ok(())
}

/// Applies keyword overrides to `base`. K follows k·N_h unless given.
fn params_from(base: ParamSet, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<ModelParams> {
    let mut v = base;
    let mut capacity_given = false;
    if let Some(kw) = overrides {
        for (key, value) in kw.iter() {
            let name: String = key.extract()?;
            capacity_given |= name == "larval_capacity";
            set_param(&mut v, &name, value.extract()?)?;
        }
    }
    if !capacity_given {
        v.larval_capacity = v.larvae_per_human * v.human_population;
    }
    ModelParams::new(v).py()
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        Ok(Self {
            inner: params_from(ParamSet::default(), kwargs)?,
        })
    }

    /// The Cape Verde 2009 parameter set.
    #[staticmethod]
    fn cape_verde() -> Self {
        Self {
            inner: ModelParams::cape_verde(),
        }
    }

    /// A copy with some values replaced.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        Ok(Self {
            inner: params_from(*self.inner.values(), kwargs)?,
        })
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (name, value) in PARAM_NAMES.iter().zip(param_values(self.inner.values())) {
            d.set_item(name, value)?;
        }
        Ok(d)
    }

    fn __getattr__(&self, name: &str) -> PyResult<f64> {
        PARAM_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| param_values(self.inner.values())[i])
            .ok_or_else(|| pyo3::exceptions::PyAttributeError::new_err(name.to_string()))
    }

    /// Mosquito viability η_A·μ_b − (η_A + μ_A)(μ_m + c).
    #[pyo3(signature = (c = 0.0))]
    fn viability(&self, c: f64) -> PyResult<f64> {
        Ok(model::mosquito_viability(&self.inner, control(c)?))
    }

    /// (η_A + μ_A)(μ_m + c)/(μ_b·η_A); below one iff mosquitoes persist.
    #[pyo3(signature = (c = 0.0))]
    fn offspring_ratio(&self, c: f64) -> PyResult<f64> {
        model::basic_offspring_number(&self.inner, control(c)?).py()
    }

    /// Control level at which the mosquito population collapses.
    fn collapse_control(&self) -> f64 {
        model::collapse_control(&self.inner)
    }

    fn __repr__(&self) -> String {
        let fields: Vec<String> = PARAM_NAMES
            .iter()
            .zip(param_values(self.inner.values()))
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        format!("Params({})", fields.join(", "))
    }
}

/// Seven-component state (S_h, E_h, I_h, A_m, S_m, E_m, I_m); R_h is implied
/// by S_h + E_h + I_h + R_h = N_h.
#[pyclass(name = "State", module = "dengue_control", from_py_object)]
#[derive(Clone, Copy)]
struct PyState {
    #[pyo3(get, set)]
    s_h: f64,
    #[pyo3(get, set)]
    e_h: f64,
    #[pyo3(get, set)]
    i_h: f64,
    #[pyo3(get, set)]
    a_m: f64,
    #[pyo3(get, set)]
    s_m: f64,
    #[pyo3(get, set)]
    e_m: f64,
    #[pyo3(get, set)]
    i_m: f64,
}

impl From<State7> for PyState {
    fn from(x: State7) -> Self {
        Self {
            s_h: x.s_h,
            e_h: x.e_h,
            i_h: x.i_h,
            a_m: x.a_m,
            s_m: x.s_m,
            e_m: x.e_m,
            i_m: x.i_m,
        }
    }
}

impl From<PyState> for State7 {
    fn from(x: PyState) -> Self {
        State7 {
            s_h: x.s_h,
            e_h: x.e_h,
            i_h: x.i_h,
            a_m: x.a_m,
            s_m: x.s_m,
            e_m: x.e_m,
            i_m: x.i_m,
        }
    }
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (s_h = 0.0, e_h = 0.0, i_h = 0.0, a_m = 0.0, s_m = 0.0, e_m = 0.0, i_m = 0.0))]
    fn new(s_h: f64, e_h: f64, i_h: f64, a_m: f64, s_m: f64, e_m: f64, i_m: f64) -> Self {
        Self {
            s_h,
            e_h,
            i_h,
            a_m,
            s_m,
            e_m,
            i_m,
        }
    }

    /// Cape Verde 2009 start: E_h = 216, I_h = 434, larvae and adults at
    /// their Ω bounds, no infected mosquitoes.
    #[staticmethod]
    fn cape_verde() -> Self {
        dengue_core::cli::Scenario::cape_verde_2009().initial.into()
    }

    #[staticmethod]
    fn from_list(values: [f64; 7]) -> Self {
        State7::from_array(values).into()
    }

    #[allow(clippy::wrong_self_convention)]
    fn to_list(&self) -> [f64; 7] {
        State7::from(*self).to_array()
    }

    /// Whether the state lies in the admissible region for `params`.
    fn in_omega(&self, params: &PyParams) -> bool {
        model::in_omega(&params.inner, &(*self).into())
    }

    /// Time derivative at this state.
    #[pyo3(signature = (params, c = 0.0))]
    fn derivative(&self, params: &PyParams, c: f64) -> PyResult<Self> {
        Ok(model::rhs(&params.inner, control(c)?, &(*self).into()).py()?.into())
    }

    fn __repr__(&self) -> String {
        let x: State7 = (*self).into();
        let fields: Vec<String> = State7::NAMES
            .iter()
            .zip(x.to_array())
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        format!("State({})", fields.join(", "))
    }
}

#[pyclass(name = "Equilibrium", module = "dengue_control", frozen, skip_from_py_object)]
struct PyEquilibrium {
    inner: Equilibrium,
}

#[pymethods]
impl PyEquilibrium {
    /// "trivial", "brdfe" or "endemic".
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            EquilibriumKind::Trivial => "trivial",
            EquilibriumKind::Brdfe => "brdfe",
            EquilibriumKind::Endemic => "endemic",
        }
    }

    #[getter]
    fn state(&self) -> PyState {
        self.inner.state.into()
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.inner.residual_norm
    }

    #[getter]
    fn refined(&self) -> bool {
        self.inner.refined
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(kind={}, residual_norm={}, refined={})",
            self.kind(),
            self.inner.residual_norm,
            self.inner.refined
        )
    }
}

#[pyclass(name = "StabilityReport", module = "dengue_control", frozen, skip_from_py_object)]
struct PyStabilityReport {
    inner: StabilityReport,
}

#[pymethods]
impl PyStabilityReport {
    #[getter]
    fn eigenvalues(&self) -> Vec<Complex64> {
        self.inner.eigenvalues.clone()
    }

    #[getter]
    fn spectral_abscissa(&self) -> f64 {
        self.inner.spectral_abscissa
    }

    /// "stable", "unstable" or "marginal".
    #[getter]
    fn classification(&self) -> &'static str {
        match self.inner.classification {
            Classification::AsymptoticallyStable => "stable",
            Classification::Unstable => "unstable",
            Classification::Marginal => "marginal",
        }
    }

    #[getter]
    fn r0_at_point(&self) -> Option<f64> {
        self.inner.r0_at_point
    }

    fn __repr__(&self) -> String {
        format!(
            "StabilityReport(classification={}, spectral_abscissa={})",
            self.classification(),
            self.inner.spectral_abscissa
        )
    }
}

/// Simulation output on the reporting grid. Rows of `states` are
/// (S_h, E_h, I_h, R_h, A_m, S_m, E_m, I_m).
#[pyclass(name = "Trajectory", module = "dengue_control", frozen, skip_from_py_object)]
struct PyTrajectory {
    inner: Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[classattr]
    const COLUMNS: [&'static str; 8] = State8::NAMES;

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<[f64; 8]> {
        self.inner.states.iter().map(State8::to_array).collect()
    }

    /// Values of one compartment, by name (e.g. "I_h").
    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let i = State8::NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| ConfigurationError::new_err(format!("unknown column {name:?}")))?;
        Ok(self.inner.states.iter().map(|s| s.to_array()[i]).collect())
    }

    #[getter]
    fn accepted_steps(&self) -> usize {
        self.inner.step_stats.accepted
    }

    #[getter]
    fn rejected_steps(&self) -> usize {
        self.inner.step_stats.rejected
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Trajectory as CSV with a header row.
    fn to_csv(&self) -> String {
        dengue_core::cli::output::render_trajectory(&self.inner)
    }
}

fn route(name: &str) -> PyResult<R0Route> {
    match name {
        "closed_form" => Ok(R0Route::ClosedForm),
        "spectral" => Ok(R0Route::Spectral),
        other => Err(ConfigurationError::new_err(format!(
            "route must be \"closed_form\" or \"spectral\", got {other:?}"
        ))),
    }
}

/// Basic reproduction number at the disease-free equilibrium.
#[pyfunction]
#[pyo3(signature = (params, c = 0.0, route = "closed_form"))]
fn r0(params: &PyParams, c: f64, route: &str) -> PyResult<f64> {
    reproduction::r0(&params.inner, control(c)?, self::route(route)?).py()
}

/// (R_hm, R_mh) with R_hm·R_mh = R0².
#[pyfunction]
#[pyo3(signature = (params, c = 0.0))]
fn r0_factors(params: &PyParams, c: f64) -> PyResult<(f64, f64)> {
    let f = reproduction::r0_factors(&params.inner, control(c)?).py()?;
    Ok((f.human_to_mosquito, f.mosquito_to_human))
}

/// Next-generation matrix J_F·J_V⁻¹ over (E_h, I_h, E_m, I_m).
#[pyfunction]
#[pyo3(signature = (params, c = 0.0))]
fn next_generation_matrix(params: &PyParams, c: f64) -> PyResult<[[f64; 4]; 4]> {
    Ok(reproduction::build_ngm(&params.inner, control(c)?).py()?.ngm)
}

#[pyfunction]
fn trivial_equilibrium(params: &PyParams) -> PyEquilibrium {
    PyEquilibrium {
        inner: equilibria::trivial_equilibrium(&params.inner),
    }
}

/// Closed-form disease-free equilibrium with mosquitoes.
#[pyfunction]
#[pyo3(signature = (params, c = 0.0))]
fn brdfe(params: &PyParams, c: f64) -> PyResult<PyEquilibrium> {
    Ok(PyEquilibrium {
        inner: equilibria::brdfe(&params.inner, control(c)?).py()?,
    })
}

/// Newton-refined endemic equilibrium.
#[pyfunction]
#[pyo3(signature = (params, c = 0.0))]
fn endemic(params: &PyParams, c: f64) -> PyResult<PyEquilibrium> {
    Ok(PyEquilibrium {
        inner: equilibria::endemic(&params.inner, control(c)?).py()?,
    })
}

/// Damped Newton iteration on the vector field from `guess`.
#[pyfunction]
#[pyo3(signature = (params, guess, c = 0.0))]
fn refine(params: &PyParams, guess: PyState, c: f64) -> PyResult<PyEquilibrium> {
    Ok(PyEquilibrium {
        inner: equilibria::refine(&params.inner, control(c)?, &guess.into()).py()?,
    })
}

/// Local stability of an equilibrium from the Jacobian spectrum.
#[pyfunction]
#[pyo3(signature = (params, equilibrium, c = 0.0))]
fn classify(params: &PyParams, equilibrium: &PyEquilibrium, c: f64) -> PyResult<PyStabilityReport> {
    Ok(PyStabilityReport {
        inner: stability::classify(&params.inner, control(c)?, &equilibrium.inner).py()?,
    })
}

/// Jacobian of the vector field at `state`, row-major.
#[pyfunction]
#[pyo3(signature = (params, state, c = 0.0))]
fn jacobian(params: &PyParams, state: PyState, c: f64) -> PyResult<[[f64; 7]; 7]> {
    Ok(stability::jacobian(&params.inner, control(c)?, &state.into()))
}

/// Eigenvalues of a small square matrix, sorted by descending real part.
#[pyfunction]
fn eigenvalues(matrix: Vec<Vec<f64>>) -> PyResult<Vec<Complex64>> {
    let m = DenseMatrix::from_rows(&matrix)
        .ok_or_else(|| ConfigurationError::new_err("matrix must be square and non-empty"))?;
    linalg::eigenvalues(&m).py()
}

/// Minimum constant control with R0 < 1, as a dict with an `outcome` key:
/// "threshold", "no_control_needed" or "unattainable".
#[pyfunction]
#[pyo3(signature = (params, tol = threshold::DEFAULT_TOLERANCE, route = "closed_form"))]
fn min_control<'py>(py: Python<'py>, params: &PyParams, tol: f64, route: &str) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match threshold::min_control_with(&params.inner, tol, self::route(route)?).py()? {
        ControlOutcome::Threshold(t) => {
            d.set_item("outcome", "threshold")?;
            d.set_item("c_star", t.c_star)?;
            d.set_item("r0_at_c_star", t.r0_at_c_star)?;
            d.set_item("bracket", t.bracket)?;
            d.set_item("iterations", t.iterations)?;
            d.set_item("collapse_bound", t.collapse_bound)?;
        }
        ControlOutcome::NoControlNeeded { r0_uncontrolled } => {
            d.set_item("outcome", "no_control_needed")?;
            d.set_item("r0_uncontrolled", r0_uncontrolled)?;
        }
        ControlOutcome::Unattainable { collapse_bound } => {
            d.set_item("outcome", "unattainable")?;
            d.set_item("collapse_bound", collapse_bound)?;
        }
    }
    Ok(d)
}

/// (c, R0) pairs; R0 is None where the mosquito population collapses.
#[pyfunction]
fn r0_profile(params: &PyParams, grid: Vec<f64>) -> PyResult<Vec<(f64, Option<f64>)>> {
    Ok(threshold::r0_profile(&params.inner, &grid)
        .py()?
        .into_iter()
        .map(|p| (p.c, p.r0))
        .collect())
}

/// Adaptive Dormand–Prince integration. `initial` defaults to the Cape Verde
/// start; `atol` is relative to each compartment's scale.
#[pyfunction]
#[pyo3(signature = (
    params, c = 0.0, initial = None, t_end = 100.0, output_step = 0.5,
    rtol = 1e-8, atol = 1e-8, h_init = 1e-3, h_max = 1.0,
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    params: &PyParams,
    c: f64,
    initial: Option<PyState>,
    t_end: f64,
    output_step: f64,
    rtol: f64,
    atol: f64,
    h_init: f64,
    h_max: f64,
) -> PyResult<PyTrajectory> {
    let x0: State7 = initial.unwrap_or_else(PyState::cape_verde).into();
    let cfg = SolverConfig {
        t0: 0.0,
        t_end,
        rtol,
        atol,
        h_init,
        h_max,
        output_step,
    };
    cfg.validate().py()?;
    let level = control(c)?;
    let p = params.inner;
    let inner = py.detach(|| integrator::integrate(&p, level, &x0, &cfg)).py()?;
    Ok(PyTrajectory { inner })
}

#[pymodule]
fn dengue_control(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("DengueError", py.get_type::<DengueError>())?;
    m.add("ConfigurationError", py.get_type::<ConfigurationError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add("RegimeError", py.get_type::<RegimeError>())?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_class::<PyStabilityReport>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(r0, m)?)?;
    m.add_function(wrap_pyfunction!(r0_factors, m)?)?;
    m.add_function(wrap_pyfunction!(next_generation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(trivial_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(brdfe, m)?)?;
    m.add_function(wrap_pyfunction!(endemic, m)?)?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(min_control, m)?)?;
    m.add_function(wrap_pyfunction!(r0_profile, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
