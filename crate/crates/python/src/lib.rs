//! Python bindings for the carroll crate.

use carroll::coadjoint::{self, Moment};
use carroll::dynamics::{self, EomOutcome, EvolutionPoint, FieldSpec, Params, ScenarioKind};
use carroll::lie::{self, AlgebraElement, AlgebraKind, GroupElement};
use carroll::quantize::{self, GridSpec, Polarization, WaveFunction};
use carroll::{cli, gravity};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

fn err(e: carroll::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn algebra_kind(name: &str) -> PyResult<AlgebraKind> {
    match name {
        "carr3" | "Carr3" => Ok(AlgebraKind::Carr3),
        "carr2" | "Carr2" => Ok(AlgebraKind::Carr2),
        "ext_carr2" | "ExtCarr2" => Ok(AlgebraKind::ExtCarr2),
        _ => Err(PyValueError::new_err(format!("unknown algebra kind {name:?}"))),
    }
}

fn kind_name(k: AlgebraKind) -> &'static str {
    match k {
        AlgebraKind::Carr3 => "carr3",
        AlgebraKind::Carr2 => "carr2",
        AlgebraKind::ExtCarr2 => "ext_carr2",
    }
}

fn scenario_kind(name: &str) -> PyResult<ScenarioKind> {
    ScenarioKind::ALL
        .into_iter()
        .find(|k| format!("{k:?}").eq_ignore_ascii_case(name))
        .ok_or_else(|| PyValueError::new_err(format!("unknown scenario {name:?}")))
}

fn vec(v: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(v)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[pyclass(name = "Algebra", module = "carroll_py", from_py_object)]
#[derive(Clone)]
struct PyAlgebra(AlgebraElement);

#[pymethods]
impl PyAlgebra {
    /// Element from basis coordinates `(rotation, boost, translation, time, central)`.
    #[new]
    fn new(kind: &str, coords: Vec<f64>) -> PyResult<Self> {
        AlgebraElement::from_coords(algebra_kind(kind)?, &coords)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn basis(kind: &str) -> PyResult<Vec<Self>> {
        Ok(AlgebraElement::basis(algebra_kind(kind)?)
            .into_iter()
            .map(Self)
            .collect())
    }

    #[getter]
    fn kind(&self) -> &'static str {
        kind_name(self.0.kind())
    }

    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(self.0.to_matrix().entries())
    }

    fn bracket(&self, other: &Self) -> PyResult<Self> {
        lie::bracket(&self.0, &other.0).map(Self).map_err(err)
    }

    fn exp(&self) -> PyGroup {
        PyGroup(lie::exp(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Algebra({:?}, {:?})", kind_name(self.0.kind()), self.0.coords())
    }
}

#[pyclass(name = "Group", module = "carroll_py", from_py_object)]
#[derive(Clone)]
struct PyGroup(GroupElement);

#[pymethods]
impl PyGroup {
    /// Group element `(A, b, c, f)` with central parts `a1`, `a2` for the extended group.
    #[new]
    #[pyo3(signature = (kind, rot, b, c, f, a1 = 0.0, a2 = 0.0))]
    fn new(kind: &str, rot: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, f: f64, a1: f64, a2: f64) -> PyResult<Self> {
        GroupElement::new(algebra_kind(kind)?, matrix(rot)?, vec(b), vec(c), f, a1, a2)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn identity(kind: &str) -> PyResult<Self> {
        Ok(Self(GroupElement::identity(algebra_kind(kind)?)))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        kind_name(self.0.kind())
    }

    fn record(&self) -> Vec<f64> {
        self.0.to_record()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(self.0.to_matrix().entries())
    }

    fn compose(&self, other: &Self) -> PyResult<Self> {
        self.0.compose(&other.0).map(Self).map_err(err)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.compose(other)
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    /// Image of the event `(x, s)`.
    fn act_event(&self, x: Vec<f64>, s: f64) -> PyResult<(Vec<f64>, f64)> {
        let (y, t) = self.0.act_event(&vec(x), s).map_err(err)?;
        Ok((y.as_slice().to_vec(), t))
    }

    fn adjoint(&self, z: &PyAlgebra) -> PyResult<PyAlgebra> {
        coadjoint::adjoint(&self.0, &z.0).map(PyAlgebra).map_err(err)
    }

    fn coadjoint(&self, mu: &PyMoment) -> PyResult<PyMoment> {
        coadjoint::coadjoint(&self.0, &mu.0).map(PyMoment).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Group({:?}, {:?})", kind_name(self.0.kind()), self.0.to_record())
    }
}

#[pyclass(name = "Moment", module = "carroll_py", from_py_object)]
#[derive(Clone)]
struct PyMoment(Moment);

#[pymethods]
impl PyMoment {
    /// Moment from coordinates `(l, g, p, m, q1, q2)`.
    #[new]
    fn new(kind: &str, coords: Vec<f64>) -> PyResult<Self> {
        Moment::from_coords(algebra_kind(kind)?, &coords).map(Self).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        kind_name(self.0.kind())
    }

    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn pair(&self, z: &PyAlgebra) -> PyResult<f64> {
        coadjoint::pair(&self.0, &z.0).map_err(err)
    }

    fn casimirs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = coadjoint::casimirs(&self.0);
        let d = PyDict::new(py);
        d.set_item("c1", c.c1)?;
        d.set_item("c2", c.c2)?;
        d.set_item("c3", c.c3)?;
        d.set_item("c4", c.c4)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Moment({:?}, {:?})", kind_name(self.0.kind()), self.0.coords())
    }
}

#[pyclass(name = "Scenario", module = "carroll_py", from_py_object)]
#[derive(Clone)]
struct PyScenario(dynamics::Scenario);

#[pymethods]
impl PyScenario {
    /// One of the seven models in a uniform background `(e, b)`.
    #[new]
    #[pyo3(signature = (kind, m = 0.0, spin = 0.0, q = 0.0, mu = 0.0, q1 = 0.0, q2 = 0.0, theta = 0.0, e = None, b = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        kind: &str,
        m: f64,
        spin: f64,
        q: f64,
        mu: f64,
        q1: f64,
        q2: f64,
        theta: f64,
        e: Option<Vec<f64>>,
        b: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let kind = scenario_kind(kind)?;
        let field = kind.has_field().then(|| {
            let d = kind.spatial_dim();
            let rb = d * (d - 1) / 2;
            FieldSpec::uniform(e.unwrap_or(vec![0.0; d]), b.unwrap_or(vec![0.0; rb]))
        });
        let params = Params {
            m,
            spin,
            q,
            mu,
            q1,
            q2,
            theta,
        };
        dynamics::Scenario::new(kind, params, field).map(Self).map_err(err)
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.0.kind())
    }

    /// Evolution point for this model. Planar models read `fiber = (w, z)`, spinning ones `u`.
    #[pyo3(signature = (x, v, s = 0.0, u = None, fiber = (0.0, 0.0)))]
    fn point(&self, x: Vec<f64>, v: Vec<f64>, s: f64, u: Option<Vec<f64>>, fiber: (f64, f64)) -> PyResult<PyPoint> {
        let kind = self.0.kind();
        let y = if kind.is_planar() {
            EvolutionPoint::planar(vec(x), vec(v), s, fiber.0, fiber.1)
        } else if kind.has_spin() {
            let u = u.ok_or_else(|| PyValueError::new_err("spinning model needs u"))?;
            EvolutionPoint::with_spin(vec(x), vec(v), s, vec(u)).map_err(err)?
        } else {
            EvolutionPoint::spatial(vec(x), vec(v), s)
        };
        y.check_layout(&self.0).map_err(err)?;
        Ok(PyPoint(y))
    }

    /// Closed-form rates `(dx, dv, du)`, or `None` at a degenerate point.
    fn eom(&self, y: &PyPoint) -> PyResult<Option<Rates>> {
        Ok(tangent(dynamics::eom(&y.0, &self.0).map_err(err)?))
    }

    /// Same rates read off the kernel of the presymplectic form.
    fn eom_from_kernel(&self, y: &PyPoint) -> PyResult<Option<Rates>> {
        Ok(tangent(dynamics::eom_from_kernel(&y.0, &self.0).map_err(err)?))
    }

    fn kernel_dim(&self, y: &PyPoint) -> PyResult<usize> {
        dynamics::kernel_dim(&y.0, &self.0).map_err(err)
    }

    fn moment(&self, y: &PyPoint) -> PyResult<PyMoment> {
        coadjoint::moment_map(&y.0, &self.0).map(PyMoment).map_err(err)
    }

    /// RK4 run over `span` with a fixed step.
    fn integrate(&self, y0: &PyPoint, span: (f64, f64), step: f64) -> PyResult<PyTrajectory> {
        dynamics::integrate(&y0.0, &self.0, span, step)
            .map(PyTrajectory)
            .map_err(err)
    }
}

/// `(dx, dv, du)` with `du` only for spinning models.
type Rates = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

fn tangent(out: EomOutcome) -> Option<Rates> {
    out.tangent().map(|t| {
        (
            t.dx.as_slice().to_vec(),
            t.dv.as_slice().to_vec(),
            t.du.as_ref().map(|u| u.as_slice().to_vec()),
        )
    })
}

#[pyclass(name = "Point", module = "carroll_py", from_py_object)]
#[derive(Clone)]
struct PyPoint(EvolutionPoint);

#[pymethods]
impl PyPoint {
    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn transform(&self, a: &PyGroup) -> PyResult<Self> {
        self.0.transform(&a.0).map(Self).map_err(err)
    }
}

#[pyclass(name = "Trajectory", module = "carroll_py")]
struct PyTrajectory(dynamics::Trajectory);

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.0.samples.len()
    }

    #[getter]
    fn truncated(&self) -> bool {
        self.0.is_truncated()
    }

    #[getter]
    fn diagnostic(&self) -> Option<String> {
        self.0.diagnostic.clone()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        self.0
            .column(name)
            .ok_or_else(|| PyValueError::new_err(format!("no column {name:?}")))
    }

    fn header(&self) -> Vec<String> {
        self.0.csv_header()
    }

    fn max_moment_drift(&self) -> f64 {
        self.0.max_moment_drift()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

#[pyclass(name = "WaveFunction", module = "carroll_py", from_py_object)]
#[derive(Clone)]
struct PyWave(WaveFunction);

fn polarization(name: &str) -> PyResult<Polarization> {
    match name {
        "position" => Ok(Polarization::Position),
        "momentum" => Ok(Polarization::Momentum),
        _ => Err(PyValueError::new_err(format!("unknown polarization {name:?}"))),
    }
}

#[pymethods]
impl PyWave {
    /// Normalized Gaussian on the planar grid `[-half, half]^2` with `n` nodes per axis.
    #[staticmethod]
    #[pyo3(signature = (polarization, m, hbar = 1.0, half = 8.0, n = 64, center = vec![0.0, 0.0], width = 1.0))]
    fn gaussian(
        polarization: &str,
        m: f64,
        hbar: f64,
        half: f64,
        n: usize,
        center: Vec<f64>,
        width: f64,
    ) -> PyResult<Self> {
        let grid = GridSpec::cube(2, half, n).map_err(err)?;
        WaveFunction::gaussian(self::polarization(polarization)?, m, hbar, grid, &center, width)
            .map(Self)
            .map_err(err)
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn relative_l2_error(&self, other: &Self) -> PyResult<f64> {
        self.0.relative_l2_error(&other.0).map_err(err)
    }

    fn nodes(&self) -> Vec<Vec<f64>> {
        let g = self.0.grid();
        (0..g.len()).map(|i| g.node(i)).collect()
    }

    /// Profile at `s = 0` on every grid node.
    fn profile<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyComplex>> {
        self.0
            .profile()
            .into_iter()
            .map(|z| PyComplex::from_doubles(py, z.re, z.im))
            .collect()
    }

    /// Carroll group action; returns the image and the clipped mass fraction.
    fn rep(&self, a: &PyGroup) -> PyResult<(Self, f64)> {
        let out = quantize::rep(&a.0, &self.0).map_err(err)?;
        Ok((Self(out.psi), out.clipped_mass))
    }

    fn carroll_residual(&self, s: Vec<f64>) -> (f64, f64) {
        let r = quantize::carroll_residual(&self.0, &s);
        (r.analytic, r.finite_difference)
    }
}

/// Horizon data for Kerr-Newman parameters.
#[pyfunction]
fn kerr_newman_horizon<'py>(py: Python<'py>, mass: f64, a: f64, charge: f64) -> PyResult<Bound<'py, PyDict>> {
    let (_, r) = gravity::kerr_newman_horizon(mass, a, charge).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("r_plus", r.r_plus)?;
    d.set_item("xi_in_kernel", r.xi_in_kernel)?;
    d.set_item("lie_derivative", r.lie_derivative)?;
    d.set_item("kernel_dim", (r.kernel_dim_min, r.kernel_dim_max))?;
    d.set_item("torsion", r.torsion)?;
    Ok(d)
}

/// Runs a TOML job in memory; returns `(exit_code, csv, report_json)`.
#[pyfunction]
fn run_config(text: &str) -> PyResult<(i32, Option<String>, String)> {
    let cfg = cli::parse_config(text).map_err(err)?;
    let out = cli::run(&cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((out.status as i32, out.csv, out.report.to_string()))
}

#[pymodule]
fn carroll_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyMoment>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyWave>()?;
    m.add_function(wrap_pyfunction!(kerr_newman_horizon, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
